//! Built-in scenarios with expected outcomes.

use clap::ValueEnum;
use serde_json::{json, Value};

use statel_core::applications::{check_secrecy, dp_check, dp_epsilon, dp_to_model, Mechanism, TestConfig, Threshold};
use statel_core::{parse_epistemic, EpistemicFormula, Evaluator, Model};

use crate::cli::Report;
use crate::envelope::Envelope;
use crate::io;

pub const COIN: &str = include_str!("../scenarios/coin.json");
pub const RANDOMIZED_RESPONSE: &str = include_str!("../scenarios/randomized_response.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// Two coins, heads 0.5 and 0.4, observed through a chi-square test.
    Coin,
    /// Randomized response with truth probability 3/4.
    #[value(name = "dp-rr")]
    DpRr,
}

/// One expectation and what was observed.
#[derive(Clone, Debug)]
pub struct Golden {
    pub name: String,
    pub expected: Value,
    pub actual: Value,
    pub ok: bool,
}

impl Golden {
    fn exact(name: impl Into<String>, expected: Value, actual: Value) -> Self {
        let ok = expected == actual;
        Golden { name: name.into(), expected, actual, ok }
    }

    fn close(name: impl Into<String>, expected: f64, actual: f64, tol: f64) -> Self {
        let ok = (expected - actual).abs() <= tol;
        Golden { name: name.into(), expected: json!(expected), actual: json!(actual), ok }
    }

    fn to_json(&self) -> Value {
        json!({ "name": self.name, "expected": self.expected, "actual": self.actual, "ok": self.ok })
    }
}

pub fn coin_goldens() -> Vec<Golden> {
    let model: Model = io::model_from_str(COIN, "coin").expect("bundled scenario is valid");
    let heads = |p: &str| parse_epistemic(&format!("Pr{{{p}}} heads(x)")).expect("fixed formula");
    let secrets = [heads("0.5"), heads("0.4")];
    let mut out = Vec::new();
    for n in [50u64, 500] {
        let cfg = TestConfig::new(0.05, n, 1).expect("fixed test");
        let eps = cfg.epsilon();
        out.push(Golden::close(format!("n={n}: epsilon"), 3.841458820694124 / n as f64, eps, 1e-9));
        let secret = check_secrecy(&model, &secrets, "a", Threshold::Test(cfg)).expect("scenario signature").secret;
        out.push(Golden::exact(format!("n={n}: heads probability secret from a"), json!(n == 50), json!(secret)));
        let k = EpistemicFormula::know("a", Some(eps), heads("0.5"));
        let known = Evaluator::new(&model).sat("w0", &k).expect("scenario signature").verdict;
        out.push(Golden::exact(format!("n={n}: a knows Pr{{0.5}} heads(x) at w0"), json!(n == 500), json!(known)));
    }
    out
}

pub fn dp_rr_goldens() -> Vec<Golden> {
    let mech: Mechanism = io::mechanism_from_str(RANDOMIZED_RESPONSE, "randomized_response").expect("bundled scenario is valid");
    let ln3 = 3f64.ln();
    let mut out = vec![Golden::close("tight epsilon", ln3, dp_epsilon(&mech).value(), 1e-9)];
    for (label, eps, expect) in [("ln 3 + 1e-9", ln3 + 1e-9, true), ("ln 3 - 1e-6", ln3 - 1e-6, false)] {
        let private = dp_check(&mech, eps).expect("valid epsilon").private;
        out.push(Golden::exact(format!("private at {label}"), json!(expect), json!(private)));
    }
    for eps in [1.0, ln3 + 1e-9, 1.2] {
        let direct = dp_check(&mech, eps).expect("valid epsilon").private;
        let (model, phi) = dp_to_model(&mech, eps).expect("small mechanism");
        let encoded = Evaluator::new(&model).valid(&phi).expect("encoding signature").verdict;
        out.push(Golden::exact(format!("encoded privacy verdict at epsilon = {eps}"), json!(direct), json!(encoded)));
    }
    out
}

pub fn run(scenario: Scenario) -> Report {
    let (name, goldens) = match scenario {
        Scenario::Coin => ("coin", coin_goldens()),
        Scenario::DpRr => ("dp-rr", dp_rr_goldens()),
    };
    let passed = goldens.iter().all(|g| g.ok);
    let human = goldens
        .iter()
        .map(|g| {
            if g.ok {
                format!("ok    {}: {}", g.name, g.actual)
            } else {
                format!("FAIL  {}: expected {}, got {}", g.name, g.expected, g.actual)
            }
        })
        .collect();
    let value = json!({ "scenario": name, "checks": goldens.iter().map(Golden::to_json).collect::<Vec<_>>() });
    Report { envelope: Envelope::new("suite", Some(passed), value), human }
}
