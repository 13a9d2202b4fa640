//! χ² goodness-of-fit tests as accessibility relations, and statistical
//! secrecy.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::quantile::chi2_quantile;
use super::ApplicationError;
use crate::accessibility::{divergence_relation, Relation};
use crate::divergence::{chi2, DivergenceKind, DivergenceTag};
use crate::error::SignatureError;
use crate::formula::EpistemicFormula;
use crate::prob::{Model, RelationSpec};
use crate::semantics::Evaluator;

/// A test at significance `alpha` on `n` samples with `df` degrees of
/// freedom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestConfig {
    pub alpha: f64,
    pub n: u64,
    pub df: u32,
}

impl TestConfig {
    pub fn new(alpha: f64, n: u64, df: u32) -> Result<Self, ApplicationError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ApplicationError::Alpha(alpha));
        }
        if n == 0 {
            return Err(ApplicationError::SampleSize);
        }
        if df == 0 {
            return Err(ApplicationError::Df(df));
        }
        Ok(TestConfig { alpha, n, df })
    }

    /// `df = |O| − 1` for a goodness-of-fit test over `outcomes` cells.
    pub fn for_outcomes(alpha: f64, n: u64, outcomes: usize) -> Result<Self, ApplicationError> {
        let df = u32::try_from(outcomes.saturating_sub(1)).map_err(|_| ApplicationError::Df(u32::MAX))?;
        TestConfig::new(alpha, n, df)
    }

    pub fn critical_value(&self) -> f64 {
        chi2_quantile(self.alpha, self.df).expect("validated at construction")
    }

    /// `ε_{α,n} = c_α / n`.
    pub fn epsilon(&self) -> f64 {
        self.critical_value() / self.n as f64
    }
}

pub fn epsilon_alpha_n(cfg: &TestConfig) -> f64 {
    cfg.epsilon()
}

/// One ordered world pair of a hypothesis-test relation.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PairStatistic {
    pub from: String,
    pub to: String,
    pub divergence: f64,
    /// `n · D`, the Pearson statistic.
    pub statistic: f64,
    pub related: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HtReport {
    pub config: TestConfig,
    pub critical_value: f64,
    pub epsilon: f64,
    pub relation: Relation,
    pub pairs: Vec<PairStatistic>,
}

/// `R_{α,n} = {(w, w') | D_χ²(σ_w(x) ∥ σ_w'(x)) ≤ ε_{α,n}}`; `swap`
/// exchanges the arguments. Membership coincides with `n · D ≤ c_α`.
pub fn ht_relation(model: &Model, var: &str, cfg: &TestConfig, swap: bool) -> Result<HtReport, SignatureError> {
    let vi = model.var_index(var).ok_or_else(|| SignatureError::UnknownVariable(var.to_string()))?;
    let epsilon = cfg.epsilon();
    let relation = divergence_relation(model, vi, DivergenceKind::new(DivergenceTag::Chi2), swap, epsilon);
    let marginals: Vec<_> = model.worlds().iter().map(|w| model.marginal_indexed(w, vi)).collect();
    let mut pairs = Vec::new();
    for (a, wa) in model.worlds().iter().enumerate() {
        for (b, wb) in model.worlds().iter().enumerate() {
            let d = if swap { chi2(&marginals[b], &marginals[a]) } else { chi2(&marginals[a], &marginals[b]) };
            pairs.push(PairStatistic {
                from: wa.id().to_string(),
                to: wb.id().to_string(),
                divergence: d.value(),
                statistic: d.value() * cfg.n as f64,
                related: relation.contains(a, b),
            });
        }
    }
    Ok(HtReport { config: *cfg, critical_value: cfg.critical_value(), epsilon, relation, pairs })
}

/// Where the threshold for a secrecy check comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    /// `ε_{α,n}`; the agent must use a χ² relation.
    Test(TestConfig),
    Epsilon(f64),
    /// The agent's declared ε.
    Declared,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecrecyReport {
    pub secret: bool,
    pub epsilon: f64,
    /// `⋁Φ → ⋀_{φ ∈ Φ} L_{a,ε} φ`.
    pub formula: EpistemicFormula,
    pub failing_world: Option<String>,
    /// Index into Φ of the first conjunct that fails there.
    pub failing_conjunct: Option<usize>,
}

/// `Φ` is secret when `⋁Φ → ⋀_{φ ∈ Φ} L_{a,ε} φ` holds at every world.
pub fn check_secrecy(
    model: &Model,
    formulas: &[EpistemicFormula],
    agent: &str,
    threshold: Threshold,
) -> Result<SecrecyReport, ApplicationError> {
    if formulas.is_empty() {
        return Err(ApplicationError::EmptyFormulaSet);
    }
    let spec = model.agent(agent)?;
    let declared = match &spec.relation {
        RelationSpec::Divergence { kind, epsilon, .. } => (kind.tag, *epsilon),
        RelationSpec::Explicit { .. } => return Err(SignatureError::EpsilonOnExplicit(agent.to_string()).into()),
    };
    let epsilon = match threshold {
        Threshold::Test(cfg) => {
            if declared.0 != DivergenceTag::Chi2 {
                return Err(ApplicationError::NotChi2(agent.to_string()));
            }
            cfg.epsilon()
        }
        Threshold::Epsilon(e) => e,
        Threshold::Declared => declared.1,
    };
    let possible = |phi: &EpistemicFormula| EpistemicFormula::possible(agent, Some(epsilon), phi.clone());
    let any = formulas.iter().cloned().reduce(EpistemicFormula::or).expect("nonempty");
    let all = formulas.iter().map(possible).reduce(EpistemicFormula::and).expect("nonempty");
    let formula = any.implies(all);

    let mut ev = Evaluator::new(model);
    let judgment = ev.valid(&formula)?;
    let failing_conjunct = match &judgment.world {
        None => None,
        Some(w) => {
            let mut first = None;
            for (i, phi) in formulas.iter().enumerate() {
                if !ev.sat(w, &possible(phi))?.verdict {
                    first = Some(i);
                    break;
                }
            }
            first
        }
    };
    Ok(SecrecyReport { secret: judgment.verdict, epsilon, formula, failing_world: judgment.world, failing_conjunct })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_epistemic;
    use crate::prob::tests::coin_document;
    use crate::prob::AgentDocument;

    fn coin() -> Model {
        let mut doc = coin_document();
        doc.agents.insert("a".into(), AgentDocument { var: "x".into(), divergence: "chi2".into(), epsilon: Some(0.01), ..Default::default() });
        Model::from_document(&doc).unwrap()
    }

    #[test]
    fn epsilon_halves_with_doubled_sample() {
        let c50 = TestConfig::new(0.05, 50, 1).unwrap();
        let c100 = TestConfig::new(0.05, 100, 1).unwrap();
        assert_eq!(c100.epsilon(), c50.epsilon() / 2.0);
        assert!((c50.epsilon() - 0.0768292).abs() < 1e-6);
        assert!((TestConfig::new(0.05, 500, 1).unwrap().epsilon() - 0.0076829).abs() < 1e-6);
    }

    #[test]
    fn coin_relation_by_sample_size() {
        let m = coin();
        let r500 = ht_relation(&m, "x", &TestConfig::new(0.05, 500, 1).unwrap(), false).unwrap();
        assert!(!r500.relation.contains(0, 1));
        assert!((r500.pairs[1].statistic - 20.0).abs() < 1e-9);
        let r50 = ht_relation(&m, "x", &TestConfig::new(0.05, 50, 1).unwrap(), false).unwrap();
        assert!(r50.relation.contains(0, 1) && r50.relation.contains(1, 0));
    }

    #[test]
    fn coin_secrecy() {
        let m = coin();
        let phis = [parse_epistemic("Pr{0.5} heads(x)").unwrap(), parse_epistemic("Pr{0.4} heads(x)").unwrap()];
        let at = |n| check_secrecy(&m, &phis, "a", Threshold::Test(TestConfig::new(0.05, n, 1).unwrap())).unwrap();
        assert!(at(50).secret);
        let r = at(500);
        assert!(!r.secret);
        assert_eq!((r.failing_world.as_deref(), r.failing_conjunct), (Some("w0"), Some(1)));
        let never = [parse_epistemic("Pr{} heads(x)").unwrap()];
        assert!(check_secrecy(&m, &never, "a", Threshold::Epsilon(0.0)).unwrap().secret);
        assert!(matches!(check_secrecy(&m, &[], "a", Threshold::Declared), Err(ApplicationError::EmptyFormulaSet)));
    }
}
