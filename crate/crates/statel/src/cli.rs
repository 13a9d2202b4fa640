//! Command-line interface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use statel_core::applications::{
    check_secrecy, chi2_quantile, dp_check, dp_epsilon, dp_to_model, ht_relation, ApplicationError, TestConfig, Threshold,
};
use statel_core::divergence::{DivergenceKind, DivergenceTag};
use statel_core::formula::{parse_epistemic, ParseError};
use statel_core::lawcheck::{
    check_divergence_laws, check_metric_laws, check_minimal, check_probability_laws, Law, LawError, LawReport,
};
use statel_core::{Evaluator, RelationSpec, SignatureError};

use crate::envelope::{extended, Envelope};
use crate::io::{self, IoError};
use crate::suite::{self, Scenario};

#[derive(Debug, Parser)]
#[command(name = "statel", version, about = "Statistical epistemic logic model checker")]
pub struct Cli {
    /// Print prose instead of the JSON envelope.
    #[arg(long, global = true, conflicts_with = "json")]
    pub human: bool,
    /// Print the JSON envelope (the default).
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a formula at one world, or for validity over all worlds.
    Check(CheckArgs),
    /// Divergence between two distributions.
    Divergence(DivergenceArgs),
    /// Upper-alpha critical value of the chi-square distribution.
    Quantile(QuantileArgs),
    /// The chi-square test relation on a model's worlds.
    Hypotest(HypotestArgs),
    /// Whether a set of formulas is statistically secret from an agent.
    Secrecy(SecrecyArgs),
    /// Differential privacy of a tabulated mechanism.
    #[command(subcommand)]
    Dp(DpCommand),
    /// Sampled checks of the logic's axiom schemata.
    Laws(LawsArgs),
    /// Built-in scenarios compared against expected results.
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, required_unless_present = "formula_file", conflicts_with = "formula_file")]
    pub formula: Option<String>,
    /// File holding the formula text.
    #[arg(long)]
    pub formula_file: Option<PathBuf>,
    /// Evaluate at this world; without it, check validity.
    #[arg(long)]
    pub world: Option<String>,
    /// Include the evaluation trace.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Chi2,
    Maxdiv,
    Tv,
    Js,
}

impl From<KindArg> for DivergenceTag {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Chi2 => DivergenceTag::Chi2,
            KindArg::Maxdiv => DivergenceTag::MaxDiv,
            KindArg::Tv => DivergenceTag::Tv,
            KindArg::Js => DivergenceTag::Js,
        }
    }
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Take the larger of both directions.
    #[arg(long)]
    pub sym: bool,
    #[arg(long)]
    pub p: PathBuf,
    #[arg(long)]
    pub q: PathBuf,
}

#[derive(Debug, Args)]
pub struct QuantileArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub df: u32,
}

#[derive(Debug, Args)]
pub struct HypotestArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub var: String,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub n: u64,
    /// Degrees of freedom; defaults to the domain size minus one.
    #[arg(long)]
    pub df: Option<u32>,
    /// Put the other world's marginal in the first argument.
    #[arg(long)]
    pub swap: bool,
}

#[derive(Debug, Args)]
pub struct SecrecyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub agent: String,
    /// One formula per line.
    #[arg(long)]
    pub formulas: PathBuf,
    #[arg(long, requires = "n", conflicts_with = "epsilon")]
    pub alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    pub n: Option<u64>,
    #[arg(long, requires = "alpha")]
    pub df: Option<u32>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum DpCommand {
    /// Audit a mechanism against a privacy budget, or infer the tight one.
    Audit(DpAuditArgs),
}

#[derive(Debug, Args)]
pub struct DpAuditArgs {
    #[arg(long)]
    pub mech: PathBuf,
    #[arg(long, required_unless_present = "infer", conflicts_with = "infer")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub infer: bool,
    /// Write the Kripke encoding of the mechanism to this file.
    #[arg(long)]
    pub encode_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LawsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub agent: String,
    /// Comma-separated laws: P1a, P1b, N, K, T, GE, B, 4q, 5q, 4, 5.
    #[arg(long, value_delimiter = ',', default_value = "P1a,P1b,N,K,T,GE,B")]
    pub check: Vec<String>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Defaults to the agent's declared epsilon.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub eps2: f64,
    #[arg(long, env = "STATEL_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(value_enum)]
    pub scenario: Scenario,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("formula: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Application(#[from] ApplicationError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("{0}")]
    Usage(String),
}

/// A command's result: the envelope plus a prose rendering.
pub struct Report {
    pub envelope: Envelope,
    pub human: Vec<String>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check(_) => "check",
            Command::Divergence(_) => "divergence",
            Command::Quantile(_) => "quantile",
            Command::Hypotest(_) => "hypotest",
            Command::Secrecy(_) => "secrecy",
            Command::Dp(_) => "dp audit",
            Command::Laws(_) => "laws",
            Command::Suite(_) => "suite",
        }
    }
}

pub fn run(cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Check(a) => check(a),
        Command::Divergence(a) => divergence(a),
        Command::Quantile(a) => quantile(a),
        Command::Hypotest(a) => hypotest(a),
        Command::Secrecy(a) => secrecy(a),
        Command::Dp(DpCommand::Audit(a)) => dp_audit(a),
        Command::Laws(a) => laws(a),
        Command::Suite(a) => Ok(suite::run(a.scenario)),
    }
}

fn verdict_word(v: bool) -> &'static str {
    if v {
        "holds"
    } else {
        "fails"
    }
}

fn check(a: &CheckArgs) -> Result<Report, CliError> {
    let model = io::load_model(&a.model)?;
    let text = match (&a.formula, &a.formula_file) {
        (Some(f), _) => f.clone(),
        (None, Some(p)) => std::fs::read_to_string(p).map_err(|source| IoError::Read { path: p.clone(), source })?,
        (None, None) => return Err(CliError::Usage("give --formula or --formula-file".into())),
    };
    let phi = parse_epistemic(text.trim())?;
    let mut ev = Evaluator::new(&model).with_trace(a.trace);
    let j = match &a.world {
        Some(w) => ev.sat(w, &phi)?,
        None => ev.valid(&phi)?,
    };
    let value = match &a.world {
        Some(w) => json!({ "formula": phi.to_string(), "world": w, "holds": j.verdict }),
        None => json!({ "formula": phi.to_string(), "world": Value::Null, "holds": j.verdict, "failing_world": j.world }),
    };
    let mut human = vec![match (&a.world, &j.world) {
        (Some(w), _) => format!("{phi} {} at {w}", verdict_word(j.verdict)),
        (None, Some(w)) => format!("{phi} is not valid: it fails at {w}"),
        (None, None) => format!("{phi} is valid"),
    }];
    if let Some(t) = &j.trace {
        render_trace(t, 0, &mut human);
    }
    let mut envelope = Envelope::new("check", Some(j.verdict), value);
    envelope.trace = j.trace.as_ref().map(|t| serde_json::to_value(t).expect("traces serialize"));
    Ok(Report { envelope, human })
}

fn render_trace(t: &statel_core::TraceNode, depth: usize, out: &mut Vec<String>) {
    let detail = t.detail.as_deref().map(|d| format!("  [{d}]")).unwrap_or_default();
    out.push(format!("{}{} @ {}: {}{detail}", "  ".repeat(depth + 1), t.formula, t.world, t.verdict));
    for c in &t.children {
        render_trace(c, depth + 1, out);
    }
}

fn divergence(a: &DivergenceArgs) -> Result<Report, CliError> {
    let p = io::load_distribution(&a.p)?;
    let q = io::load_distribution(&a.q)?;
    let kind = DivergenceKind { tag: a.kind.into(), symmetrize: a.sym };
    let d = kind.eval(&p, &q);
    let envelope = Envelope::new("divergence", None, json!({ "kind": kind.to_string(), "divergence": extended(d) }));
    Ok(Report { envelope, human: vec![d.to_string()] })
}

fn quantile(a: &QuantileArgs) -> Result<Report, CliError> {
    let c = chi2_quantile(a.alpha, a.df)?;
    let envelope = Envelope::new("quantile", None, json!({ "alpha": a.alpha, "df": a.df, "critical_value": c }));
    Ok(Report { envelope, human: vec![format!("c_alpha = {c} (alpha = {}, df = {})", a.alpha, a.df)] })
}

fn test_config(alpha: f64, n: u64, df: Option<u32>, outcomes: usize) -> Result<TestConfig, ApplicationError> {
    match df {
        Some(df) => TestConfig::new(alpha, n, df),
        None => TestConfig::for_outcomes(alpha, n, outcomes),
    }
}

fn hypotest(a: &HypotestArgs) -> Result<Report, CliError> {
    let model = io::load_model(&a.model)?;
    let cfg = test_config(a.alpha, a.n, a.df, model.domain().len())?;
    let r = ht_relation(&model, &a.var, &cfg, a.swap)?;
    let value = json!({
        "alpha": cfg.alpha,
        "n": cfg.n,
        "df": cfg.df,
        "critical_value": r.critical_value,
        "epsilon": r.epsilon,
        "swap": a.swap,
        "pairs": r.pairs,
    });
    let mut human = vec![format!("c_alpha = {}, epsilon = {}", r.critical_value, r.epsilon)];
    for p in &r.pairs {
        human.push(format!(
            "  {} -> {}: D = {:.6}, n*D = {:.4}, {}",
            p.from,
            p.to,
            p.divergence,
            p.statistic,
            if p.related { "indistinguishable" } else { "distinguished" }
        ));
    }
    Ok(Report { envelope: Envelope::new("hypotest", None, value), human })
}

fn secrecy(a: &SecrecyArgs) -> Result<Report, CliError> {
    let model = io::load_model(&a.model)?;
    let formulas = io::load_formulas(&a.formulas)?;
    let threshold = match (a.alpha, a.n, a.epsilon) {
        (Some(alpha), Some(n), None) => Threshold::Test(test_config(alpha, n, a.df, model.domain().len())?),
        (None, None, Some(e)) => Threshold::Epsilon(e),
        (None, None, None) => Threshold::Declared,
        _ => return Err(CliError::Usage("give either --alpha and --n, or --epsilon".into())),
    };
    let r = check_secrecy(&model, &formulas, &a.agent, threshold)?;
    let conjunct = r.failing_conjunct.map(|i| formulas[i].to_string());
    let value = json!({
        "epsilon": r.epsilon,
        "formula": r.formula.to_string(),
        "secret": r.secret,
        "failing_world": r.failing_world,
        "failing_conjunct": conjunct,
    });
    let human = vec![match (&r.failing_world, &conjunct) {
        (Some(w), Some(c)) => format!("not secret at epsilon = {}: at {w}, L[{}] {c} fails", r.epsilon, a.agent),
        (Some(w), None) => format!("not secret at epsilon = {}: fails at {w}", r.epsilon),
        _ => format!("secret at epsilon = {}", r.epsilon),
    }];
    Ok(Report { envelope: Envelope::new("secrecy", Some(r.secret), value), human })
}

fn dp_audit(a: &DpAuditArgs) -> Result<Report, CliError> {
    let mech = io::load_mechanism(&a.mech)?;
    let tight = dp_epsilon(&mech);
    let mut human = vec![format!("tight epsilon = {tight}")];
    let (verdict, mut value) = match a.epsilon {
        Some(eps) => {
            let r = dp_check(&mech, eps)?;
            let violation = r.violation.as_ref().map(|(d, d2, div)| json!({ "pair": [d, d2], "divergence": extended(*div) }));
            human.push(match &r.violation {
                None => format!("{eps}-differentially private"),
                Some((d, d2, div)) => format!("not {eps}-differentially private: ({d}, {d2}) at {div}"),
            });
            (Some(r.private), json!({ "epsilon": eps, "tight_epsilon": extended(tight), "private": r.private, "violation": violation }))
        }
        None => (None, json!({ "tight_epsilon": extended(tight) })),
    };
    if let Some(path) = &a.encode_model {
        let eps = a.epsilon.or(tight.finite()).ok_or_else(|| {
            CliError::Usage("the tight epsilon is infinite; give --epsilon to encode the mechanism".into())
        })?;
        let (model, phi) = dp_to_model(&mech, eps)?;
        io::write(path, &io::model_to_json(&model))?;
        let encoded = Evaluator::new(&model).valid(&phi)?.verdict;
        value["encoding"] = json!({ "path": path.display().to_string(), "epsilon": eps, "formula": phi.to_string(), "valid": encoded });
        human.push(format!("encoded model written to {}; formula {} at epsilon = {eps}", path.display(), verdict_word(encoded)));
    }
    Ok(Report { envelope: Envelope::new("dp audit", verdict, value), human })
}

fn law_json(r: &LawReport) -> Value {
    let witness = r.witness.as_ref().map(|w| {
        json!({
            "world": w.world,
            "formula": w.formula.to_string(),
            "eps": w.eps,
            "note": w.note,
            "model": w.model.to_document(),
        })
    });
    json!({
        "law": r.law.as_str(),
        "passed": r.passed,
        "trials": r.trials,
        "exhausted": r.exhausted,
        "note": r.note,
        "witness": witness,
    })
}

fn laws(a: &LawsArgs) -> Result<Report, CliError> {
    let model = io::load_model(&a.model)?;
    let wanted = a.check.iter().map(|s| s.trim().parse::<Law>()).collect::<Result<Vec<_>, _>>()?;
    let declared = match &model.agent(&a.agent)?.relation {
        RelationSpec::Divergence { epsilon, .. } => Some(*epsilon),
        RelationSpec::Explicit { .. } => None,
    };
    let eps = a.eps.or(declared);
    let need_eps = || eps.ok_or_else(|| CliError::Usage(format!("agent `{}` has no epsilon; give --eps", a.agent)));
    let has = |ls: &[Law]| ls.iter().any(|l| wanted.contains(l));
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut reports = Vec::new();
    if has(&[Law::P1a, Law::P1b]) {
        reports.extend(check_probability_laws(&model, a.trials, &mut rng)?);
    }
    if has(&[Law::N, Law::K]) {
        reports.extend(check_minimal(&model, &a.agent, a.trials, &mut rng)?);
    }
    if has(&[Law::T, Law::GE, Law::B]) {
        reports.extend(check_divergence_laws(&model, &a.agent, need_eps()?, a.eps2, a.trials, &mut rng)?);
    }
    if has(&[Law::Q4, Law::Q5]) {
        reports.extend(check_metric_laws(&model, &a.agent, need_eps()?, a.eps2, a.trials, &mut rng)?);
    }
    if has(&[Law::Four, Law::Five]) {
        reports.extend(check_metric_laws(&model, &a.agent, 0.0, 0.0, a.trials, &mut rng)?.into_iter().filter(|r| {
            matches!(r.law, Law::Four | Law::Five)
        }));
    }
    reports.retain(|r| wanted.contains(&r.law));
    reports.sort_by_key(|r| wanted.iter().position(|l| *l == r.law));
    let passed = reports.iter().all(|r| r.passed);
    let human = reports
        .iter()
        .map(|r| {
            let mut line = format!("{:>3}: {} ({})", r.law.as_str(), if r.passed { "pass" } else { "FAIL" }, r.note);
            if let Some(w) = &r.witness {
                line.push_str(&format!("; {} fails at {}", w.formula, w.world));
                if let Some(n) = &w.note {
                    line.push_str(&format!("; {n}"));
                }
            }
            line
        })
        .collect();
    let value = json!({ "eps": eps, "eps2": a.eps2, "trials": a.trials, "reports": reports.iter().map(law_json).collect::<Vec<_>>() });
    let mut envelope = Envelope::new("laws", Some(passed), value);
    envelope.seed = Some(a.seed);
    Ok(Report { envelope, human })
}

/// Parses arguments, runs the command and prints the result. Returns the
/// process exit code.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let name = cli.command.name();
    match run(&cli.command) {
        Ok(report) => {
            if cli.human {
                for line in &report.human {
                    println!("{line}");
                }
            } else {
                println!("{}", report.envelope.to_json());
            }
            report.envelope.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            if !cli.human {
                println!("{}", Envelope::failure(name, e.to_string()).to_json());
            }
            2
        }
    }
}
