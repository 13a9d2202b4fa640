//! Executable checks of the logic's valid schemata.
//!
//! "For every φ" is read by sampling: each check draws random formulas over
//! the model's signature and reports the first instance that is not valid.
//! A pass is therefore evidence, not proof, and reports say so.

pub mod gen;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::accessibility::build_relation;
use crate::divergence::{DivergenceKind, DivergenceTag};
use crate::error::SignatureError;
use crate::formula::{EpistemicFormula, IntervalSet, StaticFormula};
use crate::prob::{AgentDocument, Model, ModelDocument, RelationSpec, StateDocument};
use crate::semantics::Evaluator;

use gen::{characteristic_of_set, endpoint_pool, random_interval_set, random_static, world_ids, FormulaGen, ModelGenConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Law {
    /// `¬P_I ψ ↔ P_{I^c} ψ`
    P1a,
    /// `P_I ¬ψ ↔ P_{1−I} ψ`
    P1b,
    /// from `⊨ φ` infer `⊨ K_a φ`
    N,
    /// `K_a(φ0 → φ1) → (K_a φ0 → K_a φ1)`
    K,
    /// `K_{a,ε} φ → φ`
    T,
    /// `K_{a,ε} φ → K_{a,ε'} φ` for `ε ≥ ε'`
    GE,
    /// `φ → K_{a,ε} L_{a,ε} φ`
    B,
    /// `K_{a,ε+ε'} φ → K_{a,ε} K_{a,ε'} φ`
    Q4,
    /// `L_{a,ε} φ → K_{a,ε'} L_{a,ε+ε'} φ`
    Q5,
    /// `K_{a,ε} φ → K_{a,ε} K_{a,ε} φ`
    Four,
    /// `L_{a,ε} φ → K_{a,ε} L_{a,ε} φ`
    Five,
}

impl Law {
    pub const ALL: [Law; 11] =
        [Law::P1a, Law::P1b, Law::N, Law::K, Law::T, Law::GE, Law::B, Law::Q4, Law::Q5, Law::Four, Law::Five];

    pub fn as_str(self) -> &'static str {
        match self {
            Law::P1a => "P1a",
            Law::P1b => "P1b",
            Law::N => "N",
            Law::K => "K",
            Law::T => "T",
            Law::GE => "GE",
            Law::B => "B",
            Law::Q4 => "4q",
            Law::Q5 => "5q",
            Law::Four => "4",
            Law::Five => "5",
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Law {
    type Err = LawError;
    fn from_str(s: &str) -> Result<Self, LawError> {
        Law::ALL.into_iter().find(|l| l.as_str() == s).ok_or_else(|| LawError::UnknownLaw(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LawError {
    #[error("unknown law `{0}`")]
    UnknownLaw(String),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("agent `{0}` has an explicit relation; this check needs a divergence-based one")]
    NotDivergence(String),
    #[error("agent `{agent}` uses {kind}, which is not a metric; quantitative transitivity needs total variation")]
    NotMetric { agent: String, kind: String },
    #[error("need eps >= eps' >= 0, got eps = {eps}, eps' = {eps_prime}")]
    EpsilonOrder { eps: f64, eps_prime: f64 },
    #[error("the model declares no predicates to build formulas from")]
    NoAtoms,
}

/// A concrete instance that fails: `formula` is false at `world`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub model: Model,
    pub world: String,
    pub formula: EpistemicFormula,
    pub eps: Vec<f64>,
    pub note: Option<String>,
}

impl Witness {
    /// Re-evaluates the instance; `true` when the violation reproduces.
    pub fn replay(&self) -> Result<bool, SignatureError> {
        Ok(!Evaluator::new(&self.model).sat(&self.world, &self.formula)?.verdict)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LawReport {
    pub law: Law,
    pub passed: bool,
    /// Instances actually tested.
    pub trials: usize,
    /// The search stopped at its budget without finding anything.
    pub exhausted: bool,
    pub note: String,
    pub witness: Option<Witness>,
}

impl LawReport {
    fn sampled(law: Law, trials: usize) -> Self {
        LawReport {
            law,
            passed: true,
            trials,
            exhausted: false,
            note: format!("no counterexample in {trials} sampled instances"),
            witness: None,
        }
    }

    fn failed(law: Law, trials: usize, witness: Witness) -> Self {
        LawReport { law, passed: false, trials, exhausted: false, note: "counterexample found".into(), witness: Some(witness) }
    }
}

struct Runner<'m> {
    model: &'m Model,
    ev: Evaluator<'m>,
}

impl<'m> Runner<'m> {
    fn new(model: &'m Model) -> Self {
        Runner { model, ev: Evaluator::new(model) }
    }

    /// The first world where `phi` fails, if any.
    fn counterexample(&mut self, phi: &EpistemicFormula) -> Result<Option<String>, SignatureError> {
        Ok(self.ev.valid(phi)?.world)
    }

    fn witness(&self, world: String, formula: EpistemicFormula, eps: &[f64]) -> Witness {
        Witness { model: self.model.clone(), world, formula, eps: eps.to_vec(), note: None }
    }

    /// Runs `trials` instances of a schema, stopping at the first failure.
    fn run<R: Rng + ?Sized>(
        &mut self,
        law: Law,
        trials: usize,
        eps: &[f64],
        rng: &mut R,
        mut instance: impl FnMut(&mut R) -> EpistemicFormula,
    ) -> Result<LawReport, SignatureError> {
        for t in 0..trials {
            let phi = instance(rng);
            if let Some(w) = self.counterexample(&phi)? {
                return Ok(LawReport::failed(law, t + 1, self.witness(w, phi, eps)));
            }
        }
        Ok(LawReport::sampled(law, trials))
    }
}

fn formula_gen(model: &Model) -> Result<FormulaGen, LawError> {
    let g = FormulaGen::for_model(model);
    if g.atoms.is_empty() {
        return Err(LawError::NoAtoms);
    }
    Ok(g)
}

/// Negation under the probability quantifier: P1a and P1b.
pub fn check_probability_laws<R: Rng + ?Sized>(model: &Model, trials: usize, rng: &mut R) -> Result<Vec<LawReport>, LawError> {
    let g = formula_gen(model)?;
    let mut r = Runner::new(model);
    let p1a = r.run(Law::P1a, trials, &[], rng, |rng| {
        let pool = endpoint_pool(rng);
        let i = random_interval_set(&pool, rng);
        let psi = random_static(&g.atoms, 2, rng);
        EpistemicFormula::prob(i.clone(), psi.clone()).not().iff(EpistemicFormula::prob(i.complement(), psi))
    })?;
    let p1b = r.run(Law::P1b, trials, &[], rng, |rng| {
        let pool = endpoint_pool(rng);
        let i = random_interval_set(&pool, rng);
        let psi = random_static(&g.atoms, 2, rng);
        EpistemicFormula::prob(i.clone(), psi.clone().not()).iff(EpistemicFormula::prob(i.reflect(), psi))
    })?;
    Ok(vec![p1a, p1b])
}

/// Necessitation and distribution, which hold for every relation.
pub fn check_minimal<R: Rng + ?Sized>(model: &Model, agent: &str, trials: usize, rng: &mut R) -> Result<Vec<LawReport>, LawError> {
    model.agent(agent)?;
    let g = formula_gen(model)?;
    let mut r = Runner::new(model);

    // N is a rule: only instances whose premise is valid say anything.
    let mut applicable = 0;
    let mut n_report = None;
    for t in 0..trials {
        let base = g.formula(rng);
        let phi = if rng.gen_bool(0.5) { base.clone().or(base.not()) } else { base };
        if r.counterexample(&phi)?.is_some() {
            continue;
        }
        applicable += 1;
        let kphi = EpistemicFormula::know(agent, None, phi);
        if let Some(w) = r.counterexample(&kphi)? {
            n_report = Some(LawReport::failed(Law::N, t + 1, r.witness(w, kphi, &[])));
            break;
        }
    }
    let n_report = n_report.unwrap_or_else(|| {
        let mut rep = LawReport::sampled(Law::N, applicable);
        rep.note = format!("no counterexample in {applicable} sampled instances with a valid premise ({trials} drawn)");
        rep
    });

    let k = |f| EpistemicFormula::know(agent, None, f);
    let k_report = r.run(Law::K, trials, &[], rng, |rng| {
        let (a, b) = (g.formula(rng), g.formula(rng));
        k(a.clone().implies(b.clone())).implies(k(a).implies(k(b)))
    })?;
    Ok(vec![n_report, k_report])
}

fn divergence_kind(model: &Model, agent: &str) -> Result<DivergenceKind, LawError> {
    match &model.agent(agent)?.relation {
        RelationSpec::Divergence { kind, .. } => Ok(*kind),
        RelationSpec::Explicit { .. } => Err(LawError::NotDivergence(agent.to_string())),
    }
}

/// T, GE and B for a divergence-based agent. B is sampled when the relation
/// kind is symmetric; otherwise a counterexample is searched for.
pub fn check_divergence_laws<R: Rng + ?Sized>(
    model: &Model,
    agent: &str,
    eps: f64,
    eps_prime: f64,
    trials: usize,
    rng: &mut R,
) -> Result<Vec<LawReport>, LawError> {
    if !(eps >= eps_prime && eps_prime >= 0.0) {
        return Err(LawError::EpsilonOrder { eps, eps_prime });
    }
    let kind = divergence_kind(model, agent)?;
    let g = formula_gen(model)?;
    let mut r = Runner::new(model);
    let k = |e: f64, f| EpistemicFormula::know(agent, Some(e), f);
    let l = |e: f64, f| EpistemicFormula::possible(agent, Some(e), f);

    let t = r.run(Law::T, trials, &[eps], rng, |rng| {
        let phi = g.formula(rng);
        k(eps, phi.clone()).implies(phi)
    })?;
    let ge = r.run(Law::GE, trials, &[eps, eps_prime], rng, |rng| {
        let phi = g.formula(rng);
        k(eps, phi.clone()).implies(k(eps_prime, phi))
    })?;
    let b = if kind.is_symmetric() {
        r.run(Law::B, trials, &[eps], rng, |rng| {
            let phi = g.formula(rng);
            phi.clone().implies(k(eps, l(eps, phi)))
        })?
    } else {
        search_b(&mut r, &g, agent, eps, trials, rng)?
    };
    Ok(vec![t, ge, b])
}

fn search_b<R: Rng + ?Sized>(
    r: &mut Runner<'_>,
    g: &FormulaGen,
    agent: &str,
    eps: f64,
    trials: usize,
    rng: &mut R,
) -> Result<LawReport, LawError> {
    let model = r.model;
    let b = |phi: EpistemicFormula| {
        phi.clone().implies(EpistemicFormula::know(agent, Some(eps), EpistemicFormula::possible(agent, Some(eps), phi)))
    };
    let rel = build_relation(model, agent, Some(eps))?;
    let mut tried = 0;
    // A one-way edge (w, w') is the shape of every failure; try the
    // formula that pins down w first.
    for (w, w2) in rel.pairs().filter(|&(a, b)| !rel.contains(b, a)) {
        let Some(chi) = characteristic_of_set(model, &[w]) else { break };
        tried += 1;
        let phi = b(chi);
        if let Some(at) = r.counterexample(&phi)? {
            let mut wit = r.witness(at, phi, &[eps]);
            let ids = world_ids(model, &[w, w2]);
            wit.note = Some(format!("({0}, {1}) is in the relation but ({1}, {0}) is not", ids[0], ids[1]));
            return Ok(LawReport::failed(Law::B, tried, wit));
        }
    }
    for _ in 0..trials {
        tried += 1;
        let phi = b(g.formula(rng));
        if let Some(at) = r.counterexample(&phi)? {
            return Ok(LawReport::failed(Law::B, tried, r.witness(at, phi, &[eps])));
        }
    }
    let mut rep = LawReport::sampled(Law::B, tried);
    rep.note = format!("relation kind is not symmetric; no counterexample in {tried} searched instances");
    Ok(rep)
}

/// 4q and 5q for a total-variation agent, plus 4 and 5 when both
/// thresholds are zero.
pub fn check_metric_laws<R: Rng + ?Sized>(
    model: &Model,
    agent: &str,
    eps: f64,
    eps_prime: f64,
    trials: usize,
    rng: &mut R,
) -> Result<Vec<LawReport>, LawError> {
    for e in [eps, eps_prime] {
        if e.is_nan() || e < 0.0 {
            return Err(SignatureError::InvalidEpsilon(e).into());
        }
    }
    let kind = divergence_kind(model, agent)?;
    if !kind.is_metric() {
        return Err(LawError::NotMetric { agent: agent.to_string(), kind: kind.to_string() });
    }
    let g = formula_gen(model)?;
    let mut r = Runner::new(model);
    let k = |e: f64, f| EpistemicFormula::know(agent, Some(e), f);
    let l = |e: f64, f| EpistemicFormula::possible(agent, Some(e), f);
    let sum = eps + eps_prime;
    let mut out = vec![
        r.run(Law::Q4, trials, &[eps, eps_prime], rng, |rng| {
            let phi = g.formula(rng);
            k(sum, phi.clone()).implies(k(eps, k(eps_prime, phi)))
        })?,
        r.run(Law::Q5, trials, &[eps, eps_prime], rng, |rng| {
            let phi = g.formula(rng);
            l(eps, phi.clone()).implies(k(eps_prime, l(sum, phi)))
        })?,
    ];
    if eps == 0.0 && eps_prime == 0.0 {
        out.push(r.run(Law::Four, trials, &[0.0], rng, |rng| {
            let phi = g.formula(rng);
            k(0.0, phi.clone()).implies(k(0.0, k(0.0, phi)))
        })?);
        out.push(r.run(Law::Five, trials, &[0.0], rng, |rng| {
            let phi = g.formula(rng);
            l(0.0, phi.clone()).implies(k(0.0, l(0.0, phi)))
        })?);
    }
    Ok(out)
}

/// Settings for [`find_counterexample_45`].
#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub eps: f64,
    /// Number of candidate models to examine.
    pub budget: usize,
    pub seed: u64,
    /// Random formulas tried per model after the characteristic ones.
    pub formulas_per_model: usize,
    /// Searched before any random model.
    pub model: Option<Model>,
    pub generator: ModelGenConfig,
}

impl SearchConfig {
    pub fn new(eps: f64, budget: usize, seed: u64) -> Self {
        SearchConfig {
            eps,
            budget,
            seed,
            formulas_per_model: 8,
            model: None,
            generator: ModelGenConfig::default().with_agent("a", DivergenceKind::new(DivergenceTag::Tv), eps),
        }
    }
}

fn transitivity_instance(agent: &str, eps: f64, phi: EpistemicFormula) -> EpistemicFormula {
    let k = |f| EpistemicFormula::know(agent, Some(eps), f);
    k(phi.clone()).implies(k(k(phi)))
}

fn search_model<R: Rng + ?Sized>(
    model: &Model,
    agent: &str,
    eps: f64,
    formulas: usize,
    rng: &mut R,
) -> Result<Option<(Witness, usize)>, LawError> {
    let mut r = Runner::new(model);
    let n = model.worlds().len();
    let mut tried = 0;
    let mut candidates: Vec<EpistemicFormula> = Vec::new();
    if n <= 8 {
        for mask in 1u32..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|w| mask & (1 << w) != 0).collect();
            candidates.extend(characteristic_of_set(model, &set));
        }
    }
    if let Ok(g) = formula_gen(model) {
        candidates.extend((0..formulas).map(|_| g.formula(rng)));
    }
    for phi in candidates {
        tried += 1;
        let inst = transitivity_instance(agent, eps, phi);
        if let Some(w) = r.counterexample(&inst)? {
            return Ok(Some((r.witness(w, inst, &[eps]), tried)));
        }
    }
    Ok(None)
}

/// Looks for a failure of plain transitivity `K_ε φ → K_ε K_ε φ` under
/// total variation. With `ε > 0` one usually exists; with `ε = 0` none can.
pub fn find_counterexample_45(cfg: &SearchConfig) -> Result<LawReport, LawError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tried = 0;
    let exhausted = |tried| LawReport {
        law: Law::Four,
        passed: true,
        trials: tried,
        exhausted: true,
        note: format!("budget exhausted after {tried} instances without a counterexample"),
        witness: None,
    };
    if cfg.budget == 0 {
        return Ok(exhausted(0));
    }
    let mut given = cfg.model.clone();
    for _ in 0..cfg.budget {
        let (model, agent) = match given.take() {
            Some(m) => {
                let agent = m
                    .agents()
                    .iter()
                    .find(|a| matches!(&a.relation, RelationSpec::Divergence { kind, .. } if kind.is_metric()))
                    .map(|a| a.name.clone())
                    .ok_or_else(|| LawError::NotMetric { agent: "*".into(), kind: "no total-variation agent".into() })?;
                (m, agent)
            }
            None => (gen::random_model(&cfg.generator, &mut rng), cfg.generator.agents[0].name.clone()),
        };
        match search_model(&model, &agent, cfg.eps, cfg.formulas_per_model, &mut rng)? {
            Some((wit, n)) => {
                tried += n;
                let mut rep = LawReport::failed(Law::Four, tried, wit);
                rep.note = format!("transitivity fails at eps = {}", cfg.eps);
                return Ok(rep);
            }
            None => tried += 1,
        }
    }
    Ok(exhausted(tried))
}

/// Three worlds whose `heads` probabilities are 0.6, 0.5 and 0.4, observed
/// through total variation at `eps`. Neighbours sit 0.1 apart and the ends
/// 0.2 apart, so with `eps = 0.1` the middle world sees both ends while the
/// ends do not see each other.
pub fn chain_model(eps: f64) -> Model {
    let mut doc = ModelDocument {
        domain: vec!["HEADS".into(), "TAILS".into()],
        vars: vec!["x".into()],
        ..Default::default()
    };
    doc.predicates.insert("heads".into(), 1);
    for (i, p) in [0.6, 0.5, 0.4].into_iter().enumerate() {
        for (side, out) in [("h", "HEADS"), ("t", "TAILS")] {
            let mut st = StateDocument::default();
            st.assign.insert("x".into(), out.into());
            st.atoms.insert("heads".into(), vec![vec!["HEADS".into()]]);
            doc.states.insert(format!("{side}{i}"), st);
        }
        doc.worlds.insert(format!("w{i}"), [(format!("h{i}"), p), (format!("t{i}"), 1.0 - p)].into_iter().collect());
    }
    doc.agents.insert(
        "a".into(),
        AgentDocument { var: "x".into(), divergence: "tv".into(), epsilon: Some(eps), ..Default::default() },
    );
    Model::from_document(&doc).expect("chain model is well formed")
}

/// `Pr[0.45,1] heads(x)`: true at the first two worlds of [`chain_model`].
pub fn chain_formula() -> EpistemicFormula {
    EpistemicFormula::prob(IntervalSet::closed(0.45, 1.0), StaticFormula::atom("heads", &["x"]))
}

/// Two worlds whose `heads` probabilities are 0.5 and 0.1, observed through
/// `divergence` at `eps`.
pub fn two_world_model(divergence: &str, eps: f64) -> Model {
    let mut doc = ModelDocument {
        domain: vec!["HEADS".into(), "TAILS".into()],
        vars: vec!["x".into()],
        ..Default::default()
    };
    doc.predicates.insert("heads".into(), 1);
    for (i, p) in [0.5, 0.1].into_iter().enumerate() {
        for (side, out) in [("h", "HEADS"), ("t", "TAILS")] {
            let mut st = StateDocument::default();
            st.assign.insert("x".into(), out.into());
            st.atoms.insert("heads".into(), vec![vec!["HEADS".into()]]);
            doc.states.insert(format!("{side}{i}"), st);
        }
        doc.worlds.insert(format!("w{i}"), [(format!("h{i}"), p), (format!("t{i}"), 1.0 - p)].into_iter().collect());
    }
    doc.agents.insert(
        "a".into(),
        AgentDocument { var: "x".into(), divergence: divergence.into(), epsilon: Some(eps), ..Default::default() },
    );
    Model::from_document(&doc).expect("two-world model is well formed")
}
