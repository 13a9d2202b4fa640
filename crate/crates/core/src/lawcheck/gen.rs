//! Random models and formulas for sampled law checks.
//!
//! World weights are multiples of 1/64 and interval endpoints come from a
//! small dyadic pool, so probabilities, complements and reflections are
//! exact in floating point.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::divergence::DivergenceKind;
use crate::error::ModelErrorKind;
use crate::formula::{EpistemicFormula, Interval, IntervalSet, StaticFormula};
use crate::prob::{AgentDocument, Model, ModelDocument, RelationSpec, StateDocument};

/// Weight unit for generated worlds.
pub const WEIGHT_UNITS: u32 = 64;

#[derive(Clone, Debug)]
pub struct AgentConfig {
    pub name: String,
    pub kind: DivergenceKind,
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct ModelGenConfig {
    pub max_worlds: usize,
    pub max_states: usize,
    pub max_outcomes: usize,
    /// Add a second variable `y` besides `x`.
    pub second_var: bool,
    pub agents: Vec<AgentConfig>,
}

impl Default for ModelGenConfig {
    fn default() -> Self {
        ModelGenConfig { max_worlds: 4, max_states: 5, max_outcomes: 3, second_var: true, agents: Vec::new() }
    }
}

impl ModelGenConfig {
    pub fn with_agent(mut self, name: &str, kind: DivergenceKind, epsilon: f64) -> Self {
        self.agents.push(AgentConfig { name: name.into(), kind, epsilon });
        self
    }
}

/// Splits `units` into `parts` positive integers.
fn split<R: Rng + ?Sized>(units: u32, parts: usize, rng: &mut R) -> Vec<u32> {
    let mut all: Vec<u32> = (1..units).collect();
    let mut cuts = all.partial_shuffle(rng, parts - 1).0.to_vec();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain([units]) {
        out.push(c - prev);
        prev = c;
    }
    out
}

fn random_document<R: Rng + ?Sized>(cfg: &ModelGenConfig, worlds: usize, rng: &mut R) -> ModelDocument {
    let outcomes = rng.gen_range(1..=cfg.max_outcomes.max(1));
    let states = rng.gen_range(1..=cfg.max_states.max(1));
    let domain: Vec<String> = (0..outcomes).map(|i| format!("o{i}")).collect();
    let vars: Vec<String> = if cfg.second_var { vec!["x".into(), "y".into()] } else { vec!["x".into()] };
    let mut doc = ModelDocument { domain: domain.clone(), vars: vars.clone(), ..Default::default() };
    doc.predicates.insert("p".into(), 1);
    doc.predicates.insert("q".into(), 2);
    doc.predicates.insert("r".into(), 0);
    for s in 0..states {
        let mut st = StateDocument::default();
        for v in &vars {
            st.assign.insert(v.clone(), domain.choose(rng).expect("nonempty domain").clone());
        }
        let p: Vec<Vec<String>> = domain.iter().filter(|_| rng.gen_bool(0.5)).map(|o| vec![o.clone()]).collect();
        let mut q = Vec::new();
        for a in &domain {
            for b in &domain {
                if rng.gen_bool(0.4) {
                    q.push(vec![a.clone(), b.clone()]);
                }
            }
        }
        let r = if rng.gen_bool(0.5) { vec![Vec::new()] } else { Vec::new() };
        st.atoms.insert("p".into(), p);
        st.atoms.insert("q".into(), q);
        st.atoms.insert("r".into(), r);
        doc.states.insert(format!("s{s}"), st);
    }
    for w in 0..worlds {
        let support_size = rng.gen_range(1..=states);
        let mut ids: Vec<usize> = (0..states).collect();
        ids.shuffle(rng);
        ids.truncate(support_size);
        let parts = split(WEIGHT_UNITS, support_size, rng);
        let weights: BTreeMap<String, f64> =
            ids.iter().zip(parts).map(|(s, k)| (format!("s{s}"), f64::from(k) / f64::from(WEIGHT_UNITS))).collect();
        doc.worlds.insert(format!("w{w}"), weights);
    }
    for a in &cfg.agents {
        doc.agents.insert(
            a.name.clone(),
            AgentDocument {
                var: "x".into(),
                divergence: a.kind.tag.as_str().into(),
                epsilon: Some(a.epsilon),
                symmetrize: a.kind.symmetrize,
                ..Default::default()
            },
        );
    }
    doc
}

/// A random valid model. Generation retries when two worlds coincide, and
/// falls back to fewer worlds if that keeps happening.
pub fn random_model<R: Rng + ?Sized>(cfg: &ModelGenConfig, rng: &mut R) -> Model {
    let mut worlds = rng.gen_range(1..=cfg.max_worlds.max(1));
    loop {
        for _ in 0..64 {
            match Model::from_document(&random_document(cfg, worlds, rng)) {
                Ok(m) => return m,
                Err(e) if e.kind == ModelErrorKind::DuplicateWorld => continue,
                Err(e) => panic!("generator produced an invalid model: {e}"),
            }
        }
        worlds = (worlds - 1).max(1);
    }
}

/// Endpoint pool: quarters plus two random multiples of 1/64.
pub fn endpoint_pool<R: Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
    let mut pool = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    for _ in 0..2 {
        pool.push(f64::from(rng.gen_range(0..=WEIGHT_UNITS)) / f64::from(WEIGHT_UNITS));
    }
    pool
}

pub fn random_interval_set<R: Rng + ?Sized>(pool: &[f64], rng: &mut R) -> IntervalSet {
    let terms = rng.gen_range(1..=2);
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let a = *pool.choose(rng).expect("nonempty pool");
        let b = *pool.choose(rng).expect("nonempty pool");
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if lo == hi && rng.gen_bool(0.5) {
            out.push(Interval::point(lo));
        } else {
            out.push(Interval { lo, lo_open: rng.gen_bool(0.5), hi, hi_open: rng.gen_bool(0.5) });
        }
    }
    IntervalSet::new(out).expect("pool endpoints lie in [0, 1]")
}

/// Atoms over the generator's signature: `p/1`, `q/2`, `r/0`.
pub fn atoms(model: &Model) -> Vec<StaticFormula> {
    let mut out = Vec::new();
    let vars: Vec<&str> = model.vars().iter().map(String::as_str).collect();
    for (name, arity) in model.predicates() {
        let mut tuples: Vec<Vec<&str>> = vec![Vec::new()];
        for _ in 0..*arity {
            tuples = tuples.into_iter().flat_map(|t| vars.iter().map(move |v| [t.clone(), vec![*v]].concat())).collect();
        }
        out.extend(tuples.iter().map(|t| StaticFormula::atom(name, t)));
    }
    out
}

pub fn random_static<R: Rng + ?Sized>(atoms: &[StaticFormula], depth: usize, rng: &mut R) -> StaticFormula {
    if depth == 0 || rng.gen_bool(0.4) {
        return atoms.choose(rng).expect("signature has atoms").clone();
    }
    match rng.gen_range(0..4) {
        0 => random_static(atoms, depth - 1, rng).not(),
        1 => random_static(atoms, depth - 1, rng).and(random_static(atoms, depth - 1, rng)),
        2 => random_static(atoms, depth - 1, rng).or(random_static(atoms, depth - 1, rng)),
        _ => random_static(atoms, depth - 1, rng).implies(random_static(atoms, depth - 1, rng)),
    }
}

/// What random epistemic formulas may mention.
#[derive(Clone, Debug)]
pub struct FormulaGen {
    pub atoms: Vec<StaticFormula>,
    /// Agent names with whether an ε override is allowed.
    pub agents: Vec<(String, bool)>,
    pub eps_choices: Vec<f64>,
    pub max_depth: usize,
}

impl FormulaGen {
    pub fn for_model(model: &Model) -> Self {
        let agents = model
            .agents()
            .iter()
            .map(|a| (a.name.clone(), matches!(a.relation, RelationSpec::Divergence { .. })))
            .collect();
        FormulaGen { atoms: atoms(model), agents, eps_choices: vec![0.0, 0.05, 0.1, 0.25], max_depth: 4 }
    }

    pub fn formula<R: Rng + ?Sized>(&self, rng: &mut R) -> EpistemicFormula {
        let pool = endpoint_pool(rng);
        self.node(self.max_depth, &pool, rng)
    }

    fn prob<R: Rng + ?Sized>(&self, pool: &[f64], rng: &mut R) -> EpistemicFormula {
        EpistemicFormula::Prob(random_interval_set(pool, rng), random_static(&self.atoms, 2, rng))
    }

    fn node<R: Rng + ?Sized>(&self, depth: usize, pool: &[f64], rng: &mut R) -> EpistemicFormula {
        if depth == 0 || rng.gen_bool(0.25) {
            return self.prob(pool, rng);
        }
        let d = depth - 1;
        let modal = if self.agents.is_empty() { 6 } else { 8 };
        match rng.gen_range(0..modal) {
            0 => self.prob(pool, rng),
            1 => self.node(d, pool, rng).not(),
            2 => self.node(d, pool, rng).and(self.node(d, pool, rng)),
            3 => self.node(d, pool, rng).or(self.node(d, pool, rng)),
            4 => self.node(d, pool, rng).implies(self.node(d, pool, rng)),
            5 => EpistemicFormula::given(random_static(&self.atoms, 1, rng), self.node(d, pool, rng)),
            k => {
                let (agent, overridable) = self.agents.choose(rng).expect("agents present");
                let eps = (*overridable && rng.gen_bool(0.5)).then(|| *self.eps_choices.choose(rng).expect("eps choices"));
                let body = self.node(d, pool, rng);
                if k == 6 {
                    EpistemicFormula::know(agent, eps, body)
                } else {
                    EpistemicFormula::possible(agent, eps, body)
                }
            }
        }
    }
}

/// `⋀_ψ Pr{p_w(ψ)} ψ` over the model's atoms: true at `w` and at any world
/// no atom probability tells apart from it. `None` without predicates.
pub fn characteristic(model: &Model, world: usize) -> Option<EpistemicFormula> {
    let w = &model.worlds()[world];
    atoms(model)
        .into_iter()
        .map(|a| {
            let p = crate::semantics::eval_prob(model, w, &a).expect("atoms come from the signature");
            EpistemicFormula::prob(IntervalSet::point(p.min(1.0)), a)
        })
        .reduce(EpistemicFormula::and)
}

/// Disjunction of characteristic formulas, `None` for the empty subset.
pub fn characteristic_of_set(model: &Model, worlds: &[usize]) -> Option<EpistemicFormula> {
    worlds.iter().map(|&w| characteristic(model, w)).collect::<Option<Vec<_>>>()?.into_iter().reduce(EpistemicFormula::or)
}

pub(crate) fn world_ids(model: &Model, ws: &[usize]) -> Vec<String> {
    ws.iter().map(|&w| model.worlds()[w].id().to_string()).collect()
}
