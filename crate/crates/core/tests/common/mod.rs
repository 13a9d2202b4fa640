//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use statel_core::applications::{Mechanism, MechanismDocument};
use statel_core::formula::Interval;
use statel_core::prob::{AgentDocument, StateDocument};
use statel_core::{
    Distribution, EpistemicFormula, IntervalSet, Model, ModelDocument, RelationSpec, State, StaticFormula,
};

// ---------------------------------------------------------------------------
// Semantics by direct recursion over the sugared AST.
//
// Weights and interval endpoints are converted exactly to integers in units
// of 2^-56, so probabilities are exact fractions `num / den` and are compared
// with endpoints in integer arithmetic.

const SCALE: f64 = (1u64 << 56) as f64;

fn fixed(x: f64) -> i128 {
    let u = x * SCALE;
    assert!(u.fract() == 0.0, "{x} is not a multiple of 2^-56");
    u as i128
}

pub fn oracle_static(model: &Model, state: &State, psi: &StaticFormula) -> bool {
    match psi {
        StaticFormula::Atom { predicate, args } => {
            let p = model.predicate_index(predicate).expect("known predicate");
            let tuple: Vec<usize> = args.iter().map(|a| state.value(model.var_index(a).expect("known variable"))).collect();
            state.holds(p, &tuple)
        }
        StaticFormula::Not(a) => !oracle_static(model, state, a),
        StaticFormula::And(a, b) => oracle_static(model, state, a) && oracle_static(model, state, b),
    }
}

fn in_interval(iv: &Interval, num: i128, den: i128) -> bool {
    let (lo, hi) = (fixed(iv.lo), fixed(iv.hi));
    // num/den ⋚ lo/2^56  ⇔  2^56·num ⋚ lo·den
    let (x, l, h) = (fixed(1.0) * num, lo * den, hi * den);
    let above = if iv.lo_open { x > l } else { x >= l };
    let below = if iv.hi_open { x < h } else { x <= h };
    above && below
}

/// A world with a subset of its support kept.
#[derive(Clone)]
struct OView {
    base: usize,
    keep: BTreeMap<usize, i128>,
}

pub struct SemanticsOracle<'m> {
    model: &'m Model,
}

impl<'m> SemanticsOracle<'m> {
    pub fn new(model: &'m Model) -> Self {
        SemanticsOracle { model }
    }

    fn full(&self, w: usize) -> OView {
        OView { base: w, keep: self.model.worlds()[w].weights().map(|(s, x)| (s, fixed(x))).collect() }
    }

    pub fn sat(&self, world: usize, phi: &EpistemicFormula) -> bool {
        self.eval(&self.full(world), phi)
    }

    pub fn valid(&self, phi: &EpistemicFormula) -> bool {
        (0..self.model.worlds().len()).all(|w| self.sat(w, phi))
    }

    fn successors(&self, view: &OView, agent: &str, eps: Option<f64>) -> Vec<usize> {
        let spec = self.model.agent(agent).expect("known agent");
        let n = self.model.worlds().len();
        match &spec.relation {
            RelationSpec::Explicit { pairs } => (0..n).filter(|&w| pairs.contains(&(view.base, w))).collect(),
            RelationSpec::Divergence { kind, epsilon, swap } => {
                let eps = eps.unwrap_or(*epsilon);
                let world = &self.model.worlds()[view.base];
                let here = if view.keep.len() == world.dist().len() {
                    self.model.marginal_indexed(world, spec.var)
                } else {
                    // Normalized the way the evaluator does it so knife-edge
                    // float comparisons come out the same.
                    let norm: f64 = view.keep.keys().map(|s| world.dist().get(s)).sum();
                    let mut m = BTreeMap::new();
                    for &s in view.keep.keys() {
                        let w = world.dist().get(&s);
                        *m.entry(self.model.states()[s].value(spec.var)).or_insert(0.0) += w / norm;
                    }
                    Distribution::new(m).expect("normalized marginal")
                };
                (0..n)
                    .filter(|&w| {
                        let there = self.model.marginal_indexed(&self.model.worlds()[w], spec.var);
                        let d = if *swap { kind.eval(&there, &here) } else { kind.eval(&here, &there) };
                        d.within(eps)
                    })
                    .collect()
            }
        }
    }

    fn eval(&self, view: &OView, phi: &EpistemicFormula) -> bool {
        use EpistemicFormula as E;
        match phi {
            E::Prob(iset, psi) => {
                let states = self.model.states();
                let den: i128 = view.keep.values().sum();
                let num: i128 = view.keep.iter().filter(|(s, _)| oracle_static(self.model, &states[**s], psi)).map(|(_, u)| u).sum();
                iset.intervals().iter().any(|iv| in_interval(iv, num, den))
            }
            E::Not(a) => !self.eval(view, a),
            E::And(a, b) => self.eval(view, a) && self.eval(view, b),
            E::Or(a, b) => self.eval(view, a) || self.eval(view, b),
            E::Imp(a, b) => !self.eval(view, a) || self.eval(view, b),
            E::Given(psi, body) => {
                let states = self.model.states();
                let keep: BTreeMap<usize, i128> =
                    view.keep.iter().filter(|(s, _)| oracle_static(self.model, &states[**s], psi)).map(|(s, u)| (*s, *u)).collect();
                !keep.is_empty() && self.eval(&OView { base: view.base, keep }, body)
            }
            E::Know { agent, eps, body } => self.successors(view, agent, *eps).into_iter().all(|w| self.sat(w, body)),
            E::Possible { agent, eps, body } => self.successors(view, agent, *eps).into_iter().any(|w| self.sat(w, body)),
        }
    }
}

// ---------------------------------------------------------------------------
// Max divergence over every nonempty subset of the first support. The log
// is libm's, as in the library, so only the maximization is compared.

pub fn max_div_brute(mu: &[(usize, f64)], nu: &[(usize, f64)]) -> f64 {
    let get = |d: &[(usize, f64)], k: usize| d.iter().find(|(x, _)| *x == k).map_or(0.0, |(_, p)| *p);
    let supp: Vec<usize> = mu.iter().filter(|(_, p)| *p > 0.0).map(|(k, _)| *k).collect();
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1 << supp.len()) {
        let r: Vec<usize> = (0..supp.len()).filter(|i| mask & (1 << i) != 0).map(|i| supp[i]).collect();
        let m: f64 = r.iter().map(|&k| get(mu, k)).sum();
        let n: f64 = r.iter().map(|&k| get(nu, k)).sum();
        let v = if n == 0.0 { f64::INFINITY } else { libm::log(m / n) };
        best = best.max(v);
    }
    best
}

/// `k` positive multiples of `1/units` summing to one, on keys `0..k` with
/// some keys left at zero.
pub fn dyadic_weights<R: Rng>(keys: usize, units: u32, zeros: bool, rng: &mut R) -> Vec<(usize, f64)> {
    let mut alive: Vec<usize> = (0..keys).filter(|_| !zeros || rng.gen_bool(0.7)).collect();
    if alive.is_empty() {
        alive.push(rng.gen_range(0..keys));
    }
    let mut cuts: Vec<u32> = (0..alive.len() - 1).map(|_| rng.gen_range(0..=units)).collect();
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::new();
    for (k, c) in alive.iter().zip(cuts.into_iter().chain([units])) {
        if c > prev {
            out.push((*k, f64::from(c - prev) / f64::from(units)));
        }
        prev = c;
    }
    out
}

pub fn distribution(w: &[(usize, f64)]) -> Distribution<usize> {
    Distribution::new(w.iter().copied()).expect("weights sum to one")
}

// ---------------------------------------------------------------------------
// Differential privacy by enumerating every output set.

/// For each adjacent pair and both directions, `Pr[A(d) ∈ R] ≤ e^ε Pr[A(d') ∈ R]`
/// over every `R ⊆ O`.
pub fn dp_brute(rows: &[Vec<f64>], adjacency: &[(usize, usize)], eps: f64) -> bool {
    let outputs = rows[0].len();
    let bound = eps.exp();
    adjacency.iter().all(|&(a, b)| {
        [(a, b), (b, a)].into_iter().all(|(d, d2)| {
            (1u32..(1 << outputs)).all(|mask| {
                let mass = |row: &[f64]| (0..outputs).filter(|o| mask & (1 << o) != 0).map(|o| row[o]).sum::<f64>();
                mass(&rows[d]) <= bound * mass(&rows[d2])
            })
        })
    })
}

pub struct RandomMechanism {
    pub rows: Vec<Vec<f64>>,
    pub adjacency: Vec<(usize, usize)>,
    pub mechanism: Mechanism,
}

pub fn random_mechanism<R: Rng>(rng: &mut R) -> RandomMechanism {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=4);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let w = dyadic_weights(m, 64, true, rng);
            (0..m).map(|o| w.iter().find(|(k, _)| *k == o).map_or(0.0, |(_, p)| *p)).collect()
        })
        .collect();
    let mut adjacency = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.6) {
                adjacency.push((a, b));
            }
        }
    }
    let inputs: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
    let outputs: Vec<String> = (0..m).map(|o| format!("o{o}")).collect();
    let doc = MechanismDocument {
        inputs: inputs.clone(),
        outputs: outputs.clone(),
        table: rows
            .iter()
            .enumerate()
            .map(|(i, r)| (inputs[i].clone(), r.iter().enumerate().map(|(o, p)| (outputs[o].clone(), *p)).collect()))
            .collect(),
        adjacency: adjacency.iter().map(|&(a, b)| (inputs[a].clone(), inputs[b].clone())).collect(),
    };
    let mechanism = Mechanism::from_document(&doc).expect("generated mechanism is valid");
    RandomMechanism { rows, adjacency, mechanism }
}

// ---------------------------------------------------------------------------
// χ² quantile by bisection on an independently computed CDF.

/// Upper tail of χ² with one degree of freedom: `erfc(√(x/2))`.
pub fn chi2_sf_df1(x: f64) -> f64 {
    libm::erfc((x / 2.0).sqrt())
}

/// Upper tail of χ² with two degrees of freedom: `e^{-x/2}`.
pub fn chi2_sf_df2(x: f64) -> f64 {
    (-x / 2.0).exp()
}

pub fn bisect_quantile(sf: impl Fn(f64) -> f64, alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while sf(hi) > alpha {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Fixtures.

/// Two coins with heads probability 0.5 and 0.4 observed by `a` through χ².
pub fn coin_model(eps: f64) -> Model {
    let mut doc = ModelDocument { domain: vec!["HEADS".into(), "TAILS".into()], vars: vec!["x".into()], ..Default::default() };
    doc.predicates.insert("heads".into(), 1);
    for (i, p) in [0.5, 0.4].into_iter().enumerate() {
        for (side, out) in [("h", "HEADS"), ("t", "TAILS")] {
            let mut st = StateDocument::default();
            st.assign.insert("x".into(), out.into());
            st.atoms.insert("heads".into(), vec![vec!["HEADS".into()]]);
            doc.states.insert(format!("{side}{i}"), st);
        }
        doc.worlds.insert(format!("w{i}"), [(format!("h{i}"), p), (format!("t{i}"), 1.0 - p)].into_iter().collect());
    }
    doc.agents.insert("a".into(), AgentDocument { var: "x".into(), divergence: "chi2".into(), epsilon: Some(eps), ..Default::default() });
    Model::from_document(&doc).expect("coin model is well formed")
}

// ---------------------------------------------------------------------------
// Random formulas for printer round trips. Endpoints and thresholds are
// arbitrary floats, and names include the ones the lexer treats specially.

const PREDICATES: &[&str] = &["p", "heads", "u", "K", "L", "q_2", "Win"];
const VARS: &[&str] = &["x", "y", "u", "K", "z9"];
const AGENTS: &[&str] = &["a", "alice", "u", "K", "L", "Pr"];

fn endpoint<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..4) {
        0 => *[0.0, 0.25, 0.5, 1.0].choose(rng).unwrap(),
        1 => f64::from(rng.gen_range(0..=1000u32)) / 1000.0,
        _ => rng.gen::<f64>(),
    }
}

pub fn random_interval_set<R: Rng>(rng: &mut R) -> IntervalSet {
    let terms = rng.gen_range(0..=3);
    let ivs: Vec<Interval> = (0..terms)
        .map(|_| {
            let (a, b) = (endpoint(rng), endpoint(rng));
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if rng.gen_bool(0.2) {
                Interval::point(lo)
            } else {
                Interval { lo, lo_open: rng.gen_bool(0.5), hi, hi_open: rng.gen_bool(0.5) }
            }
        })
        .collect();
    IntervalSet::new(ivs).expect("endpoints in [0, 1]")
}

pub fn random_static_ast<R: Rng>(depth: usize, rng: &mut R) -> StaticFormula {
    if depth == 0 || rng.gen_bool(0.35) {
        let arity = rng.gen_range(0..=2);
        let args: Vec<&str> = (0..arity).map(|_| *VARS.choose(rng).unwrap()).collect();
        return StaticFormula::atom(PREDICATES.choose(rng).unwrap(), &args);
    }
    match rng.gen_range(0..4) {
        0 => random_static_ast(depth - 1, rng).not(),
        1 => random_static_ast(depth - 1, rng).and(random_static_ast(depth - 1, rng)),
        2 => random_static_ast(depth - 1, rng).or(random_static_ast(depth - 1, rng)),
        _ => random_static_ast(depth - 1, rng).implies(random_static_ast(depth - 1, rng)),
    }
}

pub fn random_epistemic_ast<R: Rng>(depth: usize, rng: &mut R) -> EpistemicFormula {
    use EpistemicFormula as E;
    if depth == 0 || rng.gen_bool(0.25) {
        return E::prob(random_interval_set(rng), random_static_ast(2, rng));
    }
    let d = depth - 1;
    let eps = |rng: &mut R| rng.gen_bool(0.5).then(|| if rng.gen_bool(0.5) { rng.gen::<f64>() } else { f64::from(rng.gen_range(0..100u32)) / 100.0 });
    match rng.gen_range(0..7) {
        0 => random_epistemic_ast(d, rng).not(),
        1 => random_epistemic_ast(d, rng).and(random_epistemic_ast(d, rng)),
        2 => random_epistemic_ast(d, rng).or(random_epistemic_ast(d, rng)),
        3 => random_epistemic_ast(d, rng).implies(random_epistemic_ast(d, rng)),
        4 => E::given(random_static_ast(2, rng), random_epistemic_ast(d, rng)),
        5 => {
            let e = eps(rng);
            E::know(AGENTS.choose(rng).unwrap(), e, random_epistemic_ast(d, rng))
        }
        _ => {
            let e = eps(rng);
            E::possible(AGENTS.choose(rng).unwrap(), e, random_epistemic_ast(d, rng))
        }
    }
}
