//! Accessibility relations `R_{a,ε}` over the worlds of a model.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::divergence::DivergenceKind;
use crate::error::SignatureError;
use crate::prob::{AgentSpec, Distribution, Model, RelationSpec};

/// A relation on world indices, stored as sorted successor lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    successors: Vec<Vec<usize>>,
}

impl Relation {
    pub fn from_pairs(worlds: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut successors = alloc::vec![Vec::new(); worlds];
        for (a, b) in pairs {
            successors[a].push(b);
        }
        for s in &mut successors {
            s.sort_unstable();
            s.dedup();
        }
        Relation { successors }
    }

    pub fn len(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, from: usize, to: usize) -> bool {
        self.successors[from].binary_search(&to).is_ok()
    }

    pub fn successors(&self, from: usize) -> &[usize] {
        &self.successors[from]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors.iter().enumerate().flat_map(|(a, s)| s.iter().map(move |&b| (a, b)))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.successors.len()).all(|w| self.contains(w, w))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(a, b)| self.contains(b, a))
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.pairs().all(|(a, b)| other.contains(a, b))
    }
}

/// Whether `to` is within `eps` of `from` under `kind`, in the declared
/// direction (`D(from ∥ to)`, or `D(to ∥ from)` with `swap`).
pub fn divergence_related(
    kind: DivergenceKind,
    swap: bool,
    eps: f64,
    from: &Distribution<usize>,
    to: &Distribution<usize>,
) -> bool {
    let d = if swap { kind.eval(to, from) } else { kind.eval(from, to) };
    d.within(eps)
}

pub(crate) fn check_epsilon(eps: f64) -> Result<f64, SignatureError> {
    if eps.is_nan() || eps < 0.0 {
        Err(SignatureError::InvalidEpsilon(eps))
    } else {
        Ok(eps)
    }
}

/// The threshold actually used for `agent`: the override if given, else the
/// declared one. Explicit relations have none and reject overrides.
pub fn effective_epsilon(agent: &AgentSpec, eps_override: Option<f64>) -> Result<Option<f64>, SignatureError> {
    match (&agent.relation, eps_override) {
        (RelationSpec::Explicit { .. }, Some(_)) => Err(SignatureError::EpsilonOnExplicit(agent.name.to_string())),
        (RelationSpec::Explicit { .. }, None) => Ok(None),
        (RelationSpec::Divergence { epsilon, .. }, None) => Ok(Some(*epsilon)),
        (RelationSpec::Divergence { .. }, Some(e)) => check_epsilon(e).map(Some),
    }
}

fn compute(model: &Model, agent: &AgentSpec, eps: Option<f64>, marginals: &[Distribution<usize>]) -> Relation {
    let n = model.worlds().len();
    match &agent.relation {
        RelationSpec::Explicit { pairs } => Relation::from_pairs(n, pairs.iter().copied()),
        RelationSpec::Divergence { kind, swap, .. } => {
            threshold_relation(marginals, *kind, *swap, eps.expect("divergence relations always have an epsilon"))
        }
    }
}

/// The relation `D(σ_w(var) ∥ σ_w'(var)) ≤ eps` on the model's worlds,
/// independent of any declared agent.
pub fn divergence_relation(model: &Model, var: usize, kind: DivergenceKind, swap: bool, eps: f64) -> Relation {
    let marginals: Vec<_> = model.worlds().iter().map(|w| model.marginal_indexed(w, var)).collect();
    threshold_relation(&marginals, kind, swap, eps)
}

fn threshold_relation(marginals: &[Distribution<usize>], kind: DivergenceKind, swap: bool, eps: f64) -> Relation {
    let mut pairs = Vec::new();
    for (a, from) in marginals.iter().enumerate() {
        for (b, to) in marginals.iter().enumerate() {
            if divergence_related(kind, swap, eps, from, to) {
                pairs.push((a, b));
            }
        }
    }
    Relation::from_pairs(marginals.len(), pairs)
}

/// `R_{a,ε}` for the named agent; `eps_override` replaces the agent's ε.
pub fn build_relation(model: &Model, agent: &str, eps_override: Option<f64>) -> Result<Relation, SignatureError> {
    let spec = model.agent(agent)?;
    let eps = effective_epsilon(spec, eps_override)?;
    let marginals: Vec<_> = model.worlds().iter().map(|w| model.marginal_indexed(w, spec.var)).collect();
    Ok(compute(model, spec, eps, &marginals))
}

/// Successor world ids of `world`, sorted.
pub fn accessible<'m>(
    model: &'m Model,
    agent: &str,
    world: &str,
    eps_override: Option<f64>,
) -> Result<Vec<&'m str>, SignatureError> {
    let from = model.world_index(world).ok_or_else(|| SignatureError::UnknownWorld(world.to_string()))?;
    let rel = build_relation(model, agent, eps_override)?;
    let mut ids: Vec<&str> = rel.successors(from).iter().map(|&w| model.worlds()[w].id()).collect();
    ids.sort_unstable();
    Ok(ids)
}

/// Relations memoized by `(agent, ε)` for repeated lookups over one model.
#[derive(Debug)]
pub struct RelationCache<'m> {
    model: &'m Model,
    marginals: BTreeMap<usize, Vec<Distribution<usize>>>,
    relations: BTreeMap<(usize, Option<u64>), Relation>,
}

impl<'m> RelationCache<'m> {
    pub fn new(model: &'m Model) -> Self {
        RelationCache { model, marginals: BTreeMap::new(), relations: BTreeMap::new() }
    }

    /// Marginals of every world on variable `var`, in world order.
    pub fn marginals(&mut self, var: usize) -> &[Distribution<usize>] {
        let model = self.model;
        self.marginals.entry(var).or_insert_with(|| model.worlds().iter().map(|w| model.marginal_indexed(w, var)).collect())
    }

    pub fn relation(&mut self, agent: usize, eps: Option<f64>) -> &Relation {
        let key = (agent, eps.map(|e| (e + 0.0).to_bits()));
        if !self.relations.contains_key(&key) {
            let spec = &self.model.agents()[agent];
            let marginals = self.marginals(spec.var).to_vec();
            let rel = compute(self.model, spec, eps, &marginals);
            self.relations.insert(key, rel);
        }
        &self.relations[&key]
    }
}
