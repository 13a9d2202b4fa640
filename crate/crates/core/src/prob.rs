//! Finite distributions, states, worlds and distributional Kripke models.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::divergence::{DivergenceKind, DivergenceTag};
use crate::error::{ModelError, ModelErrorKind, SignatureError};
use crate::formula::{is_identifier, StaticFormula, RESERVED_WORDS};
use crate::semantics::static_holds;

/// Absolute tolerance for every probability-sum check.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// An element of a model's declared outcome domain.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(transparent))]
pub struct Outcome(pub String);

impl Outcome {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Outcome {
    fn from(s: &str) -> Self {
        Outcome(s.to_owned())
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DistributionError {
    #[error("weight {0} is negative or not finite")]
    BadWeight(f64),
    #[error("weights sum to {0}, expected 1")]
    Sum(f64),
}

/// A finite probability distribution. Only strictly positive weights are
/// stored, so the key set is exactly the support.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<K: Ord> {
    weights: BTreeMap<K, f64>,
}

impl<K: Ord + Clone> Distribution<K> {
    /// Builds a distribution, merging repeated keys and dropping zeros.
    pub fn new<I: IntoIterator<Item = (K, f64)>>(weights: I) -> Result<Self, DistributionError> {
        let mut map = BTreeMap::new();
        for (k, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(DistributionError::BadWeight(w));
            }
            *map.entry(k).or_insert(0.0) += w;
        }
        map.retain(|_, w| *w > 0.0);
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(DistributionError::Sum(total));
        }
        Ok(Distribution { weights: map })
    }

    pub fn point(k: K) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(k, 1.0);
        Distribution { weights }
    }

    /// Skips the sum check; zero entries are still dropped.
    pub(crate) fn from_map(mut weights: BTreeMap<K, f64>) -> Self {
        weights.retain(|_, w| *w > 0.0);
        Distribution { weights }
    }

    pub fn get(&self, k: &K) -> f64 {
        self.weights.get(k).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, k: &K) -> bool {
        self.weights.contains_key(k)
    }

    pub fn support(&self) -> impl Iterator<Item = &K> + '_ {
        self.weights.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> + '_ {
        self.weights.iter().map(|(k, w)| (k, *w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `μ[R]` for a set of keys `R`.
    pub fn mass<'a, I>(&self, keys: I) -> f64
    where
        I: IntoIterator<Item = &'a K>,
        K: 'a,
    {
        keys.into_iter().map(|k| self.get(k)).sum()
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn map_keys<K2: Ord + Clone>(&self, mut f: impl FnMut(&K) -> K2) -> Distribution<K2> {
        let mut out = BTreeMap::new();
        for (k, w) in &self.weights {
            *out.entry(f(k)).or_insert(0.0) += *w;
        }
        Distribution { weights: out }
    }
}

/// A state: one outcome per variable (indexed like `Model::vars`) and the
/// outcome tuples at which each predicate holds (indexed like
/// `Model::predicates`). Outcomes are stored as indices into the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    id: String,
    values: Vec<usize>,
    atoms: Vec<BTreeSet<Vec<usize>>>,
}

impl State {
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Outcome index assigned to variable `var`.
    pub fn value(&self, var: usize) -> usize {
        self.values[var]
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn holds(&self, predicate: usize, tuple: &[usize]) -> bool {
        self.atoms[predicate].contains(tuple)
    }

    pub fn atoms(&self, predicate: usize) -> &BTreeSet<Vec<usize>> {
        &self.atoms[predicate]
    }
}

/// A possible world: a distribution over state indices.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    id: String,
    dist: Distribution<usize>,
}

impl World {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dist(&self) -> &Distribution<usize> {
        &self.dist
    }

    /// `(state index, w[s])` in state order.
    pub fn weights(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.dist.iter().map(|(s, w)| (*s, w))
    }
}

/// How an agent's accessibility relation is obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum RelationSpec {
    /// `(w, w')` related iff `D(σ_w(x) ∥ σ_w'(x)) ≤ epsilon`; with `swap`
    /// the arguments are exchanged.
    Divergence { kind: DivergenceKind, epsilon: f64, swap: bool },
    /// World-index pairs taken verbatim.
    Explicit { pairs: BTreeSet<(usize, usize)> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentSpec {
    pub name: String,
    /// Index of the observed variable.
    pub var: usize,
    pub relation: RelationSpec,
}

/// A validated distributional Kripke model. All name-keyed collections are
/// kept sorted so indices are stable and iteration is deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    domain: Vec<Outcome>,
    vars: Vec<String>,
    predicates: Vec<(String, usize)>,
    states: Vec<State>,
    worlds: Vec<World>,
    agents: Vec<AgentSpec>,
}

/// The plain-data form of a model, mirroring the JSON document layout.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(deny_unknown_fields))]
pub struct ModelDocument {
    pub domain: Vec<String>,
    pub vars: Vec<String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub predicates: BTreeMap<String, usize>,
    pub states: BTreeMap<String, StateDocument>,
    pub worlds: BTreeMap<String, BTreeMap<String, f64>>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub agents: BTreeMap<String, AgentDocument>,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(deny_unknown_fields))]
pub struct StateDocument {
    pub assign: BTreeMap<String, String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub atoms: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(deny_unknown_fields))]
pub struct AgentDocument {
    pub var: String,
    /// `chi2`, `maxdiv`, `tv`, `js` or `explicit`.
    pub divergence: String,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub epsilon: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub symmetrize: bool,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "is_false"))]
    pub swap: bool,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub pairs: Option<Vec<(String, String)>>,
}

#[cfg(feature = "serde")]
fn is_false(b: &bool) -> bool {
    !*b
}

fn schema(path: impl Into<String>, msg: impl Into<String>) -> ModelError {
    ModelError::new(ModelErrorKind::Schema, path, msg)
}

fn dangling(path: impl Into<String>, msg: impl Into<String>) -> ModelError {
    ModelError::new(ModelErrorKind::DanglingReference, path, msg)
}

fn sorted_unique(items: &[String], path: &str) -> Result<Vec<String>, ModelError> {
    let mut out = items.to_vec();
    out.sort();
    for pair in out.windows(2) {
        if pair[0] == pair[1] {
            return Err(schema(path, format!("`{}` declared twice", pair[0])));
        }
    }
    Ok(out)
}

impl Model {
    /// Validates a document and builds the indexed model.
    pub fn from_document(doc: &ModelDocument) -> Result<Model, ModelError> {
        let domain: Vec<Outcome> = sorted_unique(&doc.domain, "domain")?.into_iter().map(Outcome).collect();
        let vars = sorted_unique(&doc.vars, "vars")?;
        for v in &vars {
            if !is_identifier(v) {
                return Err(schema("vars", format!("`{v}` is not an identifier")));
            }
        }
        let mut predicates = Vec::with_capacity(doc.predicates.len());
        for (name, arity) in &doc.predicates {
            if !is_identifier(name) || RESERVED_WORDS.contains(&name.as_str()) {
                return Err(schema(format!("predicates.{name}"), "predicate name must be a non-reserved identifier"));
            }
            predicates.push((name.clone(), *arity));
        }

        let outcome_idx = |o: &str| domain.binary_search_by(|d| d.0.as_str().cmp(o)).ok();

        let mut states = Vec::with_capacity(doc.states.len());
        for (sid, sdoc) in &doc.states {
            let base = format!("states.{sid}");
            let mut values = Vec::with_capacity(vars.len());
            for v in &vars {
                let Some(o) = sdoc.assign.get(v) else {
                    return Err(schema(format!("{base}.assign"), format!("variable `{v}` is not assigned")));
                };
                let Some(oi) = outcome_idx(o) else {
                    return Err(dangling(format!("{base}.assign.{v}"), format!("outcome `{o}` is not in the domain")));
                };
                values.push(oi);
            }
            for v in sdoc.assign.keys() {
                if vars.binary_search(v).is_err() {
                    return Err(dangling(format!("{base}.assign.{v}"), format!("variable `{v}` is not declared")));
                }
            }
            let mut atoms = alloc::vec![BTreeSet::new(); predicates.len()];
            for (pname, tuples) in &sdoc.atoms {
                let Ok(pi) = predicates.binary_search_by(|(n, _)| n.as_str().cmp(pname)) else {
                    return Err(dangling(format!("{base}.atoms.{pname}"), format!("predicate `{pname}` is not declared")));
                };
                let arity = predicates[pi].1;
                for (ti, tuple) in tuples.iter().enumerate() {
                    let tpath = format!("{base}.atoms.{pname}.{ti}");
                    if tuple.len() != arity {
                        return Err(schema(tpath, format!("expected {arity} element(s), found {}", tuple.len())));
                    }
                    let mut idx = Vec::with_capacity(arity);
                    for o in tuple {
                        let Some(oi) = outcome_idx(o) else {
                            return Err(dangling(tpath, format!("outcome `{o}` is not in the domain")));
                        };
                        idx.push(oi);
                    }
                    atoms[pi].insert(idx);
                }
            }
            states.push(State { id: sid.clone(), values, atoms });
        }

        if doc.worlds.is_empty() {
            return Err(schema("worlds", "a model needs at least one world"));
        }
        let state_idx = |s: &str| states.binary_search_by(|st: &State| st.id.as_str().cmp(s)).ok();
        let mut worlds: Vec<World> = Vec::with_capacity(doc.worlds.len());
        for (wid, weights) in &doc.worlds {
            let mut map = BTreeMap::new();
            for (sid, w) in weights {
                let path = format!("worlds.{wid}.{sid}");
                let Some(si) = state_idx(sid) else {
                    return Err(dangling(path, format!("state `{sid}` is not declared")));
                };
                if !w.is_finite() || *w < 0.0 {
                    return Err(schema(path, format!("weight {w} is not a probability")));
                }
                map.insert(si, *w);
            }
            let dist = Distribution::new(map).map_err(|e| {
                ModelError::new(ModelErrorKind::ProbabilitySum, format!("worlds.{wid}"), e.to_string())
            })?;
            worlds.push(World { id: wid.clone(), dist });
        }
        // (assignment, atoms, weight bits) per support state, sorted.
        type Signature<'a> = Vec<(&'a [usize], &'a [BTreeSet<Vec<usize>>], u64)>;
        let mut seen: Vec<(Signature, &str)> = Vec::new();
        for w in &worlds {
            let mut sig: Vec<_> = w
                .weights()
                .map(|(s, p)| (states[s].values.as_slice(), states[s].atoms.as_slice(), p.to_bits()))
                .collect();
            sig.sort();
            if let Some((_, other)) = seen.iter().find(|(s, _)| *s == sig) {
                return Err(ModelError::new(
                    ModelErrorKind::DuplicateWorld,
                    format!("worlds.{}", w.id),
                    format!("same distribution and assignments as world `{other}`"),
                ));
            }
            seen.push((sig, &w.id));
        }

        let world_idx = |s: &str| worlds.binary_search_by(|w: &World| w.id.as_str().cmp(s)).ok();
        let mut agents = Vec::with_capacity(doc.agents.len());
        for (name, adoc) in &doc.agents {
            let base = format!("agents.{name}");
            if !is_identifier(name) {
                return Err(schema(base, "agent name must be an identifier"));
            }
            let Ok(var) = vars.binary_search(&adoc.var) else {
                return Err(dangling(format!("{base}.var"), format!("variable `{}` is not declared", adoc.var)));
            };
            let relation = if adoc.divergence == "explicit" {
                if adoc.epsilon.is_some() || adoc.symmetrize || adoc.swap {
                    return Err(schema(base, "explicit relations take no epsilon, symmetrize or swap"));
                }
                let Some(list) = &adoc.pairs else {
                    return Err(schema(format!("{base}.pairs"), "explicit relation needs `pairs`"));
                };
                let mut pairs = BTreeSet::new();
                for (i, (a, b)) in list.iter().enumerate() {
                    match (world_idx(a), world_idx(b)) {
                        (Some(x), Some(y)) => {
                            pairs.insert((x, y));
                        }
                        _ => return Err(dangling(format!("{base}.pairs.{i}"), format!("unknown world in ({a}, {b})"))),
                    }
                }
                RelationSpec::Explicit { pairs }
            } else {
                let tag: DivergenceTag = adoc
                    .divergence
                    .parse()
                    .map_err(|_| schema(format!("{base}.divergence"), format!("unknown divergence `{}`", adoc.divergence)))?;
                if adoc.pairs.is_some() {
                    return Err(schema(format!("{base}.pairs"), "pairs are only allowed for explicit relations"));
                }
                let Some(epsilon) = adoc.epsilon else {
                    return Err(schema(format!("{base}.epsilon"), "missing epsilon"));
                };
                if !epsilon.is_finite() || epsilon < 0.0 {
                    return Err(schema(format!("{base}.epsilon"), "epsilon must be finite and non-negative"));
                }
                RelationSpec::Divergence {
                    kind: DivergenceKind { tag, symmetrize: adoc.symmetrize },
                    epsilon,
                    swap: adoc.swap,
                }
            };
            agents.push(AgentSpec { name: name.clone(), var, relation });
        }

        Ok(Model { domain, vars, predicates, states, worlds, agents })
    }

    /// The inverse of [`Model::from_document`].
    pub fn to_document(&self) -> ModelDocument {
        let out = |i: usize| self.domain[i].0.clone();
        let states = self
            .states
            .iter()
            .map(|s| {
                let assign = self.vars.iter().cloned().zip(s.values.iter().map(|&v| out(v))).collect();
                let atoms = self
                    .predicates
                    .iter()
                    .zip(&s.atoms)
                    .filter(|(_, set)| !set.is_empty())
                    .map(|((name, _), set)| (name.clone(), set.iter().map(|t| t.iter().map(|&o| out(o)).collect()).collect()))
                    .collect();
                (s.id.clone(), StateDocument { assign, atoms })
            })
            .collect();
        let worlds = self
            .worlds
            .iter()
            .map(|w| (w.id.clone(), w.weights().map(|(s, p)| (self.states[s].id.clone(), p)).collect()))
            .collect();
        let agents = self
            .agents
            .iter()
            .map(|a| {
                let var = self.vars[a.var].clone();
                let doc = match &a.relation {
                    RelationSpec::Divergence { kind, epsilon, swap } => AgentDocument {
                        var,
                        divergence: kind.tag.as_str().to_string(),
                        epsilon: Some(*epsilon),
                        symmetrize: kind.symmetrize,
                        swap: *swap,
                        pairs: None,
                    },
                    RelationSpec::Explicit { pairs } => AgentDocument {
                        var,
                        divergence: "explicit".to_string(),
                        epsilon: None,
                        symmetrize: false,
                        swap: false,
                        pairs: Some(
                            pairs
                                .iter()
                                .map(|&(a, b)| (self.worlds[a].id.clone(), self.worlds[b].id.clone()))
                                .collect(),
                        ),
                    },
                };
                (a.name.clone(), doc)
            })
            .collect();
        ModelDocument {
            domain: self.domain.iter().map(|o| o.0.clone()).collect(),
            vars: self.vars.clone(),
            predicates: self.predicates.iter().cloned().collect(),
            states,
            worlds,
            agents,
        }
    }

    pub fn domain(&self) -> &[Outcome] {
        &self.domain
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// `(name, arity)` pairs sorted by name.
    pub fn predicates(&self) -> &[(String, usize)] {
        &self.predicates
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn worlds(&self) -> &[World] {
        &self.worlds
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.binary_search_by(|v| v.as_str().cmp(name)).ok()
    }

    pub fn outcome_index(&self, name: &str) -> Option<usize> {
        self.domain.binary_search_by(|o| o.0.as_str().cmp(name)).ok()
    }

    pub fn predicate_index(&self, name: &str) -> Option<usize> {
        self.predicates.binary_search_by(|(n, _)| n.as_str().cmp(name)).ok()
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.binary_search_by(|s| s.id.as_str().cmp(id)).ok()
    }

    pub fn world_index(&self, id: &str) -> Option<usize> {
        self.worlds.binary_search_by(|w| w.id.as_str().cmp(id)).ok()
    }

    pub fn world(&self, id: &str) -> Result<&World, SignatureError> {
        self.world_index(id).map(|i| &self.worlds[i]).ok_or_else(|| SignatureError::UnknownWorld(id.to_string()))
    }

    pub fn agent(&self, name: &str) -> Result<&AgentSpec, SignatureError> {
        self.agents
            .binary_search_by(|a| a.name.as_str().cmp(name))
            .map(|i| &self.agents[i])
            .map_err(|_| SignatureError::UnknownAgent(name.to_string()))
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.binary_search_by(|a| a.name.as_str().cmp(name)).ok()
    }

    /// `σ_w(x)` keyed by outcome index.
    pub fn marginal_indexed(&self, world: &World, var: usize) -> Distribution<usize> {
        let mut map = BTreeMap::new();
        for (s, w) in world.weights() {
            *map.entry(self.states[s].values[var]).or_insert(0.0) += w;
        }
        Distribution::from_map(map)
    }

    /// `σ_w(x)[v] = Σ_{s ∈ supp(w), σ_s(x) = v} w[s]`.
    pub fn marginal(&self, world: &World, var: &str) -> Result<Distribution<Outcome>, SignatureError> {
        let vi = self.var_index(var).ok_or_else(|| SignatureError::UnknownVariable(var.to_string()))?;
        Ok(self.marginal_indexed(world, vi).map_keys(|&o| self.domain[o].clone()))
    }

    /// The restriction `w|ψ`, renormalized over states satisfying `psi`.
    /// `None` when no positive-weight state satisfies `psi`. A world all of
    /// whose support satisfies `psi` is returned unchanged.
    pub fn restrict(&self, world: &World, psi: &StaticFormula) -> Result<Option<World>, SignatureError> {
        let mut kept = Vec::new();
        for (s, w) in world.weights() {
            if static_holds(self, &self.states[s], psi)? {
                kept.push((s, w));
            }
        }
        if kept.is_empty() {
            return Ok(None);
        }
        if kept.len() == world.dist.len() {
            return Ok(Some(world.clone()));
        }
        let norm: f64 = kept.iter().map(|(_, w)| w).sum();
        let dist = Distribution::from_map(kept.into_iter().map(|(s, w)| (s, w / norm)).collect());
        Ok(Some(World { id: format!("{}|({})", world.id, psi), dist }))
    }
}
