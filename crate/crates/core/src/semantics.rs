//! Satisfaction of static formulas at states and epistemic formulas at
//! worlds, and validity over a whole model.
//!
//! Probabilities inside a restricted world `w|ψ` are computed as the ratio
//! `Σ_{s ⊨ ψ ∧ φ} w[s] / Σ_{s ⊨ ψ} w[s]` over the original weights, so that
//! `ψ |> Pr_I φ` agrees bit-for-bit with the conditional probability
//! `eval_prob(w, ψ & φ) / eval_prob(w, ψ)`. A restriction that keeps the
//! whole support leaves the world as it is.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::accessibility::{divergence_related, effective_epsilon, RelationCache};
use crate::error::SignatureError;
use crate::formula::{EpistemicFormula, IntervalSet, StaticFormula};
use crate::prob::{Distribution, Model, RelationSpec, State, World};

/// `s ⊨ ψ`.
pub fn sat_static(model: &Model, state: &State, psi: &StaticFormula) -> Result<bool, SignatureError> {
    match psi {
        StaticFormula::Atom { predicate, args } => {
            let (p, tuple) = resolve_atom(model, predicate, args)?;
            Ok(state.holds(p, &tuple.iter().map(|&v| state.value(v)).collect::<Vec<_>>()))
        }
        StaticFormula::Not(a) => Ok(!sat_static(model, state, a)?),
        StaticFormula::And(a, b) => Ok(sat_static(model, state, a)? && sat_static(model, state, b)?),
    }
}

pub(crate) use sat_static as static_holds;

fn resolve_atom(model: &Model, predicate: &str, args: &[String]) -> Result<(usize, Vec<usize>), SignatureError> {
    let p = model.predicate_index(predicate).ok_or_else(|| SignatureError::UnknownPredicate(predicate.to_string()))?;
    let arity = model.predicates()[p].1;
    if arity != args.len() {
        return Err(SignatureError::ArityMismatch { predicate: predicate.to_string(), expected: arity, found: args.len() });
    }
    let vars = args
        .iter()
        .map(|a| model.var_index(a).ok_or_else(|| SignatureError::UnknownVariable(a.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((p, vars))
}

/// Truth of `psi` at every state of the model, in state order.
pub fn truth_table(model: &Model, psi: &StaticFormula) -> Result<Vec<bool>, SignatureError> {
    // Resolve the signature once even for models without states.
    check_static(model, psi)?;
    model.states().iter().map(|s| sat_static(model, s, psi)).collect()
}

fn check_static(model: &Model, psi: &StaticFormula) -> Result<(), SignatureError> {
    match psi {
        StaticFormula::Atom { predicate, args } => resolve_atom(model, predicate, args).map(|_| ()),
        StaticFormula::Not(a) => check_static(model, a),
        StaticFormula::And(a, b) => check_static(model, a).and_then(|_| check_static(model, b)),
    }
}

/// `Pr[s ← w : s ⊨ ψ] = Σ_{s ⊨ ψ} w[s]`.
pub fn eval_prob(model: &Model, world: &World, psi: &StaticFormula) -> Result<f64, SignatureError> {
    let table = truth_table(model, psi)?;
    Ok(world.weights().filter(|(s, _)| table[*s]).map(|(_, w)| w).sum())
}

/// One node of an evaluation trace.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TraceNode {
    pub formula: String,
    pub world: String,
    pub verdict: bool,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub detail: Option<String>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Vec::is_empty"))]
    pub children: Vec<TraceNode>,
}

/// The outcome of `sat` or `valid`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Judgment {
    pub verdict: bool,
    /// For `sat`, the world evaluated; for `valid`, the first failing world.
    pub world: Option<String>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub trace: Option<TraceNode>,
}

#[derive(Clone, Debug)]
enum Node {
    Prob { iset: IntervalSet, table: usize },
    Not(usize),
    And(usize, usize),
    Given { table: usize, body: usize },
    Know { agent: usize, eps: Option<f64>, body: usize },
}

struct Compiled {
    nodes: Vec<Node>,
    tables: Vec<Vec<bool>>,
    // Filled only when tracing.
    node_text: Vec<String>,
    table_text: Vec<String>,
    root: usize,
}

#[derive(Clone)]
struct View {
    base: usize,
    mask: Option<Vec<bool>>,
    label: String,
}

/// A reusable evaluator over one model. Accessibility relations are
/// memoized across calls; verdicts at unrestricted worlds are memoized
/// within a call.
pub struct Evaluator<'m> {
    model: &'m Model,
    relations: RelationCache<'m>,
    memo: BTreeMap<(usize, usize), bool>,
    trace: bool,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model) -> Self {
        Evaluator { model, relations: RelationCache::new(model), memo: BTreeMap::new(), trace: false }
    }

    /// Record a full trace. Tracing disables memoization and
    /// short-circuiting so every node is visited at every site.
    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    /// `M, w ⊨ φ`.
    pub fn sat(&mut self, world: &str, phi: &EpistemicFormula) -> Result<Judgment, SignatureError> {
        let w = self.model.world_index(world).ok_or_else(|| SignatureError::UnknownWorld(world.to_string()))?;
        let c = self.compile(phi)?;
        let (verdict, trace) = self.eval(&c, c.root, &self.base_view(w));
        Ok(Judgment { verdict, world: Some(world.to_string()), trace })
    }

    /// `M, w ⊨ φ` by world index, without building a judgment.
    pub fn holds_at(&mut self, world: usize, phi: &EpistemicFormula) -> Result<bool, SignatureError> {
        let c = self.compile(phi)?;
        let view = View { base: world, mask: None, label: String::new() };
        Ok(self.eval(&c, c.root, &view).0)
    }

    /// Truth of `φ` at every world, in world order.
    pub fn truth_vector(&mut self, phi: &EpistemicFormula) -> Result<Vec<bool>, SignatureError> {
        let c = self.compile(phi)?;
        Ok((0..self.model.worlds().len())
            .map(|w| self.eval(&c, c.root, &View { base: w, mask: None, label: String::new() }).0)
            .collect())
    }

    /// `M ⊨ φ`: `φ` holds at every world. The judgment names the first
    /// failing world in world order.
    pub fn valid(&mut self, phi: &EpistemicFormula) -> Result<Judgment, SignatureError> {
        let c = self.compile(phi)?;
        let mut failing = None;
        let mut children = Vec::new();
        for w in 0..self.model.worlds().len() {
            let (v, t) = self.eval(&c, c.root, &self.base_view(w));
            if !v && failing.is_none() {
                failing = Some(self.model.worlds()[w].id().to_string());
                if !self.trace {
                    break;
                }
            }
            children.extend(t);
        }
        let verdict = failing.is_none();
        let trace = self.trace.then(|| TraceNode {
            formula: c.node_text[c.root].clone(),
            world: "*".into(),
            verdict,
            detail: Some(match &failing {
                Some(w) => format!("fails at {w}"),
                None => format!("holds at all {} worlds", self.model.worlds().len()),
            }),
            children,
        });
        Ok(Judgment { verdict, world: failing, trace })
    }

    fn base_view(&self, w: usize) -> View {
        let label = if self.trace { self.model.worlds()[w].id().to_string() } else { String::new() };
        View { base: w, mask: None, label }
    }

    fn compile(&mut self, phi: &EpistemicFormula) -> Result<Compiled, SignatureError> {
        self.memo.clear();
        let mut c = Compiled { nodes: Vec::new(), tables: Vec::new(), node_text: Vec::new(), table_text: Vec::new(), root: 0 };
        c.root = self.compile_node(&mut c, &phi.desugar())?;
        Ok(c)
    }

    fn compile_table(&self, c: &mut Compiled, psi: &StaticFormula) -> Result<usize, SignatureError> {
        c.tables.push(truth_table(self.model, psi)?);
        if self.trace {
            c.table_text.push(psi.to_string());
        }
        Ok(c.tables.len() - 1)
    }

    fn compile_node(&self, c: &mut Compiled, phi: &EpistemicFormula) -> Result<usize, SignatureError> {
        use EpistemicFormula as E;
        let node = match phi {
            E::Prob(iset, psi) => Node::Prob { iset: iset.clone(), table: self.compile_table(c, psi)? },
            E::Not(a) => Node::Not(self.compile_node(c, a)?),
            E::And(a, b) => {
                let a = self.compile_node(c, a)?;
                Node::And(a, self.compile_node(c, b)?)
            }
            E::Given(psi, body) => {
                let table = self.compile_table(c, psi)?;
                Node::Given { table, body: self.compile_node(c, body)? }
            }
            E::Know { agent, eps, body } => {
                let a = self.model.agent_index(agent).ok_or_else(|| SignatureError::UnknownAgent(agent.clone()))?;
                let eps = effective_epsilon(&self.model.agents()[a], *eps)?;
                Node::Know { agent: a, eps, body: self.compile_node(c, body)? }
            }
            E::Or(..) | E::Imp(..) | E::Possible { .. } => unreachable!("desugared"),
        };
        c.nodes.push(node);
        if self.trace {
            c.node_text.push(phi.to_string());
        }
        Ok(c.nodes.len() - 1)
    }

    fn mass(&self, view: &View, table: Option<&[bool]>) -> f64 {
        self.model.worlds()[view.base]
            .weights()
            .filter(|(s, _)| view.mask.as_ref().is_none_or(|m| m[*s]) && table.is_none_or(|t| t[*s]))
            .map(|(_, w)| w)
            .sum()
    }

    fn prob(&self, view: &View, table: &[bool]) -> f64 {
        let num = self.mass(view, Some(table));
        match view.mask {
            None => num,
            Some(_) => num / self.mass(view, None),
        }
    }

    /// `view|ψ`, or `None` when undefined.
    fn restrict(&self, view: &View, table: &[bool], text: Option<&str>) -> Option<View> {
        let world = &self.model.worlds()[view.base];
        let keep = |s: usize| view.mask.as_ref().is_none_or(|m| m[s]) && table[s];
        if !world.weights().any(|(s, _)| keep(s)) {
            return None;
        }
        let mask = if world.weights().all(|(s, _)| keep(s)) {
            None
        } else {
            Some((0..table.len()).map(keep).collect())
        };
        let label = match text {
            Some(t) => format!("{}|({t})", view.label),
            None => String::new(),
        };
        Some(View { base: view.base, mask, label })
    }

    fn successors(&mut self, view: &View, agent: usize, eps: Option<f64>) -> Vec<usize> {
        let spec = &self.model.agents()[agent];
        match (&view.mask, &spec.relation) {
            (None, _) | (Some(_), RelationSpec::Explicit { .. }) => {
                self.relations.relation(agent, eps).successors(view.base).to_vec()
            }
            (Some(mask), RelationSpec::Divergence { kind, swap, .. }) => {
                let (kind, swap, var) = (*kind, *swap, spec.var);
                let eps = eps.expect("divergence relations always have an epsilon");
                let norm = self.mass(view, None);
                let mut weights = BTreeMap::new();
                for (s, w) in self.model.worlds()[view.base].weights() {
                    if mask[s] {
                        *weights.entry(self.model.states()[s].value(var)).or_insert(0.0) += w / norm;
                    }
                }
                let here = Distribution::from_map(weights);
                let marginals = self.relations.marginals(var);
                (0..marginals.len()).filter(|&w| divergence_related(kind, swap, eps, &here, &marginals[w])).collect()
            }
        }
    }

    fn eval(&mut self, c: &Compiled, node: usize, view: &View) -> (bool, Option<TraceNode>) {
        let memo_key = (node, view.base);
        if !self.trace && view.mask.is_none() {
            if let Some(&v) = self.memo.get(&memo_key) {
                return (v, None);
            }
        }
        let mut children = Vec::new();
        let mut detail = None;
        let verdict = match &c.nodes[node] {
            Node::Prob { iset, table } => {
                let p = self.prob(view, &c.tables[*table]);
                if self.trace {
                    detail = Some(format!("probability {p}"));
                }
                iset.contains(p)
            }
            Node::Not(a) => {
                let (v, t) = self.eval(c, *a, view);
                children.extend(t);
                !v
            }
            Node::And(a, b) => {
                let (va, ta) = self.eval(c, *a, view);
                children.extend(ta);
                if va || self.trace {
                    let (vb, tb) = self.eval(c, *b, view);
                    children.extend(tb);
                    va && vb
                } else {
                    false
                }
            }
            Node::Given { table, body } => {
                let text = self.trace.then(|| c.table_text[*table].as_str());
                match self.restrict(view, &c.tables[*table], text) {
                    None => {
                        if self.trace {
                            detail = Some("restriction undefined".into());
                        }
                        false
                    }
                    Some(restricted) => {
                        let (v, t) = self.eval(c, *body, &restricted);
                        children.extend(t);
                        v
                    }
                }
            }
            Node::Know { agent, eps, body } => {
                let succ = self.successors(view, *agent, *eps);
                if self.trace {
                    let ids: Vec<&str> = succ.iter().map(|&w| self.model.worlds()[w].id()).collect();
                    detail = Some(if ids.is_empty() { "no successors".into() } else { format!("successors {}", ids.join(", ")) });
                }
                let mut all = true;
                for w in succ {
                    let (v, t) = self.eval(c, *body, &self.base_view(w));
                    children.extend(t);
                    all &= v;
                    if !all && !self.trace {
                        break;
                    }
                }
                all
            }
        };
        if !self.trace && view.mask.is_none() {
            self.memo.insert(memo_key, verdict);
        }
        let trace = self.trace.then(|| TraceNode {
            formula: c.node_text[node].clone(),
            world: view.label.clone(),
            verdict,
            detail,
            children,
        });
        (verdict, trace)
    }
}

/// `M, w ⊨ φ`.
pub fn sat(model: &Model, world: &str, phi: &EpistemicFormula) -> Result<Judgment, SignatureError> {
    Evaluator::new(model).sat(world, phi)
}

/// `M ⊨ φ`.
pub fn valid(model: &Model, phi: &EpistemicFormula) -> Result<Judgment, SignatureError> {
    Evaluator::new(model).valid(phi)
}
