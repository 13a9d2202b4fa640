//! Auditing finite mechanisms for ε-differential privacy.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ApplicationError;
use crate::divergence::{max_div, ExtendedReal};
use crate::error::{ModelError, ModelErrorKind};
use crate::formula::{EpistemicFormula, Interval, IntervalSet, StaticFormula};
use crate::prob::{AgentDocument, Distribution, Model, ModelDocument, StateDocument, PROB_TOLERANCE};

/// Largest `|D| · |O|` that [`dp_to_model`] will encode.
pub const MAX_ENCODED_CELLS: usize = 10_000;

/// The plain-data form of a mechanism.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(deny_unknown_fields))]
pub struct MechanismDocument {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub table: BTreeMap<String, BTreeMap<String, f64>>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub adjacency: Vec<(String, String)>,
}

/// A randomized algorithm `A: D → Dist(O)` tabulated over finite `D` and
/// `O`, with an adjacency relation `Ψ` of unordered input pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    inputs: Vec<String>,
    outputs: Vec<String>,
    rows: Vec<Distribution<usize>>,
    adjacency: Vec<(usize, usize)>,
}

fn err(kind: ModelErrorKind, path: impl Into<String>, msg: impl Into<String>) -> ModelError {
    ModelError::new(kind, path, msg)
}

fn index_of(names: &[String], path: &str) -> Result<BTreeMap<String, usize>, ModelError> {
    let mut out = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        if out.insert(n.clone(), i).is_some() {
            return Err(err(ModelErrorKind::Schema, format!("{path}.{i}"), format!("`{n}` declared twice")));
        }
    }
    Ok(out)
}

impl Mechanism {
    pub fn from_document(doc: &MechanismDocument) -> Result<Mechanism, ModelError> {
        if doc.inputs.is_empty() {
            return Err(err(ModelErrorKind::Schema, "inputs", "at least one input is required"));
        }
        if doc.outputs.is_empty() {
            return Err(err(ModelErrorKind::Schema, "outputs", "at least one output is required"));
        }
        let inputs = index_of(&doc.inputs, "inputs")?;
        let outputs = index_of(&doc.outputs, "outputs")?;
        for d in doc.table.keys() {
            if !inputs.contains_key(d) {
                return Err(err(ModelErrorKind::DanglingReference, format!("table.{d}"), format!("`{d}` is not a declared input")));
            }
        }
        let mut rows = Vec::with_capacity(doc.inputs.len());
        for d in &doc.inputs {
            let path = format!("table.{d}");
            let Some(row) = doc.table.get(d) else {
                return Err(err(ModelErrorKind::Schema, path, "missing output distribution"));
            };
            let mut weights = Vec::with_capacity(row.len());
            for (y, &p) in row {
                let Some(&yi) = outputs.get(y) else {
                    return Err(err(ModelErrorKind::DanglingReference, format!("{path}.{y}"), format!("`{y}` is not a declared output")));
                };
                if !(p.is_finite() && p >= 0.0) {
                    return Err(err(ModelErrorKind::ProbabilitySum, format!("{path}.{y}"), format!("invalid probability {p}")));
                }
                weights.push((yi, p));
            }
            let total: f64 = weights.iter().map(|(_, p)| p).sum();
            if (total - 1.0).abs() > PROB_TOLERANCE {
                return Err(err(ModelErrorKind::ProbabilitySum, path, format!("probabilities sum to {total}, not 1")));
            }
            rows.push(Distribution::from_map(weights.into_iter().collect()));
        }
        let mut adjacency = BTreeSet::new();
        for (i, (a, b)) in doc.adjacency.iter().enumerate() {
            match (inputs.get(a), inputs.get(b)) {
                (Some(&x), Some(&y)) => {
                    adjacency.insert((x.min(y), x.max(y)));
                }
                _ => {
                    return Err(err(ModelErrorKind::DanglingReference, format!("adjacency.{i}"), format!("unknown input in ({a}, {b})")));
                }
            }
        }
        Ok(Mechanism { inputs: doc.inputs.clone(), outputs: doc.outputs.clone(), rows, adjacency: adjacency.into_iter().collect() })
    }

    pub fn to_document(&self) -> MechanismDocument {
        let table = self
            .inputs
            .iter()
            .zip(&self.rows)
            .map(|(d, row)| (d.clone(), row.iter().map(|(&y, p)| (self.outputs[y].clone(), p)).collect()))
            .collect();
        let adjacency = self.adjacency.iter().map(|&(a, b)| (self.inputs[a].clone(), self.inputs[b].clone())).collect();
        MechanismDocument { inputs: self.inputs.clone(), outputs: self.outputs.clone(), table, adjacency }
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// `A(d)` keyed by output index.
    pub fn row(&self, input: usize) -> &Distribution<usize> {
        &self.rows[input]
    }

    /// Adjacent input pairs `(i, j)` with `i ≤ j`, sorted.
    pub fn adjacency(&self) -> &[(usize, usize)] {
        &self.adjacency
    }

    /// `max(D_∞(A(d) ∥ A(d')), D_∞(A(d') ∥ A(d)))`.
    pub fn pair_divergence(&self, a: usize, b: usize) -> ExtendedReal {
        max_div(&self.rows[a], &self.rows[b]).max(max_div(&self.rows[b], &self.rows[a]))
    }
}

/// The least ε for which the mechanism is ε-differentially private: the
/// largest symmetrized max-divergence over adjacent pairs, 0 without pairs.
pub fn dp_epsilon(mech: &Mechanism) -> ExtendedReal {
    mech.adjacency.iter().map(|&(a, b)| mech.pair_divergence(a, b)).max().unwrap_or(ExtendedReal::ZERO)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DpReport {
    pub private: bool,
    pub epsilon: f64,
    pub tight_epsilon: ExtendedReal,
    /// The first adjacent pair whose divergence exceeds ε.
    pub violation: Option<(String, String, ExtendedReal)>,
}

/// `A` is ε-DP iff every adjacent pair has symmetrized max-divergence ≤ ε.
pub fn dp_check(mech: &Mechanism, eps: f64) -> Result<DpReport, ApplicationError> {
    if eps.is_nan() || eps < 0.0 {
        return Err(ApplicationError::Epsilon(eps));
    }
    let violation = mech.adjacency.iter().find_map(|&(a, b)| {
        let d = mech.pair_divergence(a, b);
        (!d.within(eps)).then(|| (mech.inputs[a].clone(), mech.inputs[b].clone(), d))
    });
    Ok(DpReport { private: violation.is_none(), epsilon: eps, tight_epsilon: dp_epsilon(mech), violation })
}

/// Name of the agent in the encoded model.
pub const ADVERSARY: &str = "adversary";

/// Encodes the mechanism as a model with one world `w{i}` per input
/// `inputs[i]`, whose states carry `x = inputs[i]` and one output `y` each,
/// weighted by `A(d)[y]`. The 0-ary predicate `phi_{i}` holds exactly at the
/// states of world `w{i}`. The adversary observes `y` through symmetrized
/// max-divergence at `eps`. The returned formula
/// `⋀_d (φ_d → ⋀_{d' ∈ Ψ(d)} L φ_{d'})` is valid iff the mechanism is
/// ε-DP. Rows are told apart by `x`, so identical rows still give distinct
/// worlds.
pub fn dp_to_model(mech: &Mechanism, eps: f64) -> Result<(Model, EpistemicFormula), ApplicationError> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(ApplicationError::Epsilon(eps));
    }
    let (n, m) = (mech.inputs.len(), mech.outputs.len());
    if n.saturating_mul(m) > MAX_ENCODED_CELLS {
        return Err(ApplicationError::TooLarge { inputs: n, outputs: m, limit: MAX_ENCODED_CELLS });
    }
    let domain: BTreeSet<String> = mech.inputs.iter().chain(&mech.outputs).cloned().collect();
    let mut doc = ModelDocument {
        domain: domain.into_iter().collect(),
        vars: vec!["x".into(), "y".into()],
        ..Default::default()
    };
    for i in 0..n {
        doc.predicates.insert(format!("phi_{i}"), 0);
    }
    for (i, row) in mech.rows.iter().enumerate() {
        let mut weights = BTreeMap::new();
        for (&y, p) in row.iter() {
            let sid = format!("s{i}_{y}");
            let mut st = StateDocument::default();
            st.assign.insert("x".into(), mech.inputs[i].clone());
            st.assign.insert("y".into(), mech.outputs[y].clone());
            st.atoms.insert(format!("phi_{i}"), vec![Vec::new()]);
            doc.states.insert(sid.clone(), st);
            weights.insert(sid, p);
        }
        doc.worlds.insert(format!("w{i}"), weights);
    }
    doc.agents.insert(
        ADVERSARY.into(),
        AgentDocument { var: "y".into(), divergence: "maxdiv".into(), epsilon: Some(eps), symmetrize: true, ..Default::default() },
    );
    let model = Model::from_document(&doc)?;

    // Pr(0,1] rather than Pr{1}: the world's total mass may round below 1.
    let holds = |i: usize| {
        let positive = IntervalSet::new([Interval { lo: 0.0, lo_open: true, hi: 1.0, hi_open: false }]).expect("valid bounds");
        EpistemicFormula::prob(positive, StaticFormula::atom(&format!("phi_{i}"), &[]))
    };
    let mut neighbours = vec![Vec::new(); n];
    for &(a, b) in &mech.adjacency {
        neighbours[a].push(b);
        if a != b {
            neighbours[b].push(a);
        }
    }
    let formula = (0..n)
        .map(|i| {
            let poss = neighbours[i].iter().map(|&j| EpistemicFormula::possible(ADVERSARY, None, holds(j))).reduce(EpistemicFormula::and);
            match poss {
                Some(p) => holds(i).implies(p),
                None => EpistemicFormula::top(StaticFormula::atom(&format!("phi_{i}"), &[])),
            }
        })
        .reduce(EpistemicFormula::and)
        .expect("at least one input");
    Ok((model, formula))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use crate::semantics::valid;

    fn rr() -> Mechanism {
        let mut doc = MechanismDocument { inputs: vec!["yes".into(), "no".into()], outputs: vec!["yes".into(), "no".into()], ..Default::default() };
        doc.table.insert("yes".into(), [("yes".to_string(), 0.75), ("no".to_string(), 0.25)].into_iter().collect());
        doc.table.insert("no".into(), [("yes".to_string(), 0.25), ("no".to_string(), 0.75)].into_iter().collect());
        doc.adjacency.push(("yes".into(), "no".into()));
        Mechanism::from_document(&doc).unwrap()
    }

    #[test]
    fn randomized_response_is_ln3_private() {
        let m = rr();
        let tight = dp_epsilon(&m).value();
        assert!((tight - 3f64.ln()).abs() < 1e-12);
        assert!(dp_check(&m, 1.0987).unwrap().private);
        let r = dp_check(&m, 1.09).unwrap();
        assert!(!r.private && r.violation.is_some());
    }

    #[test]
    fn encoding_agrees_with_audit() {
        let m = rr();
        for eps in [1.0, dp_epsilon(&m).value(), 1.2] {
            let (model, phi) = dp_to_model(&m, eps).unwrap();
            assert_eq!(valid(&model, &phi).unwrap().verdict, dp_check(&m, eps).unwrap().private, "eps = {eps}");
        }
    }

    #[test]
    fn identity_and_constant_mechanisms() {
        let mut doc = MechanismDocument { inputs: vec!["a".into(), "b".into()], outputs: vec!["a".into(), "b".into()], ..Default::default() };
        doc.table.insert("a".into(), [("a".to_string(), 1.0)].into_iter().collect());
        doc.table.insert("b".into(), [("b".to_string(), 1.0)].into_iter().collect());
        doc.adjacency.push(("a".into(), "b".into()));
        let id = Mechanism::from_document(&doc).unwrap();
        assert!(dp_epsilon(&id).is_infinite());
        assert!(!dp_check(&id, 1e6).unwrap().private);

        doc.table.insert("b".into(), [("a".to_string(), 1.0)].into_iter().collect());
        let constant = Mechanism::from_document(&doc).unwrap();
        assert!(dp_check(&constant, 0.0).unwrap().private);
        let (model, phi) = dp_to_model(&constant, 0.0).unwrap();
        assert_eq!(model.worlds().len(), 2);
        assert!(valid(&model, &phi).unwrap().verdict);
    }

    #[test]
    fn single_input_without_adjacency() {
        let mut doc = MechanismDocument { inputs: vec!["d".into()], outputs: vec!["y".into()], ..Default::default() };
        doc.table.insert("d".into(), [("y".to_string(), 1.0)].into_iter().collect());
        let m = Mechanism::from_document(&doc).unwrap();
        assert_eq!(dp_epsilon(&m), ExtendedReal::ZERO);
        let (model, phi) = dp_to_model(&m, 0.0).unwrap();
        assert!(valid(&model, &phi).unwrap().verdict);
    }

    #[test]
    fn malformed_mechanisms() {
        let mut doc = rr().to_document();
        doc.table.get_mut("yes").unwrap().insert("no".into(), 0.3);
        let e = Mechanism::from_document(&doc).unwrap_err();
        assert_eq!((e.kind, e.path.as_str()), (ModelErrorKind::ProbabilitySum, "table.yes"));
        let mut doc = rr().to_document();
        doc.adjacency.push(("yes".into(), "maybe".into()));
        assert_eq!(Mechanism::from_document(&doc).unwrap_err().kind, ModelErrorKind::DanglingReference);
    }
}
