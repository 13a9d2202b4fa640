//! Statistical epistemic logic over distributional Kripke models.
//!
//! A possible world is a probability distribution over states, each state
//! assigning outcomes to measurement variables. Agents distinguish worlds by
//! a divergence (or metric) between the marginals of the variable they
//! observe, so knowledge `K[a]` is relative to a statistical threshold.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command-line front end live in the `statel` crate.

#![no_std]

extern crate alloc;

pub mod accessibility;
pub mod applications;
pub mod divergence;
pub mod error;
pub mod formula;
pub mod lawcheck;
pub mod prob;
pub mod semantics;

pub use accessibility::{accessible, build_relation, Relation};
pub use divergence::{chi2, js_div, max_div, total_variation, DivergenceKind, DivergenceTag, ExtendedReal};
pub use error::{ModelError, ModelErrorKind, SignatureError};
pub use formula::{parse, parse_epistemic, parse_static, EpistemicFormula, Formula, IntervalSet, ParseError, StaticFormula};
pub use prob::{AgentSpec, Distribution, Model, ModelDocument, Outcome, RelationSpec, State, World, PROB_TOLERANCE};
pub use semantics::{eval_prob, sat, sat_static, valid, Evaluator, Judgment, TraceNode};
