//! Hypothesis testing, statistical secrecy and differential privacy.

pub mod hypothesis;
pub mod privacy;
pub mod quantile;

use alloc::string::String;

use crate::error::{ModelError, SignatureError};

pub use hypothesis::{check_secrecy, epsilon_alpha_n, ht_relation, HtReport, PairStatistic, SecrecyReport, TestConfig, Threshold};
pub use privacy::{dp_check, dp_epsilon, dp_to_model, DpReport, Mechanism, MechanismDocument, MAX_ENCODED_CELLS};
pub use quantile::{chi2_quantile, chi2_sf};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ApplicationError {
    #[error("significance level must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("degrees of freedom must be at least 1, got {0}")]
    Df(u32),
    #[error("sample size must be at least 1")]
    SampleSize,
    #[error("epsilon must be finite and non-negative, got {0}")]
    Epsilon(f64),
    #[error("the formula set is empty")]
    EmptyFormulaSet,
    #[error("agent `{0}` does not use a chi2 relation, so a test threshold does not apply")]
    NotChi2(String),
    #[error("mechanism has {inputs} inputs and {outputs} outputs; explicit encoding is limited to {limit} cells")]
    TooLarge { inputs: usize, outputs: usize, limit: usize },
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Mechanism(#[from] ModelError),
}
