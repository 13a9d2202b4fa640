//! The JSON envelope every command prints.

use serde::Serialize;
use serde_json::Value;
use statel_core::ExtendedReal;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Field order is fixed by declaration order, and nothing time- or
/// environment-dependent goes in, so equal inputs give equal bytes.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub command: String,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub verdict: Option<bool>,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Envelope {
    pub fn new(command: &str, verdict: Option<bool>, value: Value) -> Self {
        Envelope { command: command.into(), version: VERSION, seed: None, verdict, value, trace: None, error: None }
    }

    pub fn failure(command: &str, message: String) -> Self {
        Envelope { error: Some(message), ..Envelope::new(command, None, Value::Null) }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelopes always serialize")
    }

    /// 0 when the verdict holds or there is none, 1 when it fails, 2 on error.
    pub fn exit_code(&self) -> u8 {
        match (self.error.is_some(), self.verdict) {
            (true, _) => 2,
            (false, Some(false)) => 1,
            _ => 0,
        }
    }
}

/// A finite number, or the string `"inf"`.
pub fn extended(x: ExtendedReal) -> Value {
    match x.finite() {
        Some(v) => Value::from(v),
        None => Value::from("inf"),
    }
}
