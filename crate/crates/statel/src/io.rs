//! JSON file formats: models, mechanisms, distributions and formula lists.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use statel_core::applications::{Mechanism, MechanismDocument};
use statel_core::formula::{parse_epistemic, ParseError};
use statel_core::prob::{Distribution, DistributionError, Model, ModelDocument, Outcome};
use statel_core::{EpistemicFormula, ModelError};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{origin}: schema error at `{at}`: {message}")]
    Json { origin: String, at: String, message: String },
    #[error("{origin}: {source}")]
    Model { origin: String, source: ModelError },
    #[error("{origin}: {message}")]
    Distribution { origin: String, message: String },
    #[error("{origin}, line {line}: {source}")]
    Formula { origin: String, line: usize, source: ParseError },
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_owned(), source })
}

/// Deserializes `text`, reporting the JSON path of the first mismatch.
pub fn from_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        IoError::Json { origin: origin.to_owned(), at, message: e.into_inner().to_string() }
    })
}

pub fn model_from_str(text: &str, origin: &str) -> Result<Model, IoError> {
    let doc: ModelDocument = from_json(text, origin)?;
    Model::from_document(&doc).map_err(|source| IoError::Model { origin: origin.to_owned(), source })
}

pub fn load_model(path: &Path) -> Result<Model, IoError> {
    model_from_str(&read(path)?, &path.display().to_string())
}

pub fn model_to_json(model: &Model) -> String {
    serde_json::to_string_pretty(&model.to_document()).expect("documents always serialize")
}

pub fn mechanism_from_str(text: &str, origin: &str) -> Result<Mechanism, IoError> {
    let doc: MechanismDocument = from_json(text, origin)?;
    Mechanism::from_document(&doc).map_err(|source| IoError::Model { origin: origin.to_owned(), source })
}

pub fn load_mechanism(path: &Path) -> Result<Mechanism, IoError> {
    mechanism_from_str(&read(path)?, &path.display().to_string())
}

/// A distribution file is a JSON object from outcome to probability.
pub fn distribution_from_str(text: &str, origin: &str) -> Result<Distribution<Outcome>, IoError> {
    let map: BTreeMap<String, f64> = from_json(text, origin)?;
    Distribution::new(map.into_iter().map(|(k, v)| (Outcome(k), v))).map_err(|e: DistributionError| IoError::Distribution {
        origin: origin.to_owned(),
        message: e.to_string(),
    })
}

pub fn load_distribution(path: &Path) -> Result<Distribution<Outcome>, IoError> {
    distribution_from_str(&read(path)?, &path.display().to_string())
}

/// One formula per line; blank lines and lines starting with `#` are
/// skipped.
pub fn formulas_from_str(text: &str, origin: &str) -> Result<Vec<EpistemicFormula>, IoError> {
    text.lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| parse_epistemic(l).map_err(|source| IoError::Formula { origin: origin.to_owned(), line: i + 1, source }))
        .collect()
}

pub fn load_formulas(path: &Path) -> Result<Vec<EpistemicFormula>, IoError> {
    formulas_from_str(&read(path)?, &path.display().to_string())
}

pub fn write(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Write { path: path.to_owned(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    const COIN: &str = include_str!("../scenarios/coin.json");

    #[test]
    fn coin_round_trips() {
        let m = model_from_str(COIN, "coin").unwrap();
        assert_eq!((m.worlds().len(), m.states().len()), (2, 4));
        let again = model_from_str(&model_to_json(&m), "again").unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let bad = COIN.replacen("\"assign\"", "\"assing\"", 1);
        match model_from_str(&bad, "bad") {
            Err(IoError::Json { at, .. }) => assert!(at.starts_with("states."), "{at}"),
            other => panic!("{other:?}"),
        }
        let sum = COIN.replace("0.6", "0.5");
        match model_from_str(&sum, "sum") {
            Err(IoError::Model { source, .. }) => assert_eq!(source.path, "worlds.w1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn formula_lists_skip_comments() {
        let f = formulas_from_str("# secrets\nPr{0.5} heads(x)\n\nPr{0.4} heads(x)\n", "f").unwrap();
        assert_eq!(f.len(), 2);
        assert!(matches!(formulas_from_str("Pr{0.5}", "f"), Err(IoError::Formula { line: 1, .. })));
    }

    #[test]
    fn distributions() {
        let d = distribution_from_str(r#"{"HEADS": 0.5, "TAILS": 0.5}"#, "d").unwrap();
        assert_eq!(d.get(&Outcome::from("HEADS")), 0.5);
        assert!(distribution_from_str(r#"{"HEADS": 0.5}"#, "d").is_err());
    }
}
