//! Flat `key = value` parameter files.
//!
//! ```text
//! # Example 1
//! rho = 1
//! omega = 10
//! ...
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key must appear exactly once.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::linalg::Vec3;
use crate::model::{ModelError, SystemParams};
use crate::scalar::Scalar;

pub const KEYS: [&str; 12] = [
    "rho", "omega", "mu", "b11", "b12", "b21", "b22", "lambda", "q1", "q2", "q3", "d",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("key `{key}`: cannot parse {value:?} as a number")]
    BadNumber { key: String, value: String },
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("override {0:?} is not of the form KEY=VALUE")]
    BadOverride(String),
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl ConfigError {
    /// The parameter key the error refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey { key, .. }
            | ConfigError::DuplicateKey { key, .. }
            | ConfigError::BadNumber { key, .. } => Some(key),
            ConfigError::MissingKey(k) => Some(k),
            ConfigError::Invalid(ModelError::InvalidParameter { key, .. }) => Some(key),
            _ => None,
        }
    }
}

fn parse_number<T: Scalar>(key: &str, value: &str) -> Result<T, ConfigError> {
    let bad = || ConfigError::BadNumber { key: key.to_string(), value: value.to_string() };
    let v: f64 = value.trim().parse().map_err(|_| bad())?;
    T::from_f64(v).filter(|v| v.is_finite()).ok_or_else(bad)
}

pub fn parse_config<T: Scalar>(text: &str) -> Result<SystemParams<T>, ConfigError> {
    let mut values: [Option<T>; 12] = [None; 12];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, text: raw.to_string() })?;
        let key = key.trim();
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| ConfigError::UnknownKey { line, key: key.to_string() })?;
        if values[slot].is_some() {
            return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
        }
        values[slot] = Some(parse_number(key, value)?);
    }
    let mut get = |i: usize| values[i].take().ok_or(ConfigError::MissingKey(KEYS[i]));
    let params = SystemParams {
        rho: get(0)?,
        omega: get(1)?,
        mu: get(2)?,
        b11: get(3)?,
        b12: get(4)?,
        b21: get(5)?,
        b22: get(6)?,
        lambda: get(7)?,
        q: Vec3::new(get(8)?, get(9)?, get(10)?),
        d: get(11)?,
    };
    params.validate()?;
    Ok(params)
}

pub fn load_config<T: Scalar>(path: impl AsRef<Path>) -> Result<SystemParams<T>, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

/// Applies a `KEY=VALUE` override, then re-validates.
pub fn apply_override<T: Scalar>(params: &mut SystemParams<T>, spec: &str) -> Result<(), ConfigError> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
    let key = key.trim();
    let v = parse_number(key, value)?;
    let slot = params
        .field_mut(key)
        .ok_or_else(|| ConfigError::UnknownKey { line: 0, key: key.to_string() })?;
    *slot = v;
    params.validate()?;
    Ok(())
}

/// Inverse of [`parse_config`]; numbers are written with 17 significant digits.
pub fn write_config<T: Scalar>(params: &SystemParams<T>) -> String {
    let mut out = String::new();
    for (key, v) in params.named_values() {
        let _ = writeln!(out, "{key} = {:.16e}", v.to_f64_lossy());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn round_trip_example2() {
        let p = presets::example2();
        let back: SystemParams<f64> = parse_config(&write_config(&p)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let mut text = write_config(&presets::example1());
        text.push_str("gamma = 3\n");
        let err = parse_config::<f64>(&text).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { ref key, .. } if key == "gamma"));
    }

    #[test]
    fn zero_lambda_names_the_key() {
        let text = write_config(&presets::example1()).replace("lambda = 2.0000000000000000e0", "lambda = 0");
        let err = parse_config::<f64>(&text).unwrap_err();
        assert_eq!(err.key(), Some("lambda"));
    }

    #[test]
    fn missing_key_and_comments() {
        let text = "# only one key\nrho = 1 # trailing\n";
        assert!(matches!(parse_config::<f64>(text), Err(ConfigError::MissingKey("omega"))));
    }

    #[test]
    fn comma_decimal_rejected() {
        let text = write_config(&presets::example1()).replace("d = 1.2", "d = 1,2");
        assert!(matches!(parse_config::<f64>(&text), Err(ConfigError::BadNumber { .. })));
    }

    #[test]
    fn override_applies() {
        let mut p = presets::example3();
        apply_override(&mut p, "q2=10").unwrap();
        assert_eq!(p.q[1], 10.0);
        assert!(apply_override(&mut p, "mu=-1").is_err());
        assert!(apply_override(&mut p, "nope").is_err());
    }
}
