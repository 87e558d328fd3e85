use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A `--fail-under` bound. Without a key it applies to the command's
/// headline metric.
#[derive(Debug, Clone, PartialEq)]
pub struct FailUnder {
    pub key: Option<String>,
    pub value: f64,
}

impl FromStr for FailUnder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (key, value) = match s.split_once('=') {
            Some((k, v)) => (Some(k.trim().to_string()), v),
            None => (None, s),
        };
        let value: f64 = value.trim().parse().map_err(|_| format!("not a number: {value:?}"))?;
        if !value.is_finite() {
            return Err(format!("bound must be finite, got {value}"));
        }
        Ok(Self { key, value })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stamp {
    pub generated_at_unix: u64,
    /// SHA-256 of the report body as written without the stamp.
    pub body_sha256: String,
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    #[serde(flatten)]
    versioned: Versioned<'a, T>,
    stamp: Stamp,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Pretty JSON with `schema_version` first, plus the optional stamp.
pub(crate) fn render<T: Serialize>(body: &T, stamp: bool) -> Result<String, CliError> {
    let internal = |e: serde_json::Error| CliError::Internal(format!("cannot serialize report: {e}"));
    let versioned = Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    };
    let plain = serde_json::to_string_pretty(&versioned).map_err(internal)?;
    if !stamp {
        return Ok(plain + "\n");
    }
    let stamp = Stamp {
        generated_at_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        body_sha256: sha256_hex(plain.as_bytes()),
    };
    let stamped = serde_json::to_string_pretty(&Stamped { versioned, stamp }).map_err(internal)?;
    Ok(stamped + "\n")
}

pub(crate) fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

/// Bounds that the report violates, as human-readable lines.
pub(crate) fn check_bounds<T: Serialize>(body: &T, headline: &str, bounds: &[FailUnder]) -> Result<Vec<String>, CliError> {
    if bounds.is_empty() {
        return Ok(Vec::new());
    }
    let value = serde_json::to_value(body).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut failures = Vec::new();
    for bound in bounds {
        let key = bound.key.as_deref().unwrap_or(headline);
        let actual = match value.get(key) {
            Some(Value::Number(n)) => n.as_f64().unwrap_or(f64::NAN),
            Some(Value::Null) => f64::NAN,
            _ => return Err(CliError::Input(format!("--fail-under: report has no numeric field {key:?}"))),
        };
        // NaN never meets a bound.
        if actual.partial_cmp(&bound.value).is_none_or(|o| o.is_lt()) {
            failures.push(format!("{key} = {actual} is below {}", bound.value));
        }
    }
    Ok(failures)
}
