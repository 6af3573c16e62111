//! Committed regression constants: verified by default, rewritten under `--record`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::report::Status;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureFile {
    version: u32,
    values: BTreeMap<String, f64>,
}

/// How a measured value is compared with its stored constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// `|v - s| <= tol`.
    Exact(f64),
    /// `|v - s| <= band |s|`.
    Band(f64),
    /// `v <= s + band |s|`.
    Ceiling(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub reference: Option<f64>,
    pub detail: String,
}

#[derive(Debug)]
pub struct Fixtures {
    path: Option<PathBuf>,
    stored: BTreeMap<String, f64>,
    recorded: BTreeMap<String, f64>,
    record: bool,
}

impl Fixtures {
    pub fn load(path: Option<PathBuf>, record: bool) -> Result<Self, CliError> {
        let stored = match &path {
            Some(p) if p.exists() => {
                let text = std::fs::read_to_string(p).map_err(CliError::io)?;
                let file: FixtureFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("fixture file {}: {e}", p.display())))?;
                file.values
            }
            _ => BTreeMap::new(),
        };
        Ok(Self {
            path,
            stored,
            recorded: BTreeMap::new(),
            record,
        })
    }

    pub fn is_recording(&self) -> bool {
        self.record
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.stored.get(key).copied()
    }

    pub fn check(&mut self, key: &str, value: f64, rule: Rule) -> Verdict {
        if !value.is_finite() {
            return Verdict {
                status: Status::Fail,
                reference: self.get(key),
                detail: format!("{key}: non-finite value"),
            };
        }
        if self.record {
            self.recorded.insert(key.to_string(), value);
            return Verdict {
                status: Status::Recorded,
                reference: Some(value),
                detail: key.to_string(),
            };
        }
        let Some(s) = self.get(key) else {
            return Verdict {
                status: Status::Fail,
                reference: None,
                detail: format!("{key}: no recorded constant (run with --record)"),
            };
        };
        let ok = match rule {
            Rule::Exact(tol) => (value - s).abs() <= tol,
            Rule::Band(b) => (value - s).abs() <= b * s.abs(),
            Rule::Ceiling(b) => value <= s + b * s.abs() + 1e-12,
        };
        Verdict {
            status: Status::from_bool(ok),
            reference: Some(s),
            detail: key.to_string(),
        }
    }

    /// Writes stored values overlaid with everything recorded in this run.
    pub fn save(&self) -> Result<(), CliError> {
        if !self.record || (self.path.is_none() && self.recorded.is_empty()) {
            return Ok(());
        }
        let Some(path) = &self.path else {
            return Err(CliError::Config(
                "--record needs a fixtures path in the config".into(),
            ));
        };
        let mut values = self.stored.clone();
        values.extend(self.recorded.iter().map(|(k, v)| (k.clone(), *v)));
        let file = FixtureFile { version: 1, values };
        write_atomic(
            path,
            &serde_json::to_string_pretty(&file).map_err(CliError::io)?,
        )
    }
}

pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(CliError::io)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, text).map_err(CliError::io)?;
    std::fs::rename(&tmp, path).map_err(CliError::io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules() {
        let mut f = Fixtures {
            path: None,
            stored: BTreeMap::from([("a".to_string(), 2.0)]),
            recorded: BTreeMap::new(),
            record: false,
        };
        assert_eq!(f.check("a", 2.4, Rule::Band(0.25)).status, Status::Pass);
        assert_eq!(f.check("a", 2.6, Rule::Band(0.25)).status, Status::Fail);
        assert_eq!(f.check("a", 1.0, Rule::Band(0.25)).status, Status::Fail);
        assert_eq!(f.check("a", 1.0, Rule::Ceiling(0.25)).status, Status::Pass);
        assert_eq!(
            f.check("a", 2.0 + 1e-10, Rule::Exact(1e-9)).status,
            Status::Pass
        );
        assert_eq!(
            f.check("a", 2.0 + 1e-8, Rule::Exact(1e-9)).status,
            Status::Fail
        );
        assert_eq!(f.check("b", 1.0, Rule::Exact(1e-9)).status, Status::Fail);
        assert_eq!(
            f.check("a", f64::NAN, Rule::Exact(1.0)).status,
            Status::Fail
        );
    }
}
