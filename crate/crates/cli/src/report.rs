//! Check rows, CSV emission and run metadata.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::anchors::is_registered;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A regression constant written under `--record`.
    Recorded,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub command: &'static str,
    pub check: String,
    pub anchor: &'static str,
    pub subject: String,
    pub measured: f64,
    pub reference: Option<f64>,
    pub status: Status,
    pub detail: String,
}

/// Rows of one command, in canonical order.
#[derive(Debug, Default)]
pub struct Checks {
    pub rows: Vec<CheckRow>,
}

impl Checks {
    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        command: &'static str,
        check: impl Into<String>,
        anchor: &'static str,
        subject: impl Into<String>,
        measured: f64,
        reference: Option<f64>,
        status: Status,
        detail: impl Into<String>,
    ) {
        assert!(is_registered(anchor), "unregistered anchor {anchor}");
        self.rows.push(CheckRow {
            command,
            check: check.into(),
            anchor,
            subject: subject.into(),
            measured,
            reference,
            status,
            detail: detail.into(),
        });
    }

    pub fn extend(&mut self, other: Checks) {
        self.rows.extend(other.rows);
    }

    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == Status::Fail)
            .count()
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(CliError::io)?;
    for r in rows {
        w.serialize(r).map_err(CliError::io)?;
    }
    w.flush().map_err(CliError::io)
}

/// Everything that legitimately differs between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub command: String,
    pub wall_time_ms: u128,
    pub jobs: usize,
    pub record: bool,
    pub unit_group_cache_hits: usize,
    pub unit_group_cache_misses: usize,
    pub lpoly_cache_hits: usize,
    pub lpoly_cache_misses: usize,
    pub checks: usize,
    pub failures: usize,
}

impl RunMetadata {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut f = File::create(path).map_err(CliError::io)?;
        let text = serde_json::to_string_pretty(self).map_err(CliError::io)?;
        f.write_all(text.as_bytes()).map_err(CliError::io)
    }
}

/// Shortest round-trip rendering used inside composite text columns.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
