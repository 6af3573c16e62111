//! Experiment configuration (JSON, `"schema": 1`, unknown fields rejected).

use std::path::{Path, PathBuf};

use ffmoments::chargroup::{factor_modulus, monic_moduli, Modulus};
use ffmoments::ffpoly::{FieldSpec, FqPoly};
use ffmoments::moments::{random_shift_specs, ShiftSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default)]
    pub families: Vec<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumerate: Option<EnumerateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lfun: Option<LfunConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primesums: Option<PrimesumsConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub budget: Budget,
    /// Regression fixture file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixtures: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<PathBuf>,
    /// Perturbs one computed L-coefficient so the suites must report a failure.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inject_fault: bool,
}

/// Moduli over one field: every monic `Q` of the listed degrees plus explicit ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub q: u32,
    #[serde(default)]
    pub degrees: Vec<usize>,
    #[serde(default)]
    pub moduli: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateConfig {
    pub fields: Vec<u32>,
    /// Prime counts are cross-checked by enumeration while `q^n` is at most this.
    pub prime_count_limit: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LfunConfig {
    /// t-grid size over one period for the bound sweeps.
    pub t_points: usize,
    /// Extra degrees past `d(Q) - 1` probed for vanishing coefficients.
    #[serde(default = "default_probe")]
    pub probe_degrees: usize,
    /// Record simplified/shifted bound defects (costs a prime table up to `d(Q)`).
    #[serde(default)]
    pub defects: bool,
    #[serde(default)]
    pub shifts: ShiftSource,
}

fn default_probe() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub shifts: ShiftSource,
    #[serde(default)]
    pub exponents: Vec<f64>,
    /// `Y = q^N` for each listed `N`.
    #[serde(default)]
    pub y_degrees: Vec<usize>,
    #[serde(default = "default_quad")]
    pub quad_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perron: Option<PerronConfig>,
}

fn default_quad() -> usize {
    1024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerronConfig {
    /// Random `(chi, N)` draws per `(q, d(Q))` family.
    pub samples: usize,
    pub radius: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomShifts>,
    #[serde(default)]
    pub explicit: Vec<ShiftSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomShifts {
    pub count: usize,
    pub len: usize,
    pub seed: u64,
}

impl ShiftSource {
    pub fn specs(&self, q: u32) -> Result<Vec<ShiftSpec>, CliError> {
        let mut out = self.explicit.clone();
        if let Some(r) = &self.random {
            out.extend(random_shift_specs(q, r.count, r.len, r.seed).map_err(CliError::config)?);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimesumsConfig {
    pub fields: Vec<u32>,
    pub h_min: usize,
    pub h_max: usize,
    pub alpha_points: usize,
    /// `h` values for the `F(h, theta)` comparison.
    pub f_h_values: Vec<usize>,
    pub f_theta_points: usize,
    pub tail_h_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub degree_probe: f64,
    pub root_radius: f64,
    pub bound_slack: f64,
    pub conjugation: f64,
    pub perron: f64,
    /// Two-sided tolerance for fixtures that must reproduce exactly.
    pub fixture_exact: f64,
    /// Relative band for ratio and defect fixtures.
    pub regression_band: f64,
    /// Allowed growth of the grid defects from the `h = 6` to the `h = 12` slice.
    pub growth_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            degree_probe: 1e-6,
            root_radius: 1e-6,
            bound_slack: 1e-9,
            conjugation: 1e-10,
            perron: 1e-8,
            fixture_exact: 1e-9,
            regression_band: 0.25,
            growth_factor: 1.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    /// Largest `phi(Q)` any family may contain.
    pub max_phi: u64,
    /// Largest `q^{d(Q)-1}` (monic polynomials per coefficient) any family may need.
    pub max_enumeration: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_phi: 100_000,
            max_enumeration: 1_000_000,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(CliError::config)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("unsupported schema {}", self.schema));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("degree_probe", t.degree_probe),
            ("root_radius", t.root_radius),
            ("bound_slack", t.bound_slack),
            ("conjugation", t.conjugation),
            ("perron", t.perron),
            ("fixture_exact", t.fixture_exact),
            ("regression_band", t.regression_band),
            ("growth_factor", t.growth_factor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        if self.budget.max_phi == 0 || self.budget.max_enumeration == 0 {
            return bad("budget limits must be positive".into());
        }
        for f in &self.families {
            field(f.q)?;
            if let Some(d) = f.degrees.iter().find(|&&d| d < 2) {
                return bad(format!("family degree {d} is below 2"));
            }
        }
        if let Some(e) = &self.enumerate {
            for &q in &e.fields {
                field(q)?;
            }
        }
        if let Some(l) = &self.lfun {
            if l.t_points == 0 {
                return bad("lfun.t_points must be positive".into());
            }
        }
        if let Some(m) = &self.moments {
            if m.exponents.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return bad("moment exponents must be finite and >= 0".into());
            }
            if let Some(p) = &m.perron {
                if !(p.radius > 0.0 && p.radius < 1.0) {
                    return bad(format!("perron radius {} outside (0, 1)", p.radius));
                }
            }
        }
        if let Some(p) = &self.primesums {
            for &q in &p.fields {
                field(q)?;
            }
            if p.h_min < 1 || p.h_min > p.h_max || p.alpha_points == 0 || p.f_theta_points == 0 {
                return bad("primesums ranges are empty or start below 1".into());
            }
            if p.f_h_values.contains(&0) || p.tail_h_max < 1 {
                return bad("primesums h values must be >= 1".into());
            }
        }
        Ok(())
    }
}

pub fn field(q: u32) -> Result<FieldSpec, CliError> {
    FieldSpec::new(q).map_err(CliError::config)
}

/// The moduli a family spec expands to, degree groups first then explicit ones.
pub fn expand_family(spec: &FamilySpec) -> Result<Vec<Modulus>, CliError> {
    let f = field(spec.q)?;
    let mut out = Vec::new();
    for &d in &spec.degrees {
        out.extend(monic_moduli(f, d).map_err(CliError::config)?);
    }
    for s in &spec.moduli {
        let poly = FqPoly::parse(f, s)
            .map_err(|e| CliError::Config(format!("modulus {s:?} over F_{}: {e}", spec.q)))?;
        out.push(
            factor_modulus(&poly).map_err(|e| CliError::Config(format!("modulus {s:?}: {e}")))?,
        );
    }
    Ok(out)
}

/// Resolves a config-relative path.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
