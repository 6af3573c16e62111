//! On-disk caches for unit groups and L-polynomials, keyed by `(q, Q)`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use ffmoments::chargroup::{unit_group, Modulus, UnitGroup, UnitGroupRecord};
use ffmoments::lfunc::{LPolynomial, PrimitiveFamily};
use log::{debug, warn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::fixtures::write_atomic;

pub const LPOLY_CACHE_VERSION: u32 = 1;

/// L-polynomials of the primitive characters mod `Q`: character index to
/// `(re, im)` coefficient pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpolyRecord {
    pub version: u32,
    pub q: u32,
    pub modulus: String,
    pub lpolys: BTreeMap<usize, Vec<(f64, f64)>>,
}

impl LpolyRecord {
    pub fn from_family(fam: &PrimitiveFamily) -> Self {
        Self {
            version: LPOLY_CACHE_VERSION,
            q: fam.modulus().q(),
            modulus: fam.modulus().poly().to_string(),
            lpolys: fam
                .lpolys()
                .iter()
                .map(|l| {
                    (
                        l.char_index(),
                        l.coeffs().iter().map(|c| (c.re, c.im)).collect(),
                    )
                })
                .collect(),
        }
    }

    pub fn to_family(&self, group: Arc<UnitGroup>) -> Result<PrimitiveFamily, CliError> {
        let m = group.modulus();
        if self.version != LPOLY_CACHE_VERSION
            || self.q != m.q()
            || self.modulus != m.poly().to_string()
        {
            return Err(CliError::Io(
                "L-polynomial cache does not match the modulus".into(),
            ));
        }
        let lpolys = self
            .lpolys
            .iter()
            .map(|(&i, c)| {
                LPolynomial::from_coeffs(
                    self.q,
                    i,
                    c.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
                )
            })
            .collect();
        Ok(PrimitiveFamily::from_parts(group, lpolys)?)
    }
}

#[derive(Debug, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
    pub unit_group_hits: AtomicUsize,
    pub unit_group_misses: AtomicUsize,
    pub lpoly_hits: AtomicUsize,
    pub lpoly_misses: AtomicUsize,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).map_err(CliError::io)?;
        }
        Ok(Self {
            dir,
            ..Default::default()
        })
    }

    fn path(&self, kind: &str, m: &Modulus) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("{kind}-q{}-{}.json", m.q(), m.poly().to_index())))
    }

    fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Option<T> {
        let text = std::fs::read_to_string(path).ok()?;
        match serde_json::from_str(&text) {
            Ok(v) => Some(v),
            Err(e) => {
                warn!("ignoring unreadable cache file {}: {e}", path.display());
                None
            }
        }
    }

    pub fn unit_group(&self, m: &Modulus) -> Result<Arc<UnitGroup>, CliError> {
        let path = self.path("unitgroup", m);
        if let Some(p) = &path {
            if let Some(rec) = Self::read::<UnitGroupRecord>(p) {
                match UnitGroup::from_record(&rec) {
                    Ok(g) if g.modulus() == m => {
                        debug!("unit group cache hit for {}", m.poly());
                        self.unit_group_hits.fetch_add(1, Ordering::Relaxed);
                        return Ok(Arc::new(g));
                    }
                    Ok(_) => warn!("cache file {} holds another modulus", p.display()),
                    Err(e) => warn!("cache file {} failed verification: {e}", p.display()),
                }
            }
        }
        self.unit_group_misses.fetch_add(1, Ordering::Relaxed);
        let g = unit_group(m)?;
        if let Some(p) = &path {
            let text = serde_json::to_string(&g.to_record()).map_err(CliError::io)?;
            write_atomic(p, &text)?;
        }
        Ok(Arc::new(g))
    }

    pub fn family(&self, group: Arc<UnitGroup>) -> Result<PrimitiveFamily, CliError> {
        let path = self.path("lpoly", group.modulus());
        if let Some(p) = &path {
            if let Some(rec) = Self::read::<LpolyRecord>(p) {
                match rec.to_family(group.clone()) {
                    Ok(f) => {
                        self.lpoly_hits.fetch_add(1, Ordering::Relaxed);
                        return Ok(f);
                    }
                    Err(e) => warn!("cache file {} rejected: {e}", p.display()),
                }
            }
        }
        self.lpoly_misses.fetch_add(1, Ordering::Relaxed);
        let fam = PrimitiveFamily::new(group)?;
        if let Some(p) = &path {
            let text =
                serde_json::to_string(&LpolyRecord::from_family(&fam)).map_err(CliError::io)?;
            write_atomic(p, &text)?;
        }
        Ok(fam)
    }

    pub fn counts(&self) -> [usize; 4] {
        [
            self.unit_group_hits.load(Ordering::Relaxed),
            self.unit_group_misses.load(Ordering::Relaxed),
            self.lpoly_hits.load(Ordering::Relaxed),
            self.lpoly_misses.load(Ordering::Relaxed),
        ]
    }
}
