//! Front end for the verification sweeps: configuration, caching, regression
//! fixtures and CSV reports.

pub mod anchors;
pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod report;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use ffmoments::chargroup::{Modulus, UnitGroup};
use ffmoments::lfunc::PrimitiveFamily;
use rayon::prelude::*;

use crate::cache::Cache;
use crate::config::{expand_family, resolve, ExperimentConfig};
use crate::error::CliError;
use crate::fixtures::Fixtures;
use crate::report::{Checks, RunMetadata};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Enumerate,
    Lfun,
    Moments,
    Primesums,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Enumerate => "enumerate",
            Command::Lfun => "lfun",
            Command::Moments => "moments",
            Command::Primesums => "primesums",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub record: bool,
    pub jobs: Option<usize>,
    pub budget: Option<u64>,
}

/// Shared state of one run.
pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub cache: Cache,
    pub fixtures: Fixtures,
    pub pool: rayon::ThreadPool,
    pub jobs: usize,
}

/// One modulus with its group and (when requested) primitive family.
pub struct Entry {
    pub modulus: Modulus,
    pub group: Arc<UnitGroup>,
    pub family: Option<PrimitiveFamily>,
}

impl Context {
    pub fn new(opts: &RunOptions) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::load(&opts.config)?;
        if let Some(b) = opts.budget {
            cfg.budget.max_phi = b;
        }
        let base = opts
            .config
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let out = match (&opts.out, &cfg.out) {
            (Some(o), _) => o.clone(),
            (None, Some(o)) => resolve(&base, o),
            (None, None) => PathBuf::from("out"),
        };
        std::fs::create_dir_all(&out).map_err(CliError::io)?;
        let cache_dir = match (&opts.cache, &cfg.cache) {
            (Some(c), _) => Some(c.clone()),
            (None, Some(c)) => Some(resolve(&base, c)),
            (None, None) => None,
        };
        let fixtures = Fixtures::load(
            cfg.fixtures.as_ref().map(|f| resolve(&base, f)),
            opts.record,
        )?;
        let jobs = opts.jobs.unwrap_or(1).max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(CliError::io)?;
        Ok(Self {
            cfg,
            out,
            cache: Cache::new(cache_dir)?,
            fixtures,
            pool,
            jobs,
        })
    }

    /// Every configured modulus, checked against the budget, in config order.
    pub fn moduli(&self) -> Result<Vec<Modulus>, CliError> {
        let mut out = Vec::new();
        for spec in &self.cfg.families {
            for m in expand_family(spec)? {
                if m.phi() > self.cfg.budget.max_phi {
                    return Err(CliError::Config(format!(
                        "phi({}) = {} exceeds the budget {}",
                        m.poly(),
                        m.phi(),
                        self.cfg.budget.max_phi
                    )));
                }
                let work = (m.q() as u64).saturating_pow(m.degree() as u32 - 1);
                if work > self.cfg.budget.max_enumeration {
                    return Err(CliError::Config(format!(
                        "{} needs {work} monic polynomials per coefficient, over the budget {}",
                        m.poly(),
                        self.cfg.budget.max_enumeration
                    )));
                }
                out.push(m);
            }
        }
        Ok(out)
    }

    /// Groups (and families if `with_family`) for every modulus, built in parallel.
    pub fn entries(&self, with_family: bool) -> Result<Vec<Entry>, CliError> {
        let moduli = self.moduli()?;
        let cache = &self.cache;
        self.pool.install(|| {
            moduli
                .into_par_iter()
                .map(|m| {
                    let group = cache.unit_group(&m)?;
                    let family = if with_family {
                        Some(cache.family(group.clone())?)
                    } else {
                        None
                    };
                    Ok(Entry {
                        modulus: m,
                        group,
                        family,
                    })
                })
                .collect()
        })
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Outcome of a run; the process exit status follows from it.
#[derive(Debug)]
pub struct RunSummary {
    pub checks: Checks,
    pub metadata: RunMetadata,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.checks.failures() > 0 {
            1
        } else {
            0
        }
    }
}

pub fn run(cmd: Command, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let mut ctx = Context::new(opts)?;
    let mut checks = Checks::default();
    let all = cmd == Command::All;
    let want = |c: Command, present: bool| cmd == c || (all && present);
    if want(Command::Enumerate, ctx.cfg.enumerate.is_some()) {
        checks.extend(commands::enumerate::run(&mut ctx)?);
    }
    if want(Command::Lfun, ctx.cfg.lfun.is_some()) {
        checks.extend(commands::lfun::run(&mut ctx)?);
    }
    if want(Command::Moments, ctx.cfg.moments.is_some()) {
        checks.extend(commands::moments::run(&mut ctx)?);
    }
    if want(Command::Primesums, ctx.cfg.primesums.is_some()) {
        checks.extend(commands::primesums::run(&mut ctx)?);
    }
    ctx.fixtures.save()?;
    report::write_csv(
        &ctx.out_path(&format!("{}_checks.csv", cmd.name())),
        &checks.rows,
    )?;
    let [ugh, ugm, lh, lm] = ctx.cache.counts();
    let metadata = RunMetadata {
        command: cmd.name().to_string(),
        wall_time_ms: start.elapsed().as_millis(),
        jobs: ctx.jobs,
        record: opts.record,
        unit_group_cache_hits: ugh,
        unit_group_cache_misses: ugm,
        lpoly_cache_hits: lh,
        lpoly_cache_misses: lm,
        checks: checks.rows.len(),
        failures: checks.failures(),
    };
    metadata.write(&ctx.out_path(&format!("{}_metadata.json", cmd.name())))?;
    log::info!(
        "{}: {} checks, {} failed, {} ms (unit-group cache {ugh} hit / {ugm} miss, L-poly cache {lh} hit / {lm} miss)",
        cmd.name(),
        metadata.checks,
        metadata.failures,
        metadata.wall_time_ms
    );
    Ok(RunSummary { checks, metadata })
}
