//! Prime-sum grids: log-weighted and reciprocal sums, the cosine sum against
//! both estimates, `F(h, theta)`, and the prime-power tail.

use std::f64::consts::TAU;

use ffmoments::primesums::{
    cosine_grid, f_sum, f_sum_estimate, fit_mertens_constant, logp_sum, prime_power_tail,
    recip_sum, CosineGridRow, PrimeTable,
};
use rayon::prelude::*;
use serde::Serialize;

use super::finite_max;
use crate::config::{field, PrimesumsConfig};
use crate::error::CliError;
use crate::fixtures::Rule;
use crate::report::{write_csv, Checks, Status};
use crate::Context;

const CMD: &str = "primesums";
/// Fixed constant the log-weighted defect must stay under.
const LOGP_DEFECT_LIMIT: f64 = 2.0;

#[derive(Debug, Clone, Serialize)]
struct GridRow {
    q: u32,
    h: usize,
    alpha: f64,
    sum: f64,
    estimate1: f64,
    estimate2: f64,
    defect1: f64,
    defect2: f64,
}

impl From<&CosineGridRow> for GridRow {
    fn from(r: &CosineGridRow) -> Self {
        Self {
            q: r.q,
            h: r.h,
            alpha: r.alpha,
            sum: r.sum,
            estimate1: r.estimate_zeta,
            estimate2: r.estimate_min,
            defect1: r.defect_zeta,
            defect2: r.defect_min,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct MertensRow {
    q: u32,
    h: usize,
    logp_sum: f64,
    log_x: f64,
    logp_defect: f64,
    recip_sum: f64,
    loglog_x: f64,
    fitted_b: f64,
    scaled_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
struct FRow {
    h: usize,
    theta: f64,
    f: f64,
    estimate: f64,
    defect: f64,
}

#[derive(Debug, Clone, Serialize)]
struct TailRow {
    q: u32,
    h: usize,
    value: f64,
    truncation_degree: usize,
    remainder_bound: f64,
    relative_remainder: f64,
}

struct FieldResult {
    q: u32,
    grid: Vec<GridRow>,
    mertens: Vec<MertensRow>,
    tails: Vec<TailRow>,
}

pub fn run(ctx: &mut Context) -> Result<Checks, CliError> {
    let sec = ctx
        .cfg
        .primesums
        .clone()
        .ok_or_else(|| CliError::Config("config has no primesums section".into()))?;
    let tol = ctx.cfg.tolerances.clone();
    let results: Vec<FieldResult> = ctx.pool.install(|| {
        sec.fields
            .par_iter()
            .map(|&q| per_field(q, &sec))
            .collect::<Result<_, _>>()
    })?;

    let exact = Rule::Exact(tol.fixture_exact);
    let mut checks = Checks::default();
    let mut check_fixture = |checks: &mut Checks,
                             key: String,
                             anchor: &'static str,
                             subject: String,
                             v: f64,
                             rule: Rule| {
        let verdict = ctx.fixtures.check(&key, v, rule);
        checks.push(
            CMD,
            format!(
                "{} reproduces recorded value",
                key.rsplit('/').next().unwrap_or("")
            ),
            anchor,
            subject,
            v,
            verdict.reference,
            verdict.status,
            verdict.detail,
        );
    };
    for r in &results {
        let q = r.q;
        let subject = format!("q={q}");
        let prefix = format!("primesums/q{q}");

        let logp = finite_max(r.mertens.iter().map(|m| m.logp_defect.abs())).unwrap_or(0.0);
        checks.push(
            CMD,
            "log-weighted prime sum defect bounded",
            "log-weighted-prime-sum",
            subject.clone(),
            logp,
            Some(LOGP_DEFECT_LIMIT),
            Status::from_bool(logp <= LOGP_DEFECT_LIMIT),
            "",
        );
        check_fixture(
            &mut checks,
            format!("{prefix}/sup_logp_defect"),
            "log-weighted-prime-sum",
            subject.clone(),
            logp,
            exact,
        );
        if let Some(first) = r.mertens.first() {
            check_fixture(
                &mut checks,
                format!("{prefix}/mertens_b"),
                "reciprocal-prime-sum",
                subject.clone(),
                first.fitted_b,
                exact,
            );
        }
        let resid = finite_max(r.mertens.iter().map(|m| m.scaled_residual.abs())).unwrap_or(0.0);
        check_fixture(
            &mut checks,
            format!("{prefix}/sup_scaled_residual"),
            "reciprocal-prime-sum",
            subject.clone(),
            resid,
            exact,
        );

        let sup1 = finite_max(r.grid.iter().map(|g| g.defect1.abs())).unwrap_or(f64::NAN);
        let sup2 = finite_max(r.grid.iter().map(|g| g.defect2.abs())).unwrap_or(f64::NAN);
        let sup12 = finite_max(r.grid.iter().map(|g| (g.estimate1 - g.estimate2).abs()))
            .unwrap_or(f64::NAN);
        check_fixture(
            &mut checks,
            format!("{prefix}/sup_defect_zeta"),
            "cosine-prime-sum",
            subject.clone(),
            sup1,
            exact,
        );
        check_fixture(
            &mut checks,
            format!("{prefix}/sup_defect_min"),
            "cosine-prime-sum",
            subject.clone(),
            sup2,
            exact,
        );
        check_fixture(
            &mut checks,
            format!("{prefix}/sup_estimate_gap"),
            "cosine-prime-sum",
            subject.clone(),
            sup12,
            exact,
        );
        let slice = |h: usize, pick: fn(&GridRow) -> f64| {
            finite_max(r.grid.iter().filter(|g| g.h == h).map(|g| pick(g).abs()))
        };
        let (lo, hi) = growth_slices(&sec);
        for (name, pick) in [
            ("zeta", (|g: &GridRow| g.defect1) as fn(&GridRow) -> f64),
            ("min", |g: &GridRow| g.defect2),
        ] {
            if let (Some(a), Some(b)) = (slice(lo, pick), slice(hi, pick)) {
                check_fixture(
                    &mut checks,
                    format!("{prefix}/h{lo}/sup_defect_{name}"),
                    "cosine-prime-sum",
                    subject.clone(),
                    a,
                    exact,
                );
                check_fixture(
                    &mut checks,
                    format!("{prefix}/h{hi}/sup_defect_{name}"),
                    "cosine-prime-sum",
                    subject.clone(),
                    b,
                    exact,
                );
                checks.push(
                    CMD,
                    format!(
                        "sup defect ({name}) at h={hi} within {}x of h={lo}",
                        tol.growth_factor
                    ),
                    "cosine-prime-sum",
                    subject.clone(),
                    b,
                    Some(tol.growth_factor * a),
                    Status::from_bool(b <= tol.growth_factor * a),
                    "",
                );
            }
        }

        let tail = finite_max(r.tails.iter().map(|t| t.value)).unwrap_or(f64::NAN);
        let rel = finite_max(r.tails.iter().map(|t| t.relative_remainder)).unwrap_or(f64::NAN);
        check_fixture(
            &mut checks,
            format!("{prefix}/sup_tail"),
            "prime-power-tail",
            subject.clone(),
            tail,
            exact,
        );
        checks.push(
            CMD,
            "tail remainder bound below 1% of the value",
            "prime-power-tail",
            subject,
            rel,
            Some(0.01),
            Status::from_bool(rel < 0.01),
            "",
        );
    }

    let f_rows = f_grid(&sec)?;
    let fsup = finite_max(f_rows.iter().map(|r| r.defect.abs())).unwrap_or(f64::NAN);
    check_fixture(
        &mut checks,
        "primesums/fsum/sup_defect".into(),
        "harmonic-cosine-sum",
        "all h".into(),
        fsup,
        exact,
    );
    for &h in &sec.f_h_values {
        let v = finite_max(f_rows.iter().filter(|r| r.h == h).map(|r| r.defect.abs()))
            .unwrap_or(f64::NAN);
        check_fixture(
            &mut checks,
            format!("primesums/fsum/h{h}/sup_defect"),
            "harmonic-cosine-sum",
            format!("h={h}"),
            v,
            exact,
        );
    }

    let grid: Vec<&GridRow> = results.iter().flat_map(|r| &r.grid).collect();
    let mertens: Vec<&MertensRow> = results.iter().flat_map(|r| &r.mertens).collect();
    let tails: Vec<&TailRow> = results.iter().flat_map(|r| &r.tails).collect();
    write_csv(&ctx.out_path("primesums_grid.csv"), &grid)?;
    write_csv(&ctx.out_path("primesums_mertens.csv"), &mertens)?;
    write_csv(&ctx.out_path("primesums_tail.csv"), &tails)?;
    write_csv(&ctx.out_path("fsum.csv"), &f_rows)?;
    Ok(checks)
}

/// `(6, 12)` when the grid covers them, otherwise `(h_max / 2, h_max)`.
fn growth_slices(sec: &PrimesumsConfig) -> (usize, usize) {
    if sec.h_min <= 6 && sec.h_max >= 12 {
        (6, 12)
    } else {
        ((sec.h_max / 2).max(sec.h_min), sec.h_max)
    }
}

fn per_field(q: u32, sec: &PrimesumsConfig) -> Result<FieldResult, CliError> {
    let f = field(q)?;
    let hmax = sec.h_max.max(sec.tail_h_max);
    let table = PrimeTable::counts_only(f, hmax)?;
    let hs: Vec<usize> = (sec.h_min..=sec.h_max).collect();
    let grid = cosine_grid(&table, &hs, sec.alpha_points)?
        .iter()
        .map(GridRow::from)
        .collect();

    let fit_hs: Vec<usize> = (1..=sec.h_max).collect();
    let fit = fit_mertens_constant(&table, &fit_hs)?;
    let ln_q = (q as f64).ln();
    let mut mertens = Vec::new();
    for (&h, &(_, resid)) in fit_hs.iter().zip(&fit.scaled_residuals) {
        let lp = logp_sum(&table, h)?;
        let log_x = h as f64 * ln_q;
        mertens.push(MertensRow {
            q,
            h,
            logp_sum: lp.value,
            log_x,
            logp_defect: lp.defect,
            recip_sum: recip_sum(&table, h)?,
            loglog_x: log_x.ln(),
            fitted_b: fit.b,
            scaled_residual: resid,
        });
    }

    let mut tails = Vec::new();
    for h in 1..=sec.tail_h_max {
        let t = prime_power_tail(&table, h)?;
        tails.push(TailRow {
            q,
            h,
            value: t.value,
            truncation_degree: t.truncation_degree,
            remainder_bound: t.remainder_bound,
            relative_remainder: t.remainder_bound / t.value,
        });
    }
    Ok(FieldResult {
        q,
        grid,
        mertens,
        tails,
    })
}

fn f_grid(sec: &PrimesumsConfig) -> Result<Vec<FRow>, CliError> {
    let mut out = Vec::new();
    for &h in &sec.f_h_values {
        for k in 0..sec.f_theta_points {
            let theta = TAU * k as f64 / sec.f_theta_points as f64;
            let f = f_sum(h, theta)?;
            let estimate = f_sum_estimate(h, theta);
            out.push(FRow {
                h,
                theta,
                f,
                estimate,
                defect: f - estimate,
            });
        }
    }
    Ok(out)
}
