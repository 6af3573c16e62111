//! L-polynomials of every primitive family and the suites run on them.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use ffmoments::lfunc::{
    crude_constant, l_coefficient_from_counts, log_l_bound_pointwise, log_l_bound_simplified,
    residue_class_counts, shifted_log_bound, shifted_log_value, LPolynomial, PrimeCoefficients,
    PrimitiveFamily,
};
use ffmoments::moments::ShiftSpec;
use ffmoments::primesums::PrimeTable;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::finite_max;
use crate::config::{field, LfunConfig};
use crate::error::CliError;
use crate::fixtures::Rule;
use crate::report::{fmt_f64, write_csv, Checks, Status};
use crate::{Context, Entry};

const CMD: &str = "lfun";

#[derive(Debug, Clone, Serialize)]
struct LpolyRow {
    q: u32,
    modulus: String,
    char_index: usize,
    degree: usize,
    coeffs: String,
    root_radii: String,
}

#[derive(Debug, Clone, Serialize)]
struct BoundRow {
    q: u32,
    modulus: String,
    degree: usize,
    n_primitive: usize,
    max_probe_coeff: f64,
    max_conjugation_gap: f64,
    pointwise_evaluations: usize,
    max_pointwise_excess: f64,
    max_simplified_defect: Option<f64>,
    max_shifted_defect: Option<f64>,
    max_crude_constant: Option<f64>,
    low_degree: bool,
}

struct ModulusResult {
    lpolys: Vec<LpolyRow>,
    /// Per character: worst distance of an inverse-root radius from `{1, sqrt q}`.
    root_gaps: Vec<(usize, f64)>,
    bounds: BoundRow,
    worked_example: Option<f64>,
}

pub fn run(ctx: &mut Context) -> Result<Checks, CliError> {
    let sec = ctx
        .cfg
        .lfun
        .clone()
        .ok_or_else(|| CliError::Config("config has no lfun section".into()))?;
    let tol = ctx.cfg.tolerances.clone();
    let mut entries = ctx.entries(true)?;
    if ctx.cfg.inject_fault {
        inject_fault(&mut entries)?;
    }

    // one prime table per field, deep enough for the largest modulus
    let mut depth: BTreeMap<u32, usize> = BTreeMap::new();
    for e in &entries {
        let d = depth.entry(e.modulus.q()).or_default();
        *d = (*d).max(e.modulus.degree());
    }
    let mut tables = BTreeMap::new();
    for (&q, &d) in &depth {
        tables.insert(q, Arc::new(PrimeTable::new(field(q)?, d)?));
    }
    let mut specs = BTreeMap::new();
    for &q in depth.keys() {
        specs.insert(q, sec.shifts.specs(q)?);
    }

    let results: Vec<ModulusResult> = ctx.pool.install(|| {
        entries
            .par_iter()
            .map(|e| {
                let q = e.modulus.q();
                analyse(e, &sec, &tables[&q], &specs[&q])
            })
            .collect::<Result<_, _>>()
    })?;

    let mut checks = Checks::default();
    let mut lpoly_rows = Vec::new();
    let mut bound_rows = Vec::new();
    for r in results {
        let b = &r.bounds;
        let subject = format!("q={} Q={}", b.q, b.modulus);
        checks.push(
            CMD,
            format!(
                "coefficients vanish in degrees d(Q)..d(Q)+{}",
                sec.probe_degrees
            ),
            "l-degree-bound",
            subject.clone(),
            b.max_probe_coeff,
            Some(tol.degree_probe),
            Status::from_bool(b.max_probe_coeff < tol.degree_probe),
            "",
        );
        checks.push(
            CMD,
            "conjugate character has conjugate coefficients",
            "conjugation-symmetry",
            subject.clone(),
            b.max_conjugation_gap,
            Some(tol.conjugation),
            Status::from_bool(b.max_conjugation_gap < tol.conjugation),
            "",
        );
        checks.push(
            CMD,
            "pointwise bound holds on the t-grid for every h",
            "pointwise-log-bound",
            subject.clone(),
            b.max_pointwise_excess,
            Some(tol.bound_slack),
            Status::from_bool(b.max_pointwise_excess <= tol.bound_slack),
            format!("{} evaluations", b.pointwise_evaluations),
        );
        for &(idx, gap) in &r.root_gaps {
            checks.push(
                CMD,
                "inverse roots on the Weil circles",
                "weil-root-circles",
                format!("{subject} chi#{idx}"),
                gap,
                Some(tol.root_radius),
                Status::from_bool(gap < tol.root_radius),
                "",
            );
        }
        if let Some(gap) = r.worked_example {
            checks.push(
                CMD,
                "L-polynomials are {1 + i sqrt3 u, 1 - i sqrt3 u, 1 - u, 1 - u}",
                "worked-example",
                subject,
                gap,
                Some(1e-9),
                Status::from_bool(gap < 1e-9),
                "",
            );
        }
        lpoly_rows.extend(r.lpolys);
        bound_rows.push(r.bounds);
    }

    // regression constants per (q, d(Q)) family
    let mut grouped: BTreeMap<(u32, usize), Vec<&BoundRow>> = BTreeMap::new();
    for b in &bound_rows {
        grouped.entry((b.q, b.degree)).or_default().push(b);
    }
    for ((q, d), rows) in grouped {
        let band = Rule::Ceiling(tol.regression_band);
        let mut fix = |name: &str, anchor: &'static str, v: Option<f64>, ck: &mut Checks| {
            if let Some(v) = v {
                let key = format!("lfun/q{q}/d{d}/{name}");
                let verdict = ctx.fixtures.check(&key, v, band);
                ck.push(
                    CMD,
                    format!("{name} within regression constant"),
                    anchor,
                    format!("q={q} d={d}"),
                    v,
                    verdict.reference,
                    verdict.status,
                    verdict.detail,
                );
            }
        };
        fix(
            "max_crude_constant",
            "crude-single-bound",
            finite_max(rows.iter().filter_map(|b| b.max_crude_constant)),
            &mut checks,
        );
        fix(
            "max_simplified_defect",
            "simplified-log-bound",
            finite_max(rows.iter().filter_map(|b| b.max_simplified_defect)),
            &mut checks,
        );
        fix(
            "max_shifted_defect",
            "shifted-log-bound",
            finite_max(rows.iter().filter_map(|b| b.max_shifted_defect)),
            &mut checks,
        );
    }

    write_csv(&ctx.out_path("lpolys.csv"), &lpoly_rows)?;
    write_csv(&ctx.out_path("lfun_bounds.csv"), &bound_rows)?;
    Ok(checks)
}

/// Shifts `c_1` of the first L-polynomial of the first non-empty family.
fn inject_fault(entries: &mut [Entry]) -> Result<(), CliError> {
    let Some(e) = entries
        .iter_mut()
        .find(|e| e.family.as_ref().is_some_and(|f| !f.is_empty()))
    else {
        return Ok(());
    };
    let fam = e.family.take().expect("family");
    let mut lpolys = fam.lpolys().to_vec();
    let l = &lpolys[0];
    let mut c = l.coeffs().to_vec();
    if c.len() < 2 {
        c.push(Complex64::new(0.0, 0.0));
    }
    c[1] += Complex64::new(0.5, 0.0);
    lpolys[0] = LPolynomial::from_coeffs(l.q(), l.char_index(), c);
    e.family = Some(PrimitiveFamily::from_parts(fam.group().clone(), lpolys)?);
    log::warn!(
        "fault injected into {} chi#{}",
        e.modulus.poly(),
        lpolys_index(e)
    );
    Ok(())
}

fn lpolys_index(e: &Entry) -> usize {
    e.family.as_ref().map_or(0, |f| f.lpolys()[0].char_index())
}

fn root_gap(l: &LPolynomial) -> f64 {
    let sq = (l.q() as f64).sqrt();
    l.inverse_roots()
        .iter()
        .map(|a| {
            let r = a.norm();
            (r - sq).abs().min((r - 1.0).abs())
        })
        .fold(0.0, f64::max)
}

fn analyse(
    e: &Entry,
    sec: &LfunConfig,
    table: &PrimeTable,
    specs: &[ShiftSpec],
) -> Result<ModulusResult, CliError> {
    let m = &e.modulus;
    let fam = e.family.as_ref().expect("lfun loads families");
    let q = m.q();
    let d = m.degree();
    let modulus = m.poly().to_string();

    let mut lpolys = Vec::with_capacity(fam.len());
    let mut root_gaps = Vec::with_capacity(fam.len());
    for l in fam.lpolys() {
        let radii: Vec<String> = l
            .inverse_roots()
            .iter()
            .map(|a| fmt_f64(a.norm()))
            .collect();
        lpolys.push(LpolyRow {
            q,
            modulus: modulus.clone(),
            char_index: l.char_index(),
            degree: l.degree(),
            coeffs: l
                .coeffs()
                .iter()
                .map(|c| format!("{},{}", fmt_f64(c.re), fmt_f64(c.im)))
                .collect::<Vec<_>>()
                .join(";"),
            root_radii: radii.join(";"),
        });
        root_gaps.push((l.char_index(), root_gap(l)));
    }

    let mut max_probe: f64 = 0.0;
    for n in d..=d + sec.probe_degrees {
        let counts = residue_class_counts(m, n)?;
        for chi in fam.characters() {
            max_probe = max_probe.max(l_coefficient_from_counts(chi, &counts).norm());
        }
    }

    let mut max_conj: f64 = 0.0;
    for (chi, l) in fam.characters().iter().zip(fam.lpolys()) {
        let pos = fam
            .position(chi.conjugate().index())
            .expect("conjugate is primitive");
        let lc = &fam.lpolys()[pos];
        let n = l.coeffs().len().max(lc.coeffs().len());
        for k in 0..n {
            let a = l.coeffs().get(k).copied().unwrap_or_default();
            let b = lc.coeffs().get(k).copied().unwrap_or_default();
            max_conj = max_conj.max((a.conj() - b).norm());
        }
    }

    let period = TAU / (q as f64).ln();
    let ts: Vec<f64> = (0..sec.t_points)
        .map(|k| period * k as f64 / sec.t_points as f64)
        .collect();
    let mut excess = f64::NEG_INFINITY;
    let mut evaluations = 0;
    let mut simplified = Vec::new();
    let mut shifted = Vec::new();
    let mut crude = Vec::new();
    for (chi, l) in fam.characters().iter().zip(fam.lpolys()) {
        let data = PrimeCoefficients::new(chi, table)?;
        for &t in &ts {
            let lhs = l.log_abs_at(t);
            crude.push(crude_constant(l, m, t));
            for h in 1..d {
                let b = log_l_bound_pointwise(chi, &data, t, h)?;
                excess = excess.max(lhs - b);
                evaluations += 1;
            }
            if sec.defects {
                for h in 1..=d {
                    simplified.push(lhs - log_l_bound_simplified(chi, &data, t, h)?);
                }
            }
        }
        if sec.defects {
            for s in specs {
                shifted.push(shifted_log_value(l, s) - shifted_log_bound(chi, &data, s, d)?);
            }
        }
    }

    let worked_example = (q == 3 && modulus == "T^2").then(|| worked_gap(fam));
    Ok(ModulusResult {
        lpolys,
        root_gaps,
        bounds: BoundRow {
            q,
            modulus,
            degree: d,
            n_primitive: fam.len(),
            max_probe_coeff: max_probe,
            max_conjugation_gap: max_conj,
            pointwise_evaluations: evaluations,
            max_pointwise_excess: if evaluations == 0 { 0.0 } else { excess },
            max_simplified_defect: finite_max(simplified),
            max_shifted_defect: finite_max(shifted),
            max_crude_constant: finite_max(crude),
            low_degree: m.is_low_degree(),
        },
        worked_example,
    })
}

/// Largest coefficient distance from the hand-derived multiset for `Q = T^2` over `F_3`.
fn worked_gap(fam: &PrimitiveFamily) -> f64 {
    let s3 = 3f64.sqrt();
    let mut want = vec![
        Complex64::new(0.0, s3),
        Complex64::new(0.0, -s3),
        Complex64::new(-1.0, 0.0),
        Complex64::new(-1.0, 0.0),
    ];
    if fam.len() != want.len() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for l in fam.lpolys() {
        if l.coeffs().len() != 2 {
            return f64::INFINITY;
        }
        worst = worst.max((l.coeffs()[0] - Complex64::new(1.0, 0.0)).norm());
        let c1 = l.coeffs()[1];
        let (i, gap) = want
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (c1 - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        want.swap_remove(i);
        worst = worst.max(gap);
    }
    worst
}
