//! Prime tables, modulus factorizations and unit-group summaries.

use ffmoments::chargroup::all_characters;
use ffmoments::ffpoly::{enumerate_irreducible, prime_count_exact};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::field;
use crate::error::CliError;
use crate::report::{write_csv, Checks, Status};
use crate::Context;

const CMD: &str = "enumerate";
/// Orthogonality is checked on at most this many characters per modulus.
const ORTHOGONALITY_SAMPLE: usize = 64;

#[derive(Debug, Serialize)]
struct PrimeRow {
    q: u32,
    n: usize,
    pi_exact: u64,
    pi_enumerated: u64,
    main_term: f64,
    error: f64,
    error_bound: f64,
}

#[derive(Debug, Serialize)]
struct ModulusRow {
    q: u32,
    modulus: String,
    degree: usize,
    factorization: String,
    phi: u64,
    orders: String,
    generators: String,
    n_primitive: usize,
    low_degree: bool,
}

pub fn run(ctx: &mut Context) -> Result<Checks, CliError> {
    let sec = ctx
        .cfg
        .enumerate
        .clone()
        .ok_or_else(|| CliError::Config("config has no enumerate section".into()))?;
    let mut checks = Checks::default();

    let mut tasks = Vec::new();
    for &q in &sec.fields {
        let f = field(q)?;
        let mut n = 1;
        while (q as u64)
            .checked_pow(n as u32)
            .is_some_and(|x| x <= sec.prime_count_limit)
        {
            tasks.push((f, n));
            n += 1;
        }
    }
    let primes: Vec<PrimeRow> = ctx.pool.install(|| {
        tasks
            .par_iter()
            .map(|&(f, n)| -> Result<PrimeRow, CliError> {
                let exact = prime_count_exact(f, n).map_err(ffmoments::Error::from)?;
                let listed = enumerate_irreducible(f, n)
                    .map_err(ffmoments::Error::from)?
                    .len() as u64;
                let qf = f.q() as f64;
                let main = qf.powi(n as i32) / n as f64;
                Ok(PrimeRow {
                    q: f.q(),
                    n,
                    pi_exact: exact,
                    pi_enumerated: listed,
                    main_term: main,
                    error: exact as f64 - main,
                    error_bound: 3.0 * qf.powf(n as f64 / 2.0) / n as f64,
                })
            })
            .collect::<Result<_, _>>()
    })?;
    for r in &primes {
        let subject = format!("q={} n={}", r.q, r.n);
        checks.push(
            CMD,
            "prime count matches enumeration",
            "prime-count-exact",
            subject.clone(),
            r.pi_enumerated as f64,
            Some(r.pi_exact as f64),
            Status::from_bool(r.pi_exact == r.pi_enumerated),
            "",
        );
        checks.push(
            CMD,
            "prime count error term",
            "prime-count-error",
            subject,
            r.error.abs(),
            Some(r.error_bound),
            Status::from_bool(r.error.abs() <= r.error_bound),
            "",
        );
    }
    write_csv(&ctx.out_path("primes.csv"), &primes)?;

    let entries = ctx.entries(false)?;
    let per_modulus: Vec<(ModulusRow, f64, usize, f64)> = ctx.pool.install(|| {
        entries
            .par_iter()
            .map(|e| {
                let g = &e.group;
                let m = &e.modulus;
                let units = (0..m.size() as usize)
                    .filter(|&i| g.is_unit_index(i))
                    .count();
                let chars = all_characters(g);
                let n_primitive = chars.iter().filter(|c| c.is_primitive()).count();
                let orth = chars
                    .iter()
                    .filter(|c| !c.is_principal())
                    .take(ORTHOGONALITY_SAMPLE)
                    .map(|c| {
                        (0..m.size() as usize)
                            .map(|r| c.eval_index(r))
                            .sum::<Complex64>()
                            .norm()
                    })
                    .fold(0.0, f64::max);
                let factorization = m
                    .factors()
                    .iter()
                    .map(|(p, e)| format!("({p})^{e}"))
                    .collect::<Vec<_>>()
                    .join(" * ");
                let row = ModulusRow {
                    q: m.q(),
                    modulus: m.poly().to_string(),
                    degree: m.degree(),
                    factorization,
                    phi: m.phi(),
                    orders: format!("{:?}", g.orders()),
                    generators: g
                        .generators()
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join("; "),
                    n_primitive,
                    low_degree: m.is_low_degree(),
                };
                (row, units as f64, n_primitive, orth)
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(per_modulus.len());
    for ((row, units, n_primitive, orth), e) in per_modulus.into_iter().zip(&entries) {
        let subject = format!("q={} Q={}", row.q, row.modulus);
        checks.push(
            CMD,
            "unit count equals phi",
            "unit-group-order",
            subject.clone(),
            units,
            Some(row.phi as f64),
            Status::from_bool(units == row.phi as f64),
            "",
        );
        let formula = e.modulus.primitive_count_formula() as f64;
        checks.push(
            CMD,
            "primitive count matches formula",
            "primitive-count",
            subject.clone(),
            n_primitive as f64,
            Some(formula),
            Status::from_bool(n_primitive as f64 == formula),
            "",
        );
        checks.push(
            CMD,
            "character sums over residues vanish",
            "character-orthogonality",
            subject,
            orth,
            Some(1e-9),
            Status::from_bool(orth < 1e-9),
            "",
        );
        rows.push(row);
    }
    write_csv(&ctx.out_path("moduli.csv"), &rows)?;
    Ok(checks)
}
