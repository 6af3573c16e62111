//! Exact finite prime sums over `F_q[T]` and their comparison estimates.
//!
//! Every sum over `|P| <= x` with `x = q^h` is a sum over degrees `n <= h`
//! weighted by the prime count `pi(n)`, so the values below are exact up to
//! floating-point rounding.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::Error;
use crate::ffpoly::{enumerate_irreducible, mobius, prime_count_exact, FieldSpec, FqPoly};
use crate::moments::theta_bar;

/// Monic irreducibles and their counts by degree.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    field: FieldSpec,
    max_degree: usize,
    counts: Vec<u64>,
    per_degree: Vec<Vec<FqPoly>>,
}

impl PrimeTable {
    /// Enumerates every monic irreducible of degree `<= max_degree`.
    pub fn new(field: FieldSpec, max_degree: usize) -> Result<Self, Error> {
        let mut counts = vec![0u64];
        let mut per_degree = vec![Vec::new()];
        for n in 1..=max_degree {
            let primes = enumerate_irreducible(field, n)?;
            counts.push(primes.len() as u64);
            per_degree.push(primes);
        }
        Ok(Self {
            field,
            max_degree,
            counts,
            per_degree,
        })
    }

    /// Counts only, from the necklace formula; no enumeration.
    pub fn counts_only(field: FieldSpec, max_degree: usize) -> Result<Self, Error> {
        let mut counts = vec![0u64];
        for n in 1..=max_degree {
            counts.push(prime_count_exact(field, n)?);
        }
        Ok(Self {
            field,
            max_degree,
            counts,
            per_degree: Vec::new(),
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `pi(n)`.
    pub fn count(&self, n: usize) -> u64 {
        self.counts[n]
    }

    /// Monic irreducibles of degree `n` (empty for a counts-only table).
    pub fn primes(&self, n: usize) -> &[FqPoly] {
        self.per_degree.get(n).map_or(&[], Vec::as_slice)
    }

    /// Every enumerated prime with degree `<= n`, by degree then enumeration order.
    pub fn primes_up_to(&self, n: usize) -> impl Iterator<Item = &FqPoly> {
        self.per_degree.iter().take(n + 1).flatten()
    }

    fn check(&self, h: usize) -> Result<(), Error> {
        if h > self.max_degree {
            return Err(Error::InvalidArgument(format!(
                "cutoff degree {h} exceeds the table's {}",
                self.max_degree
            )));
        }
        Ok(())
    }

    fn ln_q(&self) -> f64 {
        (self.field.q() as f64).ln()
    }

    /// `pi(n) / q^n`.
    fn density(&self, n: usize) -> f64 {
        if n <= self.max_degree {
            self.counts[n] as f64 / (self.field.q() as f64).powi(n as i32)
        } else {
            prime_density(self.field, n)
        }
    }
}

/// `pi(n) / q^n` from the necklace formula in floating point; valid past the
/// range where `q^n` fits an integer.
pub fn prime_density(field: FieldSpec, n: usize) -> f64 {
    let ln_q = (field.q() as f64).ln();
    let mut total = 0.0;
    for d in 1..=n {
        if n.is_multiple_of(d) {
            let mu = mobius(d as u64);
            if mu != 0 {
                total += mu as f64 * ((n / d) as f64 * ln_q - n as f64 * ln_q).exp();
            }
        }
    }
    total / n as f64
}

/// Returns `h` when `x = q^h` exactly.
pub fn power_of_q(field: FieldSpec, x: u64) -> Result<u32, Error> {
    let q = field.q() as u64;
    let mut h = 0u32;
    let mut y = 1u64;
    while y < x {
        y = y
            .checked_mul(q)
            .ok_or(Error::InvalidArgument(format!("{x} is not a power of {q}")))?;
        h += 1;
    }
    if y != x {
        return Err(Error::InvalidArgument(format!("{x} is not a power of {q}")));
    }
    Ok(h)
}

/// A finite sum together with the estimate it is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumComparison {
    pub value: f64,
    pub estimate: f64,
    /// `value - estimate`.
    pub defect: f64,
}

/// `sum_{|P| <= q^h} log|P| / |P|` against `log x`.
pub fn logp_sum(table: &PrimeTable, h: usize) -> Result<SumComparison, Error> {
    table.check(h)?;
    let ln_q = table.ln_q();
    let value = (1..=h)
        .map(|n| table.density(n) * n as f64 * ln_q)
        .sum::<f64>();
    let estimate = h as f64 * ln_q;
    Ok(SumComparison {
        value,
        estimate,
        defect: value - estimate,
    })
}

/// `sum_{|P| <= q^h} 1/|P|`.
pub fn recip_sum(table: &PrimeTable, h: usize) -> Result<f64, Error> {
    table.check(h)?;
    if h == 0 {
        return Err(Error::InvalidArgument("reciprocal sum needs h >= 1".into()));
    }
    Ok((1..=h).map(|n| table.density(n)).sum())
}

/// Least-squares fit of `recip_sum(h) - log log x = b + c / log x` over a
/// range of `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct MertensFit {
    pub b: f64,
    pub c: f64,
    /// `(h, (recip_sum - log log x - b) * log x)` per fitted `h`.
    pub scaled_residuals: Vec<(usize, f64)>,
}

pub fn fit_mertens_constant(table: &PrimeTable, hs: &[usize]) -> Result<MertensFit, Error> {
    if hs.len() < 2 {
        return Err(Error::InvalidArgument(
            "fit needs at least two cutoffs".into(),
        ));
    }
    let ln_q = table.ln_q();
    let mut pts = Vec::with_capacity(hs.len());
    for &h in hs {
        let log_x = h as f64 * ln_q;
        pts.push((h, log_x, recip_sum(table, h)? - log_x.ln()));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| 1.0 / p.1).sum();
    let sy: f64 = pts.iter().map(|p| p.2).sum();
    let sxx: f64 = pts.iter().map(|p| 1.0 / (p.1 * p.1)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 / p.1).sum();
    let c = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let b = (sy - c * sx) / n;
    let scaled_residuals = pts
        .iter()
        .map(|&(h, log_x, y)| (h, (y - b) * log_x))
        .collect();
    Ok(MertensFit {
        b,
        c,
        scaled_residuals,
    })
}

/// `sum_{|P| <= q^h} cos(alpha log|P|) / |P|`.
pub fn mertens_cos_sum(table: &PrimeTable, h: usize, alpha: f64) -> Result<f64, Error> {
    table.check(h)?;
    let ln_q = table.ln_q();
    Ok((1..=h)
        .map(|n| (alpha * n as f64 * ln_q).cos() * table.density(n))
        .sum())
}

/// `F(h, theta) = sum_{n=1}^h cos(n theta) / n`.
pub fn f_sum(h: usize, theta: f64) -> Result<f64, Error> {
    if h < 1 {
        return Err(Error::InvalidArgument("F(h, theta) needs h >= 1".into()));
    }
    Ok((1..=h).map(|n| (n as f64 * theta).cos() / n as f64).sum())
}

/// `log min(h, 1 / theta_bar(theta))`, the comparison for [`f_sum`].
pub fn f_sum_estimate(h: usize, theta: f64) -> f64 {
    let tb = theta_bar(theta);
    let hf = h as f64;
    if tb == 0.0 {
        hf.ln()
    } else {
        hf.min(1.0 / tb).ln()
    }
}

/// `log |zeta_A(1 + 1/log x + i alpha)|` with `x = q^h`, via the closed form.
pub fn zeta_log_estimate(field: FieldSpec, h: usize, alpha: f64) -> Result<f64, Error> {
    if h == 0 {
        return Err(Error::ZetaPole);
    }
    let ln_q = (field.q() as f64).ln();
    // q^{1-s} = e^{-1/h} e^{-i alpha log q}
    let w = Complex64::from_polar((-1.0 / h as f64).exp(), -alpha * ln_q);
    let denom = (Complex64::new(1.0, 0.0) - w).norm();
    if denom == 0.0 {
        return Err(Error::ZetaPole);
    }
    Ok(-denom.ln())
}

/// `log min(log x, 1 / theta_bar(alpha log q))` with `x = q^h`; a zero
/// `theta_bar` resolves to `log log x`.
pub fn log_min_estimate(field: FieldSpec, h: usize, alpha: f64) -> f64 {
    let ln_q = (field.q() as f64).ln();
    let log_x = h as f64 * ln_q;
    let tb = theta_bar(alpha * ln_q);
    if tb == 0.0 {
        log_x.ln()
    } else {
        log_x.min(1.0 / tb).ln()
    }
}

/// The prime-power tail quantity
/// `sum_{|P|<=x} (1/|P| - 1/|P|^{1+1/log x}) + sum_{|P|>x} 1/|P|^{1+1/log x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailReport {
    pub value: f64,
    pub truncation_degree: usize,
    /// Upper bound on the omitted terms of degree above the truncation.
    pub remainder_bound: f64,
}

/// Tail truncated at degree `4h`, plus the geometric remainder bound.
pub fn prime_power_tail(table: &PrimeTable, h: usize) -> Result<TailReport, Error> {
    table.check(h)?;
    if h == 0 {
        return Err(Error::InvalidArgument("tail needs h >= 1".into()));
    }
    let hf = h as f64;
    let damp = |n: usize| (-(n as f64) / hf).exp();
    let head: f64 = (1..=h).map(|n| table.density(n) * (1.0 - damp(n))).sum();
    let truncation_degree = 4 * h;
    let tail: f64 = (h + 1..=truncation_degree)
        .map(|n| table.density(n) * damp(n))
        .sum();
    Ok(TailReport {
        value: head + tail,
        truncation_degree,
        remainder_bound: tail_remainder_bound(h, truncation_degree),
    })
}

/// Bound on `sum_{n > N} pi(n) q^{-n} e^{-n/h}` using `pi(n) <= q^n / n`.
pub fn tail_remainder_bound(h: usize, truncation_degree: usize) -> f64 {
    let hf = h as f64;
    let n1 = (truncation_degree + 1) as f64;
    (-n1 / hf).exp() / (n1 * (1.0 - (-1.0 / hf).exp()))
}

/// One `(q, h, alpha)` cell of the cosine-sum grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineGridRow {
    pub q: u32,
    pub h: usize,
    pub alpha: f64,
    pub sum: f64,
    /// `log |zeta_A(1 + 1/log x + i alpha)|`.
    pub estimate_zeta: f64,
    /// `log min(log x, 1 / theta_bar(alpha log q))`.
    pub estimate_min: f64,
    pub defect_zeta: f64,
    pub defect_min: f64,
}

/// The alpha grid: `points` equally spaced values over one period `[0, 2 pi / log q)`.
pub fn alpha_grid(field: FieldSpec, points: usize) -> Vec<f64> {
    let period = TAU / (field.q() as f64).ln();
    (0..points)
        .map(|k| period * k as f64 / points as f64)
        .collect()
}

pub fn cosine_grid(
    table: &PrimeTable,
    hs: &[usize],
    alpha_points: usize,
) -> Result<Vec<CosineGridRow>, Error> {
    let field = table.field();
    let alphas = alpha_grid(field, alpha_points);
    let mut rows = Vec::with_capacity(hs.len() * alphas.len());
    for &h in hs {
        for &alpha in &alphas {
            let sum = mertens_cos_sum(table, h, alpha)?;
            let estimate_zeta = zeta_log_estimate(field, h, alpha)?;
            let estimate_min = log_min_estimate(field, h, alpha);
            rows.push(CosineGridRow {
                q: field.q(),
                h,
                alpha,
                sum,
                estimate_zeta,
                estimate_min,
                defect_zeta: sum - estimate_zeta,
                defect_min: sum - estimate_min,
            });
        }
    }
    Ok(rows)
}
