use std::f64::consts::TAU;

use ffmoments::ffpoly::{enumerate_irreducible, FieldSpec};
use ffmoments::primesums::{
    cosine_grid, f_sum, fit_mertens_constant, logp_sum, mertens_cos_sum, prime_density,
    prime_power_tail, recip_sum, PrimeTable,
};
use proptest::prelude::*;

/// Sums over the individual enumerated primes rather than per-degree counts.
#[test]
fn sums_match_prime_by_prime_enumeration() {
    for (q, hmax) in [(2u32, 10usize), (3, 7), (5, 5)] {
        let field = FieldSpec::new(q).unwrap();
        let table = PrimeTable::counts_only(field, hmax).unwrap();
        let ln_q = (q as f64).ln();
        let mut logp = 0.0;
        let mut recip = 0.0;
        let mut cosine = 0.0;
        let alpha = 0.37;
        for h in 1..=hmax {
            for p in enumerate_irreducible(field, h).unwrap() {
                let norm = p.norm();
                logp += norm.ln() / norm;
                recip += 1.0 / norm;
                cosine += (alpha * norm.ln()).cos() / norm;
            }
            assert!((logp_sum(&table, h).unwrap().value - logp).abs() < 1e-12);
            assert!((recip_sum(&table, h).unwrap() - recip).abs() < 1e-12);
            assert!((mertens_cos_sum(&table, h, alpha).unwrap() - cosine).abs() < 1e-12);
            assert!((logp_sum(&table, h).unwrap().estimate - h as f64 * ln_q).abs() < 1e-12);
        }
    }
}

#[test]
fn logp_defect_bounded() {
    for q in [2u32, 3, 5] {
        let table = PrimeTable::counts_only(FieldSpec::new(q).unwrap(), 12).unwrap();
        for h in 0..=12 {
            assert!(logp_sum(&table, h).unwrap().defect.abs() <= 2.0);
        }
    }
}

#[test]
fn reversed_summation_agrees() {
    for q in [2u32, 3, 5] {
        let table = PrimeTable::counts_only(FieldSpec::new(q).unwrap(), 12).unwrap();
        let ln_q = (q as f64).ln();
        let terms: Vec<f64> = (1..=12)
            .map(|n| table.count(n) as f64 * n as f64 * ln_q / (q as f64).powi(n as i32))
            .collect();
        let rev: f64 = terms.iter().rev().sum();
        assert!((logp_sum(&table, 12).unwrap().value - rev).abs() < 1e-12);
        let rev: f64 = (1..=12)
            .rev()
            .map(|n| prime_density(table.field(), n))
            .sum();
        assert!((recip_sum(&table, 12).unwrap() - rev).abs() < 1e-12);
    }
    let fwd = f_sum(500, 0.3).unwrap();
    let rev: f64 = (1..=500)
        .rev()
        .map(|n| (n as f64 * 0.3).cos() / n as f64)
        .sum();
    assert!((fwd - rev).abs() < 1e-12);
}

proptest! {
    #[test]
    fn f_sum_telescopes(h in 2usize..2000, theta in -10.0f64..10.0) {
        let diff = f_sum(h, theta).unwrap() - f_sum(h - 1, theta).unwrap();
        prop_assert!((diff - (h as f64 * theta).cos() / h as f64).abs() < 1e-12);
    }
}

#[test]
fn mertens_fit_residuals_bounded() {
    for q in [2u32, 3, 5] {
        let table = PrimeTable::counts_only(FieldSpec::new(q).unwrap(), 12).unwrap();
        let hs: Vec<usize> = (1..=12).collect();
        let fit = fit_mertens_constant(&table, &hs).unwrap();
        assert!(fit.b.is_finite() && fit.c.is_finite());
        for (_, r) in fit.scaled_residuals {
            assert!(r.abs() < 1.0);
        }
    }
}

#[test]
fn tail_bounded_with_small_remainder() {
    for q in [2u32, 3, 5] {
        let table = PrimeTable::counts_only(FieldSpec::new(q).unwrap(), 10).unwrap();
        for h in 1..=10 {
            let r = prime_power_tail(&table, h).unwrap();
            assert!(r.value > 0.0 && r.value < 2.0);
            assert!(r.remainder_bound < 0.01 * r.value);
        }
    }
}

#[test]
fn grid_defects_finite() {
    let table = PrimeTable::counts_only(FieldSpec::new(3).unwrap(), 12).unwrap();
    let hs: Vec<usize> = (2..=12).collect();
    let rows = cosine_grid(&table, &hs, 64).unwrap();
    assert_eq!(rows.len(), 11 * 64);
    let period = TAU / 3f64.ln();
    for r in rows {
        assert!(r.defect_zeta.is_finite() && r.defect_min.is_finite());
        assert!(r.alpha >= 0.0 && r.alpha < period);
        assert!(r.defect_zeta.abs() < 3.0 && r.defect_min.abs() < 3.0);
    }
}
