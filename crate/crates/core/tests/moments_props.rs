use std::f64::consts::TAU;
use std::sync::Arc;

use ffmoments::chargroup::{monic_moduli, unit_group};
use ffmoments::ffpoly::{FieldSpec, MonicIter};
use ffmoments::lfunc::PrimitiveFamily;
use ffmoments::moments::{
    char_sum, char_sum_direct, charsum_moment, circle_l1_norm, circle_l1_norm_trapezoid,
    integral_moment, perron_partial_sum, random_shift_specs, rhs_min, rhs_zeta, shifted_moment,
    ShiftSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn families(q: u32, dmin: usize, dmax: usize) -> Vec<PrimitiveFamily> {
    let field = FieldSpec::new(q).unwrap();
    let mut out = Vec::new();
    for d in dmin..=dmax {
        for m in monic_moduli(field, d).unwrap() {
            let fam = PrimitiveFamily::new(Arc::new(unit_group(&m).unwrap())).unwrap();
            if !fam.is_empty() {
                out.push(fam);
            }
        }
    }
    out
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Moment evaluated from character values over monic `f`, not from L-polynomials.
#[test]
fn shifted_moment_matches_direct_series() {
    let specs = random_shift_specs(3, 4, 4, 99).unwrap();
    for fam in families(3, 2, 3) {
        let field = fam.modulus().field();
        let d = fam.modulus().degree();
        for s in &specs {
            let mut total = 0.0;
            for chi in fam.characters() {
                let mut prod = 1.0;
                for (a, t) in s.pairs() {
                    let sp = Complex64::new(0.5, t);
                    let mut v = Complex64::new(0.0, 0.0);
                    for n in 0..d {
                        for f in MonicIter::new(field, n).unwrap() {
                            v += chi.eval(&f).unwrap() * (-(sp * (3f64.ln() * n as f64))).exp();
                        }
                    }
                    prod *= v.norm().powf(a);
                }
                total += prod;
            }
            assert!(rel_close(shifted_moment(&fam, s).unwrap(), total, 1e-10));
        }
    }
}

#[test]
fn conjugate_pairing_and_periodicity() {
    let specs = random_shift_specs(3, 10, 4, 5).unwrap();
    let period = TAU / 3f64.ln();
    for fam in families(3, 2, 4) {
        let m = fam.modulus();
        for s in &specs {
            let base = shifted_moment(&fam, s).unwrap();
            assert!(rel_close(
                base,
                shifted_moment(&fam, &s.negated()).unwrap(),
                1e-9
            ));
            let moved = s.translated(period);
            assert!(rel_close(base, shifted_moment(&fam, &moved).unwrap(), 1e-9));
            assert!(rel_close(rhs_min(m, s), rhs_min(m, &moved), 1e-9));
            assert!(rel_close(
                rhs_zeta(m, s).unwrap(),
                rhs_zeta(m, &moved).unwrap(),
                1e-9
            ));
            // shifting a single t_j by a period changes nothing either
            let mut t = s.t().to_vec();
            t[0] += 3.0 * period;
            let one = ShiftSpec::new(s.a().to_vec(), t).unwrap();
            assert!(rel_close(base, shifted_moment(&fam, &one).unwrap(), 1e-9));
            assert!(rel_close(rhs_min(m, s), rhs_min(m, &one), 1e-9));
        }
    }
}

#[test]
fn holder_inequality() {
    let specs = random_shift_specs(3, 10, 4, 21).unwrap();
    for fam in families(3, 3, 4) {
        for s in &specs {
            let lhs = shifted_moment(&fam, s).unwrap();
            let k2 = s.len() as f64;
            let mut rhs = 1.0;
            for (a, t) in s.pairs() {
                let pure = ShiftSpec::new(vec![k2 * a / 2.0; 2], vec![t; 2]).unwrap();
                rhs *= shifted_moment(&fam, &pure).unwrap().powf(1.0 / k2);
            }
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}

#[test]
fn perron_matches_direct_partial_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (q, d) in [(2u32, 4usize), (3, 3), (3, 4), (5, 3)] {
        let fams = families(q, d, d);
        for _ in 0..50 {
            let fam = &fams[rng.gen_range(0..fams.len())];
            let i = rng.gen_range(0..fam.len());
            let n = rng.gen_range(0..=d + 1);
            let l = &fam.lpolys()[i];
            let p = perron_partial_sum(l, d, n, 0.5, 64 * (n + d)).unwrap();
            let direct = char_sum_direct(&fam.characters()[i], n).unwrap();
            assert!((p.value - direct).norm() < 1e-8);
            assert!((char_sum(l, n) - direct).norm() < 1e-9);
            assert!(p.aliasing_bound < 1e-8);
        }
    }
}

#[test]
fn charsum_moment_zero_counts_family() {
    for fam in families(3, 2, 3) {
        let s0 = charsum_moment(&fam, 0.0, 2).unwrap();
        assert_eq!(s0.value, fam.len() as f64);
    }
}

#[test]
fn circle_integral_converges() {
    for fam in families(3, 2, 4).into_iter().step_by(7) {
        for l in fam.lpolys() {
            let a = circle_l1_norm(l, 1024);
            let b = circle_l1_norm(l, 2048);
            assert!(
                (a - b).abs() < 1e-8,
                "{} chi#{}",
                fam.modulus().poly(),
                l.char_index()
            );
            let t = circle_l1_norm_trapezoid(l, 1 << 14);
            assert!((a - t).abs() < 1e-5);
        }
        let im = integral_moment(&fam, 2.5, 1024).unwrap();
        assert!(im.value > 0.0 && im.ratio.is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn rhs_forms_positive(
        a in prop::collection::vec(0.5f64..2.0, 4),
        t in prop::collection::vec(0.0f64..6.0, 4),
    ) {
        let field = FieldSpec::new(3).unwrap();
        let m = monic_moduli(field, 3).unwrap().swap_remove(5);
        let s = ShiftSpec::new(a, t).unwrap();
        let z = rhs_zeta(&m, &s).unwrap();
        let mn = rhs_min(&m, &s);
        prop_assert!(z.is_finite() && z > 0.0);
        prop_assert!(mn.is_finite() && mn > 0.0);
    }
}
