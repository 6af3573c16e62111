use std::sync::Arc;

use ffmoments::chargroup::{
    all_characters, monic_moduli, unit_group, DirichletChar, Modulus, UnitGroup,
};
use ffmoments::ffpoly::{mobius, FieldSpec, FqPoly, MonicIter};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<Arc<UnitGroup>> {
    let mut out = Vec::new();
    for (q, dmax) in [(2u32, 5usize), (3, 4), (5, 3)] {
        let field = FieldSpec::new(q).unwrap();
        for d in 2..=dmax {
            for m in monic_moduli(field, d).unwrap() {
                out.push(Arc::new(unit_group(&m).unwrap()));
            }
        }
    }
    out
}

/// All monic divisors of `Q`, from the factorization.
fn monic_divisors(m: &Modulus) -> Vec<(FqPoly, i64)> {
    let field = m.field();
    let mut divs = vec![(FqPoly::one(field), 1i64)];
    for (p, e) in m.factors() {
        let mut next = Vec::new();
        for (d, mu) in &divs {
            let mut pk = FqPoly::one(field);
            for k in 0..=*e {
                let sign = match k {
                    0 => *mu,
                    1 => -*mu,
                    _ => 0,
                };
                next.push((d.mul(&pk).unwrap(), sign));
                pk = pk.mul(p).unwrap();
            }
        }
        divs = next;
    }
    divs
}

/// Primitive count by Moebius inversion over divisors: `sum_{D | Q} mu(Q/D) phi(D)`.
fn primitive_count_by_inversion(m: &Modulus) -> i64 {
    let q = m.q() as i64;
    let phi = |f: &FqPoly| -> i64 {
        // phi(D) by counting coprime residues directly
        let d = f.degree().unwrap();
        if d == 0 {
            return 1;
        }
        let mut count = 0;
        for i in 0..q.pow(d as u32) {
            let g = FqPoly::from_index(m.field(), i as u64);
            if !g.is_zero() && g.gcd(f).unwrap().is_one() {
                count += 1;
            }
        }
        count
    };
    monic_divisors(m)
        .iter()
        .map(|(d, _)| {
            let (cofactor, _) = m.poly().divmod(d).unwrap();
            let mu = monic_divisors(m)
                .into_iter()
                .find(|(x, _)| *x == cofactor)
                .map(|(_, s)| s)
                .unwrap();
            mu * phi(d)
        })
        .sum()
}

#[test]
fn unit_count_matches_totient() {
    for g in families() {
        let m = g.modulus();
        let units = (0..m.size() as usize)
            .filter(|&i| g.is_unit_index(i))
            .count() as u64;
        assert_eq!(units, m.phi(), "{}", m.poly());
        assert_eq!(g.order(), m.phi());
    }
}

#[test]
fn orthogonality() {
    for g in families() {
        let n = g.modulus().size() as usize;
        for chi in all_characters(&g) {
            let s: Complex64 = (0..n).map(|r| chi.eval_index(r)).sum();
            if chi.is_principal() {
                assert!((s.re - g.order() as f64).abs() < 1e-9);
            } else {
                assert!(
                    s.norm() < 1e-9,
                    "{} chi#{}",
                    g.modulus().poly(),
                    chi.index()
                );
            }
        }
    }
}

#[test]
fn primitive_counts_by_inclusion_exclusion() {
    for g in families() {
        let m = g.modulus();
        let flagged = all_characters(&g)
            .iter()
            .filter(|c| c.is_primitive())
            .count() as i64;
        assert_eq!(flagged, primitive_count_by_inversion(m), "{}", m.poly());
        assert_eq!(flagged as u64, m.primitive_count_formula());
    }
}

#[test]
fn multiplicativity_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for g in families() {
        let m = g.modulus();
        let field = m.field();
        let chars = all_characters(&g);
        let units: Vec<usize> = (0..m.size() as usize)
            .filter(|&i| g.is_unit_index(i))
            .collect();
        for _ in 0..1000 {
            let chi = &chars[rng.gen_range(0..chars.len())];
            // random coprime polynomials of degree up to d(Q) + 2
            let mut pick = || loop {
                let deg = rng.gen_range(0..m.degree() + 3);
                let coeffs: Vec<u32> = (0..=deg).map(|_| rng.gen_range(0..m.q())).collect();
                let f = FqPoly::new(field, coeffs);
                if !f.is_zero() && g.is_unit_index(m.residue_index(&f).unwrap()) {
                    return f;
                }
            };
            let (f, h) = (pick(), pick());
            let lhs = chi.eval(&f.mul(&h).unwrap()).unwrap();
            let rhs = chi.eval(&f).unwrap() * chi.eval(&h).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
            assert!((lhs.norm() - 1.0).abs() < 1e-12);
        }
        let r = units[rng.gen_range(0..units.len())];
        assert!((chars[0].eval_index(r) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn non_units_vanish() {
    for g in families() {
        let m = g.modulus();
        for chi in all_characters(&g) {
            for (p, _) in m.factors() {
                assert_eq!(chi.eval(p).unwrap(), Complex64::new(0.0, 0.0));
            }
        }
    }
}

#[test]
fn conjugate_closure() {
    for g in families() {
        for chi in all_characters(&g) {
            let c = chi.conjugate();
            let fresh = DirichletChar::from_index(g.clone(), c.index()).unwrap();
            assert_eq!(fresh.is_primitive(), chi.is_primitive());
            assert_eq!(c.conjugate().index(), chi.index());
            for r in 0..g.modulus().size() as usize {
                assert!((c.eval_index(r) - chi.eval_index(r).conj()).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn character_indices_are_stable() {
    // Characters are listed in lexicographic exponent order.
    for g in families().into_iter().take(30) {
        let chars = all_characters(&g);
        for (i, c) in chars.iter().enumerate() {
            assert_eq!(c.index(), i);
        }
        for w in chars.windows(2) {
            assert!(w[0].exponents() < w[1].exponents());
        }
    }
}

#[test]
fn mobius_values() {
    let got: Vec<i64> = (1..=10).map(mobius).collect();
    assert_eq!(got, [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    assert_eq!(
        MonicIter::new(FieldSpec::new(3).unwrap(), 2).unwrap().len(),
        9
    );
}
