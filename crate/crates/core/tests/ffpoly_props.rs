use ffmoments::ffpoly::{
    enumerate_irreducible, enumerate_monic, prime_count_exact, FieldSpec, FqPoly,
};
use proptest::prelude::*;

fn poly_strategy(q: u32, max_len: usize) -> impl Strategy<Value = FqPoly> {
    prop::collection::vec(0..q, 0..max_len)
        .prop_map(move |c| FqPoly::new(FieldSpec::new(q).unwrap(), c))
}

fn triple() -> impl Strategy<Value = (FqPoly, FqPoly, FqPoly)> {
    prop::sample::select(vec![2u32, 3, 5, 7]).prop_flat_map(|q| {
        (
            poly_strategy(q, 8),
            poly_strategy(q, 8),
            poly_strategy(q, 8),
        )
    })
}

proptest! {
    #[test]
    fn ring_axioms((a, b, c) in triple()) {
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert!(a.sub(&a).unwrap().is_zero());
        if let (Some(da), Some(db)) = (a.degree(), b.degree()) {
            prop_assert_eq!(a.mul(&b).unwrap().degree(), Some(da + db));
        }
    }

    #[test]
    fn divmod_reconstructs((a, b, _) in triple()) {
        prop_assume!(!b.is_zero());
        let (quo, rem) = a.divmod(&b).unwrap();
        prop_assert_eq!(b.mul(&quo).unwrap().add(&rem).unwrap(), a);
        if let Some(dr) = rem.degree() {
            prop_assert!(dr < b.degree().unwrap());
        }
    }

    #[test]
    fn gcd_divides_both((a, b, _) in triple()) {
        prop_assume!(!(a.is_zero() && b.is_zero()));
        let g = a.gcd(&b).unwrap();
        prop_assert!(g.is_monic());
        prop_assert!(a.rem(&g).unwrap().is_zero());
        prop_assert!(b.rem(&g).unwrap().is_zero());
    }

    #[test]
    fn text_round_trip((a, _, _) in triple()) {
        let s = a.to_string();
        prop_assert_eq!(FqPoly::parse(a.field(), &s).unwrap(), a);
    }
}

/// Reducible iff some monic divisor of degree in `1..=d/2` divides it.
fn reducible_by_trial(f: &FqPoly) -> bool {
    let d = f.degree().unwrap();
    (1..=d / 2).any(|k| {
        enumerate_monic(f.field(), k)
            .unwrap()
            .iter()
            .any(|g| f.rem(g).unwrap().is_zero())
    })
}

#[test]
fn irreducibility_matches_trial_division() {
    for q in [2u32, 3, 5, 7] {
        let field = FieldSpec::new(q).unwrap();
        let mut d = 1;
        while (q as u64).pow(d as u32) <= 10_000 {
            for f in enumerate_monic(field, d).unwrap() {
                assert_eq!(
                    f.is_irreducible().unwrap(),
                    !reducible_by_trial(&f),
                    "q={q} f={f}"
                );
            }
            d += 1;
        }
    }
}

#[test]
fn prime_counts_match_enumeration_and_error_shape() {
    for q in [2u32, 3, 5] {
        let field = FieldSpec::new(q).unwrap();
        let mut n = 1;
        while (q as u64).pow(n as u32) <= 100_000 {
            let exact = prime_count_exact(field, n).unwrap();
            assert_eq!(enumerate_irreducible(field, n).unwrap().len() as u64, exact);
            let main = (q as f64).powi(n as i32) / n as f64;
            let err = 3.0 * (q as f64).powf(n as f64 / 2.0) / n as f64;
            assert!((exact as f64 - main).abs() <= err, "q={q} n={n}");
            n += 1;
        }
    }
}

#[test]
fn enumeration_order_is_lexicographic() {
    let f2 = FieldSpec::new(2).unwrap();
    let got: Vec<String> = enumerate_monic(f2, 2)
        .unwrap()
        .iter()
        .map(|f| f.to_string())
        .collect();
    assert_eq!(got, ["T^2", "T^2 + 1", "T^2 + T", "T^2 + T + 1"]);
    let got: Vec<String> = enumerate_irreducible(f2, 3)
        .unwrap()
        .iter()
        .map(|f| f.to_string())
        .collect();
    assert_eq!(got, ["T^3 + T + 1", "T^3 + T^2 + 1"]);
}
