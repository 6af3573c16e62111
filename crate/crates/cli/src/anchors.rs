//! Registry of the anchor names attached to report rows. A row whose anchor
//! is missing here is an orphaned check.

pub const ANCHORS: &[(&str, &str)] = &[
    (
        "prime-count-exact",
        "pi(n) from the necklace formula equals the enumerated count",
    ),
    ("prime-count-error", "|pi(n) - q^n/n| <= 3 q^{n/2}/n"),
    (
        "unit-group-order",
        "unit-group basis covers exactly phi(Q) units",
    ),
    (
        "primitive-count",
        "primitive characters counted by flags equal the prime-power formula",
    ),
    (
        "character-orthogonality",
        "non-principal characters sum to zero over residues",
    ),
    (
        "l-degree-bound",
        "L-coefficients vanish from degree d(Q) on",
    ),
    (
        "weil-root-circles",
        "inverse roots lie on |alpha| = 1 or sqrt q",
    ),
    (
        "conjugation-symmetry",
        "L(u, conj chi) has the conjugate coefficients",
    ),
    (
        "pointwise-log-bound",
        "log|L(1/2+it)| below the explicit prime-power bound",
    ),
    (
        "simplified-log-bound",
        "defect against the simplified prime-sum bound",
    ),
    (
        "shifted-log-bound",
        "defect against the h(f)-weighted bound",
    ),
    ("crude-single-bound", "log|L| * loglog|Q| / log|Q| constant"),
    ("worked-example", "hand-derived values for q = 3, Q = T^2"),
    ("log-weighted-prime-sum", "sum log|P|/|P| against log x"),
    ("reciprocal-prime-sum", "sum 1/|P| against loglog x + b"),
    (
        "cosine-prime-sum",
        "cosine-twisted reciprocal sum against both estimates",
    ),
    (
        "harmonic-cosine-sum",
        "F(h, theta) against log min(h, 1/theta_bar)",
    ),
    ("prime-power-tail", "tail of prime reciprocals around x"),
    (
        "shifted-moment-bound",
        "shifted moment against the zeta and min forms",
    ),
    ("crude-moment-bound", "log(moment/phi) / loglog|Q| constant"),
    (
        "charsum-moment-bound",
        "S_m(Q, Y) against phi Y^m (log|Q|)^{(m-1)^2}",
    ),
    (
        "perron-identity",
        "contour extraction equals the direct partial sum",
    ),
    (
        "integral-moment-bound",
        "circle L1 moment against phi (log|Q|)^{(m-1)^2}",
    ),
];

pub fn is_registered(anchor: &str) -> bool {
    ANCHORS.iter().any(|(a, _)| *a == anchor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_unique() {
        let mut names: Vec<&str> = ANCHORS.iter().map(|a| a.0).collect();
        names.sort_unstable();
        let n = names.len();
        names.dedup();
        assert_eq!(names.len(), n);
    }
}
