//! L-polynomials `L(u, chi) = sum_f chi(f) u^{d(f)}`, their evaluation and
//! inverse roots, the zeta function of `A`, and the explicit upper bounds for
//! `log |L(1/2 + it, chi)|` built from sums over prime powers.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::chargroup::{primitive_characters, unit_root, DirichletChar, Modulus, UnitGroup};
use crate::error::Error;
use crate::ffpoly::{FieldSpec, FqPoly, MonicIter};
use crate::moments::ShiftSpec;
use crate::numeric::pairwise_sum;
use crate::primesums::PrimeTable;

/// Trailing coefficients below this magnitude are treated as zero.
pub const COEFF_TRIM_TOL: f64 = 1e-9;

/// `L(u, chi)` as a dense complex coefficient list `c_0 .. c_D`.
#[derive(Debug, Clone, PartialEq)]
pub struct LPolynomial {
    q: u32,
    char_index: usize,
    coeffs: Vec<Complex64>,
}

impl LPolynomial {
    /// Wraps raw coefficients, trimming negligible trailing terms.
    pub fn from_coeffs(q: u32, char_index: usize, mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() < COEFF_TRIM_TOL) {
            coeffs.pop();
        }
        Self {
            q,
            char_index,
            coeffs,
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Canonical index of the character this polynomial belongs to.
    pub fn char_index(&self) -> usize {
        self.char_index
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, u: Complex64) -> Complex64 {
        l_eval_u(self, u)
    }

    /// `L(1/2 + it, chi)`.
    pub fn eval_at(&self, shift: ShiftPoint) -> Complex64 {
        self.eval(shift.u(self.q))
    }

    /// `log |L(1/2 + it, chi)|`; `-inf` at a zero.
    pub fn log_abs_at(&self, t: f64) -> f64 {
        self.eval_at(ShiftPoint::new(self.q, t)).norm().ln()
    }

    /// Coefficient-wise conjugate, i.e. the polynomial of the conjugate character.
    pub fn conjugate(&self, conj_index: usize) -> Self {
        Self {
            q: self.q,
            char_index: conj_index,
            coeffs: self.coeffs.iter().map(Complex64::conj).collect(),
        }
    }

    pub fn inverse_roots(&self) -> Vec<Complex64> {
        l_inverse_roots(self)
    }
}

/// A point `s = 1/2 + it` on the critical line, with `t` reduced modulo the
/// period `2 pi / log q` and `theta = -t log q` the angle of `u = q^{-s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftPoint {
    pub t: f64,
    pub theta: f64,
}

impl ShiftPoint {
    pub fn new(q: u32, t: f64) -> Self {
        let ln_q = (q as f64).ln();
        let t = t.rem_euclid(TAU / ln_q);
        Self {
            t,
            theta: -t * ln_q,
        }
    }

    /// `u = q^{-1/2} e^{i theta}`.
    pub fn u(&self, q: u32) -> Complex64 {
        Complex64::from_polar((q as f64).sqrt().recip(), self.theta)
    }
}

pub fn l_eval_u(l: &LPolynomial, u: Complex64) -> Complex64 {
    l.coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
}

/// `c_n = sum_{monic f, d(f) = n} chi(f)` for `n < d(Q)`, where every monic
/// polynomial is its own reduced residue (index `q^n + i`).
fn low_coefficient(chi: &DirichletChar, n: usize) -> Complex64 {
    let q = chi.modulus().q() as usize;
    let base = q.pow(n as u32);
    let vals: Vec<Complex64> = (base..2 * base).map(|r| chi.eval_index(r)).collect();
    pairwise_sum(&vals)
}

/// The L-polynomial of a non-principal character, coefficients `c_0 .. c_{d(Q)-1}`.
pub fn l_polynomial(chi: &DirichletChar) -> Result<LPolynomial, Error> {
    if chi.is_principal() {
        return Err(Error::PrincipalCharacter);
    }
    let d = chi.modulus().degree();
    let coeffs = (0..d).map(|n| low_coefficient(chi, n)).collect();
    Ok(LPolynomial::from_coeffs(
        chi.modulus().q(),
        chi.index(),
        coeffs,
    ))
}

/// Counts of monic polynomials of degree `n` in each residue class mod `Q`.
pub fn residue_class_counts(m: &Modulus, n: usize) -> Result<Vec<u64>, Error> {
    let mut counts = vec![0u64; m.size() as usize];
    for f in MonicIter::new(m.field(), n)? {
        counts[m.residue_index(&f)?] += 1;
    }
    Ok(counts)
}

/// `sum_{monic f, d(f) = n} chi(f)` for any `n`, from residue-class counts
/// (`n >= d(Q)` is the probe range where the sum must vanish).
pub fn l_coefficient_from_counts(chi: &DirichletChar, counts: &[u64]) -> Complex64 {
    let vals: Vec<Complex64> = counts
        .iter()
        .enumerate()
        .map(|(r, &c)| {
            if c == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                chi.eval_index(r) * c as f64
            }
        })
        .collect();
    pairwise_sum(&vals)
}

pub fn l_coefficient(chi: &DirichletChar, n: usize) -> Result<Complex64, Error> {
    if n < chi.modulus().degree() {
        return Ok(low_coefficient(chi, n));
    }
    Ok(l_coefficient_from_counts(
        chi,
        &residue_class_counts(chi.modulus(), n)?,
    ))
}

/// `zeta_A(s) = 1 / (1 - q^{1-s})`.
pub fn zeta_a(field: FieldSpec, s: Complex64) -> Result<Complex64, Error> {
    let ln_q = (field.q() as f64).ln();
    let one = Complex64::new(1.0, 0.0);
    let e = (one - s) * ln_q;
    let turns = e.im / TAU;
    if e.re == 0.0 && (turns - turns.round()).abs() < 1e-12 {
        return Err(Error::ZetaPole);
    }
    Ok(one / (one - e.exp()))
}

/// The inverse roots `alpha_i` with `L(u) = prod (1 - alpha_i u)`: eigenvalues
/// of the companion matrix of `z^D + c_1 z^{D-1} + ... + c_D`, Newton-polished.
pub fn l_inverse_roots(l: &LPolynomial) -> Vec<Complex64> {
    let c = l.coeffs();
    let deg = l.degree();
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[0];
    let mut comp = DMatrix::<Complex64>::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -c[j + 1] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    let eig = comp.schur().eigenvalues().expect("complex Schur form");
    // p(z) = sum_n c_n z^{D-n}
    let p = |z: Complex64| -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for &cn in c {
            dv = dv * z + v;
            v = v * z + cn;
        }
        (v, dv)
    };
    eig.iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..4 {
                let (v, dv) = p(z);
                if dv.norm() == 0.0 {
                    break;
                }
                let next = z - v / dv;
                if p(next).0.norm() < v.norm() {
                    z = next;
                } else {
                    break;
                }
            }
            z
        })
        .collect()
}

/// Coefficients of `prod_i (1 - alpha_i u)`.
pub fn expand_inverse_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for &a in roots {
        out.push(Complex64::new(0.0, 0.0));
        for n in (1..out.len()).rev() {
            let prev = out[n - 1];
            out[n] -= a * prev;
        }
    }
    out
}

/// Per-degree prime data of one character, enough for every bound below:
/// for `n >= 1`,
/// `b1[n] = sum_{d(P) = n} chi(P)`, `b2[n] = sum_{d(P) = n} chi(P)^2`, and
/// `lambda[n] = sum_{j d(P) = n} chi(P)^j / j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeCoefficients {
    q: u32,
    max_degree: usize,
    pub b1: Vec<Complex64>,
    pub b2: Vec<Complex64>,
    pub lambda: Vec<Complex64>,
}

impl PrimeCoefficients {
    /// Uses the enumerated primes of `table` up to its maximal degree.
    pub fn new(chi: &DirichletChar, table: &PrimeTable) -> Result<Self, Error> {
        let group = chi.group();
        let m = chi.modulus();
        if table.field() != m.field() {
            return Err(Error::InvalidArgument(
                "prime table over a different field".into(),
            ));
        }
        let max = table.max_degree();
        let e = group.exponent();
        let zero = Complex64::new(0.0, 0.0);
        let mut b1 = vec![zero; max + 1];
        let mut b2 = vec![zero; max + 1];
        let mut lambda_terms: Vec<Vec<Complex64>> = vec![Vec::new(); max + 1];
        for dp in 1..=max {
            let mut t1 = Vec::new();
            let mut t2 = Vec::new();
            for p in table.primes(dp) {
                let Some(ph) = chi.phase_at(m.residue_index(p)?) else {
                    continue;
                };
                t1.push(unit_root(ph, e));
                t2.push(unit_root((ph as u128 * 2 % e as u128) as u64, e));
                for j in 1..=max / dp {
                    let phj = (ph as u128 * j as u128 % e as u128) as u64;
                    lambda_terms[j * dp].push(unit_root(phj, e) / j as f64);
                }
            }
            b1[dp] = pairwise_sum(&t1);
            b2[dp] = pairwise_sum(&t2);
        }
        let lambda = lambda_terms.iter().map(|v| pairwise_sum(v)).collect();
        Ok(Self {
            q: m.q(),
            max_degree: max,
            b1,
            b2,
            lambda,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn check(&self, h: usize) -> Result<(), Error> {
        if h > self.max_degree {
            return Err(Error::InvalidArgument(format!(
                "cutoff {h} exceeds prime data degree {}",
                self.max_degree
            )));
        }
        Ok(())
    }
}

fn require_primitive(chi: &DirichletChar) -> Result<(), Error> {
    if chi.is_principal() {
        return Err(Error::PrincipalCharacter);
    }
    if !chi.is_primitive() {
        return Err(Error::ImprimitiveCharacter);
    }
    Ok(())
}

/// The pointwise bound
/// `m/h + (1/h) Re sum_{j d(P) <= h} chi(P^j) (h - j d(P)) / (j |P|^{j(1/2 + it + 1/(h log q))})`
/// with `m = d(Q) - 1` and `1 <= h <= m`.
pub fn log_l_bound_pointwise(
    chi: &DirichletChar,
    data: &PrimeCoefficients,
    t: f64,
    h: usize,
) -> Result<f64, Error> {
    require_primitive(chi)?;
    let m = chi.modulus().degree() - 1;
    if h < 1 || h > m {
        return Err(Error::CutoffOutOfRange { h, max: m });
    }
    data.check(h)?;
    let q = data.q as f64;
    let ln_q = q.ln();
    let hf = h as f64;
    let terms: Vec<Complex64> = (1..h)
        .map(|n| {
            let nf = n as f64;
            let w = (hf - nf) * q.powf(-nf / 2.0) * (-nf / hf).exp();
            data.lambda[n] * Complex64::from_polar(w, -nf * t * ln_q)
        })
        .collect();
    Ok(m as f64 / hf + pairwise_sum(&terms).re / hf)
}

/// The simplified bound at `x = q^h`:
/// `Re[sum_{|P| <= x} chi(P) |P|^{-1/2-it-1/log x} log(x/|P|)/log x
///   + 1/2 sum_{|P| <= x^{1/2}} chi(P^2) |P|^{-1-2it}] + log|Q| / log x`.
pub fn log_l_bound_simplified(
    chi: &DirichletChar,
    data: &PrimeCoefficients,
    t: f64,
    h: usize,
) -> Result<f64, Error> {
    require_primitive(chi)?;
    if h < 1 {
        return Err(Error::CutoffOutOfRange {
            h,
            max: data.max_degree,
        });
    }
    data.check(h)?;
    let q = data.q as f64;
    let ln_q = q.ln();
    let hf = h as f64;
    let single: Vec<Complex64> = (1..h)
        .map(|n| {
            let nf = n as f64;
            let w = q.powf(-nf / 2.0) * (-nf / hf).exp() * (hf - nf) / hf;
            data.b1[n] * Complex64::from_polar(w, -nf * t * ln_q)
        })
        .collect();
    let squares: Vec<Complex64> = (1..=h / 2)
        .map(|n| {
            let nf = n as f64;
            data.b2[n] * Complex64::from_polar(0.5 * q.powf(-nf), -2.0 * nf * t * ln_q)
        })
        .collect();
    let d = chi.modulus().degree() as f64;
    Ok((pairwise_sum(&single) + pairwise_sum(&squares)).re + d / hf)
}

/// `h(f) = (1/2) sum_j a_j |f|^{-i t_j}`, which depends on `f` only via `d(f)`.
pub fn h_weight(f: &FqPoly, shifts: &ShiftSpec) -> Result<Complex64, Error> {
    let d = f.degree().ok_or(Error::InvalidArgument(
        "h(f) is undefined at the zero polynomial".into(),
    ))?;
    Ok(h_weight_degree(f.field().q(), d, shifts))
}

/// `h(f)` for any `f` of degree `n`.
pub fn h_weight_degree(q: u32, n: usize, shifts: &ShiftSpec) -> Complex64 {
    let ln_q = (q as f64).ln();
    let terms: Vec<Complex64> = shifts
        .pairs()
        .map(|(a, t)| Complex64::from_polar(a, -t * n as f64 * ln_q))
        .collect();
    pairwise_sum(&terms) * 0.5
}

/// The shifted bound at `x = q^h`:
/// `2 Re sum_{|P| <= x} h(P) chi(P) |P|^{-1/2-1/log x} log(x/|P|)/log x
///   + Re sum_{|P| <= x^{1/2}} h(P^2) chi(P^2) / |P| + a log|Q| / log x`
/// with `a = sum a_j + 10`.
pub fn shifted_log_bound(
    chi: &DirichletChar,
    data: &PrimeCoefficients,
    shifts: &ShiftSpec,
    h: usize,
) -> Result<f64, Error> {
    require_primitive(chi)?;
    if h < 1 {
        return Err(Error::CutoffOutOfRange {
            h,
            max: data.max_degree,
        });
    }
    data.check(h)?;
    let q = data.q as f64;
    let hf = h as f64;
    let single: Vec<Complex64> = (1..h)
        .map(|n| {
            let nf = n as f64;
            let w = 2.0 * q.powf(-nf / 2.0) * (-nf / hf).exp() * (hf - nf) / hf;
            h_weight_degree(data.q, n, shifts) * data.b1[n] * w
        })
        .collect();
    let squares: Vec<Complex64> = (1..=h / 2)
        .map(|n| h_weight_degree(data.q, 2 * n, shifts) * data.b2[n] * q.powf(-(n as f64)))
        .collect();
    let a = shifts.a_sum() + 10.0;
    let d = chi.modulus().degree() as f64;
    Ok((pairwise_sum(&single) + pairwise_sum(&squares)).re + a * d / hf)
}

/// `sum_j a_j log |L(1/2 + i t_j, chi)|`, the quantity the shifted bound controls.
pub fn shifted_log_value(l: &LPolynomial, shifts: &ShiftSpec) -> f64 {
    shifts.pairs().map(|(a, t)| a * l.log_abs_at(t)).sum()
}

/// `log|L(1/2+it)| * loglog|Q| / log|Q|`, the constant in the crude single-value bound.
pub fn crude_constant(l: &LPolynomial, m: &Modulus, t: f64) -> f64 {
    let log_q = m.log_norm();
    l.log_abs_at(t) * log_q.ln() / log_q
}

/// The primitive characters mod `Q` with their L-polynomials, in canonical order.
#[derive(Debug, Clone)]
pub struct PrimitiveFamily {
    group: Arc<UnitGroup>,
    chars: Vec<DirichletChar>,
    lpolys: Vec<LPolynomial>,
}

impl PrimitiveFamily {
    pub fn new(group: Arc<UnitGroup>) -> Result<Self, Error> {
        let chars = primitive_characters(&group);
        let lpolys = chars.iter().map(l_polynomial).collect::<Result<_, _>>()?;
        Ok(Self {
            group,
            chars,
            lpolys,
        })
    }

    /// Reassembles a family from precomputed L-polynomials (e.g. a cache),
    /// checking they cover exactly the primitive characters.
    pub fn from_parts(group: Arc<UnitGroup>, lpolys: Vec<LPolynomial>) -> Result<Self, Error> {
        let chars = primitive_characters(&group);
        if chars.len() != lpolys.len()
            || chars
                .iter()
                .zip(&lpolys)
                .any(|(c, l)| c.index() != l.char_index() || l.q() != group.modulus().q())
        {
            return Err(Error::InvalidArgument(
                "L-polynomials do not match the primitive characters".into(),
            ));
        }
        Ok(Self {
            group,
            chars,
            lpolys,
        })
    }

    pub fn group(&self) -> &Arc<UnitGroup> {
        &self.group
    }

    pub fn modulus(&self) -> &Modulus {
        self.group.modulus()
    }

    pub fn characters(&self) -> &[DirichletChar] {
        &self.chars
    }

    pub fn lpolys(&self) -> &[LPolynomial] {
        &self.lpolys
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    /// Position of a character index within the family.
    pub fn position(&self, char_index: usize) -> Option<usize> {
        self.chars
            .binary_search_by_key(&char_index, DirichletChar::index)
            .ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chargroup::{factor_modulus, unit_group};
    use std::f64::consts::PI;

    fn family(q: u32, s: &str) -> PrimitiveFamily {
        let f = FieldSpec::new(q).unwrap();
        let m = factor_modulus(&FqPoly::parse(f, s).unwrap()).unwrap();
        PrimitiveFamily::new(Arc::new(unit_group(&m).unwrap())).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn t_squared_polynomials() {
        let fam = family(3, "T^2");
        let idx: Vec<usize> = fam.characters().iter().map(|c| c.index()).collect();
        assert_eq!(idx, [1, 2, 4, 5]);
        let s3 = 3f64.sqrt();
        let want = [c(0.0, s3), c(-1.0, 0.0), c(-1.0, 0.0), c(0.0, -s3)];
        for (l, w) in fam.lpolys().iter().zip(want) {
            assert_eq!(l.degree(), 1);
            assert!((l.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-12);
            assert!((l.coeffs()[1] - w).norm() < 1e-12);
        }
        let l1 = &fam.lpolys()[0];
        let v = l1.eval(c(1.0 / s3, 0.0));
        assert!((v - c(1.0, 1.0)).norm() < 1e-12);
        assert_eq!(l1.eval(c(0.0, 0.0)), c(1.0, 0.0));
    }

    #[test]
    fn principal_rejected() {
        let fam = family(3, "T^2");
        let chi0 = DirichletChar::from_index(fam.group().clone(), 0).unwrap();
        assert_eq!(l_polynomial(&chi0), Err(Error::PrincipalCharacter));
    }

    #[test]
    fn inverse_roots_linear() {
        let fam = family(3, "T^2");
        let r = fam.lpolys()[0].inverse_roots();
        assert_eq!(r.len(), 1);
        assert!((r[0] - c(0.0, -3f64.sqrt())).norm() < 1e-12);
        let r = fam.lpolys()[1].inverse_roots();
        assert!((r[0] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn roots_expand_back() {
        let fam = family(3, "T^4 + T + 2");
        for l in fam.lpolys() {
            let e = expand_inverse_roots(&l.inverse_roots());
            assert_eq!(e.len(), l.coeffs().len());
            for (a, b) in e.iter().zip(l.coeffs()) {
                assert!((a - b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn zeta_examples() {
        let f2 = FieldSpec::new(2).unwrap();
        assert!((zeta_a(f2, c(2.0, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        let f3 = FieldSpec::new(3).unwrap();
        let s = c(1.0 + 1.0 / (4.0 * 3f64.ln()), 0.0);
        let z = zeta_a(f3, s).unwrap();
        assert!((z.re - 4.5208).abs() < 1e-4);
        assert_eq!(zeta_a(f3, c(1.0, 0.0)), Err(Error::ZetaPole));
        assert_eq!(zeta_a(f3, c(1.0, TAU / 3f64.ln())), Err(Error::ZetaPole));
    }

    #[test]
    fn shift_point_reduction() {
        let period = TAU / 3f64.ln();
        let a = ShiftPoint::new(3, 0.3);
        let b = ShiftPoint::new(3, 0.3 + 2.0 * period);
        assert!((a.t - b.t).abs() < 1e-12);
        assert!((a.theta + 0.3 * 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn pointwise_example() {
        let fam = family(3, "T^2");
        let chi = &fam.characters()[0];
        let table = PrimeTable::new(FieldSpec::new(3).unwrap(), 1).unwrap();
        let data = PrimeCoefficients::new(chi, &table).unwrap();
        assert_eq!(log_l_bound_pointwise(chi, &data, 0.0, 1).unwrap(), 1.0);
        let lhs = fam.lpolys()[0].log_abs_at(0.0);
        assert!((lhs - 0.5 * 2f64.ln()).abs() < 1e-12);
        assert!(matches!(
            log_l_bound_pointwise(chi, &data, 0.0, 2),
            Err(Error::CutoffOutOfRange { .. })
        ));
        // h = 1 zeroes every degree-1 weight
        assert!((log_l_bound_simplified(chi, &data, 0.7, 1).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn h_weight_examples() {
        let f3 = FieldSpec::new(3).unwrap();
        let s = ShiftSpec::new(vec![1.0, 1.0], vec![0.0, PI / 3f64.ln()]).unwrap();
        let lin = FqPoly::parse(f3, "T + 1").unwrap();
        assert!(h_weight(&lin, &s).unwrap().norm() < 1e-15);
        assert!((h_weight(&FqPoly::one(f3), &s).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(h_weight(&FqPoly::zero(f3), &s).is_err());
    }

    #[test]
    fn lambda_matches_log_of_l() {
        // log L(u) = sum_n lambda[n] u^n = -sum_n (sum_i alpha_i^n / n) u^n
        let fam = family(3, "T^4 + T + 2");
        let table = PrimeTable::new(FieldSpec::new(3).unwrap(), 6).unwrap();
        for (chi, l) in fam.characters().iter().zip(fam.lpolys()) {
            let data = PrimeCoefficients::new(chi, &table).unwrap();
            let roots = l.inverse_roots();
            for n in 1..=6 {
                let p: Complex64 = roots.iter().map(|a| a.powu(n as u32)).sum();
                let want = -p / n as f64;
                assert!((data.lambda[n] - want).norm() < 1e-8, "n={n}");
            }
        }
    }
}
