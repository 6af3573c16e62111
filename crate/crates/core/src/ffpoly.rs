//! Dense polynomials over a prime field `F_q`.
//!
//! Coefficients are stored lowest degree first and every constructor trims
//! trailing zeros, so structural equality is polynomial equality.

use std::fmt;

use crate::error::PolyError;

/// The prime field `F_q`. Only prime `q` is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldSpec {
    q: u32,
}

impl FieldSpec {
    pub fn new(q: u32) -> Result<Self, PolyError> {
        if q < 2 || !is_prime_u64(q as u64) {
            return Err(PolyError::NotPrime(q));
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub(crate) fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub(crate) fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    /// Multiplicative inverse of a nonzero residue (Fermat).
    pub(crate) fn inv(&self, a: u32) -> u32 {
        debug_assert!(a != 0);
        let mut base = a as u64;
        let mut exp = self.q as u64 - 2;
        let m = self.q as u64;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            exp >>= 1;
        }
        acc as u32
    }

    /// `q^n`, or an overflow error.
    pub fn pow(&self, n: u32) -> Result<u64, PolyError> {
        (self.q as u64).checked_pow(n).ok_or(PolyError::Overflow)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime divisors of `n`, ascending.
pub(crate) fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Möbius function on positive integers.
pub fn mobius(n: u64) -> i64 {
    assert!(n >= 1);
    let mut n = n;
    let mut sign = 1i64;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// An element of `A = F_q[T]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqPoly {
    field: FieldSpec,
    coeffs: Vec<u32>,
}

impl FqPoly {
    /// Builds a polynomial from coefficients (lowest degree first), reducing
    /// each into `[0, q)` and trimming trailing zeros.
    pub fn new(field: FieldSpec, coeffs: Vec<u32>) -> Self {
        let q = field.q;
        let mut coeffs = coeffs;
        for c in coeffs.iter_mut() {
            *c %= q;
        }
        let mut p = Self { field, coeffs };
        p.trim();
        p
    }

    /// Coefficients given as signed integers, reduced mod `q`.
    pub fn from_signed(field: FieldSpec, coeffs: &[i64]) -> Self {
        let q = field.q as i64;
        Self::new(
            field,
            coeffs.iter().map(|&c| c.rem_euclid(q) as u32).collect(),
        )
    }

    pub fn zero(field: FieldSpec) -> Self {
        Self {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn one(field: FieldSpec) -> Self {
        Self::constant(field, 1)
    }

    pub fn constant(field: FieldSpec, c: u32) -> Self {
        Self::new(field, vec![c])
    }

    /// The indeterminate `T`.
    pub fn t(field: FieldSpec) -> Self {
        Self::new(field, vec![0, 1])
    }

    /// `c * T^n`.
    pub fn monomial(field: FieldSpec, c: u32, n: usize) -> Self {
        let mut coeffs = vec![0; n + 1];
        coeffs[n] = c;
        Self::new(field, coeffs)
    }

    /// Decodes a base-`q` index (constant term least significant).
    pub fn from_index(field: FieldSpec, mut index: u64) -> Self {
        let q = field.q as u64;
        let mut coeffs = Vec::new();
        while index > 0 {
            coeffs.push((index % q) as u32);
            index /= q;
        }
        Self { field, coeffs }
    }

    /// Base-`q` index of the coefficient vector; inverse of [`FqPoly::from_index`].
    pub fn to_index(&self) -> u64 {
        let q = self.field.q as u64;
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * q + c as u64)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient of `T^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Degree, or `None` for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn leading(&self) -> Option<u32> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(1)
    }

    /// `|f| = q^{d(f)}`, and `0` for the zero polynomial.
    pub fn norm(&self) -> f64 {
        match self.degree() {
            None => 0.0,
            Some(d) => (self.field.q as f64).powi(d as i32),
        }
    }

    fn check_field(&self, other: &FqPoly) -> Result<(), PolyError> {
        if self.field != other.field {
            return Err(PolyError::FieldMismatch {
                left: self.field.q,
                right: other.field.q,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &FqPoly) -> Result<FqPoly, PolyError> {
        self.check_field(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.field.add(self.coeff(i), other.coeff(i)))
            .collect();
        Ok(FqPoly::new(self.field, coeffs))
    }

    pub fn sub(&self, other: &FqPoly) -> Result<FqPoly, PolyError> {
        self.check_field(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.field.sub(self.coeff(i), other.coeff(i)))
            .collect();
        Ok(FqPoly::new(self.field, coeffs))
    }

    pub fn neg(&self) -> FqPoly {
        let coeffs = self.coeffs.iter().map(|&c| self.field.sub(0, c)).collect();
        FqPoly::new(self.field, coeffs)
    }

    pub fn scale(&self, c: u32) -> FqPoly {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| self.field.mul(a, c % self.field.q))
            .collect();
        FqPoly::new(self.field, coeffs)
    }

    pub fn mul(&self, other: &FqPoly) -> Result<FqPoly, PolyError> {
        self.check_field(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(FqPoly::zero(self.field));
        }
        let q = self.field.q as u64;
        let mut acc = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u64 * b as u64) % q;
            }
        }
        Ok(FqPoly::new(
            self.field,
            acc.into_iter().map(|c| c as u32).collect(),
        ))
    }

    /// Euclidean division: `self = divisor * quotient + remainder` with
    /// `d(remainder) < d(divisor)`.
    pub fn divmod(&self, divisor: &FqPoly) -> Result<(FqPoly, FqPoly), PolyError> {
        self.check_field(divisor)?;
        let db = divisor.degree().ok_or(PolyError::DivisionByZero)?;
        let f = self.field;
        let mut rem = self.coeffs.clone();
        if rem.len() <= db {
            return Ok((FqPoly::zero(f), self.clone()));
        }
        let lead_inv = f.inv(divisor.coeffs[db]);
        let mut quot = vec![0u32; rem.len() - db];
        for k in (0..quot.len()).rev() {
            let c = f.mul(rem[k + db], lead_inv);
            quot[k] = c;
            if c == 0 {
                continue;
            }
            for (i, &b) in divisor.coeffs.iter().enumerate() {
                rem[k + i] = f.sub(rem[k + i], f.mul(c, b));
            }
        }
        rem.truncate(db);
        Ok((FqPoly::new(f, quot), FqPoly::new(f, rem)))
    }

    pub fn rem(&self, divisor: &FqPoly) -> Result<FqPoly, PolyError> {
        Ok(self.divmod(divisor)?.1)
    }

    /// Scales to leading coefficient 1. The zero polynomial is returned unchanged.
    pub fn make_monic(&self) -> FqPoly {
        match self.leading() {
            None | Some(1) => self.clone(),
            Some(lc) => self.scale(self.field.inv(lc)),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &FqPoly) -> Result<FqPoly, PolyError> {
        self.check_field(other)?;
        if self.is_zero() && other.is_zero() {
            return Err(PolyError::BothZero);
        }
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        Ok(a.make_monic())
    }

    /// Extended Euclid: returns `(g, s, t)` with `s*self + t*other = g`, `g` monic.
    pub fn ext_gcd(&self, other: &FqPoly) -> Result<(FqPoly, FqPoly, FqPoly), PolyError> {
        self.check_field(other)?;
        if self.is_zero() && other.is_zero() {
            return Err(PolyError::BothZero);
        }
        let f = self.field;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (FqPoly::one(f), FqPoly::zero(f));
        let (mut t0, mut t1) = (FqPoly::zero(f), FqPoly::one(f));
        while !r1.is_zero() {
            let (qt, r) = r0.divmod(&r1)?;
            r0 = std::mem::replace(&mut r1, r);
            let s2 = s0.sub(&qt.mul(&s1)?)?;
            s0 = std::mem::replace(&mut s1, s2);
            let t2 = t0.sub(&qt.mul(&t1)?)?;
            t0 = std::mem::replace(&mut t1, t2);
        }
        let lc_inv = f.inv(r0.leading().expect("nonzero gcd"));
        Ok((r0.scale(lc_inv), s0.scale(lc_inv), t0.scale(lc_inv)))
    }

    /// Inverse modulo `modulus`, if `gcd(self, modulus) = 1`.
    pub fn inv_mod(&self, modulus: &FqPoly) -> Result<Option<FqPoly>, PolyError> {
        let (g, s, _) = self.rem(modulus)?.ext_gcd(modulus)?;
        if !g.is_one() {
            return Ok(None);
        }
        Ok(Some(s.rem(modulus)?))
    }

    pub fn mul_mod(&self, other: &FqPoly, modulus: &FqPoly) -> Result<FqPoly, PolyError> {
        self.mul(other)?.rem(modulus)
    }

    pub fn pow_mod(&self, mut exp: u64, modulus: &FqPoly) -> Result<FqPoly, PolyError> {
        let mut base = self.rem(modulus)?;
        let mut acc = FqPoly::one(self.field).rem(modulus)?;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul_mod(&base, modulus)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul_mod(&base, modulus)?;
            }
        }
        Ok(acc)
    }

    pub fn pow(&self, exp: u32) -> Result<FqPoly, PolyError> {
        let mut acc = FqPoly::one(self.field);
        for _ in 0..exp {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Horner evaluation at a field element.
    pub fn eval(&self, x: u32) -> u32 {
        let f = self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Rabin's test: `T^{q^d} = T (mod f)` and `gcd(T^{q^{d/l}} - T, f) = 1`
    /// for every prime `l | d`. A root in `F_q` short-circuits to `false`.
    pub fn is_irreducible(&self) -> Result<bool, PolyError> {
        let d = match self.degree() {
            None | Some(0) => return Err(PolyError::ConstantPolynomial),
            Some(d) => d,
        };
        if d == 1 {
            return Ok(true);
        }
        let f = self.make_monic();
        let q = self.field.q;
        if (q as usize) <= 4 * d + 64 && (0..q).any(|x| f.eval(x) == 0) {
            return Ok(false);
        }
        let frob = Frobenius::new(&f);
        let checkpoints: Vec<usize> = prime_divisors(d as u64)
            .into_iter()
            .map(|l| d / l as usize)
            .collect();
        let mut x = vec![0u32; d];
        x[1] = 1;
        let t = FqPoly::t(self.field);
        for k in 1..=d {
            x = frob.apply(&x);
            if checkpoints.contains(&k) {
                let xp = FqPoly::new(self.field, x.clone()).sub(&t)?;
                if xp.is_zero() || !xp.gcd(&f)?.is_one() {
                    return Ok(false);
                }
            }
        }
        let mut tvec = vec![0u32; d];
        tvec[1] = 1;
        Ok(x == tvec)
    }
}

/// The `F_q`-linear map `g -> g^q` on `F_q[T]/(f)`, as a matrix whose row `i`
/// holds `T^{iq} mod f`.
struct Frobenius {
    q: u64,
    d: usize,
    rows: Vec<u32>,
}

impl Frobenius {
    fn new(f: &FqPoly) -> Self {
        let d = f.degree().expect("nonconstant");
        let field = f.field();
        let tq = FqPoly::t(field)
            .pow_mod(field.q() as u64, f)
            .expect("same field");
        let mut rows = vec![0u32; d * d];
        let mut cur = FqPoly::one(field);
        for i in 0..d {
            for (j, &c) in cur.coeffs().iter().enumerate() {
                rows[i * d + j] = c;
            }
            cur = cur.mul_mod(&tq, f).expect("same field");
        }
        Self {
            q: field.q() as u64,
            d,
            rows,
        }
    }

    fn apply(&self, x: &[u32]) -> Vec<u32> {
        let d = self.d;
        let mut acc = vec![0u64; d];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            let row = &self.rows[i * d..(i + 1) * d];
            for (a, &r) in acc.iter_mut().zip(row) {
                *a += xi as u64 * r as u64;
            }
            if i % 64 == 63 {
                for a in acc.iter_mut() {
                    *a %= self.q;
                }
            }
        }
        acc.into_iter().map(|a| (a % self.q) as u32).collect()
    }
}

/// Iterator over the `q^n` monic polynomials of degree `n` in lexicographic
/// coefficient order (constant term varies fastest).
#[derive(Debug, Clone)]
pub struct MonicIter {
    field: FieldSpec,
    n: usize,
    next: u64,
    total: u64,
}

impl MonicIter {
    pub fn new(field: FieldSpec, n: usize) -> Result<Self, PolyError> {
        let total = field.pow(n as u32)?;
        Ok(Self {
            field,
            n,
            next: 0,
            total,
        })
    }
}

impl Iterator for MonicIter {
    type Item = FqPoly;

    fn next(&mut self) -> Option<FqPoly> {
        if self.next >= self.total {
            return None;
        }
        let q = self.field.q as u64;
        let mut idx = self.next;
        self.next += 1;
        let mut coeffs = vec![0u32; self.n + 1];
        for c in coeffs.iter_mut().take(self.n) {
            *c = (idx % q) as u32;
            idx /= q;
        }
        coeffs[self.n] = 1;
        Some(FqPoly {
            field: self.field,
            coeffs,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for MonicIter {}

/// All monic polynomials of degree `n`, in lexicographic coefficient order.
pub fn enumerate_monic(field: FieldSpec, n: usize) -> Result<Vec<FqPoly>, PolyError> {
    Ok(MonicIter::new(field, n)?.collect())
}

/// All monic irreducibles of degree `n`, in enumeration order.
pub fn enumerate_irreducible(field: FieldSpec, n: usize) -> Result<Vec<FqPoly>, PolyError> {
    if n == 0 {
        return Err(PolyError::ZeroDegree);
    }
    let mut out = Vec::new();
    for f in MonicIter::new(field, n)? {
        if f.is_irreducible()? {
            out.push(f);
        }
    }
    Ok(out)
}

/// Number of monic irreducibles of degree `n`: `(1/n) sum_{d|n} mu(d) q^{n/d}`.
pub fn prime_count_exact(field: FieldSpec, n: usize) -> Result<u64, PolyError> {
    if n == 0 {
        return Err(PolyError::ZeroDegree);
    }
    let mut total: i128 = 0;
    for d in 1..=n {
        if n.is_multiple_of(d) {
            let mu = mobius(d as u64) as i128;
            if mu != 0 {
                total += mu * field.pow((n / d) as u32)? as i128;
            }
        }
    }
    debug_assert_eq!(total % n as i128, 0);
    u64::try_from(total / n as i128).map_err(|_| PolyError::Overflow)
}

impl fmt::Display for FqPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "T")?,
                (1, c) => write!(f, "{c}*T")?,
                (k, 1) => write!(f, "T^{k}")?,
                (k, c) => write!(f, "{c}*T^{k}")?,
            }
        }
        Ok(())
    }
}

impl FqPoly {
    /// Parses `c_k*T^k + ... + c_0`. `T` alone means `1*T^1`, a missing `^k`
    /// means exponent 1, and a bare number is a constant term. Coefficients
    /// must lie in `[0, q)`; each degree may appear at most once.
    pub fn parse(field: FieldSpec, input: &str) -> Result<FqPoly, PolyError> {
        Parser {
            src: input.as_bytes(),
            pos: 0,
        }
        .poly(field)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> PolyError {
        PolyError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<u64, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse::<u64>()
            .map_err(|_| PolyError::Parse {
                pos: start,
                msg: "number out of range".into(),
            })
    }

    /// Parses `T` with an optional `^k`; returns the exponent.
    fn power(&mut self) -> Result<usize, PolyError> {
        if self.peek() != Some(b'T') {
            return Err(self.err("expected 'T'"));
        }
        self.pos += 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let e = self.number()?;
            if e > 4096 {
                return Err(PolyError::Parse {
                    pos: at,
                    msg: "exponent too large".into(),
                });
            }
            Ok(e as usize)
        } else {
            Ok(1)
        }
    }

    fn poly(mut self, field: FieldSpec) -> Result<FqPoly, PolyError> {
        let mut coeffs: Vec<u32> = Vec::new();
        let mut seen: Vec<usize> = Vec::new();
        loop {
            let term_start = {
                self.skip_ws();
                self.pos
            };
            let (c, k) = match self.peek() {
                Some(b'T') => (1u64, self.power()?),
                Some(ch) if ch.is_ascii_digit() => {
                    let c = self.number()?;
                    if c >= field.q() as u64 {
                        return Err(PolyError::Parse {
                            pos: term_start,
                            msg: format!("coefficient {c} not in [0, {})", field.q()),
                        });
                    }
                    if self.peek() == Some(b'*') {
                        self.pos += 1;
                        (c, self.power()?)
                    } else {
                        (c, 0)
                    }
                }
                Some(_) => return Err(self.err("expected a term")),
                None => return Err(self.err("unexpected end of input")),
            };
            if seen.contains(&k) {
                return Err(PolyError::Parse {
                    pos: term_start,
                    msg: format!("degree {k} appears twice"),
                });
            }
            seen.push(k);
            if coeffs.len() <= k {
                coeffs.resize(k + 1, 0);
            }
            coeffs[k] = c as u32;
            match self.peek() {
                None => break,
                Some(b'+') => self.pos += 1,
                Some(_) => return Err(self.err("expected '+' or end of input")),
            }
        }
        Ok(FqPoly::new(field, coeffs))
    }
}
