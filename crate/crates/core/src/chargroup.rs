//! The unit group `(A/QA)^*` and its Dirichlet characters.
//!
//! The group is split by CRT into prime-power parts. For each `P^e` the
//! cyclic part of order `|P| - 1` gets a generator found by order testing in
//! enumeration order; the `1 + P` part (only present for `e > 1`) is
//! decomposed by a relation lattice reduced to Smith normal form. Every
//! unit's exponent vector is then tabulated once.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, PolyError};
use crate::ffpoly::{enumerate_irreducible, prime_divisors, FieldSpec, FqPoly};

/// Largest residue ring `q^{d(Q)}` a unit group will be built for.
pub const MAX_RESIDUES: u64 = 1 << 24;

/// A monic modulus `Q` of degree at least 2 together with its factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulus {
    poly: FqPoly,
    factors: Vec<(FqPoly, u32)>,
    degree: usize,
    size: u64,
    phi: u64,
}

impl Modulus {
    pub fn poly(&self) -> &FqPoly {
        &self.poly
    }

    pub fn field(&self) -> FieldSpec {
        self.poly.field()
    }

    pub fn q(&self) -> u32 {
        self.poly.field().q()
    }

    /// Prime factorization `[(P_i, e_i)]`, primes in enumeration order.
    pub fn factors(&self) -> &[(FqPoly, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `|Q| = q^{d(Q)}`, the number of residues mod `Q`.
    pub fn size(&self) -> u64 {
        self.size
    }

    /// `log |Q|`.
    pub fn log_norm(&self) -> f64 {
        self.degree as f64 * (self.q() as f64).ln()
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// Number of primitive characters, from the prime-power formula
    /// `phi*(P) = |P| - 2`, `phi*(P^e) = |P|^{e-2} (|P| - 1)^2`.
    pub fn primitive_count_formula(&self) -> u64 {
        self.factors
            .iter()
            .map(|(p, e)| {
                let np = p.norm() as u64;
                if *e == 1 {
                    np.saturating_sub(2)
                } else {
                    np.pow(e - 2) * (np - 1) * (np - 1)
                }
            })
            .product()
    }

    /// Index of `f mod Q` in `0..|Q|`.
    pub fn residue_index(&self, f: &FqPoly) -> Result<usize, Error> {
        if f.field() != self.field() {
            return Err(PolyError::FieldMismatch {
                left: self.q(),
                right: f.field().q(),
            }
            .into());
        }
        if f.degree().is_none_or(|d| d < self.degree) {
            return Ok(f.to_index() as usize);
        }
        Ok(f.rem(&self.poly)?.to_index() as usize)
    }

    pub fn residue(&self, index: usize) -> FqPoly {
        FqPoly::from_index(self.field(), index as u64)
    }

    /// `d(Q) = 2` families have small `log |Q|` and are flagged in reports.
    pub fn is_low_degree(&self) -> bool {
        self.degree == 2
    }
}

/// Factors a monic `Q` with `d(Q) >= 2` by trial division over monic
/// irreducibles of increasing degree.
pub fn factor_modulus(q_poly: &FqPoly) -> Result<Modulus, Error> {
    let degree = q_poly.degree().unwrap_or(0);
    if q_poly.is_zero() || degree < 2 {
        return Err(Error::ModulusDegree(degree));
    }
    if !q_poly.is_monic() {
        return Err(Error::NotMonic);
    }
    let field = q_poly.field();
    let mut rest = q_poly.clone();
    let mut factors = Vec::new();
    let mut k = 1;
    while rest.degree().unwrap_or(0) >= 2 * k {
        for p in enumerate_irreducible(field, k)? {
            let mut e = 0;
            loop {
                let (quot, r) = rest.divmod(&p)?;
                if !r.is_zero() {
                    break;
                }
                rest = quot;
                e += 1;
            }
            if e > 0 {
                factors.push((p, e));
            }
        }
        k += 1;
    }
    if rest.degree().unwrap_or(0) >= 1 {
        factors.push((rest, 1));
    }
    factors.sort_by_key(|(p, _)| (p.degree(), p.to_index()));
    let size = field.pow(degree as u32)?;
    let phi = factors
        .iter()
        .map(|(p, e)| {
            let np = p.norm() as u64;
            np.pow(*e) - np.pow(e - 1)
        })
        .product();
    Ok(Modulus {
        poly: q_poly.clone(),
        factors,
        degree,
        size,
        phi,
    })
}

pub fn euler_phi(m: &Modulus) -> u64 {
    m.phi()
}

/// `(A/QA)^*` with an explicit basis and a full discrete-log table.
#[derive(Debug, Clone)]
pub struct UnitGroup {
    modulus: Modulus,
    generators: Vec<FqPoly>,
    orders: Vec<u64>,
    /// lcm of the orders; character values are `exp(2 pi i n / exponent)`.
    exponent: u64,
    /// `exponent / orders[j]`.
    weights: Vec<u64>,
    /// Exponent vectors, `rank` entries per residue; meaningful only where `unit`.
    dlog: Vec<u32>,
    unit: Vec<bool>,
    /// Per prime `P | Q`: dlog vectors of the kernel of `(A/Q)^* -> (A/(Q/P))^*`.
    kernels: Vec<Vec<Vec<u32>>>,
}

impl UnitGroup {
    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn generators(&self) -> &[FqPoly] {
        &self.generators
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Exponent of the group (lcm of the generator orders).
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_unit_index(&self, index: usize) -> bool {
        self.unit[index]
    }

    /// Exponent vector of the residue with the given index, if it is a unit.
    pub fn dlog_index(&self, index: usize) -> Option<&[u32]> {
        if !self.unit[index] {
            return None;
        }
        let r = self.rank();
        Some(&self.dlog[index * r..(index + 1) * r])
    }

    pub fn dlog(&self, f: &FqPoly) -> Result<Option<&[u32]>, Error> {
        Ok(self.dlog_index(self.modulus.residue_index(f)?))
    }

    /// `prod g_j^{a_j} mod Q`.
    pub fn element(&self, exps: &[u32]) -> Result<FqPoly, Error> {
        let qp = self.modulus.poly();
        let mut acc = FqPoly::one(self.modulus.field());
        for (g, &a) in self.generators.iter().zip(exps) {
            acc = acc.mul_mod(&g.pow_mod(a as u64, qp)?, qp)?;
        }
        Ok(acc)
    }

    /// Phase numerator `sum_j k_j a_j (exponent / m_j) mod exponent` for the
    /// character with exponents `k` at the unit with dlog `a`.
    #[inline]
    pub fn phase(&self, k: &[u32], a: &[u32]) -> u64 {
        let e = self.exponent as u128;
        let mut acc: u128 = 0;
        for ((&kj, &aj), &w) in k.iter().zip(a).zip(&self.weights) {
            acc += kj as u128 * aj as u128 * w as u128;
        }
        (acc % e) as u64
    }

    /// Mixed-radix index of an exponent vector (first coordinate most significant).
    pub fn char_index(&self, exps: &[u32]) -> usize {
        exps.iter()
            .zip(&self.orders)
            .fold(0usize, |acc, (&k, &m)| acc * m as usize + k as usize)
    }

    pub fn char_exponents(&self, mut index: usize) -> Vec<u32> {
        let mut out = vec![0u32; self.rank()];
        for (slot, &m) in out.iter_mut().zip(&self.orders).rev() {
            *slot = (index % m as usize) as u32;
            index /= m as usize;
        }
        out
    }

    fn is_primitive_exponents(&self, k: &[u32]) -> bool {
        self.kernels
            .iter()
            .all(|kernel| kernel.iter().any(|a| self.phase(k, a) != 0))
    }

    /// Builds the cache record (generators, orders and the full dlog table).
    pub fn to_record(&self) -> UnitGroupRecord {
        let r = self.rank();
        UnitGroupRecord {
            version: UnitGroupRecord::VERSION,
            q: self.modulus.q(),
            modulus: self.modulus.poly().to_string(),
            generators: self.generators.iter().map(|g| g.to_string()).collect(),
            orders: self.orders.clone(),
            dlog: (0..self.unit.len())
                .map(|i| self.unit[i].then(|| self.dlog[i * r..(i + 1) * r].to_vec()))
                .collect(),
        }
    }

    /// Restores a group from a cache record, re-checking the table size and
    /// 100 random exponent-vector round trips instead of rebuilding.
    pub fn from_record(rec: &UnitGroupRecord) -> Result<UnitGroup, Error> {
        let bad = |msg: &str| Error::BasisVerification(msg.to_string());
        if rec.version != UnitGroupRecord::VERSION {
            return Err(bad("unsupported cache version"));
        }
        let field = FieldSpec::new(rec.q)?;
        let modulus = factor_modulus(&FqPoly::parse(field, &rec.modulus)?)?;
        let generators = rec
            .generators
            .iter()
            .map(|s| FqPoly::parse(field, s))
            .collect::<Result<Vec<_>, _>>()?;
        if generators.len() != rec.orders.len() || rec.orders.iter().any(|&m| m < 2) {
            return Err(bad("generator/order mismatch"));
        }
        if rec.dlog.len() as u64 != modulus.size() {
            return Err(bad("dlog table has the wrong length"));
        }
        let r = rec.orders.len();
        let mut dlog = vec![0u32; rec.dlog.len() * r];
        let mut unit = vec![false; rec.dlog.len()];
        let mut count = 0u64;
        for (i, entry) in rec.dlog.iter().enumerate() {
            if let Some(v) = entry {
                if v.len() != r || v.iter().zip(&rec.orders).any(|(&a, &m)| a as u64 >= m) {
                    return Err(bad("malformed exponent vector"));
                }
                dlog[i * r..(i + 1) * r].copy_from_slice(v);
                unit[i] = true;
                count += 1;
            }
        }
        if count != modulus.phi() || rec.orders.iter().product::<u64>() != modulus.phi() {
            return Err(bad("table size does not match phi(Q)"));
        }
        let mut group = UnitGroup::assemble(modulus, generators, rec.orders.clone(), dlog, unit);
        if group
            .dlog_index(1)
            .is_none_or(|a| a.iter().any(|&x| x != 0))
        {
            return Err(bad("dlog(1) is not zero"));
        }
        let units: Vec<usize> = (0..group.unit.len()).filter(|&i| group.unit[i]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(group.modulus.poly().to_index());
        for _ in 0..100 {
            let idx = units[rng.gen_range(0..units.len())];
            let exps = group.dlog_index(idx).expect("unit").to_vec();
            if group.element(&exps)?.to_index() as usize != idx {
                return Err(bad("dlog round trip failed"));
            }
        }
        group.kernels = group.compute_kernels()?;
        Ok(group)
    }

    fn assemble(
        modulus: Modulus,
        generators: Vec<FqPoly>,
        orders: Vec<u64>,
        dlog: Vec<u32>,
        unit: Vec<bool>,
    ) -> UnitGroup {
        let exponent = orders.iter().fold(1u64, |acc, &m| lcm(acc, m));
        let weights = orders.iter().map(|&m| exponent / m).collect();
        UnitGroup {
            modulus,
            generators,
            orders,
            exponent,
            weights,
            dlog,
            unit,
            kernels: Vec::new(),
        }
    }

    fn compute_kernels(&self) -> Result<Vec<Vec<Vec<u32>>>, Error> {
        let qp = self.modulus.poly();
        let mut out = Vec::new();
        for (p, _) in self.modulus.factors() {
            let cofactor = qp.divmod(p)?.0;
            let dp = p.degree().expect("prime") as u32;
            let mut kernel = Vec::new();
            for gi in 0..self.modulus.field().pow(dp)? {
                let g = FqPoly::from_index(self.modulus.field(), gi);
                let u = FqPoly::one(self.modulus.field()).add(&cofactor.mul(&g)?)?;
                if let Some(a) = self.dlog(&u)? {
                    kernel.push(a.to_vec());
                }
            }
            out.push(kernel);
        }
        Ok(out)
    }
}

/// Versioned on-disk form of a [`UnitGroup`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitGroupRecord {
    pub version: u32,
    pub q: u32,
    pub modulus: String,
    pub generators: Vec<String>,
    pub orders: Vec<u64>,
    pub dlog: Vec<Option<Vec<u32>>>,
}

impl UnitGroupRecord {
    pub const VERSION: u32 = 1;
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd_u64(a, b) * b
}

/// Builds the unit group of `m`.
pub fn unit_group(m: &Modulus) -> Result<UnitGroup, Error> {
    if m.size() > MAX_RESIDUES {
        return Err(Error::GroupTooLarge(m.size()));
    }
    let field = m.field();
    let qp = m.poly();
    let mut generators = Vec::new();
    let mut orders = Vec::new();
    for (p, e) in m.factors() {
        let pe = p.pow(*e)?;
        let cofactor = qp.divmod(&pe)?.0;
        // CRT idempotent: 1 mod P^e, 0 mod Q/P^e.
        let idem = match cofactor.inv_mod(&pe)? {
            Some(inv) => cofactor.mul(&inv)?,
            None => unreachable!("coprime prime-power parts"),
        };
        let lift = |g: &FqPoly| -> Result<FqPoly, Error> {
            let one = FqPoly::one(field);
            Ok(one.add(&g.sub(&one)?.mul(&idem)?)?.rem(qp)?)
        };
        for (g, ord) in local_basis(p, *e)? {
            generators.push(lift(&g)?);
            orders.push(ord);
        }
    }
    let (generators, orders) = invariant_basis(m, generators, orders)?;
    let r = orders.len();
    let size = m.size() as usize;
    let mut dlog = vec![0u32; size * r];
    let mut unit = vec![false; size];

    // Odometer over exponent vectors, last coordinate fastest; stack[j] holds
    // prod_{i <= j} g_i^{a_i}.
    let one = FqPoly::one(field);
    let mut exps = vec![0u32; r];
    let mut stack: Vec<FqPoly> = vec![one.clone(); r];
    let mut filled = 0u64;
    loop {
        let elt = stack.last().unwrap_or(&one);
        let idx = elt.to_index() as usize;
        if unit[idx] {
            return Err(Error::BasisVerification(format!(
                "element {elt} reached twice"
            )));
        }
        unit[idx] = true;
        dlog[idx * r..(idx + 1) * r].copy_from_slice(&exps);
        filled += 1;

        let mut advanced = None;
        for j in (0..r).rev() {
            if (exps[j] as u64) + 1 < orders[j] {
                exps[j] += 1;
                advanced = Some(j);
                break;
            }
            exps[j] = 0;
        }
        let Some(j) = advanced else {
            break;
        };
        // stack[j] held prefix * g_j^{a_j - 1}.
        stack[j] = stack[j].mul_mod(&generators[j], qp)?;
        for i in j + 1..r {
            stack[i] = stack[j].clone();
        }
    }
    if filled != m.phi() {
        return Err(Error::BasisVerification(format!(
            "basis spans {filled} units, expected {}",
            m.phi()
        )));
    }
    let mut group = UnitGroup::assemble(m.clone(), generators, orders, dlog, unit);
    group.kernels = group.compute_kernels()?;
    Ok(group)
}

/// Recombines independent generators of the given orders into invariant-factor
/// form. A cyclic result is replaced by the first unit in enumeration order
/// whose order is `phi(Q)`.
fn invariant_basis(
    m: &Modulus,
    generators: Vec<FqPoly>,
    orders: Vec<u64>,
) -> Result<(Vec<FqPoly>, Vec<u64>), Error> {
    let r = orders.len();
    let qp = m.poly();
    let field = m.field();
    let diag: Vec<Vec<i64>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| if i == j { orders[i] as i64 } else { 0 })
                .collect()
        })
        .collect();
    let (inv, vinv) = smith_normal_form(diag);
    let mut gens = Vec::new();
    let mut ords = Vec::new();
    for (i, &d) in inv.iter().enumerate() {
        if d <= 1 {
            continue;
        }
        let mut acc = FqPoly::one(field);
        for (j, g) in generators.iter().enumerate() {
            let ex = vinv[i][j].rem_euclid(orders[j] as i64) as u64;
            acc = acc.mul_mod(&g.pow_mod(ex, qp)?, qp)?;
        }
        gens.push(acc);
        ords.push(d as u64);
    }
    if ords.len() == 1 {
        let n = ords[0];
        let ells = prime_divisors(n);
        for idx in 2..m.size() {
            let g = FqPoly::from_index(field, idx);
            if !g.gcd(qp)?.is_one() || !g.pow_mod(n, qp)?.is_one() {
                continue;
            }
            let mut full = true;
            for &l in &ells {
                if g.pow_mod(n / l, qp)?.is_one() {
                    full = false;
                    break;
                }
            }
            if full {
                return Ok((vec![g], ords));
            }
        }
        return Err(Error::BasisVerification(
            "cyclic group without generator".into(),
        ));
    }
    Ok((gens, ords))
}

/// Basis of `(A/P^e)^*` as `(generator mod P^e, order)` pairs, orders >= 2.
fn local_basis(p: &FqPoly, e: u32) -> Result<Vec<(FqPoly, u64)>, Error> {
    let field = p.field();
    let pe = p.pow(e)?;
    let dp = p.degree().expect("prime") as u32;
    let np = field.pow(dp)?;
    let mut basis = Vec::new();

    let cyc = np - 1;
    if cyc >= 2 {
        let ells = prime_divisors(cyc);
        let one = FqPoly::one(field);
        let mut found = None;
        for idx in 1..field.pow(dp * e)? {
            let g = FqPoly::from_index(field, idx);
            if !g.gcd(p)?.is_one() {
                continue;
            }
            if !g.pow_mod(cyc, &pe)?.is_one() {
                continue;
            }
            let mut full = true;
            for &l in &ells {
                if g.pow_mod(cyc / l, &pe)? == one {
                    full = false;
                    break;
                }
            }
            if full {
                found = Some(g);
                break;
            }
        }
        let g = found.ok_or_else(|| {
            Error::BasisVerification(format!("no element of order {cyc} mod {pe}"))
        })?;
        basis.push((g, cyc));
    }

    if e > 1 {
        // 1 + P*h for deg h < d(P)(e-1).
        let count = field.pow(dp * (e - 1))?;
        let one = FqPoly::one(field);
        let elements = (0..count)
            .map(|hi| {
                let h = FqPoly::from_index(field, hi);
                Ok(one.add(&p.mul(&h)?)?)
            })
            .collect::<Result<Vec<_>, Error>>()?;
        basis.extend(abelian_basis(&elements, &pe)?);
    }
    Ok(basis)
}

/// Decomposes the finite abelian group formed by `elements` (closed under
/// multiplication mod `modulus`, identity included) into a direct product of
/// cyclic groups. Returns `(generator, order)` with orders >= 2 and each order
/// dividing the next.
pub(crate) fn abelian_basis(
    elements: &[FqPoly],
    modulus: &FqPoly,
) -> Result<Vec<(FqPoly, u64)>, Error> {
    let target = elements.len();
    let field = modulus.field();
    let one = FqPoly::one(field);
    // Subgroup generated so far: element index -> exponents over `gens`.
    let mut span: HashMap<u64, Vec<i64>> = HashMap::from([(one.to_index(), Vec::new())]);
    let mut gens: Vec<FqPoly> = Vec::new();
    let mut relations: Vec<Vec<i64>> = Vec::new();

    for y in elements {
        if span.len() == target {
            break;
        }
        if span.contains_key(&y.to_index()) {
            continue;
        }
        let s = gens.len();
        // Smallest n with y^n in the current span.
        let mut powers = vec![one.clone()];
        let mut cur = y.clone();
        while !span.contains_key(&cur.to_index()) {
            powers.push(cur.clone());
            cur = cur.mul_mod(y, modulus)?;
        }
        let n = powers.len() as i64;
        let mut rel: Vec<i64> = span[&cur.to_index()].iter().map(|&c| -c).collect();
        rel.resize(s, 0);
        rel.push(n);
        for r in relations.iter_mut() {
            r.push(0);
        }
        relations.push(rel);

        let mut next = HashMap::with_capacity(span.len() * powers.len());
        for (i, yp) in powers.iter().enumerate() {
            for (&hidx, hexp) in &span {
                let h = FqPoly::from_index(field, hidx);
                let mut v = hexp.clone();
                v.resize(s, 0);
                v.push(i as i64);
                next.insert(yp.mul_mod(&h, modulus)?.to_index(), v);
            }
        }
        span = next;
        gens.push(y.clone());
    }
    if span.len() != target {
        return Err(Error::BasisVerification(format!(
            "generated {} of {target} elements",
            span.len()
        )));
    }

    let (diag, vinv) = smith_normal_form(relations);
    let gen_orders: Vec<u64> = gens
        .iter()
        .map(|g| element_order(g, modulus))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for (i, &d) in diag.iter().enumerate() {
        if d <= 1 {
            continue;
        }
        let mut acc = one.clone();
        for (j, g) in gens.iter().enumerate() {
            let ex = vinv[i][j].rem_euclid(gen_orders[j] as i64) as u64;
            acc = acc.mul_mod(&g.pow_mod(ex, modulus)?, modulus)?;
        }
        out.push((acc, d as u64));
    }
    Ok(out)
}

fn element_order(g: &FqPoly, modulus: &FqPoly) -> Result<u64, Error> {
    let mut n = 1u64;
    let mut cur = g.rem(modulus)?;
    while !cur.is_one() {
        cur = cur.mul_mod(g, modulus)?;
        n += 1;
    }
    Ok(n)
}

/// Smith normal form of a square integer matrix `R` (rows are relations).
/// Returns the diagonal of `D = U R V` and `V^{-1}`, so the `i`-th invariant
/// generator is `prod_j x_j^{V^{-1}[i][j]}`.
pub(crate) fn smith_normal_form(mut a: Vec<Vec<i64>>) -> (Vec<i64>, Vec<Vec<i64>>) {
    let n = a.len();
    let mut vinv: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();

    // Column op col_j -= c * col_i on A, mirrored on V^{-1} as row_i += c * row_j.
    fn col_sub(a: &mut [Vec<i64>], vinv: &mut [Vec<i64>], j: usize, i: usize, c: i64) {
        for row in a.iter_mut() {
            row[j] -= c * row[i];
        }
        let rj = vinv[j].clone();
        for (x, y) in vinv[i].iter_mut().zip(rj) {
            *x += c * y;
        }
    }
    fn col_swap(a: &mut [Vec<i64>], vinv: &mut [Vec<i64>], i: usize, j: usize) {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        vinv.swap(i, j);
    }

    for t in 0..n {
        loop {
            // Smallest nonzero pivot in the trailing block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            a.swap(t, pi);
            if pj != t {
                col_swap(&mut a, &mut vinv, t, pj);
            }
            let mut clean = true;
            for i in t + 1..n {
                let c = a[i][t] / a[t][t];
                if c != 0 {
                    let rt = a[t].clone();
                    for (x, y) in a[i].iter_mut().zip(rt) {
                        *x -= c * y;
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let c = a[t][j] / a[t][t];
                if c != 0 {
                    col_sub(&mut a, &mut vinv, j, t, c);
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Divisibility: fold a row with an indivisible entry into row t.
            let p = a[t][t];
            let bad = (t + 1..n).find(|&i| (t + 1..n).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    let ri = a[i].clone();
                    for (x, y) in a[t].iter_mut().zip(ri) {
                        *x += y;
                    }
                }
                None => break,
            }
        }
        if a[t][t] < 0 {
            for row in a.iter_mut() {
                row[t] = -row[t];
            }
            for x in vinv[t].iter_mut() {
                *x = -*x;
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), vinv)
}

/// A Dirichlet character mod `Q`, given by exponents against the unit-group basis.
#[derive(Debug, Clone)]
pub struct DirichletChar {
    group: Arc<UnitGroup>,
    index: usize,
    exponents: Vec<u32>,
    primitive: bool,
}

impl DirichletChar {
    pub fn new(group: Arc<UnitGroup>, exponents: Vec<u32>) -> Result<Self, Error> {
        if exponents.len() != group.rank()
            || exponents
                .iter()
                .zip(group.orders())
                .any(|(&k, &m)| k as u64 >= m)
        {
            return Err(Error::InvalidArgument(
                "exponent vector does not match the unit group".into(),
            ));
        }
        let index = group.char_index(&exponents);
        let primitive = group.is_primitive_exponents(&exponents);
        Ok(Self {
            group,
            index,
            exponents,
            primitive,
        })
    }

    pub fn from_index(group: Arc<UnitGroup>, index: usize) -> Result<Self, Error> {
        if index as u64 >= group.order() {
            return Err(Error::InvalidArgument(format!(
                "character index {index} out of range"
            )));
        }
        let exps = group.char_exponents(index);
        Self::new(group, exps)
    }

    pub fn group(&self) -> &Arc<UnitGroup> {
        &self.group
    }

    pub fn modulus(&self) -> &Modulus {
        self.group.modulus()
    }

    /// Canonical index (mixed radix over the exponent vector).
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&k| k == 0)
    }

    /// The conjugate character (exponent-wise negation).
    pub fn conjugate(&self) -> DirichletChar {
        let exps: Vec<u32> = self
            .exponents
            .iter()
            .zip(self.group.orders())
            .map(|(&k, &m)| ((m - k as u64) % m) as u32)
            .collect();
        DirichletChar {
            group: self.group.clone(),
            index: self.group.char_index(&exps),
            exponents: exps,
            primitive: self.primitive,
        }
    }

    /// Phase numerator at a residue index, or `None` when not coprime to `Q`.
    #[inline]
    pub fn phase_at(&self, residue: usize) -> Option<u64> {
        self.group
            .dlog_index(residue)
            .map(|a| self.group.phase(&self.exponents, a))
    }

    pub fn eval_index(&self, residue: usize) -> Complex64 {
        match self.phase_at(residue) {
            None => Complex64::new(0.0, 0.0),
            Some(n) => unit_root(n, self.group.exponent()),
        }
    }

    /// `chi(f)`: zero unless `gcd(f, Q) = 1`.
    pub fn eval(&self, f: &FqPoly) -> Result<Complex64, Error> {
        Ok(self.eval_index(self.group.modulus().residue_index(f)?))
    }
}

/// `exp(2 pi i n / e)`.
#[inline]
pub fn unit_root(n: u64, e: u64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (n as f64) / (e as f64))
}

pub fn is_primitive(chi: &DirichletChar) -> bool {
    chi.is_primitive()
}

pub fn char_eval(chi: &DirichletChar, f: &FqPoly) -> Result<Complex64, Error> {
    chi.eval(f)
}

/// Every character mod `Q`, in lexicographic exponent order.
pub fn all_characters(group: &Arc<UnitGroup>) -> Vec<DirichletChar> {
    (0..group.order() as usize)
        .map(|i| DirichletChar::from_index(group.clone(), i).expect("index in range"))
        .collect()
}

/// The primitive characters mod `Q`, in canonical order.
pub fn primitive_characters(group: &Arc<UnitGroup>) -> Vec<DirichletChar> {
    all_characters(group)
        .into_iter()
        .filter(DirichletChar::is_primitive)
        .collect()
}

/// All monic `Q` of degree `d` over `F_q`, in enumeration order.
pub fn monic_moduli(field: FieldSpec, d: usize) -> Result<Vec<Modulus>, Error> {
    crate::ffpoly::MonicIter::new(field, d)?
        .map(|f| factor_modulus(&f))
        .collect()
}
