//! Finite groups of lattice isometries and their frameshapes.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeVector, Sublattice};
use crate::linalg::{self, Matrix};

pub const DEFAULT_GROUP_CAP: usize = 1024;

/// An integer matrix acting on column vectors of an ambient lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry {
    ambient: Lattice,
    matrix: Matrix,
}

impl Isometry {
    /// Wraps a matrix without checking that it preserves the form.
    pub fn new(ambient: Lattice, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != ambient.rank() || matrix.cols() != ambient.rank() {
            return Err(Error::DimensionMismatch { expected: ambient.rank(), found: matrix.rows() });
        }
        Ok(Isometry { ambient, matrix })
    }

    /// Wraps a matrix and rejects it unless it preserves the form.
    pub fn checked(ambient: Lattice, matrix: Matrix) -> Result<Self> {
        let g = Self::new(ambient, matrix)?;
        if !g.verify_isometry() {
            let label = g.ambient.label().unwrap_or("<unnamed>").to_string();
            return Err(Error::NotIsometry(label));
        }
        Ok(g)
    }

    pub fn identity(ambient: &Lattice) -> Self {
        Isometry { ambient: ambient.clone(), matrix: Matrix::identity(ambient.rank()) }
    }

    pub fn negation(ambient: &Lattice) -> Self {
        Isometry {
            ambient: ambient.clone(),
            matrix: Matrix::identity(ambient.rank()).scale(&BigInt::from(-1)),
        }
    }

    pub fn ambient(&self) -> &Lattice {
        &self.ambient
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `g^T gram g == gram`.
    pub fn verify_isometry(&self) -> bool {
        let gram = self.ambient.gram();
        self.matrix
            .transpose()
            .mul(gram)
            .and_then(|m| m.mul(&self.matrix))
            .map(|m| &m == gram)
            .unwrap_or(false)
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == Matrix::identity(self.matrix.rows())
    }

    pub fn apply(&self, v: &LatticeVector) -> Result<LatticeVector> {
        Ok(LatticeVector(self.matrix.mul_vec(v.coords())?))
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &Isometry) -> Result<Isometry> {
        if self.ambient != other.ambient {
            return Err(Error::CrossAmbient);
        }
        Ok(Isometry { ambient: self.ambient.clone(), matrix: self.matrix.mul(&other.matrix)? })
    }

    /// Inverse via `g^{-1} = gram^{-1} g^T gram`.
    pub fn inverse(&self) -> Result<Isometry> {
        let gram = linalg::rational_matrix(self.ambient.gram());
        let inv = linalg::rational_inverse(&gram)
            .ok_or_else(|| Error::Degenerate("inverse needs a non-degenerate form".into()))?;
        let gt_gram = linalg::rational_matrix(&self.matrix.transpose().mul(self.ambient.gram())?);
        let n = self.ambient.rank();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let x: linalg::Rational = (0..n).map(|k| &inv[i][k] * &gt_gram[k][j]).sum();
                if !x.is_integer() {
                    return Err(Error::NotIsometry("inverse is not integral".into()));
                }
                out[(i, j)] = x.to_integer();
            }
        }
        Ok(Isometry { ambient: self.ambient.clone(), matrix: out })
    }

    pub fn conjugate_by(&self, h: &Isometry) -> Result<Isometry> {
        h.compose(self)?.compose(&h.inverse()?)
    }
}

/// Least `k >= 1` with `g^k = id`, searching up to `cap`.
pub fn element_order(g: &Isometry, cap: usize) -> Result<u64> {
    let id = Matrix::identity(g.matrix.rows());
    let mut p = g.matrix.clone();
    for k in 1..=cap as u64 {
        if p == id {
            return Ok(k);
        }
        p = p.mul(&g.matrix)?;
    }
    Err(Error::NotFiniteOrder(format!("no power up to {cap} is the identity")))
}

/// A finite group given by generators together with all of its elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAction {
    ambient: Lattice,
    generators: Vec<Isometry>,
    elements: Vec<Isometry>,
}

impl GroupAction {
    pub fn ambient(&self) -> &Lattice {
        &self.ambient
    }

    pub fn generators(&self) -> &[Isometry] {
        &self.generators
    }

    /// Elements in breadth-first order from the identity.
    pub fn elements(&self) -> &[Isometry] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn trivial(ambient: &Lattice) -> Self {
        GroupAction {
            ambient: ambient.clone(),
            generators: vec![],
            elements: vec![Isometry::identity(ambient)],
        }
    }
}

/// Closure of `gens` under composition. All generators must be verified
/// isometries of one ambient lattice.
pub fn generate_group(ambient: &Lattice, gens: Vec<Isometry>, cap: usize) -> Result<GroupAction> {
    for g in &gens {
        if g.ambient != *ambient {
            return Err(Error::CrossAmbient);
        }
        if !g.verify_isometry() {
            return Err(Error::NotIsometry(ambient.label().unwrap_or("<unnamed>").into()));
        }
    }
    let id = Isometry::identity(ambient);
    let mut seen: HashSet<Matrix> = HashSet::from([id.matrix.clone()]);
    let mut elements = vec![id];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in &gens {
            let h = g.compose(&elements[i])?;
            if seen.insert(h.matrix.clone()) {
                if elements.len() == cap {
                    return Err(Error::GroupTooLarge { cap });
                }
                elements.push(h);
                queue.push_back(elements.len() - 1);
            }
        }
    }
    Ok(GroupAction { ambient: ambient.clone(), generators: gens, elements })
}

/// Saturated sublattice of vectors fixed by every generator.
pub fn invariant_sublattice(group: &GroupAction) -> Result<Sublattice> {
    let n = group.ambient.rank();
    let id = Matrix::identity(n);
    let mut stacked = Matrix::zeros(0, n);
    for g in &group.generators {
        stacked = stacked.vstack(&g.matrix.sub(&id)?)?;
    }
    let basis = linalg::kernel_basis(&stacked);
    Ok(group.ambient.sublattice(basis)?.saturate())
}

/// `sum_{g in G} g` as a matrix.
pub fn sum_over_group(group: &GroupAction) -> Matrix {
    let n = group.ambient.rank();
    group
        .elements
        .iter()
        .fold(Matrix::zeros(n, n), |acc, g| acc.add(&g.matrix).expect("same shape"))
}

/// `prod_a a^{m(a)}`, encoding `det(t - g) = prod_a (t^a - 1)^{m(a)}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frameshape(BTreeMap<u64, i64>);

impl Frameshape {
    pub fn new(parts: impl IntoIterator<Item = (u64, i64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (a, m) in parts {
            if a == 0 {
                return Err(Error::InvalidArgument("frameshape part 0".into()));
            }
            *map.entry(a).or_insert(0) += m;
        }
        map.retain(|_, m| *m != 0);
        Ok(Frameshape(map))
    }

    pub fn parts(&self) -> &BTreeMap<u64, i64> {
        &self.0
    }

    pub fn multiplicity(&self, a: u64) -> i64 {
        self.0.get(&a).copied().unwrap_or(0)
    }

    /// `sum_a a * m(a)`, the rank of the lattice the frameshape lives on.
    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(&a, &m)| a as i64 * m).sum()
    }

    /// Lcm of the parts (the order of any isometry with this frameshape).
    pub fn order(&self) -> u64 {
        self.0.keys().fold(1u64, |l, &a| l.lcm(&a))
    }

    /// The polynomial `prod_a (t^a - 1)^{m(a)}` for frameshapes without negative
    /// multiplicities after clearing, as `(numerator, denominator)`.
    pub fn polynomial_ratio(&self) -> (Vec<BigInt>, Vec<BigInt>) {
        let mut num = vec![BigInt::one()];
        let mut den = vec![BigInt::one()];
        for (&a, &m) in &self.0 {
            let mut f = vec![BigInt::zero(); a as usize + 1];
            f[0] = BigInt::from(-1);
            f[a as usize] = BigInt::one();
            let target = if m > 0 { &mut num } else { &mut den };
            for _ in 0..m.unsigned_abs() {
                *target = poly_mul(target, &f);
            }
        }
        (num, den)
    }
}

impl fmt::Display for Frameshape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|(a, m)| format!("{a}^{m}")).collect();
        write!(f, "{}", s.join(" "))
    }
}

impl FromStr for Frameshape {
    type Err = Error;

    /// Parses `"1^8 2^8"`, `"1^-8 2^16"` or `"1^{-8}.2^{16}"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = Vec::new();
        for tok in s.split(|c: char| c.is_whitespace() || c == '.' || c == '*').filter(|t| !t.is_empty()) {
            let cleaned: String = tok.chars().filter(|c| *c != '{' && *c != '}').collect();
            let (a, m) = match cleaned.split_once('^') {
                Some((a, m)) => (a, m),
                None => (cleaned.as_str(), "1"),
            };
            let a: u64 = a.parse().map_err(|_| Error::Parse(format!("bad frameshape part `{tok}`")))?;
            let m: i64 = m.parse().map_err(|_| Error::Parse(format!("bad frameshape exponent `{tok}`")))?;
            parts.push((a, m));
        }
        if parts.is_empty() {
            return Err(Error::Parse("empty frameshape".into()));
        }
        Frameshape::new(parts)
    }
}

fn poly_trim(p: &mut Vec<BigInt>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Division by a monic polynomial.
fn poly_divrem_monic(p: &[BigInt], q: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    let mut r = p.to_vec();
    poly_trim(&mut r);
    let dq = q.len() - 1;
    if r.len() <= dq {
        return (vec![BigInt::zero()], r);
    }
    let mut quot = vec![BigInt::zero(); r.len() - dq];
    for k in (0..quot.len()).rev() {
        let c = r[k + dq].clone();
        if c.is_zero() {
            continue;
        }
        for (j, qj) in q.iter().enumerate() {
            r[k + j] -= &c * qj;
        }
        quot[k] = c;
    }
    r.truncate(dq.max(1));
    poly_trim(&mut r);
    (quot, r)
}

/// Cyclotomic polynomials `Phi_d` for every divisor `d` of `n`.
fn cyclotomics(n: u64) -> BTreeMap<u64, Vec<BigInt>> {
    let mut out: BTreeMap<u64, Vec<BigInt>> = BTreeMap::new();
    for d in divisors(n) {
        let mut p = vec![BigInt::zero(); d as usize + 1];
        p[0] = BigInt::from(-1);
        p[d as usize] = BigInt::one();
        for (&e, phi) in &out {
            if d % e == 0 {
                p = poly_divrem_monic(&p, phi).0;
            }
        }
        out.insert(d, p);
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn mobius(mut n: u64) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Cyclotomic multiplicities `c_d` with `charpoly = prod_{d|n} Phi_d^{c_d}`.
pub fn cyclotomic_multiplicities(charpoly: &[BigInt], n: u64) -> Result<BTreeMap<u64, i64>> {
    let mut rest = charpoly.to_vec();
    poly_trim(&mut rest);
    let mut c = BTreeMap::new();
    for (d, phi) in cyclotomics(n) {
        let mut k = 0i64;
        loop {
            let (q, r) = poly_divrem_monic(&rest, &phi);
            if !(r.len() == 1 && r[0].is_zero()) {
                break;
            }
            rest = q;
            poly_trim(&mut rest);
            k += 1;
        }
        c.insert(d, k);
    }
    if !(rest.len() == 1 && rest[0].is_one()) {
        return Err(Error::NotFiniteOrder(
            "characteristic polynomial is not a product of cyclotomic factors".into(),
        ));
    }
    Ok(c)
}

/// Frameshape of a finite-order isometry by exact cyclotomic factorization.
pub fn frameshape_of(g: &Isometry, cap: usize) -> Result<Frameshape> {
    let n = element_order(g, cap)?;
    let chi = linalg::characteristic_polynomial(&g.matrix)?;
    frameshape_from_charpoly(&chi, n)
}

/// Frameshape from a characteristic polynomial all of whose roots are `n`-th
/// roots of unity.
pub fn frameshape_from_charpoly(chi: &[BigInt], n: u64) -> Result<Frameshape> {
    let c = cyclotomic_multiplicities(chi, n)?;
    let divs = divisors(n);
    let parts = divs.iter().map(|&a| {
        let m: i64 = divs
            .iter()
            .filter(|&&b| b % a == 0)
            .map(|&b| mobius(b / a) * c[&b])
            .sum();
        (a, m)
    });
    Frameshape::new(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeVector;

    fn rank24() -> Lattice {
        Lattice::diagonal(&[1; 24])
    }

    #[test]
    fn identity_and_negation_are_isometries() {
        let l = Lattice::e8().rescale(-2).unwrap();
        assert!(Isometry::identity(&l).verify_isometry());
        assert!(Isometry::negation(&l).verify_isometry());
        let bad = Isometry::new(l.clone(), Matrix::identity(8).scale(&BigInt::from(2))).unwrap();
        assert!(!bad.verify_isometry());
    }

    #[test]
    fn group_orders() {
        let l = Lattice::e8().rescale(-2).unwrap();
        let g = generate_group(&l, vec![Isometry::negation(&l)], DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 2);
        let t = generate_group(&l, vec![Isometry::identity(&l)], DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(t.order(), 1);
    }

    #[test]
    fn group_cap_enforced() {
        // a 5-cycle on coordinates generates a group of order 5
        let l = Lattice::diagonal(&[1; 5]);
        let mut m = Matrix::zeros(5, 5);
        for i in 0..5 {
            m[((i + 1) % 5, i)] = BigInt::one();
        }
        let g = Isometry::checked(l.clone(), m).unwrap();
        assert!(matches!(generate_group(&l, vec![g], 3), Err(Error::GroupTooLarge { cap: 3 })));
    }

    #[test]
    fn orders() {
        let l = Lattice::diagonal(&[1, 1]);
        assert_eq!(element_order(&Isometry::identity(&l), 10).unwrap(), 1);
        assert_eq!(element_order(&Isometry::negation(&l), 10).unwrap(), 2);
    }

    #[test]
    fn frameshape_identity_and_negation() {
        let fs = frameshape_of(&Isometry::identity(&rank24()), 16).unwrap();
        assert_eq!(fs.to_string(), "1^24");
        let l8 = Lattice::diagonal(&[1; 8]);
        let fs = frameshape_of(&Isometry::negation(&l8), 16).unwrap();
        assert_eq!(fs.to_string(), "1^-8 2^8");
        assert_eq!(fs.degree(), 8);
    }

    #[test]
    fn frameshape_of_eleven_cycles() {
        let l = rank24();
        let mut m = Matrix::zeros(24, 24);
        m[(0, 0)] = BigInt::one();
        m[(1, 1)] = BigInt::one();
        for block in 0..2 {
            let off = 2 + 11 * block;
            for i in 0..11 {
                m[(off + (i + 1) % 11, off + i)] = BigInt::one();
            }
        }
        let g = Isometry::checked(l, m).unwrap();
        assert_eq!(element_order(&g, 100).unwrap(), 11);
        assert_eq!(frameshape_of(&g, 100).unwrap().to_string(), "1^2 11^2");
    }

    #[test]
    fn non_finite_order_rejected() {
        let chi = vec![BigInt::one(), BigInt::from(-3), BigInt::one()]; // t^2 - 3t + 1
        assert!(matches!(frameshape_from_charpoly(&chi, 6), Err(Error::NotFiniteOrder(_))));
    }

    #[test]
    fn parse_and_display() {
        let fs: Frameshape = "1^{-8}.2^{16}".parse().unwrap();
        assert_eq!(fs.to_string(), "1^-8 2^16");
        assert_eq!(fs.degree(), 24);
        let fs: Frameshape = "2^12".parse().unwrap();
        assert_eq!(fs.order(), 2);
        assert!("x^2".parse::<Frameshape>().is_err());
    }

    #[test]
    fn invariant_sublattice_cases() {
        let l = Lattice::e8().rescale(-2).unwrap();
        let t = GroupAction::trivial(&l);
        assert_eq!(invariant_sublattice(&t).unwrap().rank(), 8);
        let pm = generate_group(&l, vec![Isometry::negation(&l)], 16).unwrap();
        assert_eq!(invariant_sublattice(&pm).unwrap().rank(), 0);
        assert!(sum_over_group(&pm).is_zero());
        assert_eq!(sum_over_group(&t), Matrix::identity(8));
        let v = LatticeVector::unit(8, 0);
        assert_eq!(pm.elements()[1].apply(&v).unwrap(), v.neg());
    }

    #[test]
    fn mobius_values() {
        assert_eq!(
            (1..=12).map(mobius).collect::<Vec<_>>(),
            vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]
        );
    }
}
