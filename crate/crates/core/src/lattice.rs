//! Integral lattices: Gram forms, the Mukai pairing, primitivity,
//! divisibility, rescaling, saturation and orthogonal complements.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// How the coordinates of a lattice are to be read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    Plain,
    /// Coordinates `(r, D, s)`: rank class, Neron-Severi block, point class.
    Mukai,
}

/// Equality compares the form and layout; the label is cosmetic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lattice {
    gram: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default)]
    layout: Layout,
}

/// Coordinates of a lattice vector in the ambient basis.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(pub Vec<BigInt>);

impl LatticeVector {
    pub fn from_i64(v: &[i64]) -> Self {
        LatticeVector(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        LatticeVector(vec![BigInt::zero(); n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = BigInt::one();
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &BigInt) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| a * k).collect())
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| -a).collect())
    }

    /// Gcd of the coordinates (zero for the zero vector).
    pub fn content(&self) -> BigInt {
        linalg::gcd_all(&self.0)
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.gram == other.gram && self.layout == other.layout
    }
}

impl Eq for Lattice {}

impl Lattice {
    pub fn new(gram: Matrix) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::InvalidArgument("Gram matrix must be square and symmetric".into()));
        }
        Ok(Lattice { gram, label: None, layout: Layout::Plain })
    }

    pub fn from_i64(gram: &[Vec<i64>]) -> Result<Self> {
        Self::new(Matrix::from_i64(gram))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn determinant(&self) -> BigInt {
        linalg::determinant(&self.gram).expect("gram is square")
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.determinant().is_zero()
    }

    /// Hyperbolic plane `U`.
    pub fn hyperbolic_plane() -> Self {
        Self::from_i64(&[vec![0, 1], vec![1, 0]]).unwrap().with_label("U")
    }

    /// `A1 = <2>`.
    pub fn a1() -> Self {
        Self::diagonal(&[2]).with_label("A1")
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let e: Vec<BigInt> = entries.iter().map(|&x| BigInt::from(x)).collect();
        Self::new(Matrix::diagonal(&e)).unwrap()
    }

    /// Positive-definite `E8` with the Cartan matrix of the Dynkin diagram
    /// 1-3-4-5-6-7-8 with node 2 attached to node 4.
    pub fn e8() -> Self {
        let edges = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];
        let mut g = vec![vec![0i64; 8]; 8];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = 2;
        }
        for (a, b) in edges {
            g[a][b] = -1;
            g[b][a] = -1;
        }
        Self::from_i64(&g).unwrap().with_label("E8")
    }

    pub fn orthogonal_sum(&self, other: &Lattice) -> Lattice {
        let label = match (&self.label, &other.label) {
            (Some(a), Some(b)) => Some(format!("{a}+{b}")),
            _ => None,
        };
        Lattice { gram: self.gram.block_diag(&other.gram), label, layout: Layout::Plain }
    }

    pub fn vector(&self, coords: Vec<BigInt>) -> Result<LatticeVector> {
        self.check_len(coords.len())?;
        Ok(LatticeVector(coords))
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), found: n });
        }
        Ok(())
    }

    /// `v^T gram w`.
    pub fn pair(&self, v: &LatticeVector, w: &LatticeVector) -> Result<BigInt> {
        self.check_len(v.len())?;
        self.check_len(w.len())?;
        Ok(linalg::dot(&self.gram.mul_vec(&w.0)?, &v.0))
    }

    pub fn square(&self, v: &LatticeVector) -> Result<BigInt> {
        self.pair(v, v)
    }

    /// The functional `x -> pair(v, x)` as coordinates `gram * v`.
    pub fn dual_coords(&self, v: &LatticeVector) -> Result<Vec<BigInt>> {
        self.check_len(v.len())?;
        self.gram.mul_vec(&v.0)
    }

    /// Positive generator of the ideal `{pair(v, x) : x in L}`.
    pub fn divisibility(&self, v: &LatticeVector) -> Result<BigInt> {
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        let g = linalg::gcd_all(&self.dual_coords(v)?);
        if g.is_zero() {
            return Err(Error::Degenerate(format!("{v} lies in the radical")));
        }
        Ok(g)
    }

    /// Divisibility of `v` measured only against the Neron-Severi block
    /// `(0, D, 0)` of a Mukai lattice.
    pub fn ns_divisibility(&self, v: &LatticeVector) -> Result<BigInt> {
        if self.layout != Layout::Mukai {
            return Err(Error::InvalidArgument("not a Mukai lattice".into()));
        }
        let d = self.dual_coords(v)?;
        let g = linalg::gcd_all(&d[1..d.len() - 1]);
        if g.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(g)
    }

    pub fn is_primitive(&self, v: &LatticeVector) -> Result<bool> {
        self.check_len(v.len())?;
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(v.content().is_one())
    }

    /// `L(n)`: the same group with the form multiplied by `n`.
    pub fn rescale(&self, n: i64) -> Result<Lattice> {
        if n == 0 {
            return Err(Error::InvalidArgument("rescaling factor must be nonzero".into()));
        }
        let label = self.label.as_ref().map(|l| format!("{l}({n})"));
        Ok(Lattice { gram: self.gram.scale(&BigInt::from(n)), label, layout: self.layout })
    }

    /// Sublattice spanned by the given rows.
    pub fn sublattice(&self, basis: Matrix) -> Result<Sublattice> {
        Sublattice::new(self.clone(), basis)
    }

    pub fn full(&self) -> Sublattice {
        Sublattice {
            ambient: self.clone(),
            basis: Matrix::identity(self.rank()),
            saturated: true,
        }
    }

    /// Orthogonal complement of `s`, always saturated.
    pub fn orthogonal_complement(&self, s: &Sublattice) -> Result<Sublattice> {
        if s.ambient != *self {
            return Err(Error::CrossAmbient);
        }
        let functionals = s.basis.mul(&self.gram)?;
        Ok(Sublattice {
            ambient: self.clone(),
            basis: linalg::kernel_basis(&functionals),
            saturated: true,
        })
    }

    /// Negated Gram form is positive definite.
    pub fn is_negative_definite(&self) -> bool {
        let neg = linalg::rational_matrix(&self.gram.scale(&BigInt::from(-1)));
        linalg::is_positive_definite(&neg)
    }
}

/// Mukai lattice `U(-1)-twisted + NS`: basis `(e0, NS basis, e_inf)` with
/// `<(r1,D1,s1),(r2,D2,s2)> = -r1 s2 - r2 s1 + D1.D2`.
pub fn mukai_lattice(ns: &Lattice) -> Result<Lattice> {
    if !ns.is_nondegenerate() {
        return Err(Error::Degenerate("Neron-Severi lattice must be non-degenerate".into()));
    }
    let n = ns.rank() + 2;
    let mut g = Matrix::zeros(n, n);
    g[(0, n - 1)] = BigInt::from(-1);
    g[(n - 1, 0)] = BigInt::from(-1);
    for i in 0..ns.rank() {
        for j in 0..ns.rank() {
            g[(i + 1, j + 1)] = ns.gram()[(i, j)].clone();
        }
    }
    let label = ns.label().map(|l| format!("Mukai({l})"));
    Ok(Lattice { gram: g, label, layout: Layout::Mukai })
}

/// A sublattice given by basis rows in ambient coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sublattice {
    ambient: Lattice,
    basis: Matrix,
    saturated: bool,
}

impl Sublattice {
    pub fn new(ambient: Lattice, basis: Matrix) -> Result<Self> {
        if basis.cols() != ambient.rank() {
            return Err(Error::DimensionMismatch { expected: ambient.rank(), found: basis.cols() });
        }
        if linalg::rank(&basis) != basis.rows() {
            return Err(Error::InvalidArgument("sublattice basis rows are linearly dependent".into()));
        }
        Ok(Sublattice { ambient, basis, saturated: false })
    }

    pub fn ambient(&self) -> &Lattice {
        &self.ambient
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn basis_vectors(&self) -> Vec<LatticeVector> {
        (0..self.rank()).map(|i| LatticeVector(self.basis.row(i).to_vec())).collect()
    }

    /// Gram matrix of the restricted form in the sublattice basis.
    pub fn gram(&self) -> Matrix {
        self.basis
            .mul(self.ambient.gram())
            .and_then(|m| m.mul(&self.basis.transpose()))
            .expect("shapes agree")
    }

    /// The sublattice as a lattice in its own right.
    pub fn as_lattice(&self) -> Lattice {
        Lattice::new(self.gram()).expect("restricted form is symmetric")
    }

    /// Coordinates of `v` in the sublattice basis, if `v` lies in the sublattice.
    pub fn coordinates_of(&self, v: &LatticeVector) -> Result<Option<Vec<BigInt>>> {
        linalg::solve_integral(&self.basis.transpose(), &v.0)
    }

    pub fn contains(&self, v: &LatticeVector) -> Result<bool> {
        Ok(self.coordinates_of(v)?.is_some())
    }

    pub fn vector_from_coordinates(&self, y: &[BigInt]) -> Result<LatticeVector> {
        Ok(LatticeVector(self.basis.transpose().mul_vec(y)?))
    }

    /// Saturation: the integral points of the rational span.
    pub fn saturate(&self) -> Sublattice {
        let annihilator = linalg::kernel_basis(&self.basis);
        Sublattice {
            ambient: self.ambient.clone(),
            basis: linalg::kernel_basis(&annihilator),
            saturated: true,
        }
    }

    /// Index of `self` in its saturation.
    pub fn saturation_index(&self) -> BigInt {
        linalg::smith_invariants(&self.basis).iter().product()
    }

    /// Same rational span (both bases generate the same Q-vector space).
    pub fn same_rational_span(&self, other: &Sublattice) -> bool {
        let r = linalg::rank(&self.basis);
        r == linalg::rank(&other.basis)
            && self.basis.vstack(&other.basis).map(|m| linalg::rank(&m) == r).unwrap_or(false)
    }

    pub fn is_nondegenerate(&self) -> bool {
        !linalg::determinant(&self.gram()).expect("square").is_zero()
    }

    pub fn is_negative_definite(&self) -> bool {
        self.as_lattice().is_negative_definite()
    }
}

/// Sign-normalized content-free version of a nonzero vector.
pub fn primitive_part(v: &LatticeVector) -> (BigInt, LatticeVector) {
    let g = v.content();
    if g.is_zero() {
        return (g, v.clone());
    }
    let w = LatticeVector(v.0.iter().map(|x| x.div_floor(&g)).collect());
    (g.abs(), w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[i64]) -> LatticeVector {
        LatticeVector::from_i64(c)
    }

    #[test]
    fn mukai_pairing_on_rank_class() {
        let m = mukai_lattice(&Lattice::a1()).unwrap();
        assert_eq!(m.rank(), 3);
        assert_eq!(m.pair(&v(&[1, 0, 0]), &v(&[0, 0, 1])).unwrap(), BigInt::from(-1));
        assert_eq!(m.square(&v(&[0, 0, 1])).unwrap(), BigInt::zero());
        assert_eq!(m.square(&v(&[0, 1, 0])).unwrap(), BigInt::from(2));
    }

    #[test]
    fn mukai_of_degenerate_rejected() {
        let ns = Lattice::from_i64(&[vec![0, 0], vec![0, 0]]).unwrap();
        assert!(matches!(mukai_lattice(&ns), Err(Error::Degenerate(_))));
    }

    #[test]
    fn e8_minus_two_roots() {
        let e8m2 = Lattice::e8().rescale(-2).unwrap();
        assert_eq!(e8m2.square(&LatticeVector::unit(8, 0)).unwrap(), BigInt::from(-4));
        let m = mukai_lattice(&e8m2).unwrap();
        assert_eq!(m.square(&LatticeVector::unit(10, 3)).unwrap(), BigInt::from(-4));
        assert_eq!(Lattice::e8().determinant(), BigInt::one());
    }

    #[test]
    fn rescale_cases() {
        let u = Lattice::hyperbolic_plane();
        assert_eq!(u.rescale(1).unwrap().gram(), u.gram());
        assert_eq!(u.rescale(2).unwrap().pair(&v(&[1, 0]), &v(&[0, 1])).unwrap(), BigInt::from(2));
        assert!(u.rescale(0).is_err());
    }

    #[test]
    fn pair_dimension_mismatch() {
        let u = Lattice::hyperbolic_plane();
        assert!(matches!(u.pair(&v(&[1, 0, 0]), &v(&[1, 0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn divisibility_cases() {
        let u = Lattice::hyperbolic_plane();
        assert_eq!(u.divisibility(&v(&[1, 0])).unwrap(), BigInt::one());
        assert_eq!(u.divisibility(&v(&[2, 2])).unwrap(), BigInt::from(2));
        assert!(matches!(u.divisibility(&v(&[0, 0])), Err(Error::ZeroVector)));
    }

    #[test]
    fn primitivity() {
        let ns = Lattice::a1().orthogonal_sum(&Lattice::e8().rescale(-2).unwrap());
        let m = mukai_lattice(&ns).unwrap();
        let mut h = vec![0i64; 11];
        h[1] = 1;
        assert!(m.is_primitive(&v(&h)).unwrap());
        h[1] = 2;
        assert!(!m.is_primitive(&v(&h)).unwrap());
        let mut e0 = vec![0i64; 11];
        e0[0] = 1;
        assert!(m.is_primitive(&v(&e0)).unwrap());
    }

    #[test]
    fn saturate_u() {
        let u = Lattice::hyperbolic_plane();
        let s = u.sublattice(Matrix::from_i64(&[vec![2, 0]])).unwrap();
        let sat = s.saturate();
        assert_eq!(sat.basis(), &Matrix::from_i64(&[vec![1, 0]]));
        assert!(sat.is_saturated());
        assert_eq!(s.saturation_index(), BigInt::from(2));
        let again = sat.saturate();
        assert_eq!(again.basis(), sat.basis());
        assert!(again.same_rational_span(&s));
    }

    #[test]
    fn complement_of_isotropic_line() {
        let u = Lattice::hyperbolic_plane();
        let s = u.sublattice(Matrix::from_i64(&[vec![1, 0]])).unwrap();
        let c = u.orthogonal_complement(&s).unwrap();
        assert_eq!(c.basis(), &Matrix::from_i64(&[vec![1, 0]]));
    }

    #[test]
    fn complement_of_h_in_genus_two_mukai() {
        let m = mukai_lattice(&Lattice::diagonal(&[2])).unwrap();
        let s = m.sublattice(Matrix::from_i64(&[vec![0, 1, 0]])).unwrap();
        let c = m.orthogonal_complement(&s).unwrap();
        assert_eq!(c.rank(), 2);
        assert!(c.contains(&v(&[1, 0, 0])).unwrap());
        assert!(c.contains(&v(&[0, 0, 1])).unwrap());
    }

    #[test]
    fn cross_ambient_rejected() {
        let u = Lattice::hyperbolic_plane();
        let other = Lattice::diagonal(&[1, 1]);
        let s = other.full();
        assert!(matches!(u.orthogonal_complement(&s), Err(Error::CrossAmbient)));
    }
}
