//! Integer and rational linear algebra over arbitrary-precision scalars.
//!
//! Everything here is exact. Integer routines are built on a single
//! unimodular row-echelon reduction (extended-gcd row operations), which
//! yields Hermite-style forms, integral kernels, integral solutions and
//! Smith invariants.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Dense row-major matrix of big integers.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<BigInt>>", try_from = "Vec<Vec<BigInt>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows; an empty row list gives a `0 x cols` matrix.
    pub fn from_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend(r);
        }
        Ok(Matrix { rows: n, cols, data })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::from_rows(rows, cols).expect("ragged i64 matrix")
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Matrix, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, k: &BigInt) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * k).collect() }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Stacks the rows of `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.cols });
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, other: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        m
    }

    pub fn pow(&self, mut e: u64) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::InvalidArgument("power of a non-square matrix".into()));
        }
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            base = base.mul(&base)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn trace(&self) -> BigInt {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()
    }
}

impl From<Matrix> for Vec<Vec<BigInt>> {
    fn from(m: Matrix) -> Self {
        m.row_vecs()
    }
}

impl TryFrom<Vec<Vec<BigInt>>> for Matrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        Matrix::from_rows(rows, cols)
    }
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn gcd_all<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    xs.into_iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

fn normalized_egcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let eg = a.extended_gcd(b);
    if eg.gcd.is_negative() {
        (-eg.gcd, -eg.x, -eg.y)
    } else {
        (eg.gcd, eg.x, eg.y)
    }
}

fn combine_rows(m: &mut [Vec<BigInt>], r: usize, i: usize, s: &BigInt, t: &BigInt, u: &BigInt, v: &BigInt) {
    // (row_r, row_i) <- (s*row_r + t*row_i, u*row_r + v*row_i)
    for c in 0..m[r].len() {
        let a = m[r][c].clone();
        let b = m[i][c].clone();
        m[r][c] = s * &a + t * &b;
        m[i][c] = u * &a + v * &b;
    }
}

/// Unimodular row reduction to Hermite normal form. Row operations are
/// mirrored on `aug` when given. Returns the pivot positions `(row, col)`.
fn hermite_rows(m: &mut [Vec<BigInt>], mut aug: Option<&mut [Vec<BigInt>]>) -> Vec<(usize, usize)> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        if let Some(a) = aug.as_deref_mut() {
            a.swap(r, p);
        }
        for i in r + 1..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let a = m[r][c].clone();
            let b = m[i][c].clone();
            let (g, s, t) = normalized_egcd(&a, &b);
            let ag = &a / &g;
            let bg = &b / &g;
            let nb = -bg;
            combine_rows(m, r, i, &s, &t, &nb, &ag);
            if let Some(x) = aug.as_deref_mut() {
                combine_rows(x, r, i, &s, &t, &nb, &ag);
            }
        }
        if m[r][c].is_negative() {
            for x in m[r].iter_mut() {
                *x = -x.clone();
            }
            if let Some(a) = aug.as_deref_mut() {
                for x in a[r].iter_mut() {
                    *x = -x.clone();
                }
            }
        }
        for i in 0..r {
            let q = m[i][c].div_floor(&m[r][c]);
            if q.is_zero() {
                continue;
            }
            for k in 0..cols {
                let d = &q * &m[r][k];
                m[i][k] -= d;
            }
            if let Some(a) = aug.as_deref_mut() {
                for k in 0..a[r].len() {
                    let d = &q * &a[r][k];
                    a[i][k] -= d;
                }
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    pivots
}

/// Row Hermite normal form of the row lattice of `m`, zero rows dropped.
pub fn hermite_normal_form(m: &Matrix) -> Matrix {
    let mut rows = m.row_vecs();
    let piv = hermite_rows(&mut rows, None);
    rows.truncate(piv.len());
    Matrix::from_rows(rows, m.cols()).expect("shape preserved")
}

pub fn rank(m: &Matrix) -> usize {
    let mut rows = m.row_vecs();
    hermite_rows(&mut rows, None).len()
}

/// A Z-basis (as rows, in Hermite normal form) of `{x in Z^n : a x = 0}`.
pub fn kernel_basis(a: &Matrix) -> Matrix {
    let n = a.cols();
    let mut t = a.transpose().row_vecs();
    let mut u = Matrix::identity(n).row_vecs();
    let piv = hermite_rows(&mut t, Some(&mut u));
    let kernel: Vec<Vec<BigInt>> = u.split_off(piv.len());
    let k = Matrix::from_rows(kernel, n).expect("shape preserved");
    hermite_normal_form(&k)
}

/// One integral solution of `a x = b`, or `None` when no integral solution exists.
pub fn solve_integral(a: &Matrix, b: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: b.len() });
    }
    let n = a.cols();
    let mut t = a.transpose().row_vecs();
    let mut u = Matrix::identity(n).row_vecs();
    let piv = hermite_rows(&mut t, Some(&mut u));
    let mut y: Vec<BigInt> = Vec::with_capacity(piv.len());
    for (k, &(_, pc)) in piv.iter().enumerate() {
        let mut rhs = b[pc].clone();
        for (kk, yk) in y.iter().enumerate() {
            rhs -= &t[kk][pc] * yk;
        }
        let d = &t[k][pc];
        if !rhs.is_multiple_of(d) {
            return Ok(None);
        }
        y.push(rhs / d);
    }
    let mut x = vec![BigInt::zero(); n];
    for (k, yk) in y.iter().enumerate() {
        for j in 0..n {
            x[j] += yk * &u[k][j];
        }
    }
    if a.mul_vec(&x)? != b {
        return Ok(None);
    }
    Ok(Some(x))
}

/// Nonzero Smith invariants `d_1 | d_2 | ...` of an integer matrix.
pub fn smith_invariants(a: &Matrix) -> Vec<BigInt> {
    let mut m = a.row_vecs();
    loop {
        hermite_rows(&mut m, None);
        let mut t: Vec<Vec<BigInt>> = transpose_vecs(&m, a.cols());
        hermite_rows(&mut t, None);
        m = transpose_vecs(&t, m.len());
        let diagonal = m
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, x)| i == j || x.is_zero()));
        if diagonal {
            break;
        }
    }
    let mut d: Vec<BigInt> = (0..m.len().min(a.cols()))
        .map(|i| m[i][i].abs())
        .filter(|x| !x.is_zero())
        .collect();
    // enforce the divisibility chain
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            let l = d[i].lcm(&d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
    d
}

fn transpose_vecs(m: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(a: &Matrix) -> Result<BigInt> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("determinant of a non-square matrix".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut m = a.row_vecs();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return Ok(BigInt::zero());
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    Ok(sign * &m[n - 1][n - 1])
}

/// Characteristic polynomial `det(t I - a)`, coefficients in ascending degree.
pub fn characteristic_polynomial(a: &Matrix) -> Result<Vec<BigInt>> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("characteristic polynomial of a non-square matrix".into()));
    }
    // Faddeev-LeVerrier; every division is exact over Z.
    let n = a.rows();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    let mut m = Matrix::zeros(n, n);
    let id = Matrix::identity(n);
    for k in 1..=n {
        m = a.mul(&m)?.add(&id.scale(&c[n - k + 1]))?;
        let tr = a.mul(&m)?.trace();
        c[n - k] = -tr / BigInt::from(k);
    }
    Ok(c)
}

pub fn to_rational(x: &BigInt) -> Rational {
    Rational::from_integer(x.clone())
}

pub fn rational_matrix(m: &Matrix) -> Vec<Vec<Rational>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(to_rational).collect()).collect()
}

/// Gauss-Jordan inverse; `None` when singular.
pub fn rational_inverse(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..2 * n {
                    let d = &f * &m[c][j];
                    m[i][j] -= d;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// `q = u^T diag(d) u` with `u` unit upper triangular.
#[derive(Clone, Debug)]
pub struct Ldl {
    pub d: Vec<Rational>,
    pub u: Vec<Vec<Rational>>,
}

/// Exact LDL^T factorization of a symmetric rational matrix without pivoting.
/// Returns `None` if a zero pivot is met.
pub fn ldl(q: &[Vec<Rational>]) -> Option<Ldl> {
    let n = q.len();
    let mut d = vec![Rational::zero(); n];
    let mut u = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        u[i][i] = Rational::one();
        let mut di = q[i][i].clone();
        for k in 0..i {
            di -= &d[k] * &u[k][i] * &u[k][i];
        }
        if di.is_zero() {
            return None;
        }
        for j in i + 1..n {
            let mut s = q[i][j].clone();
            for k in 0..i {
                s -= &d[k] * &u[k][i] * &u[k][j];
            }
            u[i][j] = s / &di;
        }
        d[i] = di;
    }
    Some(Ldl { d, u })
}

pub fn is_positive_definite(q: &[Vec<Rational>]) -> bool {
    match ldl(q) {
        Some(f) => f.d.iter().all(Signed::is_positive),
        None => q.is_empty(),
    }
}

/// Smallest integer `>= x`.
pub fn ceil_rational(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

/// Largest integer `<= x`.
pub fn floor_rational(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

/// Smallest non-negative integer `r` with `r^2 >= x` for rational `x >= 0`.
pub fn ceil_sqrt_rational(x: &Rational) -> BigInt {
    if !x.is_positive() {
        return BigInt::zero();
    }
    let approx = x.to_f64().unwrap_or(f64::MAX).sqrt().ceil();
    let mut r = BigInt::from(approx as u64);
    let sq = |r: &BigInt| to_rational(&(r * r));
    while r.is_positive() && sq(&(&r - 1)) >= *x {
        r -= 1;
    }
    while sq(&r) < *x {
        r += 1;
    }
    r
}

/// Lcm of the denominators of a rational vector.
pub fn common_denominator(v: &[Rational]) -> BigInt {
    v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
}

/// Scales a rational vector to a primitive-free integral one by clearing denominators.
pub fn clear_denominators(v: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let d = common_denominator(v);
    let ints = v.iter().map(|x| (x * to_rational(&d)).to_integer()).collect();
    (ints, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn solve_scalar_cases() {
        let a = Matrix::from_i64(&[vec![2]]);
        assert_eq!(solve_integral(&a, &big(&[4])).unwrap(), Some(big(&[2])));
        assert_eq!(solve_integral(&a, &big(&[3])).unwrap(), None);
    }

    #[test]
    fn kernel_of_small_matrix() {
        let a = Matrix::from_i64(&[vec![1, 2, 3], vec![4, 5, 6]]);
        let k = kernel_basis(&a);
        assert_eq!(k.rows(), 1);
        assert!(a.mul_vec(k.row(0)).unwrap().iter().all(Zero::is_zero));
        assert_eq!(gcd_all(k.row(0)), BigInt::one());
    }

    #[test]
    fn kernel_of_empty_map_is_everything() {
        let a = Matrix::zeros(0, 3);
        assert_eq!(kernel_basis(&a), Matrix::identity(3));
    }

    #[test]
    fn smith_of_diagonalizable() {
        let a = Matrix::from_i64(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(smith_invariants(&a), big(&[2, 6, 12]));
    }

    #[test]
    fn determinant_and_charpoly() {
        let a = Matrix::from_i64(&[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]);
        assert_eq!(determinant(&a).unwrap(), BigInt::from(4));
        // t^3 - 6t^2 + 10t - 4
        assert_eq!(characteristic_polynomial(&a).unwrap(), big(&[-4, 10, -6, 1]));
    }

    #[test]
    fn rational_inverse_roundtrip() {
        let a = rational_matrix(&Matrix::from_i64(&[vec![2, 1], vec![1, 1]]));
        let inv = rational_inverse(&a).unwrap();
        assert_eq!(inv, rational_matrix(&Matrix::from_i64(&[vec![1, -1], vec![-1, 2]])));
        assert!(rational_inverse(&rational_matrix(&Matrix::from_i64(&[vec![1, 2], vec![2, 4]]))).is_none());
    }

    #[test]
    fn ceil_sqrt_is_tight() {
        let q = |n: i64, d: i64| Rational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(ceil_sqrt_rational(&q(4, 1)), BigInt::from(2));
        assert_eq!(ceil_sqrt_rational(&q(17, 4)), BigInt::from(3));
        assert_eq!(ceil_sqrt_rational(&q(0, 1)), BigInt::from(0));
        assert_eq!(ceil_sqrt_rational(&q(1, 9)), BigInt::from(1));
    }
}
