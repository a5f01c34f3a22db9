//! Exact enumeration of lattice vectors in an affine fiber `{x : A x = b}`
//! subject to a lower bound on the square, over a negative-definite kernel.
//!
//! Writing a fiber vector as `x0 + sum y_j k_j` the bound becomes a
//! positive-definite ellipsoid in `y`, which is walked level by level from an
//! exact `LDL^T` factorization. Every interval endpoint is settled by exact
//! rational comparison; floating point only supplies a first guess.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeVector, Sublattice};
use crate::linalg::{self, Matrix, Rational};

/// Upper limit on the number of points a brute-force scan will visit.
pub const BRUTE_FORCE_POINT_LIMIT: u64 = 50_000_000;
pub const BRUTE_FORCE_MAX_RANK: usize = 10;

/// One linear side condition `functional . x = value` on source coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub functional: Vec<BigInt>,
    pub value: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberProblem {
    pub source: Lattice,
    /// Rows index the target lattice, columns the source.
    pub map: Matrix,
    pub target: LatticeVector,
    pub min_square: BigInt,
    pub max_square: Option<BigInt>,
    pub extra_constraints: Vec<LinearConstraint>,
}

impl FiberProblem {
    pub fn new(source: Lattice, map: Matrix, target: LatticeVector, min_square: i64) -> Result<Self> {
        if map.cols() != source.rank() {
            return Err(Error::DimensionMismatch { expected: source.rank(), found: map.cols() });
        }
        if map.rows() != target.len() {
            return Err(Error::DimensionMismatch { expected: map.rows(), found: target.len() });
        }
        Ok(FiberProblem {
            source,
            map,
            target,
            min_square: BigInt::from(min_square),
            max_square: None,
            extra_constraints: Vec::new(),
        })
    }

    pub fn with_max_square(mut self, max: i64) -> Self {
        self.max_square = Some(BigInt::from(max));
        self
    }

    pub fn with_constraint(mut self, functional: Vec<BigInt>, value: BigInt) -> Result<Self> {
        if functional.len() != self.source.rank() {
            return Err(Error::DimensionMismatch { expected: self.source.rank(), found: functional.len() });
        }
        self.extra_constraints.push(LinearConstraint { functional, value });
        Ok(self)
    }

    /// Map and target with the side conditions appended as extra rows.
    fn combined_system(&self) -> Result<(Matrix, Vec<BigInt>)> {
        let mut rows = self.map.row_vecs();
        let mut rhs = self.target.0.clone();
        for c in &self.extra_constraints {
            rows.push(c.functional.clone());
            rhs.push(c.value.clone());
        }
        Ok((Matrix::from_rows(rows, self.source.rank())?, rhs))
    }

    /// Every predicate the enumeration is meant to enforce, checked directly.
    pub fn admits(&self, v: &LatticeVector) -> Result<bool> {
        if self.map.mul_vec(&v.0)? != self.target.0 {
            return Ok(false);
        }
        for c in &self.extra_constraints {
            if linalg::dot(&c.functional, &v.0) != c.value {
                return Ok(false);
            }
        }
        let sq = self.source.square(v)?;
        Ok(sq >= self.min_square && self.max_square.as_ref().is_none_or(|m| sq <= *m))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationStats {
    pub kernel_rank: usize,
    pub nodes: u64,
    pub leaves: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationResult {
    /// Sorted lexicographically, without repetition.
    pub vectors: Vec<LatticeVector>,
    pub exhaustive: bool,
    pub stats: EnumerationStats,
}

/// A particular integral solution of `map x = target` together with the
/// saturated kernel of `map` inside `source`.
pub fn fiber_coset(
    source: &Lattice,
    map: &Matrix,
    target: &LatticeVector,
) -> Result<Option<(LatticeVector, Sublattice)>> {
    if map.cols() != source.rank() {
        return Err(Error::DimensionMismatch { expected: source.rank(), found: map.cols() });
    }
    let Some(x) = linalg::solve_integral(map, &target.0)? else {
        return Ok(None);
    };
    let kernel = source.sublattice(linalg::kernel_basis(map))?.saturate();
    Ok(Some((LatticeVector(x), kernel)))
}

/// Quadratic data of the coset `x0 + kernel` in kernel coordinates:
/// `square(x0 + K^T y) = s0 + 2 b.y - y^T Q y`.
struct CosetForm {
    s0: BigInt,
    b: Vec<BigInt>,
    q: Matrix,
}

fn coset_form(ambient: &Lattice, x0: &LatticeVector, kernel: &Sublattice) -> Result<CosetForm> {
    let s0 = ambient.square(x0)?;
    let b = kernel.basis_vectors().iter().map(|k| ambient.pair(x0, k)).collect::<Result<Vec<_>>>()?;
    let q = kernel.gram().scale(&BigInt::from(-1));
    Ok(CosetForm { s0, b, q })
}

fn require_negative_definite(kernel: &Sublattice) -> Result<()> {
    if kernel.rank() > 0 && !kernel.is_negative_definite() {
        return Err(Error::NotNegativeDefinite(format!(
            "kernel of rank {} has Gram matrix {:?}",
            kernel.rank(),
            kernel.gram()
        )));
    }
    Ok(())
}

/// All `v = x0 + k`, `k` in the negative-definite `kernel`, with
/// `min_square <= v^2` (and `v^2 <= max_square` when given).
pub fn enumerate_coset(
    ambient: &Lattice,
    x0: &LatticeVector,
    kernel: &Sublattice,
    min_square: &BigInt,
    max_square: Option<&BigInt>,
) -> Result<EnumerationResult> {
    if kernel.ambient() != ambient {
        return Err(Error::CrossAmbient);
    }
    require_negative_definite(kernel)?;
    let form = coset_form(ambient, x0, kernel)?;
    let k = kernel.rank();
    let mut stats = EnumerationStats { kernel_rank: k, ..Default::default() };
    let mut out = Vec::new();
    let keep = |v: &LatticeVector| -> Result<bool> {
        let sq = ambient.square(v)?;
        Ok(sq >= *min_square && max_square.is_none_or(|m| sq <= *m))
    };

    if k == 0 {
        stats.nodes = 1;
        stats.leaves = 1;
        if keep(x0)? {
            out.push(x0.clone());
        }
        return Ok(EnumerationResult { vectors: out, exhaustive: true, stats });
    }

    let q = linalg::rational_matrix(&form.q);
    let qinv = linalg::rational_inverse(&q).expect("definite form is invertible");
    let b: Vec<Rational> = form.b.iter().map(linalg::to_rational).collect();
    let c: Vec<Rational> = (0..k).map(|i| (0..k).map(|j| &qinv[i][j] * &b[j]).sum()).collect();
    let bc: Rational = (0..k).map(|i| &b[i] * &c[i]).sum();
    let radius = linalg::to_rational(&(&form.s0 - min_square)) + bc;
    if radius.is_negative() {
        return Ok(EnumerationResult { vectors: out, exhaustive: true, stats });
    }
    let f = linalg::ldl(&q).expect("definite form has an LDL factorization");

    let mut walker = Walker { d: &f.d, u: &f.u, c: &c, y: vec![BigInt::zero(); k], stats: &mut stats, hits: Vec::new() };
    walker.descend(k, radius);
    let hits = std::mem::take(&mut walker.hits);

    let basis = kernel.basis();
    for y in hits {
        let v = LatticeVector(
            x0.0.iter().enumerate().map(|(col, x)| x + (0..k).map(|i| &y[i] * &basis[(i, col)]).sum::<BigInt>()).collect(),
        );
        if keep(&v)? {
            out.push(v);
        }
    }
    out.sort();
    out.dedup();
    Ok(EnumerationResult { vectors: out, exhaustive: true, stats })
}

struct Walker<'a> {
    d: &'a [Rational],
    u: &'a [Vec<Rational>],
    c: &'a [Rational],
    y: Vec<BigInt>,
    stats: &'a mut EnumerationStats,
    hits: Vec<Vec<BigInt>>,
}

impl Walker<'_> {
    /// Levels `level..k` are fixed; `budget` is what remains of the radius.
    fn descend(&mut self, level: usize, budget: Rational) {
        self.stats.nodes += 1;
        if level == 0 {
            self.stats.leaves += 1;
            self.hits.push(self.y.clone());
            return;
        }
        let i = level - 1;
        let k = self.y.len();
        let mut centre = self.c[i].clone();
        for j in i + 1..k {
            centre -= &self.u[i][j] * (linalg::to_rational(&self.y[j]) - &self.c[j]);
        }
        let reach = &budget / &self.d[i];
        let (lo, hi) = integer_window(&centre, &reach);
        let mut yi = lo;
        while yi <= hi {
            let z = linalg::to_rational(&yi) - &centre;
            let rest = &budget - &self.d[i] * &z * &z;
            self.y[i] = yi.clone();
            self.descend(i, rest);
            yi += 1;
        }
        self.y[i] = BigInt::zero();
    }
}

/// Integers `y` with `(y - centre)^2 <= reach`, as an inclusive range.
fn integer_window(centre: &Rational, reach: &Rational) -> (BigInt, BigInt) {
    if reach.is_negative() {
        return (BigInt::one(), BigInt::zero());
    }
    let inside = |y: &BigInt| {
        let z = linalg::to_rational(y) - centre;
        &z * &z <= *reach
    };
    let c = centre.to_f64().unwrap_or(0.0);
    let r = reach.to_f64().unwrap_or(0.0).sqrt();
    let mut lo = BigInt::from((c - r).ceil() as i64);
    let mut hi = BigInt::from((c + r).floor() as i64);
    while inside(&(&lo - 1)) {
        lo -= 1;
    }
    while lo <= hi && !inside(&lo) {
        lo += 1;
    }
    while inside(&(&hi + 1)) {
        hi += 1;
    }
    while hi >= lo && !inside(&hi) {
        hi -= 1;
    }
    (lo, hi)
}

/// The complete solution set of a fiber problem.
pub fn enumerate_fiber(problem: &FiberProblem) -> Result<EnumerationResult> {
    let (map, rhs) = problem.combined_system()?;
    let target = LatticeVector(rhs);
    let Some((x0, kernel)) = fiber_coset(&problem.source, &map, &target)? else {
        return Ok(EnumerationResult { vectors: Vec::new(), exhaustive: true, stats: EnumerationStats::default() });
    };
    enumerate_coset(&problem.source, &x0, &kernel, &problem.min_square, problem.max_square.as_ref())
}

/// Coordinate bound `|y_i| <= B_i` in the kernel basis that every solution
/// obeys, from `(y - c)^T Q (y - c) <= R` and `|y_i - c_i|^2 <= R (Q^-1)_ii`.
pub fn certified_box(ambient: &Lattice, x0: &LatticeVector, kernel: &Sublattice, min_square: &BigInt) -> Result<Vec<BigInt>> {
    require_negative_definite(kernel)?;
    let form = coset_form(ambient, x0, kernel)?;
    let k = kernel.rank();
    if k == 0 {
        return Ok(Vec::new());
    }
    let q = linalg::rational_matrix(&form.q);
    let qinv = linalg::rational_inverse(&q).expect("definite form is invertible");
    let b: Vec<Rational> = form.b.iter().map(linalg::to_rational).collect();
    let c: Vec<Rational> = (0..k).map(|i| (0..k).map(|j| &qinv[i][j] * &b[j]).sum()).collect();
    let bc: Rational = (0..k).map(|i| &b[i] * &c[i]).sum();
    let radius = linalg::to_rational(&(&form.s0 - min_square)) + bc;
    if radius.is_negative() {
        return Ok(vec![BigInt::zero(); k]);
    }
    Ok((0..k)
        .map(|i| linalg::ceil_rational(&c[i].abs()) + linalg::ceil_sqrt_rational(&(&radius * &qinv[i][i])))
        .collect())
}

/// Scan of every kernel coordinate vector in `[-box_radius, box_radius]^k`.
/// `exhaustive` is set when the certified box fits inside the scanned one.
pub fn brute_force_fiber(problem: &FiberProblem, box_radius: u32) -> Result<EnumerationResult> {
    if box_radius == 0 {
        return Err(Error::InvalidArgument("box radius must be positive".into()));
    }
    let (map, rhs) = problem.combined_system()?;
    let Some((x0, kernel)) = fiber_coset(&problem.source, &map, &LatticeVector(rhs))? else {
        return Ok(EnumerationResult { vectors: Vec::new(), exhaustive: true, stats: EnumerationStats::default() });
    };
    let k = kernel.rank();
    if k > BRUTE_FORCE_MAX_RANK {
        return Err(Error::InvalidArgument(format!(
            "brute force limited to kernel rank {BRUTE_FORCE_MAX_RANK}, got {k}"
        )));
    }
    let side = 2 * u64::from(box_radius) + 1;
    if side.checked_pow(k as u32).is_none_or(|n| n > BRUTE_FORCE_POINT_LIMIT) {
        return Err(Error::InvalidArgument(format!("box of side {side} in rank {k} is too large to scan")));
    }
    let exhaustive = match certified_box(&problem.source, &x0, &kernel, &problem.min_square) {
        Ok(bounds) => bounds.iter().all(|b| *b <= BigInt::from(box_radius)),
        Err(_) => false,
    };

    let basis: Vec<LatticeVector> = kernel.basis_vectors();
    let form = coset_form(&problem.source, &x0, &kernel)?;
    let small = SmallForm::new(&form, &problem.min_square, problem.max_square.as_ref());
    let materialize = |y: &[i64]| {
        let mut v = x0.clone();
        for (yi, bi) in y.iter().zip(&basis) {
            if *yi != 0 {
                v = v.add(&bi.scale(&BigInt::from(*yi)));
            }
        }
        v
    };
    let r = i64::from(box_radius);
    let mut y = vec![-r; k];
    let mut stats = EnumerationStats { kernel_rank: k, ..Default::default() };
    let mut out = Vec::new();
    loop {
        stats.nodes += 1;
        let candidate = match &small {
            Some(f) if !f.in_range(&y) => None,
            _ => Some(materialize(&y)),
        };
        if let Some(v) = candidate {
            if problem.admits(&v)? {
                stats.leaves += 1;
                out.push(v);
            }
        }
        let mut i = 0;
        loop {
            if i == k {
                out.sort();
                out.dedup();
                return Ok(EnumerationResult { vectors: out, exhaustive, stats });
            }
            if y[i] < r {
                y[i] += 1;
                break;
            }
            y[i] = -r;
            i += 1;
        }
    }
}

/// Machine-integer copy of a coset form, used to prefilter box points when
/// every entry fits comfortably in `i64`.
struct SmallForm {
    s0: i128,
    b: Vec<i128>,
    q: Vec<Vec<i128>>,
    min: i128,
    max: Option<i128>,
}

impl SmallForm {
    fn new(form: &CosetForm, min: &BigInt, max: Option<&BigInt>) -> Option<Self> {
        let c = |x: &BigInt| x.to_i64().filter(|v| v.unsigned_abs() < 1 << 40).map(i128::from);
        let n = form.b.len();
        Some(SmallForm {
            s0: c(&form.s0)?,
            b: form.b.iter().map(c).collect::<Option<_>>()?,
            q: (0..n).map(|i| form.q.row(i).iter().map(c).collect::<Option<_>>()).collect::<Option<_>>()?,
            min: c(min)?,
            max: match max {
                Some(m) => Some(c(m)?),
                None => None,
            },
        })
    }

    fn in_range(&self, y: &[i64]) -> bool {
        let mut sq = self.s0;
        for (i, &yi) in y.iter().enumerate() {
            let yi = i128::from(yi);
            sq += 2 * self.b[i] * yi;
            let row: i128 = self.q[i].iter().zip(y).map(|(a, &yj)| a * i128::from(yj)).sum();
            sq -= yi * row;
        }
        sq >= self.min && self.max.is_none_or(|m| sq <= m)
    }
}
