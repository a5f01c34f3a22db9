//! Lattice-level bookkeeping for fixed loci of a finite group `G` acting on a
//! moduli space over `S`, seen through a derived equivalence with the
//! equivariant category on the quotient side `S'`.
//!
//! The input is a pair of Mukai lattices together with the forgetful map
//! `p : Λ' -> Λ`. Its adjoint `q` is derived, never trusted from input. From
//! there the fiber `R_v = p^{-1}(v)` is cut down to its semistable support,
//! reduced modulo the dual group, and each orbit is classified.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::enumerate::{enumerate_fiber, FiberProblem};
use crate::error::{Error, Result};
use crate::group_action::{invariant_sublattice, sum_over_group, GroupAction, Isometry};
use crate::lattice::{Lattice, LatticeVector, Layout, Sublattice};
use crate::linalg::{self, Matrix};

/// Lower bound on squares of classes that can carry stable objects.
pub const STABLE_SQUARE_BOUND: i64 = -2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceData {
    pub lambda: Lattice,
    pub lambda_prime: Lattice,
    /// Rows index `lambda`, columns `lambda_prime`.
    pub p_map: Matrix,
    pub group: GroupAction,
    pub dual_generators: Vec<Isometry>,
    pub brauer_trivial: bool,
    /// Whether `H^2(G, C^*)` vanishes, so that invariant objects linearize.
    pub schur_trivial: bool,
    /// Optional user-supplied adjoint, compared against the derived one.
    pub q_claimed: Option<Matrix>,
}

impl EquivalenceData {
    pub fn group_order(&self) -> usize {
        self.group.order()
    }

    fn check_shapes(&self) -> Result<()> {
        let (n, m) = (self.lambda.rank(), self.lambda_prime.rank());
        if self.p_map.rows() != n || self.p_map.cols() != m {
            return Err(Error::InvalidArgument(format!(
                "p must be {n}x{m}, got {}x{}",
                self.p_map.rows(),
                self.p_map.cols()
            )));
        }
        if self.group.ambient() != &self.lambda {
            return Err(Error::CrossAmbient);
        }
        if self.dual_generators.iter().any(|g| g.ambient() != &self.lambda_prime) {
            return Err(Error::CrossAmbient);
        }
        Ok(())
    }
}

/// The adjoint `q = G'^{-1} p^T G`, required to be integral.
pub fn adjoint_map(lambda: &Lattice, lambda_prime: &Lattice, p: &Matrix) -> Result<Matrix> {
    let rhs = p.transpose().mul(lambda.gram())?;
    let mut cols = Vec::with_capacity(rhs.cols());
    for j in 0..rhs.cols() {
        match linalg::solve_integral(lambda_prime.gram(), &rhs.column(j))? {
            Some(x) => cols.push(x),
            None => {
                return Err(Error::NonIntegralAdjoint(format!(
                    "column {j} of the adjoint has no integral solution"
                )))
            }
        }
    }
    Ok(Matrix::from_rows(cols, lambda_prime.rank())?.transpose())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Offending basis indices or entries when the check fails.
    pub failures: Vec<String>,
}

impl Check {
    fn new(name: &str, failures: Vec<String>) -> Self {
        Check { name: name.to_string(), passed: failures.is_empty(), failures }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub q_map: Matrix,
    pub invariant: Sublattice,
    pub l: Sublattice,
    /// Index of `q(Λ^G)` inside its saturation `L`.
    pub l_index: BigInt,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Basis of the row span of `m`'s columns, i.e. of the image of `m`.
fn image_basis(m: &Matrix) -> Matrix {
    linalg::hermite_normal_form(&m.transpose())
}

fn scaling_failures(
    outer: &Lattice,
    inner: &Lattice,
    map: &Matrix,
    basis: &[LatticeVector],
    factor: &BigInt,
) -> Result<Vec<String>> {
    let images = basis.iter().map(|b| Ok(LatticeVector(map.mul_vec(&b.0)?))).collect::<Result<Vec<_>>>()?;
    let mut bad = Vec::new();
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let lhs = outer.pair(&images[i], &images[j])?;
            let rhs = factor * inner.pair(&basis[i], &basis[j])?;
            if lhs != rhs {
                bad.push(format!("basis pair ({i},{j}): {lhs} != {rhs}"));
            }
        }
    }
    Ok(bad)
}

fn vanishing_failures(map: &Matrix, basis: &[LatticeVector]) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for (i, b) in basis.iter().enumerate() {
        let image = map.mul_vec(&b.0)?;
        if image.iter().any(|x| !x.is_zero()) {
            bad.push(format!("basis vector {i} {b} maps to {}", LatticeVector(image)));
        }
    }
    Ok(bad)
}

fn matrix_difference(label: &str, a: &Matrix, b: &Matrix) -> Vec<String> {
    let mut bad = Vec::new();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if a[(i, j)] != b[(i, j)] {
                bad.push(format!("{label} entry ({i},{j}): {} != {}", a[(i, j)], b[(i, j)]));
            }
        }
    }
    bad
}

/// Derives `q` and checks every compatibility between `p`, `q`, `G` and the
/// dual generators.
pub fn verify_equivalence_data(data: &EquivalenceData) -> Result<VerificationReport> {
    data.check_shapes()?;
    let lam = &data.lambda;
    let lamp = &data.lambda_prime;
    let p = &data.p_map;
    let q = adjoint_map(lam, lamp, p)?;
    let order = BigInt::from(data.group_order());
    let mut checks = Vec::new();

    if let Some(claimed) = &data.q_claimed {
        let bad = if claimed.rows() == q.rows() && claimed.cols() == q.cols() {
            matrix_difference("q", claimed, &q)
        } else {
            vec![format!("claimed q has shape {}x{}", claimed.rows(), claimed.cols())]
        };
        checks.push(Check::new("claimed q agrees with the derived adjoint", bad));
    }

    let pq = p.mul(&q)?;
    checks.push(Check::new("pq equals the group sum", matrix_difference("pq", &pq, &sum_over_group(&data.group))));

    let invariant = invariant_sublattice(&data.group)?;
    let inv_basis = invariant.basis_vectors();
    checks.push(Check::new("q scales the form on the invariant lattice by |G|", scaling_failures(lamp, lam, &q, &inv_basis, &order)?));

    let q_image = image_basis(&q);
    let l = lamp.sublattice(q_image)?.saturate();
    let l_basis = l.basis_vectors();
    checks.push(Check::new("p scales the form on L by |G|", scaling_failures(lam, lamp, p, &l_basis, &order)?));

    let l_perp = lamp.orthogonal_complement(&l)?;
    checks.push(Check::new("p vanishes on the complement of L", vanishing_failures(p, &l_perp.basis_vectors())?));

    let inv_perp = lam.orthogonal_complement(&invariant)?;
    checks.push(Check::new(
        "q vanishes on the complement of the invariant lattice",
        vanishing_failures(&q, &inv_perp.basis_vectors())?,
    ));

    let mut bad = Vec::new();
    for (k, g) in data.dual_generators.iter().enumerate() {
        if !g.verify_isometry() {
            bad.push(format!("dual generator {k} is not an isometry"));
            continue;
        }
        for msg in matrix_difference("pQ", &p.mul(g.matrix())?, p) {
            bad.push(format!("dual generator {k}: {msg}"));
        }
    }
    checks.push(Check::new("dual generators are isometries fixing p", bad));

    let q_inv_image = if invariant.rank() == 0 {
        BigInt::one()
    } else {
        let rows: Vec<Vec<BigInt>> = inv_basis.iter().map(|b| q.mul_vec(&b.0)).collect::<Result<_>>()?;
        let m = Matrix::from_rows(rows, lamp.rank())?;
        if linalg::rank(&m) == m.rows() {
            lamp.sublattice(m)?.saturation_index()
        } else {
            BigInt::zero()
        }
    };

    Ok(VerificationReport { q_map: q, invariant, l, l_index: q_inv_image, checks })
}

/// Declared splittings `v = u_1 + ... + u_m` of invariant classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecompositionTable(BTreeMap<LatticeVector, Vec<Vec<LatticeVector>>>);

impl DecompositionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, v: LatticeVector, parts: Vec<LatticeVector>) -> Result<()> {
        if parts.len() < 2 {
            return Err(Error::InvalidArgument("a decomposition needs at least two parts".into()));
        }
        let n = v.len();
        if parts.iter().any(|u| u.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: parts.iter().map(|u| u.len()).find(|&l| l != n).unwrap_or(n) });
        }
        let sum = parts.iter().skip(1).fold(parts[0].clone(), |acc, u| acc.add(u));
        if sum != v {
            return Err(Error::InvalidArgument(format!("parts do not sum to {v}")));
        }
        if parts.iter().any(|u| u.is_zero()) {
            return Err(Error::InvalidArgument("decomposition parts must be nonzero".into()));
        }
        self.0.entry(v).or_default().push(parts);
        Ok(())
    }

    pub fn get(&self, v: &LatticeVector) -> &[Vec<LatticeVector>] {
        self.0.get(v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticeVector, &Vec<Vec<LatticeVector>>)> {
        self.0.iter()
    }
}

/// Fiber vectors over `v` with square at least `min_square`.
pub fn fiber_over(data: &EquivalenceData, v: &LatticeVector, min_square: i64) -> Result<Vec<LatticeVector>> {
    let problem = FiberProblem::new(data.lambda_prime.clone(), data.p_map.clone(), v.clone(), min_square)?;
    Ok(enumerate_fiber(&problem)?.vectors)
}

/// Semistable support over `v`: fiber vectors of square at least `-2`,
/// together with every sum of support vectors over a declared decomposition.
pub fn compute_rv(data: &EquivalenceData, v: &LatticeVector, decompositions: &DecompositionTable) -> Result<Vec<LatticeVector>> {
    let mut stack = Vec::new();
    compute_rv_inner(data, v, decompositions, &mut stack)
}

fn compute_rv_inner(
    data: &EquivalenceData,
    v: &LatticeVector,
    table: &DecompositionTable,
    stack: &mut Vec<LatticeVector>,
) -> Result<Vec<LatticeVector>> {
    if stack.contains(v) {
        return Err(Error::InvalidArgument(format!("decomposition table is cyclic at {v}")));
    }
    let invariant = invariant_sublattice(&data.group)?;
    if !invariant.contains(v)? {
        return Err(Error::InvalidArgument(format!("{v} is not invariant under the group")));
    }
    let mut support: BTreeSet<LatticeVector> = fiber_over(data, v, STABLE_SQUARE_BOUND)?.into_iter().collect();
    stack.push(v.clone());
    for parts in table.get(v) {
        let mut sums: BTreeSet<LatticeVector> = BTreeSet::new();
        sums.insert(LatticeVector::zeros(data.lambda_prime.rank()));
        for u in parts {
            let rv = compute_rv_inner(data, u, table, stack)?;
            sums = sums.iter().flat_map(|s| rv.iter().map(move |w| s.add(w))).collect();
        }
        support.extend(sums);
    }
    stack.pop();
    Ok(support.into_iter().collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    pub representative: LatticeVector,
    pub members: Vec<LatticeVector>,
}

/// Orbits of the group generated by `generators` on a finite stable set.
/// Representatives are the lexicographically smallest members.
pub fn dual_orbits(vectors: &[LatticeVector], generators: &[Isometry]) -> Result<Vec<Orbit>> {
    let set: BTreeSet<LatticeVector> = vectors.iter().cloned().collect();
    for (k, g) in generators.iter().enumerate() {
        for v in &set {
            let image = g.apply(v)?;
            if !set.contains(&image) {
                return Err(Error::InvalidArgument(format!(
                    "generator {k} maps {v} to {image}, outside the vector set"
                )));
            }
        }
    }
    let mut seen: BTreeSet<LatticeVector> = BTreeSet::new();
    let mut orbits = Vec::new();
    for v in &set {
        if seen.contains(v) {
            continue;
        }
        let mut members = BTreeSet::new();
        let mut queue = VecDeque::from([v.clone()]);
        members.insert(v.clone());
        while let Some(x) = queue.pop_front() {
            for g in generators {
                let y = g.apply(&x)?;
                if members.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        seen.extend(members.iter().cloned());
        let members: Vec<LatticeVector> = members.into_iter().collect();
        orbits.push(Orbit { representative: members[0].clone(), members });
    }
    Ok(orbits)
}

/// Squares of the two summands of a splitting, larger first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SquarePair(pub BigInt, pub BigInt);

impl SquarePair {
    pub fn new(a: BigInt, b: BigInt) -> Self {
        if a >= b {
            SquarePair(a, b)
        } else {
            SquarePair(b, a)
        }
    }
}

impl fmt::Display for SquarePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |x: &BigInt| if x.is_negative() { format!("({x})") } else { x.to_string() };
        write!(f, "{}+{}", show(&self.0), show(&self.1))
    }
}

pub type Census = BTreeMap<SquarePair, u64>;

pub fn census_to_string(c: &Census) -> String {
    if c.is_empty() {
        return "-".into();
    }
    c.iter().map(|(k, n)| format!("{k}:{n}")).collect::<Vec<_>>().join(", ")
}

/// Unordered pairs `{w1, w2}` of distinct part vectors with `w1 + w2 = v`,
/// tallied by the squares of the summands.
pub fn decomposition_census(lattice: &Lattice, v: &LatticeVector, parts: &[LatticeVector]) -> Result<Census> {
    let set: BTreeSet<&LatticeVector> = parts.iter().collect();
    let mut census = Census::new();
    for &w1 in &set {
        let w2 = v.sub(w1);
        if w2 <= *w1 || !set.contains(&w2) {
            continue;
        }
        let key = SquarePair::new(lattice.square(w1)?, lattice.square(&w2)?);
        *census.entry(key).or_default() += 1;
    }
    Ok(census)
}

/// `(m, w)` with `v = m w`, `m >= 2` least possible and `w` a part vector.
pub fn sym_power(v: &LatticeVector, parts: &[LatticeVector]) -> Option<(u64, LatticeVector)> {
    let content = v.content();
    if content.is_zero() {
        return None;
    }
    let set: BTreeSet<&LatticeVector> = parts.iter().collect();
    let mut m = BigInt::from(2);
    while m <= content {
        if content.is_multiple_of(&m) {
            let w = LatticeVector(v.0.iter().map(|x| x / &m).collect());
            if set.contains(&w) {
                return Some((u64::try_from(&m).ok()?, w));
            }
        }
        m += 1;
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stratum {
    Stable,
    StrictlySemistable,
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stratum::Stable => "stable stratum",
            Stratum::StrictlySemistable => "contains strictly semistable points",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentRecord {
    pub representative: LatticeVector,
    pub orbit_size: usize,
    pub square: BigInt,
    pub dimension: BigInt,
    pub divisibility: BigInt,
    /// Divisibility against the Neron-Severi part alone, for Mukai layouts.
    pub ns_divisibility: Option<BigInt>,
    pub census: Census,
    pub sym_power: Option<(u64, LatticeVector)>,
    pub stratum: Stratum,
}

/// Records sharing square, census and symmetric-power shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassTotal {
    pub label: String,
    pub square: BigInt,
    pub dimension: BigInt,
    pub census: Census,
    /// Multiplicity `m` and the square of `w` for `v = m w`.
    pub sym_power: Option<(u64, BigInt)>,
    pub count: usize,
    pub divisibility_one: usize,
    pub ns_divisibility_one: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedLocusReport {
    pub vector: LatticeVector,
    pub support_size: usize,
    pub dual_group_order: usize,
    pub records: Vec<ComponentRecord>,
    pub classes: Vec<ClassTotal>,
    pub notes: Vec<String>,
}

impl FixedLocusReport {
    pub fn class(&self, label: &str) -> Option<&ClassTotal> {
        self.classes.iter().find(|c| c.label == label)
    }

    /// Records belonging to the class with the given label.
    pub fn records_in(&self, label: &str) -> Vec<&ComponentRecord> {
        match self.class(label) {
            Some(c) => self.records.iter().filter(|r| class_key(r) == class_key_of_total(c)).collect(),
            None => Vec::new(),
        }
    }

    /// Aligned text table, one line per class.
    pub fn table(&self) -> String {
        let mut out = format!("fixed locus over {} ({} support vectors, {} orbits)\n", self.vector, self.support_size, self.records.len());
        out.push_str(&format!(
            "{:<6} {:>6} {:>4} {:>6}  {:<28} {:<10} {:>6} {:>9}\n",
            "class", "square", "dim", "count", "census", "sym power", "div=1", "ns-div=1"
        ));
        for c in &self.classes {
            let sym = c.sym_power.as_ref().map(|(m, s)| format!("{m}*w, w^2={s}")).unwrap_or_else(|| "-".into());
            let ns = c.ns_divisibility_one.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<6} {:>6} {:>4} {:>6}  {:<28} {:<10} {:>6} {:>9}\n",
                format!("({})", c.label),
                c.square.to_string(),
                c.dimension.to_string(),
                c.count,
                census_to_string(&c.census),
                sym,
                c.divisibility_one,
                ns
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

type ClassKey = (std::cmp::Reverse<BigInt>, Option<(u64, BigInt)>, Vec<(SquarePair, u64)>);

fn class_key(r: &ComponentRecord) -> ClassKey {
    let sym = r.sym_power.as_ref().map(|(m, _)| (*m, &r.square / BigInt::from(m * m)));
    (std::cmp::Reverse(r.square.clone()), sym, r.census.iter().map(|(k, v)| (k.clone(), *v)).collect())
}

fn class_key_of_total(c: &ClassTotal) -> ClassKey {
    (std::cmp::Reverse(c.square.clone()), c.sym_power.clone(), c.census.iter().map(|(k, v)| (k.clone(), *v)).collect())
}

/// Lower-case roman numeral for `n >= 1`.
pub fn roman(mut n: usize) -> String {
    const TABLE: [(usize, &str); 13] = [
        (1000, "m"),
        (900, "cm"),
        (500, "d"),
        (400, "cd"),
        (100, "c"),
        (90, "xc"),
        (50, "l"),
        (40, "xl"),
        (10, "x"),
        (9, "ix"),
        (5, "v"),
        (4, "iv"),
        (1, "i"),
    ];
    let mut s = String::new();
    for (value, glyph) in TABLE {
        while n >= value {
            s.push_str(glyph);
            n -= value;
        }
    }
    s
}

/// Support, orbits, and per-orbit classification over `v`.
pub fn fixed_locus_report(data: &EquivalenceData, v: &LatticeVector, decompositions: &DecompositionTable) -> Result<FixedLocusReport> {
    let verification = verify_equivalence_data(data)?;
    if !verification.passed() {
        let names: Vec<&str> = verification.failed_checks().iter().map(|c| c.name.as_str()).collect();
        return Err(Error::InvalidArgument(format!("equivalence data fails: {}", names.join("; "))));
    }
    let lamp = &data.lambda_prime;
    let support = compute_rv(data, v, decompositions)?;
    let orbits = dual_orbits(&support, &data.dual_generators)?;
    let dual_order = crate::group_action::generate_group(
        lamp,
        data.dual_generators.clone(),
        crate::group_action::DEFAULT_GROUP_CAP,
    )?
    .order();

    let mut parts: BTreeSet<LatticeVector> = BTreeSet::new();
    let mut long_decompositions = false;
    for decomposition in decompositions.get(v) {
        if decomposition.len() > 2 {
            long_decompositions = true;
        }
        for u in decomposition {
            parts.extend(compute_rv(data, u, decompositions)?);
        }
    }
    let parts: Vec<LatticeVector> = parts.into_iter().collect();

    let mut records = Vec::with_capacity(orbits.len());
    for orbit in &orbits {
        let rep = &orbit.representative;
        let square = lamp.square(rep)?;
        let census = decomposition_census(lamp, rep, &parts)?;
        let sym = sym_power(rep, &parts);
        let stable = square >= BigInt::from(STABLE_SQUARE_BOUND) && census.is_empty() && sym.is_none();
        let (divisibility, ns_divisibility) = if rep.is_zero() {
            (BigInt::zero(), None)
        } else {
            let ns = match lamp.layout() {
                Layout::Mukai if lamp.rank() > 2 => Some(lamp.ns_divisibility(rep)?),
                _ => None,
            };
            (lamp.divisibility(rep)?, ns)
        };
        records.push(ComponentRecord {
            representative: rep.clone(),
            orbit_size: orbit.members.len(),
            dimension: &square + BigInt::from(2),
            square,
            divisibility,
            ns_divisibility,
            census,
            sym_power: sym,
            stratum: if stable { Stratum::Stable } else { Stratum::StrictlySemistable },
        });
    }
    records.sort_by(|a, b| class_key(a).cmp(&class_key(b)).then_with(|| a.representative.cmp(&b.representative)));

    let mut classes: Vec<ClassTotal> = Vec::new();
    for r in &records {
        let key = class_key(r);
        match classes.last_mut() {
            Some(c) if class_key_of_total(c) == key => {
                c.count += 1;
                c.divisibility_one += usize::from(r.divisibility.is_one());
                if let (Some(n), Some(d)) = (c.ns_divisibility_one.as_mut(), &r.ns_divisibility) {
                    *n += usize::from(d.is_one());
                }
            }
            _ => classes.push(ClassTotal {
                label: roman(classes.len() + 1),
                square: r.square.clone(),
                dimension: r.dimension.clone(),
                census: r.census.clone(),
                sym_power: key.1.clone(),
                count: 1,
                divisibility_one: usize::from(r.divisibility.is_one()),
                ns_divisibility_one: r.ns_divisibility.as_ref().map(|d| usize::from(d.is_one())),
            }),
        }
    }

    let mut notes = Vec::new();
    if records.iter().any(|r| r.stratum == Stratum::StrictlySemistable) {
        notes.push(
            "records with a nonempty census, a symmetric-power shape or square below -2 contain strictly semistable points; \
             stability of the remaining records presumes a generic stability condition"
                .to_string(),
        );
    }
    if records.iter().any(|r| dual_order % r.orbit_size != 0) {
        notes.push("some orbit size does not divide the dual group order".to_string());
    }
    if data.schur_trivial {
        notes.push(format!(
            "H^2(G, C*) declared trivial: invariant stable objects linearize and each fixed component is a torsor under the dual group of order {dual_order}"
        ));
    } else {
        notes.push("H^2(G, C*) not declared trivial: linearizability of invariant objects is not guaranteed".to_string());
    }
    if !data.brauer_trivial {
        notes.push("nontrivial Brauer class declared on the quotient side; counts refer to twisted objects".to_string());
    }
    if long_decompositions {
        notes.push("decompositions with more than two parts contribute to the support but not to the pair census".to_string());
    }

    Ok(FixedLocusReport {
        vector: v.clone(),
        support_size: support.len(),
        dual_group_order: dual_order,
        records,
        classes,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial_data(l: Lattice) -> EquivalenceData {
        let n = l.rank();
        EquivalenceData {
            lambda: l.clone(),
            lambda_prime: l.clone(),
            p_map: Matrix::identity(n),
            group: GroupAction::trivial(&l),
            dual_generators: vec![],
            brauer_trivial: true,
            schur_trivial: true,
            q_claimed: None,
        }
    }

    #[test]
    fn trivial_equivalence_passes() {
        let data = trivial_data(Lattice::hyperbolic_plane());
        let rep = verify_equivalence_data(&data).unwrap();
        assert!(rep.passed(), "{:?}", rep.failed_checks());
        assert_eq!(rep.q_map, Matrix::identity(2));
        assert_eq!(rep.l.rank(), 2);
        assert_eq!(rep.l_index, BigInt::one());
    }

    #[test]
    fn corrupted_p_is_reported() {
        let mut data = trivial_data(Lattice::hyperbolic_plane());
        data.p_map[(0, 1)] = BigInt::from(1);
        let rep = verify_equivalence_data(&data).unwrap();
        assert!(!rep.passed());
        assert!(rep.failed_checks().iter().any(|c| c.name.starts_with("pq")));
    }

    #[test]
    fn non_integral_adjoint_rejected() {
        let l = Lattice::diagonal(&[2]);
        let one = Lattice::diagonal(&[1]);
        let p = Matrix::from_i64(&[vec![1]]);
        assert!(matches!(adjoint_map(&one, &l, &p), Err(Error::NonIntegralAdjoint(_))));
    }

    #[test]
    fn e8_roots_modulo_negation() {
        let l = Lattice::e8().rescale(-2).unwrap();
        let p = FiberProblem::new(l.clone(), Matrix::zeros(0, 8), LatticeVector(vec![]), -4).unwrap().with_max_square(-4);
        let roots = enumerate_fiber(&p).unwrap().vectors;
        let orbits = dual_orbits(&roots, &[Isometry::negation(&l)]).unwrap();
        assert_eq!(orbits.len(), 120);
        assert!(orbits.iter().all(|o| o.members.len() == 2 && o.representative == o.members[0]));
    }

    #[test]
    fn trivial_dual_group_gives_singletons() {
        let v = vec![LatticeVector::from_i64(&[1, 0]), LatticeVector::from_i64(&[0, 1])];
        let orbits = dual_orbits(&v, &[]).unwrap();
        assert_eq!(orbits.len(), 2);
    }

    #[test]
    fn unstable_set_rejected() {
        let l = Lattice::diagonal(&[-1, -1]);
        let v = vec![LatticeVector::from_i64(&[1, 0])];
        assert!(dual_orbits(&v, &[Isometry::negation(&l)]).is_err());
    }

    #[test]
    fn census_counts_unordered_pairs() {
        let l = Lattice::diagonal(&[-1, -1]);
        let parts: Vec<LatticeVector> = [[1, 0], [0, 1], [1, 1], [0, 0]].iter().map(|c| LatticeVector::from_i64(c)).collect();
        let target = LatticeVector::from_i64(&[1, 1]);
        let c = decomposition_census(&l, &target, &parts).unwrap();
        assert_eq!(c.get(&SquarePair::new(BigInt::from(-1), BigInt::from(-1))), Some(&1));
        assert_eq!(c.get(&SquarePair::new(BigInt::from(0), BigInt::from(-2))), Some(&1));
        assert!(decomposition_census(&l, &target, &[]).unwrap().is_empty());
        assert_eq!(SquarePair::new(BigInt::from(-2), BigInt::zero()).to_string(), "0+(-2)");
    }

    #[test]
    fn sym_power_detection() {
        let parts = vec![LatticeVector::from_i64(&[1, 2])];
        assert_eq!(sym_power(&LatticeVector::from_i64(&[2, 4]), &parts), Some((2, parts[0].clone())));
        assert_eq!(sym_power(&LatticeVector::from_i64(&[1, 2]), &parts), None);
    }

    #[test]
    fn decomposition_table_validates_sums() {
        let mut t = DecompositionTable::new();
        let v = LatticeVector::from_i64(&[2, 0]);
        assert!(t.declare(v.clone(), vec![LatticeVector::from_i64(&[1, 0]), LatticeVector::from_i64(&[1, 1])]).is_err());
        t.declare(v.clone(), vec![LatticeVector::from_i64(&[1, 0]); 2]).unwrap();
        assert_eq!(t.get(&v).len(), 1);
    }

    #[test]
    fn roman_numerals() {
        assert_eq!(roman(1), "i");
        assert_eq!(roman(4), "iv");
        assert_eq!(roman(6), "vi");
        assert_eq!(roman(14), "xiv");
    }

    #[test]
    fn trivial_group_fiber_and_report() {
        let data = trivial_data(Lattice::diagonal(&[-1, -1]));
        let v = LatticeVector::from_i64(&[1, 0]);
        let rv = compute_rv(&data, &v, &DecompositionTable::new()).unwrap();
        assert_eq!(rv, vec![v.clone()]);
        let report = fixed_locus_report(&data, &v, &DecompositionTable::new()).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.records[0].orbit_size, 1);
        assert_eq!(report.records[0].dimension, BigInt::one());
        assert_eq!(report.records[0].stratum, Stratum::Stable);
        let far = LatticeVector::from_i64(&[2, 0]);
        assert!(compute_rv(&data, &far, &DecompositionTable::new()).unwrap().is_empty());
    }
}
