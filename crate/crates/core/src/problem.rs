//! The JSON problem format: named lattices, group actions, an optional
//! equivalence, declared decompositions and a task list with expectations.
//!
//! Integers are written as JSON numbers when they fit in 64 bits and as
//! decimal strings otherwise. Rationals are `[numerator, denominator]`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::enumerate::{brute_force_fiber, certified_box, enumerate_fiber, fiber_coset, FiberProblem};
use crate::error::{Error, Result};
use crate::eta::{self, QSeries};
use crate::group_action::{self, Frameshape, GroupAction, Isometry};
use crate::lattice::{mukai_lattice, Lattice, LatticeVector, Layout};
use crate::linalg::{Matrix, Rational};
use crate::moduli::{self, census_to_string, DecompositionTable, EquivalenceData, FixedLocusReport};
use crate::stability::{self, CentralCharge, GeometricCharge, SplittingMode};

pub const FORMAT_VERSION: &str = "1";

/// An integer that survives JSON without loss.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct JsonInt(pub BigInt);

impl Serialize for JsonInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(x) => s.serialize_i64(x),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for JsonInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(i64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(JsonInt(BigInt::from(x))),
            Repr::Str(s) => s.trim().parse::<BigInt>().map(JsonInt).map_err(serde::de::Error::custom),
        }
    }
}

fn ints(rows: &[Vec<JsonInt>]) -> Vec<Vec<BigInt>> {
    rows.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect()
}

pub fn int_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::from(x.to_string()),
    }
}

pub fn rational_json(x: &Rational) -> Value {
    json!([int_json(x.numer()), int_json(x.denom())])
}

pub fn vector_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(int_json).collect())
}

pub fn matrix_json(m: &Matrix) -> Value {
    Value::Array((0..m.rows()).map(|i| vector_json(m.row(i))).collect())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<JsonInt>>>,
    /// One of `U`, `E8`, `A1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<JsonInt>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mukai_of: Option<String>,
    /// Applied after construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub names: Vec<String>,
    /// Named classes given as expressions in the basis names.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aliases: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    /// Rows of the matrix acting on column vectors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<JsonInt>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<JsonInt>>,
    /// Basis vector `i` goes to `signs[i] * e_{permutation[i]}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i64>>,
    /// Images of the basis vectors, in vector syntax.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub lattice: String,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<JsonInt>>>,
    /// Images of the source basis vectors, in target vector syntax.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceSpec {
    pub lambda: String,
    pub lambda_prime: String,
    pub p: MapSpec,
    pub group: String,
    pub dual: String,
    #[serde(default = "yes")]
    pub brauer_trivial: bool,
    #[serde(default = "yes")]
    pub schur_trivial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<MapSpec>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionSpec {
    pub vector: String,
    pub parts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub functional: Vec<JsonInt>,
    pub value: JsonInt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    Verify {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Value>,
    },
    Frameshape {
        action: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Value>,
    },
    Invariant {
        action: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Value>,
    },
    Euler {
        frameshape: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v_square: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Value>,
    },
    Fiber {
        /// Defaults to the source of the equivalence.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lattice: Option<String>,
        /// Defaults to `p`; requires `codomain` otherwise.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<MapSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        codomain: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<String>,
        min_square: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_square: Option<i64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        constraints: Vec<ConstraintSpec>,
        /// Action whose generators partition the result into orbits.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        orbits_under: Option<String>,
        #[serde(default)]
        list: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Value>,
    },
    FixedLocus {
        vector: String,
        #[serde(default)]
        records: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Value>,
    },
    Charge {
        lattice: String,
        omega: String,
        beta: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        vectors: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        action: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Value>,
    },
    Genericity {
        lattice: String,
        omega: String,
        beta: String,
        vector: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        action: Option<String>,
        #[serde(default)]
        mode: SplittingMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Value>,
    },
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::Verify { .. } => "verify",
            TaskSpec::Frameshape { .. } => "frameshape",
            TaskSpec::Invariant { .. } => "invariant",
            TaskSpec::Euler { .. } => "euler",
            TaskSpec::Fiber { .. } => "fiber",
            TaskSpec::FixedLocus { .. } => "fixed-locus",
            TaskSpec::Charge { .. } => "charge",
            TaskSpec::Genericity { .. } => "genericity",
        }
    }

    pub fn expect(&self) -> Option<&Value> {
        match self {
            TaskSpec::Verify { expect }
            | TaskSpec::Frameshape { expect, .. }
            | TaskSpec::Invariant { expect, .. }
            | TaskSpec::Euler { expect, .. }
            | TaskSpec::Fiber { expect, .. }
            | TaskSpec::FixedLocus { expect, .. }
            | TaskSpec::Charge { expect, .. }
            | TaskSpec::Genericity { expect, .. } => expect.as_ref(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, Value>,
    #[serde(default)]
    pub lattices: BTreeMap<String, LatticeSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub actions: BTreeMap<String, ActionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decompositions: Vec<DecompositionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tasks: Vec<TaskSpec>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: ProblemFile = serde_json::from_str(text)?;
        if p.version != FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported format version `{}`", p.version)));
        }
        Ok(p)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Resolves every reference and builds every object, without running tasks.
    pub fn validate(&self, options: &RunOptions) -> Result<Context> {
        Context::build(self, options)
    }
}

const FIXTURES: [(&str, &str); 4] = [
    ("genus2", include_str!("../../../fixtures/genus2.json")),
    ("nikulin", include_str!("../../../fixtures/nikulin.json")),
    ("order11", include_str!("../../../fixtures/order11.json")),
    ("order2-frameshapes", include_str!("../../../fixtures/order2-frameshapes.json")),
];

pub fn fixture_names() -> Vec<&'static str> {
    FIXTURES.iter().map(|(n, _)| *n).collect()
}

pub fn fixture_source(name: &str) -> Result<&'static str> {
    let key = name.trim_end_matches(".json");
    let key = key.rsplit('/').next().unwrap_or(key);
    FIXTURES
        .iter()
        .find(|(n, _)| *n == key)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::UnknownReference(format!("fixture {name}")))
}

/// A shipped fixture, validated.
pub fn load_fixture(name: &str) -> Result<ProblemFile> {
    let p = ProblemFile::from_json(fixture_source(name)?)?;
    p.validate(&RunOptions::default())?;
    Ok(p)
}

/// A lattice together with the naming data used to read and print vectors.
#[derive(Clone, Debug)]
pub struct NamedLattice {
    pub lattice: Lattice,
    pub names: Vec<String>,
    pub aliases: BTreeMap<String, Vec<Rational>>,
    /// The Neron-Severi part when the lattice is a Mukai lattice.
    pub ns: Option<Box<NamedLattice>>,
}

impl NamedLattice {
    pub fn plain(lattice: Lattice) -> Self {
        NamedLattice { lattice, names: Vec::new(), aliases: BTreeMap::new(), ns: None }
    }

    fn lookup(&self, name: &str) -> Result<Vec<Rational>> {
        let n = self.lattice.rank();
        let hits: Vec<usize> = self.names.iter().enumerate().filter(|(_, x)| *x == name).map(|(i, _)| i).collect();
        match hits.len() {
            1 => {
                let mut v = vec![Rational::zero(); n];
                v[hits[0]] = Rational::one();
                Ok(v)
            }
            0 => self.aliases.get(name).cloned().ok_or_else(|| Error::UnknownReference(name.to_string())),
            _ => Err(Error::Parse(format!("basis name `{name}` is ambiguous"))),
        }
    }

    /// A linear expression such as `2C1' + E1 - 1/2*delta` or `0`.
    pub fn parse_expression(&self, text: &str) -> Result<Vec<Rational>> {
        let n = self.lattice.rank();
        let mut acc = vec![Rational::zero(); n];
        for (coef, name) in tokenize_expression(text)? {
            match name {
                Some(name) => {
                    let v = self.lookup(&name)?;
                    for (a, b) in acc.iter_mut().zip(v) {
                        *a += &coef * b;
                    }
                }
                None if coef.is_zero() => {}
                None => return Err(Error::Parse(format!("bare constant in class expression `{text}`"))),
            }
        }
        Ok(acc)
    }

    /// `[a, b, ...]` coordinates, `(r, D, s)` on Mukai lattices, or an expression.
    pub fn parse_rational_vector(&self, text: &str) -> Result<Vec<Rational>> {
        let t = text.trim();
        let n = self.lattice.rank();
        if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let parts: Vec<&str> = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').collect() };
            if parts.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: parts.len() });
            }
            return parts.iter().map(|p| parse_rational(p)).collect();
        }
        if let Some(inner) = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
            let Some(ns) = &self.ns else {
                return Err(Error::Parse(format!("`{t}`: (r, D, s) notation needs a Mukai lattice")));
            };
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("`{t}`: expected three components (r, D, s)")));
            }
            let mut v = vec![parse_rational(parts[0])?];
            v.extend(ns.parse_expression(parts[1])?);
            v.push(parse_rational(parts[2])?);
            return Ok(v);
        }
        self.parse_expression(t)
    }

    pub fn parse_vector(&self, text: &str) -> Result<LatticeVector> {
        let v = self.parse_rational_vector(text)?;
        if let Some(bad) = v.iter().find(|x| !x.is_integer()) {
            return Err(Error::Parse(format!("`{text}` has non-integral coordinate {bad}")));
        }
        Ok(LatticeVector(v.into_iter().map(|x| x.to_integer()).collect()))
    }

    fn combination(&self, coords: &[BigInt]) -> String {
        if self.names.len() != coords.len() || self.names.iter().collect::<BTreeSet<_>>().len() != self.names.len() {
            return LatticeVector(coords.to_vec()).to_string();
        }
        let mut s = String::new();
        for (c, name) in coords.iter().zip(&self.names) {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let coef = if mag.is_one() { String::new() } else { mag.to_string() };
            if s.is_empty() {
                if c.is_negative() {
                    s.push('-');
                }
            } else {
                s.push_str(if c.is_negative() { " - " } else { " + " });
            }
            s.push_str(&format!("{coef}{name}"));
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }

    /// Human-readable form, using names when available.
    pub fn format_vector(&self, v: &LatticeVector) -> String {
        match &self.ns {
            Some(ns) if v.len() == ns.lattice.rank() + 2 => {
                let n = v.len();
                format!("({}, {}, {})", v.0[0], ns.combination(&v.0[1..n - 1]), v.0[n - 1])
            }
            _ => self.combination(&v.0),
        }
    }
}

fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("`{t}` is not a rational number"));
    match t.split_once('/') {
        Some((a, b)) => {
            let den: BigInt = b.trim().parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(a.trim().parse().map_err(|_| bad())?, den))
        }
        None => Ok(Rational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

fn tokenize_expression(text: &str) -> Result<Vec<(Rational, Option<String>)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let err = |msg: &str| Error::Parse(format!("`{text}`: {msg}"));
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    skip_ws(&mut i);
    if i == chars.len() {
        return Err(err("empty expression"));
    }
    while i < chars.len() {
        let mut sign = 1i64;
        let mut saw_sign = false;
        loop {
            skip_ws(&mut i);
            match chars.get(i) {
                Some('+') => {
                    saw_sign = true;
                    i += 1;
                }
                Some('-') => {
                    saw_sign = true;
                    sign = -sign;
                    i += 1;
                }
                _ => break,
            }
        }
        if !out.is_empty() && !saw_sign {
            return Err(err("terms must be joined by + or -"));
        }
        skip_ws(&mut i);
        let start = i;
        while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '/') {
            i += 1;
        }
        let number: String = chars[start..i].iter().collect();
        skip_ws(&mut i);
        if chars.get(i) == Some(&'*') {
            i += 1;
            skip_ws(&mut i);
        }
        let nstart = i;
        if i < chars.len() && (chars[i].is_alphabetic() || chars[i] == '_') {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
        }
        let name: String = chars[nstart..i].iter().collect();
        if number.is_empty() && name.is_empty() {
            return Err(err("expected a coefficient or a class name"));
        }
        let coef = if number.is_empty() { Rational::one() } else { parse_rational(&number)? };
        out.push((coef * Rational::from_integer(sign.into()), if name.is_empty() { None } else { Some(name) }));
        skip_ws(&mut i);
    }
    Ok(out)
}

/// Tunables shared by every task.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub group_cap: usize,
    pub timing: bool,
    /// Run brute-force cross-checks alongside fiber and series tasks.
    pub oracle: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { group_cap: group_action::DEFAULT_GROUP_CAP, timing: false, oracle: false }
    }
}

/// Fully resolved problem state.
pub struct Context {
    pub lattices: BTreeMap<String, NamedLattice>,
    pub actions: BTreeMap<String, GroupAction>,
    pub equivalence: Option<(EquivalenceData, String, String)>,
    pub decompositions: DecompositionTable,
    options: RunOptions,
}

impl Context {
    fn build(p: &ProblemFile, options: &RunOptions) -> Result<Self> {
        let mut lattices = BTreeMap::new();
        for name in p.lattices.keys() {
            resolve_lattice(p, name, &mut lattices, &mut Vec::new())?;
        }
        let mut actions = BTreeMap::new();
        for (name, spec) in &p.actions {
            let nl = lattices.get(&spec.lattice).ok_or_else(|| Error::UnknownReference(spec.lattice.clone()))?;
            let gens = spec
                .generators
                .iter()
                .enumerate()
                .map(|(k, g)| build_generator(nl, g).map_err(|e| Error::InvalidArgument(format!("action {name}, generator {k}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            actions.insert(name.clone(), group_action::generate_group(&nl.lattice, gens, options.group_cap)?);
        }
        let equivalence = match &p.equivalence {
            None => None,
            Some(e) => {
                let lam = lattices.get(&e.lambda).ok_or_else(|| Error::UnknownReference(e.lambda.clone()))?;
                let lamp = lattices.get(&e.lambda_prime).ok_or_else(|| Error::UnknownReference(e.lambda_prime.clone()))?;
                let p_map = build_map(lamp, lam, &e.p)?;
                let q_claimed = e.q.as_ref().map(|q| build_map(lam, lamp, q)).transpose()?;
                let group = actions.get(&e.group).ok_or_else(|| Error::UnknownReference(e.group.clone()))?.clone();
                if group.ambient() != &lam.lattice {
                    return Err(Error::InvalidArgument(format!("action {} does not act on {}", e.group, e.lambda)));
                }
                let dual = actions.get(&e.dual).ok_or_else(|| Error::UnknownReference(e.dual.clone()))?;
                if dual.ambient() != &lamp.lattice {
                    return Err(Error::InvalidArgument(format!("action {} does not act on {}", e.dual, e.lambda_prime)));
                }
                let data = EquivalenceData {
                    lambda: lam.lattice.clone(),
                    lambda_prime: lamp.lattice.clone(),
                    p_map,
                    group,
                    dual_generators: dual.generators().to_vec(),
                    brauer_trivial: e.brauer_trivial,
                    schur_trivial: e.schur_trivial,
                    q_claimed,
                };
                Some((data, e.lambda.clone(), e.lambda_prime.clone()))
            }
        };
        let mut decompositions = DecompositionTable::new();
        if !p.decompositions.is_empty() {
            let Some((_, lam_name, _)) = &equivalence else {
                return Err(Error::InvalidArgument("decompositions need an equivalence".into()));
            };
            let lam = &lattices[lam_name];
            for d in &p.decompositions {
                let v = lam.parse_vector(&d.vector)?;
                let parts = d.parts.iter().map(|s| lam.parse_vector(s)).collect::<Result<Vec<_>>>()?;
                decompositions.declare(v, parts)?;
            }
        }
        let ctx = Context { lattices, actions, equivalence, decompositions, options: options.clone() };
        for (k, t) in p.tasks.iter().enumerate() {
            ctx.check_task(t).map_err(|e| Error::InvalidArgument(format!("task {k} ({}): {e}", t.kind())))?;
        }
        Ok(ctx)
    }

    pub fn lattice(&self, name: &str) -> Result<&NamedLattice> {
        self.lattices.get(name).ok_or_else(|| Error::UnknownReference(name.to_string()))
    }

    pub fn action(&self, name: &str) -> Result<&GroupAction> {
        self.actions.get(name).ok_or_else(|| Error::UnknownReference(name.to_string()))
    }

    pub fn equivalence(&self) -> Result<(&EquivalenceData, &NamedLattice, &NamedLattice)> {
        let Some((data, a, b)) = &self.equivalence else {
            return Err(Error::InvalidArgument("problem declares no equivalence".into()));
        };
        Ok((data, &self.lattices[a], &self.lattices[b]))
    }

    /// Static reference checks, run before any task executes.
    fn check_task(&self, t: &TaskSpec) -> Result<()> {
        match t {
            TaskSpec::Verify { .. } => {
                self.equivalence()?;
            }
            TaskSpec::Frameshape { action, .. } | TaskSpec::Invariant { action, .. } => {
                self.action(action)?;
            }
            TaskSpec::Euler { frameshape, .. } => {
                frameshape.parse::<Frameshape>()?;
            }
            TaskSpec::Fiber { lattice, map, codomain, target, orbits_under, .. } => {
                self.fiber_problem_parts(lattice.as_deref(), map.as_ref(), codomain.as_deref(), target.as_deref())?;
                if let Some(a) = orbits_under {
                    self.action(a)?;
                }
            }
            TaskSpec::FixedLocus { vector, .. } => {
                let (_, lam, _) = self.equivalence()?;
                lam.parse_vector(vector)?;
            }
            TaskSpec::Charge { lattice, omega, beta, vectors, action, .. } => {
                let nl = self.lattice(lattice)?;
                self.geometric_charge(nl, omega, beta)?;
                for v in vectors {
                    nl.parse_vector(v)?;
                }
                if let Some(a) = action {
                    self.action(a)?;
                }
            }
            TaskSpec::Genericity { lattice, omega, beta, vector, action, .. } => {
                let nl = self.lattice(lattice)?;
                self.geometric_charge(nl, omega, beta)?;
                nl.parse_vector(vector)?;
                if let Some(a) = action {
                    self.action(a)?;
                }
            }
        }
        Ok(())
    }

    fn geometric_charge(&self, nl: &NamedLattice, omega: &str, beta: &str) -> Result<GeometricCharge> {
        let Some(ns) = &nl.ns else {
            return Err(Error::InvalidArgument("charges are defined on Mukai lattices".into()));
        };
        GeometricCharge::new(ns.lattice.clone(), ns.parse_expression(omega)?, ns.parse_expression(beta)?)
    }

    fn fiber_problem_parts(
        &self,
        lattice: Option<&str>,
        map: Option<&MapSpec>,
        codomain: Option<&str>,
        target: Option<&str>,
    ) -> Result<(&NamedLattice, Matrix, LatticeVector)> {
        match (lattice, map) {
            (_, None) if lattice.is_none() || self.equivalence.as_ref().is_some_and(|e| Some(e.2.as_str()) == lattice) => {
                let (data, lam, lamp) = self.equivalence()?;
                let t = target.ok_or_else(|| Error::InvalidArgument("fiber over p needs a target".into()))?;
                Ok((lamp, data.p_map.clone(), lam.parse_vector(t)?))
            }
            (Some(name), None) => {
                let src = self.lattice(name)?;
                if target.is_some() {
                    return Err(Error::InvalidArgument("a target needs a map".into()));
                }
                Ok((src, Matrix::zeros(0, src.lattice.rank()), LatticeVector(Vec::new())))
            }
            (Some(name), Some(m)) => {
                let src = self.lattice(name)?;
                let cod = self.lattice(codomain.ok_or_else(|| Error::InvalidArgument("an explicit map needs a codomain".into()))?)?;
                let t = target.ok_or_else(|| Error::InvalidArgument("an explicit map needs a target".into()))?;
                Ok((src, build_map(src, cod, m)?, cod.parse_vector(t)?))
            }
            (None, Some(_)) => Err(Error::InvalidArgument("an explicit map needs a source lattice".into())),
            (None, None) => unreachable!("handled by the first arm"),
        }
    }

    pub fn options(&self) -> &RunOptions {
        &self.options
    }
}

fn resolve_lattice(
    p: &ProblemFile,
    name: &str,
    done: &mut BTreeMap<String, NamedLattice>,
    stack: &mut Vec<String>,
) -> Result<NamedLattice> {
    if let Some(l) = done.get(name) {
        return Ok(l.clone());
    }
    if stack.iter().any(|s| s == name) {
        return Err(Error::InvalidArgument(format!("lattice definitions are cyclic at {name}")));
    }
    let spec = p.lattices.get(name).ok_or_else(|| Error::UnknownReference(name.to_string()))?;
    stack.push(name.to_string());
    let sources = [spec.gram.is_some(), spec.standard.is_some(), spec.diagonal.is_some(), spec.sum.is_some(), spec.mukai_of.is_some()];
    if sources.iter().filter(|b| **b).count() != 1 {
        return Err(Error::InvalidArgument(format!(
            "lattice {name} needs exactly one of gram, standard, diagonal, sum, mukai_of"
        )));
    }
    let mut inherited_names = Vec::new();
    let mut inherited_aliases = BTreeMap::new();
    let mut ns = None;
    let mut lattice = if let Some(g) = &spec.gram {
        let rows = ints(g);
        let n = rows.len();
        Lattice::new(Matrix::from_rows(rows, n)?)?
    } else if let Some(s) = &spec.standard {
        match s.as_str() {
            "U" => Lattice::hyperbolic_plane(),
            "E8" => Lattice::e8(),
            "A1" => Lattice::a1(),
            other => return Err(Error::UnknownReference(format!("standard lattice {other}"))),
        }
    } else if let Some(d) = &spec.diagonal {
        Lattice::new(Matrix::diagonal(&d.iter().map(|x| x.0.clone()).collect::<Vec<_>>()))?
    } else if let Some(parts) = &spec.sum {
        let mut acc: Option<Lattice> = None;
        for part in parts {
            let nl = resolve_lattice(p, part, done, stack)?;
            if nl.names.len() == nl.lattice.rank() {
                inherited_names.extend(nl.names.iter().cloned());
            } else {
                inherited_names.extend((0..nl.lattice.rank()).map(|i| format!("{part}[{i}]")));
            }
            let offset = acc.as_ref().map_or(0, Lattice::rank);
            let total = offset + nl.lattice.rank();
            for (alias, v) in &nl.aliases {
                let mut w = vec![Rational::zero(); offset];
                w.extend(v.iter().cloned());
                inherited_aliases.insert(alias.clone(), w);
            }
            for w in inherited_aliases.values_mut() {
                w.resize(total, Rational::zero());
            }
            acc = Some(match acc {
                None => nl.lattice.clone(),
                Some(a) => a.orthogonal_sum(&nl.lattice),
            });
        }
        acc.ok_or_else(|| Error::InvalidArgument(format!("lattice {name} sums nothing")))?
    } else {
        let base = spec.mukai_of.as_ref().expect("one source is set");
        let nl = resolve_lattice(p, base, done, stack)?;
        let m = mukai_lattice(&nl.lattice)?;
        ns = Some(Box::new(nl));
        m
    };
    if let Some(k) = spec.scale {
        lattice = lattice.rescale(k)?;
    }
    if let Some(label) = &spec.label {
        lattice = lattice.with_label(label.clone());
    } else {
        lattice = lattice.with_label(name.to_string());
    }
    let names = if !spec.names.is_empty() {
        if spec.names.len() != lattice.rank() {
            return Err(Error::InvalidArgument(format!("lattice {name}: {} names for rank {}", spec.names.len(), lattice.rank())));
        }
        spec.names.clone()
    } else {
        inherited_names
    };
    let mut nl = NamedLattice { lattice, names, aliases: inherited_aliases, ns };
    // Aliases may refer to earlier aliases; resolve until stable.
    let mut pending: Vec<(&String, &String)> = spec.aliases.iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut next = Vec::new();
        for (alias, expr) in pending {
            match nl.parse_rational_vector(expr) {
                Ok(v) => {
                    nl.aliases.insert(alias.clone(), v);
                }
                Err(Error::UnknownReference(_)) => next.push((alias, expr)),
                Err(e) => return Err(e),
            }
        }
        if next.len() == before {
            let (alias, expr) = next[0];
            return Err(Error::UnknownReference(format!("alias {alias} = {expr} in lattice {name}")));
        }
        pending = next;
    }
    stack.pop();
    done.insert(name.to_string(), nl.clone());
    Ok(nl)
}

fn build_generator(nl: &NamedLattice, g: &GeneratorSpec) -> Result<Isometry> {
    let n = nl.lattice.rank();
    let set = [g.matrix.is_some(), g.diagonal.is_some(), g.permutation.is_some(), g.images.is_some()];
    if set.iter().filter(|b| **b).count() != 1 {
        return Err(Error::InvalidArgument("a generator needs exactly one of matrix, diagonal, permutation, images".into()));
    }
    if g.signs.is_some() && g.permutation.is_none() {
        return Err(Error::InvalidArgument("signs only accompany a permutation".into()));
    }
    let m = if let Some(rows) = &g.matrix {
        Matrix::from_rows(ints(rows), n)?
    } else if let Some(d) = &g.diagonal {
        if d.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: d.len() });
        }
        Matrix::diagonal(&d.iter().map(|x| x.0.clone()).collect::<Vec<_>>())
    } else if let Some(perm) = &g.permutation {
        if perm.len() != n || perm.iter().collect::<BTreeSet<_>>().len() != n || perm.iter().any(|&i| i >= n) {
            return Err(Error::InvalidArgument(format!("permutation must be a bijection of 0..{n}")));
        }
        let signs = g.signs.clone().unwrap_or_else(|| vec![1; n]);
        if signs.len() != n || signs.iter().any(|s| s.abs() != 1) {
            return Err(Error::InvalidArgument("signs must be n entries of +1 or -1".into()));
        }
        let mut m = Matrix::zeros(n, n);
        for (i, (&j, &s)) in perm.iter().zip(&signs).enumerate() {
            m[(j, i)] = BigInt::from(s);
        }
        m
    } else {
        let images = g.images.as_ref().expect("one source is set");
        build_map(nl, nl, &MapSpec { matrix: None, images: Some(images.clone()) })?
    };
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.rows() });
    }
    Isometry::checked(nl.lattice.clone(), m)
}

/// Matrix with rows indexing `target` and columns indexing `source`.
fn build_map(source: &NamedLattice, target: &NamedLattice, spec: &MapSpec) -> Result<Matrix> {
    let (n, m) = (target.lattice.rank(), source.lattice.rank());
    match (&spec.matrix, &spec.images) {
        (Some(rows), None) => {
            let mat = Matrix::from_rows(ints(rows), m)?;
            if mat.rows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: mat.rows() });
            }
            Ok(mat)
        }
        (None, Some(images)) => {
            if images.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: images.len() });
            }
            let cols = images.iter().map(|s| target.parse_vector(s).map(|v| v.0)).collect::<Result<Vec<_>>>()?;
            Ok(Matrix::from_rows(cols, n)?.transpose())
        }
        _ => Err(Error::InvalidArgument("a map needs exactly one of matrix, images".into())),
    }
}

/// Outcome of comparing a task result to its expectation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpectationOutcome {
    pub checked: bool,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<String>,
}

/// Every field in `expected` must be present and equal in `actual`; arrays
/// compare element-wise and must have the same length.
pub fn match_expectation(expected: &Value, actual: &Value) -> Vec<String> {
    let mut out = Vec::new();
    match_at("$", expected, actual, &mut out);
    out
}

fn match_at(path: &str, expected: &Value, actual: &Value, out: &mut Vec<String>) {
    match (expected, actual) {
        (Value::Object(e), Value::Object(a)) => {
            for (k, ev) in e {
                match a.get(k) {
                    Some(av) => match_at(&format!("{path}.{k}"), ev, av, out),
                    None => out.push(format!("{path}.{k}: missing")),
                }
            }
        }
        (Value::Array(e), Value::Array(a)) => {
            if e.len() != a.len() {
                out.push(format!("{path}: expected {} entries, found {}", e.len(), a.len()));
                return;
            }
            for (i, (ev, av)) in e.iter().zip(a).enumerate() {
                match_at(&format!("{path}[{i}]"), ev, av, out);
            }
        }
        (e, a) if e == a => {}
        (e, a) => out.push(format!("{path}: expected {e}, found {a}")),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub kind: String,
    pub result: Value,
    /// False when the computation itself reports a failed check.
    pub ok: bool,
    pub expectation: ExpectationOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u128>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    pub tasks: Vec<TaskReport>,
    pub passed: bool,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Validates the problem and executes its tasks in order. A task whose
/// computation fails is reported as failed; only validation errors abort.
pub fn run(problem: &ProblemFile, options: &RunOptions) -> Result<RunReport> {
    let ctx = problem.validate(options)?;
    run_tasks(&ctx, &problem.tasks, problem.name.clone())
}

pub fn run_tasks(ctx: &Context, tasks: &[TaskSpec], name: Option<String>) -> Result<RunReport> {
    let mut reports = Vec::with_capacity(tasks.len());
    for (index, task) in tasks.iter().enumerate() {
        let start = Instant::now();
        let (result, ok) = match execute(ctx, task) {
            Ok(r) => r,
            Err(e) => (json!({ "error": e.to_string() }), false),
        };
        let millis = ctx.options.timing.then(|| start.elapsed().as_millis());
        let expectation = match task.expect() {
            None => ExpectationOutcome { checked: false, passed: true, mismatches: Vec::new() },
            Some(e) => {
                let mismatches = match_expectation(e, &result);
                ExpectationOutcome { checked: true, passed: mismatches.is_empty(), mismatches }
            }
        };
        reports.push(TaskReport { index, kind: task.kind().to_string(), result, ok, expectation, millis });
    }
    let passed = reports.iter().all(|r| r.ok && r.expectation.passed);
    Ok(RunReport { problem: name, tasks: reports, passed })
}

/// Runs one task, returning its JSON result and whether its own checks held.
pub fn execute(ctx: &Context, task: &TaskSpec) -> Result<(Value, bool)> {
    match task {
        TaskSpec::Verify { .. } => {
            let (data, _, _) = ctx.equivalence()?;
            let rep = moduli::verify_equivalence_data(data)?;
            Ok((verification_json(&rep), rep.passed()))
        }
        TaskSpec::Frameshape { action, .. } => {
            let g = ctx.action(action)?;
            let mut shapes = Vec::new();
            for gen in g.generators() {
                let fs = group_action::frameshape_of(gen, ctx.options.group_cap)?;
                shapes.push(json!({
                    "frameshape": fs.to_string(),
                    "parts": fs.parts().iter().map(|(a, m)| (a.to_string(), Value::from(*m))).collect::<Map<_, _>>(),
                    "degree": fs.degree(),
                    "order": group_action::element_order(gen, ctx.options.group_cap)?,
                }));
            }
            Ok((json!({ "group_order": g.order(), "generators": shapes }), true))
        }
        TaskSpec::Invariant { action, .. } => {
            let g = ctx.action(action)?;
            let inv = group_action::invariant_sublattice(g)?;
            let fixed = g.elements().iter().all(|e| inv.basis_vectors().iter().all(|b| e.apply(b).ok().as_ref() == Some(b)));
            Ok((
                json!({
                    "rank": inv.rank(),
                    "basis": matrix_json(inv.basis()),
                    "gram": matrix_json(&inv.gram()),
                    "pointwise_fixed": fixed,
                }),
                fixed,
            ))
        }
        TaskSpec::Euler { frameshape, terms, v_square, .. } => {
            let fs: Frameshape = frameshape.parse()?;
            let terms = terms.unwrap_or(eta::DEFAULT_TERMS);
            let inv = eta::frameshape_eta_product(&fs, terms)?.invert()?;
            let mut out = series_json(&inv);
            let obj = out.as_object_mut().expect("object");
            obj.insert("frameshape".into(), Value::from(fs.to_string()));
            obj.insert("degree".into(), Value::from(fs.degree()));
            if let Some(v2) = v_square {
                obj.insert("v_square".into(), Value::from(*v2));
                obj.insert("euler_characteristic".into(), int_json(&eta::euler_char_fixed(&fs, *v2)?));
                obj.insert("conditional".into(), Value::from(true));
            }
            let mut ok = true;
            if ctx.options.oracle && fs.degree() == 24 {
                let lhs = inv.shift(1);
                let rhs = eta::eigenvalue_product_series(&fs, terms)?;
                let agree = lhs.coeffs() == rhs.coeffs() && lhs.offset_24() == rhs.offset_24();
                obj.insert("oracle".into(), json!({ "eigenvalue_product_agrees": agree }));
                ok = agree;
            }
            Ok((out, ok))
        }
        TaskSpec::Fiber { lattice, map, codomain, target, min_square, max_square, constraints, orbits_under, list, .. } => {
            let (src, m, t) = ctx.fiber_problem_parts(lattice.as_deref(), map.as_ref(), codomain.as_deref(), target.as_deref())?;
            let mut problem = FiberProblem::new(src.lattice.clone(), m, t, *min_square)?;
            if let Some(mx) = max_square {
                problem = problem.with_max_square(*mx);
            }
            for c in constraints {
                problem = problem.with_constraint(c.functional.iter().map(|x| x.0.clone()).collect(), c.value.0.clone())?;
            }
            let res = enumerate_fiber(&problem)?;
            let mut by_square: BTreeMap<BigInt, usize> = BTreeMap::new();
            for v in &res.vectors {
                *by_square.entry(src.lattice.square(v)?).or_default() += 1;
            }
            let mut out = json!({
                "count": res.vectors.len(),
                "kernel_rank": res.stats.kernel_rank,
                "nodes": res.stats.nodes,
                "by_square": by_square.iter().rev().map(|(s, n)| (s.to_string(), Value::from(*n))).collect::<Map<_, _>>(),
            });
            let obj = out.as_object_mut().expect("object");
            if let Some(a) = orbits_under {
                let gens = ctx.action(a)?.generators();
                let orbits = moduli::dual_orbits(&res.vectors, gens)?;
                obj.insert("orbit_count".into(), Value::from(orbits.len()));
            }
            if *list {
                obj.insert("vectors".into(), Value::Array(res.vectors.iter().map(|v| Value::from(src.format_vector(v))).collect()));
            }
            let mut ok = true;
            if ctx.options.oracle {
                let verdict = fiber_oracle(&problem, &res.vectors)?;
                ok = verdict.get("agrees").and_then(Value::as_bool).unwrap_or(true);
                obj.insert("oracle".into(), verdict);
            }
            Ok((out, ok))
        }
        TaskSpec::FixedLocus { vector, records, .. } => {
            let (data, lam, lamp) = ctx.equivalence()?;
            let v = lam.parse_vector(vector)?;
            let rep = moduli::fixed_locus_report(data, &v, &ctx.decompositions)?;
            Ok((fixed_locus_json(&rep, lam, lamp, *records), true))
        }
        TaskSpec::Charge { lattice, omega, beta, vectors, action, .. } => {
            let nl = ctx.lattice(lattice)?;
            let gc = ctx.geometric_charge(nl, omega, beta)?;
            let z = stability::charge_from_omega_beta(&gc)?;
            let mut out = charge_json(&z);
            let obj = out.as_object_mut().expect("object");
            let positive = stability::spans_positive_plane(&z);
            obj.insert("positive_plane".into(), Value::from(positive));
            if positive {
                let d = stability::in_distinguished_domain(&z)?;
                obj.insert(
                    "distinguished_domain".into(),
                    json!({
                        "inside": d.inside,
                        "complement_rank": d.complement_rank,
                        "witness": d.witness.as_ref().map(|w| nl.format_vector(w)),
                    }),
                );
            }
            if let Some(a) = action {
                obj.insert("g_fixed".into(), Value::from(stability::is_g_fixed(&z, ctx.action(a)?)?));
            }
            let mut values = Vec::new();
            for s in vectors {
                let v = nl.parse_vector(s)?;
                let zv = stability::evaluate(&z, &v)?;
                values.push(json!({ "vector": nl.format_vector(&v), "re": rational_json(&zv.re), "im": rational_json(&zv.im) }));
            }
            obj.insert("values".into(), Value::Array(values));
            Ok((out, true))
        }
        TaskSpec::Genericity { lattice, omega, beta, vector, action, mode, .. } => {
            let nl = ctx.lattice(lattice)?;
            let gc = ctx.geometric_charge(nl, omega, beta)?;
            let z = stability::charge_from_omega_beta(&gc)?;
            let v = nl.parse_vector(vector)?;
            let trivial = GroupAction::trivial(&nl.lattice);
            let g = match action {
                Some(a) => ctx.action(a)?,
                None => &trivial,
            };
            let rep = stability::is_g_sigma_generic(&z, &v, g, *mode)?;
            Ok((
                json!({
                    "vector": nl.format_vector(&v),
                    "mode": mode,
                    "generic": rep.generic,
                    "denominator": int_json(&rep.denominator),
                    "cosets_searched": rep.cosets_searched,
                    "witness": rep.witness.as_ref().map(|(a, b)| vec![nl.format_vector(a), nl.format_vector(b)]),
                }),
                true,
            ))
        }
    }
}

/// Compares the enumeration with a brute-force scan when a certified box is
/// small enough to scan.
/// Largest box the fiber cross-check scans inside a task run.
pub const ORACLE_POINT_LIMIT: u64 = 2_000_000;

pub fn fiber_oracle(problem: &FiberProblem, fast: &[LatticeVector]) -> Result<Value> {
    let mut system = problem.map.row_vecs();
    let mut rhs = problem.target.0.clone();
    for c in &problem.extra_constraints {
        system.push(c.functional.clone());
        rhs.push(c.value.clone());
    }
    let a = Matrix::from_rows(system, problem.source.rank())?;
    let Some((x0, kernel)) = fiber_coset(&problem.source, &a, &LatticeVector(rhs))? else {
        return Ok(json!({ "agrees": fast.is_empty(), "box_radius": 0 }));
    };
    let bounds = certified_box(&problem.source, &x0, &kernel, &problem.min_square)?;
    let radius = bounds.iter().max().cloned().unwrap_or_else(BigInt::zero).max(BigInt::one());
    let side: BigInt = BigInt::from(2) * &radius + 1;
    let points = num_traits::pow(side, kernel.rank());
    if points > BigInt::from(ORACLE_POINT_LIMIT) {
        return Ok(json!({ "skipped": format!("certified box of radius {radius} in rank {} is too large", kernel.rank()) }));
    }
    let r = radius.to_u32().expect("radius is small");
    let slow = brute_force_fiber(problem, r)?;
    Ok(json!({ "agrees": slow.exhaustive && slow.vectors == fast, "box_radius": r, "points": slow.stats.nodes }))
}

pub fn series_json(s: &QSeries) -> Value {
    json!({
        "offset_24": s.offset_24(),
        "coefficients": s.coeffs().iter().map(int_json).collect::<Vec<_>>(),
        "display": s.to_string(),
    })
}

pub fn verification_json(rep: &moduli::VerificationReport) -> Value {
    json!({
        "passed": rep.passed(),
        "q": matrix_json(&rep.q_map),
        "invariant_rank": rep.invariant.rank(),
        "l_rank": rep.l.rank(),
        "l_index": int_json(&rep.l_index),
        "checks": rep.checks,
    })
}

pub fn charge_json(z: &CentralCharge) -> Value {
    json!({
        "re": z.re().iter().map(rational_json).collect::<Vec<_>>(),
        "im": z.im().iter().map(rational_json).collect::<Vec<_>>(),
    })
}

pub fn fixed_locus_json(rep: &FixedLocusReport, lam: &NamedLattice, lamp: &NamedLattice, with_records: bool) -> Value {
    let census = |c: &moduli::Census| -> Value {
        Value::Object(c.iter().map(|(k, n)| (k.to_string(), Value::from(*n))).collect())
    };
    let classes: Vec<Value> = rep
        .classes
        .iter()
        .map(|c| {
            json!({
                "label": c.label,
                "square": int_json(&c.square),
                "dimension": int_json(&c.dimension),
                "count": c.count,
                "census": census(&c.census),
                "sym_power": c.sym_power.as_ref().map(|(m, s)| json!({ "multiplicity": m, "part_square": int_json(s) })),
                "divisibility_one": c.divisibility_one,
                "ns_divisibility_one": c.ns_divisibility_one,
            })
        })
        .collect();
    let mut out = json!({
        "vector": lam.format_vector(&rep.vector),
        "support_size": rep.support_size,
        "orbit_count": rep.records.len(),
        "dual_group_order": rep.dual_group_order,
        "classes": classes,
        "notes": rep.notes,
    });
    if with_records {
        let records: Vec<Value> = rep
            .records
            .iter()
            .map(|r| {
                json!({
                    "representative": lamp.format_vector(&r.representative),
                    "coords": vector_json(&r.representative.0),
                    "orbit_size": r.orbit_size,
                    "square": int_json(&r.square),
                    "dimension": int_json(&r.dimension),
                    "divisibility": int_json(&r.divisibility),
                    "ns_divisibility": r.ns_divisibility.as_ref().map(int_json),
                    "census": census(&r.census),
                    "sym_power": r.sym_power.as_ref().map(|(m, w)| json!({ "multiplicity": m, "part": lamp.format_vector(w) })),
                    "stratum": r.stratum,
                })
            })
            .collect();
        out.as_object_mut().expect("object").insert("records".into(), Value::Array(records));
    }
    out
}

/// Text table of a fixed-locus result as produced by [`fixed_locus_json`].
pub fn fixed_locus_table(rep: &FixedLocusReport) -> String {
    rep.table()
}

/// One-line description of a census, for tables.
pub fn census_line(c: &moduli::Census) -> String {
    census_to_string(c)
}

/// Whether the lattice is laid out as a Mukai lattice.
pub fn is_mukai(nl: &NamedLattice) -> bool {
    nl.lattice.layout() == Layout::Mukai
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ns() -> NamedLattice {
        let mut aliases = BTreeMap::new();
        aliases.insert("D".to_string(), vec![Rational::one(), Rational::one()]);
        NamedLattice { lattice: Lattice::diagonal(&[2, -2]), names: vec!["H".into(), "E".into()], aliases, ns: None }
    }

    fn mukai() -> NamedLattice {
        let n = ns();
        NamedLattice { lattice: mukai_lattice(&n.lattice).unwrap(), names: vec![], aliases: BTreeMap::new(), ns: Some(Box::new(n)) }
    }

    #[test]
    fn expressions() {
        let n = ns();
        let v = n.parse_expression("2H - E + 1/2*D").unwrap();
        assert_eq!(v, vec![Rational::new(5.into(), 2.into()), Rational::new((-1).into(), 2.into())]);
        assert_eq!(n.parse_expression("0").unwrap(), vec![Rational::zero(), Rational::zero()]);
        assert!(n.parse_expression("2H E").is_err());
        assert!(matches!(n.parse_expression("X"), Err(Error::UnknownReference(_))));
        assert!(n.parse_expression("3").is_err());
    }

    #[test]
    fn mukai_vectors() {
        let m = mukai();
        assert_eq!(m.parse_vector("(0,2H,0)").unwrap(), LatticeVector::from_i64(&[0, 2, 0, 0]));
        assert_eq!(m.parse_vector("(1, H - E, -3)").unwrap(), LatticeVector::from_i64(&[1, 1, -1, -3]));
        assert_eq!(m.parse_vector("[1,0,0,2]").unwrap(), LatticeVector::from_i64(&[1, 0, 0, 2]));
        assert!(m.parse_vector("(0,1/2*H,0)").is_err());
        assert!(m.parse_vector("[1,0]").is_err());
        assert_eq!(m.format_vector(&LatticeVector::from_i64(&[0, 2, -1, 1])), "(0, 2H - E, 1)");
    }

    #[test]
    fn expectation_matching() {
        let actual = json!({"a": 1, "b": [1, 2], "c": {"d": "x", "e": 3}});
        assert!(match_expectation(&json!({"a": 1, "c": {"d": "x"}}), &actual).is_empty());
        assert_eq!(match_expectation(&json!({"b": [1]}), &actual).len(), 1);
        assert_eq!(match_expectation(&json!({"z": 1}), &actual), vec!["$.z: missing".to_string()]);
    }

    #[test]
    fn big_integers_round_trip() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let s = serde_json::to_string(&JsonInt(big.clone())).unwrap();
        assert_eq!(s, "\"123456789012345678901234567890\"");
        let back: JsonInt = serde_json::from_str(&s).unwrap();
        assert_eq!(back.0, big);
        assert_eq!(serde_json::to_string(&JsonInt(BigInt::from(-7))).unwrap(), "-7");
    }
}
