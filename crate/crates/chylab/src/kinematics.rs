//! Kinematic space: Mandelstam invariants `s_ij`, planar variables `X_ij`,
//! the affine slices `H(c)`, and seeded random kinematics.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{adjacent, diagonals, enumerate_triangulations, Diagonal};
use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Field types used for kinematic data: exact rationals, reals and complex
/// doubles.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> {
    const EXACT: bool;
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> Complex64;
}

impl Scalar for Rational {
    const EXACT: bool = true;
    fn magnitude(&self) -> f64 {
        self.to_f64().unwrap_or(f64::INFINITY).abs()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

fn is_negligible<T: Scalar>(v: &T, scale: f64) -> bool {
    if T::EXACT {
        v.is_zero()
    } else {
        v.magnitude() <= 1e-9 * scale.max(1.0)
    }
}

/// A point of kinematic space: symmetric, zero diagonal, zero row sums.
/// Indices are 1-based in the accessors.
#[derive(Debug, Clone, PartialEq)]
pub struct MandelstamPoint<T> {
    n: usize,
    s: Vec<Vec<T>>,
}

impl<T: Scalar> MandelstamPoint<T> {
    pub fn new(n: usize, s: Vec<Vec<T>>) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidPolygon(n));
        }
        if s.len() != n || s.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("s must be {n}x{n}")));
        }
        let scale = s.iter().flatten().map(Scalar::magnitude).fold(0.0, f64::max) * n as f64;
        for i in 0..n {
            if !is_negligible(&s[i][i], scale) {
                return Err(Error::InvalidInput(format!("s_{{{0}{0}}} must vanish", i + 1)));
            }
            for j in 0..i {
                if !is_negligible(&(s[i][j].clone() - s[j][i].clone()), scale) {
                    return Err(Error::InvalidInput("s must be symmetric".into()));
                }
            }
            let row = s[i].iter().cloned().fold(T::zero(), |a, b| a + b);
            if !is_negligible(&row, scale) {
                return Err(Error::InvalidInput(format!("row {} of s does not sum to zero", i + 1)));
            }
        }
        Ok(MandelstamPoint { n, s })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `s_ij` with 1-based indices.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.s[i - 1][j - 1].clone()
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.s
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> MandelstamPoint<U> {
        MandelstamPoint { n: self.n, s: self.s.iter().map(|r| r.iter().map(&f).collect()).collect() }
    }

    pub fn to_complex(&self) -> MandelstamPoint<Complex64> {
        self.map(Scalar::to_c64)
    }

    pub fn scaled(&self, lambda: T) -> Self {
        self.map(|v| v.clone() * lambda.clone())
    }

    /// Relabels particle `i` as `i + k (mod n)`.
    pub fn rotate(&self, k: usize) -> Self {
        let n = self.n;
        let mut s = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                s[(i + k) % n][(j + k) % n] = self.s[i][j].clone();
            }
        }
        MandelstamPoint { n, s }
    }

    /// Largest row-sum magnitude, a conservation diagnostic.
    pub fn conservation_residual(&self) -> f64 {
        self.s
            .iter()
            .map(|r| r.iter().cloned().fold(T::zero(), |a, b| a + b).magnitude())
            .fold(0.0, f64::max)
    }
}

/// Planar variables indexed by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPoint<T> {
    n: usize,
    x: BTreeMap<Diagonal, T>,
}

impl<T: Scalar> PlanarPoint<T> {
    pub fn new(n: usize, x: BTreeMap<Diagonal, T>) -> Result<Self> {
        let diags = diagonals(n)?;
        if x.len() != diags.len() || diags.iter().any(|d| !x.contains_key(d)) {
            return Err(Error::InvalidInput(format!("need exactly the {} diagonals of the {n}-gon", diags.len())));
        }
        Ok(PlanarPoint { n, x })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(Diagonal) -> T) -> Result<Self> {
        let x = diagonals(n)?.into_iter().map(|d| (d, f(d))).collect();
        Ok(PlanarPoint { n, x })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `X_ij` with cyclic indices; zero on sides and on `i == j`.
    pub fn get(&self, i: usize, j: usize) -> T {
        let n = self.n;
        let (i, j) = ((i - 1) % n + 1, (j - 1) % n + 1);
        if i == j || adjacent(n, i, j) {
            return T::zero();
        }
        self.x[&Diagonal::from([i, j])].clone()
    }

    pub fn at(&self, d: &Diagonal) -> T {
        self.x[d].clone()
    }

    pub fn values(&self) -> &BTreeMap<Diagonal, T> {
        &self.x
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> PlanarPoint<U> {
        PlanarPoint { n: self.n, x: self.x.iter().map(|(d, v)| (*d, f(v))).collect() }
    }

    /// Relabels vertex `v` as `v + k (mod n)`.
    pub fn rotate(&self, k: usize) -> Self {
        PlanarPoint { n: self.n, x: self.x.iter().map(|(d, v)| (d.rotate(self.n, k), v.clone())).collect() }
    }
}

/// `X_ij = Σ_{i ≤ a < b ≤ j-1} s_ab`.
pub fn x_from_s<T: Scalar>(m: &MandelstamPoint<T>) -> PlanarPoint<T> {
    let n = m.n;
    let x = diagonals(n)
        .expect("n >= 4")
        .into_iter()
        .map(|d| {
            let mut acc = T::zero();
            for a in d.i..d.j {
                for b in a + 1..d.j {
                    acc = acc + m.get(a, b);
                }
            }
            (d, acc)
        })
        .collect();
    PlanarPoint { n, x }
}

/// `s_ij = X_{i,j+1} + X_{i+1,j} - X_ij - X_{i+1,j+1}`.
pub fn s_from_x<T: Scalar>(p: &PlanarPoint<T>) -> MandelstamPoint<T> {
    let n = p.n;
    let mut s = vec![vec![T::zero(); n]; n];
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                s[i - 1][j - 1] =
                    p.get(i, j + 1) + p.get(i + 1, j) - p.get(i, j) - p.get(i + 1, j + 1);
            }
        }
    }
    MandelstamPoint { n, s }
}

/// Constants `c_ij` fixing the slice `H(c)`, for `1 ≤ i < j-1 < j ≤ n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSpec<T> {
    pub n: usize,
    pub c: BTreeMap<(usize, usize), T>,
}

/// The index pairs carrying a constant of `H(c)`.
pub fn subspace_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 1..n {
        for j in i + 2..n {
            out.push((i, j));
        }
    }
    out
}

impl<T: Scalar> SubspaceSpec<T> {
    pub fn new(n: usize, c: BTreeMap<(usize, usize), T>) -> Result<Self> {
        let pairs = subspace_pairs(n);
        if c.len() != pairs.len() || pairs.iter().any(|p| !c.contains_key(p)) {
            return Err(Error::InvalidInput(format!("H(c) for n = {n} needs {} constants", pairs.len())));
        }
        Ok(SubspaceSpec { n, c })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.c[&(i.min(j), i.max(j))].clone()
    }

    pub fn contains(&self, p: &PlanarPoint<T>) -> bool {
        p.n() == self.n && c_from_s(&s_from_x(p)) == *self
    }
}

/// `c_ij = -s_ij` for `1 ≤ i < j-1 < j ≤ n-1`.
pub fn c_from_s<T: Scalar>(m: &MandelstamPoint<T>) -> SubspaceSpec<T> {
    let c = subspace_pairs(m.n).into_iter().map(|(i, j)| ((i, j), -m.get(i, j))).collect();
    SubspaceSpec { n: m.n, c }
}

/// Whether some term `∏_{d ∈ T} X_d` of the φ³ sum vanishes.
pub fn has_vanishing_denominator(p: &PlanarPoint<Rational>) -> bool {
    let ts = enumerate_triangulations(p.n()).expect("n >= 4");
    ts.iter().any(|t| t.diagonals.iter().any(|d| p.at(d).is_zero()))
}

const MAX_DRAWS: usize = 1000;

/// Integer planar variables drawn uniformly from `range` (inclusive),
/// redrawn while any `X_ij` is zero.
pub fn random_planar(n: usize, rng: &mut impl Rng, range: (i64, i64)) -> Result<PlanarPoint<Rational>> {
    if n < 4 {
        return Err(Error::InvalidPolygon(n));
    }
    let (lo, hi) = range;
    if lo > hi || (lo == 0 && hi == 0) {
        return Err(Error::GenerationFailure(format!("empty range [{lo}, {hi}]")));
    }
    for _ in 0..MAX_DRAWS {
        let p = PlanarPoint::from_fn(n, |_| rat(rng.random_range(lo..=hi)))?;
        if !has_vanishing_denominator(&p) {
            return Ok(p);
        }
    }
    Err(Error::GenerationFailure(format!("no generic draw in [{lo}, {hi}] after {MAX_DRAWS} attempts")))
}

/// Whether some multiparticle invariant `s_I = Σ_{a<b ∈ I} s_ab`,
/// `2 ≤ |I| ≤ n-2`, vanishes. Such points are not generic for the
/// scattering equations: solutions escape to collisions `σ_I → σ`.
pub fn has_vanishing_channel(m: &MandelstamPoint<Rational>) -> bool {
    let n = m.n;
    // Complements give the same invariant, so particle n is never in I.
    (1u32..1 << (n - 1)).any(|mask| {
        let size = mask.count_ones() as usize;
        if size < 2 || size > n - 2 {
            return false;
        }
        let idx: Vec<usize> = (0..n - 1).filter(|i| mask & (1 << i) != 0).collect();
        let mut total = Rational::zero();
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                total += &m.s[i][j];
            }
        }
        total.is_zero()
    })
}

/// Reproducible integer kinematics: `X_ij` uniform in `range`, then
/// converted to Mandelstams, so conservation holds exactly. Draws with a
/// vanishing channel are rejected.
pub fn random_point(n: usize, seed: u64, range: (i64, i64)) -> Result<MandelstamPoint<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        let m = s_from_x(&random_planar(n, &mut rng, range)?);
        if !has_vanishing_channel(&m) {
            return Ok(m);
        }
    }
    Err(Error::GenerationFailure(format!("no generic kinematics in {range:?} after {MAX_DRAWS} attempts")))
}

/// Positive rational planar variables `p/q` with `1 ≤ p ≤ max_num`,
/// `1 ≤ q ≤ max_den`.
pub fn random_positive_planar(n: usize, rng: &mut impl Rng, max_num: i64, max_den: i64) -> Result<PlanarPoint<Rational>> {
    PlanarPoint::from_fn(n, |_| ratio(rng.random_range(1..=max_num), rng.random_range(1..=max_den)))
}

/// Positive rational constants for `H(c)`.
pub fn random_positive_subspace(n: usize, rng: &mut impl Rng, max_num: i64) -> SubspaceSpec<Rational> {
    let c = subspace_pairs(n).into_iter().map(|p| (p, rat(rng.random_range(1..=max_num)))).collect();
    SubspaceSpec { n, c }
}

/// A point of `H(c)`: the fan coordinates `X_13, .., X_1,n-1` are free and
/// the remaining planar variables follow from the slice relations.
pub fn point_on_subspace<T: Scalar>(c: &SubspaceSpec<T>, fan_values: &[T]) -> Result<PlanarPoint<T>> {
    let n = c.n;
    if fan_values.len() != n - 3 {
        return Err(Error::InvalidInput(format!("need {} fan coordinates", n - 3)));
    }
    // X_{i+1,j+1} = c_ij - X_ij + X_{i,j+1} + X_{i+1,j}, filled row by row.
    let mut x: BTreeMap<Diagonal, T> = BTreeMap::new();
    for (k, v) in fan_values.iter().enumerate() {
        x.insert(Diagonal { i: 1, j: k + 3 }, v.clone());
    }
    let get = |x: &BTreeMap<Diagonal, T>, i: usize, j: usize| -> T {
        if i == j || adjacent(n, i, j) {
            T::zero()
        } else {
            x[&Diagonal::from([i, j])].clone()
        }
    };
    for i in 1..n - 1 {
        for j in i + 2..n {
            let target = Diagonal::from([i + 1, j + 1]);
            if adjacent(n, i + 1, j + 1) {
                continue;
            }
            let v = c.get(i, j) - get(&x, i, j) + get(&x, i, j + 1) + get(&x, i + 1, j);
            x.insert(target, v);
        }
    }
    PlanarPoint::new(n, x)
}

/// Rational JSON encoding: integers as numbers, other values as `"p/q"`.
pub fn rational_to_json(v: &Rational) -> serde_json::Value {
    match (v.is_integer(), v.to_integer().to_i64()) {
        (true, Some(k)) => k.into(),
        _ => v.to_string().into(),
    }
}

/// Accepts integers, `"p/q"` strings and floats (converted exactly).
pub fn rational_from_json(v: &serde_json::Value) -> Result<Rational> {
    let bad = || Error::InvalidInput(format!("not a rational number: {v}"));
    match v {
        serde_json::Value::Number(num) => match num.as_i64() {
            Some(k) => Ok(rat(k)),
            None => num.as_f64().and_then(BigRational::from_float).ok_or_else(bad),
        },
        serde_json::Value::String(s) => s.trim().parse::<Rational>().map_err(|_| bad()),
        _ => Err(bad()),
    }
}

/// `{"n": 5, "X": {"1,3": 2, ..}}`.
pub fn planar_to_json(p: &PlanarPoint<Rational>) -> serde_json::Value {
    let x: serde_json::Map<String, serde_json::Value> =
        p.x.iter().map(|(d, v)| (d.to_string(), rational_to_json(v))).collect();
    serde_json::json!({ "n": p.n, "X": x })
}

pub fn planar_from_json(v: &serde_json::Value) -> Result<PlanarPoint<Rational>> {
    let n = json_n(v)?;
    let x = v
        .get("X")
        .and_then(|x| x.as_object())
        .ok_or_else(|| Error::InvalidInput("missing object \"X\"".into()))?;
    let mut map = BTreeMap::new();
    for (key, val) in x {
        map.insert(Diagonal::parse_key(n, key)?, rational_from_json(val)?);
    }
    PlanarPoint::new(n, map)
}

/// `{"n": 5, "s": [[0, ..], ..]}`.
pub fn mandelstam_to_json(m: &MandelstamPoint<Rational>) -> serde_json::Value {
    let s: Vec<Vec<serde_json::Value>> = m.s.iter().map(|r| r.iter().map(rational_to_json).collect()).collect();
    serde_json::json!({ "n": m.n, "s": s })
}

pub fn mandelstam_from_json(v: &serde_json::Value) -> Result<MandelstamPoint<Rational>> {
    let n = json_n(v)?;
    let rows = v
        .get("s")
        .and_then(|s| s.as_array())
        .ok_or_else(|| Error::InvalidInput("missing array \"s\"".into()))?;
    let s = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::InvalidInput("rows of \"s\" must be arrays".into()))?
                .iter()
                .map(rational_from_json)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    MandelstamPoint::new(n, s)
}

/// Reads either encoding; `"X"` wins when both are present.
pub fn kinematics_from_json(v: &serde_json::Value) -> Result<PlanarPoint<Rational>> {
    if v.get("X").is_some() {
        planar_from_json(v)
    } else {
        mandelstam_from_json(v).map(|m| x_from_s(&m))
    }
}

fn json_n(v: &serde_json::Value) -> Result<usize> {
    v.get("n")
        .and_then(|n| n.as_u64())
        .map(|n| n as usize)
        .ok_or_else(|| Error::InvalidInput("missing integer \"n\"".into()))
}
