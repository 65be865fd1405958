//! u-equation systems `R_i = u_i + ∏_{j ≁ i} u_j^{a_ij} - 1` over flag
//! complexes, their restrictions to strata, numerical witnesses and
//! tropical pre-varieties.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{diagonals, SimplicialComplex};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UEquationSystem {
    pub complex: SimplicialComplex,
    /// `a_ij` for every ordered incompatible pair `(i, j)`.
    pub exponents: BTreeMap<(usize, usize), u32>,
}

impl UEquationSystem {
    pub fn new(complex: SimplicialComplex, exponents: BTreeMap<(usize, usize), u32>) -> Result<Self> {
        if !complex.is_flag() {
            return Err(Error::InvalidInput("u-equations need a flag complex".into()));
        }
        Self::new_allowing_nonflag(complex, exponents)
    }

    /// Skips the flag check; the equations still make sense.
    pub fn new_allowing_nonflag(complex: SimplicialComplex, exponents: BTreeMap<(usize, usize), u32>) -> Result<Self> {
        let m = complex.vertices.len();
        for i in 0..m {
            for j in 0..m {
                let incompatible = !complex.compatible(i, j);
                match exponents.get(&(i, j)) {
                    Some(0) => return Err(Error::InvalidInput(format!("exponent a_{i}{j} must be >= 1"))),
                    Some(_) if !incompatible => {
                        return Err(Error::InvalidInput(format!("exponent given for compatible pair ({i}, {j})")))
                    }
                    None if incompatible => return Err(Error::InvalidInput(format!("missing exponent for ({i}, {j})"))),
                    _ => {}
                }
            }
        }
        Ok(UEquationSystem { complex, exponents })
    }

    /// Exponent 1 on every incompatible pair.
    pub fn unit(complex: SimplicialComplex) -> Result<Self> {
        let m = complex.vertices.len();
        let exponents = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .filter(|&(i, j)| !complex.compatible(i, j))
            .map(|p| (p, 1))
            .collect();
        Self::new(complex, exponents)
    }

    pub fn len(&self) -> usize {
        self.complex.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dimension the solution set should have: `dim Δ + 1`.
    pub fn expected_dimension(&self) -> usize {
        (self.complex.dim() + 1) as usize
    }

    fn incompatible(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exponents.range((i, 0)..(i + 1, 0)).map(|(&(_, j), &a)| (j, a))
    }

    pub fn residuals(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.len() {
            return Err(Error::InvalidInput(format!("expected {} coordinates, got {}", self.len(), u.len())));
        }
        Ok((0..self.len())
            .map(|i| u[i] + self.incompatible(i).map(|(j, a)| u[j].powi(a as i32)).product::<f64>() - 1.0)
            .collect())
    }

    /// `∂R_i/∂u_k`.
    pub fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let m = self.len();
        let mut jac = DMatrix::zeros(m, m);
        for i in 0..m {
            jac[(i, i)] = 1.0;
            let factors: Vec<(usize, u32)> = self.incompatible(i).collect();
            for (k, &(j, a)) in factors.iter().enumerate() {
                let mut d = a as f64 * u[j].powi(a as i32 - 1);
                for (l, &(jj, aa)) in factors.iter().enumerate() {
                    if l != k {
                        d *= u[jj].powi(aa as i32);
                    }
                }
                jac[(i, j)] += d;
            }
        }
        jac
    }

    /// The system on the stratum `u_f = 0`: vertices of the link, with the
    /// vertices outside the link set to 1.
    pub fn restrict_to_stratum(&self, face: &[usize]) -> Result<UEquationSystem> {
        let link = self.complex.link(face)?;
        let old: Vec<usize> = link
            .vertices
            .iter()
            .map(|l| self.complex.vertex_index(l).expect("link vertices come from the complex"))
            .collect();
        let mut exponents = BTreeMap::new();
        for (a, &i) in old.iter().enumerate() {
            for (b, &j) in old.iter().enumerate() {
                if let Some(&e) = self.exponents.get(&(i, j)) {
                    exponents.insert((a, b), e);
                }
            }
        }
        Self::new_allowing_nonflag(link, exponents)
    }

    pub fn restrict_by_labels(&self, labels: &[&str]) -> Result<UEquationSystem> {
        self.restrict_to_stratum(&self.complex.labels_to_face(labels)?)
    }

    /// Newton witness: fix `dim Δ + 1` coordinates and solve the remaining
    /// overdetermined system by Gauss–Newton, starting from all coordinates
    /// 0.5 and then from seeded random starts in `(0, 1)`.
    pub fn sample_solution(&self, fixed: &[(usize, f64)], seed: u64) -> Result<Vec<f64>> {
        if fixed.len() != self.expected_dimension() {
            return Err(Error::InvalidInput(format!(
                "fix exactly {} coordinates, got {}",
                self.expected_dimension(),
                fixed.len()
            )));
        }
        let m = self.len();
        let fixed_map: BTreeMap<usize, f64> = fixed.iter().copied().collect();
        if fixed_map.len() != fixed.len() || fixed_map.keys().any(|&k| k >= m) {
            return Err(Error::InvalidInput("fixed coordinates must be distinct vertices".into()));
        }
        let free: Vec<usize> = (0..m).filter(|k| !fixed_map.contains_key(k)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for attempt in 0..=MAX_RESTARTS {
            let mut u = vec![0.5; m];
            for (&k, &v) in &fixed_map {
                u[k] = v;
            }
            if attempt > 0 {
                for &k in &free {
                    u[k] = rng.random_range(0.0..1.0);
                }
            }
            if let Some(sol) = self.gauss_newton(u, &free) {
                return Ok(sol);
            }
        }
        Err(Error::NoWitness(format!("Gauss-Newton did not converge after {MAX_RESTARTS} restarts")))
    }

    fn gauss_newton(&self, mut u: Vec<f64>, free: &[usize]) -> Option<Vec<f64>> {
        for _ in 0..100 {
            let r = self.residuals(&u).ok()?;
            let norm = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if !norm.is_finite() {
                return None;
            }
            if norm < WITNESS_TOL {
                return Some(u);
            }
            let full = self.jacobian(&u);
            let jac = DMatrix::from_fn(full.nrows(), free.len(), |i, k| full[(i, free[k])]);
            let step = jac.svd(true, true).solve(&(-DVector::from_vec(r)), 1e-14).ok()?;
            let scale = step.amax().max(1.0);
            for (k, &col) in free.iter().enumerate() {
                u[col] += step[k] / scale;
            }
        }
        None
    }

    /// Every face `F` gives the cone spanned by the basis vectors `e_i`,
    /// `i ∈ F`.
    pub fn tropical_prevariety(&self) -> Vec<Cone> {
        self.complex.faces().into_iter().map(|face| Cone { face }).collect()
    }

    /// Whether `U` lies on every tropical hypersurface
    /// `min(U_i, Σ_j a_ij U_j, 0)` (minimum attained at least twice).
    pub fn in_tropical_prevariety(&self, big_u: &[f64]) -> bool {
        let tol = 1e-12 * big_u.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        (0..self.len()).all(|i| {
            let product: f64 = self.incompatible(i).map(|(j, a)| a as f64 * big_u[j]).sum();
            let vals = [big_u[i], product, 0.0];
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            vals.iter().filter(|v| (*v - min).abs() <= tol).count() >= 2
        })
    }
}

/// Seeded random restarts after the start at 0.5.
pub const MAX_RESTARTS: usize = 20;
pub const WITNESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cone {
    pub face: Vec<usize>,
}

impl Cone {
    pub fn dim(&self) -> usize {
        self.face.len()
    }

    pub fn contains(&self, big_u: &[f64]) -> bool {
        big_u.iter().enumerate().all(|(k, &v)| if self.face.binary_search(&k).is_ok() { v >= 0.0 } else { v == 0.0 })
    }
}

/// JSON form: `{"vertices": [...], "facets": [[...]], "exponents": {"i,j": a}}`
/// over vertex labels; `vertices` defaults to the labels used by the facets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
    pub facets: Vec<Vec<String>>,
    pub exponents: BTreeMap<String, u32>,
}

impl TryFrom<SystemJson> for UEquationSystem {
    type Error = Error;
    fn try_from(j: SystemJson) -> Result<Self> {
        let vertices = j.vertices.unwrap_or_else(|| {
            let set: BTreeSet<&String> = j.facets.iter().flatten().collect();
            set.into_iter().cloned().collect()
        });
        let complex = SimplicialComplex::from_labels(vertices, j.facets)?;
        let mut exponents = BTreeMap::new();
        for (key, a) in j.exponents {
            exponents.insert(split_pair_key(&complex, &key)?, a);
        }
        UEquationSystem::new(complex, exponents)
    }
}

impl From<&UEquationSystem> for SystemJson {
    fn from(s: &UEquationSystem) -> Self {
        let label = |k: usize| s.complex.vertices[k].clone();
        SystemJson {
            vertices: Some(s.complex.vertices.clone()),
            facets: s.complex.facets.iter().map(|f| f.iter().map(|&v| label(v)).collect()).collect(),
            exponents: s.exponents.iter().map(|(&(i, j), &a)| (format!("{},{}", label(i), label(j)), a)).collect(),
        }
    }
}

/// Splits `"a,b"` at the comma that leaves two known labels, so labels may
/// themselves contain commas.
fn split_pair_key(c: &SimplicialComplex, key: &str) -> Result<(usize, usize)> {
    key.match_indices(',')
        .find_map(|(pos, _)| Some((c.vertex_index(&key[..pos])?, c.vertex_index(&key[pos + 1..])?)))
        .ok_or_else(|| Error::InvalidInput(format!("cannot read exponent key {key:?}")))
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Systems `u_i + u_{i+1} v_{i+1} .. = 1` on the `2m`-gon with vertices
/// `u1, v1, u2, v2, ..` in cyclic order; `pattern[k]` is the exponent on the
/// `(k+2)`-th vertex after the one being solved for.
fn polygon_system(m: usize, u_pattern: &[u32], v_pattern: &[u32]) -> Result<UEquationSystem> {
    let size = 2 * m;
    let names: Vec<String> = (1..=m).flat_map(|i| [format!("u{i}"), format!("v{i}")]).collect();
    let facets = (0..size).map(|k| vec![k, (k + 1) % size]).collect();
    let complex = SimplicialComplex::new(names, facets)?;
    let mut exponents = BTreeMap::new();
    for k in 0..size {
        let pattern = if k % 2 == 0 { u_pattern } else { v_pattern };
        for (step, &a) in pattern.iter().enumerate() {
            exponents.insert((k, (k + 2 + step) % size), a);
        }
    }
    UEquationSystem::new(complex, exponents)
}

/// The `u`-equations of `M0,n`: vertices are diagonals `"i,j"` and every
/// crossing pair has exponent 1.
pub fn m0n_system(n: usize) -> Result<UEquationSystem> {
    diagonals(n)?;
    UEquationSystem::unit(SimplicialComplex::associahedron(n)?)
}

/// `"square"`, `"hexagon"`, `"octagon"`, `"pell3"`, or `"M0n(<n>)"`.
pub fn builtin(name: &str) -> Result<UEquationSystem> {
    match name {
        "square" => {
            let complex = SimplicialComplex::new(labels(&["1", "2", "3", "4"]), vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]])?;
            UEquationSystem::unit(complex)
        }
        // u_i + u_{i+1} v_{i+1} u_{i+2} = 1, v_i + v_{i+1} u_{i+2}² v_{i+2} = 1
        "hexagon" => polygon_system(3, &[1, 1, 1], &[1, 2, 1]),
        // u_i + u_{i+1} v_{i+1} u_{i+2}² v_{i+2} u_{i+3} = 1,
        // v_i + v_{i+1} u_{i+2}³ v_{i+2}² u_{i+3}³ v_{i+3} = 1
        "octagon" => polygon_system(4, &[1, 1, 2, 1, 1], &[1, 3, 2, 3, 1]),
        "pell3" => {
            let facets = ["123", "124", "135", "147", "157", "236", "246", "358", "368", "468", "478", "578"]
                .iter()
                .map(|f| f.bytes().map(|b| (b - b'1') as usize).collect())
                .collect();
            let complex = SimplicialComplex::new(labels(&["1", "2", "3", "4", "5", "6", "7", "8"]), facets)?;
            UEquationSystem::unit(complex)
        }
        other => {
            let n = other
                .strip_prefix("M0n(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|r| r.trim().parse::<usize>().ok())
                .ok_or_else(|| Error::InvalidInput(format!("unknown system {other:?}")))?;
            m0n_system(n)
        }
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["square", "hexagon", "octagon", "pell3"];

/// Witness sweep used by the CLI and the acceptance suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryReport {
    pub name: String,
    pub vertices: usize,
    pub dim: isize,
    pub flag: bool,
    pub pure: bool,
    pub pseudomanifold: bool,
    pub witnesses: usize,
    pub attempts: usize,
    pub max_residual: f64,
}

/// Fixes the coordinates of the first facet to random values in
/// `[0.1, 0.9]` and samples a solution, `trials` times.
pub fn witness_report(name: &str, sys: &UEquationSystem, trials: usize, seed: u64) -> BinaryReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = sys.complex.facets.first().cloned().unwrap_or_default();
    let (mut witnesses, mut max_residual) = (0, 0.0f64);
    for t in 0..trials {
        let fixed: Vec<(usize, f64)> = chart.iter().map(|&k| (k, rng.random_range(0.1..0.9))).collect();
        if let Ok(u) = sys.sample_solution(&fixed, seed.wrapping_add(t as u64)) {
            let r = sys.residuals(&u).expect("sized");
            max_residual = r.iter().fold(max_residual, |a, v| a.max(v.abs()));
            witnesses += 1;
        }
    }
    BinaryReport {
        name: name.to_string(),
        vertices: sys.len(),
        dim: sys.complex.dim(),
        flag: sys.complex.is_flag(),
        pure: sys.complex.is_pure(),
        pseudomanifold: sys.complex.is_pseudomanifold(),
        witnesses,
        attempts: trials,
        max_residual,
    }
}
