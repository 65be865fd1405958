//! All `(n-3)!` solutions of the scattering equations by soft-limit
//! continuation, plus the Hessian and reduced determinant.
//!
//! Particle `n-1` is made soft: its invariants are scaled by `ε`. At
//! `ε = 0` the system splits into the `(n-1)`-point problem on the other
//! particles and a single-variable polynomial for `σ(n-1)`. Each start
//! point is then tracked to `ε = 1` along a slightly complex path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{MandelstamPoint, PlanarPoint};
use crate::moduli::ModuliPoint;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub newton_tol: f64,
    pub dedup_tol: f64,
    pub max_newton_iters: usize,
    pub continuation_steps: usize,
    pub max_restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { newton_tol: 1e-12, dedup_tol: 1e-8, max_newton_iters: 50, continuation_steps: 40, max_restarts: 10 }
    }
}

#[derive(Debug, Clone)]
pub struct SolutionSet {
    pub kinematics: MandelstamPoint<C>,
    pub solutions: Vec<ModuliPoint>,
    pub residual_norms: Vec<f64>,
}

impl SolutionSet {
    pub fn n(&self) -> usize {
        self.kinematics.n()
    }

    pub fn is_complete(&self) -> bool {
        self.solutions.len() == factorial(self.n() - 3)
    }
}

pub fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// `(Q3, .., Q(n-1))` in the gauge `σ1 = 0, σ2 = 1, σn = ∞`.
pub fn scattering_residuals(p: &ModuliPoint, m: &MandelstamPoint<C>) -> Result<Vec<C>> {
    check_n(p, m)?;
    Ok(q_raw(m.rows(), &p.finite_values()))
}

/// `Φ_ab = ∂Q_b / ∂σa` for `a, b = 3..n-1`.
pub fn hessian(p: &ModuliPoint, m: &MandelstamPoint<C>) -> Result<DMatrix<C>> {
    check_n(p, m)?;
    Ok(jac_raw(m.rows(), &p.finite_values()))
}

/// `det'Φ`: rows and columns `1, 2, n` removed, normalized by `σ12²`; the
/// factors involving `σn` cancel.
pub fn reduced_determinant(p: &ModuliPoint, m: &MandelstamPoint<C>) -> Result<C> {
    let h = hessian(p, m)?;
    Ok(h.determinant() / (p.minor(1, 2) * p.minor(1, 2)))
}

/// Full `n × n` matrix `Φ` for all-finite punctures.
pub fn full_hessian(sigma: &[C], m: &MandelstamPoint<C>) -> DMatrix<C> {
    let n = sigma.len();
    let mut h = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let d = sigma[a] - sigma[b];
                let e = m.get(a + 1, b + 1) / (d * d);
                h[(a, b)] = e;
                h[(a, a)] -= e;
            }
        }
    }
    h
}

/// `det Φ^{abc}_{pqr} / (σab σbc σca σpq σqr σrp)` for all-finite
/// punctures; `rows` and `cols` are 1-based.
pub fn reduced_determinant_finite(sigma: &[C], m: &MandelstamPoint<C>, rows: [usize; 3], cols: [usize; 3]) -> C {
    let h = full_hessian(sigma, m);
    let keep_r: Vec<usize> = (0..sigma.len()).filter(|i| !rows.contains(&(i + 1))).collect();
    let keep_c: Vec<usize> = (0..sigma.len()).filter(|i| !cols.contains(&(i + 1))).collect();
    let sub = DMatrix::from_fn(keep_r.len(), keep_c.len(), |a, b| h[(keep_r[a], keep_c[b])]);
    let vdm = |t: [usize; 3]| {
        let s = |i: usize| sigma[i - 1];
        (s(t[0]) - s(t[1])) * (s(t[1]) - s(t[2])) * (s(t[2]) - s(t[0]))
    };
    let sign = perm_sign(&rows, &keep_r) * perm_sign(&cols, &keep_c);
    sub.determinant() * sign / (vdm(rows) * vdm(cols))
}

// Sign of the permutation that moves the deleted indices to the front,
// making the minor independent of which triple is removed.
fn perm_sign(deleted: &[usize; 3], kept: &[usize]) -> f64 {
    let mut order: Vec<usize> = deleted.iter().map(|d| d - 1).collect();
    order.extend_from_slice(kept);
    let mut inv = 0;
    for a in 0..order.len() {
        for b in a + 1..order.len() {
            if order[a] > order[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_n(p: &ModuliPoint, m: &MandelstamPoint<C>) -> Result<()> {
    if p.n() != m.n() {
        return Err(Error::InvalidInput(format!("point has n = {}, kinematics n = {}", p.n(), m.n())));
    }
    let v = p.finite_values();
    for a in 0..v.len() {
        for b in 0..a {
            if (v[a] - v[b]).norm() == 0.0 {
                return Err(Error::Pole(format!("σ{} = σ{}", b + 1, a + 1)));
            }
        }
    }
    Ok(())
}

/// `Q_k` for `k = 3..n-1`; `v` holds the `n-1` finite punctures.
fn q_raw(s: &[Vec<C>], v: &[C]) -> Vec<C> {
    (2..v.len())
        .map(|k| (0..v.len()).filter(|&j| j != k).map(|j| s[k][j] / (v[k] - v[j])).sum())
        .collect()
}

fn jac_raw(s: &[Vec<C>], v: &[C]) -> DMatrix<C> {
    let d = v.len() - 2;
    let mut jac = DMatrix::zeros(d, d);
    for k in 2..v.len() {
        for j in 0..v.len() {
            if j == k {
                continue;
            }
            let diff = v[k] - v[j];
            let t = s[k][j] / (diff * diff);
            jac[(k - 2, k - 2)] -= t;
            if j >= 2 {
                jac[(k - 2, j - 2)] += t;
            }
        }
    }
    jac
}

fn full_values(z: &[C]) -> Vec<C> {
    let mut v = vec![C::zero(), C::one()];
    v.extend_from_slice(z);
    v
}

fn max_norm(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `H(z, ε)`, `∂H/∂z` and `∂H/∂ε` of a one-parameter family.
trait Homotopy: Sync {
    fn eval(&self, z: &[C], eps: C) -> (Vec<C>, DMatrix<C>, Vec<C>);
}

/// Soft homotopy: the invariants `s_{k, n-1}` are scaled by `ε` in every
/// equation except that of `σ(n-1)`, which is divided by `ε`.
struct Soft<'a> {
    s: &'a [Vec<C>],
}

impl Homotopy for Soft<'_> {
    fn eval(&self, z: &[C], eps: C) -> (Vec<C>, DMatrix<C>, Vec<C>) {
        let v = full_values(z);
        let soft = v.len() - 1;
        let d = z.len();
        let mut h = vec![C::zero(); d];
        let mut dh = vec![C::zero(); d];
        let mut jac = DMatrix::zeros(d, d);
        for k in 2..v.len() {
            for j in 0..v.len() {
                if j == k {
                    continue;
                }
                let w = if k != soft && j == soft { eps } else { C::one() };
                let diff = v[k] - v[j];
                let term = self.s[k][j] / diff;
                h[k - 2] += w * term;
                if k != soft && j == soft {
                    dh[k - 2] += term;
                }
                let t = w * term / diff;
                jac[(k - 2, k - 2)] -= t;
                if j >= 2 {
                    jac[(k - 2, j - 2)] += t;
                }
            }
        }
        (h, jac, dh)
    }
}

/// Parameter homotopy between two kinematic points: `s(ε) = r + ε (s - r)`.
struct Linear<'a> {
    from: &'a [Vec<C>],
    to: &'a [Vec<C>],
}

impl Homotopy for Linear<'_> {
    fn eval(&self, z: &[C], eps: C) -> (Vec<C>, DMatrix<C>, Vec<C>) {
        let n = self.from.len();
        let s: Vec<Vec<C>> =
            (0..n).map(|i| (0..n).map(|j| self.from[i][j] + eps * (self.to[i][j] - self.from[i][j])).collect()).collect();
        let delta: Vec<Vec<C>> = (0..n).map(|i| (0..n).map(|j| self.to[i][j] - self.from[i][j]).collect()).collect();
        let v = full_values(z);
        (q_raw(&s, &v), jac_raw(&s, &v), q_raw(&delta, &v))
    }
}

fn solve_linear(jac: &DMatrix<C>, rhs: &[C]) -> Option<Vec<C>> {
    let x = jac.clone().lu().solve(&DVector::from_column_slice(rhs))?;
    if x.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

struct Path {
    gamma: f64,
}

impl Path {
    fn eps(&self, t: f64) -> C {
        C::new(t, self.gamma * t * (1.0 - t))
    }

    fn deps(&self, t: f64) -> C {
        C::new(1.0, self.gamma * (1.0 - 2.0 * t))
    }
}

struct Tracker<'a, H: Homotopy> {
    h: &'a H,
    path: Path,
}

impl<H: Homotopy> Tracker<'_, H> {
    fn velocity(&self, z: &[C], t: f64) -> Option<Vec<C>> {
        let (_, jac, dh) = self.h.eval(z, self.path.eps(t));
        let de = self.path.deps(t);
        let rhs: Vec<C> = dh.iter().map(|x| -x * de).collect();
        solve_linear(&jac, &rhs)
    }

    // RK4 predictor on the Davidenko equation, then a short Newton
    // corrector that must contract quickly.
    fn step(&self, z: &[C], ta: f64, tb: f64) -> Option<Vec<C>> {
        let h = tb - ta;
        let add = |a: &[C], b: &[C], f: f64| -> Vec<C> { a.iter().zip(b).map(|(x, y)| x + y * f).collect() };
        let k1 = self.velocity(z, ta)?;
        let k2 = self.velocity(&add(z, &k1, h / 2.0), ta + h / 2.0)?;
        let k3 = self.velocity(&add(z, &k2, h / 2.0), ta + h / 2.0)?;
        let k4 = self.velocity(&add(z, &k3, h), tb)?;
        let mut zp: Vec<C> =
            (0..z.len()).map(|i| z[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0)).collect();
        let moved = zp.iter().zip(z).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let eps = self.path.eps(tb);
        let mut prev = f64::INFINITY;
        for it in 0..6 {
            let (hv, jac, _) = self.h.eval(&zp, eps);
            let dz = solve_linear(&jac, &hv)?;
            let size = max_norm(&dz);
            let scale = 1.0 + max_norm(&zp);
            if it == 0 && size > 0.1 * moved + 1e-9 * scale {
                return None;
            }
            if it > 0 && size > 0.5 * prev {
                return None;
            }
            for (a, b) in zp.iter_mut().zip(&dz) {
                *a -= b;
            }
            if size < 1e-11 * scale {
                return Some(zp);
            }
            prev = size;
        }
        None
    }

    fn advance(&self, z: &[C], ta: f64, tb: f64, depth: usize) -> Option<Vec<C>> {
        if let Some(next) = self.step(z, ta, tb) {
            return Some(next);
        }
        if depth == 0 {
            return None;
        }
        let mid = 0.5 * (ta + tb);
        let half = self.advance(z, ta, mid, depth - 1)?;
        self.advance(&half, mid, tb, depth - 1)
    }

    fn track(&self, start: &[C], steps: usize) -> Option<Vec<C>> {
        let mut z = start.to_vec();
        let mut ta = 0.0;
        for k in 0..steps {
            let tb = if k + 1 == steps { 1.0 } else { 1e-3 * 1e3_f64.powf(k as f64 / (steps - 1) as f64) };
            z = self.advance(&z, ta, tb, 16)?;
            ta = tb;
        }
        Some(z)
    }
}

/// Newton on `H(·, ε)` until the update stalls; returns the polished point.
fn newton<H: Homotopy>(h: &H, z: &[C], eps: C, max_iters: usize) -> Option<Vec<C>> {
    let mut z = z.to_vec();
    let mut prev = f64::INFINITY;
    for _ in 0..max_iters {
        let (hv, jac, _) = h.eval(&z, eps);
        let dz = solve_linear(&jac, &hv)?;
        let size = max_norm(&dz);
        if size >= prev && size < 1e-8 * (1.0 + max_norm(&z)) {
            break;
        }
        for (a, b) in z.iter_mut().zip(&dz) {
            *a -= b;
        }
        if size <= 1e-16 * (1.0 + max_norm(&z)) {
            break;
        }
        prev = size;
    }
    Some(z)
}

fn dedup(mut sols: Vec<Vec<C>>, tol: f64) -> Vec<Vec<C>> {
    sort_solutions(&mut sols);
    let mut out: Vec<Vec<C>> = Vec::new();
    for s in sols {
        if out.iter().all(|o| o.iter().zip(&s).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) > tol) {
            out.push(s);
        }
    }
    out
}

fn sort_solutions(sols: &mut [Vec<C>]) {
    sols.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b) {
            let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
}

/// Tracks every start point; retries the whole batch with finer steps and a
/// different path if paths fail or collide.
fn track_all<H: Homotopy>(h: &H, starts: &[Vec<C>], cfg: &SolverConfig) -> Result<Vec<Vec<C>>> {
    let expected = starts.len();
    let mut best = 0;
    for attempt in 0..=cfg.max_restarts {
        let steps = cfg.continuation_steps.max(2) << attempt.min(4);
        let gamma = [0.6, -0.45, 0.9, -0.75, 0.3, -1.1][attempt % 6];
        let tracker = Tracker { h, path: Path { gamma } };
        let ends: Vec<Option<Vec<C>>> = starts.par_iter().map(|z| tracker.track(z, steps)).collect();
        let ok: Vec<Vec<C>> = ends.into_iter().flatten().collect();
        let found = dedup(ok, cfg.dedup_tol);
        if found.len() == expected {
            return Ok(found);
        }
        best = best.max(found.len());
    }
    Err(Error::IncompleteSolutions { expected, found: best })
}

/// Invariants of the `(n-1)`-point problem on particles `1..n-2, n`.
fn sub_kinematics(s: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = s.len();
    let m = n - 1;
    let mut t = vec![vec![C::zero(); m]; m];
    let mut total = C::zero();
    for a in 0..m - 1 {
        for b in 0..m - 1 {
            if a != b {
                t[a][b] = s[a][b];
                if a < b {
                    total += s[a][b];
                }
            }
        }
    }
    t[0][1] -= total;
    t[1][0] -= total;
    for a in 0..m - 1 {
        let row: C = (0..m - 1).map(|b| t[a][b]).sum();
        t[a][m - 1] = -row;
        t[m - 1][a] = -row;
    }
    t
}

/// Roots of `Σ_j c_j / (x - v_j)` via the companion matrix of its numerator.
fn rational_roots(c: &[C], v: &[C]) -> Result<Vec<C>> {
    let k = v.len();
    let mut num = vec![C::zero(); k];
    for j in 0..k {
        let mut poly = vec![C::one()];
        for (l, vl) in v.iter().enumerate() {
            if l == j {
                continue;
            }
            let mut next = vec![C::zero(); poly.len() + 1];
            for (e, a) in poly.iter().enumerate() {
                next[e + 1] += a;
                next[e] -= a * vl;
            }
            poly = next;
        }
        for (e, a) in poly.iter().enumerate() {
            num[e] += c[j] * a;
        }
    }
    let deg = k - 1;
    let lead = num[deg];
    let scale: f64 = c.iter().map(|x| x.norm()).sum();
    if lead.norm() <= 1e-9 * scale {
        return Err(Error::Solver("soft limit degenerates: leading coefficient vanishes".into()));
    }
    let mut comp = DMatrix::<C>::zeros(deg, deg);
    for r in 1..deg {
        comp[(r, r - 1)] = C::one();
    }
    for r in 0..deg {
        comp[(r, deg - 1)] = -num[r] / lead;
    }
    let eig = comp
        .try_schur(1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or_else(|| Error::Solver("companion eigenvalues did not converge".into()))?;
    let g = |x: C| -> (C, C) {
        let mut f = C::zero();
        let mut df = C::zero();
        for j in 0..k {
            let d = x - v[j];
            f += c[j] / d;
            df -= c[j] / (d * d);
        }
        (f, df)
    };
    let mut roots = Vec::with_capacity(deg);
    for mut x in eig.iter().copied() {
        for _ in 0..20 {
            let (f, df) = g(x);
            let dx = f / df;
            x -= dx;
            if dx.norm() < 1e-15 * (1.0 + x.norm()) {
                break;
            }
        }
        roots.push(x);
    }
    Ok(roots)
}

fn random_complex_kinematics(n: usize, seed: u64) -> Vec<Vec<C>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = PlanarPoint::from_fn(n, |_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .expect("n >= 4");
    crate::kinematics::s_from_x(&x).rows().to_vec()
}

fn solve_soft(s: &[Vec<C>], cfg: &SolverConfig) -> Result<Vec<Vec<C>>> {
    let n = s.len();
    if n == 4 {
        let den = s[2][0] + s[2][1];
        if den.norm() == 0.0 || s[2][0].norm() == 0.0 {
            return Err(Error::Solver("degenerate four-point kinematics".into()));
        }
        return Ok(vec![vec![s[2][0] / den]]);
    }
    let sub = solve_soft(&sub_kinematics(s), cfg)?;
    let soft = n - 2;
    let h = Soft { s };
    let mut starts = Vec::new();
    for z in &sub {
        let v = full_values(z);
        let c: Vec<C> = (0..soft).map(|j| s[soft][j]).collect();
        for root in rational_roots(&c, &v)? {
            let mut start = z.clone();
            start.push(root);
            let polished = newton(&h, &start, C::zero(), cfg.max_newton_iters)
                .ok_or_else(|| Error::Solver("singular start system".into()))?;
            starts.push(polished);
        }
    }
    if dedup(starts.clone(), cfg.dedup_tol).len() != starts.len() {
        return Err(Error::Solver("soft limit start points collide".into()));
    }
    track_all(&h, &starts, cfg)
}

/// Soft-limit recursion; if an intermediate lower-point problem is not
/// generic, the target is reached instead by a parameter homotopy from
/// random complex kinematics, which are solved by the same recursion.
fn solve_raw(s: &[Vec<C>], cfg: &SolverConfig) -> Result<Vec<Vec<C>>> {
    let n = s.len();
    let quick = SolverConfig { max_restarts: cfg.max_restarts.min(2), ..*cfg };
    let first = match solve_soft(s, &quick) {
        Ok(sols) => return Ok(sols),
        Err(e) => e,
    };
    for attempt in 0..3u64 {
        let r = random_complex_kinematics(n, 0x5eed + 97 * attempt + n as u64);
        let Ok(start) = solve_soft(&r, &quick) else { continue };
        if let Ok(sols) = track_all(&Linear { from: &r, to: s }, &start, cfg) {
            return Ok(sols);
        }
    }
    Err(first)
}

/// Normwise backward error `max_k |Q_k| / Σ_j |s_kj / (σk - σj)|`.
///
/// The absolute residual cannot drop below roughly `ulp(σ) · |∂Q/∂σ|`,
/// which for clustered punctures exceeds `1e-9` in double precision; the
/// relative measure is what Newton polishing actually controls.
fn backward_error(s: &[Vec<C>], v: &[C]) -> f64 {
    (2..v.len())
        .map(|k| {
            let mut sum = C::zero();
            let mut scale = 0.0;
            for j in (0..v.len()).filter(|&j| j != k) {
                let t = s[k][j] / (v[k] - v[j]);
                sum += t;
                scale += t.norm();
            }
            if scale == 0.0 {
                0.0
            } else {
                sum.norm() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Residual norm of a point: the normwise backward error of the
/// gauge-fixed equations.
pub fn residual_norm(p: &ModuliPoint, m: &MandelstamPoint<C>) -> Result<f64> {
    check_n(p, m)?;
    Ok(backward_error(m.rows(), &p.finite_values()))
}

/// All solutions for generic kinematics, sorted lexicographically by
/// `(Re σ3, Im σ3, Re σ4, ..)`. `residual_norms` are backward errors.
pub fn solve_all(m: &MandelstamPoint<C>, cfg: &SolverConfig) -> Result<SolutionSet> {
    let n = m.n();
    let s = m.rows();
    let target = Linear { from: s, to: s };
    let raw = solve_raw(s, cfg)?;
    let mut sols = Vec::with_capacity(raw.len());
    for z in raw {
        let z = newton(&target, &z, C::one(), cfg.max_newton_iters).unwrap_or(z);
        sols.push(z);
    }
    let sols = dedup(sols, cfg.dedup_tol);
    let expected = factorial(n - 3);
    if sols.len() != expected {
        return Err(Error::IncompleteSolutions { expected, found: sols.len() });
    }
    let mut solutions = Vec::with_capacity(expected);
    let mut residual_norms = Vec::with_capacity(expected);
    for z in sols {
        let r = backward_error(s, &full_values(&z));
        if r >= cfg.newton_tol {
            return Err(Error::Solver(format!("residual {r:e} above tolerance after polishing")));
        }
        residual_norms.push(r);
        solutions.push(ModuliPoint::new(n, z)?);
    }
    Ok(SolutionSet { kinematics: m.clone(), solutions, residual_norms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{
        has_vanishing_channel, has_vanishing_denominator, random_planar, random_point, rat, s_from_x,
    };
    use crate::moduli::{from_columns, gradient_log_potential, mobius_columns};

    fn four_point(s: i64, t: i64) -> MandelstamPoint<C> {
        let u = -s - t;
        let rows = vec![vec![0, s, u, t], vec![s, 0, t, u], vec![u, t, 0, s], vec![t, u, s, 0]];
        MandelstamPoint::new(4, rows.into_iter().map(|r| r.into_iter().map(rat).collect()).collect())
            .unwrap()
            .to_complex()
    }

    fn random_c(n: usize, seed: u64) -> MandelstamPoint<C> {
        random_point(n, seed, (-10, 10)).unwrap().to_complex()
    }

    #[test]
    fn four_point_closed_form() {
        let set = solve_all(&four_point(2, 3), &SolverConfig::default()).unwrap();
        assert_eq!(set.solutions.len(), 1);
        assert!((set.solutions[0].sigma()[0] - C::new(2.5, 0.0)).norm() < 1e-15);
        let q = scattering_residuals(&set.solutions[0], &set.kinematics).unwrap();
        assert!(q[0].norm() < 1e-14);
    }

    #[test]
    fn four_point_hessian_and_determinant() {
        let m = four_point(2, 3);
        let p = ModuliPoint::new(4, vec![C::new(2.5, 0.0)]).unwrap();
        let (s, t, sig) = (2.0, 3.0, 2.5);
        let h = hessian(&p, &m).unwrap();
        assert!((h[(0, 0)].re - ((s + t) / (sig * sig) - t / ((sig - 1.0) * (sig - 1.0)))).abs() < 1e-14);
        let det = reduced_determinant(&p, &m).unwrap();
        assert!((det.re - (s * s / (s + t) - s * s / t)).abs() < 1e-14);
        assert!((det.re + 8.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn residuals_match_gradient_and_scale_linearly() {
        let m = random_c(6, 4);
        let p = ModuliPoint::new(6, vec![C::new(2.0, 0.5), C::new(-1.0, 0.3), C::new(0.4, -2.0)]).unwrap();
        let q = scattering_residuals(&p, &m).unwrap();
        let g = gradient_log_potential(&p, &m);
        let q3 = scattering_residuals(&p, &m.scaled(C::new(3.0, 0.0))).unwrap();
        for k in 0..3 {
            assert!((q[k] - g[k]).norm() < 1e-12);
            assert!((q3[k] - 3.0 * q[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        for n in 4..=8 {
            let m = random_c(n, 11 + n as u64);
            let z: Vec<C> = (0..n - 3).map(|k| C::new(1.7 + k as f64, 0.3 * k as f64 - 0.5)).collect();
            let p = ModuliPoint::new(n, z.clone()).unwrap();
            let h = hessian(&p, &m).unwrap();
            assert!((h.clone() - h.transpose()).norm() < 1e-12 * h.norm());
            for a in 0..n - 3 {
                let step = 1e-6;
                let at = |d: f64| {
                    let mut w = z.clone();
                    w[a] += d;
                    scattering_residuals(&ModuliPoint::new(n, w).unwrap(), &m).unwrap()
                };
                let (qp, qm) = (at(step), at(-step));
                for b in 0..n - 3 {
                    let fd = (qp[b] - qm[b]) / (2.0 * step);
                    assert!((fd - h[(a, b)]).norm() < 1e-5 * h[(a, b)].norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn solution_counts() {
        let cfg = SolverConfig::default();
        for n in 5..=7 {
            for seed in 0..4 {
                let set = solve_all(&random_c(n, seed), &cfg).unwrap();
                assert_eq!(set.solutions.len(), factorial(n - 3));
                for r in &set.residual_norms {
                    assert!(*r < cfg.newton_tol, "n = {n}, seed = {seed}, residual {r}");
                }
                for p in &set.solutions {
                    assert!(reduced_determinant(p, &set.kinematics).unwrap().norm() > 1e-10);
                }
            }
        }
    }

    #[test]
    fn degenerate_soft_limit_falls_back() {
        // X_{1,n-2} = X_{1,n-1} makes the leading coefficient of the next
        // soft polynomial vanish, while the point itself stays generic.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = loop {
            let mut x = random_planar(6, &mut rng, (-10, 10)).unwrap();
            let v = x.get(1, 5);
            x = PlanarPoint::from_fn(6, |d| if (d.i, d.j) == (1, 4) { v.clone() } else { x.at(&d) }).unwrap();
            let m = s_from_x(&x);
            if !has_vanishing_channel(&m) && !has_vanishing_denominator(&x) {
                break m.to_complex();
            }
        };
        assert!(solve_soft(m.rows(), &SolverConfig::default()).is_err());
        let set = solve_all(&m, &SolverConfig::default()).unwrap();
        assert_eq!(set.solutions.len(), 6);
        assert!(set.residual_norms.iter().all(|r| *r < 1e-12));
    }

    #[test]
    fn solutions_covariant_under_rotation() {
        let cfg = SolverConfig::default();
        for n in 5..=7 {
            let m = random_c(n, 40 + n as u64);
            let base = solve_all(&m, &cfg).unwrap();
            let rotated = solve_all(&m.rotate(1), &cfg).unwrap();
            for p in &base.solutions {
                // Old puncture i becomes new puncture i + 1.
                let cols: Vec<[C; 2]> = (1..=n).map(|i| p.column(if i == 1 { n } else { i - 1 })).collect();
                let q = from_columns(&cols).unwrap();
                assert!(rotated.solutions.iter().any(|r| r.distance(&q) < 1e-8), "n = {n}");
            }
        }
    }

    #[test]
    fn reduced_determinant_is_choice_independent() {
        let cfg = SolverConfig::default();
        for n in 5..=7 {
            let m = random_c(n, 70 + n as u64);
            let set = solve_all(&m, &cfg).unwrap();
            let g = [[C::new(0.3, 0.1), C::new(1.2, -0.4)], [C::new(0.7, 0.2), C::new(-0.5, 0.9)]];
            for p in &set.solutions {
                let cols = mobius_columns(p, g);
                let sigma: Vec<C> = cols.iter().map(|c| c[1] / c[0]).collect();
                let gauge = reduced_determinant(p, &m).unwrap();
                let reference = reduced_determinant_finite(&sigma, &m, [1, 2, n], [1, 2, n]);
                let others = [([1, 2, 3], [1, 2, 3]), ([2, 4, n], [1, 3, n]), ([n, 1, 3], [2, 3, n - 1]), ([3, 5, 1], [4, 2, n])];
                for (r, c) in others {
                    let v = reduced_determinant_finite(&sigma, &m, r, c);
                    assert!((v - reference).norm() < 1e-8 * reference.norm(), "n = {n}, {r:?} {c:?}");
                }
                // The full CHY summand is Möbius invariant.
                let pt_full: C = (0..n).map(|i| 1.0 / (sigma[i] - sigma[(i + 1) % n])).product();
                let chart_pt: C = (1..n - 1).map(|i| 1.0 / p.minor(i + 1, i)).product::<C>();
                let lhs = pt_full * pt_full / reference;
                let rhs = chart_pt * chart_pt / gauge;
                assert!((lhs - rhs).norm() < 1e-8 * rhs.norm(), "n = {n}");
            }
        }
    }
}
