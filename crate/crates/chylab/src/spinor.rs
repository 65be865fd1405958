//! Four-dimensional kinematics in spinor form: brackets, the map `r(z)`,
//! sector classification of scattering-equation solutions, the Veronese
//! map and Parke–Taylor MHV amplitudes.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{eulerian, validate_permutation};
use crate::error::{Error, Result};
use crate::kinematics::MandelstamPoint;
use crate::moduli::ModuliPoint;
use crate::solver::{solve_all, SolverConfig};

type C = Complex64;

/// `λ` and `λ̃` as `2 × n` arrays; column `i` is particle `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorPoint {
    pub lambda: DMatrix<C>,
    pub lambda_tilde: DMatrix<C>,
}

/// Smallest bracket magnitude accepted by [`random_spinors`].
const MIN_BRACKET: f64 = 1e-3;

impl SpinorPoint {
    pub fn new(lambda: DMatrix<C>, lambda_tilde: DMatrix<C>) -> Result<Self> {
        if lambda.nrows() != 2 || lambda_tilde.nrows() != 2 || lambda.ncols() != lambda_tilde.ncols() {
            return Err(Error::InvalidInput("spinors must be 2 x n arrays of equal width".into()));
        }
        if lambda.ncols() < 4 {
            return Err(Error::InvalidPolygon(lambda.ncols()));
        }
        Ok(SpinorPoint { lambda, lambda_tilde })
    }

    pub fn n(&self) -> usize {
        self.lambda.ncols()
    }

    /// `⟨ij⟩ = det(λ_i, λ_j)`, 1-based.
    pub fn angle(&self, i: usize, j: usize) -> C {
        det2(&self.lambda, i - 1, j - 1)
    }

    /// `[ij] = det(λ̃_i, λ̃_j)`, 1-based.
    pub fn square(&self, i: usize, j: usize) -> C {
        det2(&self.lambda_tilde, i - 1, j - 1)
    }

    /// Largest entry of `Σ λ_i λ̃_iᵀ`.
    pub fn conservation_residual(&self) -> f64 {
        (&self.lambda * self.lambda_tilde.transpose()).iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// `λ_i ↦ t_i λ_i`.
    pub fn rescale_lambda(&self, t: &[C]) -> Self {
        let mut p = self.clone();
        for (i, ti) in t.iter().enumerate() {
            p.lambda[(0, i)] *= ti;
            p.lambda[(1, i)] *= ti;
        }
        p
    }
}

fn det2(m: &DMatrix<C>, i: usize, j: usize) -> C {
    m[(0, i)] * m[(1, j)] - m[(1, i)] * m[(0, j)]
}

fn random_c(rng: &mut impl Rng) -> C {
    C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random complex `λ`; the rows of `λ̃` are random combinations of the
/// kernel vectors `e_j - A⁻¹ λ_j` of `λ = [A | ...]`, so momentum is
/// conserved by construction. Draws with a small bracket are redrawn.
pub fn random_spinors(n: usize, seed: u64) -> Result<SpinorPoint> {
    if n < 4 {
        return Err(Error::InvalidPolygon(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let lambda = DMatrix::from_fn(2, n, |_, _| random_c(&mut rng));
        let a = Matrix2::new(lambda[(0, 0)], lambda[(0, 1)], lambda[(1, 0)], lambda[(1, 1)]);
        let Some(a_inv) = a.try_inverse() else { continue };
        let mut kernel = DMatrix::<C>::zeros(n, n - 2);
        for j in 2..n {
            let head = a_inv * nalgebra::Vector2::new(lambda[(0, j)], lambda[(1, j)]);
            kernel[(0, j - 2)] = -head[0];
            kernel[(1, j - 2)] = -head[1];
            kernel[(j, j - 2)] = C::one();
        }
        let mix = DMatrix::from_fn(2, n - 2, |_, _| random_c(&mut rng));
        let lambda_tilde = mix * kernel.transpose();
        let p = SpinorPoint::new(lambda, lambda_tilde)?;
        let generic = (1..=n).all(|i| {
            (i + 1..=n).all(|j| p.angle(i, j).norm() > MIN_BRACKET && p.square(i, j).norm() > MIN_BRACKET)
        });
        if generic {
            return Ok(p);
        }
    }
    Err(Error::GenerationFailure("no generic spinor draw in 100 attempts".into()))
}

/// `(⟨ij⟩, [ij])` tables, 0-based.
pub fn brackets(p: &SpinorPoint) -> (DMatrix<C>, DMatrix<C>) {
    let n = p.n();
    (
        DMatrix::from_fn(n, n, |i, j| p.angle(i + 1, j + 1)),
        DMatrix::from_fn(n, n, |i, j| p.square(i + 1, j + 1)),
    )
}

/// `s_ij = ⟨ij⟩[ij]`.
pub fn s_from_spinors(p: &SpinorPoint) -> Result<MandelstamPoint<C>> {
    let n = p.n();
    let s = (0..n).map(|i| (0..n).map(|j| p.angle(i + 1, j + 1) * p.square(i + 1, j + 1)).collect()).collect();
    MandelstamPoint::new(n, s)
}

fn poly_mul(a: &[C], b: &[C]) -> Vec<C> {
    let mut out = vec![C::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_eval(a: &[C], z: C) -> C {
    a.iter().rev().fold(C::zero(), |acc, c| acc * z + c)
}

/// `r(z)` as a `2 × 2` array of coefficient lists (lowest degree first).
#[derive(Debug, Clone, PartialEq)]
pub struct RPolynomial {
    pub entries: [[Vec<C>; 2]; 2],
}

impl RPolynomial {
    pub fn eval(&self, z: C) -> Matrix2<C> {
        Matrix2::from_fn(|a, b| poly_eval(&self.entries[a][b], z))
    }

    pub fn degree(&self) -> usize {
        self.entries.iter().flatten().map(|e| e.len() - 1).max().unwrap_or(0)
    }

    pub fn det_coefficients(&self) -> Vec<C> {
        let [[a, b], [c, d]] = &self.entries;
        poly_mul(a, d).iter().zip(poly_mul(b, c)).map(|(x, y)| x - y).collect()
    }

    fn coefficient_norm(&self) -> f64 {
        self.entries.iter().flatten().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `r(z) = Σ_{i<n} λ_i λ̃_iᵀ ∏_{j≠i, j<n} (z - σj)` with `σn = ∞`; the
/// determinant vanishes identically exactly on solutions.
pub fn r_polynomial(p: &SpinorPoint, sol: &ModuliPoint) -> Result<RPolynomial> {
    let r = r_polynomial_unchecked(p, sol)?;
    let det = r.det_coefficients();
    let rel = det.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() / r.coefficient_norm().powi(2);
    if rel > 1e-8 {
        return Err(Error::InvalidInput(format!("det r(z) does not vanish (relative size {rel:e})")));
    }
    Ok(r)
}

pub fn r_polynomial_unchecked(p: &SpinorPoint, sol: &ModuliPoint) -> Result<RPolynomial> {
    let n = p.n();
    if sol.n() != n {
        return Err(Error::InvalidInput("solution and spinors disagree on n".into()));
    }
    let sigma = sol.finite_values();
    let mut entries: [[Vec<C>; 2]; 2] = Default::default();
    for e in entries.iter_mut().flatten() {
        *e = vec![C::zero(); n - 1];
    }
    for i in 0..n - 1 {
        let mut prod = vec![C::one()];
        for (j, s) in sigma.iter().enumerate() {
            if j != i {
                prod = poly_mul(&prod, &[-s, C::one()]);
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                let w = p.lambda[(a, i)] * p.lambda_tilde[(b, i)];
                for (k, c) in prod.iter().enumerate() {
                    entries[a][b][k] += w * c;
                }
            }
        }
    }
    Ok(RPolynomial { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sector {
    pub d: usize,
    pub d_tilde: usize,
}

/// Relative singular-value threshold for the degree fit.
pub const RANK_TOL: f64 = 1e-7;

/// Degree of `τ` in the factorization `r(z) = τ(z) τ̃(z)ᵀ`.
///
/// The columns of `r(z_k)` point along `τ(z_k)` and the rows along
/// `τ̃(z_k)`, at `2(n-1)` sample points on a circle around the punctures.
/// For each `d` the smallest relative singular value of the linear system
/// `τ1(z_k) c2(z_k) - τ2(z_k) c1(z_k) = 0` is computed, and likewise for `τ̃`
/// at degree `n-2-d`; only the true `d` makes both fits degenerate, which
/// guards against a nearly cancelling root in one factor.
pub fn sector_of_solution(p: &SpinorPoint, sol: &ModuliPoint) -> Result<Sector> {
    let n = p.n();
    let r = r_polynomial(p, sol)?;
    let sigma = sol.finite_values();
    let center = sigma.iter().sum::<C>() / sigma.len() as f64;
    let radius = sigma.iter().map(|s| (s - center).norm()).fold(1.0, f64::max);
    let samples = 2 * (n - 1);
    let mut columns = Vec::with_capacity(samples);
    let mut rows = Vec::with_capacity(samples);
    for k in 0..samples {
        let w = C::from_polar(1.0, std::f64::consts::TAU * (k as f64 + 0.37) / samples as f64);
        let m = r.eval(center + w * radius);
        let pick = |a: nalgebra::Vector2<C>, b: nalgebra::Vector2<C>| {
            let v = if a.norm() >= b.norm() { a } else { b };
            [v[0] / v.norm(), v[1] / v.norm()]
        };
        columns.push((w, pick(m.column(0).into(), m.column(1).into())));
        rows.push((w, pick(m.row(0).transpose(), m.row(1).transpose())));
    }
    let (d, score) = (1..=n - 3)
        .map(|d| (d, degree_fit(&columns, d).max(degree_fit(&rows, n - 2 - d))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("n >= 4");
    if score > RANK_TOL {
        return Err(Error::Classification(format!("no degree admits a factorization of r(z) (best {score:e})")));
    }
    Ok(Sector { d, d_tilde: n - 2 - d })
}

/// Smallest over largest singular value of the parallelism system for a
/// degree-`d` 2-vector polynomial.
fn degree_fit(points: &[(C, [C; 2])], d: usize) -> f64 {
    let m = DMatrix::from_fn(points.len(), 2 * (d + 1), |k, col| {
        let (w, v) = points[k];
        if col <= d {
            v[1] * w.powu(col as u32)
        } else {
            -v[0] * w.powu((col - d - 1) as u32)
        }
    });
    let sv = m.singular_values();
    sv.min() / sv.max()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorCensus {
    pub n: usize,
    pub expected: Vec<u128>,
    pub per_trial: Vec<Vec<usize>>,
    pub matching_trials: usize,
    pub classification_failures: usize,
    pub solutions: usize,
}

impl SectorCensus {
    pub fn all_match(&self) -> bool {
        self.matching_trials == self.per_trial.len()
    }
}

/// Solves the scattering equations for `trials` random spinor points
/// (seeds `seed, seed + 1, ..`) and tallies the sectors.
pub fn sector_census(n: usize, trials: usize, seed: u64) -> Result<SectorCensus> {
    if !(4..=7).contains(&n) {
        return Err(Error::Unsupported(format!("sector census supports 4 <= n <= 7, got {n}")));
    }
    let expected: Vec<u128> = (1..=n - 3).map(|d| eulerian(n - 3, d)).collect();
    let results: Vec<(Vec<usize>, usize, usize)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let p = random_spinors(n, seed.wrapping_add(t))?;
            let sols = solve_all(&s_from_spinors(&p)?, &SolverConfig::default())?;
            let mut counts = vec![0usize; n - 3];
            let mut failures = 0;
            for sol in &sols.solutions {
                match sector_of_solution(&p, sol) {
                    Ok(s) => counts[s.d - 1] += 1,
                    Err(_) => failures += 1,
                }
            }
            Ok((counts, failures, sols.solutions.len()))
        })
        .collect::<Result<_>>()?;
    let solutions: usize = results.iter().map(|r| r.2).sum();
    let classification_failures: usize = results.iter().map(|r| r.1).sum();
    if classification_failures * 20 > solutions {
        return Err(Error::Classification(format!(
            "{classification_failures} of {solutions} solutions could not be classified; kinematics look non-generic"
        )));
    }
    let per_trial: Vec<Vec<usize>> = results.into_iter().map(|r| r.0).collect();
    let matching_trials = per_trial
        .iter()
        .filter(|c| c.iter().zip(&expected).all(|(a, b)| *a as u128 == *b))
        .count();
    Ok(SectorCensus { n, expected, per_trial, matching_trials, classification_failures, solutions })
}

/// `⟨ab⟩⁴ / (⟨α1 α2⟩ ⟨α2 α3⟩ .. ⟨αn α1⟩)`.
pub fn mhv_partial(p: &SpinorPoint, ordering: &[usize], a: usize, b: usize) -> Result<C> {
    validate_permutation(ordering)?;
    let n = p.n();
    if ordering.len() != n || a == b || !(1..=n).contains(&a) || !(1..=n).contains(&b) {
        return Err(Error::InvalidInput("need an ordering of 1..n and two distinct negative-helicity legs".into()));
    }
    let mut denom = C::one();
    for k in 0..n {
        denom *= p.angle(ordering[k], ordering[(k + 1) % n]);
    }
    if denom.norm() == 0.0 {
        return Err(Error::Pole("vanishing angle bracket".into()));
    }
    Ok(p.angle(a, b).powu(4) / denom)
}

/// `θ(v)`: column `(a, b)` goes to `(a^(k-1), a^(k-2) b, .., b^(k-1))`.
pub fn veronese(v: &DMatrix<C>, k: usize) -> Result<DMatrix<C>> {
    if v.nrows() != 2 || k == 0 {
        return Err(Error::InvalidInput("veronese needs a 2 x n array and k >= 1".into()));
    }
    Ok(DMatrix::from_fn(k, v.ncols(), |r, i| v[(0, i)].powu((k - 1 - r) as u32) * v[(1, i)].powu(r as u32)))
}

/// `‖C C̃ᵀ‖` for `C = θ_{d+1}(1, σ) diag(t)` and `C̃ = θ_{n-d-1}(1, σ) diag(t̃)`
/// with `t_i t̃_i = ∏_{j≠i} (σj - σi)⁻¹`; all `n` punctures finite.
pub fn veronese_orthogonality(sigma: &[C], t: &[C], d: usize) -> Result<f64> {
    let n = sigma.len();
    if t.len() != n || d == 0 || d + 2 > n {
        return Err(Error::InvalidInput("need n values of t and 1 <= d <= n - 2".into()));
    }
    let base = DMatrix::from_fn(2, n, |r, i| if r == 0 { C::one() } else { sigma[i] });
    let t_tilde: Vec<C> = (0..n)
        .map(|i| {
            let prod: C = (0..n).filter(|&j| j != i).map(|j| sigma[j] - sigma[i]).product();
            (t[i] * prod).inv()
        })
        .collect();
    let mut c = veronese(&base, d + 1)?;
    let mut c_tilde = veronese(&base, n - d - 1)?;
    for i in 0..n {
        c.column_mut(i).iter_mut().for_each(|v| *v *= t[i]);
        c_tilde.column_mut(i).iter_mut().for_each(|v| *v *= t_tilde[i]);
    }
    // θ uses descending powers of the first entry; flip to rows t σ^m
    let c = DMatrix::from_fn(c.nrows(), n, |r, i| c[(c.nrows() - 1 - r, i)]);
    Ok((&c * c_tilde.transpose()).iter().fold(0.0, |a, v| a.max(v.norm())))
}
