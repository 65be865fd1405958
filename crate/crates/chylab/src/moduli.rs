//! Points of M(0,n) in the gauge `(σ1, σ2, σn) = (0, 1, ∞)` and in the
//! positive chart `y`, cross-ratios, dihedral coordinates, u-equations and
//! the Koba–Nielsen potential.
//!
//! Every puncture is a column `(1, σ)` of a 2×n matrix, with `(0, 1)` for
//! the point at infinity, and the minor `(ij)` is the 2×2 determinant of
//! columns `i, j`. So `(ij) = σj - σi` for finite points and `(in) = 1`,
//! which makes the cancellation of infinite factors automatic.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::combinatorics::{diagonals, Diagonal};
use crate::error::{Error, Result};
use crate::kinematics::{MandelstamPoint, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ModuliPoint {
    n: usize,
    sigma: Vec<Complex64>,
}

impl ModuliPoint {
    /// `sigma` holds `σ3, .., σ(n-1)`.
    pub fn new(n: usize, sigma: Vec<Complex64>) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidPolygon(n));
        }
        if sigma.len() != n - 3 {
            return Err(Error::InvalidInput(format!("need {} free punctures for n = {n}", n - 3)));
        }
        let p = ModuliPoint { n, sigma };
        let all = p.finite_values();
        for a in 0..all.len() {
            if !all[a].re.is_finite() || !all[a].im.is_finite() {
                return Err(Error::InvalidInput("non-finite puncture".into()));
            }
            for b in 0..a {
                if all[a] == all[b] {
                    return Err(Error::InvalidInput(format!("punctures {} and {} coincide", b + 1, a + 1)));
                }
            }
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &[Complex64] {
        &self.sigma
    }

    /// `σi` for finite punctures, `None` for `σn = ∞`.
    pub fn value(&self, i: usize) -> Option<Complex64> {
        match i {
            1 => Some(Complex64::zero()),
            2 => Some(Complex64::one()),
            k if k == self.n => None,
            k => Some(self.sigma[k - 3]),
        }
    }

    /// `σ1, .., σ(n-1)`.
    pub fn finite_values(&self) -> Vec<Complex64> {
        let mut v = vec![Complex64::zero(), Complex64::one()];
        v.extend_from_slice(&self.sigma);
        v
    }

    /// Homogeneous column of puncture `i`.
    pub fn column(&self, i: usize) -> [Complex64; 2] {
        match self.value(i) {
            Some(s) => [Complex64::one(), s],
            None => [Complex64::zero(), Complex64::one()],
        }
    }

    /// `(ij) = det(col_i, col_j)`; equals `σj - σi` when both are finite.
    pub fn minor(&self, i: usize, j: usize) -> Complex64 {
        let (a, b) = (self.column(i), self.column(j));
        a[0] * b[1] - a[1] * b[0]
    }

    /// Max-norm distance between the free coordinates.
    pub fn distance(&self, other: &ModuliPoint) -> f64 {
        self.sigma.iter().zip(&other.sigma).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `[ij|kl] = (ik)(jl) / ((il)(jk))`.
pub fn cross_ratio(p: &ModuliPoint, i: usize, j: usize, k: usize, l: usize) -> Result<Complex64> {
    let idx = [i, j, k, l];
    for a in 0..4 {
        if idx[a] < 1 || idx[a] > p.n {
            return Err(Error::InvalidInput(format!("index {} out of range", idx[a])));
        }
        for b in 0..a {
            if idx[a] == idx[b] {
                return Err(Error::InvalidInput(format!("cross-ratio indices {idx:?} not distinct")));
            }
        }
    }
    Ok(p.minor(i, k) * p.minor(j, l) / (p.minor(i, l) * p.minor(j, k)))
}

fn wrap(n: usize, i: usize) -> usize {
    (i - 1) % n + 1
}

/// Dihedral coordinates `u_ij` indexed by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct DihedralVector<T> {
    pub n: usize,
    pub u: BTreeMap<Diagonal, T>,
}

impl<T: Scalar> DihedralVector<T> {
    pub fn new(n: usize, u: BTreeMap<Diagonal, T>) -> Result<Self> {
        let diags = diagonals(n)?;
        if u.len() != diags.len() || diags.iter().any(|d| !u.contains_key(d)) {
            return Err(Error::InvalidInput(format!("need one u per diagonal of the {n}-gon")));
        }
        Ok(DihedralVector { n, u })
    }

    /// `u_ij = u_ji`, indices cyclic.
    pub fn get(&self, i: usize, j: usize) -> T {
        let d = Diagonal::from([wrap(self.n, i), wrap(self.n, j)]);
        self.u[&d].clone()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> DihedralVector<U> {
        DihedralVector { n: self.n, u: self.u.iter().map(|(d, v)| (*d, f(v))).collect() }
    }
}

/// `u_ij = [i, i+1 | j+1, j]`.
pub fn u_from_sigma(p: &ModuliPoint) -> DihedralVector<Complex64> {
    let n = p.n;
    let u = diagonals(n)
        .expect("n >= 4")
        .into_iter()
        .map(|d| {
            let (i, j) = (d.i, d.j);
            let v = cross_ratio(p, i, wrap(n, i + 1), wrap(n, j + 1), j).expect("distinct indices");
            (d, v)
        })
        .collect();
    DihedralVector { n, u }
}

/// `R_ij = u_ij + ∏_{(kl) crosses (ij)} u_kl - 1`.
pub fn u_equation_residuals<T: Scalar>(u: &DihedralVector<T>) -> BTreeMap<Diagonal, T> {
    u.u.iter()
        .map(|(d, v)| {
            let prod = u.u.iter().filter(|(e, _)| e.crosses(d)).fold(T::one(), |acc, (_, w)| acc * w.clone());
            (*d, v.clone() + prod - T::one())
        })
        .collect()
}

/// Splits `1..=n` into four consecutive nonempty cyclic arcs.
fn check_arcs(n: usize, arcs: [&[usize]; 4]) -> Result<()> {
    let seq: Vec<usize> = arcs.iter().flat_map(|a| a.iter().copied()).collect();
    if arcs.iter().any(|a| a.is_empty()) || seq.len() != n {
        return Err(Error::InvalidInput("need four nonempty arcs covering 1..n".into()));
    }
    let start = seq[0];
    for (k, &v) in seq.iter().enumerate() {
        if v != wrap(n, start + k) {
            return Err(Error::InvalidInput(format!("{seq:?} is not a cyclic arc decomposition")));
        }
    }
    Ok(())
}

/// `R_{A,B,C,D} = u_{A,C} + u_{B,D} - 1` with `u_{A,C} = ∏ u_ac`.
pub fn generalized_residual<T: Scalar>(u: &DihedralVector<T>, a: &[usize], b: &[usize], c: &[usize], d: &[usize]) -> Result<T> {
    check_arcs(u.n, [a, b, c, d])?;
    let block = |x: &[usize], y: &[usize]| {
        let mut acc = T::one();
        for &p in x {
            for &q in y {
                acc = acc * u.get(p, q);
            }
        }
        acc
    };
    Ok(block(a, c) + block(b, d) - T::one())
}

/// Positive chart: `σ2 = 1`, `σ3 = 1 + y1`, `σ4 = 1 + y1 + y1 y2`, ...
#[derive(Debug, Clone, PartialEq)]
pub struct PositivePoint {
    n: usize,
    y: Vec<f64>,
}

impl PositivePoint {
    pub fn new(n: usize, y: Vec<f64>) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidPolygon(n));
        }
        if y.len() != n - 3 {
            return Err(Error::InvalidInput(format!("need {} positive coordinates", n - 3)));
        }
        if y.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput("positive coordinates must be > 0".into()));
        }
        Ok(PositivePoint { n, y })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// `p_ab = 1 + y_a + y_a y_(a+1) + .. + y_a .. y_(b-2)`.
    pub fn p(&self, a: usize, b: usize) -> f64 {
        let mut total = 0.0;
        let mut term = 1.0;
        for m in 0..b - a {
            if m > 0 {
                term *= self.y[a + m - 2];
            }
            total += term;
        }
        total
    }

    /// `y1 .. y(a-1)`.
    pub fn prefix(&self, a: usize) -> f64 {
        self.y[..a - 1].iter().product()
    }

    /// Minor `(ab)` for `1 ≤ a < b ≤ n`, computed from positive sums only.
    pub fn minor(&self, a: usize, b: usize) -> f64 {
        if b == self.n {
            1.0
        } else {
            self.prefix(a) * self.p(a, b)
        }
    }
}

pub fn sigma_from_y(p: &PositivePoint) -> ModuliPoint {
    let mut sigma = Vec::with_capacity(p.n - 3);
    let (mut acc, mut term) = (1.0, 1.0);
    for k in 0..p.n - 3 {
        term *= p.y[k];
        acc += term;
        sigma.push(Complex64::new(acc, 0.0));
    }
    ModuliPoint { n: p.n, sigma }
}

/// Dihedral coordinates straight from the chart polynomials.
pub fn u_from_y(p: &PositivePoint) -> DihedralVector<f64> {
    let n = p.n;
    let m = |a: usize, b: usize| {
        let (a, b) = (wrap(n, a), wrap(n, b));
        p.minor(a.min(b), a.max(b))
    };
    let u = diagonals(n)
        .expect("n >= 4")
        .into_iter()
        .map(|d| {
            let (i, j) = (d.i, d.j);
            (d, m(i, j + 1) * m(i + 1, j) / (m(i, j) * m(i + 1, j + 1)))
        })
        .collect();
    DihedralVector { n, u }
}

/// Exponents of `u_ij` in the basis `(y_1, .., y_(n-3), p_ab)` with the
/// `p_ab` ordered as [`crate::kinematics::subspace_pairs`].
pub fn u_exponents(n: usize, d: &Diagonal) -> Vec<i64> {
    let pairs = crate::kinematics::subspace_pairs(n);
    let mut e = vec![0i64; n - 3 + pairs.len()];
    let mut add = |a: usize, b: usize, w: i64| {
        let (a, b) = (wrap(n, a), wrap(n, b));
        let (a, b) = (a.min(b), a.max(b));
        if b == n {
            return;
        }
        for k in 1..a {
            e[k - 1] += w;
        }
        if b >= a + 2 {
            let col = pairs.iter().position(|&q| q == (a, b)).expect("pair listed");
            e[n - 3 + col] += w;
        }
    };
    let (i, j) = (d.i, d.j);
    add(i, j + 1, 1);
    add(i + 1, j, 1);
    add(i, j, -1);
    add(i + 1, j + 1, -1);
    e
}

/// Square integer matrix whose rows are [`u_exponents`] over all diagonals.
pub fn u_exponent_matrix(n: usize) -> Vec<Vec<i64>> {
    diagonals(n).expect("n >= 4").iter().map(|d| u_exponents(n, d)).collect()
}

/// Principal-branch `log φ = Σ_{i<j<n} s_ij log(σi - σj)`; the factors
/// involving `σn = ∞` drop out.
pub fn log_potential(p: &ModuliPoint, m: &MandelstamPoint<Complex64>) -> Complex64 {
    let v = p.finite_values();
    let mut acc = Complex64::zero();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            acc += m.get(i + 1, j + 1) * (v[i] - v[j]).ln();
        }
    }
    acc
}

/// `log φ = Σ X_{i+1,j+1} log u_ij`. The planar variable paired with
/// `u_ij` is the one rotated by one step; with that pairing the two
/// expressions for the potential agree modulo `2πi`.
pub fn log_potential_dihedral(p: &ModuliPoint, m: &MandelstamPoint<Complex64>) -> Complex64 {
    let x = crate::kinematics::x_from_s(m);
    let u = u_from_sigma(p);
    u.u.iter().map(|(d, v)| x.get(d.i + 1, d.j + 1) * v.ln()).sum()
}

/// `∂ log φ / ∂σk = Σ_{j ≠ k, j < n} s_kj / (σk - σj)`, for `k = 3..n-1`.
pub fn gradient_log_potential(p: &ModuliPoint, m: &MandelstamPoint<Complex64>) -> Vec<Complex64> {
    let v = p.finite_values();
    (2..v.len())
        .map(|k| {
            (0..v.len())
                .filter(|&j| j != k)
                .map(|j| m.get(k + 1, j + 1) / (v[k] - v[j]))
                .sum()
        })
        .collect()
}

/// Coefficient of `dσ3 ∧ .. ∧ dσ(n-1)` in the canonical form:
/// `1 / ((23)(34) .. (n-2, n-1))`.
pub fn canonical_form_coefficient(p: &ModuliPoint) -> Result<Complex64> {
    let mut denom = Complex64::one();
    for i in 2..p.n - 1 {
        denom *= p.minor(i, i + 1);
    }
    if denom.norm() == 0.0 {
        return Err(Error::Pole("coincident punctures".into()));
    }
    Ok(denom.inv())
}

/// Coefficient of `dy1 ∧ .. ∧ dy(n-3)`: `1 / (y1 .. y(n-3))`.
pub fn canonical_form_coefficient_y(p: &PositivePoint) -> f64 {
    1.0 / p.y.iter().product::<f64>()
}

/// `det ∂σ/∂y`; the Jacobian is lower triangular with diagonal
/// `∂σ(k+2)/∂yk = y1 .. y(k-1)`.
pub fn sigma_y_jacobian(p: &PositivePoint) -> f64 {
    (1..=p.n - 3).map(|k| p.prefix(k)).product()
}

/// Applies `x ↦ (a x + b) / (c x + d)`, `g = [[a, b], [c, d]]`, to every
/// puncture and returns homogeneous columns `[w, x]` (value `x / w`).
pub fn mobius_columns(p: &ModuliPoint, g: [[Complex64; 2]; 2]) -> Vec<[Complex64; 2]> {
    (1..=p.n)
        .map(|i| {
            let [w, x] = p.column(i);
            [g[1][0] * x + g[1][1] * w, g[0][0] * x + g[0][1] * w]
        })
        .collect()
}

/// Re-gauges an arbitrary configuration of `n` homogeneous columns so that
/// punctures `1, 2, n` sit at `0, 1, ∞`.
pub fn from_columns(cols: &[[Complex64; 2]]) -> Result<ModuliPoint> {
    let n = cols.len();
    let minor = |a: usize, b: usize| cols[a - 1][0] * cols[b - 1][1] - cols[a - 1][1] * cols[b - 1][0];
    let sigma = (3..n).map(|k| minor(1, k) * minor(n, 2) / (minor(n, k) * minor(1, 2))).collect();
    ModuliPoint::new(n, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{random_point, rat};
    use crate::linalg;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_moduli(n: usize, rng: &mut impl Rng) -> ModuliPoint {
        let sigma = (0..n - 3).map(|_| c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect();
        ModuliPoint::new(n, sigma).unwrap()
    }

    fn random_positive(n: usize, rng: &mut impl Rng) -> PositivePoint {
        PositivePoint::new(n, (0..n - 3).map(|_| rng.random_range(0.05..5.0)).collect()).unwrap()
    }

    #[test]
    fn point_validation() {
        assert!(ModuliPoint::new(5, vec![c(2.0, 0.0)]).is_err());
        assert!(ModuliPoint::new(5, vec![c(2.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(ModuliPoint::new(5, vec![c(2.0, 0.0), c(2.0, 0.0)]).is_err());
        assert!(PositivePoint::new(5, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn minors_at_infinity() {
        let p = ModuliPoint::new(5, vec![c(2.0, 0.0), c(3.0, 1.0)]).unwrap();
        assert_eq!(p.minor(3, 5), Complex64::one());
        assert_eq!(p.minor(5, 3), -Complex64::one());
        assert_eq!(p.minor(2, 4), c(2.0, 1.0));
        assert!(cross_ratio(&p, 1, 1, 2, 3).is_err());
    }

    #[test]
    fn cross_ratio_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 4..=7 {
            let p = random_moduli(n, &mut rng);
            for (i, j, k, l) in [(1, 2, 3, n), (2, 4, 1, 3), (n, 1, 3, 2)] {
                let a = cross_ratio(&p, i, j, k, l).unwrap();
                let b = cross_ratio(&p, i, k, j, l).unwrap();
                assert!((a + b - 1.0).norm() < 1e-12);
                assert!((cross_ratio(&p, i, j, l, k).unwrap() * a - 1.0).norm() < 1e-12);
                assert!((cross_ratio(&p, j, i, k, l).unwrap() * a - 1.0).norm() < 1e-12);
                assert!((cross_ratio(&p, k, l, i, j).unwrap() - a).norm() < 1e-12);
                assert!((cross_ratio(&p, j, i, l, k).unwrap() - a).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn four_point_dihedral() {
        let p = ModuliPoint::new(4, vec![c(2.5, 0.3)]).unwrap();
        let u = u_from_sigma(&p);
        assert!((u.get(1, 3) + u.get(2, 4) - 1.0).norm() < 1e-14);
        let y = PositivePoint::new(4, vec![1.0]).unwrap();
        let uy = u_from_y(&y);
        assert_eq!(uy.get(1, 3), 0.5);
        assert_eq!(uy.get(2, 4), 0.5);
    }

    #[test]
    fn five_point_values_at_unit_y() {
        let y = PositivePoint::new(5, vec![1.0, 1.0]).unwrap();
        let s = sigma_from_y(&y);
        assert_eq!(s.sigma(), &[c(2.0, 0.0), c(3.0, 0.0)]);
        let u = u_from_y(&y);
        let expect = [((1, 3), 0.75), ((1, 4), 2.0 / 3.0), ((2, 4), 0.5), ((2, 5), 0.5), ((3, 5), 2.0 / 3.0)];
        for ((i, j), v) in expect {
            assert!((u.get(i, j) - v).abs() < 1e-15, "u{i}{j}");
        }
        assert!((u.get(1, 3) + u.get(2, 4) * u.get(2, 5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn five_point_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let p = random_positive(5, &mut rng);
            let (y1, y2) = (p.y()[0], p.y()[1]);
            let u = u_from_y(&p);
            let expect = [
                ((1, 3), (1.0 + y1 + y1 * y2) / ((1.0 + y1) * (1.0 + y2))),
                ((1, 4), y1 * (1.0 + y2) / (1.0 + y1 + y1 * y2)),
                ((2, 4), y2 / (1.0 + y2)),
                ((2, 5), 1.0 / (1.0 + y1)),
                ((3, 5), (1.0 + y1) / (1.0 + y1 + y1 * y2)),
            ];
            for ((i, j), v) in expect {
                assert!((u.get(i, j) - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn boundary_point_residual() {
        let u = DihedralVector::new(4, [(Diagonal { i: 1, j: 3 }, 1.0), (Diagonal { i: 2, j: 4 }, 0.0)].into()).unwrap();
        assert!(u_equation_residuals(&u).values().all(|r| *r == 0.0));
    }

    #[test]
    fn five_point_u_equations_from_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = random_moduli(5, &mut rng);
        let u = u_from_sigma(&p);
        let one = Complex64::one();
        assert!((u.get(1, 3) + u.get(2, 4) * u.get(2, 5) - one).norm() < 1e-12);
        assert!((u.get(2, 4) + u.get(3, 5) * u.get(1, 3) - one).norm() < 1e-12);
        assert!((u.get(3, 5) + u.get(1, 4) * u.get(2, 4) - one).norm() < 1e-12);
        assert!((u.get(1, 4) + u.get(2, 5) * u.get(3, 5) - one).norm() < 1e-12);
        assert!((u.get(2, 5) + u.get(1, 3) * u.get(1, 4) - one).norm() < 1e-12);
    }

    #[test]
    fn generalized_relation_at_seven_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = random_positive(7, &mut rng);
        let u = u_from_y(&y);
        let r = generalized_residual(&u, &[2, 3], &[4], &[5, 6, 7], &[1]).unwrap();
        let explicit = u.get(2, 5) * u.get(2, 6) * u.get(2, 7) * u.get(3, 5) * u.get(3, 6) * u.get(3, 7) + u.get(1, 4) - 1.0;
        assert_eq!(r, explicit);
        assert!(r.abs() < 1e-12);
        assert!(generalized_residual(&u, &[2, 3], &[5], &[4, 6, 7], &[1]).is_err());
        let uc = u_from_sigma(&random_moduli(7, &mut rng));
        assert!(generalized_residual(&uc, &[7, 1], &[2, 3], &[4], &[5, 6]).unwrap().norm() < 1e-11);
    }

    #[test]
    fn chart_jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 4..=7 {
            let p = random_positive(n, &mut rng);
            let h = 1e-6;
            let d = n - 3;
            let mut jac = vec![vec![0.0; d]; d];
            for k in 0..d {
                let mut up = p.y().to_vec();
                let mut dn = p.y().to_vec();
                up[k] += h;
                dn[k] -= h;
                let su = sigma_from_y(&PositivePoint::new(n, up).unwrap());
                let sd = sigma_from_y(&PositivePoint::new(n, dn).unwrap());
                for r in 0..d {
                    jac[r][k] = (su.sigma()[r].re - sd.sigma()[r].re) / (2.0 * h);
                }
            }
            let fd = nalgebra::DMatrix::from_fn(d, d, |r, k| jac[r][k]).determinant();
            assert!((fd - sigma_y_jacobian(&p)).abs() < 1e-6 * sigma_y_jacobian(&p).abs().max(1.0));
            let sc = canonical_form_coefficient(&sigma_from_y(&p)).unwrap().re;
            let yc = canonical_form_coefficient_y(&p);
            assert!((sc * fd - yc).abs() < 1e-6 * yc);
        }
    }

    #[test]
    fn canonical_form_small_cases() {
        let p = ModuliPoint::new(4, vec![c(3.0, 0.0)]).unwrap();
        assert_eq!(canonical_form_coefficient(&p).unwrap(), c(0.5, 0.0));
        let y = PositivePoint::new(5, vec![1.0, 1.0]).unwrap();
        assert_eq!(canonical_form_coefficient_y(&y), 1.0);
    }

    #[test]
    fn exponent_change_of_basis_is_unimodular() {
        for n in 4..=8 {
            let m = u_exponent_matrix(n);
            assert_eq!(m.len(), (n - 3) + (n - 2) * (n - 3) / 2);
            assert!(m.iter().all(|r| r.len() == m.len()));
            let det = linalg::det(linalg::from_i64(&m));
            assert!(det == rat(1) || det == rat(-1), "n = {n}: det {det}");
        }
    }

    #[test]
    fn potential_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 4..=7 {
            let m = random_point(n, rng.random(), (-10, 10)).unwrap().to_complex();
            let y = random_positive(n, &mut rng);
            let p = sigma_from_y(&y);
            let a = log_potential(&p, &m);
            let b = log_potential_dihedral(&p, &m);
            assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
            let q = random_moduli(n, &mut rng);
            let k = (log_potential(&q, &m) - log_potential_dihedral(&q, &m)) / Complex64::new(0.0, 2.0 * std::f64::consts::PI);
            assert!((k - k.re.round()).norm() < 1e-9);
        }
    }

    #[test]
    fn gradient_vanishes_at_four_point_solution() {
        let (s, t) = (2.0, 3.0);
        let m = crate::kinematics::s_from_x(
            &crate::kinematics::PlanarPoint::from_fn(4, |d| if d.i == 1 { s } else { t }).unwrap(),
        )
        .to_complex();
        let p = ModuliPoint::new(4, vec![c((s + t) / s, 0.0)]).unwrap();
        assert!(gradient_log_potential(&p, &m)[0].norm() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 4..=7 {
            let m = random_point(n, rng.random(), (-10, 10)).unwrap().to_complex();
            let p = random_moduli(n, &mut rng);
            let g = gradient_log_potential(&p, &m);
            for k in 0..n - 3 {
                let h = 1e-6;
                let shift = |delta: f64| {
                    let mut s = p.sigma().to_vec();
                    s[k] += delta;
                    log_potential(&ModuliPoint::new(n, s).unwrap(), &m)
                };
                let fd = (shift(h) - shift(-h)) / (2.0 * h);
                assert!((fd - g[k]).norm() < 1e-5 * g[k].norm().max(1.0));
            }
        }
    }

    #[test]
    fn regauging_undoes_mobius_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 4..=7 {
            let p = random_moduli(n, &mut rng);
            let c = |r: &mut ChaCha8Rng| Complex64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
            let g = [[c(&mut rng), c(&mut rng)], [c(&mut rng), c(&mut rng)]];
            let q = from_columns(&mobius_columns(&p, g)).unwrap();
            assert!(p.distance(&q) < 1e-10);
            let cr = |x: &ModuliPoint| cross_ratio(x, 1, 3, 2, n).unwrap();
            assert!((cr(&p) - cr(&q)).norm() < 1e-10 * cr(&p).norm());
        }
    }

    proptest! {
        #[test]
        fn positive_points_solve_u_equations(n in 4usize..=8, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = random_positive(n, &mut rng);
            let u = u_from_y(&y);
            for v in u.u.values() {
                prop_assert!(*v > 0.0 && *v < 1.0);
            }
            for r in u_equation_residuals(&u).values() {
                prop_assert!(r.abs() < 1e-12);
            }
            let us = u_from_sigma(&sigma_from_y(&y));
            for (d, v) in &u.u {
                prop_assert!((us.u[d].re - v).abs() < 1e-9);
            }
            let s = sigma_from_y(&y);
            for w in s.finite_values().windows(2) {
                prop_assert!(w[1].re > w[0].re);
            }
        }

        #[test]
        fn complex_points_solve_u_equations(n in 4usize..=7, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_moduli(n, &mut rng);
            let u = u_from_sigma(&p);
            let scale = u.u.values().map(|v| v.norm()).fold(1.0, f64::max).powi(n as i32);
            for r in u_equation_residuals(&u).values() {
                prop_assert!(r.norm() < 1e-9 * scale);
            }
        }
    }
}
