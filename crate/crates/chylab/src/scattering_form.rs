//! The planar scattering form `Ψn = Σ_D sign(D) ∧_{(ij) ∈ D} dlog X_ij`,
//! its pullback to the slices `H(c)`, and the scattering map
//! `M0,n → H(c)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::combinatorics::{diagonals, orientation_signs, Diagonal, Triangulation};
use crate::error::{Error, Result};
use crate::kinematics::{point_on_subspace, rat, subspace_pairs, MandelstamPoint, PlanarPoint, Rational, SubspaceSpec};
use crate::linalg;
use crate::moduli::{sigma_from_y, ModuliPoint, PositivePoint};

type C = Complex64;

/// One signed wedge `sign · dlog X_{d1} ∧ .. ∧ dlog X_{dk}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormTerm {
    pub triangulation: Triangulation,
    pub sign: i8,
    pub order: Vec<Diagonal>,
}

/// One term per triangulation, diagonals in sorted order, signed by the
/// flip-coherent orientation rooted at the fan triangulation.
pub fn scattering_form_terms(n: usize) -> Result<Vec<FormTerm>> {
    let orientation = orientation_signs(n)?;
    Ok(orientation
        .signs
        .iter()
        .map(|(t, &sign)| FormTerm { triangulation: t.clone(), sign, order: t.diagonals.clone() })
        .collect())
}

/// Linear part of `X_d` in the fan coordinates `X_13, .., X_1,n-1` on any
/// slice `H(c)`.
pub fn fan_coefficients(n: usize) -> Result<BTreeMap<Diagonal, Vec<Rational>>> {
    let zero = SubspaceSpec::new(n, subspace_pairs(n).into_iter().map(|p| (p, rat(0))).collect())?;
    let mut out: BTreeMap<Diagonal, Vec<Rational>> =
        diagonals(n)?.into_iter().map(|d| (d, vec![Rational::zero(); n - 3])).collect();
    for k in 0..n - 3 {
        let mut e = vec![rat(0); n - 3];
        e[k] = rat(1);
        let p = point_on_subspace(&zero, &e)?;
        for (d, v) in p.values() {
            out.get_mut(d).expect("all diagonals present")[k] = v.clone();
        }
    }
    Ok(out)
}

/// `sign(D) · det(∂X_D / ∂X_fan)` for every triangulation. On each slice
/// this is the same `±1` for all `D`.
pub fn pullback_determinants(n: usize) -> Result<Vec<(Triangulation, Rational)>> {
    let coeffs = fan_coefficients(n)?;
    scattering_form_terms(n)?
        .into_iter()
        .map(|term| {
            let rows: Vec<Vec<Rational>> = term.order.iter().map(|d| coeffs[d].clone()).collect();
            let det = linalg::det(rows) * rat(term.sign as i64);
            Ok((term.triangulation, det))
        })
        .collect()
}

/// Coefficient of `dX_13 ∧ .. ∧ dX_1,n-1` in the pullback of `Ψn` to
/// `H(c)`, evaluated at `x`. Exact.
pub fn pullback_coefficient(c: &SubspaceSpec<Rational>, x: &PlanarPoint<Rational>) -> Result<Rational> {
    if !c.contains(x) {
        return Err(Error::InvalidInput("point does not lie on H(c)".into()));
    }
    let mut total = Rational::zero();
    for (t, det) in pullback_determinants(c.n)? {
        let mut denom = Rational::one();
        for d in &t.diagonals {
            denom *= x.at(d);
        }
        if denom.is_zero() {
            return Err(Error::Pole(format!("a planar variable of {:?} vanishes", t.diagonals)));
        }
        total += det / denom;
    }
    Ok(total)
}

/// The scattering map in the gauge `σn = ∞`, driven by the constants
/// `c_ij`. Each adjacent invariant is eliminated with the partial sums
/// `Q1 + .. + Qk = 0`:
/// `s_{k,k+1} = -σ_{k,k+1} Σ s_ij / σ_ij` over `i ≤ k < j ≤ n-1`,
/// `(i, j) ≠ (k, k+1)`; then `X_ab = Σ_{a ≤ i < j < b} s_ij`.
pub fn scattering_map_c(c: &SubspaceSpec<C>, p: &ModuliPoint) -> Result<PlanarPoint<C>> {
    let n = c.n;
    if p.n() != n {
        return Err(Error::InvalidInput("point and constants disagree on n".into()));
    }
    let v = p.finite_values();
    let sig = |a: usize, b: usize| v[a - 1] - v[b - 1];
    let mut s = vec![vec![C::zero(); n]; n];
    for (&(i, j), val) in &c.c {
        s[i][j] = -val;
    }
    for k in 1..n - 1 {
        let mut acc = C::zero();
        for i in 1..=k {
            for j in k + 1..n {
                if (i, j) != (k, k + 1) {
                    acc += s[i][j] / sig(i, j);
                }
            }
        }
        s[k][k + 1] = -sig(k, k + 1) * acc;
    }
    PlanarPoint::from_fn(n, |d| {
        let mut x = C::zero();
        for i in d.i..d.j {
            for j in i + 1..d.j {
                x += s[i][j];
            }
        }
        x
    })
}

/// [`scattering_map_c`] with `c = c(s)`; on solutions of the scattering
/// equations for `m` it returns the planar variables of `m`.
pub fn scattering_map(m: &MandelstamPoint<C>, p: &ModuliPoint) -> Result<PlanarPoint<C>> {
    scattering_map_c(&crate::kinematics::c_from_s(m), p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociahedronReport {
    pub n: usize,
    pub samples: usize,
    pub all_positive: bool,
    pub min_x: f64,
    /// Some `X` tends to zero as a positive coordinate `y_i → 0`.
    pub boundary_ok: bool,
    /// No two samples share an image (spot check of injectivity).
    pub distinct_images: bool,
}

/// Samples positive points `y` (log-uniform in `[e^-3, e^3]`) and checks
/// that the scattering map lands in the positive orthant of `H(c)`.
pub fn associahedron_check(c: &SubspaceSpec<f64>, samples: usize, seed: u64) -> Result<AssociahedronReport> {
    let n = c.n;
    if c.c.values().any(|v| *v <= 0.0) {
        return Err(Error::InvalidInput("associahedron check needs positive constants".into()));
    }
    let cc = SubspaceSpec::new(n, c.c.iter().map(|(k, v)| (*k, C::new(*v, 0.0))).collect())?;
    let image = |y: Vec<f64>| -> Result<Vec<f64>> {
        let x = scattering_map_c(&cc, &sigma_from_y(&PositivePoint::new(n, y)?))?;
        Ok(x.values().values().map(|v| v.re).collect())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_x = f64::INFINITY;
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(samples);
    for _ in 0..samples {
        let y: Vec<f64> = (0..n - 3).map(|_| rng.random_range(-3.0f64..3.0).exp()).collect();
        let x = image(y)?;
        min_x = x.iter().copied().fold(min_x, f64::min);
        images.push(x);
    }
    let mut boundary_ok = true;
    for i in 0..n - 3 {
        let mut y = vec![1.0; n - 3];
        y[i] = 1e-9;
        let x = image(y)?;
        let smallest = x.iter().copied().fold(f64::INFINITY, f64::min);
        boundary_ok &= smallest.abs() < 1e-6;
    }
    let mut distinct_images = true;
    for a in 0..images.len() {
        for b in 0..a {
            let d = images[a].iter().zip(&images[b]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            distinct_images &= d > 1e-10;
        }
    }
    Ok(AssociahedronReport { n, samples, all_positive: min_x > 0.0, min_x, boundary_ok, distinct_images })
}
