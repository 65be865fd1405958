//! Tropical potentials in the positive chart, the fan of `M0,n`, and the
//! Laplace-transform amplitude.
//!
//! Conventions: `Y = -log y`, so a monomial `y^a` tropicalizes to `<a, Y>`
//! and a positive polynomial to the minimum over its monomials. The
//! integrand behaves like `exp(-trop φ)` far out in the chart.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{diagonals, enumerate_subdivisions, enumerate_triangulations, Diagonal, Subdivision};
use crate::error::{Error, Result};
use crate::kinematics::{s_from_x, subspace_pairs, MandelstamPoint, PlanarPoint, Rational};
use crate::moduli::u_exponents;

/// A polynomial with positive coefficients, stored by its exponent vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub exponents: Vec<Vec<i64>>,
    pub c: f64,
}

/// `φ = ∏ y_i^{τ_i} ∏ p_j(y)^{-c_j}` on the positive orthant of `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub d: usize,
    pub tau: Vec<f64>,
    pub terms: Vec<PolyTerm>,
}

/// Exponents of `p_ab = 1 + y_a + y_a y_(a+1) + .. + y_a .. y_(b-2)`.
pub fn chart_polynomial(n: usize, a: usize, b: usize) -> Vec<Vec<i64>> {
    (0..b - a)
        .map(|m| {
            let mut e = vec![0; n - 3];
            for k in a..a + m {
                e[k - 1] = 1;
            }
            e
        })
        .collect()
}

impl Potential {
    pub fn new(d: usize, tau: Vec<f64>, terms: Vec<PolyTerm>) -> Result<Self> {
        if tau.len() != d {
            return Err(Error::InvalidInput(format!("tau has {} entries, expected {d}", tau.len())));
        }
        for t in &terms {
            if t.exponents.is_empty() || t.exponents.iter().any(|e| e.len() != d) {
                return Err(Error::InvalidInput("polynomial exponents must have length d".into()));
            }
        }
        Ok(Potential { d, tau, terms })
    }

    /// The Koba–Nielsen potential in the chart `σ_(k+2) = 1 + y1 + .. + y1 .. yk`:
    /// `τ_k = Σ_{k < a < b < n} s_ab` and `c_ab = -s_ab`.
    pub fn from_mandelstam(m: &MandelstamPoint<f64>) -> Self {
        let n = m.n();
        let mut tau = vec![0.0; n - 3];
        for (k, t) in tau.iter_mut().enumerate() {
            for a in k + 2..n {
                for b in a + 1..n {
                    *t += m.get(a, b);
                }
            }
        }
        let terms = subspace_pairs(n)
            .into_iter()
            .map(|(a, b)| PolyTerm { exponents: chart_polynomial(n, a, b), c: -m.get(a, b) })
            .collect();
        Potential { d: n - 3, tau, terms }
    }

    pub fn from_planar(x: &PlanarPoint<f64>) -> Self {
        Self::from_mandelstam(&s_from_x(x))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Potential {
            d: self.d,
            tau: self.tau.iter().map(|t| alpha * t).collect(),
            terms: self.terms.iter().map(|t| PolyTerm { exponents: t.exponents.clone(), c: alpha * t.c }).collect(),
        }
    }

    /// `log φ(y)` evaluated with `y = exp(-Y)`, stable for large `|Y|`.
    pub fn log_value(&self, big_y: &[f64]) -> f64 {
        let mut acc = -dot_f(&self.tau, big_y);
        for t in &self.terms {
            let top = -trop_polynomial(&t.exponents, big_y);
            let lse = top + t.exponents.iter().map(|e| (-dot_i(e, big_y) - top).exp()).sum::<f64>().ln();
            acc -= t.c * lse;
        }
        acc
    }
}

fn dot_i(a: &[i64], y: &[f64]) -> f64 {
    a.iter().zip(y).map(|(a, y)| *a as f64 * y).sum()
}

fn dot_f(a: &[f64], y: &[f64]) -> f64 {
    a.iter().zip(y).map(|(a, y)| a * y).sum()
}

pub fn trop_polynomial(exponents: &[Vec<i64>], big_y: &[f64]) -> f64 {
    exponents.iter().map(|e| dot_i(e, big_y)).fold(f64::INFINITY, f64::min)
}

/// `trop φ(Y) = <τ, Y> - Σ c_j trop(p_j)(Y)`.
pub fn trop_potential(f: &Potential, big_y: &[f64]) -> f64 {
    dot_f(&f.tau, big_y) - f.terms.iter().map(|t| t.c * trop_polynomial(&t.exponents, big_y)).sum::<f64>()
}

/// `trop u_d (Y)` for a dihedral coordinate in the chart.
pub fn trop_u(n: usize, d: &Diagonal, big_y: &[f64]) -> f64 {
    let e = u_exponents(n, d);
    let mut total = dot_i(&e[..n - 3], big_y);
    for (col, (a, b)) in subspace_pairs(n).into_iter().enumerate() {
        let w = e[n - 3 + col];
        if w != 0 {
            total += w as f64 * trop_polynomial(&chart_polynomial(n, a, b), big_y);
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TropicalFan {
    pub n: usize,
    /// Coordinate order of the rays in `K_n*`.
    pub diagonals: Vec<Diagonal>,
    /// Every cone, indexed by a subdivision, with its generators as unit
    /// vectors dual to the planar variables.
    pub cones: Vec<(Subdivision, Vec<Vec<i64>>)>,
    /// The same rays realized in the `Y` chart: `trop(φ)(ray(X_ij)) = X_ij`.
    pub chart_rays: BTreeMap<Diagonal, Vec<i64>>,
}

impl TropicalFan {
    pub fn maximal_cones(&self) -> impl Iterator<Item = &(Subdivision, Vec<Vec<i64>>)> {
        self.cones.iter().filter(|(s, _)| s.is_triangulation())
    }
}

pub fn trop_fan(n: usize) -> Result<TropicalFan> {
    let diags = diagonals(n)?;
    let unit = |d: &Diagonal| -> Vec<i64> { diags.iter().map(|e| i64::from(e == d)).collect() };
    let cones = enumerate_subdivisions(n)?
        .into_iter()
        .map(|s| {
            let rays = s.diagonals.iter().map(unit).collect();
            (s, rays)
        })
        .collect();
    Ok(TropicalFan { n, diagonals: diags.clone(), cones, chart_rays: chart_rays(n)? })
}

/// Integer vectors `r_ab` in the `Y` chart with `trop u_ij (r_ab) = δ`,
/// keyed by the planar variable `X_(a+1,b+1)` they pick out of `trop φ`.
pub fn chart_rays(n: usize) -> Result<BTreeMap<Diagonal, Vec<i64>>> {
    let d = n - 3;
    let diags = diagonals(n)?;
    let candidates: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut code| {
            (0..d)
                .map(|_| {
                    let v = (code % 3) as i64 - 1;
                    code /= 3;
                    v
                })
                .collect()
        })
        .collect();
    let mut rays = BTreeMap::new();
    for target in &diags {
        let ray = candidates
            .iter()
            .find(|r| {
                let y: Vec<f64> = r.iter().map(|&v| v as f64).collect();
                diags.iter().all(|e| {
                    let want = if e == target { 1.0 } else { 0.0 };
                    (trop_u(n, e, &y) - want).abs() < 1e-12
                })
            })
            .ok_or_else(|| Error::Unsupported(format!("no small ray dual to u{}{}", target.i, target.j)))?;
        rays.insert(target.rotate(n, 1), ray.clone());
    }
    Ok(rays)
}

/// Convergence predicate for the `M0,n` potential: `trop φ` is positive
/// on every ray of the fan, i.e. every planar variable is positive.
pub fn positivity_check(x: &PlanarPoint<f64>) -> Result<bool> {
    let f = Potential::from_planar(x);
    let rays = chart_rays(x.n())?;
    Ok(rays.values().all(|r| {
        let y: Vec<f64> = r.iter().map(|&v| v as f64).collect();
        trop_potential(&f, &y) > 0.0
    }))
}

/// Convergence predicate for a general potential with `d ≤ 2`: positivity
/// on the breakpoint rays of the common refinement plus the coordinate
/// directions.
pub fn positivity_check_general(f: &Potential) -> Result<bool> {
    let probes: Vec<Vec<f64>> = match f.d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => {
            let mut probes = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
            for t in &f.terms {
                for (i, a) in t.exponents.iter().enumerate() {
                    for b in &t.exponents[i + 1..] {
                        let (dx, dy) = ((a[0] - b[0]) as f64, (a[1] - b[1]) as f64);
                        if dx != 0.0 || dy != 0.0 {
                            probes.push(vec![-dy, dx]);
                            probes.push(vec![dy, -dx]);
                        }
                    }
                }
            }
            probes
        }
        d => return Err(Error::Unsupported(format!("general positivity check needs d <= 2, got {d}"))),
    };
    Ok(probes.iter().all(|y| trop_potential(f, y) > 1e-12 * y.iter().map(|v| v.abs()).sum::<f64>()))
}

/// `Σ_C ∫_C e^{-<X, W>} dW` over the maximal cones; each cone is unimodular
/// so it contributes `∏ 1/X_ij`.
pub fn laplace_amplitude(x: &PlanarPoint<Rational>) -> Result<Rational> {
    if let Some((d, v)) = x.values().iter().find(|(_, v)| **v <= Rational::zero()) {
        return Err(Error::Divergent(format!("X{}{} = {v} is not positive", d.i, d.j)));
    }
    let mut total = Rational::zero();
    for t in enumerate_triangulations(x.n())? {
        let mut term = Rational::one();
        for d in &t.diagonals {
            term /= x.at(d);
        }
        total += term;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitudes::feynman_phi3;
    use crate::kinematics::{rat, random_positive_planar};
    use crate::moduli::{u_from_y, PositivePoint};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn planar(n: usize, mut f: impl FnMut(&Diagonal) -> f64) -> PlanarPoint<f64> {
        PlanarPoint::from_fn(n, |d| f(&d)).unwrap()
    }

    #[test]
    fn fan_shape() {
        let f4 = trop_fan(4).unwrap();
        let rays: Vec<_> = f4.maximal_cones().map(|(_, r)| r[0].clone()).collect();
        assert_eq!(rays, vec![vec![1, 0], vec![0, 1]]);
        for n in 4..=7 {
            let fan = trop_fan(n).unwrap();
            assert_eq!(fan.chart_rays.len(), fan.diagonals.len());
            let maximal: Vec<_> = fan.maximal_cones().collect();
            assert_eq!(maximal.len(), crate::combinatorics::catalan_number(n - 2));
            assert_eq!(fan.diagonals.len(), n * (n - 3) / 2);
            // every wall lies in exactly two chambers
            for (s, _) in fan.cones.iter().filter(|(s, _)| s.diagonals.len() == n - 4) {
                let count = maximal.iter().filter(|(t, _)| s.diagonals.iter().all(|d| t.contains(d))).count();
                assert_eq!(count, 2, "n = {n}, {s:?}");
            }
        }
    }

    #[test]
    fn polynomial_tropicalization() {
        let one_plus_y = vec![vec![0], vec![1]];
        assert_eq!(trop_polynomial(&one_plus_y, &[2.0]), 0.0);
        assert_eq!(trop_polynomial(&one_plus_y, &[-3.0]), -3.0);
        let p = vec![vec![0, 0], vec![1, 0], vec![1, 1]];
        assert_eq!(trop_polynomial(&p, &[-1.0, -1.0]), -2.0);
        assert_eq!(trop_polynomial(&[vec![2, -1]], &[1.5, 4.0]), -1.0);
        assert_eq!(chart_polynomial(6, 1, 4), p.iter().map(|e| [e.clone(), vec![0]].concat()).collect::<Vec<_>>());
    }

    #[test]
    fn four_point_potential_is_piecewise_linear() {
        let (s, t) = (2.0, 3.0);
        let x = planar(4, |d| if d.i == 1 { t } else { s });
        let f = Potential::from_planar(&x);
        for y in [0.5, 1.0, 7.0] {
            assert!((trop_potential(&f, &[y]) - s * y).abs() < 1e-12);
            assert!((trop_potential(&f, &[-y]) - t * y).abs() < 1e-12);
        }
        let literal = Potential::new(1, vec![s], vec![PolyTerm { exponents: vec![vec![0], vec![1]], c: s + t }]).unwrap();
        assert!((trop_potential(&literal, &[-2.0]) - 2.0 * t).abs() < 1e-12);
        let zero = Potential::from_planar(&planar(6, |_| 0.0));
        assert_eq!(trop_potential(&zero, &[1.0, -2.0, 0.5]), 0.0);
    }

    #[test]
    fn rays_pick_out_planar_variables() {
        for n in 4..=7 {
            let diags = diagonals(n).unwrap();
            let x = planar(n, |d| 1.0 + diags.iter().position(|e| e == d).unwrap() as f64);
            let f = Potential::from_planar(&x);
            for (d, r) in chart_rays(n).unwrap() {
                let y: Vec<f64> = r.iter().map(|&v| v as f64).collect();
                assert!((trop_potential(&f, &y) - x.at(&d)).abs() < 1e-9, "n = {n}, {d}");
            }
        }
    }

    #[test]
    fn chart_potential_matches_u_form() {
        // φ = ∏ u_ij^{X_(i+1,j+1)} in the chart, checked numerically.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 4..=7 {
            let x = planar(n, |_| rng.random_range(0.5..3.0));
            let y: Vec<f64> = (0..n - 3).map(|_| rng.random_range(0.2..4.0)).collect();
            let big_y: Vec<f64> = y.iter().map(|v| -v.ln()).collect();
            let u = u_from_y(&PositivePoint::new(n, y).unwrap());
            let direct: f64 = u.u.iter().map(|(d, v)| x.get(d.i + 1, d.j + 1) * v.ln()).sum();
            assert!((Potential::from_planar(&x).log_value(&big_y) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn positivity_examples() {
        assert!(positivity_check(&planar(4, |d| if d.i == 1 { 3.0 } else { 2.0 })).unwrap());
        let x = planar(5, |d| if (d.i, d.j) == (1, 3) { -1.0 } else { 1.0 });
        assert!(!positivity_check(&x).unwrap());
        let one = Potential::from_planar(&planar(5, |_| 1.0));
        assert!(positivity_check_general(&one).unwrap());
        assert!(!positivity_check_general(&Potential::from_planar(&x)).unwrap());
        assert!(matches!(positivity_check_general(&Potential::from_planar(&planar(6, |_| 1.0))), Err(Error::Unsupported(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn positivity_iff_all_planar_positive(n in 4usize..=8, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let flip = rng.random_bool(0.5);
            let x = planar(n, |_| {
                let v: f64 = rng.random_range(0.1..5.0);
                if flip && rng.random_bool(0.3) { -v } else { v }
            });
            let direct = x.values().values().all(|v| *v > 0.0);
            prop_assert_eq!(positivity_check(&x).unwrap(), direct);
            if n <= 5 {
                prop_assert_eq!(positivity_check_general(&Potential::from_planar(&x)).unwrap(), direct);
            }
        }
    }

    #[test]
    fn laplace_matches_feynman() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 4..=8 {
            for _ in 0..10 {
                let x = random_positive_planar(n, &mut rng, 20, 7).unwrap();
                assert_eq!(laplace_amplitude(&x).unwrap(), feynman_phi3(&x).unwrap());
            }
        }
        assert_eq!(laplace_amplitude(&PlanarPoint::from_fn(5, |_| rat(1)).unwrap()).unwrap(), rat(5));
        let bad = PlanarPoint::from_fn(5, |d| if d.i == 2 { rat(-1) } else { rat(2) }).unwrap();
        assert!(matches!(laplace_amplitude(&bad), Err(Error::Divergent(_))));
    }
}
