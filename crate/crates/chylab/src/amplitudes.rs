//! Scalar amplitudes: exact φ³ sums over triangulations, CHY sums over
//! solutions, Parke-Taylor factors and the pairing `A(Ω|Ω')` of two top
//! forms.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::combinatorics::{compatible_trees, enumerate_triangulations, validate_permutation, Triangulation};
use crate::error::{Error, Result};
use crate::kinematics::{PlanarPoint, Rational};
use crate::moduli::{canonical_form_coefficient, ModuliPoint};
use crate::solver::{hessian, reduced_determinant, SolutionSet};

type C = Complex64;

fn sum_over(p: &PlanarPoint<Rational>, trees: &[Triangulation]) -> Result<Rational> {
    let mut total = Rational::zero();
    for t in trees {
        let mut denom = Rational::one();
        for d in &t.diagonals {
            denom *= p.at(d);
        }
        if denom.is_zero() {
            let zero = t.diagonals.iter().find(|d| p.at(d).is_zero()).expect("some factor vanishes");
            return Err(Error::Pole(format!("X_{{{zero}}} = 0")));
        }
        total += denom.recip();
    }
    Ok(total)
}

/// `Σ_T ∏_{(ij) ∈ T} 1/X_ij` over all triangulations, exactly.
pub fn feynman_phi3(p: &PlanarPoint<Rational>) -> Result<Rational> {
    sum_over(p, &enumerate_triangulations(p.n())?)
}

/// The φ³ sum restricted to trees planar for both `12..n` and `alpha`.
pub fn partial_feynman(p: &PlanarPoint<Rational>, alpha: &[usize]) -> Result<Rational> {
    if alpha.len() != p.n() {
        return Err(Error::InvalidInput(format!("ordering has length {}, expected {}", alpha.len(), p.n())));
    }
    sum_over(p, &compatible_trees(alpha)?)
}

/// A Parke-Taylor factor evaluated in the gauge chart. The two factors
/// adjacent to `σn = ∞` are left out and counted in `omitted`; they cancel
/// whenever two factors are paired against `det'Φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtValue {
    pub value: C,
    pub omitted: usize,
}

/// `PT(α) = 1 / (σ_{α1 α2} σ_{α2 α3} .. σ_{αn α1})`, with `σab = σa - σb`.
pub fn pt_factor(p: &ModuliPoint, alpha: &[usize]) -> Result<PtValue> {
    validate_permutation(alpha)?;
    let n = p.n();
    if alpha.len() != n {
        return Err(Error::InvalidInput(format!("ordering has length {}, expected {n}", alpha.len())));
    }
    let mut denom = C::one();
    let mut omitted = 0;
    for k in 0..n {
        let (a, b) = (alpha[k], alpha[(k + 1) % n]);
        match (p.value(a), p.value(b)) {
            (Some(x), Some(y)) => denom *= x - y,
            _ => omitted += 1,
        }
    }
    if denom.norm() == 0.0 {
        return Err(Error::Pole("coincident punctures in Parke-Taylor factor".into()));
    }
    Ok(PtValue { value: denom.inv(), omitted })
}

fn require_complete(sols: &SolutionSet) -> Result<()> {
    if !sols.is_complete() {
        let expected = crate::solver::factorial(sols.n() - 3);
        return Err(Error::IncompleteSolutions { expected, found: sols.solutions.len() });
    }
    Ok(())
}

/// `Σ_solutions PT(α) PT(β) / det'Φ`.
pub fn chy_partial(sols: &SolutionSet, alpha: &[usize], beta: &[usize]) -> Result<C> {
    require_complete(sols)?;
    let mut total = C::zero();
    for p in &sols.solutions {
        let a = pt_factor(p, alpha)?;
        let b = pt_factor(p, beta)?;
        total += a.value * b.value / reduced_determinant(p, &sols.kinematics)?;
    }
    Ok(total)
}

/// `Σ_solutions PT(12..n)² / det'Φ`.
pub fn chy_scalar(sols: &SolutionSet) -> Result<C> {
    let id: Vec<usize> = (1..=sols.n()).collect();
    chy_partial(sols, &id, &id)
}

type Coefficient = dyn Fn(&ModuliPoint) -> Result<C> + Send + Sync;

/// A top form `h(σ) dσ3 ∧ .. ∧ dσ(n-1)` on the gauge chart.
#[derive(Clone)]
pub struct ChartForm {
    n: usize,
    coefficient: Arc<Coefficient>,
}

impl fmt::Debug for ChartForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartForm").field("n", &self.n).finish_non_exhaustive()
    }
}

impl ChartForm {
    pub fn new(n: usize, f: impl Fn(&ModuliPoint) -> Result<C> + Send + Sync + 'static) -> Self {
        ChartForm { n, coefficient: Arc::new(f) }
    }

    /// `dσ3 ∧ .. ∧ dσ(n-1) / ((23)(34) .. (n-2, n-1))`.
    pub fn canonical(n: usize) -> Self {
        ChartForm::new(n, canonical_form_coefficient)
    }

    /// The Parke-Taylor form for `alpha`, signed so that the identity
    /// ordering reproduces [`ChartForm::canonical`].
    pub fn parke_taylor(alpha: Vec<usize>) -> Result<Self> {
        validate_permutation(&alpha)?;
        let n = alpha.len();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        Ok(ChartForm::new(n, move |p| Ok(sign * pt_factor(p, &alpha)?.value)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, p: &ModuliPoint) -> Result<C> {
        let v = (self.coefficient)(p)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Pole("form coefficient is not finite".into()));
        }
        Ok(v)
    }
}

/// `A(Ω|Ω') = Σ_solutions h r / det(∂² log φ)` in the gauge chart.
pub fn general_amplitude(sols: &SolutionSet, omega: &ChartForm, omega_prime: &ChartForm) -> Result<C> {
    require_complete(sols)?;
    if omega.n != sols.n() || omega_prime.n != sols.n() {
        return Err(Error::InvalidInput("forms and solutions disagree on n".into()));
    }
    let mut total = C::zero();
    for p in &sols.solutions {
        let det = hessian(p, &sols.kinematics)?.determinant();
        total += omega.eval(p)? * omega_prime.eval(p)? / det;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{random_planar, random_point, rat, ratio, s_from_x, x_from_s};
    use crate::solver::{solve_all, SolverConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn four_point_x(s: i64, t: i64) -> PlanarPoint<Rational> {
        PlanarPoint::from_fn(4, |d| if d.i == 1 { rat(s) } else { rat(t) }).unwrap()
    }

    fn solve(x: &PlanarPoint<Rational>) -> SolutionSet {
        solve_all(&s_from_x(x).to_complex(), &SolverConfig::default()).unwrap()
    }

    fn to_c(r: &Rational) -> C {
        use num_traits::ToPrimitive;
        C::new(r.to_f64().unwrap(), 0.0)
    }

    fn rel(a: C, b: C) -> f64 {
        (a - b).norm() / b.norm()
    }

    // Independent oracle: the amplitude as a sum over cubic graphs built by
    // recursively splitting the ordered leaf list (Berends-Giele style).
    fn recursive_phi3(x: &PlanarPoint<Rational>) -> Rational {
        let n = x.n();
        fn current(x: &PlanarPoint<Rational>, a: usize, b: usize) -> Rational {
            // Off-shell current for the leaf interval a..=b, propagator
            // included except at the top level.
            if a == b {
                return rat(1);
            }
            let mut total = rat(0);
            for m in a..b {
                total += current(x, a, m) * current(x, m + 1, b);
            }
            total / x.get(a, b + 1)
        }
        // Cut leg n: sum over splits of 1..n-1.
        let mut total = rat(0);
        for m in 1..n - 1 {
            total += current(x, 1, m) * current(x, m + 1, n - 1);
        }
        total
    }

    #[test]
    fn feynman_small_cases() {
        assert_eq!(feynman_phi3(&four_point_x(2, 3)).unwrap(), ratio(5, 6));
        let ones = |n| PlanarPoint::from_fn(n, |_| rat(1)).unwrap();
        assert_eq!(feynman_phi3(&ones(5)).unwrap(), rat(5));
        assert_eq!(feynman_phi3(&ones(6)).unwrap(), rat(14));
        let bad = PlanarPoint::from_fn(5, |d| if (d.i, d.j) == (2, 4) { rat(0) } else { rat(1) }).unwrap();
        assert!(matches!(feynman_phi3(&bad), Err(Error::Pole(_))));
    }

    #[test]
    fn feynman_matches_recursive_oracle_and_is_cyclic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 4..=9 {
            let x = random_planar(n, &mut rng, (-9, 9)).unwrap();
            let f = feynman_phi3(&x).unwrap();
            assert_eq!(f, recursive_phi3(&x));
            assert_eq!(f, feynman_phi3(&x.rotate(1)).unwrap());
        }
    }

    #[test]
    fn partial_amplitudes() {
        let x = four_point_x(2, 3);
        assert_eq!(partial_feynman(&x, &[1, 2, 3, 4]).unwrap(), feynman_phi3(&x).unwrap());
        assert_eq!(partial_feynman(&x, &[2, 1, 3, 4]).unwrap(), ratio(1, 2));
        assert_eq!(partial_feynman(&x, &[1, 3, 2, 4]).unwrap(), ratio(1, 3));
    }

    #[test]
    fn five_point_tree_identity() {
        // Trees of 12534 are the disjoint union of those of 12435, 14235
        // and 14325.
        let count = |a: &[usize]| compatible_trees(a).unwrap();
        let lhs = count(&[1, 2, 5, 3, 4]);
        let mut rhs: Vec<Triangulation> =
            [[1, 2, 4, 3, 5], [1, 4, 2, 3, 5], [1, 4, 3, 2, 5]].iter().flat_map(|a| count(a)).collect();
        rhs.sort();
        let mut l = lhs.clone();
        l.sort();
        l.dedup();
        assert_eq!(l.len(), lhs.len());
        assert!(lhs.iter().all(|t| rhs.contains(t)));
    }

    #[test]
    fn pt_factor_conventions() {
        let p = ModuliPoint::new(6, vec![C::new(2.0, 0.3), C::new(-1.0, 0.5), C::new(0.5, -1.5)]).unwrap();
        let id = [1, 2, 3, 4, 5, 6];
        let pt = pt_factor(&p, &id).unwrap();
        assert_eq!(pt.omitted, 2);
        let s = p.finite_values();
        let direct: C = (0..4).map(|k| 1.0 / (s[k] - s[k + 1])).product();
        assert!((pt.value - direct).norm() < 1e-14);
        let rotated = pt_factor(&p, &[2, 3, 4, 5, 6, 1]).unwrap();
        assert!((rotated.value - pt.value).norm() < 1e-14);
        let reversed = pt_factor(&p, &[6, 5, 4, 3, 2, 1]).unwrap();
        assert!((reversed.value - pt.value).norm() < 1e-14);
        let p5 = ModuliPoint::new(5, vec![C::new(2.0, 0.3), C::new(-1.0, 0.5)]).unwrap();
        let a = pt_factor(&p5, &[1, 2, 3, 4, 5]).unwrap().value;
        let b = pt_factor(&p5, &[5, 4, 3, 2, 1]).unwrap().value;
        assert!((a + b).norm() < 1e-14);
    }

    #[test]
    fn chy_four_point() {
        let sols = solve(&four_point_x(2, 3));
        let a = chy_scalar(&sols).unwrap();
        assert!((a - C::new(-5.0 / 6.0, 0.0)).norm() < 1e-12);
        let p = chy_partial(&sols, &[1, 2, 3, 4], &[2, 1, 3, 4]).unwrap();
        assert!((p - C::new(0.5, 0.0)).norm() < 1e-12);
        let g = general_amplitude(&sols, &ChartForm::canonical(4), &ChartForm::canonical(4)).unwrap();
        assert!((g - a).norm() < 1e-12);
    }

    #[test]
    fn chy_matches_feynman_with_fixed_sign() {
        for n in 4..=7 {
            let mut signs = Vec::new();
            for seed in 0..5 {
                let m = random_point(n, seed, (-10, 10)).unwrap();
                let f = to_c(&feynman_phi3(&x_from_s(&m)).unwrap());
                let sols = solve_all(&m.to_complex(), &SolverConfig::default()).unwrap();
                let a = chy_scalar(&sols).unwrap();
                let sign = if (a - f).norm() < (a + f).norm() { 1.0 } else { -1.0 };
                assert!(rel(a, sign * f) < 1e-8, "n = {n}, seed = {seed}");
                signs.push(sign);
            }
            assert!(signs.iter().all(|s| *s == signs[0]));
            assert_eq!(signs[0], if n % 2 == 0 { -1.0 } else { 1.0 }, "n = {n}");
        }
    }

    #[test]
    fn partials_match_for_all_orderings() {
        for n in 4..=5 {
            let m = random_point(n, 3, (-10, 10)).unwrap();
            let x = x_from_s(&m);
            let sols = solve_all(&m.to_complex(), &SolverConfig::default()).unwrap();
            let id: Vec<usize> = (1..=n).collect();
            for alpha in permutations(&id) {
                let f = to_c(&partial_feynman(&x, &alpha).unwrap());
                let a = chy_partial(&sols, &id, &alpha).unwrap();
                if f.norm() == 0.0 {
                    assert!(a.norm() < 1e-10);
                } else {
                    assert!(rel(a, f) < 1e-8 || rel(a, -f) < 1e-8, "{alpha:?}");
                }
            }
        }
    }

    #[test]
    fn decoupling_identity() {
        let m = random_point(5, 17, (-10, 10)).unwrap();
        let sols = solve_all(&m.to_complex(), &SolverConfig::default()).unwrap();
        let id = [1, 2, 3, 4, 5];
        let total: C = [[1, 2, 3, 4, 5], [2, 1, 3, 4, 5], [2, 3, 1, 4, 5], [2, 3, 4, 1, 5]]
            .iter()
            .map(|b| chy_partial(&sols, &id, b).unwrap())
            .sum();
        assert!(total.norm() < 1e-8 * chy_scalar(&sols).unwrap().norm());
    }

    #[test]
    fn general_amplitude_properties() {
        let m = random_point(5, 23, (-10, 10)).unwrap();
        let sols = solve_all(&m.to_complex(), &SolverConfig::default()).unwrap();
        let omega = ChartForm::parke_taylor(vec![1, 3, 2, 5, 4]).unwrap();
        let omega_p = ChartForm::parke_taylor(vec![2, 1, 4, 3, 5]).unwrap();
        let ab = general_amplitude(&sols, &omega, &omega_p).unwrap();
        let ba = general_amplitude(&sols, &omega_p, &omega).unwrap();
        assert!((ab - ba).norm() < 1e-12 * ab.norm().max(1.0));
        let can = ChartForm::canonical(5);
        let c = general_amplitude(&sols, &can, &can).unwrap();
        assert!(rel(c, chy_scalar(&sols).unwrap()) < 1e-10);
        let id = ChartForm::parke_taylor(vec![1, 2, 3, 4, 5]).unwrap();
        let p = sols.solutions[0].clone();
        assert!((id.eval(&p).unwrap() - can.eval(&p).unwrap()).norm() < 1e-12);
        let doubled = ChartForm::new(5, {
            let o = omega.clone();
            move |q| Ok(2.0 * o.eval(q)?)
        });
        let d = general_amplitude(&sols, &doubled, &omega_p).unwrap();
        assert!((d - 2.0 * ab).norm() < 1e-12 * ab.norm().max(1.0));
    }

    #[test]
    fn incomplete_sets_are_refused() {
        let m = random_point(5, 2, (-10, 10)).unwrap();
        let mut sols = solve_all(&m.to_complex(), &SolverConfig::default()).unwrap();
        sols.solutions.pop();
        assert!(matches!(chy_scalar(&sols), Err(Error::IncompleteSolutions { .. })));
    }

    fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let first = rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, first);
                out.push(tail);
            }
        }
        out
    }
}
