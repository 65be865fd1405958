//! The acceptance suite: twelve end-to-end checks, each returning a
//! pass/fail line with the worst observed deviation.

use std::time::Instant;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::amplitudes::{chy_partial, chy_scalar, feynman_phi3, partial_feynman};
use crate::binary_geometry::{builtin, witness_report};
use crate::combinatorics::{flip, orientation_signs, Diagonal};
use crate::error::{Error, Result};
use crate::kinematics::{
    point_on_subspace, random_point, random_positive_planar, random_positive_subspace, rat, s_from_x, x_from_s,
    MandelstamPoint, PlanarPoint, Rational, SubspaceSpec,
};
use crate::moduli::{from_columns, mobius_columns, u_equation_residuals, u_from_y, ModuliPoint, PositivePoint};
use crate::scattering_form::{associahedron_check, pullback_coefficient, scattering_map};
use crate::solver::{
    factorial, hessian, reduced_determinant_finite, scattering_residuals, solve_all,
    SolutionSet, SolverConfig,
};
use crate::spinor::{mhv_partial, random_spinors, sector_census, veronese_orthogonality};
use crate::string::{ft_limit, ft_limit_m0n, string_4pt, string_4pt_closed_form, DEFAULT_SCHEDULE};
use crate::tropical::laplace_amplitude;

type C = Complex64;

pub const DEFAULT_SEED: u64 = 1;
pub const CRITERIA: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {:>2}. {}: {} ({:.1} s)", self.id, self.title, self.detail, self.seconds)
    }
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "solution counts",
        2 => "CHY = Feynman",
        3 => "partial amplitudes",
        4 => "Laplace = Feynman (exact)",
        5 => "scattering form pullback",
        6 => "u-equations",
        7 => "binary geometry witnesses",
        8 => "scattering map",
        9 => "string integrals",
        10 => "4D sectors",
        11 => "spinor identities",
        12 => "invariance suites",
        _ => "unknown",
    }
}

/// Runs criterion `id` (1..=12). Library errors become failures.
pub fn run(id: usize, seed: u64) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => solution_counts(seed),
        2 => chy_equals_feynman(seed),
        3 => partial_amplitudes(seed),
        4 => laplace_equals_feynman(seed),
        5 => pullback(seed),
        6 => u_equations(seed),
        7 => binary_witnesses(seed),
        8 => scattering_map_check(seed),
        9 => string_integrals(seed),
        10 => sectors(seed),
        11 => spinor_identities(seed),
        12 => invariance(seed),
        _ => Err(Error::InvalidInput(format!("no criterion {id}; valid ids are 1..={CRITERIA}"))),
    };
    let (passed, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult { id, title: title(id), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    (1..=CRITERIA).map(|id| run(id, seed)).collect()
}

type Outcome = Result<(bool, String)>;

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn to_c(q: &Rational) -> C {
    C::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
}

fn solve(m: &MandelstamPoint<Rational>) -> Result<SolutionSet> {
    solve_all(&m.to_complex(), &SolverConfig::default())
}

/// Seeds for trial `k` of a criterion, spread so criteria do not share points.
fn trial_seed(seed: u64, salt: u64, k: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(salt * 10_000 + k as u64)
}

fn solution_counts(seed: u64) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (n, points) in [(4, 20), (5, 20), (6, 20), (7, 20), (8, 3)] {
        let sets: Vec<SolutionSet> = (0..points)
            .into_par_iter()
            .map(|k| solve(&random_point(n, trial_seed(seed, n as u64, k), (-10, 10))?))
            .collect::<Result<_>>()?;
        let counts_ok = sets.iter().all(|s| s.solutions.len() == factorial(n - 3));
        let worst = sets.iter().flat_map(|s| s.residual_norms.iter().copied()).fold(0.0, f64::max);
        ok &= counts_ok && worst < 1e-12;
        lines.push(format!("n={n}: {points} pts, {} sols each: {counts_ok}, max res {worst:.1e}", factorial(n - 3)));
    }
    Ok((ok, lines.join("; ")))
}

fn chy_equals_feynman(seed: u64) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for n in 4..=7 {
        let pairs: Vec<(C, C)> = (0..20)
            .into_par_iter()
            .map(|k| {
                let m = random_point(n, trial_seed(seed, 20 + n as u64, k), (-10, 10))?;
                Ok((chy_scalar(&solve(&m)?)?, to_c(&feynman_phi3(&x_from_s(&m))?)))
            })
            .collect::<Result<_>>()?;
        let plus = pairs.iter().map(|(a, f)| rel(*a, *f)).fold(0.0, f64::max);
        let minus = pairs.iter().map(|(a, f)| rel(*a, -*f)).fold(0.0, f64::max);
        let (sign, worst) = if plus <= minus { ("+", plus) } else { ("-", minus) };
        ok &= worst < 1e-8;
        lines.push(format!("n={n}: sign {sign}, max rel {worst:.1e}"));
    }
    let x = PlanarPoint::from_fn(4, |d| rat(if d.i == 1 { 2 } else { 3 }))?;
    let a = chy_scalar(&solve(&s_from_x(&x))?)?;
    let dev = (a.norm() - 5.0 / 6.0).abs();
    ok &= dev < 1e-12;
    lines.push(format!("n=4 (2,3): |chy| - 5/6 = {dev:.1e}"));
    Ok((ok, lines.join("; ")))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for k in 1..=n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=p.len()).map(move |pos| {
                    let mut q = p.clone();
                    q.insert(pos, k);
                    q
                })
            })
            .collect();
    }
    out
}

fn partial_amplitudes(seed: u64) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for n in 4..=5 {
        let mut worst = 0.0f64;
        let orderings = permutations(n);
        for k in 0..3 {
            let m = random_point(n, trial_seed(seed, 30 + n as u64, k), (-10, 10))?;
            let x = x_from_s(&m);
            let sols = solve(&m)?;
            let id: Vec<usize> = (1..=n).collect();
            for alpha in &orderings {
                let f = to_c(&partial_feynman(&x, alpha)?);
                let a = chy_partial(&sols, &id, alpha)?;
                let dev = if f.is_zero() { a.norm() } else { rel(a, f).min(rel(a, -f)) };
                worst = worst.max(dev);
            }
        }
        ok &= worst < 1e-8;
        lines.push(format!("n={n}: {} orderings x 3 pts, max rel {worst:.1e}", orderings.len()));
    }
    Ok((ok, lines.join("; ")))
}

fn laplace_equals_feynman(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 4, 0));
    let mut checked = 0;
    let mut mismatches = 0;
    for n in 4..=8 {
        for _ in 0..100 {
            let x = random_positive_planar(n, &mut rng, 20, 7)?;
            if laplace_amplitude(&x)? != feynman_phi3(&x)? {
                mismatches += 1;
            }
            checked += 1;
        }
    }
    Ok((mismatches == 0, format!("{checked} points for n=4..8, {mismatches} mismatches")))
}

fn pullback(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 5, 0));
    let mut lines = Vec::new();
    let mut ok = true;
    for n in 4..=7 {
        let mut kappas = Vec::new();
        let mut points = 0;
        while points < 10 {
            let c = random_positive_subspace(n, &mut rng, 10);
            let fan: Vec<Rational> = (0..n - 3).map(|_| rat(rng.random_range(1..=30))).collect();
            let x = point_on_subspace(&c, &fan)?;
            let f = match feynman_phi3(&x) {
                Ok(f) => f,
                Err(Error::Pole(_)) => continue,
                Err(e) => return Err(e),
            };
            let p = pullback_coefficient(&c, &x)?;
            kappas.push(if f.is_zero() { None } else { Some(p / f) });
            points += 1;
        }
        let first = kappas[0].clone();
        let exact = kappas.iter().all(|k| *k == first && k.as_ref().is_some_and(|v| *v == rat(1) || *v == rat(-1)));
        ok &= exact;
        lines.push(format!("n={n}: pullback/feynman = {}", first.map_or("undefined".into(), |v| v.to_string())));
    }
    Ok((ok, lines.join("; ")))
}

fn u_equations(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 6, 0));
    let mut worst = 0.0f64;
    let mut in_range = true;
    for n in 4..=8 {
        for _ in 0..20 {
            let y: Vec<f64> = (0..n - 3).map(|_| rng.random_range(-3.0f64..3.0).exp()).collect();
            let u = u_from_y(&PositivePoint::new(n, y)?);
            worst = u_equation_residuals(&u).values().fold(worst, |a, r| a.max(r.abs()));
            for i in 1..=n {
                for j in i + 2..=n {
                    if !(i == 1 && j == n) {
                        let v = u.get(i, j);
                        in_range &= v > 0.0 && v < 1.0;
                    }
                }
            }
        }
    }
    let u5 = u_from_y(&PositivePoint::new(5, vec![1.0, 1.0])?);
    let expect = [((1, 3), 0.75), ((1, 4), 2.0 / 3.0), ((2, 4), 0.5), ((2, 5), 0.5), ((3, 5), 2.0 / 3.0)];
    let dev5 = expect.iter().map(|((i, j), v)| (u5.get(*i, *j) - v).abs()).fold(0.0, f64::max);
    let ok = worst < 1e-12 && in_range && dev5 < 1e-15;
    Ok((ok, format!("n=4..8 x 20 pts: max |R| {worst:.1e}, u in (0,1): {in_range}; n=5 y=(1,1) dev {dev5:.1e}")))
}

fn binary_witnesses(seed: u64) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for name in ["hexagon", "octagon", "pell3"] {
        let r = witness_report(name, &builtin(name)?, 5, trial_seed(seed, 7, 0));
        let pass = r.witnesses == 5 && r.max_residual < 1e-10 && r.flag && r.pure && r.pseudomanifold;
        ok &= pass;
        lines.push(format!(
            "{name}: {}/5 witnesses, max res {:.1e}, flag {} pure {} pseudo {}",
            r.witnesses, r.max_residual, r.flag, r.pure, r.pseudomanifold
        ));
    }
    Ok((ok, lines.join("; ")))
}

fn scattering_map_check(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 8, 0));
    let mut ok = true;
    let mut lines = Vec::new();
    for n in 5..=6 {
        let c = random_positive_subspace(n, &mut rng, 10);
        let cf = SubspaceSpec::new(n, c.c.iter().map(|(k, v)| (*k, v.to_f64().unwrap_or(f64::NAN))).collect())?;
        let report = associahedron_check(&cf, 100, trial_seed(seed, 8, n))?;
        let m = random_point(n, trial_seed(seed, 80, n), (-10, 10))?;
        let x = x_from_s(&m).map(to_c);
        let mc = m.to_complex();
        let sols = solve_all(&mc, &SolverConfig::default())?;
        let mut worst = 0.0f64;
        for p in &sols.solutions {
            let image = scattering_map(&mc, p)?;
            for (d, v) in x.values() {
                worst = worst.max((image.at(d) - v).norm() / v.norm().max(1.0));
            }
        }
        ok &= report.all_positive && worst < 1e-8;
        lines.push(format!(
            "n={n}: 100 samples positive {} (min X {:.2e}), round trip max dev {worst:.1e}",
            report.all_positive, report.min_x
        ));
    }
    Ok((ok, lines.join("; ")))
}

fn string_integrals(seed: u64) -> Outcome {
    let mut grid = Vec::new();
    for s in [0.5, 1.0, 2.0, 3.0] {
        for t in [0.5, 1.0, 2.0, 3.0] {
            for a in [0.05, 0.1, 0.5] {
                grid.push((s, t, a));
            }
        }
    }
    let grid_dev = grid
        .par_iter()
        .map(|&(s, t, a)| {
            let exact = string_4pt_closed_form(s, t, a)?;
            Ok(((string_4pt(s, t, a)? - exact) / exact).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let four = ft_limit(|a| string_4pt(2.0, 3.0, a), &DEFAULT_SCHEDULE)?;
    let four_dev = (four.estimate - 5.0 / 6.0).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 9, 0));
    let mut five_dev = 0.0f64;
    for _ in 0..3 {
        let x = random_positive_planar(5, &mut rng, 10, 3)?;
        let exact = feynman_phi3(&x)?.to_f64().unwrap_or(f64::NAN);
        let r = ft_limit_m0n(&x.map(|v| v.to_f64().unwrap_or(f64::NAN)), &DEFAULT_SCHEDULE)?;
        five_dev = five_dev.max(((r.estimate - exact) / exact).abs());
    }
    let ok = grid_dev < 1e-6 && four_dev < 1e-4 && five_dev < 0.01;
    Ok((
        ok,
        format!("4pt grid max rel {grid_dev:.1e}; 4pt ft_limit dev {four_dev:.1e}; n=5 ft_limit max rel {five_dev:.1e} (3 pts)"),
    ))
}

fn sectors(seed: u64) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (n, trials) in [(5, 10), (6, 10), (7, 3)] {
        let c = sector_census(n, trials, trial_seed(seed, 10, n))?;
        ok &= c.all_match();
        lines.push(format!("n={n}: expected {:?}, {}/{trials} trials match", c.expected, c.matching_trials));
    }
    Ok((ok, lines.join("; ")))
}

fn spinor_identities(seed: u64) -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..20 {
        let p = random_spinors(4, trial_seed(seed, 11, k))?;
        let id = [1, 2, 3, 4];
        let lhs = mhv_partial(&p, &id, 1, 2)?;
        let rhs = p.square(3, 4).powu(4) / (p.square(1, 2) * p.square(2, 3) * p.square(3, 4) * p.square(4, 1));
        worst = worst.max(rel(lhs, rhs));
        let sum = lhs + mhv_partial(&p, &[2, 1, 3, 4], 1, 2)? + mhv_partial(&p, &[2, 3, 1, 4], 1, 2)?;
        worst = worst.max(sum.norm() / lhs.norm());
        let q = random_spinors(5, trial_seed(seed, 111, k))?;
        let a5 = |o: [usize; 5]| mhv_partial(&q, &o, 1, 2);
        let lhs = a5([1, 2, 5, 3, 4])?;
        let rhs = a5([1, 2, 4, 3, 5])? + a5([1, 4, 2, 3, 5])? + a5([1, 4, 3, 2, 5])?;
        worst = worst.max(rel(lhs, rhs));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 11, 99));
    let mut draw = || C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let sigma: Vec<C> = (0..6).map(|_| draw()).collect();
    let t: Vec<C> = (0..6).map(|_| draw()).collect();
    let ortho = veronese_orthogonality(&sigma, &t, 2)?;
    let ok = worst < 1e-10 && ortho < 1e-10;
    Ok((ok, format!("20 pts: max identity dev {worst:.1e}; n=6 d=2 |C C~^T| {ortho:.1e}")))
}

fn invariance(seed: u64) -> Outcome {
    let g = [[C::new(0.3, 0.1), C::new(1.2, -0.4)], [C::new(0.7, 0.2), C::new(-0.5, 0.9)]];
    let mut det_dev = 0.0f64;
    for n in 5..=7 {
        let m = random_point(n, trial_seed(seed, 12, n), (-10, 10))?.to_complex();
        let sols = solve_all(&m, &SolverConfig::default())?;
        for p in &sols.solutions {
            let cols = mobius_columns(p, g);
            let sigma: Vec<C> = cols.iter().map(|c| c[1] / c[0]).collect();
            let reference = reduced_determinant_finite(&sigma, &m, [1, 2, n], [1, 2, n]);
            let others = [([1, 2, 3], [1, 2, 3]), ([2, 4, n], [1, 3, n]), ([n, 1, 3], [2, 3, n - 1]), ([3, 5, 1], [4, 2, n])];
            for (r, c) in others {
                det_dev = det_dev.max(rel(reduced_determinant_finite(&sigma, &m, r, c), reference));
            }
            // regauging back recovers the same point
            det_dev = det_dev.max(from_columns(&cols)?.distance(p));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 12, 0));
    let mut fd_dev = 0.0f64;
    for n in 4..=8 {
        let m = random_point(n, trial_seed(seed, 120, n), (-10, 10))?.to_complex();
        let z: Vec<C> = (0..n - 3).map(|k| C::new(1.5 + k as f64 + rng.random_range(0.0..0.5), rng.random_range(-1.0..1.0))).collect();
        let h = hessian(&ModuliPoint::new(n, z.clone())?, &m)?;
        let step = 1e-6;
        for a in 0..n - 3 {
            let at = |d: f64| {
                let mut w = z.clone();
                w[a] += d;
                scattering_residuals(&ModuliPoint::new(n, w)?, &m)
            };
            let (qp, qm) = (at(step)?, at(-step)?);
            for b in 0..n - 3 {
                let fd = (qp[b] - qm[b]) / (2.0 * step);
                fd_dev = fd_dev.max((fd - h[(a, b)]).norm() / h[(a, b)].norm().max(1.0));
            }
        }
    }
    let mut edges = 0;
    let mut bad_edges = 0;
    for n in 4..=8 {
        let o = orientation_signs(n)?;
        for t in o.signs.keys() {
            for dd in &t.diagonals {
                let f = flip(t, dd)?;
                let new = *f.diagonals.iter().find(|e| !t.contains(e)).expect("a flip adds a diagonal");
                let rest: Vec<Diagonal> = t.diagonals.iter().copied().filter(|e| e != dd).collect();
                let order_t: Vec<Diagonal> = std::iter::once(*dd).chain(rest.iter().copied()).collect();
                let order_f: Vec<Diagonal> = std::iter::once(new).chain(rest.iter().copied()).collect();
                edges += 1;
                if o.sign_in_order(t, &order_t) != o.sign_in_order(&f, &order_f).map(|s| -s) {
                    bad_edges += 1;
                }
            }
        }
    }
    let ok = det_dev < 1e-8 && fd_dev < 1e-5 && bad_edges == 0;
    Ok((
        ok,
        format!("det' max rel {det_dev:.1e}; Hessian vs FD {fd_dev:.1e}; orientation {bad_edges} bad of {edges} flip edges (n<=8)"),
    ))
}
