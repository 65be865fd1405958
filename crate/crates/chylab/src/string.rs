//! Stringy integrals `I = α'^d ∫ ∏ dy/y φ^α'` over the positive orthant, the
//! Beta function, and the α' → 0 limit.
//!
//! Integration runs in rescaled log coordinates `Z = α' Y` (`Y = -log y`),
//! where the integrand `exp(α' log φ(Z / α'))` is smooth and decays
//! exponentially on every ray once the tropical potential is positive.
//! Each axis is compactified with `Z = w / (1 - w²)` and integrated by
//! nested adaptive Gauss–Kronrod (7/15).

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::kinematics::PlanarPoint;
use crate::tropical::{positivity_check, positivity_check_general, PolyTerm, Potential};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Nodes of the 15-point rule on `[a, b]`, in the order used by [`gk15_combine`].
fn gk15_nodes(a: f64, b: f64) -> [f64; 15] {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut x = [c; 15];
    for k in 0..7 {
        x[2 * k] = c - h * XGK[k];
        x[2 * k + 1] = c + h * XGK[k];
    }
    x
}

fn gk15_combine(a: f64, b: f64, f: &[f64; 15]) -> (f64, f64) {
    let h = 0.5 * (b - a);
    let mut kronrod = WGK[7] * f[14];
    let mut gauss = WG[3] * f[14];
    for k in 0..7 {
        let pair = f[2 * k] + f[2 * k + 1];
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (h * kronrod, (h * (kronrod - gauss)).abs())
}

/// Globally adaptive Gauss–Kronrod on `[a, b]`: bisects the interval with
/// the largest error estimate until the total error is below
/// `max(abs_tol, rel_tol · |I|)`. Returns the value and the error estimate.
pub fn integrate_adaptive(
    f: &(dyn Fn(f64) -> f64 + Sync),
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
    parallel: bool,
) -> (f64, f64) {
    let eval = |lo: f64, hi: f64| {
        let x = gk15_nodes(lo, hi);
        let mut v = [0.0; 15];
        if parallel {
            v.par_iter_mut().zip(x.par_iter()).for_each(|(v, x)| *v = f(*x));
        } else {
            for (v, x) in v.iter_mut().zip(x) {
                *v = f(x);
            }
        }
        let (val, err) = gk15_combine(lo, hi, &v);
        (lo, hi, val, err)
    };
    let mut pieces = vec![eval(a, b)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || pieces.len() >= max_intervals {
            return (total, err);
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        pieces.push(eval(lo, mid));
        pieces.push(eval(mid, hi));
    }
}

/// `B(s, t) = Γ(s)Γ(t)/Γ(s+t)` through log-Gamma, valid for negative
/// non-integer arguments too.
pub fn beta_function(s: f64, t: f64) -> Result<f64> {
    let (ls, ss) = signed_ln_gamma(s)?;
    let (lt, st) = signed_ln_gamma(t)?;
    let (lu, su) = signed_ln_gamma(s + t)?;
    Ok(ss * st * su * (ls + lt - lu).exp())
}

fn signed_ln_gamma(x: f64) -> Result<(f64, f64)> {
    if x <= 0.0 && x.fract() == 0.0 {
        return Err(Error::Pole(format!("Gamma({x})")));
    }
    if x > 0.0 {
        return Ok((ln_gamma(x), 1.0));
    }
    // reflection: Γ(x) Γ(1 - x) = π / sin(πx)
    let sin = (std::f64::consts::PI * x).sin();
    Ok((std::f64::consts::PI.ln() - sin.abs().ln() - ln_gamma(1.0 - x), sin.signum()))
}

/// A stringy integrand `(α')^d ∏ dy/y φ^α'` with its convergence data.
#[derive(Debug, Clone, PartialEq)]
pub struct StringyIntegrand {
    pub potential: Potential,
    pub alpha_prime: f64,
    /// Planar variables when the potential is the `M0,n` one; convergence
    /// is then decided on the rays of the fan, for any `d`.
    pub planar: Option<PlanarPoint<f64>>,
}

impl StringyIntegrand {
    pub fn new(potential: Potential, alpha_prime: f64) -> Result<Self> {
        if !(alpha_prime > 0.0) {
            return Err(Error::InvalidInput("alpha' must be positive".into()));
        }
        for t in &potential.terms {
            if t.exponents.iter().any(|e| e.iter().any(|v| *v < 0)) {
                return Err(Error::InvalidInput("polynomial exponents must be non-negative".into()));
            }
        }
        Ok(StringyIntegrand { potential, alpha_prime, planar: None })
    }

    pub fn m0n(x: &PlanarPoint<f64>, alpha_prime: f64) -> Result<Self> {
        let mut f = Self::new(Potential::from_planar(x), alpha_prime)?;
        f.planar = Some(x.clone());
        Ok(f)
    }

    pub fn d(&self) -> usize {
        self.potential.d
    }

    pub fn converges(&self) -> Result<bool> {
        match &self.planar {
            Some(x) => positivity_check(x),
            None => positivity_check_general(&self.potential),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StringyValue {
    pub value: f64,
    pub error_estimate: f64,
    pub low_accuracy: bool,
}

/// Default relative tolerance per dimension; the nested rules cost
/// grows like the cube of the per-axis work at `d = 3`.
pub fn default_tolerance(d: usize) -> f64 {
    match d {
        1 => 1e-10,
        2 => 1e-8,
        _ => 1e-5,
    }
}

pub fn stringy_integral(f: &StringyIntegrand) -> Result<StringyValue> {
    stringy_integral_with_tol(f, default_tolerance(f.d()))
}

pub fn stringy_integral_with_tol(f: &StringyIntegrand, tol: f64) -> Result<StringyValue> {
    let d = f.d();
    if d == 0 || d > 3 {
        return Err(Error::Unsupported(format!("quadrature supports 1 <= d <= 3, got {d}")));
    }
    if !f.converges()? {
        return Err(Error::Divergent("tropical potential is not positive".into()));
    }
    let alpha = f.alpha_prime;
    let integrand = |w: &[f64; 3]| -> f64 {
        let mut jac = 1.0;
        let mut big_y = [0.0; 3];
        for k in 0..d {
            let q = 1.0 - w[k] * w[k];
            jac *= (1.0 + w[k] * w[k]) / (q * q);
            big_y[k] = w[k] / q / alpha;
        }
        let v = jac * (alpha * f.potential.log_value(&big_y[..d])).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let (value, err) = nested(&integrand, d, [0.0; 3], 0, tol);
    Ok(StringyValue { value, error_estimate: err, low_accuracy: err > 1e2 * tol * value.abs() })
}

/// Nested rule over `[-1, 1]^d`, `d ≤ 3`; inner levels run at a tighter
/// relative tolerance than the level enclosing them.
fn nested(f: &(dyn Fn(&[f64; 3]) -> f64 + Sync), d: usize, prefix: [f64; 3], depth: usize, tol: f64) -> (f64, f64) {
    if depth + 1 == d {
        let g = move |w: f64| {
            let mut p = prefix;
            p[depth] = w;
            f(&p)
        };
        return integrate_adaptive(&g, -1.0, 1.0, tol, 1e-300, 400, depth == 0);
    }
    let g = move |w: f64| {
        let mut p = prefix;
        p[depth] = w;
        nested(f, d, p, depth + 1, tol * 0.3).0
    };
    integrate_adaptive(&g, -1.0, 1.0, tol, 1e-300, 200, depth == 0)
}

/// Four-point integral `α' ∫ du/(u(1-u)) u^{α's} (1-u)^{α't}` by quadrature.
pub fn string_4pt(s: f64, t: f64, alpha_prime: f64) -> Result<f64> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::Divergent(format!("needs s, t > 0, got ({s}, {t})")));
    }
    let potential = Potential::new(1, vec![s], vec![PolyTerm { exponents: vec![vec![0], vec![1]], c: s + t }])?;
    Ok(stringy_integral(&StringyIntegrand::new(potential, alpha_prime)?)?.value)
}

pub fn string_4pt_closed_form(s: f64, t: f64, alpha_prime: f64) -> Result<f64> {
    Ok(alpha_prime * beta_function(alpha_prime * s, alpha_prime * t)?)
}

pub const DEFAULT_SCHEDULE: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FtLimit {
    pub schedule: Vec<f64>,
    pub values: Vec<f64>,
    pub estimate: f64,
    /// Set when `|I(α') - estimate|` fails to shrink along the schedule.
    pub warning: Option<String>,
}

/// Evaluates `family` along `schedule` and extrapolates to `α' = 0` with
/// Neville's polynomial scheme over all points.
pub fn ft_limit(family: impl Fn(f64) -> Result<f64> + Sync, schedule: &[f64]) -> Result<FtLimit> {
    if schedule.len() < 2 {
        return Err(Error::InvalidInput("schedule needs at least two values".into()));
    }
    let values: Vec<f64> = schedule.par_iter().map(|&a| family(a)).collect::<Result<_>>()?;
    let estimate = neville_at_zero(schedule, &values);
    let residuals: Vec<f64> = values.iter().map(|v| (v - estimate).abs()).collect();
    let monotone = residuals.windows(2).all(|w| w[1] < w[0]);
    let warning = (!monotone).then(|| format!("residuals along the schedule are not monotone: {residuals:?}"));
    Ok(FtLimit { schedule: schedule.to_vec(), values, estimate, warning })
}

fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = x.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (x[i], x[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

/// α' → 0 limit of the `M0,n` integral at planar point `x`.
pub fn ft_limit_m0n(x: &PlanarPoint<f64>, schedule: &[f64]) -> Result<FtLimit> {
    ft_limit(|a| Ok(stringy_integral(&StringyIntegrand::m0n(x, a)?)?.value), schedule)
}
