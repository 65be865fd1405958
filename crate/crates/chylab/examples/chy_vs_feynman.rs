//! The CHY sum over solutions against the exact φ³ sum over triangulations.

use chylab::amplitudes::{chy_scalar, feynman_phi3};
use chylab::kinematics::{random_point, x_from_s};
use chylab::solver::{solve_all, SolverConfig};
use num_traits::ToPrimitive;

fn main() -> chylab::Result<()> {
    for n in 4..=7 {
        let m = random_point(n, 1, (-10, 10))?;
        let feynman = feynman_phi3(&x_from_s(&m))?;
        let chy = chy_scalar(&solve_all(&m.to_complex(), &SolverConfig::default())?)?;
        let f = feynman.to_f64().unwrap();
        println!("n = {n}: feynman = {feynman} = {f:.12}, chy = {:.12}{:+.1e}i, chy/feynman = {:.12}", chy.re, chy.im, chy.re / f);
    }
    Ok(())
}
