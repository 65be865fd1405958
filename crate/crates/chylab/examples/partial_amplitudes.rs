//! Bi-adjoint partial amplitudes m(1234|β) at s = 2, t = 3.

use chylab::amplitudes::{chy_partial, partial_feynman};
use chylab::kinematics::{rat, s_from_x, PlanarPoint};
use chylab::solver::{solve_all, SolverConfig};

fn main() -> chylab::Result<()> {
    let x = PlanarPoint::from_fn(4, |d| rat(if d.i == 1 { 2 } else { 3 }))?;
    let sols = solve_all(&s_from_x(&x).to_complex(), &SolverConfig::default())?;
    for beta in [[1, 2, 3, 4], [2, 1, 3, 4], [1, 3, 2, 4], [1, 2, 4, 3]] {
        let chy = chy_partial(&sols, &[1, 2, 3, 4], &beta)?;
        println!("β = {beta:?}: chy = {:+.6}, feynman = {}", chy.re, partial_feynman(&x, &beta)?);
    }
    Ok(())
}
