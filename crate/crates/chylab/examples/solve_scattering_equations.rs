//! Solves the scattering equations at a random integer kinematic point and
//! prints the (n-3)! solutions in the gauge σ1 = 0, σ2 = 1, σn = ∞.

use chylab::kinematics::random_point;
use chylab::solver::{solve_all, SolverConfig};

fn main() -> chylab::Result<()> {
    let n = 6;
    let m = random_point(n, 7, (-10, 10))?;
    let set = solve_all(&m.to_complex(), &SolverConfig::default())?;
    println!("n = {n}: {} solutions", set.solutions.len());
    for (p, r) in set.solutions.iter().zip(&set.residual_norms) {
        let sigma: Vec<String> = p.sigma().iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
        println!("  σ3..σ{} = [{}]   residual {r:.1e}", n - 1, sigma.join(", "));
    }
    Ok(())
}
