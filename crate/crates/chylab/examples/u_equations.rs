//! Dihedral coordinates on the positive part of M(0,5) and the u-equations
//! u_ij + ∏_{kl crossing ij} u_kl = 1.

use chylab::moduli::{u_equation_residuals, u_from_y, PositivePoint};

fn main() -> chylab::Result<()> {
    let y = PositivePoint::new(5, vec![1.0, 1.0])?;
    let u = u_from_y(&y);
    for (i, j) in [(1, 3), (1, 4), (2, 4), (2, 5), (3, 5)] {
        println!("u{i}{j} = {:.6}", u.get(i, j));
    }
    let y = PositivePoint::new(8, vec![0.3, 2.0, 0.7, 5.0, 1.1])?;
    let worst = u_equation_residuals(&u_from_y(&y)).values().fold(0.0f64, |a, r| a.max(r.abs()));
    println!("n = 8: max |R_ij| = {worst:.1e}");
    Ok(())
}
