//! The scattering map sends the positive part of M(0,n) into the positive
//! region of H(c), and sends solutions back to their own kinematics.

use chylab::kinematics::{random_point, x_from_s, SubspaceSpec};
use chylab::scattering_form::{associahedron_check, scattering_map};
use chylab::solver::{solve_all, SolverConfig};
use num_traits::ToPrimitive;

fn main() -> chylab::Result<()> {
    let c = SubspaceSpec::new(6, chylab::kinematics::subspace_pairs(6).into_iter().map(|p| (p, 1.0)).collect())?;
    let r = associahedron_check(&c, 100, 3)?;
    println!("n = 6, c = 1: all X positive {} (min {:.3}), distinct images {}", r.all_positive, r.min_x, r.distinct_images);

    let m = random_point(6, 9, (-10, 10))?;
    let x = x_from_s(&m);
    let mc = m.to_complex();
    for p in &solve_all(&mc, &SolverConfig::default())?.solutions {
        let image = scattering_map(&mc, p)?;
        let dev = x.values().iter().map(|(d, v)| (image.at(d).re - v.to_f64().unwrap()).abs()).fold(0.0, f64::max);
        println!("solution -> X, max deviation {dev:.1e}");
    }
    Ok(())
}
