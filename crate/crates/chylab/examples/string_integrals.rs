//! Stringy integrals: the Beta function at four points and the α' → 0
//! limit at five points.

use chylab::amplitudes::feynman_phi3;
use chylab::kinematics::random_positive_planar;
use chylab::string::{ft_limit, ft_limit_m0n, string_4pt, string_4pt_closed_form, DEFAULT_SCHEDULE};
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> chylab::Result<()> {
    for a in [0.5, 0.1, 0.05] {
        println!("α' = {a}: quadrature {:.12}, α'B(α's, α't) {:.12}", string_4pt(2.0, 3.0, a)?, string_4pt_closed_form(2.0, 3.0, a)?);
    }
    let r = ft_limit(|a| string_4pt(2.0, 3.0, a), &DEFAULT_SCHEDULE)?;
    println!("4 points, s = 2, t = 3: α' → 0 gives {:.8} (5/6 = {:.8})", r.estimate, 5.0 / 6.0);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_positive_planar(5, &mut rng, 10, 3)?;
    let r = ft_limit_m0n(&x.map(|v| v.to_f64().unwrap()), &DEFAULT_SCHEDULE)?;
    println!("5 points: α' → 0 gives {:.6}, feynman {:.6}", r.estimate, feynman_phi3(&x)?.to_f64().unwrap());
    Ok(())
}
