//! The Laplace transform of the tropical Koba-Nielsen potential equals the
//! φ³ amplitude, exactly.

use chylab::amplitudes::feynman_phi3;
use chylab::kinematics::random_positive_planar;
use chylab::tropical::{laplace_amplitude, trop_fan};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> chylab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 4..=8 {
        let x = random_positive_planar(n, &mut rng, 9, 4)?;
        let fan = trop_fan(n)?;
        println!(
            "n = {n}: {} maximal cones, laplace = {}, feynman = {}",
            fan.maximal_cones().count(),
            laplace_amplitude(&x)?,
            feynman_phi3(&x)?
        );
    }
    Ok(())
}
