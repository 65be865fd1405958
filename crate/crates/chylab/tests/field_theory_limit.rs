//! α' → 0 limits of stringy integrals against the exact φ³ amplitude.

use chylab::amplitudes::feynman_phi3;
use chylab::kinematics::random_positive_planar;
use chylab::string::{ft_limit_m0n, DEFAULT_SCHEDULE};
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn six_point_limit_is_within_three_percent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = random_positive_planar(6, &mut rng, 10, 3).unwrap();
    let exact = feynman_phi3(&x).unwrap().to_f64().unwrap();
    let r = ft_limit_m0n(&x.map(|v| v.to_f64().unwrap()), &DEFAULT_SCHEDULE).unwrap();
    let dev = ((r.estimate - exact) / exact).abs();
    assert!(dev < 0.03, "estimate {} vs {exact} ({dev:.2e})", r.estimate);
}

#[test]
fn five_point_limits_are_within_one_percent() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..3 {
        let x = random_positive_planar(5, &mut rng, 10, 3).unwrap();
        let exact = feynman_phi3(&x).unwrap().to_f64().unwrap();
        let r = ft_limit_m0n(&x.map(|v| v.to_f64().unwrap()), &DEFAULT_SCHEDULE).unwrap();
        assert!(((r.estimate - exact) / exact).abs() < 0.01, "{r:?} vs {exact}");
    }
}
