//! The scattering form pulled back to a slice H(c) of kinematic space
//! reproduces the φ³ amplitude.

use chylab::amplitudes::feynman_phi3;
use chylab::kinematics::{point_on_subspace, rat, SubspaceSpec};
use chylab::scattering_form::{pullback_coefficient, scattering_form_terms};

fn main() -> chylab::Result<()> {
    for t in scattering_form_terms(5)? {
        let diags: Vec<String> = t.order.iter().map(|d| d.to_string()).collect();
        println!("{:+} dlog X_{}", t.sign, diags.join(" ∧ dlog X_"));
    }
    let c = SubspaceSpec::new(5, [((1, 3), rat(1)), ((1, 4), rat(2)), ((2, 4), rat(3))].into())?;
    let x = point_on_subspace(&c, &[rat(2), rat(7)])?;
    println!("pullback = {}, feynman = {}", pullback_coefficient(&c, &x)?, feynman_phi3(&x)?);
    Ok(())
}
