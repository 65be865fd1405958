//! Planar variables and Mandelstam invariants, with the JSON encodings used
//! by the command-line tool.

use chylab::kinematics::{mandelstam_to_json, planar_to_json, random_point, s_from_x, x_from_s};

fn main() -> chylab::Result<()> {
    let m = random_point(5, 7, (-10, 10))?;
    let x = x_from_s(&m);
    println!("{}", planar_to_json(&x));
    println!("{}", mandelstam_to_json(&m));
    assert_eq!(s_from_x(&x), m);
    Ok(())
}
