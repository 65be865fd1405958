//! Parke-Taylor MHV amplitudes on random momentum-conserving spinors.

use chylab::spinor::{mhv_partial, random_spinors};

fn main() -> chylab::Result<()> {
    let p = random_spinors(4, 2)?;
    let a = mhv_partial(&p, &[1, 2, 3, 4], 1, 2)?;
    let sq = p.square(3, 4).powu(4) / (p.square(1, 2) * p.square(2, 3) * p.square(3, 4) * p.square(4, 1));
    println!("⟨12⟩⁴/⟨12⟩⟨23⟩⟨34⟩⟨41⟩ = {a:.6}\n[34]⁴/[12][23][34][41] = {sq:.6}");
    let sum = a + mhv_partial(&p, &[2, 1, 3, 4], 1, 2)? + mhv_partial(&p, &[2, 3, 1, 4], 1, 2)?;
    println!("U(1) decoupling sum: {:.1e}", sum.norm());

    let q = random_spinors(5, 2)?;
    let a5 = |o: [usize; 5]| mhv_partial(&q, &o, 1, 2);
    let lhs = a5([1, 2, 5, 3, 4])?;
    let rhs = a5([1, 2, 4, 3, 5])? + a5([1, 4, 2, 3, 5])? + a5([1, 4, 3, 2, 5])?;
    println!("A(12534) = {lhs:.6}, A(12435) + A(14235) + A(14325) = {rhs:.6}");
    Ok(())
}
