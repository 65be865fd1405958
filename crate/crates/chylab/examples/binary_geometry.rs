//! Numerical witnesses for the built-in binary geometries and the link of a
//! vertex of M(0,6).

use chylab::binary_geometry::{builtin, m0n_system, witness_report, BUILTIN_NAMES};

fn main() -> chylab::Result<()> {
    for name in BUILTIN_NAMES {
        let r = witness_report(name, &builtin(name)?, 5, 1);
        println!(
            "{:<8} vertices {:>2}, dim {}, flag {}, pseudomanifold {}, witnesses {}/{} (max residual {:.1e})",
            r.name, r.vertices, r.dim, r.flag, r.pseudomanifold, r.witnesses, r.attempts, r.max_residual
        );
    }
    let m06 = m0n_system(6)?;
    let stratum = m06.restrict_by_labels(&["1,4"])?;
    println!("M(0,6) at u14 = 0: {} remaining coordinates, dim {}", stratum.len(), stratum.expected_dimension());
    Ok(())
}
