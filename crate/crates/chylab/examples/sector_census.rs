//! For four-dimensional kinematics the solutions split into sectors counted
//! by Eulerian numbers.

use chylab::spinor::sector_census;

fn main() -> chylab::Result<()> {
    for (n, trials) in [(5, 10), (6, 10), (7, 3)] {
        let c = sector_census(n, trials, 1)?;
        println!("n = {n}: expected {:?}, per trial {:?}", c.expected, c.per_trial[0]);
        println!("        {}/{} trials match", c.matching_trials, c.per_trial.len());
    }
    Ok(())
}
