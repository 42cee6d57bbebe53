//! Lengthening two gaps of a deterministic driver delays the first departure
//! from vertex j by r and leaves every other occupation time unchanged.

use errw::driver::{perturb, perturbation_case, run_driven_walk, Driver};
use errw::rng::replica_rng;

fn main() {
    let d = Driver::random(5, 30, 0.85, 0, &mut replica_rng(11, 0)).unwrap();
    let base = run_driven_walk(&d, 100_000).unwrap();
    println!("jumps until the driver runs out: {}", base.path.jumps());
    println!("y = {:?}", base.report.y);
    println!("z - M y, worst entry: {:e}", base.report.relation_defect());
    for j in 0..5 {
        let shifted = perturb(&d, j, 0.25, base.trajectory()).unwrap();
        let run = run_driven_walk(&shifted, 100_000).unwrap();
        let diff: Vec<String> = run.report.y.iter().zip(&base.report.y).map(|(a, b)| format!("{:+.3}", a - b)).collect();
        println!("j={j} {:?}: y diff [{}]", perturbation_case(base.trajectory(), j), diff.join(", "));
    }
}
