//! On an even cycle every vertex touches one even and one odd edge, so the
//! erased time summed over even lines equals the elapsed time, and so does
//! the sum over odd lines. On odd cycles there is no such split.

use errw::graph::CycleGraph;
use errw::rng::replica_rng;
use errw::timeline::{boundary_time_sums, run_timeline, ClockFamily};
use errw::weights::WeightFunction;

fn main() {
    let w = WeightFunction::power(2.0).unwrap();
    for l in [4, 5, 6] {
        let g = CycleGraph::new(l).unwrap();
        let mut clocks = ClockFamily::sample(&w, &vec![0; l], Some(1e-9), replica_rng(1, l as u64)).unwrap();
        let run = run_timeline(&mut clocks, g, 0, 10_000).unwrap();
        match boundary_time_sums(&run) {
            Ok((even, odd)) => println!("l={l}: tau={:.12} even={even:.12} odd={odd:.12}", run.elapsed()),
            Err(e) => println!("l={l}: {e}"),
        }
        println!("      occupation {:?}", run.occupation.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>());
    }
}
