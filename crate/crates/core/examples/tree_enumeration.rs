//! Every kappa^i is a martingale: enumerate all 2^m paths and average the
//! next increment at each node, in exact rational arithmetic.

use errw::graph::CycleGraph;
use errw::martingale::enumerate_increment_check;
use errw::weights::WeightFunction;

fn main() {
    let cases = [
        ("(k+1)^2", WeightFunction::power(2.0).unwrap()),
        ("2^k", WeightFunction::exponential(2.0).unwrap()),
        ("(k+1)^1.5", WeightFunction::power(1.5).unwrap()),
    ];
    for (name, w) in &cases {
        for l in [3, 4] {
            let g = CycleGraph::new(l).unwrap();
            let r = enumerate_increment_check(g, w, &vec![0; l], 0, 8).unwrap();
            println!(
                "W={name:<10} l={l}: {} nodes, exact={}, max |E increment| = {:e}, compensator defect = {:e}",
                r.nodes, r.exact, r.max_increment, r.max_compensator_defect
            );
        }
    }
}
