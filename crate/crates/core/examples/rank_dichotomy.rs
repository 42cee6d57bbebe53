//! Which fixed linear combinations of the conditional increments vanish on
//! every sampled state: the alternating vector on even cycles, nothing on odd.

use errw::graph::CycleGraph;
use errw::martingale::{linear_combination_rank_check, states_along};
use errw::rng::replica_rng;
use errw::walk::simulate;
use errw::weights::WeightFunction;

fn main() {
    let w = WeightFunction::power(1.0).unwrap();
    for l in 3..=8 {
        let g = CycleGraph::new(l).unwrap();
        let t = simulate(g, &w, 0, vec![0; l], 5000, &mut replica_rng(4, l as u64)).unwrap();
        let v = linear_combination_rank_check(g, &w, &states_along(&t).unwrap()).unwrap();
        let basis: Vec<String> = v.kernel_basis.iter().map(|b| format!("{:.3?}", b)).collect();
        println!("l={l}: kernel dim {} {}", v.kernel_dim, basis.join(" "));
    }
}
