//! The alternating sum of W*(edge counts) along one walk, accumulated from
//! increments and from counts; the two agree on even cycles only.
//! Writes the trace of the square walk as CSV to stdout after the summary.

use errw::graph::CycleGraph;
use errw::martingale::kappa_trace;
use errw::rng::replica_rng;
use errw::walk::simulate;
use errw::weights::WeightFunction;

fn main() {
    let w = WeightFunction::power(2.0).unwrap();
    let weak = WeightFunction::power(1.0).unwrap();
    for (l, w) in [(4, &w), (6, &w), (3, &weak), (5, &weak)] {
        let g = CycleGraph::new(l).unwrap();
        let t = simulate(g, w, 0, vec![0; l], 10_000, &mut replica_rng(3, l as u64)).unwrap();
        let tr = kappa_trace(&t, w).unwrap();
        println!("l={l} {:?}: kappa_N = {:+.6}, max identity gap = {:.3e}", tr.parity, tr.kappa[tr.steps()], tr.identity_gap());
    }

    let g = CycleGraph::new(4).unwrap();
    let t = simulate(g, &w, 0, vec![0; 4], 20, &mut replica_rng(3, 99)).unwrap();
    kappa_trace(&t, &w).unwrap().write_csv(std::io::stdout().lock()).unwrap();
}
