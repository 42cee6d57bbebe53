//! Exit time S of |kappa| above eps*sqrt(alpha_n) after each anchor n where
//! the smallest edge count grows; the overshoot never passes (1+eps)sqrt(alpha_n).

use errw::graph::CycleGraph;
use errw::martingale::{kappa_trace, nonconvergence_constant, stopping_time_scan, StoppingOutcome};
use errw::rng::replica_rng;
use errw::walk::simulate;
use errw::weights::WeightFunction;
use num_rational::BigRational;

fn main() {
    let w = WeightFunction::power(2.0).unwrap();
    let g = CycleGraph::new(4).unwrap();
    for eps in [5.0, 1.0, 0.25] {
        let (mut exits, mut above, mut violations, mut anchors) = (0, 0, 0, 0);
        for r in 0..300 {
            let t = simulate(g, &w, 0, vec![0; 4], 10_000, &mut replica_rng(17, r)).unwrap();
            let tr = kappa_trace(&t, &w).unwrap();
            for n in tr.min_count_increases() {
                let rec = stopping_time_scan(&tr, &w, n, eps).unwrap();
                anchors += 1;
                match rec.outcome {
                    StoppingOutcome::Crossed { .. } => exits += 1,
                    StoppingOutcome::AboveAtAnchor { .. } => above += 1,
                    StoppingOutcome::NotStoppedByHorizon => {}
                }
                violations += usize::from(rec.is_violation());
            }
        }
        println!("eps={eps}: {anchors} anchors, {exits} exits, {above} already above, {violations} overshoot violations");
    }
    let c = nonconvergence_constant(&BigRational::from_integer(5.into()));
    println!("(1+eps)^2/(1+(1+eps)^2) at eps=5: {c}");
}
