//! Probability that the walk never leaves its first edge, from the infinite
//! product and from simulation.

use errw::graph::CycleGraph;
use errw::harness::{stay_probability_oracle, trap_frequency};
use errw::weights::WeightFunction;

fn main() {
    let g = CycleGraph::new(4).unwrap();
    for (name, w) in [
        ("2^k", WeightFunction::exponential(2.0).unwrap()),
        ("3^k", WeightFunction::exponential(3.0).unwrap()),
        ("(k+1)^3", WeightFunction::power(3.0).unwrap()),
        ("k+1", WeightFunction::power(1.0).unwrap()),
    ] {
        let p = stay_probability_oracle(&w, 0, 0, 1e-9).unwrap();
        let mc = trap_frequency(&w, g, &[0; 4], 0, 200, 20_000, 5, 0).unwrap();
        println!(
            "W={name:<8} product {:.9} (+- {:.1e}, {} terms)  trapped for 200 steps {:.4} +- {:.4}",
            p.value, p.error_bound, p.terms, mc.frequency, mc.se
        );
    }
}
