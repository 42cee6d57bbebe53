//! Attraction on the square next to the triangle and the pentagon. Odd-cycle
//! columns are empirical observations only.

use errw::config::ExperimentConfig;
use errw::harness::compare_parities;

fn main() {
    let mut even = ExperimentConfig::minimal(8);
    even.horizon = 20_000;
    even.replicas = 200;
    for odd_len in [3, 5] {
        let mut odd = even.clone();
        odd.cycle_length = odd_len;
        let cmp = compare_parities(&even, &odd, 0).unwrap();
        for c in &cmp.columns {
            println!(
                "l={} attracted {:.3} +- {:.3}, onset quantiles {:?}, mean |kappa_N| {:.4}  [{}]",
                c.cycle_length, c.attracted_fraction, c.attracted_se, c.onset_quantiles, c.final_kappa_abs_mean, c.label
            );
        }
    }
}
