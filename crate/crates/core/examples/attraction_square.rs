//! Fraction of walks on the square that end up crossing a single edge.
//!
//!     cargo run --release --example attraction_square -- [replicas] [horizon]

use errw::config::ExperimentConfig;
use errw::harness::run_experiment;

fn main() {
    let mut args = std::env::args().skip(1);
    let replicas = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let horizon = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);

    for (label, rho) in [("W(k)=(k+1)^2", 2.0), ("W(k)=k+1", 1.0)] {
        let mut cfg = ExperimentConfig::minimal(2024);
        cfg.weights = errw::weights::WeightFamily::power(rho);
        cfg.replicas = replicas;
        cfg.horizon = horizon;
        let r = run_experiment(&cfg, 0).expect("valid config");
        let a = &r.aggregate;
        println!(
            "{label:>14}: attracted {}/{} = {:.3} +- {:.3}  (window {}, onset median {:?})",
            a.attracted, a.replicas, a.attracted_fraction, a.attracted_se, cfg.window, a.onset_median
        );
    }
}
