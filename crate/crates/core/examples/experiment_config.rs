//! Load a JSON config, apply overrides, run it and write stable JSON and CSV.

use std::path::Path;

use errw::config::{parse_config_str, Format, Overrides};
use errw::harness::run_experiment;
use errw::report::emit;

const CONFIG: &str = r#"{
  "name": "hexagon-timeline",
  "cycle_length": 6,
  "weights": {"family": "power", "parameters": {"rho": 2.0}},
  "horizon": 5000,
  "replicas": 50,
  "seed": 1,
  "engine": "timeline"
}"#;

fn main() {
    let overrides = Overrides { seed: Some(7), ..Default::default() };
    let cfg = parse_config_str(CONFIG, Path::new("inline"), &overrides).unwrap();
    let result = run_experiment(&cfg, 0).unwrap();
    let dir = std::env::temp_dir().join("errw-example");
    emit(&result, Format::Json, &dir.join("result.json")).unwrap();
    emit(&result, Format::Csv, &dir.join("result.csv")).unwrap();
    println!("config hash {}", result.provenance.config_hash);
    println!("parity residual max {:?}", result.aggregate.parity_residual_max);
    print!("{}", std::fs::read_to_string(dir.join("result.csv")).unwrap());
}
