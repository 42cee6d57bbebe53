//! The exponential time-line construction reproduces the law of the walk:
//! compare the first five steps against the exact path probabilities.

use errw::graph::CycleGraph;
use errw::timeline::coupling_check;
use errw::weights::WeightFunction;

fn main() {
    let w = WeightFunction::exponential(2.0).unwrap();
    let g = CycleGraph::new(4).unwrap();
    let rep = coupling_check(&w, g, 0, &[0; 4], 5, 50_000, 7, 1e-12).unwrap();

    println!("path   exact      observed");
    for (code, (p, o)) in rep.expected.iter().zip(&rep.observed).enumerate() {
        if *p > 1e-3 {
            let f = *o as f64 / rep.replicas as f64;
            println!("{code:05b}  {p:.5}    {f:.5}");
        }
    }
    let c = &rep.chi_square;
    println!("chi2 = {:.2} on {} dof, p = {:.3}, truncated runs: {}", c.statistic, c.dof, c.p_value, rep.truncated);
}
