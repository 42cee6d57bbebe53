//! det M^(l) = 1 - (-1)^l: the boundary matrix is singular exactly on even cycles.

use errw::circulant::{circulant_m, det_m};

fn main() {
    print!("M^(5) =\n{}", circulant_m(5).unwrap());
    for l in 3..=12 {
        let m = circulant_m(l).unwrap();
        println!("l={l:>2}  det={}  rank={}", det_m(l).unwrap(), m.rank());
    }
    let alt: Vec<f64> = (0..6).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    println!("M^(6)^T (1,-1,1,-1,1,-1) = {:?}", circulant_m(6).unwrap().solve_beta(&alt));
}
