//! Weight functions, condition sum 1/W < inf, W* and the tail sums alpha.

use errw::weights::{TailFamily, WeightFamily, WeightFunction};

fn main() {
    let table = WeightFamily::Table {
        values: vec![1.0, 1.0, 4.0],
        tail: Some(TailFamily::Exponential { base: 2.0, scale: 1.0 }),
    };
    let families = [
        WeightFamily::power(0.5),
        WeightFamily::power(1.0),
        WeightFamily::power(2.0),
        WeightFamily::exponential(2.0),
        table,
        WeightFamily::Table { values: vec![1.0; 5], tail: None },
    ];
    for f in families {
        let w = WeightFunction::new(f.clone()).unwrap();
        let h = w.check_h();
        let alpha = w.alpha(0, 1e-12).map(|a| format!("{a:.12}")).unwrap_or_else(|e| e.to_string());
        println!("{}", serde_json::to_string(&f).unwrap());
        println!("    H: {:?} via {:?}", h.verdict, h.certificate);
        println!("    W(0..5) = {:?}", (0..5).map(|k| w.eval(k).ok()).collect::<Vec<_>>());
        println!("    W*(5) = {:?}, alpha_0 = {alpha}", w.wstar(5).ok());
    }
}
