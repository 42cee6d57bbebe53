use errw::circulant::CirculantM;
use errw::config::{ExperimentConfig, Format, OutputOptions};
use errw::driver::{perturb, run_driven_walk, Driver};
use errw::graph::CycleGraph;
use errw::martingale::kappa_trace;
use errw::report::stable_json_value;
use errw::rng::replica_rng;
use errw::timeline::{boundary_time_sums, run_timeline, ClockFamily};
use errw::walk::{Trajectory, WalkState};
use errw::weights::WeightFunction;
use proptest::prelude::*;

/// A walk on `l` vertices steered by `bits`: bit 1 takes `e_v`, bit 0 `e_{v-1}`.
fn steered(l: usize, start: usize, bits: &[bool]) -> Trajectory {
    let g = CycleGraph::new(l).unwrap();
    let mut t = Trajectory::start(WalkState::new(g, start % l, vec![0; l]).unwrap());
    for &b in bits {
        let (lo, hi) = g.incident_edges(t.final_state().position()).unwrap();
        t.push(if b { hi } else { lo }).unwrap();
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kappa_identity_on_any_even_path(half in 2usize..5, start in 0usize..10, bits in prop::collection::vec(any::<bool>(), 0..400), rho in 1.1f64..3.0) {
        let w = WeightFunction::power(rho).unwrap();
        let tr = kappa_trace(&steered(2 * half, start, &bits), &w).unwrap();
        prop_assert!(tr.identity_gap() < 1e-9);
        prop_assert!(tr.line_gap() == 0.0);
        prop_assert!(tr.y_monotone());
    }

    #[test]
    fn wstar_increments(rho in 0.5f64..4.0, n in 0u64..5000) {
        let w = WeightFunction::power(rho).unwrap();
        let d = w.wstar(n + 1).unwrap() - w.wstar(n).unwrap();
        prop_assert!((d - w.inv(n).unwrap()).abs() <= 1e-12 * w.wstar(n + 1).unwrap().max(1.0));
    }

    #[test]
    fn circulant_adjoint(l in 3usize..16, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = replica_rng(seed, 0);
        let y: Vec<f64> = (0..l).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..l).map(|_| rng.random::<f64>()).collect();
        let m = CirculantM::new(l).unwrap();
        let lhs: f64 = b.iter().zip(m.apply(&y)).map(|(x, z)| x * z).sum();
        let rhs: f64 = m.solve_beta(&b).iter().zip(&y).map(|(x, z)| x * z).sum();
        prop_assert!((lhs - rhs).abs() < 1e-12);
        prop_assert_eq!(m.rank(), if l % 2 == 0 { l - 1 } else { l });
    }

    #[test]
    fn driven_occupation_relation(l in 3usize..8, seed in any::<u64>(), decay in 0.5f64..0.95) {
        let d = Driver::random(l, 20, decay, (seed % l as u64) as usize, &mut replica_rng(seed, 1)).unwrap();
        let run = run_driven_walk(&d, 50_000).unwrap();
        prop_assert!(run.report.relation_defect() < 1e-12);
        let total: f64 = run.report.y.iter().sum();
        prop_assert!(total <= run.path.elapsed() + 1e-12);
    }

    #[test]
    fn shift_moves_one_coordinate(l in 3usize..7, seed in any::<u64>(), j in 0usize..7, r in 1e-3f64..10.0) {
        let j = j % l;
        let d = Driver::random(l, 15, 0.8, 0, &mut replica_rng(seed, 2)).unwrap();
        let base = run_driven_walk(&d, 50_000).unwrap();
        let run = run_driven_walk(&perturb(&d, j, r, base.trajectory()).unwrap(), 50_000).unwrap();
        prop_assert_eq!(run.trajectory().edges(), base.trajectory().edges());
        for i in 0..l {
            let want = if i == j && base.report.departed[j] { r } else { 0.0 };
            prop_assert!((run.report.y[i] - base.report.y[i] - want).abs() < 1e-12 * (1.0 + r));
        }
    }

    #[test]
    fn timeline_bookkeeping(half in 2usize..5, seed in any::<u64>(), jumps in 1usize..2000) {
        let l = 2 * half;
        let w = WeightFunction::power(2.0).unwrap();
        let mut clocks = ClockFamily::sample(&w, &vec![0; l], Some(1e-9), replica_rng(seed, 3)).unwrap();
        let run = run_timeline(&mut clocks, CycleGraph::new(l).unwrap(), 0, jumps).unwrap();
        prop_assert!(run.jump_times.windows(2).all(|p| p[0] < p[1]));
        let tau = run.elapsed();
        let occ: f64 = run.occupation.iter().sum();
        prop_assert!((occ - tau).abs() <= 1e-9 * tau.max(1.0));
        let (even, odd) = boundary_time_sums(&run).unwrap();
        prop_assert!((even - tau).abs() <= 1e-9 * tau.max(1.0));
        prop_assert!((odd - tau).abs() <= 1e-9 * tau.max(1.0));
    }

    #[test]
    fn hash_ignores_output_options(seed in any::<u64>(), path in "[a-z]{1,8}\\.json") {
        let a = ExperimentConfig::minimal(seed);
        let mut b = a.clone();
        b.output = OutputOptions { format: Format::Csv, path: Some(path.into()) };
        prop_assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.seed = seed.wrapping_add(1);
        prop_assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn stable_json_is_a_fixed_point(xs in prop::collection::vec(-1e300f64..1e300, 0..20), n in any::<i64>()) {
        let v = serde_json::json!({"xs": xs, "n": n, "s": "a\"b"});
        let once = stable_json_value(&v);
        let again = stable_json_value(&serde_json::from_str(&once).unwrap());
        prop_assert_eq!(once, again);
    }
}
