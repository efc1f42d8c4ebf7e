use drac::protocols::{
    earac_behavior, eval_earac, eval_qrac_strategy, ghz_decomposition_check, success_from_behavior, Behavior,
    EaracStrategy, QracStrategy,
};
use drac::seesaw::random_strategy;
use drac::tasks::{table_one_earac, table_one_task, Input, PhaseOffset, Reflection, TaskSpec};
use drac::quantum_optimum;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 1000, ..ProptestConfig::default() }
}

/// Every Table I task assigns distinct answer strings to the eight inputs, so it is the
/// standard 3→1 RAC up to relabeling and inherits its quantum bound.
#[test]
fn table_tasks_are_relabeled_standard_racs() {
    for row in 1..=8 {
        let t = table_one_task(row).unwrap();
        let mut seen: Vec<u8> = Input::all().map(|x| (0..3).map(|y| t.f(x, y) << y).sum()).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 8, "row {row}");
    }
}

#[test]
fn behavior_is_valid_and_reproduces_sequential_success() {
    for row in 1..=4 {
        let (t, s) = table_one_earac(row).unwrap();
        if s.bob_twist != 0.0 {
            continue;
        }
        let p = earac_behavior(&s).unwrap();
        assert!(p.normalization_residual() <= 1e-12);
        assert!(p.no_signaling_residual() <= 1e-12);
        let v = success_from_behavior(&p, &t, s.invert_decoder).unwrap();
        assert!((v - eval_earac(&s, &t).unwrap()).abs() <= 1e-12);
    }
}

/// Flipping Alice's outcome together with x0 and x1 leaves the messages and her setting unchanged.
#[test]
fn behavior_gauge_of_alice_flip() {
    for r in Reflection::ALL {
        let s = EaracStrategy::family(r, PhaseOffset::Zero);
        let p = earac_behavior(&s).unwrap();
        let flipped = Behavior::from_fn(|a, b, cc, z1, z2, y| p.get(a ^ 1, b, cc, z1, z2, y));
        for row in 1..=8 {
            let t = table_one_task(row).unwrap();
            let t_flip = TaskSpec::from_fn("flipped", |x, y| t.f(Input::new(x.x0 ^ 1, x.x1 ^ 1, x.x2), y));
            let a = success_from_behavior(&p, &t, false).unwrap();
            let b = success_from_behavior(&flipped, &t_flip, false).unwrap();
            assert!((a - b).abs() <= 1e-12, "{r:?} row {row}");
        }
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ghz_decomposition_any_angles(phi in -10.0..10.0f64, theta in -10.0..10.0f64) {
        prop_assert!(ghz_decomposition_check(phi, theta) <= 1e-9);
    }

    #[test]
    fn random_qrac_bounded_by_optimum(seed in any::<u64>(), row in 1usize..=8) {
        let s = random_strategy(&mut ChaCha8Rng::seed_from_u64(seed));
        let t = table_one_task(row).unwrap();
        let v = eval_qrac_strategy(&s, &t).unwrap();
        prop_assert!((0.0..=quantum_optimum() + 1e-9).contains(&v));
        for row_p in s.success_table(&t) {
            prop_assert!(row_p.iter().all(|p| (-1e-12..=1.0 + 1e-12).contains(p)));
        }
    }

    #[test]
    fn qrac_json_round_trip(seed in any::<u64>()) {
        let s = random_strategy(&mut ChaCha8Rng::seed_from_u64(seed));
        let back = QracStrategy::from_json(&s.to_json()).unwrap();
        let t = table_one_task(1).unwrap();
        prop_assert!((eval_qrac_strategy(&back, &t).unwrap() - eval_qrac_strategy(&s, &t).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn inverted_decoder_complements(r in 0usize..3, off in 0usize..4, row in 1usize..=8) {
        let s = EaracStrategy::family(Reflection::ALL[r], PhaseOffset::ALL[off]);
        let t = table_one_task(row).unwrap();
        let a = eval_earac(&s, &t).unwrap();
        let b = eval_earac(&s.with_inverted_decoder(), &t).unwrap();
        prop_assert!((a + b - 1.0).abs() <= 1e-12);
    }
}
