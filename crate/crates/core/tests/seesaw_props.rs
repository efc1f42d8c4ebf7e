use drac::protocols::eval_qrac_strategy;
use drac::seesaw::{explicit_value, run_restart, run_seesaw, task1_composed_strategy};
use drac::tasks::table_one_task;
use drac::quantum_optimum;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn monotone_and_sound(seed in any::<u64>(), row in 1usize..=8) {
        let t = table_one_task(row).unwrap();
        let run = run_restart(&t, seed, 0);
        for w in run.history.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "row {row}: {} -> {}", w[0], w[1]);
        }
        prop_assert!((eval_qrac_strategy(&run.strategy, &t).unwrap() - run.value).abs() <= 1e-10);
        prop_assert!(run.value <= quantum_optimum() + 1e-9);
    }
}

#[test]
fn qrac_rows_reach_optimum() {
    for row in 5..=8 {
        let r = run_seesaw(&table_one_task(row).unwrap(), 50, 2024).unwrap();
        assert!((r.value - quantum_optimum()).abs() <= 1e-6, "row {row}: {}", r.value);
    }
}

/// Rows 1–4 stay below the reflection ceiling; row 1 reaches (7+√5)/12 rather than 3/4.
#[test]
fn earac_rows_stay_below_optimum() {
    let composed = eval_qrac_strategy(&task1_composed_strategy().unwrap(), &table_one_task(1).unwrap()).unwrap();
    assert!((composed - (7.0 + 5f64.sqrt()) / 12.0).abs() <= 1e-12);
    for row in 1..=4 {
        let t = table_one_task(row).unwrap();
        let r = run_seesaw(&t, 100, 7).unwrap();
        assert!(r.value < quantum_optimum() - 1e-3, "row {row}: {}", r.value);
        let printed = explicit_value(row).unwrap();
        assert!(r.value >= printed - 1e-4, "row {row}: {} < {printed}", r.value);
        if row <= 2 {
            assert!((r.value - composed).abs() <= 1e-4, "row {row}: {}", r.value);
        }
    }
}
