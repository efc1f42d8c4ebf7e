use drac::protocols::{eval_earac, eval_qrac_strategy, EaracStrategy};
use drac::tasks::{
    build_qrac_task, classical_optimum, enumerate_cube_rotations, standard_rac_classical_optimum, table_one_earac,
    table_one_qrac, table_one_task, Input, PhaseOffset, Reflection, TaskSpec, VertexAssignment,
};
use drac::quantum_optimum;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 1000, ..ProptestConfig::default() }
}

/// Table I guessing functions written out directly from the printed formulas.
fn printed_row(row: usize, x: Input, y: usize) -> u8 {
    let (x0, x1, x2) = (x.x0, x.x1, x.x2);
    let s = x0 ^ x1;
    let f = match row {
        1 => [x0, x1, x2],
        2 => [x0 ^ x2, x1 ^ x2, x2],
        3 => [x0 ^ (x2 & s), x1 ^ (x2 & (1 - s)), x2],
        4 => [x0 ^ (x2 & (1 - s)), x1 ^ (x2 & s), x2],
        5 => [x0 ^ x2, x1, x2],
        6 => [x0, x1, x2 ^ x0],
        7 => [x0 ^ x2, x1, x0],
        8 => [x0 ^ x2, x1 ^ x2, x0],
        _ => unreachable!(),
    };
    f[y]
}

#[test]
fn table_one_truth_tables_pinned() {
    for row in 1..=8 {
        let t = table_one_task(row).unwrap();
        for x in Input::all() {
            for y in 0..3 {
                assert_eq!(t.f(x, y), printed_row(row, x, y), "row {row} x {x} y {y}");
            }
        }
        assert!(t.pairwise_independent(), "row {row}");
    }
}

#[test]
fn optimal_resources_reach_quantum_value() {
    for row in 1..=4 {
        let (t, s) = table_one_earac(row).unwrap();
        assert_eq!(t.bits(), table_one_task(row).unwrap().bits());
        assert!((eval_earac(&s, &t).unwrap() - quantum_optimum()).abs() <= 1e-9);
        for row_p in s.success_table(&t) {
            assert!(row_p.iter().all(|p| (p - quantum_optimum()).abs() <= 1e-9));
        }
    }
    for row in 5..=8 {
        let (t, s) = table_one_qrac(row).unwrap();
        assert_eq!(t.bits(), table_one_task(row).unwrap().bits());
        assert!((eval_qrac_strategy(&s, &t).unwrap() - quantum_optimum()).abs() <= 1e-9);
        for row_p in s.success_table(&t) {
            assert!(row_p.iter().all(|p| (p - quantum_optimum()).abs() <= 1e-9));
        }
    }
}

#[test]
fn earac_family_below_optimum_on_qrac_rows() {
    for row in 5..=8 {
        let t = table_one_task(row).unwrap();
        for r in Reflection::ALL {
            for off in PhaseOffset::ALL {
                for s in [EaracStrategy::family(r, off), EaracStrategy::family(r, off).with_inverted_decoder()] {
                    let v = eval_earac(&s, &t).unwrap();
                    assert!(v < quantum_optimum() - 1e-3, "row {row} {r:?} {off:?}: {v}");
                }
            }
        }
    }
}

/// Exhaustive counts of correct answers (out of 24) for the Table I rows and the standard RAC.
#[test]
fn classical_counts() {
    let counts: Vec<u32> = (1..=8).map(|r| classical_optimum(&table_one_task(r).unwrap()).successes.unwrap()).collect();
    assert_eq!(counts, vec![17, 18, 17, 17, 17, 16, 16, 16]);
    let std = standard_rac_classical_optimum(&TaskSpec::standard());
    assert_eq!(std.successes, Some(18));
    assert_eq!(std.value, 0.75);
}

#[test]
fn classical_witness_row_one() {
    let t = table_one_task(1).unwrap();
    let opt = classical_optimum(&t);
    let hits: u32 = Input::all().map(|x| (0..3).filter(|&y| opt.witness.guess(x, y) == t.f(x, y)).count() as u32).sum();
    assert_eq!(Some(hits), opt.successes);
}

/// Classical counts over every admissible rotation and compatible assignment.
#[test]
fn classical_over_constructions() {
    let mut by_rotation: BTreeMap<String, BTreeMap<u32, usize>> = BTreeMap::new();
    let rotations: Vec<_> = enumerate_cube_rotations().into_iter().filter(|r| r.admissible).collect();
    assert_eq!(rotations.len(), 15);
    for r in &rotations {
        for a in VertexAssignment::compatible_with(r) {
            let (t, _) = build_qrac_task(r, &a).unwrap();
            let s = classical_optimum(&t).successes.unwrap();
            *by_rotation.entry(r.label.clone()).or_default().entry(s).or_default() += 1;
        }
    }
    for (label, hist) in &by_rotation {
        let min = *hist.keys().next().unwrap();
        assert!(min >= 16, "{label}: {hist:?}");
        if label.starts_with("R_{") {
            assert_eq!(hist.keys().copied().collect::<Vec<_>>(), vec![18], "{label}");
        } else if label.contains("(pi)") {
            assert_eq!(hist.keys().copied().collect::<Vec<_>>(), vec![16, 17], "{label}");
        } else {
            assert_eq!(hist.keys().copied().collect::<Vec<_>>(), vec![16], "{label}");
        }
    }
}

#[test]
fn cube_rotations_form_a_group() {
    let all = enumerate_cube_rotations();
    assert_eq!(all.len(), 24);
    for a in &all {
        for b in &all {
            let m = a.compose(b);
            assert!(all.iter().any(|r| r.matrix == m));
        }
        assert!(all.iter().any(|b| a.compose(b) == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]));
    }
}

/// Task 4 is task 3 under x₀↔x₁ with y₀↔y₁; no relabelling of the questions alone suffices.
#[test]
fn task_four_is_task_three_with_swapped_inputs() {
    let (t3, t4) = (table_one_task(3).unwrap(), table_one_task(4).unwrap());
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for perm in perms {
        for flips in 0..8u8 {
            let same = Input::all().all(|x| (0..3).all(|y| t4.f(x, y) == t3.f(x, perm[y]) ^ ((flips >> y) & 1)));
            assert!(!same, "perm {perm:?} flips {flips}");
        }
    }
    let swapped = [1, 0, 2];
    assert!(Input::all().all(|x| (0..3).all(|y| t4.f(x, y) == t3.f(Input::new(x.x1, x.x0, x.x2), swapped[y]))));
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn classical_invariant_under_question_relabel(bits in 0u32..(1 << 24), perm in Just([0usize, 1, 2]).prop_shuffle()) {
        let t = TaskSpec::from_bits("random", bits);
        let a = classical_optimum(&t);
        let b = classical_optimum(&t.relabel_questions(perm));
        prop_assert_eq!(a.successes, b.successes);
    }

    #[test]
    fn classical_invariant_under_question_xor(bits in 0u32..(1 << 24), g in 0u8..8) {
        let t = TaskSpec::from_bits("random", bits);
        let flipped = TaskSpec::from_fn("flipped", |x, y| t.f(x, y) ^ (g >> y & 1));
        prop_assert_eq!(classical_optimum(&t).successes, classical_optimum(&flipped).successes);
    }

    #[test]
    fn classical_bounds(bits in 0u32..(1 << 24)) {
        let t = TaskSpec::from_bits("random", bits);
        let opt = classical_optimum(&t);
        let s = opt.successes.unwrap();
        prop_assert!((12..=24).contains(&s));
        prop_assert!((opt.value - s as f64 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn task_json_round_trip(bits in 0u32..(1 << 24)) {
        let t = TaskSpec::from_bits("random", bits);
        prop_assert_eq!(TaskSpec::from_json(&t.to_json()).unwrap(), t);
    }
}
