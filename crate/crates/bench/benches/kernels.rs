use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use drac::bell::{local_max, nsbl_max, BellFunctional, Partition};
use drac::numerics::{c, herm_eig, Mat4};
use drac::protocols::{eval_earac, eval_qrac_strategy};
use drac::seesaw::run_restart;
use drac::tasks::{classical_optimum, reflection_nogo, table_one_earac, table_one_qrac, table_one_task, Reflection};

fn kernels(cr: &mut Criterion) {
    let h = Mat4::from_fn(|i, j| c((i + 2 * j) as f64 * 0.1, i as f64 - j as f64));
    let h = (h + h.adjoint()) * c(0.5, 0.0);
    cr.bench_function("herm_eig_4x4", |b| b.iter(|| herm_eig(black_box(&h)).unwrap()));

    let task1 = table_one_task(1).unwrap();
    cr.bench_function("classical_optimum", |b| b.iter(|| classical_optimum(black_box(&task1))));

    let (qt, qs) = table_one_qrac(5).unwrap();
    cr.bench_function("eval_qrac", |b| b.iter(|| eval_qrac_strategy(black_box(&qs), &qt).unwrap()));

    let (et, es) = table_one_earac(1).unwrap();
    cr.bench_function("eval_earac", |b| b.iter(|| eval_earac(black_box(&es), &et).unwrap()));

    let f = BellFunctional::new(0, 0.1).unwrap();
    cr.bench_function("local_max", |b| b.iter(|| local_max(black_box(&f))));
    cr.bench_function("nsbl_max_bc", |b| b.iter(|| nsbl_max(black_box(&f), Partition::BC).unwrap()));

    cr.bench_function("reflection_nogo", |b| b.iter(|| reflection_nogo(black_box(Reflection::XY))));

    let mut group = cr.benchmark_group("seesaw");
    group.sample_size(10);
    group.bench_function("restart_row3", |b| b.iter(|| run_restart(black_box(&table_one_task(3).unwrap()), 1, 0)));
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
