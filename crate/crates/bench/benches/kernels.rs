use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use lagrangekit::KernelSpec;

fn radial(c: &mut Criterion) {
    let radii: Vec<f64> = (1..=1000).map(|i| i as f64 * 1e-3).collect();
    let kernels = [
        ("thin_plate", KernelSpec::thin_plate()),
        ("matern_m2_d2", KernelSpec::matern(2, 2).unwrap()),
        ("matern_m3_d3", KernelSpec::matern(3, 3).unwrap()),
    ];
    let mut group = c.benchmark_group("eval_radial_x1000");
    for (name, spec) in &kernels {
        group.bench_function(*name, |b| {
            b.iter(|| radii.iter().map(|&r| spec.eval_radial(black_box(r))).sum::<f64>())
        });
    }
    group.finish();
}

criterion_group!(benches, radial);
criterion_main!(benches);
