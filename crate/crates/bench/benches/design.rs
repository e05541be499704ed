use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polarq_bench::channel_distribution;
use polarq_core::density::{g_output_distribution, run_quantized_de};
use polarq_core::quantizer::{
    design_min_distortion_quantizer, design_symmetric_quantizer, design_uniform_quantizer,
};
use polarq_core::DesignRule;

fn quantizer_design(c: &mut Criterion) {
    let channel = channel_distribution(0.0);
    let root = design_symmetric_quantizer(&channel, 32).unwrap();
    let compressed = polarq_core::quantizer::apply_quantizer(&channel, &root).unwrap();
    // A realistic internal alphabet: the g output of two 32-level inputs.
    let g = g_output_distribution(&compressed, &compressed).unwrap();

    let mut group = c.benchmark_group("quantizer");
    for levels in [16, 32] {
        group.bench_with_input(BenchmarkId::new("dp_channel", levels), &levels, |b, &k| {
            b.iter(|| design_min_distortion_quantizer(&channel, k).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dp_g_output", levels), &levels, |b, &k| {
            b.iter(|| design_min_distortion_quantizer(&g, k).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("symmetric_g_output", levels), &levels, |b, &k| {
            b.iter(|| design_symmetric_quantizer(&g, k).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("uniform_channel", levels), &levels, |b, &k| {
            b.iter(|| design_uniform_quantizer(&channel, k).unwrap())
        });
    }
    group.finish();
}

fn density_evolution(c: &mut Criterion) {
    let channel = channel_distribution(0.0);
    let mut group = c.benchmark_group("density_evolution");
    group.sample_size(10);
    for code_len in [64, 256] {
        group.bench_with_input(BenchmarkId::new("5bit", code_len), &code_len, |b, &n| {
            b.iter(|| run_quantized_de(&channel, n, 32, DesignRule::Symmetric).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, quantizer_design, density_evolution);
criterion_main!(benches);
