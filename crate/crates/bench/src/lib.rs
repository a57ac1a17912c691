//! Benchmark-only crate; see `benches/pipeline.rs`.

/// Deterministic test panel shared by the benchmarks: `n` unit-variance
/// Student-t rows of length `t_len`.
pub fn bench_series(n: usize, t_len: usize) -> srnlsd::SeriesMatrix {
    srnlsd::sample_student_t_unit_variance(n, t_len, 10.0, 0xBE7C4).unwrap()
}
