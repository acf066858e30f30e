//! Wall-clock comparison of the `alpha` backends.

use std::hint::black_box;
use std::time::Instant;

use qsl_core::alpha::{alpha, Fidelity, GlmRoot, Method};
use qsl_core::RootConfig;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: Method,
    pub epsilon: f64,
    /// Median over repetitions of the mean time per call.
    pub median_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub method: Method,
    /// Median of the per-fidelity medians.
    pub median_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub repetitions: usize,
    pub batch: usize,
    pub rows: Vec<BenchRow>,
    pub summary: Vec<BenchSummary>,
    pub fastest: Method,
}

impl BenchReport {
    pub fn summary_for(&self, method: Method) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.method == method)
            .map(|s| s.median_ns)
    }
}

pub fn default_grid() -> Vec<Fidelity> {
    (1..=9)
        .map(|i| Fidelity::new(i as f64 / 10.0).unwrap())
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Time `batch` back-to-back calls per repetition for every method and grid
/// point. Backend errors are timed like successes.
pub fn run_bench(
    grid: &[Fidelity],
    methods: &[Method],
    repetitions: usize,
    batch: usize,
    glm_root: GlmRoot,
    cfg: &RootConfig,
) -> BenchReport {
    let repetitions = repetitions.max(1);
    let batch = batch.max(1);
    let mut rows = Vec::new();
    for &m in methods {
        for &eps in grid {
            // One untimed call warms caches and the allocator.
            let _ = black_box(alpha(eps, m, glm_root, cfg));
            let samples = (0..repetitions)
                .map(|_| {
                    let start = Instant::now();
                    for _ in 0..batch {
                        let _ = black_box(alpha(black_box(eps), m, glm_root, cfg));
                    }
                    start.elapsed().as_nanos() as f64 / batch as f64
                })
                .collect();
            rows.push(BenchRow {
                method: m,
                epsilon: eps.value(),
                median_ns: median(samples),
            });
        }
    }
    let summary: Vec<BenchSummary> = methods
        .iter()
        .map(|&m| BenchSummary {
            method: m,
            median_ns: median(
                rows.iter()
                    .filter(|r| r.method == m)
                    .map(|r| r.median_ns)
                    .collect(),
            ),
        })
        .collect();
    let fastest = summary
        .iter()
        .min_by(|a, b| a.median_ns.total_cmp(&b.median_ns))
        .map(|s| s.method)
        .unwrap_or(Method::Newton);
    BenchReport {
        repetitions,
        batch,
        rows,
        summary,
        fastest,
    }
}
