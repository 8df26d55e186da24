use std::time::Instant;

use serde::Serialize;
use sena_core::{PipelineConfig, RgbImage};

use crate::error::{CliError, Result};
use crate::method::Method;

pub const MIN_ITERATIONS: usize = 10;
pub const WARMUP_ITERATIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyStats {
    pub method: Method,
    pub width: usize,
    pub height: usize,
    pub iterations: usize,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub min_ms: f64,
    pub mean_ms: f64,
    /// Median divided by the image size in megapixels.
    pub median_ms_per_megapixel: f64,
}

/// Times the enhancement step alone, after a short warm-up, on the calling thread.
pub fn bench_latency(img: &RgbImage, method: Method, iterations: usize, cfg: &PipelineConfig) -> Result<LatencyStats> {
    if method == Method::None {
        return Err(CliError::Usage("bench needs an enhancement method, not none".into()));
    }
    if iterations < MIN_ITERATIONS {
        return Err(CliError::Usage(format!(
            "bench needs at least {MIN_ITERATIONS} iterations, got {iterations}"
        )));
    }
    for _ in 0..WARMUP_ITERATIONS {
        std::hint::black_box(method.apply(img, cfg)?);
    }
    let mut times = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let start = Instant::now();
        std::hint::black_box(method.apply(std::hint::black_box(img), cfg)?);
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    times.sort_by(f64::total_cmp);
    let pick = |pct: f64| times[(((pct / 100.0) * iterations as f64).ceil() as usize).clamp(1, iterations) - 1];
    let median_ms = pick(50.0);
    let (w, h) = img.dimensions();
    Ok(LatencyStats {
        method,
        width: w,
        height: h,
        iterations,
        median_ms,
        p95_ms: pick(95.0),
        min_ms: times[0],
        mean_ms: times.iter().sum::<f64>() / iterations as f64,
        median_ms_per_megapixel: median_ms / (w * h) as f64 * 1e6,
    })
}
