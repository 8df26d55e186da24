//! Batch runs, metrics and latency benchmarks on top of `sena-core`.

mod batch;
mod bench;
mod error;
mod manifest;
mod method;
pub mod report;

pub use batch::{output_path, run_batch};
pub use bench::{bench_latency, LatencyStats, MIN_ITERATIONS, WARMUP_ITERATIONS};
pub use error::{CliError, Result};
pub use manifest::{collect_images, workers_from_env, RunManifest, WORKERS_ENV};
pub use method::Method;
pub use report::AggregateReport;
