use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use sena_core::imgcore::io::{read_rgb, write_rgb};
use sena_core::iqa::{Evaluator, NssModel};
use sena_core::PipelineConfig;

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::method::Method;
use crate::report::{AggregateReport, Row};

/// Output location of `rel` under `out_dir`: `<stem>_<method>.png` beside its mirrored parent.
pub fn output_path(out_dir: &Path, rel: &Path, method: Method) -> PathBuf {
    let stem = rel.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    out_dir
        .join(rel.parent().unwrap_or(Path::new("")))
        .join(format!("{stem}_{}.png", method.name()))
}

/// Message without the absolute path, so reports do not depend on where they ran.
fn describe(err: &sena_core::Error) -> String {
    match err {
        sena_core::Error::Image { source, .. } => source.to_string(),
        sena_core::Error::Io { source, .. } => source.to_string(),
        other => other.to_string(),
    }
}

fn rel_name(rel: &Path) -> String {
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

struct Job<'a> {
    manifest: &'a RunManifest,
    config: &'a PipelineConfig,
    evaluator: Evaluator<'a>,
}

impl Job<'_> {
    /// All methods for one image. Only write failures abort the run.
    fn run(&self, rel: &Path) -> Result<Vec<Row>> {
        let file = rel_name(rel);
        let input = read_rgb(self.manifest.input_dir.join(rel));
        let mut rows = Vec::with_capacity(self.manifest.methods.len());
        for &method in &self.manifest.methods {
            let outcome = match &input {
                Err(e) => Err(describe(e)),
                Ok(img) => self.enhance_and_measure(img, rel, method)?,
            };
            rows.push(Row {
                file: file.clone(),
                method,
                outcome,
            });
        }
        Ok(rows)
    }

    fn enhance_and_measure(
        &self,
        img: &sena_core::RgbImage,
        rel: &Path,
        method: Method,
    ) -> Result<std::result::Result<sena_core::iqa::QualityReport, String>> {
        let start = Instant::now();
        let enhanced = match method.apply(img, self.config) {
            Ok(out) => out,
            Err(e) => return Ok(Err(describe(&e))),
        };
        let millis = start.elapsed().as_secs_f64() * 1e3;

        let out_path = output_path(&self.manifest.output_dir, rel, method);
        write_rgb(&out_path, &enhanced)?;
        let written = match read_rgb(&out_path) {
            Ok(w) => w,
            Err(e) => return Ok(Err(describe(&e))),
        };
        Ok(match self.evaluator.evaluate(&written) {
            Ok(mut report) => {
                report.enhance_millis = (method != Method::None).then_some(millis);
                Ok(report)
            }
            Err(e) => Err(describe(&e)),
        })
    }
}

/// Processes every image with every method, then writes the CSV and JSON reports.
///
/// Unreadable images become error rows; failing to write an output or a
/// report aborts with an error.
pub fn run_batch(manifest: &RunManifest) -> Result<AggregateReport> {
    let images = manifest.validate()?;
    let config = match &manifest.config_path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    config.validate()?;
    let model = manifest.niqe_model.as_ref().map(NssModel::load).transpose()?;

    for rel in &images {
        let dir = manifest.output_dir.join(rel.parent().unwrap_or(Path::new("")));
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(dir, e))?;
    }

    let job = Job {
        manifest,
        config: &config,
        evaluator: Evaluator {
            niqe_model: model.as_ref(),
            brisque_scorer: None,
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(manifest.worker_count)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", manifest.worker_count)))?;
    let per_image: Vec<Result<Vec<Row>>> = pool.install(|| images.par_iter().map(|rel| job.run(rel)).collect());
    let rows = per_image.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();

    let report = AggregateReport::build(rows, &manifest.methods);
    write_reports(&report, manifest)?;
    Ok(report)
}

fn write_reports(report: &AggregateReport, manifest: &RunManifest) -> Result<()> {
    let create = |path: &Path| -> Result<BufWriter<File>> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
    };
    report.write_csv(create(&manifest.report_path)?, !manifest.omit_timing)?;
    let json_path = manifest.json_path();
    serde_json::to_writer_pretty(create(&json_path)?, report)?;
    Ok(())
}
