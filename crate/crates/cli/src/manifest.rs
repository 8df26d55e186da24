//! Batch run description, read from a TOML file.
//!
//! ```toml
//! input_dir = "fixtures/batch"
//! output_dir = "out/batch"
//! methods = ["sena", "clahe", "none"]
//! report_path = "out/report.csv"
//! worker_count = 4
//! # optional
//! config_path = "pipeline.toml"
//! niqe_model = "fixtures/models/niqe_pristine.nss"
//! omit_timing = false
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sena_core::imgcore::io::is_supported_image;
use walkdir::WalkDir;

use crate::error::{CliError, Result};
use crate::method::Method;

pub const WORKERS_ENV: &str = "SENA_WORKERS";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub config_path: Option<PathBuf>,
    /// CSV destination; the JSON document is written next to it with a `.json` extension.
    pub report_path: PathBuf,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
    #[serde(default)]
    pub niqe_model: Option<PathBuf>,
    /// Leave the timing column of the CSV empty, for byte-stable reports.
    #[serde(default)]
    pub omit_timing: bool,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl RunManifest {
    pub fn new(input_dir: PathBuf, output_dir: PathBuf, methods: Vec<Method>, report_path: PathBuf) -> Self {
        Self {
            input_dir,
            output_dir,
            methods,
            config_path: None,
            report_path,
            worker_count: default_workers(),
            niqe_model: None,
            omit_timing: false,
        }
    }

    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let mut m: RunManifest =
            toml::from_str(text).map_err(|e| CliError::Usage(format!("manifest: {e}")))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut m.input_dir);
        resolve(&mut m.output_dir);
        resolve(&mut m.report_path);
        for p in [m.config_path.as_mut(), m.niqe_model.as_mut()].into_iter().flatten() {
            resolve(p);
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Checks the invariants and returns the input images, relative to `input_dir`.
    pub fn validate(&self) -> Result<Vec<PathBuf>> {
        if self.methods.is_empty() {
            return Err(CliError::Usage("manifest lists no methods".into()));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return Err(CliError::Usage("manifest lists a method twice".into()));
        }
        if self.worker_count == 0 {
            return Err(CliError::Usage("worker_count must be at least 1".into()));
        }
        if !self.input_dir.is_dir() {
            return Err(CliError::Usage(format!(
                "input directory {} does not exist",
                self.input_dir.display()
            )));
        }
        let images = collect_images(&self.input_dir)?;
        if images.is_empty() {
            return Err(CliError::Usage(format!(
                "no images found under {}",
                self.input_dir.display()
            )));
        }
        Ok(images)
    }

    /// JSON report path derived from `report_path`.
    pub fn json_path(&self) -> PathBuf {
        self.report_path.with_extension("json")
    }
}

/// Supported images below `dir`, as sorted relative paths.
pub fn collect_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in WalkDir::new(dir).follow_links(true) {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            CliError::io(path, e.into())
        })?;
        if entry.file_type().is_file() && is_supported_image(entry.path()) {
            out.push(entry.path().strip_prefix(dir).expect("walk stays below root").to_path_buf());
        }
    }
    out.sort();
    Ok(out)
}

/// Worker count from the environment, if set.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_resolve_against_manifest_dir() {
        let m = RunManifest::from_toml_str(
            r#"
            input_dir = "in"
            output_dir = "/abs/out"
            methods = ["sena", "none"]
            report_path = "r/report.csv"
            config_path = "cfg.toml"
            worker_count = 3
            "#,
            Path::new("/base"),
        )
        .unwrap();
        assert_eq!(m.input_dir, PathBuf::from("/base/in"));
        assert_eq!(m.output_dir, PathBuf::from("/abs/out"));
        assert_eq!(m.config_path, Some(PathBuf::from("/base/cfg.toml")));
        assert_eq!(m.methods, vec![Method::Sena, Method::None]);
        assert_eq!(m.worker_count, 3);
        assert_eq!(m.json_path(), PathBuf::from("/base/r/report.json"));
    }

    #[test]
    fn rejects_unknown_keys_and_methods() {
        let base = Path::new(".");
        let ok = "input_dir='a'\noutput_dir='b'\nreport_path='c.csv'\n";
        assert!(RunManifest::from_toml_str(&format!("{ok}methods=['retinex']"), base).is_err());
        assert!(RunManifest::from_toml_str(&format!("{ok}methods=['sena']\nseed=1"), base).is_err());
    }

    #[test]
    fn validation() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new(dir.path().into(), dir.path().join("o"), vec![], dir.path().join("r.csv"));
        assert!(matches!(m.validate(), Err(CliError::Usage(_))));
        m.methods = vec![Method::Sena];
        assert!(matches!(m.validate(), Err(CliError::Usage(_))), "empty input dir");
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        std::fs::write(dir.path().join("sub/x.png"), b"").unwrap();
        std::fs::write(dir.path().join("notes.txt"), b"").unwrap();
        assert_eq!(m.validate().unwrap(), vec![PathBuf::from("sub/x.png")]);
        m.worker_count = 0;
        assert!(m.validate().is_err());
    }
}
