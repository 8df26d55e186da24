//! TOML configuration covering the enhancement pipeline and the CLAHE baseline.
//!
//! ```toml
//! [sena]
//! gamma = 2.2
//! kernel_choice = "sobel_sum"
//!
//! [clahe]
//! clip_limit = 2.0
//! tiles_x = 8
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::ClaheConfig;
use crate::correction::SenaConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sena: SenaConfig,
    pub clahe: ClaheConfig,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("pipeline config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.sena
            .validate()
            .and_then(|_| self.clahe.validate())
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::LaplacianKernel;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(PipelineConfig::from_toml_str("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn partial_sections() {
        let cfg = PipelineConfig::from_toml_str(
            "[sena]\nkernel_choice = \"four_neighbor\"\n[clahe]\nclip_limit = 3.5\ntiles_x = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.sena.kernel_choice, LaplacianKernel::FourNeighbor);
        assert_eq!(cfg.clahe.clip_limit, 3.5);
        assert_eq!(cfg.clahe.tiles_y, 8);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(PipelineConfig::from_toml_str("[sena]\ngama = 2.0\n").is_err());
        assert!(PipelineConfig::from_toml_str("[clahe]\nbins = 1\n").is_err());
        assert!(PipelineConfig::from_toml_str("[sena]\ngamma = -1.0\n").is_err());
    }

    #[test]
    fn unclipped_clahe() {
        let cfg = PipelineConfig::from_toml_str("[clahe]\nclip_limit = inf\n").unwrap();
        assert_eq!(cfg.clahe.clip_limit, f64::INFINITY);
        assert_eq!(PipelineConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn round_trip() {
        let cfg = PipelineConfig::default();
        assert_eq!(PipelineConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }
}
