use std::fmt;

use serde::{Deserialize, Serialize};
use sena_core::{clahe_rgb, sena_enhance, PipelineConfig, RgbImage};

/// Enhancement applied to each image of a run.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sena,
    Clahe,
    /// Pass-through.
    None,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sena => "sena",
            Method::Clahe => "clahe",
            Method::None => "none",
        }
    }

    pub fn apply(self, img: &RgbImage, cfg: &PipelineConfig) -> sena_core::Result<RgbImage> {
        match self {
            Method::Sena => sena_enhance(img, &cfg.sena),
            Method::Clahe => clahe_rgb(img, &cfg.clahe),
            Method::None => Ok(img.clone()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
