//! Shadow erosion and nighttime adaptability enhancement for driving imagery.
//!
//! The pipeline decompresses gamma, builds a shadow mask from HSV value and
//! luma, derives a mean-chroma plane and a Laplacian detail plane, and uses
//! them to lift luma and reshape chroma inside the mask. A CLAHE baseline and
//! no-reference quality metrics are included for comparison runs.

pub mod baseline;
pub mod config;
pub mod correction;
mod error;
pub mod imgcore;
pub mod invariant;
pub mod iqa;
pub mod shadow;

pub use baseline::{clahe, clahe_rgb, ClaheConfig};
pub use config::PipelineConfig;
pub use correction::{sena_enhance, sena_enhance_traced, SenaConfig, SenaTrace};
pub use error::{Error, Result};
pub use imgcore::{ImagePlane, RgbImage, YcbcrImage};
pub use shadow::ShadowMask;
