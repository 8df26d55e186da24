//! No-reference quality metrics and the paired significance test.
//!
//! All metrics work on BT.601 luma on the 0–255 scale.

mod basic;
pub mod brisque;
mod mscn;
pub mod niqe;
mod nss;
pub mod piqe;
pub mod wilcoxon;

use image::{imageops, ImageBuffer, Luma};
use serde::Serialize;

use crate::error::Result;
use crate::imgcore::RgbImage;

pub use basic::{entropy, mean_brightness, std_dev, Gray};
pub use brisque::{brisque_features, brisque_score, BrisqueScorer, BRISQUE_FEATURES};
pub use mscn::Mscn;
pub use niqe::{fit_niqe_model, mvg_distance, niqe, niqe_image_fit, NssModel};
pub use nss::{aggd_fit, ggd_fit};
pub use piqe::{piqe, piqe_detailed, PiqeResult};
pub use wilcoxon::{wilcoxon_signed_rank, wilcoxon_signed_rank_with, WilcoxonMethod, WilcoxonResult};

/// Neighbor offsets `(dy, dx)` of the pairwise products: horizontal,
/// vertical, main diagonal and secondary diagonal.
pub(crate) const PAIR_OFFSETS: [(isize, isize); 4] = [(0, 1), (1, 0), (1, 1), (-1, 1)];

/// Bicubic downscale by two with antialiasing.
pub(crate) fn half_scale(gray: &Gray) -> Gray {
    let (w, h) = (gray.width.div_ceil(2), gray.height.div_ceil(2));
    let buf: ImageBuffer<Luma<f32>, Vec<f32>> = ImageBuffer::from_raw(
        gray.width as u32,
        gray.height as u32,
        gray.data.iter().map(|v| (v / 255.0) as f32).collect(),
    )
    .expect("buffer matches dimensions");
    let small = imageops::resize(&buf, w as u32, h as u32, imageops::FilterType::CatmullRom);
    Gray {
        width: w,
        height: h,
        data: small.into_raw().into_iter().map(|v| v as f64 * 255.0).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    pub brisque: Option<f64>,
    pub niqe: Option<f64>,
    pub piqe: f64,
    pub piqe_degenerate: bool,
    pub mean_brightness: f64,
    pub std_dev: f64,
    pub entropy: f64,
    pub enhance_millis: Option<f64>,
}

/// Optional models for the two trained metrics.
#[derive(Clone, Copy, Default)]
pub struct Evaluator<'a> {
    pub niqe_model: Option<&'a NssModel>,
    pub brisque_scorer: Option<&'a dyn BrisqueScorer>,
}

impl Evaluator<'_> {
    /// Metrics whose model is absent are reported as `None`.
    pub fn evaluate(&self, img: &RgbImage) -> Result<QualityReport> {
        let gray = Gray::from_rgb(img);
        let p = piqe_detailed(img)?;
        Ok(QualityReport {
            brisque: self.brisque_scorer.map(|s| brisque_score(img, s)).transpose()?,
            niqe: self.niqe_model.map(|m| niqe(img, m)).transpose()?,
            piqe: p.score,
            piqe_degenerate: p.degenerate,
            mean_brightness: basic::gray_mean(&gray.data),
            std_dev: basic::gray_std(&gray.data),
            entropy: basic::gray_entropy(&gray.data),
            enhance_millis: None,
        })
    }
}
