//! BRISQUE natural-scene-statistics features.

use crate::error::{Error, Result};
use crate::imgcore::RgbImage;

use super::basic::Gray;
use super::mscn::Mscn;
use super::nss::{aggd_features, ggd_fit};
use super::{half_scale, PAIR_OFFSETS};

pub const BRISQUE_MIN_DIM: usize = 32;
pub const BRISQUE_FEATURES: usize = 36;

/// Maps a BRISQUE feature vector to a quality score, lower meaning better.
pub trait BrisqueScorer: Send + Sync {
    fn score(&self, features: &[f64; BRISQUE_FEATURES]) -> f64;
}

/// Product of a field with its circularly shifted copy.
pub(crate) fn shifted_product(field: &[f64], w: usize, h: usize, dy: isize, dx: isize) -> Vec<f64> {
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let sy = (y as isize - dy).rem_euclid(h as isize) as usize;
        for x in 0..w {
            let sx = (x as isize - dx).rem_euclid(w as isize) as usize;
            out.push(field[y * w + x] * field[sy * w + sx]);
        }
    }
    out
}

fn scale_features(m: &Mscn, out: &mut [f64]) {
    let (shape, var) = ggd_fit(&m.coefficients);
    out[0] = shape;
    out[1] = var;
    for (k, &(dy, dx)) in PAIR_OFFSETS.iter().enumerate() {
        let p = shifted_product(&m.coefficients, m.width, m.height, dy, dx);
        out[2 + 4 * k..6 + 4 * k].copy_from_slice(&aggd_features(&p));
    }
}

/// 18 features at full resolution followed by 18 at half resolution.
pub fn brisque_features(img: &RgbImage) -> Result<[f64; BRISQUE_FEATURES]> {
    let (w, h) = img.dimensions();
    if w.min(h) < BRISQUE_MIN_DIM {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min_width: BRISQUE_MIN_DIM,
            min_height: BRISQUE_MIN_DIM,
        });
    }
    let gray = Gray::from_rgb(img);
    let mut features = [0.0; BRISQUE_FEATURES];
    scale_features(&Mscn::compute(&gray), &mut features[..18]);
    scale_features(&Mscn::compute(&half_scale(&gray)), &mut features[18..]);
    Ok(features)
}

pub fn brisque_score(img: &RgbImage, scorer: &dyn BrisqueScorer) -> Result<f64> {
    Ok(scorer.score(&brisque_features(img)?))
}
