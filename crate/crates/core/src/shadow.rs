//! Shadow detection from the HSV value channel and BT.601 luma.
//!
//! A pixel is a shadow candidate in V when it is no brighter than the mean of
//! V, and in Y when its luma is at most the Y threshold (165 on the 8-bit
//! scale by default). The final mask is the intersection.

use crate::error::{ensure_same_dims, invalid, Result};
use crate::imgcore::{luminance, rgb_value_channel, ImagePlane, RgbImage};

/// Default luma threshold, 165 on the 8-bit scale.
pub const DEFAULT_Y_THRESHOLD: f32 = 165.0 / 255.0;

/// Boolean raster, `true` marks a shadow pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl ShadowMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(invalid(format!(
                "mask of {} bits does not fit {width}x{height}",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![true; width * height])
    }

    fn from_plane(plane: &ImagePlane, pred: impl Fn(f32) -> bool) -> Self {
        Self {
            width: plane.width(),
            height: plane.height(),
            bits: plane.data().iter().map(|&v| pred(v)).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn intersect(&self, other: &ShadowMask) -> Result<ShadowMask> {
        ensure_same_dims(self.dimensions(), other.dimensions())?;
        Ok(ShadowMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect(),
        })
    }

    /// True when every pixel set here is also set in `other`.
    pub fn is_subset_of(&self, other: &ShadowMask) -> bool {
        self.dimensions() == other.dimensions()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

/// `S_V`: pixels with `v <= mean(v)`.
pub fn shadow_mask_v(v: &ImagePlane) -> ShadowMask {
    let mean = v.mean();
    ShadowMask::from_plane(v, |p| p as f64 <= mean)
}

/// `S_Y`: pixels with `y <= threshold`.
pub fn shadow_mask_y(y: &ImagePlane, threshold: f32) -> ShadowMask {
    ShadowMask::from_plane(y, |p| p <= threshold)
}

/// `S = S_V ∧ S_Y` computed from an RGB image.
pub fn shadow_mask(img: &RgbImage, y_threshold: f32) -> ShadowMask {
    shadow_mask_from_planes(&rgb_value_channel(img), &luminance(img), y_threshold)
}

pub(crate) fn shadow_mask_from_planes(v: &ImagePlane, y: &ImagePlane, y_threshold: f32) -> ShadowMask {
    let mean = v.mean();
    let bits = v
        .data()
        .iter()
        .zip(y.data())
        .map(|(&pv, &py)| pv as f64 <= mean && py <= y_threshold)
        .collect();
    ShadowMask {
        width: v.width(),
        height: v.height(),
        bits,
    }
}
