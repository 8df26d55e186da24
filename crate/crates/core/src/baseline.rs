//! Contrast-limited adaptive histogram equalization, the comparison baseline.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::imgcore::{rgb_to_ycbcr, ycbcr_to_rgb, ImagePlane, RgbImage, YcbcrImage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClaheConfig {
    /// Clip height as a multiple of the uniform bin height `area / bins`.
    /// `f64::INFINITY` disables clipping.
    pub clip_limit: f64,
    pub tiles_x: usize,
    pub tiles_y: usize,
    pub bins: usize,
}

impl Default for ClaheConfig {
    fn default() -> Self {
        Self {
            clip_limit: 2.0,
            tiles_x: 8,
            tiles_y: 8,
            bins: 256,
        }
    }
}

impl ClaheConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clip_limit.is_nan() || self.clip_limit <= 0.0 {
            return Err(invalid(format!(
                "clip_limit must be positive, got {}",
                self.clip_limit
            )));
        }
        if self.tiles_x == 0 || self.tiles_y == 0 {
            return Err(invalid("tile counts must be at least 1"));
        }
        if self.bins < 2 {
            return Err(invalid(format!("bins must be at least 2, got {}", self.bins)));
        }
        Ok(())
    }
}

/// Histogram bin of a unit-interval value.
#[inline]
pub(crate) fn bin_of(v: f32, bins: usize) -> usize {
    (v.clamp(0.0, 1.0) * (bins - 1) as f32).round() as usize
}

/// Interpolation neighbors along one axis: `(first tile, second tile, weight of second)`.
fn axis_weights(len: usize, tiles: usize) -> Vec<(usize, usize, f64)> {
    (0..len)
        .map(|p| {
            let t = (p as f64 + 0.5) * tiles as f64 / len as f64 - 0.5;
            if t <= 0.0 {
                (0, 0, 0.0)
            } else if t >= (tiles - 1) as f64 {
                (tiles - 1, tiles - 1, 0.0)
            } else {
                let i = t.floor() as usize;
                (i, i + 1, t - i as f64)
            }
        })
        .collect()
}

/// Clipped, redistributed, cumulative mapping of one tile's histogram onto `[0, 1]`.
fn tile_mapping(hist: &[f64], area: f64, clip_limit: f64) -> Vec<f64> {
    let bins = hist.len();
    let mut h = hist.to_vec();
    if clip_limit.is_finite() {
        let limit = clip_limit * area / bins as f64;
        let mut excess = 0.0;
        for v in h.iter_mut() {
            if *v > limit {
                excess += *v - limit;
                *v = limit;
            }
        }
        let share = excess / bins as f64;
        for v in h.iter_mut() {
            *v += share;
        }
    }
    let mut cum = 0.0;
    h.iter()
        .map(|&v| {
            cum += v;
            (cum / area).min(1.0)
        })
        .collect()
}

/// CLAHE on a single unit-interval plane.
pub fn clahe(plane: &ImagePlane, cfg: &ClaheConfig) -> Result<ImagePlane> {
    cfg.validate()?;
    let (w, h) = plane.dimensions();
    let (tx, ty, bins) = (cfg.tiles_x, cfg.tiles_y, cfg.bins);
    if w < tx || h < ty {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min_width: tx,
            min_height: ty,
        });
    }

    let tile_col: Vec<usize> = (0..w).map(|x| x * tx / w).collect();
    let tile_row: Vec<usize> = (0..h).map(|y| y * ty / h).collect();
    let data = plane.data();
    let binned: Vec<usize> = data.iter().map(|&v| bin_of(v, bins)).collect();

    let mut hists = vec![0.0f64; tx * ty * bins];
    let mut areas = vec![0.0f64; tx * ty];
    for y in 0..h {
        let row_base = tile_row[y] * tx;
        for x in 0..w {
            let t = row_base + tile_col[x];
            hists[t * bins + binned[y * w + x]] += 1.0;
            areas[t] += 1.0;
        }
    }
    let luts: Vec<Vec<f64>> = (0..tx * ty)
        .map(|t| tile_mapping(&hists[t * bins..(t + 1) * bins], areas[t], cfg.clip_limit))
        .collect();

    let xw = axis_weights(w, tx);
    let yw = axis_weights(h, ty);
    let mut out = Vec::with_capacity(w * h);
    for (y, &(ty0, ty1, ay)) in yw.iter().enumerate() {
        for (x, &(tx0, tx1, ax)) in xw.iter().enumerate() {
            let b = binned[y * w + x];
            let lookup = |ti: usize, tj: usize| luts[ti * tx + tj][b];
            let row = |ti: usize| {
                if tx0 == tx1 {
                    lookup(ti, tx0)
                } else {
                    (1.0 - ax) * lookup(ti, tx0) + ax * lookup(ti, tx1)
                }
            };
            let v = if ty0 == ty1 {
                row(ty0)
            } else {
                (1.0 - ay) * row(ty0) + ay * row(ty1)
            };
            out.push((v as f32).clamp(0.0, 1.0));
        }
    }
    Ok(ImagePlane::from_parts(w, h, out))
}

/// CLAHE on the luma of an RGB image; chroma passes through untouched.
pub fn clahe_rgb(img: &RgbImage, cfg: &ClaheConfig) -> Result<RgbImage> {
    let ycc = rgb_to_ycbcr(img);
    let y = clahe(&ycc.y, cfg)?;
    Ok(ycbcr_to_rgb(&YcbcrImage {
        y,
        cb: ycc.cb,
        cr: ycc.cr,
    }))
}
