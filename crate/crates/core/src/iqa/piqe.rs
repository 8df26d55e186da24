//! Perception-based image quality evaluator.
//!
//! The luma plane is padded to a multiple of 16 by edge replication and
//! MSCN-normalized. Each 16×16 block whose coefficient variance exceeds 0.1 is
//! spatially active. An active block counts as distorted when any 6-pixel run
//! along one of its edges is nearly flat (noticeable artifact), or when its
//! spread is large compared with the imbalance between its two center columns
//! and the rest (noise). The score pools the distortion over active blocks.

use crate::error::{Error, Result};
use crate::imgcore::RgbImage;

use super::basic::Gray;
use super::mscn::Mscn;

pub const PIQE_BLOCK: usize = 16;
const ACTIVITY_THRESHOLD: f64 = 0.1;
const IMPAIRED_THRESHOLD: f64 = 0.1;
const SEGMENT: usize = 6;
const POOL_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiqeResult {
    /// 0 (best) to 100 (worst).
    pub score: f64,
    pub active_blocks: usize,
    pub artifact_blocks: usize,
    pub noise_blocks: usize,
    /// No block was spatially active; `score` is then 100.
    pub degenerate: bool,
}

fn sample_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn has_flat_edge_segment(block: &[f64]) -> bool {
    let n = PIQE_BLOCK;
    let edges: [Vec<f64>; 4] = [
        block[..n].to_vec(),
        (0..n).map(|y| block[y * n + n - 1]).collect(),
        block[(n - 1) * n..].to_vec(),
        (0..n).map(|y| block[y * n]).collect(),
    ];
    edges.iter().any(|edge| {
        edge.windows(SEGMENT)
            .any(|seg| sample_std(seg.iter().copied()) < IMPAIRED_THRESHOLD)
    })
}

fn center_surround_ratio(block: &[f64]) -> f64 {
    let n = PIQE_BLOCK;
    let (c0, c1) = (n / 2 - 1, n / 2);
    let center = block.iter().enumerate().filter(|(i, _)| {
        let x = i % n;
        x == c0 || x == c1
    });
    let surround = block.iter().enumerate().filter(|(i, _)| {
        let x = i % n;
        x != c0 && x != c1
    });
    sample_std(center.map(|(_, &v)| v)) / sample_std(surround.map(|(_, &v)| v))
}

pub fn piqe_detailed(img: &RgbImage) -> Result<PiqeResult> {
    let (w, h) = img.dimensions();
    if w.min(h) < PIQE_BLOCK {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min_width: PIQE_BLOCK,
            min_height: PIQE_BLOCK,
        });
    }
    let src = Gray::from_rgb(img);
    let (pw, ph) = (w.div_ceil(PIQE_BLOCK) * PIQE_BLOCK, h.div_ceil(PIQE_BLOCK) * PIQE_BLOCK);
    let padded = Gray {
        width: pw,
        height: ph,
        data: (0..ph)
            .flat_map(|y| (0..pw).map(move |x| (x.min(w - 1), y.min(h - 1))))
            .map(|(x, y)| src.at(x, y))
            .collect(),
    };
    let m = Mscn::compute(&padded);

    let mut result = PiqeResult {
        score: 0.0,
        active_blocks: 0,
        artifact_blocks: 0,
        noise_blocks: 0,
        degenerate: false,
    };
    let mut distortion = 0.0;
    let mut block = vec![0.0; PIQE_BLOCK * PIQE_BLOCK];
    for by in 0..ph / PIQE_BLOCK {
        for bx in 0..pw / PIQE_BLOCK {
            for y in 0..PIQE_BLOCK {
                let row = (by * PIQE_BLOCK + y) * pw + bx * PIQE_BLOCK;
                block[y * PIQE_BLOCK..(y + 1) * PIQE_BLOCK]
                    .copy_from_slice(&m.coefficients[row..row + PIQE_BLOCK]);
            }
            let std = sample_std(block.iter().copied());
            let variance = std * std;
            if variance <= ACTIVITY_THRESHOLD {
                continue;
            }
            result.active_blocks += 1;
            let artifact = has_flat_edge_segment(&block);
            let ratio = center_surround_ratio(&block);
            let beta = if ratio.is_finite() {
                (std - ratio).abs() / std.max(ratio)
            } else {
                1.0
            };
            let noisy = std > 2.0 * beta;
            result.artifact_blocks += artifact as usize;
            result.noise_blocks += noisy as usize;
            let artifact_score = if artifact { 1.0 } else { 0.0 };
            let noise_score = if noisy { variance.min(1.0) } else { 0.0 };
            distortion += f64::max(artifact_score, noise_score);
        }
    }
    if result.active_blocks == 0 {
        result.score = 100.0;
        result.degenerate = true;
    } else {
        result.score = 100.0 * (distortion + POOL_CONSTANT) / (result.active_blocks as f64 + POOL_CONSTANT);
    }
    Ok(result)
}

pub fn piqe(img: &RgbImage) -> Result<f64> {
    Ok(piqe_detailed(img)?.score)
}
