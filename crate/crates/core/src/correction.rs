//! Shadow-aware luma and chroma correction and the end-to-end pipeline.
//!
//! The pipeline runs gamma decompression, per-channel normalization, shadow
//! detection and the two invariant channels, then corrects luma and both
//! chroma planes independently from the same preprocessed planes before
//! recombining them in RGB. By default the result is power-law encoded again
//! with the same gamma.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::imgcore::{
    gamma_decompress, normalize_channels, normalize_range, rgb_pixel, rgb_to_lab_a, rgb_to_ycbcr,
    rgb_value_channel, ycbcr_pixel, ycbcr_to_rgb, ImagePlane, LabTables, PowerCurve, RangeMap,
    RgbImage, YcbcrImage,
};
use crate::invariant::{
    contrast_stretch, laplacian_invariant, mean_chroma_pixel, InvariantChannels, LaplacianKernel,
};
use crate::shadow::{shadow_mask_from_planes, ShadowMask, DEFAULT_Y_THRESHOLD};

/// How the non-shadow mean scales the inverted luma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseScaling {
    /// `(max(Y) - Y) * mean`
    #[default]
    Multiply,
    /// `(max(Y) - Y) / mean`
    Divide,
}

/// Tunables of the enhancement pipeline. Every field has a default, so a
/// configuration file may set any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SenaConfig {
    /// Power-law exponent undone before processing.
    pub gamma: f32,
    /// Luma shadow threshold on the unit scale.
    pub y_shadow_threshold: f32,
    /// Lower contrast-stretch percentile applied to the Laplacian channel.
    pub stretch_lo: f64,
    /// Upper contrast-stretch percentile.
    pub stretch_hi: f64,
    /// Weight of `Ch_Max_Inv` in the red chroma correction.
    pub chroma_constant_c: f32,
    /// Floor for the divisors in the chroma correction.
    pub epsilon: f32,
    pub kernel_choice: LaplacianKernel,
    pub inverse_scaling: InverseScaling,
    /// Apply `v^(1/gamma)` to the result so it is display-referred like the input.
    pub reencode_output: bool,
}

impl Default for SenaConfig {
    fn default() -> Self {
        Self {
            gamma: 2.2,
            y_shadow_threshold: DEFAULT_Y_THRESHOLD,
            stretch_lo: 1.25,
            stretch_hi: 98.75,
            chroma_constant_c: 1.0,
            epsilon: 1e-6,
            kernel_choice: LaplacianKernel::SobelSum,
            inverse_scaling: InverseScaling::Multiply,
            reencode_output: true,
        }
    }
}

impl SenaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.y_shadow_threshold) {
            return Err(invalid(format!(
                "y_shadow_threshold must lie in [0, 1], got {}",
                self.y_shadow_threshold
            )));
        }
        if !(0.0 <= self.stretch_lo && self.stretch_lo < self.stretch_hi && self.stretch_hi <= 100.0)
        {
            return Err(invalid(format!(
                "stretch percentiles must satisfy 0 <= lo < hi <= 100, got ({}, {})",
                self.stretch_lo, self.stretch_hi
            )));
        }
        if !self.chroma_constant_c.is_finite() {
            return Err(invalid("chroma_constant_c must be finite"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Which chroma plane is being corrected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChromaKind {
    /// Cr
    Red,
    /// Cb
    Blue,
}

/// Luma correction stages.
#[derive(Debug, Clone, PartialEq)]
pub struct LuminanceCorrection {
    /// Mean luma of the non-shadow pixels (all pixels when the mask is full).
    pub non_shadow_mean: f32,
    pub y_norm_inv: ImagePlane,
    pub i_y_map: ImagePlane,
    /// Luma after adding the map at shadow pixels, before normalization.
    pub y_pre_norm: ImagePlane,
    pub y_out: ImagePlane,
}

/// Chroma correction stages for one plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ChromaCorrection {
    pub ch_inv: ImagePlane,
    pub ch_map: ImagePlane,
    pub ch_inv_map: ImagePlane,
    pub ch_max_inv: ImagePlane,
    /// Combined red or blue expression before the shadow ratio adjustment.
    pub candidate: ImagePlane,
    /// After the ratio adjustment at shadow pixels.
    pub adjusted: ImagePlane,
    /// Final plane, rescaled to the source plane's range.
    pub corrected: ImagePlane,
}

/// All intermediate planes of the three corrections.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionIntermediates {
    pub luminance: LuminanceCorrection,
    pub red: ChromaCorrection,
    pub blue: ChromaCorrection,
}

fn check_mask(plane: &ImagePlane, mask: &ShadowMask) -> Result<()> {
    if plane.dimensions() == mask.dimensions() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: plane.dimensions(),
            found: mask.dimensions(),
        })
    }
}

/// Mean of `y` over non-shadow pixels, or over all pixels when the mask is full.
fn non_shadow_mean(y: &ImagePlane, mask: &ShadowMask) -> f32 {
    let (sum, count) = y
        .data()
        .iter()
        .zip(mask.bits())
        .filter(|(_, &shadow)| !shadow)
        .fold((0.0f64, 0usize), |(s, n), (&v, _)| (s + v as f64, n + 1));
    (if count == 0 { y.mean() } else { sum / count as f64 }) as f32
}

/// Per-image constants of the luma correction.
#[derive(Debug, Clone, Copy)]
struct LumaParams {
    y_max: f32,
    mean: f32,
    divisor: f32,
    scaling: InverseScaling,
}

struct LumaPixel {
    norm_inv: f32,
    map: f32,
    pre_norm: f32,
}

impl LumaParams {
    fn new(y: &ImagePlane, mask: &ShadowMask, cfg: &SenaConfig) -> Self {
        let mean = non_shadow_mean(y, mask);
        Self {
            y_max: y.max(),
            mean,
            divisor: mean.max(cfg.epsilon),
            scaling: cfg.inverse_scaling,
        }
    }

    #[inline]
    fn pixel(&self, v: f32, l: f32, shadow: bool) -> LumaPixel {
        let norm_inv = match self.scaling {
            InverseScaling::Multiply => (self.y_max - v) * self.mean,
            InverseScaling::Divide => (self.y_max - v) / self.divisor,
        };
        let map = norm_inv * l;
        LumaPixel {
            norm_inv,
            map,
            pre_norm: if shadow { v + map } else { v },
        }
    }
}

/// Corrected luma with all intermediate planes.
pub fn luminance_correction(
    y: &ImagePlane,
    l: &ImagePlane,
    mask: &ShadowMask,
    cfg: &SenaConfig,
) -> Result<LuminanceCorrection> {
    y.ensure_same_dims(l)?;
    check_mask(y, mask)?;
    let params = LumaParams::new(y, mask, cfg);
    let (w, h) = y.dimensions();
    let n = w * h;
    let (mut y_norm_inv, mut i_y_map, mut y_pre_norm) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for ((&v, &lv), &shadow) in y.data().iter().zip(l.data()).zip(mask.bits()) {
        let p = params.pixel(v, lv, shadow);
        y_norm_inv.push(p.norm_inv);
        i_y_map.push(p.map);
        y_pre_norm.push(p.pre_norm);
    }
    let y_pre_norm = ImagePlane::from_parts(w, h, y_pre_norm);
    let y_out = normalize_range(&y_pre_norm, 0.0, 1.0);
    Ok(LuminanceCorrection {
        non_shadow_mean: params.mean,
        y_norm_inv: ImagePlane::from_parts(w, h, y_norm_inv),
        i_y_map: ImagePlane::from_parts(w, h, i_y_map),
        y_pre_norm,
        y_out,
    })
}

/// Corrected luma channel, normalized onto `[0, 1]`.
pub fn correct_luminance(
    y: &ImagePlane,
    l: &ImagePlane,
    mask: &ShadowMask,
    cfg: &SenaConfig,
) -> Result<ImagePlane> {
    Ok(luminance_correction(y, l, mask, cfg)?.y_out)
}

/// Divisor floored at `eps` in magnitude, keeping its sign.
#[inline]
fn guard(d: f32, eps: f32) -> f32 {
    if d.abs() < eps {
        eps
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy)]
struct ChromaParams {
    ch_max: f32,
    kind: ChromaKind,
    c: f32,
    eps: f32,
}

struct ChromaPixel {
    inv: f32,
    map: f32,
    inv_map: f32,
    max_inv: f32,
    candidate: f32,
    adjusted: f32,
}

impl ChromaParams {
    #[inline]
    fn pixel(&self, v: f32, m: f32, shadow: bool) -> ChromaPixel {
        let inv = self.ch_max - v;
        let map = m * inv;
        let inv_map = map / v.max(self.eps);
        let max_inv = v - inv_map;
        let candidate = match self.kind {
            ChromaKind::Red => (map + max_inv * self.c + m) / 3.0,
            ChromaKind::Blue => (m + inv_map) * 0.5,
        };
        let adjusted = if shadow {
            candidate * (v / guard(candidate, self.eps))
        } else {
            candidate
        };
        ChromaPixel {
            inv,
            map,
            inv_map,
            max_inv,
            candidate,
            adjusted,
        }
    }
}

/// Corrected chroma plane with all intermediate planes.
pub fn chroma_correction(
    ch: &ImagePlane,
    m_c: &ImagePlane,
    mask: &ShadowMask,
    kind: ChromaKind,
    cfg: &SenaConfig,
) -> Result<ChromaCorrection> {
    ch.ensure_same_dims(m_c)?;
    check_mask(ch, mask)?;
    let (ch_min, ch_max) = ch.min_max();
    let params = ChromaParams {
        ch_max,
        kind,
        c: cfg.chroma_constant_c,
        eps: cfg.epsilon,
    };
    let (w, h) = ch.dimensions();
    let mut planes: [Vec<f32>; 6] = std::array::from_fn(|_| Vec::with_capacity(w * h));
    for ((&v, &m), &shadow) in ch.data().iter().zip(m_c.data()).zip(mask.bits()) {
        let p = params.pixel(v, m, shadow);
        for (plane, value) in planes
            .iter_mut()
            .zip([p.inv, p.map, p.inv_map, p.max_inv, p.candidate, p.adjusted])
        {
            plane.push(value);
        }
    }
    let [ch_inv, ch_map, ch_inv_map, ch_max_inv, candidate, adjusted] =
        planes.map(|d| ImagePlane::from_parts(w, h, d));
    let corrected = normalize_range(&adjusted, ch_min, ch_max);
    Ok(ChromaCorrection {
        ch_inv,
        ch_map,
        ch_inv_map,
        ch_max_inv,
        candidate,
        adjusted,
        corrected,
    })
}

/// Corrected chroma plane, rescaled to the source plane's `[min, max]`.
pub fn correct_chroma(
    ch: &ImagePlane,
    m_c: &ImagePlane,
    mask: &ShadowMask,
    kind: ChromaKind,
    cfg: &SenaConfig,
) -> Result<ImagePlane> {
    Ok(chroma_correction(ch, m_c, mask, kind, cfg)?.corrected)
}

/// Runs the three corrections on already separated planes.
pub fn correct_planes(
    ycc: &YcbcrImage,
    m_c: &ImagePlane,
    l: &ImagePlane,
    mask: &ShadowMask,
    cfg: &SenaConfig,
) -> Result<(YcbcrImage, CorrectionIntermediates)> {
    let luminance = luminance_correction(&ycc.y, l, mask, cfg)?;
    let red = chroma_correction(&ycc.cr, m_c, mask, ChromaKind::Red, cfg)?;
    let blue = chroma_correction(&ycc.cb, m_c, mask, ChromaKind::Blue, cfg)?;
    let out = YcbcrImage {
        y: luminance.y_out.clone(),
        cb: blue.corrected.clone(),
        cr: red.corrected.clone(),
    };
    Ok((out, CorrectionIntermediates { luminance, red, blue }))
}

/// Every plane computed by one pipeline run.
#[derive(Debug, Clone)]
pub struct SenaTrace {
    /// Gamma-decompressed, per-channel normalized input.
    pub preprocessed: RgbImage,
    pub ycbcr: YcbcrImage,
    pub value: ImagePlane,
    pub lab_a: ImagePlane,
    pub mask: ShadowMask,
    pub invariants: InvariantChannels,
    pub laplacian_stretched: ImagePlane,
    pub intermediates: CorrectionIntermediates,
    /// Corrected planes back in RGB, still linear.
    pub linear_output: RgbImage,
    pub output: RgbImage,
}

fn check_input(img: &RgbImage, cfg: &SenaConfig) -> Result<()> {
    cfg.validate()?;
    let (w, h) = img.dimensions();
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min_width: 3,
            min_height: 3,
        });
    }
    Ok(())
}

fn output_curve(cfg: &SenaConfig) -> PowerCurve {
    PowerCurve::new(if cfg.reencode_output { 1.0 / cfg.gamma } else { 1.0 })
}

/// The full enhancement pipeline, keeping intermediate planes.
pub fn sena_enhance_traced(img: &RgbImage, cfg: &SenaConfig) -> Result<SenaTrace> {
    check_input(img, cfg)?;
    let preprocessed = normalize_channels(&gamma_decompress(img, cfg.gamma)?);
    let ycbcr = rgb_to_ycbcr(&preprocessed);
    let value = rgb_value_channel(&preprocessed);
    let lab_a = rgb_to_lab_a(&preprocessed);
    let mask = shadow_mask_from_planes(&value, &ycbcr.y, cfg.y_shadow_threshold);

    let invariants =
        InvariantChannels::compute(&lab_a, &ycbcr.cb, &ycbcr.cr, &ycbcr.y, cfg.kernel_choice)?;
    let laplacian_stretched =
        contrast_stretch(&invariants.laplacian, cfg.stretch_lo, cfg.stretch_hi)?;

    let (corrected, intermediates) =
        correct_planes(&ycbcr, &invariants.m_c, &laplacian_stretched, &mask, cfg)?;
    let linear_output = ycbcr_to_rgb(&corrected);
    let curve = output_curve(cfg);
    let output = linear_output.map_planes(|p| p.map(|v| curve.eval(v)));

    Ok(SenaTrace {
        preprocessed,
        ycbcr,
        value,
        lab_a,
        mask,
        invariants,
        laplacian_stretched,
        intermediates,
        linear_output,
        output,
    })
}

/// The full enhancement pipeline.
///
/// Computes the same values as [`sena_enhance_traced`] in a handful of fused
/// passes without keeping the intermediate planes.
pub fn sena_enhance(img: &RgbImage, cfg: &SenaConfig) -> Result<RgbImage> {
    check_input(img, cfg)?;
    let (w, h) = img.dimensions();
    let n = w * h;

    // The decoding curve is monotone, so the decoded extremes are the
    // decoded input extremes and normalization can run in the same pass.
    let decode = PowerCurve::new(cfg.gamma);
    let norm = img.planes().map(|p| {
        let (lo, hi) = p.min_max();
        RangeMap::new((decode.eval(lo), decode.eval(hi)), 0.0, 1.0)
    });
    let [ir, ig, ib] = img.planes().map(|p| p.data());

    let lab = LabTables::get();
    let mut planes: [Vec<f32>; 5] = std::array::from_fn(|_| Vec::with_capacity(n));
    for i in 0..n {
        let r = norm[0].apply(decode.eval(ir[i]));
        let g = norm[1].apply(decode.eval(ig[i]));
        let b = norm[2].apply(decode.eval(ib[i]));
        let [y, cb, cr] = ycbcr_pixel(r, g, b);
        let a = lab.lab_a(r, g, b);
        for (plane, v) in planes
            .iter_mut()
            .zip([y, cb, cr, r.max(g).max(b), mean_chroma_pixel(a, cb, cr)])
        {
            plane.push(v);
        }
    }
    let [y, cb, cr, value, m_c] = planes.map(|d| ImagePlane::from_parts(w, h, d));
    let mask = shadow_mask_from_planes(&value, &y, cfg.y_shadow_threshold);
    let l = contrast_stretch(
        &laplacian_invariant(&y, cfg.kernel_choice)?,
        cfg.stretch_lo,
        cfg.stretch_hi,
    )?;

    let luma = LumaParams::new(&y, &mask, cfg);
    let (cr_range, cb_range) = (cr.min_max(), cb.min_max());
    let chroma = |ch_max, kind| ChromaParams {
        ch_max,
        kind,
        c: cfg.chroma_constant_c,
        eps: cfg.epsilon,
    };
    let (red, blue) = (chroma(cr_range.1, ChromaKind::Red), chroma(cb_range.1, ChromaKind::Blue));
    let mut planes: [Vec<f32>; 3] = std::array::from_fn(|_| Vec::with_capacity(n));
    let (yd, cbd, crd, md, ld, bits) = (y.data(), cb.data(), cr.data(), m_c.data(), l.data(), mask.bits());
    for i in 0..n {
        let shadow = bits[i];
        planes[0].push(luma.pixel(yd[i], ld[i], shadow).pre_norm);
        planes[1].push(blue.pixel(cbd[i], md[i], shadow).adjusted);
        planes[2].push(red.pixel(crd[i], md[i], shadow).adjusted);
    }
    let [y_pre, cb_adj, cr_adj] = planes.map(|d| ImagePlane::from_parts(w, h, d));
    let y_map = RangeMap::new(y_pre.min_max(), 0.0, 1.0);
    let cb_map = RangeMap::new(cb_adj.min_max(), cb_range.0, cb_range.1);
    let cr_map = RangeMap::new(cr_adj.min_max(), cr_range.0, cr_range.1);

    let curve = output_curve(cfg);
    let mut out: [Vec<f32>; 3] = std::array::from_fn(|_| Vec::with_capacity(n));
    let (yp, cbp, crp) = (y_pre.data(), cb_adj.data(), cr_adj.data());
    for i in 0..n {
        let rgb = rgb_pixel(y_map.apply(yp[i]), cb_map.apply(cbp[i]), cr_map.apply(crp[i]));
        for (plane, v) in out.iter_mut().zip(rgb) {
            plane.push(curve.eval(v));
        }
    }
    let [r, g, b] = out.map(|d| ImagePlane::from_parts(w, h, d));
    RgbImage::new(r, g, b)
}
