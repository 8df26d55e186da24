//! Image containers, gamma transfer and range normalization.
//!
//! Pixels are stored as `f32` on the unit interval. Conversion to and from
//! 8-bit happens only at file I/O (see [`io`]).

mod color;
pub mod io;

pub use color::{
    luminance, rgb_to_lab_a, rgb_to_ycbcr, rgb_value_channel, ycbcr_to_rgb, LAB_A_MAX, LAB_A_MIN,
};
pub(crate) use color::{rgb_pixel, ycbcr_pixel, LabTables};

use crate::error::{ensure_same_dims, invalid, Result};

/// A single-channel raster, row-major.
///
/// Every stored value is finite. Values are on the unit interval for all
/// planes produced by normalization; raw filter responses may be signed.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl ImagePlane {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid(format!("plane dimensions must be positive, got {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(invalid(format!(
                "plane data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at index {i}")));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a plane from a function of `(x, y)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Internal constructor for stage outputs whose finiteness is guaranteed
    /// by construction.
    pub(crate) fn from_parts(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(
            data.iter().all(|v| v.is_finite()),
            "non-finite value escaped a pipeline stage"
        );
        Self { width, height, data }
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn max(&self) -> f32 {
        self.min_max().1
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    pub(crate) fn map(&self, f: impl Fn(f32) -> f32) -> Self {
        Self::from_parts(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub(crate) fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        ensure_same_dims(self.dimensions(), other.dimensions())
    }
}

/// Three equally sized planes in RGB order.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub r: ImagePlane,
    pub g: ImagePlane,
    pub b: ImagePlane,
}

impl RgbImage {
    pub fn new(r: ImagePlane, g: ImagePlane, b: ImagePlane) -> Result<Self> {
        r.ensure_same_dims(&g)?;
        r.ensure_same_dims(&b)?;
        Ok(Self { r, g, b })
    }

    /// Builds an image from interleaved 8-bit RGB samples (`v / 255`).
    pub fn from_rgb8(width: usize, height: usize, samples: &[u8]) -> Result<Self> {
        if samples.len() != width * height * 3 {
            return Err(invalid(format!(
                "expected {} RGB samples for {width}x{height}, got {}",
                width * height * 3,
                samples.len()
            )));
        }
        let n = width * height;
        let (mut r, mut g, mut b) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for px in samples.chunks_exact(3) {
            r.push(px[0] as f32 / 255.0);
            g.push(px[1] as f32 / 255.0);
            b.push(px[2] as f32 / 255.0);
        }
        Self::new(
            ImagePlane::new(width, height, r)?,
            ImagePlane::new(width, height, g)?,
            ImagePlane::new(width, height, b)?,
        )
    }

    /// Builds an image from a per-pixel function returning `[r, g, b]`.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f32; 3],
    ) -> Result<Self> {
        let n = width * height;
        let (mut r, mut g, mut b) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for y in 0..height {
            for x in 0..width {
                let [pr, pg, pb] = f(x, y);
                r.push(pr);
                g.push(pg);
                b.push(pb);
            }
        }
        Self::new(
            ImagePlane::new(width, height, r)?,
            ImagePlane::new(width, height, g)?,
            ImagePlane::new(width, height, b)?,
        )
    }

    /// Interleaved 8-bit samples, `round(v * 255)` clamped to `[0, 255]`.
    pub fn to_rgb8(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.r.len() * 3);
        for ((&r, &g), &b) in self.r.data.iter().zip(&self.g.data).zip(&self.b.data) {
            out.extend_from_slice(&[quantize(r), quantize(g), quantize(b)]);
        }
        out
    }

    pub fn width(&self) -> usize {
        self.r.width
    }

    pub fn height(&self) -> usize {
        self.r.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.r.dimensions()
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        [self.r.get(x, y), self.g.get(x, y), self.b.get(x, y)]
    }

    pub fn planes(&self) -> [&ImagePlane; 3] {
        [&self.r, &self.g, &self.b]
    }

    pub(crate) fn map_planes(&self, f: impl Fn(&ImagePlane) -> ImagePlane) -> Self {
        Self {
            r: f(&self.r),
            g: f(&self.g),
            b: f(&self.b),
        }
    }
}

/// Luma and the two chroma planes. Neutral chroma sits at 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct YcbcrImage {
    pub y: ImagePlane,
    pub cb: ImagePlane,
    pub cr: ImagePlane,
}

impl YcbcrImage {
    pub fn new(y: ImagePlane, cb: ImagePlane, cr: ImagePlane) -> Result<Self> {
        y.ensure_same_dims(&cb)?;
        y.ensure_same_dims(&cr)?;
        Ok(Self { y, cb, cr })
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.y.dimensions()
    }
}

/// 8-bit quantization used at every output boundary.
pub fn quantize(v: f32) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

fn check_gamma(gamma: f32) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("gamma must be positive and finite, got {gamma}")))
    }
}

/// Undo power-law encoding: `v -> v^gamma`.
pub fn gamma_decompress(img: &RgbImage, gamma: f32) -> Result<RgbImage> {
    check_gamma(gamma)?;
    let curve = PowerCurve::new(gamma);
    Ok(img.map_planes(|p| p.map(|v| curve.eval(v))))
}

/// Re-apply power-law encoding: `v -> v^(1/gamma)`.
pub fn gamma_compress(img: &RgbImage, gamma: f32) -> Result<RgbImage> {
    check_gamma(gamma)?;
    let curve = PowerCurve::new(1.0 / gamma);
    Ok(img.map_planes(|p| p.map(|v| curve.eval(v))))
}

const POWER_TABLE_SIZE: usize = 4096;

/// `v -> v^exponent`, tabulated with linear interpolation.
///
/// Interpolation error on a segment is about `h^2 |f''| / 8`: near 2e-8 for
/// exponent 2.2, and below 1e-3 for exponent 1/2.2 once past the first
/// segment. The first segment of a concave curve is evaluated directly.
/// Evaluation is monotone, so the curve maps a plane's extremes to the
/// extremes of the result.
pub(crate) enum PowerCurve {
    Identity,
    Table {
        exponent: f32,
        values: Box<[f32; POWER_TABLE_SIZE + 1]>,
    },
}

impl PowerCurve {
    pub(crate) fn new(exponent: f32) -> Self {
        if exponent == 1.0 {
            return Self::Identity;
        }
        let mut values = Box::new([0.0f32; POWER_TABLE_SIZE + 1]);
        for (i, v) in values.iter_mut().enumerate() {
            *v = (i as f64 / POWER_TABLE_SIZE as f64).powf(exponent as f64) as f32;
        }
        Self::Table { exponent, values }
    }

    #[inline]
    pub(crate) fn eval(&self, v: f32) -> f32 {
        match self {
            Self::Identity => v,
            Self::Table { exponent, values } => {
                let pos = v * POWER_TABLE_SIZE as f32;
                if !(0.0..=POWER_TABLE_SIZE as f32).contains(&pos) {
                    return v.max(0.0).powf(*exponent);
                }
                if pos < 1.0 && *exponent < 1.0 {
                    return v.powf(*exponent).min(values[1]);
                }
                let i = (pos as usize).min(POWER_TABLE_SIZE - 1);
                let (a, b) = (values[i], values[i + 1]);
                (a + (b - a) * (pos - i as f32)).min(b)
            }
        }
    }
}

/// Affine remap sending `min(plane)` to `lo` and `max(plane)` to `hi`.
///
/// A constant plane maps every pixel to `lo`.
pub fn normalize_minmax(plane: &ImagePlane, lo: f32, hi: f32) -> Result<ImagePlane> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(format!("normalization range requires lo < hi, got [{lo}, {hi}]")));
    }
    Ok(normalize_range(plane, lo, hi))
}

/// Scalar form of the min-max remap, for fused loops.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RangeMap {
    min: f64,
    max: f32,
    lo: f32,
    hi: f32,
    scale: f64,
}

impl RangeMap {
    pub(crate) fn new((min, max): (f32, f32), lo: f32, hi: f32) -> Self {
        let span = max as f64 - min as f64;
        let scale = if span > 0.0 { (hi as f64 - lo as f64) / span } else { 0.0 };
        Self {
            min: min as f64,
            max,
            lo,
            hi,
            scale,
        }
    }

    #[inline]
    pub(crate) fn apply(&self, v: f32) -> f32 {
        if self.scale == 0.0 {
            self.lo
        } else if v == self.max {
            self.hi
        } else {
            ((self.lo as f64 + (v as f64 - self.min) * self.scale) as f32).clamp(self.lo, self.hi)
        }
    }
}

pub(crate) fn normalize_range(plane: &ImagePlane, lo: f32, hi: f32) -> ImagePlane {
    let map = RangeMap::new(plane.min_max(), lo, hi);
    plane.map(|v| map.apply(v))
}

/// Per-channel `normalize_minmax` onto the unit interval.
pub fn normalize_channels(img: &RgbImage) -> RgbImage {
    img.map_planes(|p| normalize_range(p, 0.0, 1.0))
}
