//! Color-space conversions.
//!
//! YCbCr is full-range BT.601 (the JPEG/JFIF matrix). CIELAB uses the sRGB
//! transfer curve and a D65 reference white.

use super::{ImagePlane, RgbImage, YcbcrImage};

const KR: f32 = 0.299;
const KG: f32 = 0.587;
const KB: f32 = 0.114;

/// Window used to place CIELAB a* on the unit interval.
pub const LAB_A_MIN: f32 = -128.0;
pub const LAB_A_MAX: f32 = 127.0;

// D65 reference white.
const XN: f32 = 0.950_47;

fn planes_from_pixels<const N: usize>(
    n: usize,
    mut f: impl FnMut(usize) -> [f32; N],
) -> [Vec<f32>; N] {
    let mut out: [Vec<f32>; N] = std::array::from_fn(|_| Vec::with_capacity(n));
    for i in 0..n {
        let px = f(i);
        for (plane, v) in out.iter_mut().zip(px) {
            plane.push(v);
        }
    }
    out
}

#[inline]
pub(crate) fn ycbcr_pixel(r: f32, g: f32, b: f32) -> [f32; 3] {
    [
        (KR * r + KG * g + KB * b).clamp(0.0, 1.0),
        (0.5 - 0.168_736 * r - 0.331_264 * g + 0.5 * b).clamp(0.0, 1.0),
        (0.5 + 0.5 * r - 0.418_688 * g - 0.081_312 * b).clamp(0.0, 1.0),
    ]
}

#[inline]
pub(crate) fn rgb_pixel(y: f32, cb: f32, cr: f32) -> [f32; 3] {
    let (cb, cr) = (cb - 0.5, cr - 0.5);
    [
        (y + 1.402 * cr).clamp(0.0, 1.0),
        (y - 0.344_136 * cb - 0.714_136 * cr).clamp(0.0, 1.0),
        (y + 1.772 * cb).clamp(0.0, 1.0),
    ]
}

pub fn rgb_to_ycbcr(img: &RgbImage) -> YcbcrImage {
    let (w, h) = img.dimensions();
    let (r, g, b) = (img.r.data(), img.g.data(), img.b.data());
    let [y, cb, cr] = planes_from_pixels(w * h, |i| ycbcr_pixel(r[i], g[i], b[i]));
    YcbcrImage {
        y: ImagePlane::from_parts(w, h, y),
        cb: ImagePlane::from_parts(w, h, cb),
        cr: ImagePlane::from_parts(w, h, cr),
    }
}

/// Inverse BT.601 transform; results are clamped to the unit interval.
pub fn ycbcr_to_rgb(img: &YcbcrImage) -> RgbImage {
    let (w, h) = img.dimensions();
    let (y, cb, cr) = (img.y.data(), img.cb.data(), img.cr.data());
    let [r, g, b] = planes_from_pixels(w * h, |i| rgb_pixel(y[i], cb[i], cr[i]));
    RgbImage {
        r: ImagePlane::from_parts(w, h, r),
        g: ImagePlane::from_parts(w, h, g),
        b: ImagePlane::from_parts(w, h, b),
    }
}

/// BT.601 luma alone.
pub fn luminance(img: &RgbImage) -> ImagePlane {
    let (r, g, b) = (img.r.data(), img.g.data(), img.b.data());
    let data = (0..r.len())
        .map(|i| (KR * r[i] + KG * g[i] + KB * b[i]).clamp(0.0, 1.0))
        .collect();
    ImagePlane::from_parts(img.width(), img.height(), data)
}

/// HSV value channel, `max(r, g, b)`.
pub fn rgb_value_channel(img: &RgbImage) -> ImagePlane {
    let (r, g, b) = (img.r.data(), img.g.data(), img.b.data());
    let data = (0..r.len()).map(|i| r[i].max(g[i]).max(b[i])).collect();
    ImagePlane::from_parts(img.width(), img.height(), data)
}

/// CIELAB a* (green to magenta) per pixel, mapped from
/// `[LAB_A_MIN, LAB_A_MAX]` onto `[0, 1]`.
pub fn rgb_to_lab_a(img: &RgbImage) -> ImagePlane {
    let tables = LabTables::get();
    let (r, g, b) = (img.r.data(), img.g.data(), img.b.data());
    let data = (0..r.len()).map(|i| tables.lab_a(r[i], g[i], b[i])).collect();
    ImagePlane::from_parts(img.width(), img.height(), data)
}

fn lab_f(t: f32) -> f32 {
    const DELTA: f32 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

pub(crate) fn srgb_to_linear(v: f32) -> f32 {
    if v <= 0.040_45 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

const TABLE_SIZE: usize = 4096;

/// Increasing unit-interval curve sampled at `TABLE_SIZE + 1` points.
struct Tabulated {
    values: Box<[f32; TABLE_SIZE + 1]>,
    exact: fn(f32) -> f32,
}

impl Tabulated {
    fn new(exact: fn(f32) -> f32) -> Self {
        let mut values = Box::new([0.0f32; TABLE_SIZE + 1]);
        for (i, v) in values.iter_mut().enumerate() {
            *v = exact(i as f32 / TABLE_SIZE as f32);
        }
        Self { values, exact }
    }

    #[inline]
    fn eval(&self, v: f32) -> f32 {
        if !(0.0..=1.0).contains(&v) {
            return (self.exact)(v.max(0.0));
        }
        let pos = v * TABLE_SIZE as f32;
        let i = (pos as usize).min(TABLE_SIZE - 1);
        let (a, b) = (self.values[i], self.values[i + 1]);
        a + (b - a) * (pos - i as f32)
    }
}

/// The sRGB decoding curve and the CIELAB companding function. Both are
/// continuously differentiable on the unit interval, so linear interpolation
/// on 4096 segments stays within about 1e-5 of the exact a*.
pub(crate) struct LabTables {
    srgb: Tabulated,
    f: Tabulated,
}

impl LabTables {
    pub(crate) fn get() -> &'static Self {
        static TABLES: std::sync::OnceLock<LabTables> = std::sync::OnceLock::new();
        TABLES.get_or_init(|| Self {
            srgb: Tabulated::new(srgb_to_linear),
            f: Tabulated::new(lab_f),
        })
    }

    #[inline]
    pub(crate) fn lab_a(&self, r: f32, g: f32, b: f32) -> f32 {
        let (r, g, b) = (self.srgb.eval(r), self.srgb.eval(g), self.srgb.eval(b));
        let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
        let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
        let a = 500.0 * (self.f.eval(x / XN) - self.f.eval(y));
        ((a - LAB_A_MIN) / (LAB_A_MAX - LAB_A_MIN)).clamp(0.0, 1.0)
    }
}
