//! Luma statistics on the 8-bit scale.

use crate::imgcore::RgbImage;

/// Luma plane on the 0–255 scale in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Gray {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Gray {
    pub fn from_rgb(img: &RgbImage) -> Self {
        let [r, g, b] = img.planes();
        let data = r
            .data()
            .iter()
            .zip(g.data())
            .zip(b.data())
            .map(|((&r, &g), &b)| {
                // Integer weights keep white at exactly 255.
                (299.0 * r as f64 + 587.0 * g as f64 + 114.0 * b as f64) * 255.0 / 1000.0
            })
            .collect();
        Self {
            width: img.width(),
            height: img.height(),
            data,
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

pub fn mean_brightness(img: &RgbImage) -> f64 {
    gray_mean(&Gray::from_rgb(img).data)
}

/// Population standard deviation of luma.
pub fn std_dev(img: &RgbImage) -> f64 {
    gray_std(&Gray::from_rgb(img).data)
}

/// Shannon entropy in bits of the 256-bin luma histogram.
pub fn entropy(img: &RgbImage) -> f64 {
    gray_entropy(&Gray::from_rgb(img).data)
}

pub(crate) fn gray_mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

pub(crate) fn gray_std(data: &[f64]) -> f64 {
    let m = gray_mean(data);
    (data.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / data.len() as f64).sqrt()
}

pub(crate) fn gray_entropy(data: &[f64]) -> f64 {
    let mut hist = [0usize; 256];
    for &v in data {
        hist[v.round().clamp(0.0, 255.0) as usize] += 1;
    }
    let n = data.len() as f64;
    let h: f64 = hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}
