//! Mean-subtracted contrast-normalized coefficients.

use super::basic::Gray;

const WINDOW_RADIUS: usize = 3;
const WINDOW_SIGMA: f64 = 7.0 / 6.0;
const STABILIZER: f64 = 1.0;

fn gaussian_taps() -> [f64; 2 * WINDOW_RADIUS + 1] {
    let mut taps = [0.0; 2 * WINDOW_RADIUS + 1];
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - WINDOW_RADIUS as f64;
        *t = (-d * d / (2.0 * WINDOW_SIGMA * WINDOW_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.map(|t| t / sum)
}

/// Separable 7×7 Gaussian blur with replicated borders.
pub(crate) fn gaussian_blur(data: &[f64], w: usize, h: usize) -> Vec<f64> {
    let taps = gaussian_taps();
    let r = WINDOW_RADIUS as isize;
    let clampi = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &data[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                acc += t * row[clampi(x as isize + k as isize - r, w)];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for (k, &t) in taps.iter().enumerate() {
            let src = clampi(y as isize + k as isize - r, h) * w;
            for x in 0..w {
                out[y * w + x] += t * tmp[src + x];
            }
        }
    }
    out
}

/// MSCN field together with the local standard deviation it was divided by.
#[derive(Debug, Clone)]
pub struct Mscn {
    pub width: usize,
    pub height: usize,
    pub coefficients: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl Mscn {
    pub fn compute(gray: &Gray) -> Self {
        let (w, h) = (gray.width, gray.height);
        let mu = gaussian_blur(&gray.data, w, h);
        let sq: Vec<f64> = gray.data.iter().map(|v| v * v).collect();
        let mu_sq = gaussian_blur(&sq, w, h);
        let sigma: Vec<f64> = mu
            .iter()
            .zip(&mu_sq)
            .map(|(m, s)| (s - m * m).abs().sqrt())
            .collect();
        let coefficients = gray
            .data
            .iter()
            .zip(&mu)
            .zip(&sigma)
            .map(|((v, m), s)| (v - m) / (s + STABILIZER))
            .collect();
        Self {
            width: w,
            height: h,
            coefficients,
            sigma,
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.coefficients[y * self.width + x]
    }
}
