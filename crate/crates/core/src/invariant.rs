//! Illumination-invariant channels: the mean chroma channel and the
//! normalized Laplacian of luma, plus the percentile contrast stretch applied
//! to the Laplacian before it drives the luma correction.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::imgcore::{normalize_minmax, ImagePlane};

/// 3x3 second-derivative kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKernel {
    /// Sum of the 3x3 Sobel second-derivative kernels in x and y.
    #[default]
    SobelSum,
    /// Classic 4-neighbor Laplacian.
    FourNeighbor,
}

impl LaplacianKernel {
    /// Weights indexed `[dy + 1][dx + 1]`.
    pub fn weights(self) -> [[f32; 3]; 3] {
        match self {
            // [[1,-2,1],[2,-4,2],[1,-2,1]] + its transpose
            LaplacianKernel::SobelSum => [[2.0, 0.0, 2.0], [0.0, -8.0, 0.0], [2.0, 0.0, 2.0]],
            LaplacianKernel::FourNeighbor => {
                [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]]
            }
        }
    }
}

/// The two invariant planes, both on the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantChannels {
    pub m_c: ImagePlane,
    pub laplacian: ImagePlane,
}

impl InvariantChannels {
    pub fn compute(
        lab_a: &ImagePlane,
        cb: &ImagePlane,
        cr: &ImagePlane,
        y: &ImagePlane,
        kernel: LaplacianKernel,
    ) -> Result<Self> {
        lab_a.ensure_same_dims(y)?;
        Ok(Self {
            m_c: mean_chroma(lab_a, cb, cr)?,
            laplacian: laplacian_invariant(y, kernel)?,
        })
    }
}

/// `m_c = (2A + Cb + Cr) / 4`.
pub fn mean_chroma(a: &ImagePlane, cb: &ImagePlane, cr: &ImagePlane) -> Result<ImagePlane> {
    a.ensure_same_dims(cb)?;
    a.ensure_same_dims(cr)?;
    let (w, h) = a.dimensions();
    let (a, cb, cr) = (a.data(), cb.data(), cr.data());
    let data = (0..a.len()).map(|i| mean_chroma_pixel(a[i], cb[i], cr[i])).collect();
    Ok(ImagePlane::from_parts(w, h, data))
}

#[inline]
pub(crate) fn mean_chroma_pixel(a: f32, cb: f32, cr: f32) -> f32 {
    (2.0 * a + cb + cr) * 0.25
}

/// Raw kernel response with replicate padding (signed, unnormalized).
pub fn laplacian_response(plane: &ImagePlane, kernel: LaplacianKernel) -> Result<ImagePlane> {
    let (w, h) = plane.dimensions();
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min_width: 3,
            min_height: 3,
        });
    }
    Ok(correlate3x3(plane, &kernel.weights()))
}

/// Laplacian response min-max normalized onto `[0, 1]`.
pub fn laplacian_invariant(y: &ImagePlane, kernel: LaplacianKernel) -> Result<ImagePlane> {
    normalize_minmax(&laplacian_response(y, kernel)?, 0.0, 1.0)
}

fn correlate3x3(plane: &ImagePlane, k: &[[f32; 3]; 3]) -> ImagePlane {
    let (w, h) = plane.dimensions();
    let src = plane.data();
    let mut out = vec![0.0f32; w * h];
    for y in 0..h {
        let rows = [y.saturating_sub(1), y, (y + 1).min(h - 1)].map(|r| &src[r * w..(r + 1) * w]);
        let dst = &mut out[y * w..(y + 1) * w];
        // The kernels sum to zero, so taking differences against the center
        // leaves flat regions at exactly zero.
        let tap = |x0: usize, x1: usize, x2: usize| -> f32 {
            let c = rows[1][x1];
            let mut acc = 0.0;
            for (krow, row) in k.iter().zip(&rows) {
                acc += krow[0] * (row[x0] - c) + krow[1] * (row[x1] - c) + krow[2] * (row[x2] - c);
            }
            acc
        };
        dst[0] = tap(0, 0, 1.min(w - 1));
        for (x, d) in dst.iter_mut().enumerate().take(w - 1).skip(1) {
            *d = tap(x - 1, x, x + 1);
        }
        if w > 1 {
            dst[w - 1] = tap(w - 2, w - 1, w - 1);
        }
    }
    ImagePlane::from_parts(w, h, out)
}

fn check_percentiles(p_lo: f64, p_hi: f64) -> Result<()> {
    if p_lo.is_finite() && p_hi.is_finite() && 0.0 <= p_lo && p_lo < p_hi && p_hi <= 100.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "percentiles must satisfy 0 <= lo < hi <= 100, got ({p_lo}, {p_hi})"
        )))
    }
}

/// 1-based nearest rank for percentile `p` of `n` samples.
fn nearest_rank(p: f64, n: usize) -> usize {
    // The small slack keeps exact products such as 12.5 from rounding up twice.
    let rank = (p * n as f64 / 100.0 - 1e-9).ceil();
    (rank.max(1.0) as usize).min(n)
}

/// Nearest-rank percentiles `(q_lo, q_hi)` of the plane's values.
pub fn percentile_pair(plane: &ImagePlane, p_lo: f64, p_hi: f64) -> Result<(f32, f32)> {
    check_percentiles(p_lo, p_hi)?;
    let n = plane.len();
    let (k_lo, k_hi) = (nearest_rank(p_lo, n) - 1, nearest_rank(p_hi, n) - 1);
    let mut values = plane.data().to_vec();
    let (_, &mut q_hi, _) = values.select_nth_unstable_by(k_hi, f32::total_cmp);
    let below = &mut values[..=k_hi];
    let (_, &mut q_lo, _) = below.select_nth_unstable_by(k_lo, f32::total_cmp);
    Ok((q_lo, q_hi))
}

/// Clamp below the `p_lo` percentile to 0 and above `p_hi` to 1, linear between.
pub fn contrast_stretch(plane: &ImagePlane, p_lo: f64, p_hi: f64) -> Result<ImagePlane> {
    let (q_lo, q_hi) = percentile_pair(plane, p_lo, p_hi)?;
    Ok(stretch_between(plane, q_lo, q_hi))
}

/// Linear stretch between absolute cut values. When `hi <= lo` the result
/// is a step at `lo`.
pub fn stretch_between(plane: &ImagePlane, lo: f32, hi: f32) -> ImagePlane {
    if hi > lo {
        let inv = 1.0 / (hi as f64 - lo as f64);
        plane.map(|v| (((v as f64 - lo as f64) * inv) as f32).clamp(0.0, 1.0))
    } else {
        plane.map(|v| if v > lo { 1.0 } else { 0.0 })
    }
}

/// Pearson correlation of two equally sized planes; 0 when either is constant.
pub fn plane_correlation(a: &ImagePlane, b: &ImagePlane) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let (ma, mb) = (a.mean(), b.mean());
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        let (dx, dy) = (x as f64 - ma, y as f64 - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(0.0);
    }
    Ok(sab / (saa * sbb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plane(w: usize, h: usize, f: impl FnMut(usize, usize) -> f32) -> ImagePlane {
        ImagePlane::from_fn(w, h, f).unwrap()
    }

    /// Direct evaluation of the correlation sum with clamped coordinates.
    fn oracle_response(p: &ImagePlane, k: [[f32; 3]; 3], x: usize, y: usize) -> f64 {
        let (w, h) = (p.width() as isize, p.height() as isize);
        let mut acc = 0.0f64;
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let sx = (x as isize + dx).clamp(0, w - 1) as usize;
                let sy = (y as isize + dy).clamp(0, h - 1) as usize;
                acc += k[(dy + 1) as usize][(dx + 1) as usize] as f64 * p.get(sx, sy) as f64;
            }
        }
        acc
    }

    #[test]
    fn sobel_sum_kernel_is_sum_of_second_derivatives() {
        let dxx = [[1.0, -2.0, 1.0], [2.0, -4.0, 2.0], [1.0, -2.0, 1.0]];
        let mut sum = [[0.0f32; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                sum[i][j] = dxx[i][j] + dxx[j][i];
            }
        }
        assert_eq!(sum, LaplacianKernel::SobelSum.weights());
    }

    #[test]
    fn mean_chroma_examples() {
        let p = |v| ImagePlane::filled(3, 2, v).unwrap();
        let m = mean_chroma(&p(0.5), &p(0.5), &p(0.5)).unwrap();
        assert!(m.data().iter().all(|&v| v == 0.5));
        let m = mean_chroma(&p(0.4), &p(0.47), &p(0.55)).unwrap();
        assert!(m.data().iter().all(|&v| (v - 0.455).abs() < 1e-6));
        assert_eq!(m.dimensions(), (3, 2));
        let other = ImagePlane::filled(2, 3, 0.5).unwrap();
        assert!(mean_chroma(&p(0.5), &other, &p(0.5)).is_err());
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let c = ImagePlane::filled(9, 7, 0.37).unwrap();
        for k in [LaplacianKernel::SobelSum, LaplacianKernel::FourNeighbor] {
            assert!(laplacian_response(&c, k).unwrap().data().iter().all(|&v| v == 0.0));
            assert!(laplacian_invariant(&c, k).unwrap().data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn laplacian_of_ramp_vanishes_inside() {
        let ramp = plane(12, 6, |x, _| x as f32 / 16.0);
        let r = laplacian_response(&ramp, LaplacianKernel::SobelSum).unwrap();
        for y in 0..6 {
            for x in 1..11 {
                assert!(r.get(x, y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn impulse_response_matches_kernel() {
        let imp = plane(5, 5, |x, y| if (x, y) == (2, 2) { 1.0 } else { 0.0 });
        let k = LaplacianKernel::SobelSum.weights();
        let r = laplacian_response(&imp, LaplacianKernel::SobelSum).unwrap();
        assert_eq!(r.get(2, 2), -8.0);
        for y in 0..5usize {
            for x in 0..5usize {
                let expected = if x.abs_diff(2) <= 1 && y.abs_diff(2) <= 1 {
                    k[3 - y][3 - x]
                } else {
                    0.0
                };
                assert_eq!(r.get(x, y), expected, "({x},{y})");
                assert_eq!(r.get(x, y) as f64, oracle_response(&imp, k, x, y));
            }
        }
    }

    #[test]
    fn too_small_for_kernel() {
        let p = ImagePlane::filled(2, 5, 0.0).unwrap();
        assert!(matches!(
            laplacian_response(&p, LaplacianKernel::SobelSum),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn percentile_nearest_rank_oracle() {
        let p = plane(1000, 1, |x, _| x as f32 / 999.0);
        // nearest rank: ceil(0.0125 * 1000) = 13, ceil(0.9875 * 1000) = 988
        let (lo, hi) = percentile_pair(&p, 1.25, 98.75).unwrap();
        assert_eq!(lo, 12.0 / 999.0);
        assert_eq!(hi, 987.0 / 999.0);
        let s = contrast_stretch(&p, 1.25, 98.75).unwrap();
        for x in 0..1000 {
            let expected = ((x as f64 - 12.0) / 975.0).clamp(0.0, 1.0);
            assert!((s.get(x, 0) as f64 - expected).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn stretch_full_span_hits_endpoints() {
        let p = plane(11, 1, |x, _| 0.2 + x as f32 * 0.05);
        let s = contrast_stretch(&p, 0.0, 100.0).unwrap();
        assert_eq!(s.get(0, 0), 0.0);
        assert_eq!(s.get(10, 0), 1.0);
        assert!((s.get(5, 0) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn stretch_rejects_bad_percentiles() {
        let p = ImagePlane::filled(4, 4, 0.5).unwrap();
        for (lo, hi) in [(50.0, 50.0), (60.0, 40.0), (-1.0, 50.0), (0.0, 101.0)] {
            assert!(contrast_stretch(&p, lo, hi).is_err());
        }
    }

    #[test]
    fn correlation_basics() {
        let a = plane(8, 8, |x, y| (x + y) as f32 / 14.0);
        let b = plane(8, 8, |x, y| 1.0 - (x + y) as f32 / 14.0);
        assert!((plane_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        assert!((plane_correlation(&a, &b).unwrap() + 1.0).abs() < 1e-9);
        let c = ImagePlane::filled(8, 8, 0.3).unwrap();
        assert_eq!(plane_correlation(&a, &c).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn translation_equivariant_inside(values in prop::collection::vec(0.0f32..=1.0, 64)) {
            let pad = plane(10, 10, |x, y| {
                if (1..9).contains(&x) && (1..9).contains(&y) { values[(y - 1) * 8 + x - 1] } else { 0.0 }
            });
            let shifted = plane(10, 10, |x, y| {
                if (2..10).contains(&x) && (2..10).contains(&y) { values[(y - 2) * 8 + x - 2] } else { 0.0 }
            });
            let r1 = laplacian_response(&pad, LaplacianKernel::SobelSum).unwrap();
            let r2 = laplacian_response(&shifted, LaplacianKernel::SobelSum).unwrap();
            for y in 1..8 {
                for x in 1..8 {
                    prop_assert_eq!(r1.get(x, y), r2.get(x + 1, y + 1));
                }
            }
        }

        #[test]
        fn mean_chroma_is_linear(a in 0.0f32..=1.0, cb in 0.0f32..=1.0, cr in 0.0f32..=1.0, alpha in 0.0f32..=1.0) {
            let p = |v: f32| ImagePlane::filled(2, 2, v).unwrap();
            let m = mean_chroma(&p(a), &p(cb), &p(cr)).unwrap().get(0, 0);
            let ms = mean_chroma(&p(alpha * a), &p(alpha * cb), &p(alpha * cr)).unwrap().get(0, 0);
            prop_assert!((ms - alpha * m).abs() < 1e-6);
        }

        #[test]
        fn stretch_monotone_and_idempotent(values in prop::collection::vec(-2.0f32..2.0, 2..200)) {
            let p = ImagePlane::new(values.len(), 1, values.clone()).unwrap();
            let s = contrast_stretch(&p, 1.25, 98.75).unwrap();
            let mut order: Vec<usize> = (0..values.len()).collect();
            order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
            for pair in order.windows(2) {
                prop_assert!(s.data()[pair[0]] <= s.data()[pair[1]]);
            }
            prop_assert!(s.data().iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert_eq!(stretch_between(&s, 0.0, 1.0), s.clone());
            let (lo, hi) = percentile_pair(&p, 1.25, 98.75).unwrap();
            if hi > lo {
                prop_assert_eq!(contrast_stretch(&s, 1.25, 98.75).unwrap(), s);
            }
        }
    }
}
