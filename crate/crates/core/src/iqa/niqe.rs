//! NIQE: multivariate Gaussian fits of patch NSS features and the model file format.
//!
//! Model files are plain text:
//!
//! ```text
//! nss-model v1
//! kind niqe
//! dimension 36
//! mean
//! <36 numbers>
//! covariance
//! <36 rows of 36 numbers>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::imgcore::RgbImage;

use super::basic::Gray;
use super::brisque::shifted_product;
use super::mscn::Mscn;
use super::nss::{aggd_features, aggd_fit};
use super::{half_scale, PAIR_OFFSETS};

pub const NIQE_PATCH: usize = 96;
pub const NIQE_DIM: usize = 36;
const SHARPNESS_FRACTION: f64 = 0.75;
const HEADER: &str = "nss-model v1";

/// Multivariate Gaussian over NIQE patch features.
#[derive(Debug, Clone, PartialEq)]
pub struct NssModel {
    mean: Vec<f64>,
    covariance: Vec<f64>,
}

impl NssModel {
    /// Builds a model, checking shape, finiteness, symmetry and positive semi-definiteness.
    pub fn new(mean: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Error::InvalidModel(m);
        if mean.len() != NIQE_DIM || covariance.len() != NIQE_DIM * NIQE_DIM {
            return Err(bad(format!(
                "expected {NIQE_DIM} means and {NIQE_DIM}x{NIQE_DIM} covariance, got {} and {}",
                mean.len(),
                covariance.len()
            )));
        }
        if mean.iter().chain(&covariance).any(|v| !v.is_finite()) {
            return Err(bad("non-finite value".into()));
        }
        for i in 0..NIQE_DIM {
            for j in i + 1..NIQE_DIM {
                let (a, b) = (covariance[i * NIQE_DIM + j], covariance[j * NIQE_DIM + i]);
                if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                    return Err(bad(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        let eig = DMatrix::from_row_slice(NIQE_DIM, NIQE_DIM, &covariance).symmetric_eigenvalues();
        let top = eig.amax().max(1.0);
        let low = eig.min();
        if low < -1e-8 * top {
            return Err(bad(format!("covariance not positive semi-definite (eigenvalue {low:e})")));
        }
        Ok(Self { mean, covariance })
    }

    /// Sample mean and covariance (`n - 1` normalization; zero for one sample).
    pub fn from_samples(samples: &[[f64; NIQE_DIM]]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientData {
                available: 0,
                required: 1,
            });
        }
        let n = samples.len() as f64;
        let mut mean = vec![0.0; NIQE_DIM];
        for s in samples {
            for (m, v) in mean.iter_mut().zip(s) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut covariance = vec![0.0; NIQE_DIM * NIQE_DIM];
        if samples.len() > 1 {
            for i in 0..NIQE_DIM {
                for j in i..NIQE_DIM {
                    let c = samples
                        .iter()
                        .map(|s| (s[i] - mean[i]) * (s[j] - mean[j]))
                        .sum::<f64>()
                        / (n - 1.0);
                    covariance[i * NIQE_DIM + j] = c;
                    covariance[j * NIQE_DIM + i] = c;
                }
            }
        }
        Self::new(mean, covariance)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Row-major covariance.
    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidModel(m.to_string());
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        if lines.next() != Some(HEADER) {
            return Err(bad("missing `nss-model v1` header"));
        }
        if lines.next() != Some("kind niqe") {
            return Err(bad("unsupported model kind"));
        }
        if lines.next() != Some(format!("dimension {NIQE_DIM}").as_str()) {
            return Err(bad("unsupported dimension"));
        }
        let numbers = |line: Option<&str>| -> Result<Vec<f64>> {
            line.ok_or_else(|| bad("truncated model"))?
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(&format!("bad number `{t}`"))))
                .collect()
        };
        if lines.next() != Some("mean") {
            return Err(bad("expected `mean`"));
        }
        let mean = numbers(lines.next())?;
        if lines.next() != Some("covariance") {
            return Err(bad("expected `covariance`"));
        }
        let mut covariance = Vec::with_capacity(NIQE_DIM * NIQE_DIM);
        for _ in 0..NIQE_DIM {
            let row = numbers(lines.next())?;
            if row.len() != NIQE_DIM {
                return Err(bad("covariance row has wrong length"));
            }
            covariance.extend(row);
        }
        if lines.next().is_some() {
            return Err(bad("trailing data"));
        }
        Self::new(mean, covariance)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
        let mut s = format!("{HEADER}\nkind niqe\ndimension {NIQE_DIM}\nmean\n{}\ncovariance\n", join(&self.mean));
        for row in self.covariance.chunks(NIQE_DIM) {
            let _ = writeln!(s, "{}", join(row));
        }
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| Error::InvalidModel(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// `sqrt(dᵀ pinv((Σa + Σb) / 2) d)` with `d` the difference of the means.
pub fn mvg_distance(a: &NssModel, b: &NssModel) -> f64 {
    let d = DVector::from_iterator(NIQE_DIM, a.mean.iter().zip(&b.mean).map(|(x, y)| x - y));
    let pooled = (DMatrix::from_row_slice(NIQE_DIM, NIQE_DIM, &a.covariance)
        + DMatrix::from_row_slice(NIQE_DIM, NIQE_DIM, &b.covariance))
        / 2.0;
    let svd = pooled.svd(true, true);
    let tol = NIQE_DIM as f64 * svd.singular_values.max() * f64::EPSILON;
    let pinv = svd.pseudo_inverse(tol.max(f64::MIN_POSITIVE)).expect("both factors computed");
    d.dot(&(pinv * &d)).max(0.0).sqrt()
}

fn block_features(m: &Mscn, bx: usize, by: usize, size: usize) -> [f64; 18] {
    let mut block = Vec::with_capacity(size * size);
    for y in by * size..(by + 1) * size {
        let row = y * m.width;
        block.extend_from_slice(&m.coefficients[row + bx * size..row + (bx + 1) * size]);
    }
    let mut f = [0.0; 18];
    let (a, l, r) = aggd_fit(&block);
    f[0] = a;
    f[1] = (l + r) / 2.0;
    for (k, &(dy, dx)) in PAIR_OFFSETS.iter().enumerate() {
        let p = shifted_product(&block, size, size, dy, dx);
        f[2 + 4 * k..6 + 4 * k].copy_from_slice(&aggd_features(&p));
    }
    f
}

struct PatchFeatures {
    features: Vec<[f64; NIQE_DIM]>,
    sharpness: Vec<f64>,
}

fn patch_features(img: &RgbImage) -> Result<PatchFeatures> {
    let (w, h) = img.dimensions();
    if w.min(h) < NIQE_PATCH {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min_width: NIQE_PATCH,
            min_height: NIQE_PATCH,
        });
    }
    let full = Gray::from_rgb(img);
    let (cw, ch) = (w / NIQE_PATCH * NIQE_PATCH, h / NIQE_PATCH * NIQE_PATCH);
    let mut gray = Gray {
        width: cw,
        height: ch,
        data: Vec::with_capacity(cw * ch),
    };
    for y in 0..ch {
        gray.data.extend_from_slice(&full.data[y * w..y * w + cw]);
    }
    let (nx, ny) = (cw / NIQE_PATCH, ch / NIQE_PATCH);
    let mut features = vec![[0.0; NIQE_DIM]; nx * ny];
    let mut sharpness = vec![0.0; nx * ny];
    let m1 = Mscn::compute(&gray);
    let m2 = Mscn::compute(&half_scale(&gray));
    for by in 0..ny {
        for bx in 0..nx {
            let i = by * nx + bx;
            features[i][..18].copy_from_slice(&block_features(&m1, bx, by, NIQE_PATCH));
            features[i][18..].copy_from_slice(&block_features(&m2, bx, by, NIQE_PATCH / 2));
            let mut s = 0.0;
            for y in by * NIQE_PATCH..(by + 1) * NIQE_PATCH {
                s += m1.sigma[y * cw + bx * NIQE_PATCH..y * cw + (bx + 1) * NIQE_PATCH]
                    .iter()
                    .sum::<f64>();
            }
            sharpness[i] = s / (NIQE_PATCH * NIQE_PATCH) as f64;
        }
    }
    Ok(PatchFeatures {
        features,
        sharpness,
    })
}

/// Feature vectors of every 96×96 patch of the image.
pub fn niqe_patch_features(img: &RgbImage) -> Result<Vec<[f64; NIQE_DIM]>> {
    Ok(patch_features(img)?.features)
}

/// The image's own multivariate Gaussian over all its patches.
pub fn niqe_image_fit(img: &RgbImage) -> Result<NssModel> {
    NssModel::from_samples(&niqe_patch_features(img)?)
}

pub fn niqe(img: &RgbImage, model: &NssModel) -> Result<f64> {
    Ok(mvg_distance(model, &niqe_image_fit(img)?))
}

/// Pristine model from the sharpest patches of each image.
pub fn fit_niqe_model(images: &[RgbImage]) -> Result<NssModel> {
    let mut kept = Vec::new();
    for img in images {
        let p = patch_features(img)?;
        let top = p.sharpness.iter().cloned().fold(0.0, f64::max);
        kept.extend(
            p.features
                .iter()
                .zip(&p.sharpness)
                .filter(|(_, &s)| s > SHARPNESS_FRACTION * top)
                .map(|(f, _)| *f),
        );
    }
    NssModel::from_samples(&kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize, seed: u32) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| {
            let v = (x as u32 * 7919 + y as u32 * 104_729 + seed).wrapping_mul(2_654_435_761) >> 24;
            let base = 0.5 + 0.3 * ((x as f32) / 9.0).sin() * ((y as f32) / 13.0).cos();
            [(base + v as f32 / 2550.0).clamp(0.0, 1.0); 3]
        })
        .unwrap()
    }

    fn identity_model() -> NssModel {
        let mut cov = vec![0.0; NIQE_DIM * NIQE_DIM];
        for i in 0..NIQE_DIM {
            cov[i * NIQE_DIM + i] = 1.0;
        }
        NssModel::new(vec![0.0; NIQE_DIM], cov).unwrap()
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = fit_niqe_model(&[textured(200, 196, 1), textured(192, 100, 2)]).unwrap();
        let back = NssModel::parse(&m.to_text()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn rejects_bad_models() {
        let good = identity_model();
        let mut text = good.to_text();
        assert!(NssModel::parse(&text.replace("kind niqe", "kind brisque")).is_err());
        assert!(NssModel::parse(&text.replace("dimension 36", "dimension 35")).is_err());
        text.push_str("1\n");
        assert!(NssModel::parse(&text).is_err());
        let mut cov = good.covariance().to_vec();
        cov[0] = -1.0;
        assert!(NssModel::new(vec![0.0; NIQE_DIM], cov.clone()).is_err());
        cov[0] = 1.0;
        cov[1] = 0.5;
        assert!(NssModel::new(vec![0.0; NIQE_DIM], cov).is_err());
        let mut mean = vec![0.0; NIQE_DIM];
        mean[3] = f64::NAN;
        assert!(NssModel::new(mean, good.covariance().to_vec()).is_err());
    }

    #[test]
    fn distance_with_identity_covariance_is_euclidean() {
        let a = identity_model();
        let mut mean = vec![0.0; NIQE_DIM];
        mean[0] = 3.0;
        mean[5] = 4.0;
        let b = NssModel::new(mean, a.covariance().to_vec()).unwrap();
        assert!((mvg_distance(&a, &b) - 5.0).abs() < 1e-12);
        assert_eq!(mvg_distance(&a, &a), 0.0);
    }

    #[test]
    fn single_patch_has_zero_covariance() {
        let fit = niqe_image_fit(&textured(100, 120, 3)).unwrap();
        assert!(fit.covariance().iter().all(|&c| c == 0.0));
        assert!(fit.mean().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn too_small_for_a_patch() {
        assert!(matches!(
            niqe_image_fit(&textured(95, 200, 0)),
            Err(Error::ImageTooSmall { .. })
        ));
    }
}
