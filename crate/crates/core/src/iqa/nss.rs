//! Generalized Gaussian and asymmetric generalized Gaussian moment matching.

use std::sync::OnceLock;

use statrs::function::gamma::gamma;

const SHAPE_MIN: f64 = 0.2;
const SHAPE_STEP: f64 = 0.001;
const SHAPE_COUNT: usize = 9801;

struct ShapeTable {
    shapes: Vec<f64>,
    /// `Γ(1/a)Γ(3/a)/Γ(2/a)²`
    ggd_ratio: Vec<f64>,
    /// `Γ(2/a)²/(Γ(1/a)Γ(3/a))`
    aggd_ratio: Vec<f64>,
}

fn table() -> &'static ShapeTable {
    static TABLE: OnceLock<ShapeTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let shapes: Vec<f64> = (0..SHAPE_COUNT).map(|i| SHAPE_MIN + i as f64 * SHAPE_STEP).collect();
        let ggd_ratio: Vec<f64> = shapes
            .iter()
            .map(|&a| gamma(1.0 / a) * gamma(3.0 / a) / gamma(2.0 / a).powi(2))
            .collect();
        let aggd_ratio = ggd_ratio.iter().map(|r| 1.0 / r).collect();
        ShapeTable {
            shapes,
            ggd_ratio,
            aggd_ratio,
        }
    })
}

fn closest_shape(ratios: &[f64], target: f64) -> f64 {
    let t = table();
    let mut best = 0;
    let mut best_err = f64::INFINITY;
    for (i, r) in ratios.iter().enumerate() {
        let err = (r - target).abs();
        if err < best_err {
            best_err = err;
            best = i;
        }
    }
    t.shapes[best]
}

/// Zero-mean GGD fit. Returns `(shape, variance)`.
pub fn ggd_fit(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let variance = x.iter().map(|v| v * v).sum::<f64>() / n;
    let abs_mean = x.iter().map(|v| v.abs()).sum::<f64>() / n;
    if !(variance > 0.0 && abs_mean > 0.0) {
        return (2.0, 0.0);
    }
    let rho = variance / (abs_mean * abs_mean);
    (closest_shape(&table().ggd_ratio, rho), variance)
}

/// AGGD fit. Returns `(shape, left_std, right_std)`.
pub fn aggd_fit(x: &[f64]) -> (f64, f64, f64) {
    let (mut ls, mut ln, mut rs, mut rn) = (0.0, 0usize, 0.0, 0usize);
    let (mut abs_sum, mut sq_sum) = (0.0, 0.0);
    for &v in x {
        if v < 0.0 {
            ls += v * v;
            ln += 1;
        } else if v > 0.0 {
            rs += v * v;
            rn += 1;
        }
        abs_sum += v.abs();
        sq_sum += v * v;
    }
    let left = if ln > 0 { (ls / ln as f64).sqrt() } else { 0.0 };
    let right = if rn > 0 { (rs / rn as f64).sqrt() } else { 0.0 };
    if sq_sum == 0.0 {
        return (2.0, 0.0, 0.0);
    }
    let g = if left > 0.0 && right > 0.0 { left / right } else { 1.0 };
    let n = x.len() as f64;
    let r_hat = (abs_sum / n).powi(2) / (sq_sum / n);
    let r_norm = r_hat * (g.powi(3) + 1.0) * (g + 1.0) / (g * g + 1.0).powi(2);
    (closest_shape(&table().aggd_ratio, r_norm), left, right)
}

/// `(shape, mean, left_var, right_var)` of a pairwise-product field.
pub fn aggd_features(x: &[f64]) -> [f64; 4] {
    let (a, l, r) = aggd_fit(x);
    let mean = (r - l) * (gamma(2.0 / a) / gamma(1.0 / a)) * (gamma(1.0 / a) / gamma(3.0 / a)).sqrt();
    [a, mean, l * l, r * r]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gaussian_samples(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n / 2)
            .flat_map(|_| {
                let u1: f64 = rng.random::<f64>().max(1e-300);
                let u2: f64 = rng.random();
                let r = (-2.0 * u1.ln()).sqrt();
                let t = 2.0 * std::f64::consts::PI * u2;
                [r * t.cos(), r * t.sin()]
            })
            .collect()
    }

    #[test]
    fn table_grid() {
        let t = table();
        assert_eq!(t.shapes.len(), SHAPE_COUNT);
        assert!((t.shapes[SHAPE_COUNT - 1] - 10.0).abs() < 1e-9);
        // Gaussian: Γ(1/2)Γ(3/2)/Γ(1)² = π/2.
        let i = t.shapes.iter().position(|&a| (a - 2.0).abs() < 1e-9).unwrap();
        assert!((t.ggd_ratio[i] - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn gaussian_and_laplacian_shapes() {
        let g = gaussian_samples(200_000, 7);
        let (shape, var) = ggd_fit(&g);
        assert!((shape - 2.0).abs() < 0.05, "{shape}");
        assert!((var - 1.0).abs() < 0.02);
        // Laplace samples as differences of exponentials.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lap: Vec<f64> = (0..200_000)
            .map(|_| {
                let a: f64 = rng.random::<f64>().max(1e-300);
                let b: f64 = rng.random::<f64>().max(1e-300);
                a.ln() - b.ln()
            })
            .collect();
        let (shape, _) = ggd_fit(&lap);
        assert!((shape - 1.0).abs() < 0.05, "{shape}");
    }

    #[test]
    fn aggd_on_symmetric_gaussian() {
        let g = gaussian_samples(200_000, 11);
        let [a, mean, l, r] = aggd_features(&g);
        assert!((a - 2.0).abs() < 0.05);
        assert!(mean.abs() < 0.02);
        assert!((l - 1.0).abs() < 0.03 && (r - 1.0).abs() < 0.03);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(ggd_fit(&[0.0; 10]), (2.0, 0.0));
        assert_eq!(aggd_fit(&[0.0; 10]), (2.0, 0.0, 0.0));
        let (a, l, r) = aggd_fit(&[1.0, 2.0, 3.0]);
        assert!(a.is_finite() && l == 0.0 && r > 0.0);
    }
}
