use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sena_core::imgcore::io::read_rgb;
use sena_core::iqa::{
    entropy, fit_niqe_model, mean_brightness, mvg_distance, niqe, niqe_image_fit, piqe, std_dev,
    wilcoxon_signed_rank, wilcoxon_signed_rank_with, WilcoxonMethod,
};
use sena_core::RgbImage;

fn fixture(rel: &str) -> RgbImage {
    read_rgb(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)).unwrap()
}

fn gray(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> RgbImage {
    RgbImage::from_fn(w, h, |x, y| [f(x, y) as f32 / 255.0; 3]).unwrap()
}

/// Two-sided p from the full sign enumeration over average ranks.
fn enumerated_p(d: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = d.iter().copied().filter(|v| *v != 0.0).collect();
    let n = d.len();
    let ranks: Vec<f64> = d
        .iter()
        .map(|x| {
            let below = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let tied = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            below + (tied + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = ranks.iter().zip(&d).filter(|(_, v)| **v > 0.0).map(|(r, _)| r).sum();
    let (mut le, mut ge) = (0u64, 0u64);
    for signs in 0u32..(1 << n) {
        let w: f64 = (0..n).filter(|i| signs >> i & 1 == 1).map(|i| ranks[i]).sum();
        le += (w <= observed) as u64;
        ge += (w >= observed) as u64;
    }
    let total = (1u64 << n) as f64;
    (observed, (2.0 * le.min(ge) as f64 / total).min(1.0))
}

#[test]
fn exact_wilcoxon_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in 5..=8 {
        let mut checked = 0;
        while checked < 50 {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(0..10) as f64).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(0..10) as f64).collect();
            let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            let Ok(got) = wilcoxon_signed_rank(&a, &b) else {
                assert!(d.iter().filter(|v| **v != 0.0).count() < 5);
                continue;
            };
            let (w, p) = enumerated_p(&d);
            assert_eq!(got.method, WilcoxonMethod::Exact);
            assert_eq!(got.statistic, w, "{d:?}");
            assert!((got.p_value - p).abs() <= 1e-12, "{d:?}: {} vs {p}", got.p_value);
            checked += 1;
        }
    }
}

#[test]
fn wilcoxon_paired_example() {
    let a = [1.0, 2.0, 3.0, 4.0, 5.0];
    let b = [2.0, 3.0, 4.0, 5.0, 6.0];
    let r = wilcoxon_signed_rank(&a, &b).unwrap();
    assert_eq!((r.statistic, r.p_value), (0.0, 0.0625));
}

#[test]
fn exact_and_normal_paths_agree_at_fifteen() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let a: Vec<f64> = (0..15).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..15).map(|_| rng.random::<f64>() + 0.1).collect();
        let exact = wilcoxon_signed_rank_with(&a, &b, WilcoxonMethod::Exact).unwrap();
        let normal = wilcoxon_signed_rank_with(&a, &b, WilcoxonMethod::Normal).unwrap();
        assert!(
            (exact.p_value - normal.p_value).abs() <= 0.01,
            "W = {}: exact {} vs normal {}",
            exact.statistic,
            exact.p_value,
            normal.p_value
        );
    }
}

#[test]
fn basic_statistics_on_synthetic_images() {
    assert_eq!(entropy(&gray(16, 16, |_, _| 90)), 0.0);
    let half = gray(16, 16, |x, _| if x < 8 { 0 } else { 255 });
    assert_eq!(entropy(&half), 1.0);
    assert_eq!(std_dev(&half), 127.5);
    assert_eq!(entropy(&gray(16, 16, |x, y| (y * 16 + x) as u8)), 8.0);
}

#[test]
fn mean_brightness_scales_linearly() {
    let img = fixture("natural/coffee.jpg");
    let base = mean_brightness(&img);
    for alpha in [0.0f32, 0.25, 0.5, 0.8, 1.0] {
        let scaled = RgbImage::from_fn(img.width(), img.height(), |x, y| {
            img.pixel(x, y).map(|v| v * alpha)
        })
        .unwrap();
        let got = mean_brightness(&scaled);
        assert!((got - alpha as f64 * base).abs() <= 1e-4, "alpha {alpha}: {got}");
    }
}

#[test]
fn metrics_are_deterministic() {
    let img = fixture("shadow/shadow_coffee.png");
    let copy = img.clone();
    assert_eq!(piqe(&img).unwrap(), piqe(&copy).unwrap());
    assert_eq!(entropy(&img), entropy(&copy));
    assert_eq!(niqe_image_fit(&img).unwrap(), niqe_image_fit(&copy).unwrap());
}

#[test]
fn piqe_ranks_noise_below_natural_images() {
    let noise = piqe(&fixture("noise/white_noise.png")).unwrap();
    for name in ["natural/astronaut.jpg", "natural/chelsea.jpg", "natural/coffee.jpg"] {
        assert!(noise > piqe(&fixture(name)).unwrap(), "{name}");
    }
}

#[test]
fn niqe_self_distance_and_blur_ordering() {
    let natural: Vec<RgbImage> =
        ["astronaut.jpg", "chelsea.jpg", "coffee.jpg"].iter().map(|n| fixture(&format!("natural/{n}"))).collect();
    let model = fit_niqe_model(&natural).unwrap();
    assert_eq!(mvg_distance(&model, &model), 0.0);

    let sharp = fixture("shadow/shadow_astronaut.png");
    let (w, h) = sharp.dimensions();
    // 9x9 box blur, clamped at the borders.
    let blurred = RgbImage::from_fn(w, h, |x, y| {
        let mut acc = [0.0f32; 3];
        for dy in -4i64..=4 {
            for dx in -4i64..=4 {
                let sx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                let sy = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                let p = sharp.pixel(sx, sy);
                for c in 0..3 {
                    acc[c] += p[c] / 81.0;
                }
            }
        }
        acc
    })
    .unwrap();
    let (a, b) = (niqe(&sharp, &model).unwrap(), niqe(&blurred, &model).unwrap());
    assert!(a >= 0.0 && b > a, "sharp {a}, blurred {b}");
}
