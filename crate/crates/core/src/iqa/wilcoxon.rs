//! Wilcoxon signed-rank test for paired samples.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};

/// Largest number of nonzero differences handled by the exact null distribution
/// in [`wilcoxon_signed_rank`].
pub const EXACT_MAX_N: usize = 15;
pub const MIN_NONZERO: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Sum of the ranks of the positive differences `a - b`.
    pub statistic: f64,
    pub p_value: f64,
    /// Nonzero differences used.
    pub n: usize,
    pub method: WilcoxonMethod,
}

struct Ranked {
    /// Twice the average rank of each nonzero difference, so ties stay integral.
    doubled_ranks: Vec<u64>,
    positive: Vec<bool>,
    tie_sizes: Vec<usize>,
}

fn rank_differences(a: &[f64], b: &[f64]) -> Result<Ranked> {
    if a.len() != b.len() {
        return Err(invalid(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    if d.len() < MIN_NONZERO {
        return Err(Error::InsufficientData {
            available: d.len(),
            required: MIN_NONZERO,
        });
    }
    d.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let mut doubled_ranks = vec![0; d.len()];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < d.len() {
        let mut j = i + 1;
        while j < d.len() && d[j].abs() == d[i].abs() {
            j += 1;
        }
        // Ranks i+1..=j averaged, doubled.
        let r2 = (i + 1 + j) as u64;
        doubled_ranks[i..j].iter_mut().for_each(|r| *r = r2);
        tie_sizes.push(j - i);
        i = j;
    }
    Ok(Ranked {
        doubled_ranks,
        positive: d.iter().map(|v| *v > 0.0).collect(),
        tie_sizes,
    })
}

fn exact_p(r: &Ranked) -> f64 {
    let total: u64 = r.doubled_ranks.iter().sum();
    let mut counts = vec![0.0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &rank in &r.doubled_ranks {
        let rank = rank as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + rank] += counts[s];
            }
        }
        reach += rank;
    }
    let w2: u64 = positive_doubled_sum(r);
    let all = 2f64.powi(r.doubled_ranks.len() as i32);
    let lower: f64 = counts[..=w2 as usize].iter().sum();
    let upper: f64 = counts[w2 as usize..].iter().sum();
    (2.0 * lower.min(upper) / all).min(1.0)
}

fn positive_doubled_sum(r: &Ranked) -> u64 {
    r.doubled_ranks
        .iter()
        .zip(&r.positive)
        .filter(|(_, &p)| p)
        .map(|(&k, _)| k)
        .sum()
}

fn normal_p(r: &Ranked) -> f64 {
    let n = r.doubled_ranks.len() as f64;
    let w = positive_doubled_sum(r) as f64 / 2.0;
    let mean = n * (n + 1.0) / 4.0;
    let ties: f64 = r.tie_sizes.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0;
    let dev = ((w - mean).abs() - 0.5).max(0.0);
    erfc(dev / var.sqrt() / std::f64::consts::SQRT_2).min(1.0)
}

/// Two-sided test on the differences `a - b`, exact for up to [`EXACT_MAX_N`]
/// nonzero differences and normal-approximated above.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    let ranked = rank_differences(a, b)?;
    let method = if ranked.doubled_ranks.len() <= EXACT_MAX_N {
        WilcoxonMethod::Exact
    } else {
        WilcoxonMethod::Normal
    };
    Ok(finish(&ranked, method))
}

/// Same test with the null distribution chosen by the caller.
pub fn wilcoxon_signed_rank_with(a: &[f64], b: &[f64], method: WilcoxonMethod) -> Result<WilcoxonResult> {
    Ok(finish(&rank_differences(a, b)?, method))
}

fn finish(r: &Ranked, method: WilcoxonMethod) -> WilcoxonResult {
    let p_value = match method {
        WilcoxonMethod::Exact => exact_p(r),
        WilcoxonMethod::Normal => normal_p(r),
    };
    WilcoxonResult {
        statistic: positive_doubled_sum(r) as f64 / 2.0,
        p_value,
        n: r.doubled_ranks.len(),
        method,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_sequence() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 0.0625);
        assert_eq!(r.method, WilcoxonMethod::Exact);
        let s = wilcoxon_signed_rank(&b, &a).unwrap();
        assert_eq!(s.statistic, 15.0);
        assert_eq!(s.p_value, r.p_value);
    }

    #[test]
    fn equal_samples_are_insufficient() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert!(matches!(
            wilcoxon_signed_rank(&a, &a),
            Err(Error::InsufficientData { available: 0, .. })
        ));
        assert!(wilcoxon_signed_rank(&a, &a[..5]).is_err());
    }

    #[test]
    fn tied_ranks_are_averaged() {
        let a = [1.0, -1.0, 2.0, 2.0, 3.0, 0.0];
        let b = [0.0; 6];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        // |d| = 1,1,2,2,3 → ranks 1.5,1.5,3.5,3.5,5; positive: 1.5+3.5+3.5+5.
        assert_eq!(r.statistic, 13.5);
        assert_eq!(r.n, 5);
    }

    #[test]
    fn normal_path_matches_reference() {
        // d = 1..=20, all positive: W = 210, z = (210 - 105 - 0.5) / sqrt(717.5).
        let a: Vec<f64> = (1..=20).map(f64::from).collect();
        let r = wilcoxon_signed_rank(&a, &[0.0; 20]).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Normal);
        let z = 104.5 / 717.5f64.sqrt();
        assert!((r.p_value - erfc(z / std::f64::consts::SQRT_2)).abs() < 1e-15);
        assert!((r.p_value - 9.569173157059432e-05).abs() < 1e-12);
    }
}
