//! Two-sided Wilcoxon signed-rank test on paired per-query values.
//!
//! Zero differences are dropped and tied absolute differences share their
//! average rank. For up to [`EXACT_MAX_N`] non-zero differences the p-value
//! comes from the exact permutation distribution of the positive-rank sum
//! (tie-aware, by counting sign assignments); above that a normal
//! approximation with tie and continuity corrections is used.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest sample size that uses the exact null distribution.
pub const EXACT_MAX_N: usize = 25;

/// Fewer non-zero differences than this make the result indeterminate.
pub const MIN_NONZERO: usize = 5;

const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Absolute differences closer than this are treated as equal (and as zero).
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// Non-zero differences used by the test.
    pub n: usize,
    /// Sum of ranks of the positive differences `x - y`.
    pub w_plus: f64,
    pub p_value: f64,
    pub exact: bool,
    /// Too few non-zero differences to draw a conclusion.
    pub indeterminate: bool,
    pub significant: bool,
}

/// Average ranks (1-based) of `values`, which must be sorted ascending.
fn average_ranks(sorted: &[f64]) -> Vec<f64> {
    let mut ranks = vec![0.0; sorted.len()];
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] - sorted[i] <= TIE_EPS {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        ranks[i..j].fill(avg);
        i = j;
    }
    ranks
}

pub fn wilcoxon_two_sided(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "paired samples differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let mut diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| d.abs() > TIE_EPS)
        .collect();
    diffs.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let n = diffs.len();

    let abs_sorted: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs_sorted);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();

    let (p_value, exact) = if n == 0 {
        (1.0, true)
    } else if n <= EXACT_MAX_N {
        (exact_p_value(&ranks, w_plus), true)
    } else {
        (normal_p_value(&ranks, w_plus), false)
    };

    let indeterminate = n < MIN_NONZERO;
    Ok(WilcoxonResult {
        n,
        w_plus,
        p_value,
        exact,
        indeterminate,
        significant: !indeterminate && p_value < SIGNIFICANCE_LEVEL,
    })
}

/// Exact two-sided p-value: counts the sign assignments whose positive-rank
/// sum is at least as extreme as the observed one. Ranks are multiples of
/// 1/2, so sums are tracked in half-rank units.
fn exact_p_value(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // ways[s] = number of subsets of ranks with doubled sum s
    let mut ways = vec![0u64; max_sum + 1];
    ways[0] = 1;
    for &r in &doubled {
        for s in (r..=max_sum).rev() {
            ways[s] += ways[s - r];
        }
    }
    let total = 2f64.powi(ranks.len() as i32);
    let observed = (w_plus * 2.0).round() as usize;
    let lower: u64 = ways[..=observed].iter().sum();
    let upper: u64 = ways[observed..].iter().sum();
    let tail = lower.min(upper) as f64 / total;
    (2.0 * tail).min(1.0)
}

fn normal_p_value(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    // tie groups share the same average rank
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < ranks.len() {
        let mut j = i + 1;
        while j < ranks.len() && ranks[j] == ranks[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if variance <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}
