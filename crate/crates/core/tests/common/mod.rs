//! Shared fixtures and independent reference implementations.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use genrank::corpus::DocId;
use genrank::experiment::{Collection, ExperimentConfig};
use genrank::graph::{GenerationGraph, LinkMode, PairScores};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic")
}

pub fn synthetic_config(out: PathBuf) -> ExperimentConfig {
    let dir = data_dir();
    ExperimentConfig::new(dir.join("corpus.jsonl"), dir.join("queries.tsv"), dir.join("qrels.txt"), out)
}

pub fn synthetic() -> Collection {
    Collection::load(&synthetic_config(PathBuf::from("unused"))).expect("bundled collection loads")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random link scores over nodes `0..n` in a random id order.
pub fn random_pairs(rng: &mut ChaCha8Rng, n: usize) -> PairScores {
    let mut ids: Vec<DocId> = (0..n as u32).map(|i| DocId(i * 3 + 1)).collect();
    for i in (1..n).rev() {
        ids.swap(i, rng.gen_range(0..=i));
    }
    let m = (0..n)
        .map(|o| (0..n).map(|g| if o == g { 0.0 } else { rng.gen_range(0.001..1.0) }).collect())
        .collect();
    PairScores::from_matrix(ids, LinkMode::LmGeneration, m).unwrap()
}

/// Stationary distribution by a direct LU solve of `(I - P^T) pi = 0`
/// with the last equation replaced by `sum pi = 1`.
pub fn lu_stationary(graph: &GenerationGraph) -> Vec<f64> {
    let n = graph.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for d in 0..n {
        for o in 0..n {
            a[(d, o)] = if d == o { 1.0 } else { 0.0 } - graph.weight(o, d);
        }
    }
    for o in 0..n {
        a[(n - 1, o)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    a.lu().solve(&b).expect("non-singular").iter().copied().collect()
}

/// Principal eigenvector of `W^T W` (sign fixed to a non-negative sum).
pub fn principal_authority(graph: &GenerationGraph) -> Vec<f64> {
    let n = graph.len();
    let w = DMatrix::<f64>::from_fn(n, n, |o, g| graph.weight(o, g));
    let m = w.transpose() * &w;
    let eig = SymmetricEigen::new(m);
    let (best, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let v: Vec<f64> = eig.eigenvectors.column(best).iter().copied().collect();
    let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    v.into_iter().map(|x| x * sign).collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Two-sided signed-rank p-value by enumerating all `2^n` sign patterns of
/// the non-zero differences. Differences are compared on a 1e-9 grid.
pub fn brute_force_wilcoxon(x: &[f64], y: &[f64]) -> f64 {
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| d.abs() > 1e-12)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return 1.0;
    }
    let key = |d: f64| (d.abs() * 1e9).round() as i64;
    // rank = (number strictly smaller) + (size of tie group + 1) / 2
    let mut groups: BTreeMap<i64, usize> = BTreeMap::new();
    for &d in &diffs {
        *groups.entry(key(d)).or_default() += 1;
    }
    let ranks: Vec<f64> = diffs
        .iter()
        .map(|&d| {
            let k = key(d);
            let below: usize = groups.range(..k).map(|(_, c)| c).sum();
            below as f64 + (groups[&k] as f64 + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let (mut low, mut high) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= observed + 1e-9 {
            low += 1;
        }
        if w >= observed - 1e-9 {
            high += 1;
        }
    }
    let total = (1u64 << n) as f64;
    (2.0 * low.min(high) as f64 / total).min(1.0)
}
