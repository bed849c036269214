use std::fmt;
use std::str::FromStr;

use super::QueryJudgments;
use crate::error::{Error, Result};
use crate::retrieval::{RankedEntry, RankedList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    PrecAt(usize),
    Mrr,
    /// Non-interpolated average precision over the top `n` results.
    AvgPrec(usize),
}

impl Metric {
    pub const PREC5: Metric = Metric::PrecAt(5);
    pub const PREC10: Metric = Metric::PrecAt(10);

    /// The three top-of-ranking metrics reported for every algorithm.
    pub const REPORTED: [Metric; 3] = [Metric::PREC5, Metric::PREC10, Metric::Mrr];

    pub fn evaluate(&self, ranked: &RankedList, judgments: &QueryJudgments) -> f64 {
        match *self {
            Metric::PrecAt(k) => prec_at_k(ranked, judgments, k),
            Metric::Mrr => reciprocal_rank(ranked, judgments),
            Metric::AvgPrec(depth) => avg_prec(ranked, judgments, depth).unwrap_or(0.0),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::PrecAt(k) => write!(f, "prec@{k}"),
            Metric::Mrr => write!(f, "MRR"),
            Metric::AvgPrec(depth) => write!(f, "AP@{depth}"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let bad = || Error::Config(format!("unknown metric `{s}`"));
        if lower == "mrr" {
            return Ok(Metric::Mrr);
        }
        let (name, k) = lower.split_once('@').ok_or_else(bad)?;
        let k: usize = k.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        match name {
            "prec" | "p" => Ok(Metric::PrecAt(k)),
            "ap" | "map" => Ok(Metric::AvgPrec(k)),
            _ => Err(bad()),
        }
    }
}

/// Relevant documents among the first `k`, divided by `k` even when the list is shorter.
pub fn prec_at_k(ranked: &RankedList, judgments: &QueryJudgments, k: usize) -> f64 {
    assert!(k >= 1, "prec@k needs k >= 1");
    let hits = ranked
        .docs()
        .take(k)
        .filter(|&d| judgments.is_relevant(d))
        .count();
    hits as f64 / k as f64
}

/// 1 / rank of the first relevant document, or 0.
pub fn reciprocal_rank(ranked: &RankedList, judgments: &QueryJudgments) -> f64 {
    ranked
        .docs()
        .position(|d| judgments.is_relevant(d))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Non-interpolated average precision over the top `depth` results, with
/// R (all judged-relevant documents) as denominator. `None` when R = 0.
pub fn avg_prec(ranked: &RankedList, judgments: &QueryJudgments, depth: usize) -> Option<f64> {
    assert!(depth >= 1, "average precision needs depth >= 1");
    let r = judgments.num_relevant();
    if r == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, doc) in ranked.docs().take(depth).enumerate() {
        if judgments.is_relevant(doc) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Some(sum / r as f64)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// `d_init` reordered with every relevant document first; each block is in
/// ascending doc id order.
pub fn upper_bound_ranking(d_init: &RankedList, judgments: &QueryJudgments) -> RankedList {
    let mut entries: Vec<RankedEntry> = d_init.entries().to_vec();
    entries.sort_by_key(|e| (!judgments.is_relevant(e.doc), e.doc));
    RankedList::from_ordered(d_init.qid.clone(), entries)
}

/// Value of `metric` if all relevant documents of `d_init` were moved to the top.
pub fn rerank_upper_bound(d_init: &RankedList, judgments: &QueryJudgments, metric: Metric) -> f64 {
    metric.evaluate(&upper_bound_ranking(d_init, judgments), judgments)
}
