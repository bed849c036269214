//! Initial query-likelihood ranking and Dirichlet parameter selection.

use std::cmp::Ordering;

use log::warn;
use rayon::prelude::*;

use crate::corpus::{Corpus, DocId, Query};
use crate::error::{Error, Result};
use crate::eval::{Metric, QueryJudgments, Qrels};
use crate::lm::{log_gen_prob, DirichletModel, TermDistribution};

/// Default Dirichlet grid.
pub const DEFAULT_MU_GRID: [f64; 6] = [250.0, 500.0, 1000.0, 2000.0, 3000.0, 5000.0];

/// Default size of the re-ranking set.
pub const DEFAULT_DINIT: usize = 50;

/// Average-precision depth used when tuning mu.
pub const TUNING_DEPTH: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedEntry {
    pub doc: DocId,
    pub score: f64,
}

/// Descending by score, ascending by doc id on ties.
pub(crate) fn score_order(a_score: f64, a_doc: DocId, b_score: f64, b_doc: DocId) -> Ordering {
    b_score
        .partial_cmp(&a_score)
        .unwrap_or(Ordering::Equal)
        .then(a_doc.cmp(&b_doc))
}

/// A ranked result list for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub qid: String,
    entries: Vec<RankedEntry>,
    cutoff: usize,
}

impl RankedList {
    /// Sorts `(doc, score)` pairs by descending score, breaking ties by
    /// ascending doc id, and keeps the first `cutoff`.
    pub fn from_scores(qid: impl Into<String>, mut scores: Vec<(DocId, f64)>, cutoff: usize) -> Self {
        scores.sort_by(|a, b| score_order(a.1, a.0, b.1, b.0));
        scores.truncate(cutoff);
        RankedList {
            qid: qid.into(),
            entries: scores
                .into_iter()
                .map(|(doc, score)| RankedEntry { doc, score })
                .collect(),
            cutoff,
        }
    }

    /// Wraps entries that are already in final order.
    pub fn from_ordered(qid: impl Into<String>, entries: Vec<RankedEntry>) -> Self {
        let cutoff = entries.len();
        RankedList {
            qid: qid.into(),
            entries,
            cutoff,
        }
    }

    pub fn empty(qid: impl Into<String>, cutoff: usize) -> Self {
        RankedList {
            qid: qid.into(),
            entries: Vec::new(),
            cutoff,
        }
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn docs(&self) -> impl Iterator<Item = DocId> + '_ {
        self.entries.iter().map(|e| e.doc)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn truncated(&self, k: usize) -> RankedList {
        RankedList {
            qid: self.qid.clone(),
            entries: self.entries.iter().take(k).copied().collect(),
            cutoff: k.min(self.cutoff),
        }
    }
}

/// Log generation score `log p^KL_d(q)` of every corpus document, indexed
/// by doc id. Returns `None` when no query term occurs in the corpus.
pub fn score_all(query: &Query, corpus: &Corpus, mu: f64) -> Result<Option<Vec<f64>>> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
    }
    let terms = corpus.known_terms(&query.tokens);
    if terms.is_empty() {
        return Ok(None);
    }
    let dist = TermDistribution::mle(&terms)?;
    let scores = corpus
        .documents()
        .par_iter()
        .map(|doc| {
            let model = DirichletModel::for_document(doc, corpus, mu)?;
            log_gen_prob(&model, &dist)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Some(scores))
}

/// Scores every document by `log p^KL_d(q)` and returns the top `k`.
/// Entry scores are log generation scores.
pub fn initial_rank(query: &Query, corpus: &Corpus, mu: f64, k: usize) -> Result<RankedList> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    match score_all(query, corpus, mu)? {
        Some(scores) => Ok(RankedList::from_scores(
            query.qid.clone(),
            scores
                .into_iter()
                .enumerate()
                .map(|(i, s)| (DocId(i as u32), s))
                .collect(),
            k,
        )),
        None => {
            warn!("query `{}` has no in-vocabulary terms; empty ranking", query.qid);
            Ok(RankedList::empty(query.qid.clone(), k))
        }
    }
}

/// Queries paired with their judgments, skipping (with a warning) those
/// without any relevant document.
pub fn judged_queries<'q>(
    queries: &'q [Query],
    corpus: &Corpus,
    qrels: &Qrels,
) -> Result<Vec<(&'q Query, QueryJudgments)>> {
    let mut judged = Vec::new();
    let mut skipped = 0usize;
    for q in queries {
        let j = qrels.judgments_for(&q.qid, corpus);
        if j.num_relevant() == 0 {
            skipped += 1;
        } else {
            judged.push((q, j));
        }
    }
    if skipped > 0 {
        warn!("{skipped} queries have no relevant documents and are excluded from evaluation");
    }
    if judged.is_empty() {
        return Err(Error::NoJudgments);
    }
    Ok(judged)
}

/// Grid search for the mu maximizing the mean of `metric`; ties go to the
/// smaller mu. Returns the winner with its per-query values.
fn grid_search(
    judged: &[(&Query, QueryJudgments)],
    corpus: &Corpus,
    grid: &[f64],
    depth: usize,
    metric: Metric,
) -> Result<(f64, Vec<f64>)> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("mu grid is empty".into()));
    }
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for &mu in grid {
        let values = judged
            .par_iter()
            .map(|(q, j)| Ok(metric.evaluate(&initial_rank(q, corpus, mu, depth)?, j)))
            .collect::<Result<Vec<f64>>>()?;
        let mean = crate::eval::mean(&values);
        let better = match &best {
            None => true,
            Some((best_mu, best_mean, _)) => {
                mean > *best_mean || (mean == *best_mean && mu < *best_mu)
            }
        };
        if better {
            best = Some((mu, mean, values));
        }
    }
    let (mu, _, values) = best.expect("grid is non-empty");
    Ok((mu, values))
}

/// The mu maximizing mean non-interpolated average precision at `depth`.
pub fn tune_mu(
    queries: &[Query],
    corpus: &Corpus,
    qrels: &Qrels,
    grid: &[f64],
    depth: usize,
) -> Result<f64> {
    let judged = judged_queries(queries, corpus, qrels)?;
    grid_search(&judged, corpus, grid, depth, Metric::AvgPrec(depth)).map(|(mu, _)| mu)
}

/// Full-corpus ranking with mu chosen directly for `metric`. Returns the mu
/// and the per-query metric values of the judged queries, in query order.
pub fn optimized_baseline(
    queries: &[Query],
    corpus: &Corpus,
    qrels: &Qrels,
    metric: Metric,
    grid: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let judged = judged_queries(queries, corpus, qrels)?;
    grid_search(&judged, corpus, grid, corpus.len().max(1), metric)
}
