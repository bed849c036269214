//! Generation graphs over the re-ranking set.
//!
//! Every node `o` (the offspring) links to its top-`alpha` generators: the
//! other nodes `g` whose models score `o` highest, ties broken by ascending
//! doc id. Edges are either uniform (weight 1) or weighted by the link score.
//! Graphs are stored as dense row-major matrices with `weights[o][g] = wt(o -> g)`.

use std::io::{self, Write};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, DocId, Document, TermId};
use crate::error::{Error, Result};
use crate::lm::{log_gen_prob, DirichletModel, TermDistribution};
use crate::retrieval::score_order;

/// Default ancestry grid; values at or above the node count are capped.
pub const DEFAULT_ALPHA_GRID: [usize; 6] = [4, 9, 19, 29, 39, 49];

/// Default smoothing grid.
pub const DEFAULT_LAMBDA_GRID: [f64; 12] =
    [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkMode {
    /// `exp(-KL(mle(o) || p^mu_g))`
    #[serde(alias = "lm")]
    LmGeneration,
    /// Cosine of log tf.idf vectors.
    #[serde(alias = "cosine")]
    CosineLogTfidf,
}

impl std::str::FromStr for LinkMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lm" | "lm-generation" => Ok(LinkMode::LmGeneration),
            "cosine" | "cosine-log-tfidf" => Ok(LinkMode::CosineLogTfidf),
            _ => Err(Error::Config(format!("unknown link mode `{s}` (expected lm or cosine)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkScorer {
    pub mode: LinkMode,
    /// Dirichlet parameter for [`LinkMode::LmGeneration`].
    pub mu: f64,
}

impl LinkScorer {
    pub fn lm(mu: f64) -> Self {
        LinkScorer {
            mode: LinkMode::LmGeneration,
            mu,
        }
    }

    pub fn cosine() -> Self {
        LinkScorer {
            mode: LinkMode::CosineLogTfidf,
            mu: 0.0,
        }
    }

    /// Score of the link `offspring -> generator`.
    pub fn score(&self, generator: &Document, offspring: &Document, corpus: &Corpus) -> Result<f64> {
        match self.mode {
            LinkMode::LmGeneration => {
                let model = self.model(generator, corpus)?;
                let dist = TermDistribution::from_counts(offspring.counts())?;
                Ok(log_gen_prob(&model, &dist)?.exp())
            }
            LinkMode::CosineLogTfidf => Ok(cosine_score(generator, offspring, corpus)),
        }
    }

    fn model<'a>(&self, doc: &'a Document, corpus: &'a Corpus) -> Result<DirichletModel<'a>> {
        if !(self.mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {}", self.mu)));
        }
        DirichletModel::for_document(doc, corpus, self.mu)
    }

    /// Link scores between every ordered pair of `nodes`.
    pub fn pair_scores(&self, nodes: &[DocId], corpus: &Corpus) -> Result<PairScores> {
        let n = nodes.len();
        let rows: Vec<Vec<f64>> = match self.mode {
            LinkMode::LmGeneration => {
                let models = nodes
                    .iter()
                    .map(|&d| self.model(corpus.doc(d), corpus))
                    .collect::<Result<Vec<_>>>()?;
                nodes
                    .par_iter()
                    .enumerate()
                    .map(|(o, &doc)| {
                        let dist = TermDistribution::from_counts(corpus.doc(doc).counts())?;
                        (0..n)
                            .map(|g| {
                                if g == o {
                                    Ok(0.0)
                                } else {
                                    Ok(log_gen_prob(&models[g], &dist)?.exp())
                                }
                            })
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            LinkMode::CosineLogTfidf => {
                let vectors: Vec<TfidfVector> = nodes
                    .iter()
                    .map(|&d| TfidfVector::new(corpus.doc(d), corpus))
                    .collect();
                (0..n)
                    .into_par_iter()
                    .map(|o| {
                        (0..n)
                            .map(|g| if g == o { 0.0 } else { vectors[g].cosine(&vectors[o]) })
                            .collect()
                    })
                    .collect()
            }
        };
        Ok(PairScores {
            node_ids: nodes.to_vec(),
            mode: self.mode,
            scores: rows.concat(),
        })
    }
}

/// Link scores for all ordered node pairs; `score(g, o)` is how strongly
/// generator `g` supports offspring `o`.
#[derive(Debug, Clone)]
pub struct PairScores {
    node_ids: Vec<DocId>,
    mode: LinkMode,
    /// Row-major by offspring: `scores[o * n + g]`.
    scores: Vec<f64>,
}

impl PairScores {
    /// Wraps precomputed scores, `scores[o][g]` being the score of `o -> g`.
    pub fn from_matrix(node_ids: Vec<DocId>, mode: LinkMode, scores: Vec<Vec<f64>>) -> Result<Self> {
        let n = node_ids.len();
        if scores.len() != n || scores.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("score matrix must be n x n".into()));
        }
        if scores.iter().flatten().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidParameter("link scores must be finite and >= 0".into()));
        }
        Ok(PairScores {
            node_ids,
            mode,
            scores: scores.concat(),
        })
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn node_ids(&self) -> &[DocId] {
        &self.node_ids
    }

    pub fn mode(&self) -> LinkMode {
        self.mode
    }

    pub fn score(&self, generator: usize, offspring: usize) -> f64 {
        self.scores[offspring * self.len() + generator]
    }

    /// Node indices of the `alpha` best generators of `offspring`, best first.
    pub fn top_generators(&self, offspring: usize, alpha: usize) -> Result<Vec<usize>> {
        let n = self.len();
        if alpha >= n {
            return Err(Error::AlphaTooLarge { alpha, nodes: n });
        }
        let mut candidates: Vec<usize> = (0..n).filter(|&g| g != offspring).collect();
        candidates.sort_by(|&a, &b| {
            score_order(
                self.score(a, offspring),
                self.node_ids[a],
                self.score(b, offspring),
                self.node_ids[b],
            )
        });
        candidates.truncate(alpha);
        Ok(candidates)
    }
}

/// Doc ids of the top-`alpha` generators of `offspring` among `d_init`.
pub fn top_generators(
    offspring: DocId,
    d_init: &[DocId],
    alpha: usize,
    scorer: &LinkScorer,
    corpus: &Corpus,
) -> Result<Vec<DocId>> {
    let o = d_init
        .iter()
        .position(|&d| d == offspring)
        .ok_or_else(|| Error::InvalidParameter(format!("document {offspring} is not in the node set")))?;
    let pairs = scorer.pair_scores(d_init, corpus)?;
    Ok(pairs
        .top_generators(o, alpha)?
        .into_iter()
        .map(|g| d_init[g])
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeWeighting {
    /// Weight 1 on every edge to a top generator.
    Uniform,
    /// The link score on every edge to a top generator.
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Uniform,
    Weighted,
    CosineUniform,
    CosineWeighted,
    /// An arbitrary non-negative matrix supplied by the caller.
    Custom,
}

impl GraphKind {
    fn of(mode: LinkMode, weighting: EdgeWeighting) -> Self {
        match (mode, weighting) {
            (LinkMode::LmGeneration, EdgeWeighting::Uniform) => GraphKind::Uniform,
            (LinkMode::LmGeneration, EdgeWeighting::Weighted) => GraphKind::Weighted,
            (LinkMode::CosineLogTfidf, EdgeWeighting::Uniform) => GraphKind::CosineUniform,
            (LinkMode::CosineLogTfidf, EdgeWeighting::Weighted) => GraphKind::CosineWeighted,
        }
    }
}

/// A complete weighted directed graph over the re-ranking set.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationGraph {
    node_ids: Vec<DocId>,
    weights: Vec<f64>,
    kind: GraphKind,
    alpha: usize,
    /// Set once the graph has been smoothed.
    lambda: Option<f64>,
}

impl GenerationGraph {
    /// A graph from an explicit row-major `n x n` weight matrix.
    pub fn from_weights(node_ids: Vec<DocId>, weights: Vec<f64>) -> Result<Self> {
        let n = node_ids.len();
        if weights.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "expected {} weights for {n} nodes, got {}",
                n * n,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter("edge weights must be finite and >= 0".into()));
        }
        Ok(GenerationGraph {
            node_ids,
            weights,
            kind: GraphKind::Custom,
            alpha: 0,
            lambda: None,
        })
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn node_ids(&self) -> &[DocId] {
        &self.node_ids
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn is_smoothed(&self) -> bool {
        self.lambda.is_some()
    }

    /// wt(o -> g)
    pub fn weight(&self, o: usize, g: usize) -> f64 {
        self.weights[o * self.len() + g]
    }

    pub fn row(&self, o: usize) -> &[f64] {
        let n = self.len();
        &self.weights[o * n..(o + 1) * n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The same graph with every out-edge of `o` multiplied by `factors[o]`.
    pub fn scale_rows(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.len() || factors.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidParameter("need one positive factor per row".into()));
        }
        let n = self.len();
        let mut scaled = self.clone();
        for (o, row) in scaled.weights.chunks_mut(n.max(1)).enumerate().take(n) {
            row.iter_mut().for_each(|w| *w *= factors[o]);
        }
        Ok(scaled)
    }
}

/// Builds `G_U` (uniform) or `G_W` (weighted) from precomputed link scores.
pub fn build_graph(pairs: &PairScores, alpha: usize, weighting: EdgeWeighting) -> Result<GenerationGraph> {
    let n = pairs.len();
    if alpha >= n {
        return Err(Error::AlphaTooLarge { alpha, nodes: n });
    }
    let mut weights = vec![0.0; n * n];
    for o in 0..n {
        for g in pairs.top_generators(o, alpha)? {
            weights[o * n + g] = match weighting {
                EdgeWeighting::Uniform => 1.0,
                EdgeWeighting::Weighted => pairs.score(g, o),
            };
        }
    }
    Ok(GenerationGraph {
        node_ids: pairs.node_ids().to_vec(),
        weights,
        kind: GraphKind::of(pairs.mode(), weighting),
        alpha,
        lambda: None,
    })
}

/// PageRank-style smoothing:
/// `wt'(o -> g) = (1 - lambda) / n + lambda * wt(o -> g) / sum_g' wt(o -> g')`.
pub fn smooth(graph: &GenerationGraph, lambda: f64) -> Result<GenerationGraph> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda must be in [0, 1), got {lambda}")));
    }
    let n = graph.len();
    let teleport = (1.0 - lambda) / n as f64;
    let mut weights = Vec::with_capacity(n * n);
    for o in 0..n {
        let row = graph.row(o);
        let total: f64 = row.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroRow { row: o });
        }
        weights.extend(row.iter().map(|w| teleport + lambda * (w / total)));
    }
    Ok(GenerationGraph {
        node_ids: graph.node_ids.clone(),
        weights,
        kind: graph.kind,
        alpha: graph.alpha,
        lambda: Some(lambda),
    })
}

/// Sparse `(1 + ln tf) * ln(N / df)` vector with its Euclidean norm.
struct TfidfVector {
    entries: Vec<(TermId, f64)>,
    norm: f64,
}

impl TfidfVector {
    fn new(doc: &Document, corpus: &Corpus) -> Self {
        let n_docs = corpus.len() as f64;
        let entries: Vec<(TermId, f64)> = doc
            .counts()
            .iter()
            .map(|(t, tf)| {
                let idf = (n_docs / f64::from(corpus.doc_freq(t))).ln();
                (t, (1.0 + f64::from(tf).ln()) * idf)
            })
            .collect();
        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        TfidfVector { entries, norm }
    }

    fn cosine(&self, other: &TfidfVector) -> f64 {
        if self.norm == 0.0 || other.norm == 0.0 {
            warn!("zero-norm tf.idf vector; cosine set to 0");
            return 0.0;
        }
        // both sorted by term id
        let (mut i, mut j, mut dot) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (ta, wa) = self.entries[i];
            let (tb, wb) = other.entries[j];
            match ta.cmp(&tb) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += wa * wb;
                    i += 1;
                    j += 1;
                }
            }
        }
        (dot / (self.norm * other.norm)).clamp(0.0, 1.0)
    }
}

/// Cosine between log tf.idf vectors of two documents.
pub fn cosine_score(d1: &Document, d2: &Document, corpus: &Corpus) -> f64 {
    TfidfVector::new(d1, corpus).cosine(&TfidfVector::new(d2, corpus))
}

/// Writes positive edges as `from_doc<TAB>to_doc<TAB>weight` using document names.
pub fn write_tsv<W: Write>(graph: &GenerationGraph, corpus: &Corpus, mut out: W) -> io::Result<()> {
    let n = graph.len();
    for o in 0..n {
        for g in 0..n {
            let w = graph.weight(o, g);
            if w > 0.0 {
                writeln!(
                    out,
                    "{}\t{}\t{}",
                    corpus.doc(graph.node_ids[o]).name(),
                    corpus.doc(graph.node_ids[g]).name(),
                    w
                )?;
            }
        }
    }
    Ok(())
}
