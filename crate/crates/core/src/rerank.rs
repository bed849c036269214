//! Final orderings of the re-ranking set: by centrality alone, by centrality
//! times query likelihood, or by a non-structural document prior.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::centrality::{self, CentralityScores, IterationOptions, Method};
use crate::corpus::{Corpus, DocId, Document, Query};
use crate::error::{Error, Result};
use crate::graph::{build_graph, smooth, EdgeWeighting, GenerationGraph, LinkMode, LinkScorer};
use crate::lm::TermDistribution;
use crate::retrieval::{RankedEntry, RankedList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PriorKind {
    Uniform,
    Tokens,
    LogTokens,
    Types,
    LogTypes,
    Entropy,
}

impl PriorKind {
    pub const ALL: [PriorKind; 6] = [
        PriorKind::Uniform,
        PriorKind::Tokens,
        PriorKind::LogTokens,
        PriorKind::Types,
        PriorKind::LogTypes,
        PriorKind::Entropy,
    ];
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorKind::Uniform => "uniform",
            PriorKind::Tokens => "tokens",
            PriorKind::LogTokens => "log-tokens",
            PriorKind::Types => "types",
            PriorKind::LogTypes => "log-types",
            PriorKind::Entropy => "entropy",
        })
    }
}

impl FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PriorKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown prior `{s}`")))
    }
}

/// Non-structural prior of a (non-empty) document. Logs are `ln(1 + x)`.
pub fn document_prior(doc: &Document, kind: PriorKind) -> f64 {
    match kind {
        PriorKind::Uniform => 1.0,
        PriorKind::Tokens => doc.len() as f64,
        PriorKind::LogTokens => (doc.len() as f64).ln_1p(),
        PriorKind::Types => doc.num_types() as f64,
        PriorKind::LogTypes => (doc.num_types() as f64).ln_1p(),
        PriorKind::Entropy => TermDistribution::from_counts(doc.counts())
            .map(|d| d.entropy())
            .unwrap_or(0.0),
    }
}

/// Prior values of `nodes` wrapped as centrality scores.
pub fn prior_scores(nodes: &[DocId], corpus: &Corpus, kind: PriorKind) -> Result<CentralityScores> {
    let values = nodes
        .iter()
        .map(|&d| document_prior(corpus.doc(d), kind))
        .collect();
    CentralityScores::from_values(nodes.to_vec(), values, Method::Prior(kind))
}

/// Orders `d_init` by descending `keys`, then descending initial score,
/// then ascending doc id. Output entry scores are the keys.
fn order_by(d_init: &RankedList, keys: Vec<f64>) -> RankedList {
    let entries = d_init.entries();
    let mut idx: Vec<usize> = (0..entries.len()).collect();
    idx.sort_by(|&a, &b| {
        keys[b]
            .total_cmp(&keys[a])
            .then_with(|| entries[b].score.partial_cmp(&entries[a].score).unwrap_or(Ordering::Equal))
            .then(entries[a].doc.cmp(&entries[b].doc))
    });
    RankedList::from_ordered(
        d_init.qid.clone(),
        idx.into_iter()
            .map(|i| RankedEntry {
                doc: entries[i].doc,
                score: keys[i],
            })
            .collect(),
    )
}

fn lookup(d_init: &RankedList, scores: &CentralityScores) -> Result<Vec<f64>> {
    d_init
        .docs()
        .map(|d| scores.get(d).ok_or(Error::MissingScore(d)))
        .collect()
}

/// Ranks `d_init` by centrality alone.
pub fn rerank_by_centrality(d_init: &RankedList, scores: &CentralityScores) -> Result<RankedList> {
    Ok(order_by(d_init, lookup(d_init, scores)?))
}

/// Ranks `d_init` by `score(d) * p_d(q)`, computed as `ln score(d) + ln p_d(q)`.
/// `log_likelihoods` are aligned with the entries of `d_init`.
pub fn rerank_combined(
    d_init: &RankedList,
    scores: &CentralityScores,
    log_likelihoods: &[f64],
) -> Result<RankedList> {
    if log_likelihoods.len() != d_init.len() {
        return Err(Error::InvalidParameter(format!(
            "{} query likelihoods for {} documents",
            log_likelihoods.len(),
            d_init.len()
        )));
    }
    let keys = lookup(d_init, scores)?
        .into_iter()
        .zip(log_likelihoods)
        .map(|(c, ll)| c.ln() + ll)
        .collect();
    Ok(order_by(d_init, keys))
}

/// [`rerank_combined`] with the initial retrieval scores of `d_init` as the
/// query log-likelihoods.
pub fn rerank_with_initial(d_init: &RankedList, scores: &CentralityScores) -> Result<RankedList> {
    let lls: Vec<f64> = d_init.entries().iter().map(|e| e.score).collect();
    rerank_combined(d_init, scores, &lls)
}

/// Edge weighting and smoothing of the graph a method runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphVariant {
    U,
    W,
    /// Smoothed uniform graph.
    RU,
    /// Smoothed weighted graph.
    RW,
}

impl GraphVariant {
    pub fn weighting(self) -> EdgeWeighting {
        match self {
            GraphVariant::U | GraphVariant::RU => EdgeWeighting::Uniform,
            GraphVariant::W | GraphVariant::RW => EdgeWeighting::Weighted,
        }
    }

    pub fn smoothed(self) -> bool {
        matches!(self, GraphVariant::RU | GraphVariant::RW)
    }

    fn label(self) -> &'static str {
        match self {
            GraphVariant::U => "U",
            GraphVariant::W => "W",
            GraphVariant::RU => "R-U",
            GraphVariant::RW => "R-W",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "U" => GraphVariant::U,
            "W" => GraphVariant::W,
            "R-U" => GraphVariant::RU,
            "R-W" => GraphVariant::RW,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scoring {
    /// The initial query-likelihood order.
    Initial,
    /// Influx on `U`/`W`, recursive influx on `R-U`/`R-W`.
    Influx(GraphVariant),
    HitsAuth(GraphVariant),
    HitsHub(GraphVariant),
    Prior(PriorKind),
}

/// A named re-ranking algorithm such as `R-W-In+LM` or `hits-auth:W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Algorithm {
    pub scoring: Scoring,
    /// Multiply by the query likelihood.
    pub with_lm: bool,
}

impl Algorithm {
    pub const INITIAL: Algorithm = Algorithm {
        scoring: Scoring::Initial,
        with_lm: false,
    };

    pub fn graph_variant(&self) -> Option<GraphVariant> {
        match self.scoring {
            Scoring::Influx(v) | Scoring::HitsAuth(v) | Scoring::HitsHub(v) => Some(v),
            Scoring::Initial | Scoring::Prior(_) => None,
        }
    }

    pub fn needs_graph(&self) -> bool {
        self.graph_variant().is_some()
    }

    pub fn needs_lambda(&self) -> bool {
        self.graph_variant().is_some_and(GraphVariant::smoothed)
    }

    /// The eight influx algorithms.
    pub fn influx_family() -> Vec<Algorithm> {
        let mut all = Vec::new();
        for v in [GraphVariant::U, GraphVariant::W, GraphVariant::RU, GraphVariant::RW] {
            for with_lm in [false, true] {
                all.push(Algorithm {
                    scoring: Scoring::Influx(v),
                    with_lm,
                });
            }
        }
        all
    }

    /// Centrality of every node of `graph`, which must already carry the
    /// weighting and smoothing of [`Self::graph_variant`].
    pub fn centrality(&self, graph: &GenerationGraph, opts: IterationOptions) -> Result<CentralityScores> {
        match self.scoring {
            Scoring::Influx(v) if v.smoothed() => centrality::recursive_influx(graph, opts),
            Scoring::Influx(_) => Ok(centrality::influx(graph)),
            Scoring::HitsAuth(_) => centrality::hits(graph, opts).map(|(auth, _)| auth),
            Scoring::HitsHub(_) => centrality::hits(graph, opts).map(|(_, hub)| hub),
            Scoring::Initial | Scoring::Prior(_) => {
                Err(Error::InvalidParameter(format!("{self} does not use a graph")))
            }
        }
    }

    /// Final ordering of `d_init` given node scores.
    pub fn apply(&self, d_init: &RankedList, scores: &CentralityScores) -> Result<RankedList> {
        match (self.scoring, self.with_lm) {
            (Scoring::Initial, _) => Ok(d_init.clone()),
            (_, true) => rerank_with_initial(d_init, scores),
            (_, false) => rerank_by_centrality(d_init, scores),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scoring {
            Scoring::Initial => f.write_str("initial")?,
            Scoring::Influx(v) => write!(f, "{}-In", v.label())?,
            Scoring::HitsAuth(v) => write!(f, "hits-auth:{}", v.label())?,
            Scoring::HitsHub(v) => write!(f, "hits-hub:{}", v.label())?,
            Scoring::Prior(k) => write!(f, "prior:{k}")?,
        }
        if self.with_lm {
            f.write_str("+LM")?;
        }
        Ok(())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown algorithm `{s}`"));
        let (body, with_lm) = match s.trim().strip_suffix("+LM") {
            Some(body) => (body, true),
            None => (s.trim(), false),
        };
        let scoring = if body == "initial" {
            if with_lm {
                return Err(bad());
            }
            Scoring::Initial
        } else if let Some(v) = body.strip_suffix("-In") {
            Scoring::Influx(GraphVariant::parse(v).ok_or_else(bad)?)
        } else if let Some(v) = body.strip_prefix("hits-auth:") {
            Scoring::HitsAuth(GraphVariant::parse(v).ok_or_else(bad)?)
        } else if let Some(v) = body.strip_prefix("hits-hub:") {
            Scoring::HitsHub(GraphVariant::parse(v).ok_or_else(bad)?)
        } else if let Some(k) = body.strip_prefix("prior:") {
            if !with_lm {
                return Err(Error::Config(format!("prior algorithms need `+LM`: `{s}`")));
            }
            Scoring::Prior(k.parse().map_err(|_| bad())?)
        } else {
            return Err(bad());
        };
        Ok(Algorithm { scoring, with_lm })
    }
}

/// One fully specified re-ranking run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RerankConfig {
    pub algorithm: Algorithm,
    pub alpha: Option<usize>,
    pub lambda: Option<f64>,
    pub mu: f64,
    pub link_mode: LinkMode,
}

impl RerankConfig {
    pub fn validate(&self) -> Result<()> {
        let name = self.algorithm;
        if self.algorithm.needs_graph() && self.alpha.is_none() {
            return Err(Error::Config(format!("{name} needs alpha")));
        }
        match (self.algorithm.needs_lambda(), self.lambda) {
            (true, None) => Err(Error::Config(format!("{name} needs lambda"))),
            (false, Some(_)) => Err(Error::Config(format!("{name} takes no lambda"))),
            _ => Ok(()),
        }
    }

    /// Builds the graph over `d_init` (when needed) and re-ranks it.
    pub fn rerank(&self, d_init: &RankedList, corpus: &Corpus, opts: IterationOptions) -> Result<RankedList> {
        self.validate()?;
        let nodes: Vec<DocId> = d_init.docs().collect();
        let scores = match self.algorithm.scoring {
            Scoring::Initial => return Ok(d_init.clone()),
            Scoring::Prior(kind) => prior_scores(&nodes, corpus, kind)?,
            _ => {
                let variant = self.algorithm.graph_variant().expect("graph algorithm");
                let scorer = LinkScorer {
                    mode: self.link_mode,
                    mu: self.mu,
                };
                let pairs = scorer.pair_scores(&nodes, corpus)?;
                let mut graph = build_graph(&pairs, self.alpha.expect("validated"), variant.weighting())?;
                if let Some(lambda) = self.lambda {
                    graph = smooth(&graph, lambda)?;
                }
                self.algorithm.centrality(&graph, opts)?
            }
        };
        self.algorithm.apply(d_init, &scores)
    }
}

/// Convenience: initial retrieval of `k` documents followed by re-ranking.
pub fn retrieve_and_rerank(
    query: &Query,
    corpus: &Corpus,
    k: usize,
    config: &RerankConfig,
    opts: IterationOptions,
) -> Result<RankedList> {
    let d_init = crate::retrieval::initial_rank(query, corpus, config.mu, k)?;
    if d_init.is_empty() {
        return Ok(d_init);
    }
    config.rerank(&d_init, corpus, opts)
}
