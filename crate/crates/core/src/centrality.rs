//! Centrality on generation graphs: influx, recursive influx and HITS.

use std::fmt;

use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::graph::{GenerationGraph, GraphKind};
use crate::rerank::PriorKind;

/// Tolerance on row sums when checking that a graph is row-stochastic.
const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    UIn,
    WIn,
    RUIn,
    RWIn,
    HitsAuth,
    HitsHub,
    /// A non-structural per-document prior standing in for centrality.
    Prior(PriorKind),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::UIn => f.write_str("U-In"),
            Method::WIn => f.write_str("W-In"),
            Method::RUIn => f.write_str("R-U-In"),
            Method::RWIn => f.write_str("R-W-In"),
            Method::HitsAuth => f.write_str("hits-auth"),
            Method::HitsHub => f.write_str("hits-hub"),
            Method::Prior(kind) => write!(f, "prior:{kind}"),
        }
    }
}

/// Stopping rule for the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    node_ids: Vec<DocId>,
    scores: Vec<f64>,
    pub method: Method,
    pub converged: bool,
    pub iterations: usize,
}

impl CentralityScores {
    /// Wraps externally computed scores (priors, test fixtures).
    pub fn from_values(node_ids: Vec<DocId>, scores: Vec<f64>, method: Method) -> Result<Self> {
        if node_ids.len() != scores.len() {
            return Err(Error::InvalidParameter("one score per node required".into()));
        }
        if scores.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidParameter("centrality scores must be finite and >= 0".into()));
        }
        Ok(CentralityScores {
            node_ids,
            scores,
            method,
            converged: true,
            iterations: 0,
        })
    }

    pub fn node_ids(&self) -> &[DocId] {
        &self.node_ids
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, doc: DocId) -> Option<f64> {
        self.node_ids
            .iter()
            .position(|&d| d == doc)
            .map(|i| self.scores[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (DocId, f64)> + '_ {
        self.node_ids.iter().copied().zip(self.scores.iter().copied())
    }
}

fn weighted(kind: GraphKind) -> bool {
    !matches!(kind, GraphKind::Uniform | GraphKind::CosineUniform)
}

/// Weighted in-degree: `In(d) = sum_o wt(o -> d)`.
pub fn influx(graph: &GenerationGraph) -> CentralityScores {
    let n = graph.len();
    let mut scores = vec![0.0; n];
    for o in 0..n {
        for (d, w) in graph.row(o).iter().enumerate() {
            scores[d] += w;
        }
    }
    CentralityScores {
        node_ids: graph.node_ids().to_vec(),
        scores,
        method: if weighted(graph.kind()) { Method::WIn } else { Method::UIn },
        converged: true,
        iterations: 0,
    }
}

fn check_stochastic(graph: &GenerationGraph) -> Result<()> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    for o in 0..graph.len() {
        let sum: f64 = graph.row(o).iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotStochastic(format!("row {o} sums to {sum}")));
        }
    }
    Ok(())
}

/// Stationary distribution `pi(d) = sum_o wt(o -> d) pi(o)`, `sum pi = 1`,
/// by power iteration from the uniform vector.
pub fn recursive_influx(graph: &GenerationGraph, opts: IterationOptions) -> Result<CentralityScores> {
    check_stochastic(graph)?;
    let n = graph.len();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        next.fill(0.0);
        for (o, &p) in pi.iter().enumerate() {
            for (d, w) in graph.row(o).iter().enumerate() {
                next[d] += w * p;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let change: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("recursive influx stopped after {iterations} iterations without converging");
    }
    Ok(CentralityScores {
        node_ids: graph.node_ids().to_vec(),
        scores: pi,
        method: if weighted(graph.kind()) { Method::RWIn } else { Method::RUIn },
        converged,
        iterations,
    })
}

fn normalize_l2(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// HITS authority and hub scores, each with unit L2 norm.
pub fn hits(graph: &GenerationGraph, opts: IterationOptions) -> Result<(CentralityScores, CentralityScores)> {
    let n = graph.len();
    if n == 0 || graph.weights().iter().all(|&w| w == 0.0) {
        return Err(Error::EmptyGraph);
    }
    let mut hub = vec![1.0; n];
    normalize_l2(&mut hub);
    let mut auth = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut new_auth = vec![0.0; n];
        for (o, &h) in hub.iter().enumerate() {
            for (d, w) in graph.row(o).iter().enumerate() {
                new_auth[d] += w * h;
            }
        }
        normalize_l2(&mut new_auth);
        let mut new_hub: Vec<f64> = (0..n)
            .map(|o| graph.row(o).iter().zip(&new_auth).map(|(w, a)| w * a).sum())
            .collect();
        normalize_l2(&mut new_hub);
        let change = l2_distance(&new_auth, &auth).max(l2_distance(&new_hub, &hub));
        auth = new_auth;
        hub = new_hub;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("HITS stopped after {iterations} iterations without converging");
    }
    let wrap = |scores, method| CentralityScores {
        node_ids: graph.node_ids().to_vec(),
        scores,
        method,
        converged,
        iterations,
    };
    Ok((wrap(auth, Method::HitsAuth), wrap(hub, Method::HitsHub)))
}
