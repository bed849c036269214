//! Unigram language models: maximum-likelihood and Dirichlet-smoothed
//! estimates, entropy, KL divergence, and the KL-based generation score
//! `exp(-KL(mle(s) || p_d))`.
//!
//! All logs are natural logs. Generation scores are produced in log space
//! and only exponentiated by callers that need linear weights.

use crate::corpus::{Corpus, Document, TermCounts, TermId};
use crate::error::{Error, Result};

/// A sparse distribution over terms with strictly positive support.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDistribution {
    probs: Vec<(TermId, f64)>,
}

impl TermDistribution {
    /// Maximum-likelihood estimate from a token sequence.
    pub fn mle(tokens: &[TermId]) -> Result<Self> {
        Self::from_counts(&TermCounts::from_terms(tokens))
    }

    pub fn from_counts(counts: &TermCounts) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyText);
        }
        let total = counts.total() as f64;
        let probs = counts
            .iter()
            .map(|(t, c)| (t, f64::from(c) / total))
            .collect();
        Ok(TermDistribution { probs })
    }

    pub fn prob(&self, term: TermId) -> f64 {
        self.probs
            .binary_search_by_key(&term, |&(t, _)| t)
            .map_or(0.0, |i| self.probs[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, f64)> + '_ {
        self.probs.iter().copied()
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

pub fn mle(tokens: &[TermId]) -> Result<TermDistribution> {
    TermDistribution::mle(tokens)
}

/// Shannon entropy in nats.
pub fn entropy(dist: &TermDistribution) -> f64 {
    // Terms with p = 1 contribute exactly zero; keep the sum non-negative.
    let h: f64 = dist.iter().map(|(_, p)| -p * p.ln()).sum();
    h.max(0.0)
}

/// Dirichlet-smoothed model `(tf(w;x) + mu * p_C(w)) / (|x| + mu)`.
#[derive(Debug, Clone, Copy)]
pub struct DirichletModel<'a> {
    counts: &'a TermCounts,
    mu: f64,
    corpus: &'a Corpus,
}

impl<'a> DirichletModel<'a> {
    pub fn new(counts: &'a TermCounts, corpus: &'a Corpus, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be finite and >= 0, got {mu}")));
        }
        if counts.is_empty() && mu == 0.0 {
            return Err(Error::EmptyText);
        }
        Ok(DirichletModel { counts, mu, corpus })
    }

    pub fn for_document(doc: &'a Document, corpus: &'a Corpus, mu: f64) -> Result<Self> {
        Self::new(doc.counts(), corpus, mu)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn prob(&self, term: TermId) -> f64 {
        let tf = f64::from(self.counts.get(term));
        (tf + self.mu * self.corpus.collection_prob(term)) / (self.counts.total() as f64 + self.mu)
    }

    pub fn log_prob(&self, term: TermId) -> f64 {
        self.prob(term).ln()
    }

    fn term_name(&self, term: TermId) -> String {
        self.corpus.term(term).to_owned()
    }
}

/// `sum_w p(w) log(p(w) / q(w))`. Fails if `q` vanishes on the support of `p`.
pub fn kl_divergence(p: &TermDistribution, q: &DirichletModel<'_>) -> Result<f64> {
    let mut kl = 0.0;
    for (term, pw) in p.iter() {
        let qw = q.prob(term);
        if qw <= 0.0 {
            return Err(Error::ZeroProbability {
                term: q.term_name(term),
            });
        }
        kl += pw * (pw.ln() - qw.ln());
    }
    Ok(kl.max(0.0))
}

/// `log p^KL_d(s) = -KL(mle(s) || p^mu_d)`.
pub fn log_gen_prob(model: &DirichletModel<'_>, s: &TermDistribution) -> Result<f64> {
    Ok(-kl_divergence(s, model)?)
}

/// Generation score of the in-vocabulary token sequence `s` under `doc`'s
/// smoothed model. Terms unknown to the corpus must already be removed.
pub fn gen_prob(doc: &Document, s: &[TermId], corpus: &Corpus, mu: f64) -> Result<f64> {
    if mu <= 0.0 {
        return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
    }
    let model = DirichletModel::for_document(doc, corpus, mu)?;
    let dist = TermDistribution::mle(s)?;
    Ok(log_gen_prob(&model, &dist)?.exp())
}

/// Log of the geometric mean of the per-token probabilities of `s`:
/// `(1/|s|) sum_i log p(s_i)`.
pub fn log_geometric_mean_prob(model: &DirichletModel<'_>, s: &[TermId]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptyText);
    }
    let sum: f64 = s.iter().map(|&t| model.log_prob(t)).sum();
    Ok(sum / s.len() as f64)
}
