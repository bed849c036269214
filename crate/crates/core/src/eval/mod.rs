//! Relevance judgments, ranking metrics and significance testing.

mod metrics;
mod wilcoxon;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use crate::corpus::{Corpus, DocId};
use crate::error::{Error, Result};

pub use metrics::{
    avg_prec, mean, prec_at_k, reciprocal_rank, rerank_upper_bound, upper_bound_ranking, Metric,
};
pub use wilcoxon::{wilcoxon_two_sided, WilcoxonResult, EXACT_MAX_N, MIN_NONZERO};

/// TREC relevance judgments. Grades of 1 or more count as relevant.
#[derive(Debug, Clone, Default)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn grade(&self, qid: &str, doc: &str) -> Option<u32> {
        self.judgments.get(qid)?.get(doc).copied()
    }

    pub fn qids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    /// Resolves one query's judgments against `corpus`. Relevant documents
    /// missing from the corpus still count toward the relevant total.
    pub fn judgments_for(&self, qid: &str, corpus: &Corpus) -> QueryJudgments {
        let mut relevant = HashSet::new();
        let mut num_relevant = 0;
        if let Some(docs) = self.judgments.get(qid) {
            for (name, &grade) in docs {
                if grade >= 1 {
                    num_relevant += 1;
                    if let Some(id) = corpus.doc_by_name(name) {
                        relevant.insert(id);
                    }
                }
            }
        }
        QueryJudgments {
            relevant,
            num_relevant,
        }
    }
}

/// Binary relevance for one query, keyed by corpus doc id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryJudgments {
    relevant: HashSet<DocId>,
    num_relevant: usize,
}

impl QueryJudgments {
    pub fn new(relevant: impl IntoIterator<Item = DocId>) -> Self {
        let relevant: HashSet<DocId> = relevant.into_iter().collect();
        let num_relevant = relevant.len();
        QueryJudgments {
            relevant,
            num_relevant,
        }
    }

    pub fn is_relevant(&self, doc: DocId) -> bool {
        self.relevant.contains(&doc)
    }

    /// R, the number of relevant documents judged for the query.
    pub fn num_relevant(&self) -> usize {
        self.num_relevant
    }
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<Qrels> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_qrels(&content, &path.display().to_string())
}

/// Parses `qid 0 docname grade` lines.
pub fn parse_qrels(content: &str, origin: &str) -> Result<Qrels> {
    let mut qrels = Qrels::default();
    for (i, line) in content.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let location = || format!("{origin}:{}", i + 1);
        let [qid, _iteration, doc, grade] = fields[..] else {
            return Err(Error::parse(location(), "expected `qid iter docname grade`"));
        };
        let grade: u32 = grade
            .parse()
            .map_err(|_| Error::parse(location(), format!("invalid grade `{grade}`")))?;
        let previous = qrels
            .judgments
            .entry(qid.to_owned())
            .or_default()
            .insert(doc.to_owned(), grade);
        if previous.is_some() {
            return Err(Error::DuplicateJudgment {
                qid: qid.to_owned(),
                doc: doc.to_owned(),
            }
            .context(location()));
        }
    }
    Ok(qrels)
}

/// Per-query values of one metric for one system.
#[derive(Debug, Clone)]
pub struct MetricReport {
    pub metric: Metric,
    pub per_query: Vec<(String, f64)>,
    pub mean: f64,
    /// Baseline label and test outcome, e.g. `("i", ...)` for the initial ranking.
    pub significance: Vec<(String, WilcoxonResult)>,
}

impl MetricReport {
    pub fn new(metric: Metric, per_query: Vec<(String, f64)>) -> Self {
        let values: Vec<f64> = per_query.iter().map(|(_, v)| *v).collect();
        MetricReport {
            metric,
            mean: mean(&values),
            per_query,
            significance: Vec::new(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.per_query.iter().map(|(_, v)| *v).collect()
    }

    /// Runs the two-sided test against `baseline` and records it under `label`.
    pub fn compare(&mut self, label: &str, baseline: &MetricReport) -> Result<&WilcoxonResult> {
        let result = wilcoxon_two_sided(&self.values(), &baseline.values())?;
        self.significance.push((label.to_owned(), result));
        Ok(&self.significance.last().expect("just pushed").1)
    }

    /// Concatenated labels of the baselines this system differs from significantly.
    pub fn markers(&self) -> String {
        self.significance
            .iter()
            .filter(|(_, r)| r.significant)
            .map(|(label, _)| label.as_str())
            .collect()
    }
}
