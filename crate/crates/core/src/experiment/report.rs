use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::{ExperimentConfig, Mode};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::eval::{Metric, MetricReport};
use crate::graph::LinkMode;
use crate::rerank::Algorithm;
use crate::retrieval::RankedList;
use crate::trec::write_run;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowKind {
    Initial,
    UpperBound,
    OptimizedBaseline,
    Algorithm(Algorithm),
}

impl RowKind {
    pub fn name(&self) -> String {
        match self {
            RowKind::Initial => "init".into(),
            RowKind::UpperBound => "upper-bound".into(),
            RowKind::OptimizedBaseline => "opt-baseline".into(),
            RowKind::Algorithm(a) => a.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub kind: RowKind,
    /// Selected parameters, for algorithms that take them.
    pub alpha: Option<usize>,
    pub lambda: Option<f64>,
    /// Mean target metric at the selected setting.
    pub sweep_value: Option<f64>,
    /// One report per metric in [`Metric::REPORTED`] order.
    pub metrics: Vec<MetricReport>,
}

impl ReportRow {
    pub(crate) fn reference(kind: RowKind, metrics: Vec<MetricReport>) -> Self {
        ReportRow {
            kind,
            alpha: None,
            lambda: None,
            sweep_value: None,
            metrics,
        }
    }

    pub fn name(&self) -> String {
        self.kind.name()
    }

    pub fn metric(&self, metric: Metric) -> Option<&MetricReport> {
        self.metrics.iter().find(|r| r.metric == metric)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub mode: Mode,
    pub link_mode: LinkMode,
    pub target: Metric,
    /// Dirichlet parameter of the initial ranking and the link scores.
    pub mu: f64,
    /// Size of the re-ranking set.
    pub dinit: usize,
    /// Per-metric mu of the optimized baseline.
    pub baseline_mus: Vec<(Metric, f64)>,
    pub qids: Vec<String>,
    /// Queries without relevant documents, left out of every mean.
    pub skipped_queries: usize,
    pub rows: Vec<ReportRow>,
    /// Run tag and per-query rankings.
    pub runs: Vec<(String, Vec<RankedList>)>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn run_file_name(tag: &str) -> String {
    let safe: String = tag
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect();
    format!("{safe}.run")
}

impl ExperimentReport {
    pub(crate) fn new(config: &ExperimentConfig, mu: f64, dinit: usize, qids: Vec<String>, skipped: usize) -> Self {
        ExperimentReport {
            mode: config.mode,
            link_mode: config.link_mode,
            target: config.target,
            mu,
            dinit,
            baseline_mus: Vec::new(),
            qids,
            skipped_queries: skipped,
            rows: Vec::new(),
            runs: Vec::new(),
        }
    }

    pub fn row(&self, name: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.name() == name)
    }

    pub fn mean(&self, name: &str, metric: Metric) -> Option<f64> {
        Some(self.row(name)?.metric(metric)?.mean)
    }

    /// One row per system: selected parameters, metric means and significance markers.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("algorithm\talpha\tlambda");
        for m in Metric::REPORTED {
            write!(out, "\t{m}\t{m} sig").unwrap();
        }
        out.push('\n');
        for row in &self.rows {
            write!(out, "{}\t{}\t{}", row.name(), opt(row.alpha), opt(row.lambda)).unwrap();
            for r in &row.metrics {
                write!(out, "\t{:.4}\t{}", r.mean, r.markers()).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Aligned table; `i` and `o` mark significant differences from the
    /// initial ranking and the optimized baseline.
    pub fn to_text(&self) -> String {
        let names: Vec<String> = self.rows.iter().map(ReportRow::name).collect();
        let width = names.iter().map(String::len).max().unwrap_or(0).max("algorithm".len()) + 2;
        let mut out = format!("{:<width$}", "algorithm");
        for m in Metric::REPORTED {
            write!(out, "{:<10}", m.to_string()).unwrap();
        }
        out = out.trim_end().to_owned();
        out.push('\n');
        for (row, name) in self.rows.iter().zip(&names) {
            let mut line = format!("{name:<width$}");
            for r in &row.metrics {
                write!(line, "{:<10}", format!("{:.4}{}", r.mean, r.markers())).unwrap();
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    /// Everything needed to reproduce the run.
    pub fn params_tsv(&self) -> String {
        let link = match self.link_mode {
            LinkMode::LmGeneration => "lm-generation",
            LinkMode::CosineLogTfidf => "cosine-log-tfidf",
        };
        let mut out = String::new();
        writeln!(out, "mode\t{}", self.mode).unwrap();
        writeln!(out, "mu\t{}", self.mu).unwrap();
        writeln!(out, "dinit\t{}", self.dinit).unwrap();
        writeln!(out, "link_mode\t{link}").unwrap();
        writeln!(out, "target\t{}", self.target).unwrap();
        writeln!(out, "queries\t{}", self.qids.len()).unwrap();
        writeln!(out, "skipped_queries\t{}", self.skipped_queries).unwrap();
        for (m, mu) in &self.baseline_mus {
            writeln!(out, "opt-baseline mu {m}\t{mu}").unwrap();
        }
        out.push_str("\nalgorithm\talpha\tlambda\tsweep mean\n");
        for row in self.rows.iter().filter(|r| r.sweep_value.is_some()) {
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}",
                row.name(),
                opt(row.alpha),
                opt(row.lambda),
                row.sweep_value.unwrap_or_default()
            )
            .unwrap();
        }
        out
    }

    pub fn per_query_tsv(&self) -> String {
        let mut out = String::from("algorithm\tmetric\tqid\tvalue\n");
        for row in &self.rows {
            for r in &row.metrics {
                for (qid, v) in &r.per_query {
                    writeln!(out, "{}\t{}\t{qid}\t{v:.6}", row.name(), r.metric).unwrap();
                }
            }
        }
        out
    }

    /// Writes `report.tsv`, `report.txt`, `params.tsv`, `per_query.tsv` and
    /// one TREC run file per system under `runs/`.
    pub fn write(&self, dir: &Path, corpus: &Corpus) -> Result<()> {
        let runs_dir = dir.join("runs");
        fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;
        let write = |name: &str, content: String| {
            let path = dir.join(name);
            fs::write(&path, content).map_err(|e| Error::io(&path, e))
        };
        write("report.tsv", self.to_tsv())?;
        write("report.txt", self.to_text())?;
        write("params.tsv", self.params_tsv())?;
        write("per_query.tsv", self.per_query_tsv())?;
        for (tag, lists) in &self.runs {
            let path = runs_dir.join(run_file_name(tag));
            let mut buf = Vec::new();
            for list in lists {
                write_run(&mut buf, list, corpus, tag).map_err(|e| Error::io(&path, e))?;
            }
            fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Metric means of the same systems under re-ranking and full-corpus graphs.
pub fn comparison_tsv(rerank: &ExperimentReport, full: &ExperimentReport) -> String {
    let mut out = String::from("algorithm\tmetric\trerank\tfull-corpus\tdifference\n");
    for row in &full.rows {
        let name = row.name();
        for r in &row.metrics {
            if let Some(base) = rerank.mean(&name, r.metric) {
                writeln!(out, "{name}\t{}\t{base:.4}\t{:.4}\t{:+.4}", r.metric, r.mean, r.mean - base).unwrap();
            }
        }
    }
    out
}
