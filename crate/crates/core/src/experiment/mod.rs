//! End-to-end experiments: initial retrieval, (alpha, lambda) sweeps for
//! every algorithm, reference rows and report files.

mod config;
mod report;

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs;

use log::{info, warn};
use rayon::prelude::*;

use crate::centrality::CentralityScores;
use crate::corpus::{load_corpus, load_queries, Corpus, DocId, Query};
use crate::error::{Error, Result, ResultExt};
use crate::eval::{load_qrels, rerank_upper_bound, Metric, MetricReport, QueryJudgments, Qrels};
use crate::graph::{build_graph, smooth, EdgeWeighting, LinkScorer, PairScores};
use crate::rerank::{prior_scores, Algorithm, Scoring};
use crate::retrieval::{initial_rank, judged_queries, optimized_baseline, tune_mu, RankedList};

pub use config::{parse_algorithms, ConfigFile, ExperimentConfig, Mode, DEFAULT_FULL_CORPUS_CAP};
pub use report::{comparison_tsv, ExperimentReport, ReportRow, RowKind};

/// Corpus, queries and judgments of one test collection.
#[derive(Debug, Clone)]
pub struct Collection {
    pub corpus: Corpus,
    pub queries: Vec<Query>,
    pub qrels: Qrels,
}

impl Collection {
    pub fn load(config: &ExperimentConfig) -> Result<Self> {
        Ok(Collection {
            corpus: load_corpus(&config.corpus, config.format)?,
            queries: load_queries(&config.queries)?,
            qrels: load_qrels(&config.qrels)?,
        })
    }
}

/// One point of an algorithm's parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Setting {
    alpha: Option<usize>,
    lambda: Option<f64>,
}

fn settings(algorithm: &Algorithm, alphas: &[usize], lambdas: &[f64]) -> Vec<Setting> {
    if !algorithm.needs_graph() {
        return vec![Setting {
            alpha: None,
            lambda: None,
        }];
    }
    let lambdas: Vec<Option<f64>> = if algorithm.needs_lambda() {
        lambdas.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    alphas
        .iter()
        .flat_map(|&a| {
            lambdas.iter().map(move |&lambda| Setting {
                alpha: Some(a),
                lambda,
            })
        })
        .collect()
}

type CacheKey = (Scoring, usize, Option<u64>);

fn cache_key(algorithm: &Algorithm, setting: Setting) -> CacheKey {
    (algorithm.scoring, setting.alpha.unwrap_or(0), setting.lambda.map(f64::to_bits))
}

/// Algorithms (with their lambda) grouped by the unsmoothed graph they need.
type GraphJobs = HashMap<(EdgeWeighting, usize), Vec<(Algorithm, Option<f64>)>>;

/// Per-query state shared by every algorithm and setting.
struct QueryRun<'a> {
    query: &'a Query,
    judgments: QueryJudgments,
    d_init: RankedList,
    centrality: HashMap<CacheKey, CentralityScores>,
}

impl<'a> QueryRun<'a> {
    fn nodes(&self) -> Vec<DocId> {
        self.d_init.docs().collect()
    }

    /// Fills the centrality cache for every algorithm and setting.
    fn prepare(
        &mut self,
        corpus: &Corpus,
        config: &ExperimentConfig,
        plan: &[(Algorithm, Vec<Setting>)],
        scorer: &LinkScorer,
    ) -> Result<()> {
        if self.d_init.len() < 2 {
            return Ok(());
        }
        let nodes = self.nodes();
        let needs_graph = plan.iter().any(|(a, _)| a.needs_graph());
        let pairs: Option<PairScores> = if needs_graph {
            Some(scorer.pair_scores(&nodes, corpus).with_context(|| format!("query {}", self.query.qid))?)
        } else {
            None
        };
        // one graph per (weighting, alpha), one smoothing per lambda
        let mut graph_jobs: GraphJobs = HashMap::new();
        for (algorithm, points) in plan {
            match algorithm.scoring {
                Scoring::Initial => {}
                Scoring::Prior(kind) => {
                    let key = cache_key(algorithm, points[0]);
                    if let Entry::Vacant(slot) = self.centrality.entry(key) {
                        slot.insert(prior_scores(&nodes, corpus, kind)?);
                    }
                }
                _ => {
                    let variant = algorithm.graph_variant().expect("graph algorithm");
                    for p in points {
                        let jobs = graph_jobs
                            .entry((variant.weighting(), p.alpha.expect("graph setting")))
                            .or_default();
                        if !jobs.contains(&(*algorithm, p.lambda)) {
                            jobs.push((*algorithm, p.lambda));
                        }
                    }
                }
            }
        }
        let mut graph_keys: Vec<_> = graph_jobs.keys().copied().collect();
        graph_keys.sort_by_key(|&(w, a)| (w == EdgeWeighting::Weighted, a));
        let pairs = pairs.as_ref();
        for key in graph_keys {
            let (weighting, alpha) = key;
            let graph = build_graph(pairs.expect("pair scores"), alpha, weighting)?;
            let mut smoothed = HashMap::new();
            for &(algorithm, lambda) in &graph_jobs[&key] {
                let setting = Setting {
                    alpha: Some(alpha),
                    lambda,
                };
                let cache = cache_key(&algorithm, setting);
                if self.centrality.contains_key(&cache) {
                    continue;
                }
                let context = || {
                    format!(
                        "algorithm {algorithm}, query {}, alpha {alpha}, lambda {}",
                        self.query.qid,
                        lambda.map_or("-".into(), |l| l.to_string())
                    )
                };
                let scores = match lambda {
                    Some(l) => {
                        if let Entry::Vacant(slot) = smoothed.entry(l.to_bits()) {
                            slot.insert(smooth(&graph, l).with_context(context)?);
                        }
                        algorithm.centrality(&smoothed[&l.to_bits()], config.iteration)
                    }
                    None => algorithm.centrality(&graph, config.iteration),
                }
                .with_context(context)?;
                self.centrality.insert(cache, scores);
            }
        }
        Ok(())
    }

    fn ranking(&self, algorithm: &Algorithm, setting: Setting) -> Result<RankedList> {
        if algorithm.scoring == Scoring::Initial || self.d_init.len() < 2 {
            return Ok(self.d_init.clone());
        }
        let scores = &self.centrality[&cache_key(algorithm, setting)];
        algorithm.apply(&self.d_init, scores)
    }

    fn evaluate(&self, algorithm: &Algorithm, setting: Setting, metrics: &[Metric]) -> Result<Vec<f64>> {
        let ranked = self.ranking(algorithm, setting)?;
        Ok(metrics.iter().map(|m| m.evaluate(&ranked, &self.judgments)).collect())
    }
}

/// Alpha grid with values capped at `nodes - 1`, deduplicated and sorted.
fn capped_alphas(grid: &[usize], nodes: usize) -> Vec<usize> {
    let mut alphas: Vec<usize> = grid.iter().map(|&a| a.min(nodes.saturating_sub(1)).max(1)).collect();
    alphas.sort_unstable();
    alphas.dedup();
    alphas
}

fn sorted_lambdas(grid: &[f64]) -> Vec<f64> {
    let mut lambdas = grid.to_vec();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    lambdas
}

/// Runs every configured algorithm on a loaded collection with graphs over
/// the top `dinit` documents.
pub fn run_on(config: &ExperimentConfig, data: &Collection, dinit: usize) -> Result<ExperimentReport> {
    config.validate()?;
    let corpus = &data.corpus;
    let judged = judged_queries(&data.queries, corpus, &data.qrels)?;
    let skipped = data.queries.len() - judged.len();
    let mu = tune_mu(&data.queries, corpus, &data.qrels, &config.mu_grid, config.tuning_depth)?;
    info!("mu = {mu}");

    let nodes = dinit.min(corpus.len());
    let alphas = capped_alphas(&config.alpha_grid, nodes);
    let lambdas = sorted_lambdas(&config.lambda_grid);
    let algorithms: Vec<Algorithm> =
        config.algorithms.iter().copied().filter(|a| *a != Algorithm::INITIAL).collect();
    let plan: Vec<(Algorithm, Vec<Setting>)> = algorithms
        .iter()
        .map(|a| (*a, settings(a, &alphas, &lambdas)))
        .collect();
    let scorer = LinkScorer {
        mode: config.link_mode,
        mu,
    };
    let target = [config.target];

    let runs: Vec<QueryRun> = judged
        .into_par_iter()
        .map(|(query, judgments)| {
            let d_init = initial_rank(query, corpus, mu, nodes)?;
            if d_init.len() < 2 {
                warn!("query {} retrieved fewer than two documents; algorithms keep its initial order", query.qid);
            }
            let mut run = QueryRun {
                query,
                judgments,
                d_init,
                centrality: HashMap::new(),
            };
            run.prepare(corpus, config, &plan, &scorer)?;
            Ok(run)
        })
        .collect::<Result<_>>()?;
    let qids: Vec<String> = runs.iter().map(|r| r.query.qid.clone()).collect();

    let per_query = |values: Vec<f64>| qids.iter().cloned().zip(values).collect::<Vec<_>>();
    let metric_reports = |f: &dyn Fn(&QueryRun, Metric) -> Result<f64>| -> Result<Vec<MetricReport>> {
        Metric::REPORTED
            .iter()
            .map(|&m| {
                let values = runs.iter().map(|r| f(r, m)).collect::<Result<Vec<_>>>()?;
                Ok(MetricReport::new(m, per_query(values)))
            })
            .collect()
    };

    let mut report = ExperimentReport::new(config, mu, nodes, qids.clone(), skipped);

    let initial = metric_reports(&|r, m| Ok(m.evaluate(&r.d_init, &r.judgments)))?;
    let upper = metric_reports(&|r, m| Ok(rerank_upper_bound(&r.d_init, &r.judgments, m)))?;
    let mut optimized = Vec::new();
    for m in Metric::REPORTED {
        let (mu_m, values) = optimized_baseline(&data.queries, corpus, &data.qrels, m, &config.mu_grid)?;
        report.baseline_mus.push((m, mu_m));
        optimized.push(MetricReport::new(m, per_query(values)));
    }
    report.runs.push(("init".into(), runs.iter().map(|r| r.d_init.clone()).collect()));
    report.rows.push(ReportRow::reference(RowKind::Initial, initial.clone()));
    report.rows.push(ReportRow::reference(RowKind::UpperBound, upper));
    report.rows.push(ReportRow::reference(RowKind::OptimizedBaseline, optimized.clone()));

    for (algorithm, points) in &plan {
        // sweep on the target metric; settings are in ascending (alpha, lambda)
        // order, so a strict improvement test keeps the smaller values on ties
        let mut best: Option<(Setting, f64)> = None;
        for &setting in points {
            let values = runs
                .iter()
                .map(|r| r.evaluate(algorithm, setting, &target).map(|v| v[0]))
                .collect::<Result<Vec<f64>>>()?;
            let mean = crate::eval::mean(&values);
            if best.is_none_or(|(_, b)| mean > b) {
                best = Some((setting, mean));
            }
        }
        let (setting, sweep_value) = best.expect("at least one setting");
        let rankings = runs
            .iter()
            .map(|r| r.ranking(algorithm, setting))
            .collect::<Result<Vec<_>>>()?;
        let mut metrics: Vec<MetricReport> = Metric::REPORTED
            .iter()
            .map(|&m| {
                MetricReport::new(
                    m,
                    per_query(rankings.iter().zip(&runs).map(|(l, r)| m.evaluate(l, &r.judgments)).collect()),
                )
            })
            .collect();
        for ((row, init), opt) in metrics.iter_mut().zip(&initial).zip(&optimized) {
            row.compare("i", init)?;
            row.compare("o", opt)?;
        }
        report.rows.push(ReportRow {
            kind: RowKind::Algorithm(*algorithm),
            alpha: setting.alpha,
            lambda: setting.lambda,
            sweep_value: Some(sweep_value),
            metrics,
        });
        report.runs.push((algorithm.to_string(), rankings));
    }
    Ok(report)
}

/// Loads the collection, runs the configured mode and writes all report
/// files into `config.out`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let data = Collection::load(config)?;
    match config.mode {
        Mode::Rerank => {
            let report = run_on(config, &data, config.dinit)?;
            report.write(&config.out, &data.corpus)?;
            Ok(report)
        }
        Mode::FullCorpus => {
            let (full, rerank) = run_full_corpus(config, &data)?;
            full.write(&config.out, &data.corpus)?;
            let path = config.out.join("comparison.tsv");
            fs::write(&path, comparison_tsv(&rerank, &full)).map_err(|e| Error::io(&path, e))?;
            Ok(full)
        }
    }
}

/// Full-corpus graphs, plus the regular re-ranking run for comparison.
/// Returns `(full_corpus, rerank)`.
pub fn run_full_corpus(config: &ExperimentConfig, data: &Collection) -> Result<(ExperimentReport, ExperimentReport)> {
    let n = data.corpus.len();
    if n > config.full_corpus_cap {
        return Err(Error::Config(format!(
            "full-corpus mode needs an {n} x {n} score matrix; the corpus exceeds the cap of {} documents",
            config.full_corpus_cap
        )));
    }
    let full = run_on(config, data, n)?;
    let rerank = run_on(config, data, config.dinit)?;
    Ok((full, rerank))
}
