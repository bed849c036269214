use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::centrality::IterationOptions;
use crate::corpus::CorpusFormat;
use crate::error::{Error, Result};
use crate::eval::Metric;
use crate::graph::{LinkMode, DEFAULT_ALPHA_GRID, DEFAULT_LAMBDA_GRID};
use crate::rerank::Algorithm;
use crate::retrieval::{DEFAULT_DINIT, DEFAULT_MU_GRID, TUNING_DEPTH};

/// Largest corpus accepted in full-corpus mode.
pub const DEFAULT_FULL_CORPUS_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Graphs over the top `dinit` documents.
    Rerank,
    /// Graphs over the whole corpus.
    FullCorpus,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rerank" => Ok(Mode::Rerank),
            "full-corpus" => Ok(Mode::FullCorpus),
            _ => Err(Error::Config(format!("unknown mode `{s}` (expected rerank or full-corpus)"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Rerank => "rerank",
            Mode::FullCorpus => "full-corpus",
        })
    }
}

/// Contents of a TOML config file; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub corpus: Option<PathBuf>,
    pub format: Option<String>,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub dinit: Option<usize>,
    pub mu_grid: Option<Vec<f64>>,
    pub alpha_grid: Option<Vec<usize>>,
    pub lambda_grid: Option<Vec<f64>>,
    pub algorithms: Option<Vec<String>>,
    pub link_mode: Option<LinkMode>,
    pub target: Option<String>,
    pub mode: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub full_corpus_cap: Option<usize>,
    pub tuning_depth: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))
    }

    /// Reads a config file. Relative input paths are taken relative to the
    /// file, the output directory relative to the working directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut file = Self::parse(&text).map_err(|e| e.context(path.display().to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut file.corpus, &mut file.queries, &mut file.qrels]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(file)
    }

    /// Command-line values win over file values.
    pub fn merge(mut self, overrides: ConfigFile) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if overrides.$field.is_some() {
                    self.$field = overrides.$field;
                })*
            };
        }
        take!(
            corpus, format, queries, qrels, dinit, mu_grid, alpha_grid, lambda_grid, algorithms, link_mode,
            target, mode, out, seed, full_corpus_cap, tuning_depth, tol, max_iter
        );
        self
    }
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    pub format: CorpusFormat,
    pub queries: PathBuf,
    pub qrels: PathBuf,
    pub dinit: usize,
    pub mu_grid: Vec<f64>,
    pub alpha_grid: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub link_mode: LinkMode,
    /// Metric the (alpha, lambda) sweep maximizes.
    pub target: Metric,
    pub mode: Mode,
    pub out: PathBuf,
    /// Only used by randomized tests; the pipeline itself draws no random numbers.
    pub seed: u64,
    pub full_corpus_cap: usize,
    pub tuning_depth: usize,
    pub iteration: IterationOptions,
}

impl ExperimentConfig {
    /// Defaults for everything except the input and output locations.
    pub fn new(corpus: PathBuf, queries: PathBuf, qrels: PathBuf, out: PathBuf) -> Self {
        ExperimentConfig {
            corpus,
            format: CorpusFormat::Jsonl,
            queries,
            qrels,
            dinit: DEFAULT_DINIT,
            mu_grid: DEFAULT_MU_GRID.to_vec(),
            alpha_grid: DEFAULT_ALPHA_GRID.to_vec(),
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            algorithms: Algorithm::influx_family(),
            link_mode: LinkMode::LmGeneration,
            target: Metric::PREC5,
            mode: Mode::Rerank,
            out,
            seed: 0,
            full_corpus_cap: DEFAULT_FULL_CORPUS_CAP,
            tuning_depth: TUNING_DEPTH,
            iteration: IterationOptions::default(),
        }
    }

    pub fn from_file(file: ConfigFile) -> Result<Self> {
        let missing = |key: &str| Error::Config(format!("`{key}` is required"));
        let mut config = ExperimentConfig::new(
            file.corpus.ok_or_else(|| missing("corpus"))?,
            file.queries.ok_or_else(|| missing("queries"))?,
            file.qrels.ok_or_else(|| missing("qrels"))?,
            file.out.unwrap_or_else(|| PathBuf::from("out")),
        );
        if let Some(format) = file.format {
            config.format = format.parse()?;
        }
        if let Some(names) = file.algorithms {
            config.algorithms = parse_algorithms(names.iter().map(String::as_str))?;
        }
        if let Some(target) = file.target {
            config.target = target.parse()?;
        }
        if let Some(mode) = file.mode {
            config.mode = mode.parse()?;
        }
        config.dinit = file.dinit.unwrap_or(config.dinit);
        config.mu_grid = file.mu_grid.unwrap_or(config.mu_grid);
        config.alpha_grid = file.alpha_grid.unwrap_or(config.alpha_grid);
        config.lambda_grid = file.lambda_grid.unwrap_or(config.lambda_grid);
        config.link_mode = file.link_mode.unwrap_or(config.link_mode);
        config.seed = file.seed.unwrap_or(config.seed);
        config.full_corpus_cap = file.full_corpus_cap.unwrap_or(config.full_corpus_cap);
        config.tuning_depth = file.tuning_depth.unwrap_or(config.tuning_depth);
        config.iteration.tol = file.tol.unwrap_or(config.iteration.tol);
        config.iteration.max_iter = file.max_iter.unwrap_or(config.iteration.max_iter);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.dinit < 2 {
            return bad(format!("dinit must be at least 2, got {}", self.dinit));
        }
        if self.mu_grid.is_empty() || self.alpha_grid.is_empty() || self.lambda_grid.is_empty() {
            return bad("parameter grids must be non-empty".into());
        }
        if let Some(mu) = self.mu_grid.iter().find(|&&mu| !(mu > 0.0 && mu.is_finite())) {
            return bad(format!("mu must be positive, got {mu}"));
        }
        if self.alpha_grid.contains(&0) {
            return bad("alpha must be at least 1".into());
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return bad(format!("lambda must be in [0, 1), got {l}"));
        }
        if self.tuning_depth == 0 || self.full_corpus_cap < 2 {
            return bad("tuning_depth and full_corpus_cap must be positive".into());
        }
        if !(self.iteration.tol > 0.0) || self.iteration.max_iter == 0 {
            return bad("tol and max_iter must be positive".into());
        }
        Ok(())
    }
}

/// Parses a list of algorithm names, dropping duplicates.
pub fn parse_algorithms<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<Vec<Algorithm>> {
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for name in names {
        let name = name.trim();
        if name.is_empty() {
            continue;
        }
        let a: Algorithm = name.parse()?;
        if !algorithms.contains(&a) {
            algorithms.push(a);
        }
    }
    Ok(algorithms)
}
