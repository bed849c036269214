use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use genrank::centrality::IterationOptions;
use genrank::corpus::{load_corpus, load_queries, CorpusFormat};
use genrank::error::{Error, Result};
use genrank::experiment::{parse_algorithms, run_experiment, ConfigFile, ExperimentConfig};
use genrank::graph::{build_graph, smooth, write_tsv, EdgeWeighting, LinkMode, LinkScorer};
use genrank::rerank::{retrieve_and_rerank, RerankConfig};
use genrank::retrieval::{initial_rank, DEFAULT_DINIT};
use genrank::synthetic::{generate, SyntheticParams, DEFAULT_SEED};
use genrank::trec::write_run;

#[derive(Parser)]
#[command(name = "genrank", version, about = "Re-rank query-likelihood retrieval results by generation-graph centrality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full experiment: sweeps, reference rows and reports.
    Run(RunArgs),
    /// Write the synthetic test collection.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Retrieve (and optionally re-rank) queries at fixed parameters; writes a TREC run.
    Retrieve(RetrieveArgs),
    /// Dump one query's generation graph as TSV.
    GraphDump(GraphDumpArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// jsonl or trec-sgml
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Comma-separated algorithm names, e.g. `R-W-In+LM,U-In`.
    #[arg(long)]
    algorithms: Option<String>,
    #[arg(long)]
    dinit: Option<usize>,
    /// rerank or full-corpus
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "jsonl")]
    format: String,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 1000.0)]
    mu: f64,
}

#[derive(Args)]
struct RetrieveArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Documents per query.
    #[arg(long, default_value_t = DEFAULT_DINIT)]
    k: usize,
    /// Re-ranking algorithm; omit for the initial ranking.
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value = "lm")]
    link_mode: String,
    /// Run file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphDumpArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    qid: String,
    #[arg(long, default_value_t = DEFAULT_DINIT)]
    dinit: usize,
    #[arg(long)]
    alpha: usize,
    /// Edge weights: uniform or weighted.
    #[arg(long, default_value = "weighted")]
    weights: String,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value = "lm")]
    link_mode: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => run(args),
        Command::Synth { out, seed } => {
            generate(&SyntheticParams {
                seed,
                ..SyntheticParams::default()
            })?
            .write_to(&out)?;
            println!("wrote synthetic collection to {}", out.display());
            Ok(())
        }
        Command::Retrieve(args) => retrieve(args),
        Command::GraphDump(args) => graph_dump(args),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let algorithms = args
        .algorithms
        .as_deref()
        .map(|s| s.split(',').map(str::to_owned).collect::<Vec<_>>());
    if let Some(names) = &algorithms {
        parse_algorithms(names.iter().map(String::as_str))?;
    }
    let overrides = ConfigFile {
        corpus: args.corpus,
        format: args.format,
        queries: args.queries,
        qrels: args.qrels,
        algorithms,
        dinit: args.dinit,
        mode: args.mode,
        out: args.out,
        ..ConfigFile::default()
    };
    let config = ExperimentConfig::from_file(file.merge(overrides))?;
    let report = run_experiment(&config)?;
    print!("{}", report.to_text());
    println!("reports written to {}", config.out.display());
    Ok(())
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn retrieve(args: RetrieveArgs) -> Result<()> {
    let format: CorpusFormat = args.inputs.format.parse()?;
    let link_mode: LinkMode = args.link_mode.parse()?;
    let corpus = load_corpus(&args.inputs.corpus, format)?;
    let queries = load_queries(&args.inputs.queries)?;
    let config = match &args.algorithm {
        Some(name) => {
            let config = RerankConfig {
                algorithm: name.parse()?,
                alpha: args.alpha,
                lambda: args.lambda,
                mu: args.inputs.mu,
                link_mode,
            };
            config.validate()?;
            Some(config)
        }
        None => None,
    };
    let tag = args.algorithm.as_deref().unwrap_or("init");
    let mut out = output(&args.out)?;
    let io_err = |e| Error::io(args.out.clone().unwrap_or_else(|| "<stdout>".into()), e);
    for query in &queries {
        let list = match &config {
            Some(c) => retrieve_and_rerank(query, &corpus, args.k, c, IterationOptions::default())?,
            None => initial_rank(query, &corpus, args.inputs.mu, args.k)?,
        };
        write_run(&mut out, &list, &corpus, tag).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn graph_dump(args: GraphDumpArgs) -> Result<()> {
    let format: CorpusFormat = args.inputs.format.parse()?;
    let weighting = match args.weights.as_str() {
        "uniform" => EdgeWeighting::Uniform,
        "weighted" => EdgeWeighting::Weighted,
        other => return Err(Error::Config(format!("unknown edge weighting `{other}`"))),
    };
    let corpus = load_corpus(&args.inputs.corpus, format)?;
    let queries = load_queries(&args.inputs.queries)?;
    let query = queries
        .iter()
        .find(|q| q.qid == args.qid)
        .ok_or_else(|| Error::Config(format!("no query with id `{}`", args.qid)))?;
    let d_init = initial_rank(query, &corpus, args.inputs.mu, args.dinit)?;
    let nodes: Vec<_> = d_init.docs().collect();
    let scorer = LinkScorer {
        mode: args.link_mode.parse()?,
        mu: args.inputs.mu,
    };
    let mut graph = build_graph(&scorer.pair_scores(&nodes, &corpus)?, args.alpha, weighting)?;
    if let Some(lambda) = args.lambda {
        graph = smooth(&graph, lambda)?;
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    write_tsv(&graph, &corpus, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io("<stdout>", e))
}
