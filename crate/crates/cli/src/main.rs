mod bundle;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flexh_core::abstraction::{build_hierarchy, selective_abstract};
use flexh_core::activity_tree::{tree_flat, tree_from_labels, tree_random, ActivityTree, DEFAULT_MAX_SIZE};
use flexh_core::discovery::MinerConfig;
use flexh_core::event_log::{parse_csv, parse_xes, CsvConfig, EventLog, LogFormat};
use flexh_core::quality::{evaluate_hierarchical, Budget, QualityConfig, QualityReport};
use log::{info, warn};

use crate::bundle::Manifest;

#[derive(Parser)]
#[command(name = "flexh", version, about = "Hierarchical process discovery from event logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for the random tree and for cross-validation folds.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build an activity tree and write tree.json and tree.dot.
    Tree {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        tree: TreeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mine one model per subprocess and write the model bundle.
    Discover {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        tree: TreeArgs,
        #[command(flatten)]
        miner: MinerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate an existing model bundle and write report.json and report.txt.
    Evaluate {
        /// Bundle directory written by `discover`.
        #[arg(long)]
        bundle: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Discover, then evaluate the resulting bundle.
    Run {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        tree: TreeArgs,
        #[command(flatten)]
        miner: MinerArgs,
        #[command(flatten)]
        eval: EvalArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Event log, CSV or XES.
    #[arg(long)]
    input: PathBuf,
    /// Log format; inferred from the file extension when omitted.
    #[arg(long)]
    format: Option<LogFormat>,
    #[arg(long, default_value = "case")]
    case_column: String,
    #[arg(long, default_value = "activity")]
    activity_column: String,
    /// Timestamp column; a column named `timestamp` is used when present.
    #[arg(long)]
    timestamp_column: Option<String>,
    /// CSV field delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Parents taken from label prefixes.
    Labels,
    /// Seeded random clustering.
    Random,
    /// Every activity directly under the root.
    Flat,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Labels => "labels",
            Method::Random => "random",
            Method::Flat => "flat",
        }
    }
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long, value_enum, default_value = "labels")]
    method: Method,
    /// Label separator for `--method labels`.
    #[arg(long, default_value_t = '_')]
    sep: char,
    /// Number of prefix levels for `--method labels`.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Maximum children per node for `--method random`.
    #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
    max_size: usize,
}

#[derive(Args)]
struct MinerArgs {
    /// `inductive` or `dfg`, optionally with `/threshold`.
    #[arg(long, default_value = "inductive")]
    miner: String,
    /// Noise threshold (inductive) or edge filter (dfg); overrides `/threshold`.
    #[arg(long)]
    noise: Option<f64>,
    /// Subprocesses to collapse into start/end markers in abstracted.xes.
    #[arg(long, value_delimiter = ',')]
    hide: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricKind {
    Fitness,
    Precision,
    Generalization,
}

#[derive(Args)]
struct EvalArgs {
    /// Metrics to compute.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "fitness,precision,generalization")]
    metrics: Vec<MetricKind>,
    #[arg(long, default_value_t = 3)]
    k_folds: usize,
    /// Alignment time budget per model in milliseconds; 0 gives up at once.
    #[arg(long, default_value_t = 60_000)]
    budget_ms: u64,
    /// Search-state limit per alignment.
    #[arg(long, default_value_t = Budget::default().max_states)]
    max_states: usize,
}

#[derive(Args)]
struct OutputArgs {
    /// Output root; results go to `<out>/<name>/`.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Run name; defaults to the input file stem.
    #[arg(long)]
    name: Option<String>,
}

impl OutputArgs {
    fn dir(&self, input: &Path) -> Result<PathBuf> {
        let name = match &self.name {
            Some(n) => n.clone(),
            None => input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .ok_or_else(|| anyhow!("cannot derive a run name from {}", input.display()))?,
        };
        Ok(bundle::run_dir(&self.out, &name))
    }
}

fn load_log(args: &InputArgs) -> Result<EventLog> {
    let format = match args.format {
        Some(f) => f,
        None => LogFormat::from_path(&args.input)
            .ok_or_else(|| anyhow!("cannot infer the format of {}; pass --format", args.input.display()))?,
    };
    let text = bundle::read(&args.input)?;
    let log = match format {
        LogFormat::Csv => {
            if !args.delimiter.is_ascii() {
                bail!("delimiter must be an ASCII character");
            }
            let config = CsvConfig {
                case_column: args.case_column.clone(),
                activity_column: args.activity_column.clone(),
                timestamp_column: args.timestamp_column.clone(),
                delimiter: args.delimiter as u8,
            };
            parse_csv(text.as_bytes(), &config)?
        }
        LogFormat::Xes => parse_xes(&text)?,
    };
    if log.is_empty() {
        bail!("{} contains no traces", args.input.display());
    }
    info!("loaded {} traces, {} events, {} activities", log.len(), log.event_count(), log.alphabet().len());
    Ok(log)
}

fn build_tree(args: &TreeArgs, alphabet: &BTreeSet<String>, seed: Option<u64>) -> Result<ActivityTree> {
    let tree = match args.method {
        Method::Labels => tree_from_labels(alphabet, args.sep, args.depth)?,
        Method::Flat => tree_flat(alphabet)?,
        Method::Random => {
            let seed = seed.ok_or_else(|| anyhow!("--method random requires --seed"))?;
            tree_random(alphabet, args.max_size, seed)?
        }
    };
    tree.validate(alphabet)?;
    Ok(tree)
}

fn tree_summary(tree: &ActivityTree) -> Result<String> {
    Ok(format!(
        "height {}, {} nodes: {} subprocesses, {} activities",
        tree.height(tree.root())?,
        tree.nodes().len(),
        tree.subprocesses().len(),
        tree.leaves().len()
    ))
}

fn miner_config(args: &MinerArgs) -> Result<MinerConfig> {
    let mut config: MinerConfig = args.miner.parse()?;
    if let Some(t) = args.noise {
        config = MinerConfig::from_name(config.name(), t)?;
    }
    config.validate()?;
    Ok(config)
}

fn quality_config(args: &EvalArgs, seed: Option<u64>) -> Result<QualityConfig> {
    if args.k_folds < 2 {
        bail!("--k-folds must be at least 2");
    }
    let on = |m| args.metrics.contains(&m);
    Ok(QualityConfig {
        fitness: on(MetricKind::Fitness),
        precision: on(MetricKind::Precision),
        generalization: on(MetricKind::Generalization),
        k_folds: args.k_folds,
        seed: seed.unwrap_or(0),
        budget: Budget { time_ms: Some(args.budget_ms), max_states: args.max_states, ..Budget::default() },
        ..QualityConfig::default()
    })
}

fn cmd_tree(input: &InputArgs, tree_args: &TreeArgs, output: &OutputArgs, seed: Option<u64>) -> Result<()> {
    let log = load_log(input)?;
    let tree = build_tree(tree_args, log.alphabet(), seed)?;
    let dir = output.dir(&input.input)?;
    bundle::write_tree(&dir, &tree)?;
    println!("{}", tree_summary(&tree)?);
    println!("wrote {}", dir.display());
    Ok(())
}

/// Returns the bundle directory and whether every subprocess was mined.
fn cmd_discover(
    input: &InputArgs,
    tree_args: &TreeArgs,
    miner_args: &MinerArgs,
    output: &OutputArgs,
    seed: Option<u64>,
) -> Result<(PathBuf, bool)> {
    let miner = miner_config(miner_args)?;
    let log = load_log(input)?;
    let tree = build_tree(tree_args, log.alphabet(), seed)?;
    println!("{}", tree_summary(&tree)?);
    let model = build_hierarchy(&log, &tree, &miner).context("building the hierarchy")?;
    let abstracted =
        if miner_args.hide.is_empty() { None } else { Some(selective_abstract(&log, &tree, &miner_args.hide)?) };
    let dir = output.dir(&input.input)?;
    let base = Manifest {
        input: input.input.display().to_string(),
        method: tree_args.method.name().to_string(),
        seed,
        miner,
        root: tree.root().to_string(),
        activities: tree.leaves().len(),
        subprocesses: Vec::new(),
        hidden: miner_args.hide.clone(),
    };
    let manifest = bundle::write_bundle(&dir, &model, base, abstracted.as_ref())?;
    let mined = manifest.subprocesses.iter().filter(|e| e.model.is_some()).count();
    println!("mined {mined} of {} subprocess models with {miner}", manifest.subprocesses.len());
    for (sp, err) in &model.failures {
        warn!("discovery failed for `{sp}`: {err}");
        eprintln!("failed: {sp}: {err}");
    }
    println!("wrote {}", dir.display());
    Ok((dir, model.is_complete()))
}

fn cmd_evaluate(dir: &Path, eval: &EvalArgs, seed: Option<u64>) -> Result<QualityReport> {
    let config = quality_config(eval, seed)?;
    let (manifest, model) = bundle::read_bundle(dir)?;
    let report = evaluate_hierarchical(&model, &manifest.miner, &config);
    bundle::write(&dir.join(bundle::REPORT_JSON), &(report.to_json() + "\n"))?;
    let table = report.to_table();
    bundle::write(&dir.join(bundle::REPORT_TXT), &table)?;
    print!("{table}");
    for sp in &report.unreliable {
        warn!("unreliable metrics for `{sp}`");
    }
    Ok(report)
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match &cli.command {
        Command::Tree { input, tree, output } => {
            cmd_tree(input, tree, output, cli.seed)?;
            Ok(true)
        }
        Command::Discover { input, tree, miner, output } => Ok(cmd_discover(input, tree, miner, output, cli.seed)?.1),
        Command::Evaluate { bundle, eval } => {
            let report = cmd_evaluate(bundle, eval, cli.seed)?;
            Ok(report.failures.is_empty())
        }
        Command::Run { input, tree, miner, eval, output } => {
            // reject bad evaluation flags before the expensive part
            quality_config(eval, cli.seed)?;
            let (dir, complete) = cmd_discover(input, tree, miner, output, cli.seed)?;
            cmd_evaluate(&dir, eval, cli.seed)?;
            Ok(complete)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("FLEXH_LOG_LEVEL", "warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some subprocess models could not be discovered");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
