use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qgassess::assess::{self, AssessConfig, QuestionSource};
use qgassess::baselines::{self, BaselinesConfig, LabelSource, TuneConfig};
use qgassess::filtering::{self, FilterConfig};
use qgassess::formats::write_text;
use qgassess::simulate::{self, parse_j_values, parse_probs, PosteriorSpec, SimulateConfig};
use qgassess::{CliError, Format, Result};
use qgassess_core::corpus::{Split, DEFAULT_SEPARATOR};
use qgassess_core::vocab::DEFAULT_GRID_STEP;

/// Assessment toolkit for multiple-choice question generation.
#[derive(Parser)]
#[command(name = "qgassess", version)]
struct Cli {
    /// Output format for the report.
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "csv", "md"])]
    format: String,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Four-option rate, accuracy and G/A/C/D for a question set, before and
    /// after filtering.
    Assess(AssessArgs),
    /// Keep generated questions with four unique options and ensemble
    /// agreement.
    Filter(FilterArgs),
    /// Tune vocabulary complexity thresholds on a labelled Dev set.
    TuneVocab(TuneArgs),
    /// Majority-class and vocabulary-threshold complexity baselines.
    Baselines(BaselinesArgs),
    /// Question and context counts per split and difficulty.
    Stats(StatsArgs),
    /// Multi-reference scaling simulation.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct ScoringArgs {
    #[arg(long, default_value = "nats", value_parser = ["nats", "bits"])]
    entropy_base: String,
    #[arg(long, default_value = "binary", value_parser = ["binary", "eight_way"])]
    diversity_scheme: String,
    #[arg(long, default_value = "per_member", value_parser = ["per_member", "mean"])]
    agreement: String,
}

#[derive(Args)]
struct AssessArgs {
    /// Generated sequences (JSON lines with context_id and raw).
    #[arg(long, conflicts_with = "dataset", required_unless_present = "dataset")]
    generations: Option<PathBuf>,
    /// Human-written dataset; the labelled answer is the target.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    mcmrc_preds: PathBuf,
    #[arg(long)]
    qc_preds: Option<PathBuf>,
    /// Per-question error counts from an external grammar checker.
    #[arg(long)]
    grammar_report: Option<PathBuf>,
    /// Use built-in surface checks for G when no report is given.
    #[arg(long)]
    naive_grammar: bool,
    #[arg(long, default_value = DEFAULT_SEPARATOR)]
    separator: String,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    generations: PathBuf,
    #[arg(long)]
    mcmrc_preds: PathBuf,
    #[arg(long, default_value = DEFAULT_SEPARATOR)]
    separator: String,
    #[arg(long, default_value = "per_member", value_parser = ["per_member", "mean"])]
    agreement: String,
    /// Write kept generations here.
    #[arg(long)]
    kept_out: Option<PathBuf>,
    /// Dataset providing contexts for --augment-out.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Write kept items as dataset records with answer A.
    #[arg(long, requires = "dataset")]
    augment_out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    /// Labelled Dev dataset.
    #[arg(long, alias = "dataset")]
    dev: PathBuf,
    /// Optional labelled Evl dataset scored with the tuned thresholds.
    #[arg(long)]
    evl: Option<PathBuf>,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    grid_step: f64,
}

#[derive(Args)]
struct BaselinesArgs {
    /// Use the published per-class counts instead of dataset files.
    #[arg(long, conflicts_with_all = ["trn", "dev", "evl"])]
    published: bool,
    /// Training split; its majority class is the baseline prediction.
    #[arg(long)]
    trn: Option<PathBuf>,
    #[arg(long, required_unless_present = "published")]
    dev: Option<PathBuf>,
    #[arg(long, required_unless_present = "published")]
    evl: Option<PathBuf>,
    /// Adds a vocabulary-threshold row tuned on Dev.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    grid_step: f64,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    trn: Option<PathBuf>,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    evl: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "zipf", value_parser = ["zipf", "uniform", "explicit", "positionwise"])]
    posterior: String,
    /// Outcome count for zipf and uniform posteriors.
    #[arg(long, default_value_t = 1000)]
    m: usize,
    /// Zipf exponent.
    #[arg(long, default_value_t = 1.0)]
    exponent: f64,
    /// Comma-separated probabilities for explicit and positionwise posteriors.
    #[arg(long)]
    probs: Option<String>,
    /// Sequence length for positionwise posteriors.
    #[arg(long, default_value_t = 1)]
    length: usize,
    #[arg(long, default_value = "exact_match", value_parser = ["exact_match", "overlap"])]
    framework: String,
    /// J values, e.g. `1..10` or `1,2,4,8`.
    #[arg(long, default_value = "1..10")]
    j: String,
    #[arg(long, default_value_t = simulate::DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = simulate::DEFAULT_SEED)]
    seed: u64,
    /// Relative tolerance for the linearity report.
    #[arg(long, default_value_t = 0.01)]
    rel_tol: f64,
}

fn core_parse<T: std::str::FromStr<Err = qgassess_core::Error>>(s: &str) -> Result<T> {
    Ok(s.parse()?)
}

fn probs(p: &Option<String>) -> Result<Vec<f64>> {
    parse_probs(p.as_deref().ok_or_else(|| CliError::Usage("--probs is required for this posterior".into()))?)
}

fn execute(cli: &Cli) -> Result<String> {
    let format: Format = cli.format.parse()?;
    match &cli.command {
        Command::Assess(a) => {
            let source = match (&a.generations, &a.dataset) {
                (Some(g), _) => QuestionSource::Generations { path: g.clone(), separator: a.separator.clone() },
                (None, Some(d)) => QuestionSource::Dataset(d.clone()),
                (None, None) => return Err(CliError::Usage("--generations or --dataset is required".into())),
            };
            let config = AssessConfig {
                source,
                mcmrc_preds: a.mcmrc_preds.clone(),
                qc_preds: a.qc_preds.clone(),
                grammar_report: a.grammar_report.clone(),
                naive_grammar: a.naive_grammar,
                base: core_parse(&a.scoring.entropy_base)?,
                scheme: core_parse(&a.scoring.diversity_scheme)?,
                mode: core_parse(&a.scoring.agreement)?,
            };
            assess::run(&config)?.render(format)
        }
        Command::Filter(a) => {
            let config = FilterConfig {
                generations: a.generations.clone(),
                separator: a.separator.clone(),
                mcmrc_preds: a.mcmrc_preds.clone(),
                mode: core_parse(&a.agreement)?,
                kept_out: a.kept_out.clone(),
                context_dataset: a.dataset.clone(),
                augment_out: a.augment_out.clone(),
            };
            filtering::run(&config)?.render(format)
        }
        Command::TuneVocab(a) => {
            let config = TuneConfig {
                dev: a.dev.clone(),
                evl: a.evl.clone(),
                lexicon: a.lexicon.clone(),
                grid_step: a.grid_step,
            };
            baselines::run_tune(&config)?.render(format)
        }
        Command::Baselines(a) => {
            let labels = if a.published {
                LabelSource::Published
            } else {
                match (&a.dev, &a.evl) {
                    (Some(dev), Some(evl)) => {
                        LabelSource::Files { trn: a.trn.clone(), dev: dev.clone(), evl: evl.clone() }
                    }
                    _ => return Err(CliError::Usage("--dev and --evl are required without --published".into())),
                }
            };
            let config = BaselinesConfig { labels, lexicon: a.lexicon.clone(), grid_step: a.grid_step };
            baselines::run_baselines(&config)?.render(format)
        }
        Command::Stats(a) => {
            let files: Vec<(Split, &Path)> = [(Split::Trn, &a.trn), (Split::Dev, &a.dev), (Split::Evl, &a.evl)]
                .into_iter()
                .filter_map(|(s, p)| p.as_deref().map(|p| (s, p)))
                .collect();
            baselines::run_stats(&files)?.render(format)
        }
        Command::Simulate(a) => {
            let posterior = match a.posterior.as_str() {
                "zipf" => PosteriorSpec::Zipf { m: a.m, exponent: a.exponent },
                "uniform" => PosteriorSpec::Uniform { m: a.m },
                "explicit" => PosteriorSpec::Explicit(probs(&a.probs)?),
                _ => PosteriorSpec::Positionwise { probs: probs(&a.probs)?, length: a.length },
            };
            let config = SimulateConfig {
                posterior,
                framework: core_parse(&a.framework)?,
                j_values: parse_j_values(&a.j)?,
                trials: a.trials,
                seed: a.seed,
                rel_tol: a.rel_tol,
            };
            simulate::run(&config)?.render(format)
        }
    }
}

fn emit(cli: &Cli, report: &str) -> Result<()> {
    match &cli.out {
        Some(path) => write_text(path, report),
        None => std::io::stdout().lock().write_all(report.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(&cli).and_then(|report| emit(&cli, &report)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
