//! Command-line interface.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use matseg_core::segmentation::Statistic;
use matseg_core::{segment, sequential_segment, SegmentationConfig, ThresholdMode};

use crate::correlogram::{correlogram, to_csv};
use crate::error::{Error, Result};
use crate::format::{
    parse_threshold, read_series, write_file, write_matrix_series, write_tensor_series, ResultDocument, SeriesInput,
    TruthDoc,
};
use crate::simulation::{gen_example, rep_rng, run_experiment, Example, ExperimentReport};

/// Segment matrix- and tensor-valued time series into uncorrelated groups.
#[derive(Debug, Parser)]
#[command(name = "matseg", version)]
pub struct Cli {
    /// Worker threads (default: MATSEG_THREADS, else all cores). Output
    /// does not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a simulated series and its ground truth.
    Simulate(SimulateArgs),
    /// Segment a series file and write a JSON result document.
    Segment(SegmentArgs),
    /// Export maximum absolute cross correlations as CSV.
    Correlogram(CorrelogramArgs),
    /// Run Monte-Carlo replications and write a CSV summary.
    Replicate(ReplicateArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation design: 1, 2 or 3.
    #[arg(long)]
    pub example: u32,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth sidecar (default: `<out>.truth.json`).
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StatisticArg {
    Lagged,
    RowPair,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Largest lag in the eigen-analysis statistic.
    #[arg(long, default_value_t = 2)]
    pub k0: usize,
    /// Largest lag for the pair scores.
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    /// Fraction of ranked pairs searched by the ratio rule.
    #[arg(long, default_value_t = 0.75)]
    pub c0: f64,
    /// Positive shift for the ratio rule; searches all pairs when set.
    #[arg(long)]
    pub ratio_shift: Option<f64>,
    /// `none`, `fixed:u,v` or `cv:N`.
    #[arg(long, default_value = "none", value_parser = parse_threshold)]
    pub threshold: ThresholdMode,
    #[arg(long, value_enum, default_value = "lagged")]
    pub statistic: StatisticArg,
    /// Relative eigenvalue floor when inverting the lag-0 covariance.
    #[arg(long, default_value_t = matseg_core::linalg::DEFAULT_EIG_CLAMP)]
    pub eps: f64,
}

impl ConfigArgs {
    /// `seed` drives the cross-validation splits.
    pub fn to_config(&self, seed: u64) -> SegmentationConfig {
        SegmentationConfig {
            k0: self.k0,
            m: self.m,
            c0: self.c0,
            ratio_shift: self.ratio_shift,
            threshold: self.threshold,
            eps: self.eps,
            statistic: match self.statistic {
                StatisticArg::Lagged => Statistic::Lagged,
                StatisticArg::RowPair => Statistic::RowPair,
            },
            seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Seed for cross-validation splits.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Segment the rows of each matrix (the columns of its transpose).
    #[arg(long)]
    pub rows: bool,
    /// Result document path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the transformed series here.
    #[arg(long)]
    pub transformed: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelogramArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    /// Result document whose transformation is applied first.
    #[arg(long)]
    pub result: Option<PathBuf>,
    /// `none`, `fixed:u,v` (only `v` is used) or `cv:N`.
    #[arg(long, default_value = "none", value_parser = parse_threshold)]
    pub threshold: ThresholdMode,
    /// Seed for cross-validation splits.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplicateArgs {
    #[arg(long)]
    pub example: u32,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long)]
    pub reps: usize,
    /// Seed for data generation and cross-validation splits.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// CSV path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, contents),
        None => std::io::stdout().write_all(contents.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn truth_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".truth.json");
    PathBuf::from(s)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let example = Example::from_id(args.example)?;
    let mut rng = rep_rng(args.seed, args.n, 0);
    let (series, truth) = gen_example(example, args.n, &mut rng)?;
    write_file(&args.out, &write_matrix_series(&series))?;
    let doc = TruthDoc::new(example.id(), args.n, args.seed, &truth);
    let json = serde_json::to_string_pretty(&doc).expect("truth documents serialize") + "\n";
    write_file(args.truth.clone().unwrap_or_else(|| truth_path(&args.out)).as_path(), &json)
}

fn cmd_segment(args: &SegmentArgs) -> Result<()> {
    let cfg = args.config.to_config(args.seed);
    let doc = match read_series(&args.input)? {
        SeriesInput::Matrix(series) => {
            let series = if args.rows { series.transpose_each() } else { series };
            let result = segment(&series, &cfg)?;
            if let Some(path) = &args.transformed {
                write_file(path, &write_matrix_series(&result.transformed))?;
            }
            ResultDocument::matrix(&cfg, args.rows, &result)
        }
        SeriesInput::Tensor(series) => {
            if args.rows {
                return Err(Error::Usage("--rows applies to matrix input only".into()));
            }
            let result = sequential_segment(&series, &cfg)?;
            if let Some(path) = &args.transformed {
                write_file(path, &write_tensor_series(&result.transformed))?;
            }
            ResultDocument::tensor(&cfg, &result)
        }
    };
    emit(args.out.as_deref(), &doc.to_json())
}

fn cmd_correlogram(args: &CorrelogramArgs) -> Result<()> {
    let SeriesInput::Matrix(series) = read_series(&args.input)? else {
        return Err(Error::Usage("correlograms need matrix input".into()));
    };
    let rows = match &args.result {
        None => correlogram(&series, None, args.m, &args.threshold, args.seed)?,
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let doc = ResultDocument::from_json(&text)?;
            let seg =
                doc.result.as_ref().ok_or_else(|| Error::Usage("the result document holds no matrix result".into()))?;
            let series = if doc.config.rows { series.transpose_each() } else { series };
            let (standardizer, gamma) = (seg.standardizer()?, seg.gamma()?);
            if gamma.rows() != series.q() {
                return Err(Error::Usage(format!(
                    "result is for q = {} but the series has q = {}",
                    gamma.rows(),
                    series.q()
                )));
            }
            correlogram(&series, Some((&standardizer, &gamma)), args.m, &args.threshold, args.seed)?
        }
    };
    emit(args.out.as_deref(), &to_csv(&rows))
}

/// CSV summary, one line per sample size. `d_bar_median` is NaN when no
/// replication was correct.
pub fn replicate_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("example,n,reps,correct,incorrect,near_complete,d_bar_median\n");
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.example,
            r.n,
            r.reps,
            r.correct_rate(),
            r.incorrect_rate(),
            r.near_complete_rate(),
            r.d_bar_median()
        )
        .expect("writing to a String");
    }
    out
}

fn cmd_replicate(args: &ReplicateArgs) -> Result<()> {
    let example = Example::from_id(args.example)?;
    let reports = run_experiment(example, &args.n, args.reps, &args.config.to_config(args.seed), args.seed)?;
    emit(args.out.as_deref(), &replicate_csv(&reports))
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("MATSEG_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Usage(format!("MATSEG_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Segment(a) => cmd_segment(a),
        Command::Correlogram(a) => cmd_correlogram(a),
        Command::Replicate(a) => cmd_replicate(a),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Help and version requests print to stdout and succeed.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help or version; a closed pipe is not an error
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(Error::Usage(e.render().to_string().trim_end().to_owned())),
    };
    match thread_count(cli.threads)? {
        Some(0) => Err(Error::Usage("thread count must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Usage(format!("cannot start {n} threads: {e}")))?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}

/// One-line JSON record describing an error, for stderr.
pub fn error_record(e: &Error) -> String {
    let mut rec = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    if let Error::Parse { line, .. } = e {
        rec["line"] = (*line).into();
    }
    rec.to_string()
}
