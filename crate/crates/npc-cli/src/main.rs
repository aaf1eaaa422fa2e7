//! `npc` — run progressive-competition classification experiments on
//! imbalanced binary datasets, compare algorithm score tables with the
//! Friedman/Holm machinery, and dump grade curves.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use npc_core::{friedman_holm, GradeTable, Normalization, ScoreTable};

use npc_cli::config::{Algorithm, ConfigLayer, ReportFormat};
use npc_cli::runner;

#[derive(Parser)]
#[command(
    name = "npc",
    version,
    about = "Progressive nearest-neighbor competition classifier for imbalanced data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run cross-validated experiments and write reports.
    Run(RunArgs),
    /// Friedman test with Holm post-hoc correction on a score table.
    Stats(StatsArgs),
    /// Dump the grade curves for a given size and imbalance ratio.
    Grades(GradesArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Dataset file (.dat or .csv) or directory; repeatable. Directories
    /// are scanned recursively and pre-made fold files
    /// (<name>-<k>-<i>tra/tst.dat) override internal splitting.
    #[arg(long = "data")]
    data: Vec<PathBuf>,
    /// Flat key=value config file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cross-validation fold count [default: 5].
    #[arg(long)]
    folds: Option<usize>,
    /// Shuffle seed; falls back to $NPC_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Feature preprocessing: minmax or none [default: minmax].
    #[arg(long)]
    normalize: Option<Normalization>,
    /// Algorithm to evaluate: npc or knn:<k>; repeatable [default: npc].
    #[arg(long = "algo")]
    algos: Vec<Algorithm>,
    /// Output directory for reports [default: npc-report].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json-lines, csv, or pretty-table; repeatable
    /// [default: json-lines].
    #[arg(long = "format")]
    formats: Vec<ReportFormat>,
}

#[derive(Args)]
struct StatsArgs {
    /// Score table CSV: header `dataset,<algo>,...`, one row per dataset.
    #[arg(long)]
    scores: PathBuf,
    /// Family-wise significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct GradesArgs {
    /// Training-set size (number of ranks).
    #[arg(long)]
    n: usize,
    /// Imbalance ratio.
    #[arg(long)]
    ir: f64,
    /// Output CSV path: rank, |majority grade|, minority grade.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Grades(args) => cmd_grades(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("npc: error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let file_layer = match &args.config {
        Some(path) => Some(ConfigLayer::from_file(path)?),
        None => None,
    };
    let flag_layer = ConfigLayer {
        data: args.data,
        folds: args.folds,
        seed: args.seed,
        normalization: args.normalize,
        algorithms: args.algos,
        out: args.out,
        formats: args.formats,
    };
    let config = ConfigLayer::resolve(flag_layer, file_layer)?;
    let report = runner::run(&config)?;
    let written = report.write_all(&config.out)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let file = File::open(&args.scores)
        .with_context(|| format!("cannot open score table {}", args.scores.display()))?;
    let table = ScoreTable::from_csv_reader(BufReader::new(file))
        .with_context(|| format!("invalid score table {}", args.scores.display()))?;
    let result = friedman_holm(&table, args.alpha)?;
    print!("{result}");
    Ok(())
}

fn cmd_grades(args: GradesArgs) -> Result<()> {
    let table = GradeTable::from_parameters(args.n, args.ir)?;
    let mut out = String::from("rank,abs_majority_grade,minority_grade\n");
    for row in table.rows() {
        let _ = writeln!(out, "{},{},{}", row.rank, row.majority.abs(), row.minority);
    }
    std::fs::write(&args.out, out)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    println!("wrote {}", args.out.display());
    Ok(())
}
