//! Command-line front end: train a classifier, cross-validate it, compute
//! sample-size bounds, simplify formulas, and label new rows.
//!
//! Exit codes: 0 on success, 2 for usage or configuration errors, 3 for
//! data errors.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ideal_dnf::bounds::{corollary_sample_size, theorem_sample_size, BoundParams};
use ideal_dnf::evaluation::{k_fold_cv, leave_one_out, CvReport};
use ideal_dnf::pipeline::{predict, train, DatasetMeta, ModelDocument, PipelineConfig};
use ideal_dnf::tabular::{load_csv, load_rows_with_schema};
use ideal_dnf::{dnf, Error as CoreError};

use config::{DatasetSection, FileConfig};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        CliError {
            code: if err.is_config_error() { 2 } else { 3 },
            message: err.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ideal-dnf",
    about = "Short Boolean DNF classifiers for tabular data",
    version
)]
struct Cli {
    /// Limit the internal thread pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration (dataset + pipeline sections).
    #[arg(long)]
    config: PathBuf,

    /// Override the pipeline seed from the config file.
    #[arg(long)]
    seed: Option<u64>,

    /// Output path for the structured document.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichBound {
    Theorem,
    Corollary,
}

#[derive(Subcommand)]
enum Command {
    /// Train a classifier and write the model document.
    Train(RunArgs),
    /// k-fold cross-validation.
    Cv {
        #[command(flatten)]
        run: RunArgs,
        /// Number of folds.
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Leave-one-out cross-validation.
    Loocv(RunArgs),
    /// Sample-size calculators.
    Bound {
        #[arg(long)]
        tau_size: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum)]
        which: WhichBound,
    },
    /// Exactly minimize a DNF formula given as text.
    Simplify {
        /// Formula text, e.g. "(p & q) | (p & ~q)".
        #[arg(long)]
        formula: String,
        /// Comma-separated vocabulary; inferred from the formula if omitted.
        #[arg(long)]
        vars: Option<String>,
    },
    /// Label the rows of a CSV file with a trained model.
    Predict {
        /// Model document written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Input CSV; columns are matched to the training schema by name.
        #[arg(long)]
        input: PathBuf,
    },
}

/// Structured report written next to the plain-text output.
#[derive(Serialize)]
struct ReportDocument<'a> {
    library_version: &'a str,
    command: &'a str,
    seed: u64,
    k: usize,
    dataset: &'a DatasetSection,
    pipeline: &'a PipelineConfig,
    report: &'a CvReport,
}

fn write_out(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::data(format!("cannot write '{}': {e}", path.display())))
}

fn load_dataset(cfg: &FileConfig) -> Result<ideal_dnf::Dataset, CliError> {
    let opts = cfg.load_options()?;
    let raw = load_csv(&cfg.dataset.path, &opts).map_err(|e| match e {
        CoreError::Io(io) => CliError::data(format!(
            "cannot read dataset '{}': {io}",
            cfg.dataset.path.display()
        )),
        other => CliError::from(other),
    })?;
    Ok(raw.drop_missing()?)
}

fn cmd_train(args: &RunArgs) -> Result<(), CliError> {
    let cfg = FileConfig::load(&args.config)?;
    let pipeline_cfg = cfg.pipeline_config(args.seed)?;
    let load_opts = cfg.load_options()?;
    let dataset = load_dataset(&cfg)?;
    let model = train(&dataset, &pipeline_cfg)?;

    let meta = DatasetMeta {
        target_name: cfg.dataset.target.clone(),
        positive_label: cfg.dataset.positive_label.clone(),
        missing_tokens: load_opts.missing_tokens.into_iter().collect(),
    };
    let doc = ModelDocument::from_model(&model, &meta);
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("model.json"));
    write_out(&out, &doc.to_json())?;

    println!("formula: {}", model.formula_text());
    println!(
        "features ({}): {}",
        model.feature_set.len(),
        model.feature_set.names.join(", ")
    );
    for rec in &model.records {
        println!(
            "  ell {:>2}  {:<11}  validation accuracy {:.4}",
            rec.ell,
            rec.scorer.name(),
            rec.validation_accuracy
        );
    }
    println!("chosen ell: {}", model.chosen_ell);
    println!("model written to {}", out.display());
    Ok(())
}

fn print_cv_text(report: &CvReport, loocv: bool) {
    if loocv {
        println!(
            "leave-one-out over {} rows: accuracy {:.4}",
            report.k, report.mean
        );
        return;
    }
    for (i, (acc, fold)) in report
        .fold_accuracies
        .iter()
        .zip(&report.per_fold)
        .enumerate()
    {
        println!(
            "fold {:>2}: accuracy {:.4}  ell {}  formula: {}",
            i + 1,
            acc,
            fold.chosen_ell,
            fold.formula
        );
    }
    match report.std {
        Some(std) => println!("mean accuracy: {:.4}  std: {:.4}", report.mean, std),
        None => println!("mean accuracy: {:.4}  std: n/a", report.mean),
    }
}

fn cmd_cv(args: &RunArgs, k: usize, loocv: bool) -> Result<(), CliError> {
    let cfg = FileConfig::load(&args.config)?;
    let pipeline_cfg = cfg.pipeline_config(args.seed)?;
    let dataset = load_dataset(&cfg)?;
    let seed = pipeline_cfg.seed;
    let (report, command, default_out) = if loocv {
        (
            leave_one_out(&dataset, &pipeline_cfg, seed)?,
            "loocv",
            "loocv_report.json",
        )
    } else {
        (
            k_fold_cv(&dataset, k, &pipeline_cfg, seed)?,
            "cv",
            "cv_report.json",
        )
    };

    let doc = ReportDocument {
        library_version: ideal_dnf::VERSION,
        command,
        seed,
        k: report.k,
        dataset: &cfg.dataset,
        pipeline: &pipeline_cfg,
        report: &report,
    };
    let json = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::data(format!("cannot serialize report: {e}")))?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_out));
    write_out(&out, &json)?;

    print_cv_text(&report, loocv);
    let total: f64 = report.runtime_per_fold.iter().sum();
    eprintln!(
        "fold runtimes: total {:.2}s, mean {:.3}s",
        total,
        total / report.runtime_per_fold.len().max(1) as f64
    );
    println!("report written to {}", out.display());
    Ok(())
}

fn cmd_bound(
    tau_size: usize,
    epsilon: f64,
    delta: f64,
    which: WhichBound,
) -> Result<(), CliError> {
    let params = BoundParams::new(tau_size, epsilon, delta)?;
    let n = match which {
        WhichBound::Theorem => theorem_sample_size(&params),
        WhichBound::Corollary => corollary_sample_size(&params),
    };
    println!("{n}");
    Ok(())
}

/// Distinct identifiers in order of first appearance, skipping constants.
fn infer_vocabulary(formula: &str) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    let mut current = String::new();
    for ch in formula.chars().chain(std::iter::once(' ')) {
        if ch.is_whitespace() || "~!&|()".contains(ch) {
            if !current.is_empty()
                && current != "TRUE"
                && current != "FALSE"
                && !names.contains(&current)
            {
                names.push(current.clone());
            }
            current.clear();
        } else {
            current.push(ch);
        }
    }
    names
}

fn cmd_simplify(formula: &str, vars: Option<&str>) -> Result<(), CliError> {
    let names: Vec<String> = match vars {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => infer_vocabulary(formula),
    };
    let parsed = dnf::parse(formula, &names)?;
    let simplified = dnf::simplify(&parsed)?;
    println!("{}", dnf::render(&simplified, &names)?);
    Ok(())
}

fn cmd_predict(model_path: &Path, input: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(model_path)
        .map_err(|e| CliError::config(format!("cannot read model '{}': {e}", model_path.display())))?;
    let (model, meta) = ModelDocument::from_json(&text)?.into_model()?;
    let file = std::fs::File::open(input)
        .map_err(|e| CliError::data(format!("cannot read input '{}': {e}", input.display())))?;
    let schema = model.booleanization.predictor_schema();
    let missing = meta.missing_tokens.iter().cloned().collect();
    let rows = load_rows_with_schema(file, &schema, &missing)?;
    for row in &rows {
        println!("{}", predict(&model, row)?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot configure {threads} threads: {e}")))?;
    }
    match &cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Cv { run: args, k } => cmd_cv(args, *k, false),
        Command::Loocv(args) => cmd_cv(args, 0, true),
        Command::Bound {
            tau_size,
            epsilon,
            delta,
            which,
        } => cmd_bound(*tau_size, *epsilon, *delta, *which),
        Command::Simplify { formula, vars } => cmd_simplify(formula, vars.as_deref()),
        Command::Predict { model, input } => cmd_predict(model, input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
