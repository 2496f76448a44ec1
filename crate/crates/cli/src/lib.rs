//! Argument parsing and subcommand dispatch for the `pcasmote` binary.
//!
//! Exit statuses: 0 success, 2 usage, 3 data or parse, 4 numerical
//! non-convergence. Failures are printed to stderr as
//! `pcasmote: error[<kind>]: <message>`.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use pcasmote::config::resolve_classes;
use pcasmote::experiment::{evaluate_dataset, EvalSettings, Evaluation, FoldPrep};
use pcasmote::report::write_report;
use pcasmote::{
    balance_sequence, fit_pca, impute_missing, load_dataset, run_paper_experiment, transform,
    Dataset, Error, ErrorKind, ExperimentConfig, PcaModel,
};

pub const OUT_ENV: &str = "PCASMOTE_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "pcasmote",
    version,
    about = "PCA + SMOTE + naive Bayes experiments on small tabular data"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print sample, feature, class and missing-cell counts
    Inspect(StageArgs),
    /// Fit PCA (or apply a saved model) and write the projected dataset
    Reduce {
        #[command(flatten)]
        common: StageArgs,
        /// Apply this saved PCA model instead of fitting one
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run the configured SMOTE sequence and write the final dataset
    Resample(StageArgs),
    /// Fit naive Bayes and write the model
    Train(StageArgs),
    /// Cross-validate naive Bayes on one dataset
    Evaluate(StageArgs),
    /// Run the full Initial / PCA / SMOTE comparison
    Experiment {
        #[command(flatten)]
        common: StageArgs,
        /// Also write SVG bar charts
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Debug, Args)]
struct StageArgs {
    /// Config file (key = value text, or JSON)
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set smote.seed=7`; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Dataset to read instead of `dataset.path`
    #[arg(long, short = 'i')]
    input: Option<PathBuf>,
    #[arg(long, short = 'o', env = OUT_ENV, default_value = "out")]
    out: PathBuf,
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Inspect,
    Reduce,
    Resample,
    Train,
    Evaluate,
    Experiment,
}

impl Stage {
    /// Stages that read an evaluation protocol and refuse to run on
    /// built-in defaults.
    pub fn needs_config(self) -> bool {
        matches!(self, Stage::Evaluate | Stage::Experiment)
    }
}

#[derive(Debug, Clone)]
pub struct CliInvocation {
    pub stage: Stage,
    pub config_path: Option<PathBuf>,
    pub overrides: Vec<String>,
    /// Config after the file and every override are applied.
    pub config: ExperimentConfig,
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub verbosity: u8,
    pub svg: bool,
    pub model: Option<PathBuf>,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub status: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            EXIT_USAGE => "usage",
            EXIT_NUMERICAL => "numerical",
            _ => "data",
        };
        write!(f, "pcasmote: error[{tag}]: {}", self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            ErrorKind::Usage => EXIT_USAGE,
            ErrorKind::Data => EXIT_DATA,
            ErrorKind::Numerical => EXIT_NUMERICAL,
        };
        CliError {
            status,
            message: describe(&e),
        }
    }
}

fn describe(e: &Error) -> String {
    let mut msg = e.to_string();
    let mut cur: &dyn std::error::Error = e;
    while let Some(src) = cur.source() {
        msg.push_str(&format!(": {src}"));
        cur = src;
    }
    msg
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        status: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parses `argv` (program name first) and resolves the config.
///
/// [`ParseOutcome::Info`] means clap already answered the request (help
/// or version) and the caller should print it and exit 0.
pub fn parse_invocation<I, T>(argv: I) -> Result<CliInvocation, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let text = e.render().to_string();
        match e.kind() {
            _ if e.exit_code() == 0 => ParseOutcome::Info(text),
            clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                ParseOutcome::Usage(text)
            }
            _ => ParseOutcome::Error(CliError {
                status: EXIT_USAGE,
                message: text.trim_end().trim_start_matches("error: ").to_string(),
            }),
        }
    })?;
    let (stage, common, svg, model) = match cli.command {
        Command::Inspect(c) => (Stage::Inspect, c, false, None),
        Command::Reduce { common, model } => (Stage::Reduce, common, false, model),
        Command::Resample(c) => (Stage::Resample, c, false, None),
        Command::Train(c) => (Stage::Train, c, false, None),
        Command::Evaluate(c) => (Stage::Evaluate, c, false, None),
        Command::Experiment { common, svg } => (Stage::Experiment, common, svg, None),
    };
    let config = resolve_config(stage, common.config.as_deref(), &common.overrides)
        .map_err(ParseOutcome::Error)?;
    Ok(CliInvocation {
        stage,
        config_path: common.config,
        overrides: common.overrides,
        config,
        input: common.input,
        out_dir: common.out,
        verbosity: common.verbose,
        svg,
        model,
    })
}

#[derive(Debug)]
pub enum ParseOutcome {
    /// Help or version text for stdout.
    Info(String),
    /// Help text for stderr, printed when no subcommand was given.
    Usage(String),
    Error(CliError),
}

fn resolve_config(
    stage: Stage,
    path: Option<&Path>,
    overrides: &[String],
) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match path {
        Some(p) if !p.is_file() => {
            return Err(usage(format!("config file `{}` not found", p.display())))
        }
        Some(p) => ExperimentConfig::load(p)?,
        None if stage.needs_config() => {
            return Err(usage(
                "this subcommand needs --config (see configs/paper.cfg)",
            ));
        }
        None => ExperimentConfig::default(),
    };
    for o in overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a parsed invocation, writing human-readable output to `out`.
pub fn run_invocation(inv: &CliInvocation, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = &inv.config;
    let path = inv
        .input
        .clone()
        .unwrap_or_else(|| cfg.dataset_path.clone());
    let log = |msg: &str| {
        if inv.verbosity > 0 {
            eprintln!("pcasmote: {msg}");
        }
    };
    let w = |r: std::io::Result<()>| r.map_err(|e| CliError::from(Error::io("<stdout>", e)));

    match inv.stage {
        Stage::Inspect => {
            let ds = load_dataset(&path)?;
            w(writeln!(out, "dataset: {}", path.display()))?;
            w(writeln!(out, "samples: {}", ds.n_samples()))?;
            w(writeln!(out, "features: {}", ds.n_features()))?;
            w(writeln!(out, "classes: {}", ds.class_names().join(", ")))?;
            w(writeln!(out, "class counts: {:?}", ds.class_counts()))?;
            w(writeln!(out, "missing cells: {}", ds.missing_cells().len()))?;
            for &(r, c) in ds.missing_cells() {
                w(writeln!(
                    out,
                    "  row {} feature {}",
                    r + 1,
                    ds.feature_names()[c]
                ))?;
            }
        }
        Stage::Reduce => {
            let ds = load_imputed(&path, cfg)?;
            let model = match &inv.model {
                Some(m) => {
                    let text = std::fs::read_to_string(m).map_err(|e| Error::io(m, e))?;
                    PcaModel::from_text(&text)?
                }
                None => fit_pca(&ds, cfg.pca.threshold, cfg.pca.mode)?,
            };
            let reduced = transform(&model, &ds)?;
            create_dir(&inv.out_dir)?;
            let data_path = inv.out_dir.join("reduced.csv");
            reduced.write_csv(&data_path)?;
            let model_path = inv.out_dir.join("pca.model");
            write_file(&model_path, &model.to_text())?;
            w(writeln!(
                out,
                "retained {} of {} components ({} mode, {:.4} of variance)",
                model.retained,
                model.n_features(),
                model.mode.as_str(),
                model.cumulative_variance(model.retained)
            ))?;
            w(writeln!(out, "wrote {}", data_path.display()))?;
            w(writeln!(out, "wrote {}", model_path.display()))?;
        }
        Stage::Resample => {
            let ds = load_imputed(&path, cfg)?;
            let order = resolve_classes(&ds, &cfg.smote.order)?;
            let runs = balance_sequence(
                &ds,
                &order,
                cfg.smote.per_class_target,
                cfg.smote.k,
                cfg.smote.seed,
            )?;
            let last = runs.last().unwrap_or(&ds);
            create_dir(&inv.out_dir)?;
            let data_path = inv.out_dir.join("resampled.csv");
            last.write_csv(&data_path)?;
            w(writeln!(
                out,
                "class counts: {:?} -> {:?}",
                ds.class_counts(),
                last.class_counts()
            ))?;
            w(writeln!(out, "wrote {}", data_path.display()))?;
        }
        Stage::Train => {
            let ds = load_imputed(&path, cfg)?;
            let model = pcasmote::naive_bayes::fit_nb_with_floor(&ds, cfg.std_floor)?;
            create_dir(&inv.out_dir)?;
            let model_path = inv.out_dir.join("nb.model");
            write_file(&model_path, &model.to_text())?;
            let predicted = model.predict_all(ds.features())?;
            let correct = predicted
                .iter()
                .zip(ds.labels())
                .filter(|(p, a)| p == a)
                .count();
            w(writeln!(
                out,
                "training accuracy: {correct}/{}",
                ds.n_samples()
            ))?;
            w(writeln!(out, "wrote {}", model_path.display()))?;
        }
        Stage::Evaluate => {
            let ds = load_imputed(&path, cfg)?;
            let settings = EvalSettings {
                protocol: cfg.eval.protocol,
                k: cfg.eval.k,
                seeds: cfg.eval.seeds.clone(),
                std_floor: cfg.std_floor,
            };
            log(&format!(
                "evaluating {} over {} seeds",
                path.display(),
                settings.seeds.len()
            ));
            let eval = evaluate_dataset(&ds, "dataset", &settings, &FoldPrep::default())?;
            create_dir(&inv.out_dir)?;
            let csv_path = inv.out_dir.join("evaluation.csv");
            write_file(&csv_path, &evaluation_csv(&eval))?;
            let m = &eval.mean;
            w(writeln!(
                out,
                "accuracy {:.4}  fp_rate {:.4}  precision {:.4}  recall {:.4}  median misclassified {}",
                m.accuracy, m.fp_rate, m.precision, m.recall, eval.median_misclassified
            ))?;
            w(writeln!(out, "wrote {}", csv_path.display()))?;
        }
        Stage::Experiment => {
            log("running experiment");
            let report = run_paper_experiment(cfg)?;
            let written = write_report(&report, &inv.out_dir, inv.svg)?;
            w(writeln!(
                out,
                "{:<8} {:>8} {:>7} {:>8} {:>8} {:>9} {:>7} {:>13}",
                "method",
                "features",
                "samples",
                "accuracy",
                "fp_rate",
                "precision",
                "recall",
                "misclassified"
            ))?;
            for s in &report.steps {
                let m = &s.evaluation.mean;
                w(writeln!(
                    out,
                    "{:<8} {:>8} {:>7} {:>8.4} {:>8.4} {:>9.4} {:>7.4} {:>13}",
                    s.method,
                    s.n_features,
                    s.n_samples,
                    m.accuracy,
                    m.fp_rate,
                    m.precision,
                    m.recall,
                    s.evaluation.median_misclassified
                ))?;
            }
            for p in written {
                log(&format!("wrote {}", p.display()));
            }
        }
    }
    Ok(())
}

fn load_imputed(path: &Path, cfg: &ExperimentConfig) -> Result<Dataset, CliError> {
    Ok(impute_missing(&load_dataset(path)?, cfg.imputation)?)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

fn evaluation_csv(eval: &Evaluation) -> String {
    let mut s = String::from("seed,accuracy,fp_rate,precision,recall,misclassified\n");
    let rows = eval
        .per_seed
        .iter()
        .map(|r| (r.seed.to_string(), &r.row))
        .chain(std::iter::once(("mean".to_string(), &eval.mean)));
    for (seed, r) in rows {
        s.push_str(&format!(
            "{seed},{},{},{},{},{}\n",
            r.accuracy, r.fp_rate, r.precision, r.recall, r.misclassified
        ));
    }
    s
}

/// Parses and runs; returns the exit status.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let inv = match parse_invocation(argv) {
        Ok(inv) => inv,
        Err(ParseOutcome::Info(text)) => {
            let _ = write!(out, "{text}");
            return EXIT_OK;
        }
        Err(ParseOutcome::Usage(text)) => {
            let _ = write!(err, "{text}");
            return EXIT_USAGE;
        }
        Err(ParseOutcome::Error(e)) => {
            let _ = writeln!(err, "{e}");
            return e.status;
        }
    };
    match run_invocation(&inv, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.status
        }
    }
}
