//! Command-line front end: `stats`, `preprocess`, `train`, `eval`,
//! `reproduce`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or runtime error, 3 scores
//! outside the reference tolerances (`reproduce` only).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use infotweet::corpus::write_tsv;
use infotweet::harness::{
    cmd_eval, cmd_preprocess, cmd_reproduce, cmd_stats, cmd_train_eval, ExperimentConfig, FeatureKind, ModelKind,
    PREDICTIONS_FILE, REPORT_FILE, REPRODUCE_JSON,
};
use infotweet::preprocess::preprocess;
use infotweet::Error;

#[derive(Parser, Debug)]
#[command(name = "infotweet", version, about = "Informative COVID-19 tweet classification")]
struct Cli {
    /// JSON experiment config; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random choice (splits, initialisation, sampling).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Training TSV (Id, Text, Label). Requires --valid.
    #[arg(long, global = true)]
    train: Option<PathBuf>,

    /// Validation TSV. Requires --train.
    #[arg(long, global = true)]
    valid: Option<PathBuf>,

    /// Directory with emoji.tsv and contractions.tsv replacing the bundled lexicons.
    #[arg(long, global = true)]
    lexicons: Option<PathBuf>,

    /// Parent directory for timestamped run directories.
    #[arg(long, global = true)]
    runs_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Class counts and word-count statistics before and after cleaning.
    Stats {
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Clean one text (printing every step) or write cleaned TSVs.
    Preprocess {
        /// Clean this text and print the report as JSON.
        #[arg(long)]
        text: Option<String>,
        /// Write cleaned train.tsv and valid.tsv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one model, evaluate it on the validation set, save artifacts.
    Train {
        /// logreg, svm, nb, forest, mlp or encoder.
        #[arg(long)]
        model: Option<ModelKind>,
        /// bow or tfidf for conventional models, subword for the encoder.
        #[arg(long)]
        features: Option<FeatureKind>,
        /// Artifact directory (default: <runs-dir>/<timestamp>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a saved model to a TSV file and score it when labelled.
    Eval {
        /// Directory written by `train`.
        #[arg(long)]
        model_dir: PathBuf,
        /// TSV to classify (default: the validation set).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Write Id/Label predictions here.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Run every conventional model/feature cell plus the encoder.
    Reproduce {
        /// Artifact directory (default: <runs-dir>/<timestamp>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.train.is_some() || cli.valid.is_some() {
        cfg.data.train = cli.train.clone();
        cfg.data.valid = cli.valid.clone();
    }
    if let Some(dir) = &cli.lexicons {
        cfg.data.lexicon_dir = Some(dir.clone());
    }
    if let Some(dir) = &cli.runs_dir {
        cfg.runs_dir = dir.clone();
    }
    if let Command::Train { model, features, .. } = &cli.command {
        if let Some(m) = model {
            cfg.model = *m;
            if features.is_none() {
                cfg.features = match m {
                    ModelKind::Encoder => FeatureKind::Subword,
                    _ if cfg.features == FeatureKind::Subword => FeatureKind::Tfidf,
                    _ => cfg.features,
                };
            }
        }
        if let Some(f) = features {
            cfg.features = *f;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_dir(cfg: &ExperimentConfig, explicit: &Option<PathBuf>) -> PathBuf {
    explicit
        .clone()
        .unwrap_or_else(|| cfg.runs_dir.join(chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string()))
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write(path: &Path, content: &str) -> Result<(), Error> {
    std::fs::write(path, content).map_err(|e| Error::InvalidData(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<u8, Error> {
    let cfg = build_config(&cli)?;
    match &cli.command {
        Command::Stats { json } => {
            let report = cmd_stats(&cfg)?;
            if *json {
                print_json(&report)?;
            } else {
                print!("{}", report.to_table());
            }
        }
        Command::Preprocess { text, out } => {
            if let Some(t) = text {
                print_json(&preprocess(t, &cfg.lexicons()?))?;
            }
            if let Some(dir) = out {
                let (train, valid) = cmd_preprocess(&cfg)?;
                std::fs::create_dir_all(dir).map_err(|e| Error::InvalidData(format!("{}: {e}", dir.display())))?;
                write_tsv(&train, dir.join("train.tsv"))?;
                write_tsv(&valid, dir.join("valid.tsv"))?;
                println!("wrote {} and {}", dir.join("train.tsv").display(), dir.join("valid.tsv").display());
            }
            if text.is_none() && out.is_none() {
                return Err(Error::InvalidArgument("preprocess needs --text or --out".into()));
            }
        }
        Command::Train { out, .. } => {
            let dir = run_dir(&cfg, out);
            let report = cmd_train_eval(&cfg, &dir)?;
            print!("{}", report.eval.to_table());
            println!("artifacts: {}", dir.display());
            println!("report: {}", dir.join(REPORT_FILE).display());
            println!("predictions: {}", dir.join(PREDICTIONS_FILE).display());
        }
        Command::Eval {
            model_dir,
            data,
            predictions,
        } => {
            let outcome = cmd_eval(&cfg, model_dir, data.as_deref())?;
            match &outcome.report {
                Some(r) => print!("{}", r.to_table()),
                None => println!("{} unlabelled tweets classified", outcome.predictions.len()),
            }
            if let Some(p) = predictions {
                write(p, &outcome.predictions_tsv)?;
            }
        }
        Command::Reproduce { out } => {
            let dir = run_dir(&cfg, out);
            let report = cmd_reproduce(&cfg, &dir)?;
            print!("{}", report.to_table());
            println!("json: {}", dir.join(REPRODUCE_JSON).display());
            return Ok(report.exit_code() as u8);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidArgument(_) => 1,
                _ => 2,
            })
        }
    }
}
