//! Experiment configuration and data resolution.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalConfig, ClassicalKind};
use crate::corpus::{load_tsv, Dataset};
use crate::encoder::EncoderConfig;
use crate::error::{Error, Result};
use crate::preprocess::Lexicons;
use crate::synthetic::{self, OFFICIAL_TRAIN_SIZE, OFFICIAL_VALID_SIZE};

/// Directory holding `train.tsv` and `valid.tsv`, used when the config
/// names no data files.
pub const DATA_DIR_ENV: &str = "INFOTWEET_DATA";

/// Seed of the synthetic stand-in corpus. Fixed so that every experiment
/// seed sees the same data.
pub const SYNTHETIC_DATA_SEED: u64 = 2020;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Logreg,
    Svm,
    Nb,
    Forest,
    Mlp,
    Encoder,
}

impl ModelKind {
    pub fn classical(self) -> Option<ClassicalKind> {
        match self {
            ModelKind::Logreg => Some(ClassicalKind::Logreg),
            ModelKind::Svm => Some(ClassicalKind::Svm),
            ModelKind::Nb => Some(ClassicalKind::Nb),
            ModelKind::Forest => Some(ClassicalKind::Forest),
            ModelKind::Mlp => Some(ClassicalKind::Mlp),
            ModelKind::Encoder => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Encoder => "encoder",
            other => other.classical().expect("classical").as_str(),
        }
    }
}

impl From<ClassicalKind> for ModelKind {
    fn from(k: ClassicalKind) -> Self {
        match k {
            ClassicalKind::Logreg => ModelKind::Logreg,
            ClassicalKind::Svm => ModelKind::Svm,
            ClassicalKind::Nb => ModelKind::Nb,
            ClassicalKind::Forest => ModelKind::Forest,
            ClassicalKind::Mlp => ModelKind::Mlp,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "encoder" => Ok(ModelKind::Encoder),
            other => other.parse::<ClassicalKind>().map(ModelKind::from),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Bow,
    Tfidf,
    Subword,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Bow => "bow",
            FeatureKind::Tfidf => "tfidf",
            FeatureKind::Subword => "subword",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bow" => Ok(FeatureKind::Bow),
            "tfidf" | "tf-idf" => Ok(FeatureKind::Tfidf),
            "subword" => Ok(FeatureKind::Subword),
            other => Err(Error::InvalidArgument(format!(
                "unknown feature kind {other:?} (expected bow, tfidf or subword)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub train: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    /// Directory with `emoji.tsv` and `contractions.tsv`; bundled lexicons
    /// when absent.
    pub lexicon_dir: Option<PathBuf>,
    pub synthetic_train_size: usize,
    pub synthetic_valid_size: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            train: None,
            valid: None,
            lexicon_dir: None,
            synthetic_train_size: OFFICIAL_TRAIN_SIZE,
            synthetic_valid_size: OFFICIAL_VALID_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    pub model: ModelKind,
    pub features: FeatureKind,
    pub seed: u64,
    pub classical: ClassicalConfig,
    pub encoder: EncoderConfig,
    /// Parent of the per-run artifact directories.
    pub runs_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: DataConfig::default(),
            model: ModelKind::Mlp,
            features: FeatureKind::Tfidf,
            seed: 0,
            classical: ClassicalConfig::default(),
            encoder: EncoderConfig::default(),
            runs_dir: PathBuf::from("runs"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if path.as_os_str().is_empty() {
            return Err(Error::InvalidArgument("empty config path".into()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Checks the model/feature pairing and the nested hyperparameters.
    pub fn validate(&self) -> Result<()> {
        match (self.model, self.features) {
            (ModelKind::Encoder, FeatureKind::Subword) => {}
            (ModelKind::Encoder, f) => {
                return Err(Error::InvalidArgument(format!(
                    "the encoder consumes subword features, not {f}"
                )))
            }
            (m, FeatureKind::Subword) => {
                return Err(Error::InvalidArgument(format!("{m} needs bow or tfidf features, not subword")))
            }
            _ => {}
        }
        if self.data.train.is_some() != self.data.valid.is_some() {
            return Err(Error::InvalidArgument("data.train and data.valid must be given together".into()));
        }
        self.classical.solver.validate()?;
        self.encoder.validate()
    }

    pub fn lexicons(&self) -> Result<Lexicons> {
        match &self.data.lexicon_dir {
            Some(dir) => Lexicons::load_dir(dir),
            None => Ok(Lexicons::bundled()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataOrigin {
    Files { train: PathBuf, valid: PathBuf },
    Synthetic { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct LoadedData {
    pub origin: DataOrigin,
    pub train: Dataset,
    pub valid: Dataset,
}

impl LoadedData {
    /// Real files with the shared-task split sizes: only then are scores
    /// compared against published reference values.
    pub fn is_official_sized(&self) -> bool {
        matches!(self.origin, DataOrigin::Files { .. })
            && self.train.len() == OFFICIAL_TRAIN_SIZE
            && self.valid.len() == OFFICIAL_VALID_SIZE
    }

    pub fn describe(&self) -> String {
        match &self.origin {
            DataOrigin::Files { train, valid } => format!("files {} / {}", train.display(), valid.display()),
            DataOrigin::Synthetic { seed } => format!("synthetic corpus (seed {seed})"),
        }
    }
}

/// Resolves the data: explicit config paths, else `$INFOTWEET_DATA`, else
/// the deterministic synthetic corpus.
pub fn load_data(cfg: &ExperimentConfig) -> Result<LoadedData> {
    let files = match (&cfg.data.train, &cfg.data.valid) {
        (Some(t), Some(v)) => Some((t.clone(), v.clone())),
        (None, None) => std::env::var_os(DATA_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| (Path::new(&d).join("train.tsv"), Path::new(&d).join("valid.tsv"))),
        _ => return Err(Error::InvalidArgument("data.train and data.valid must be given together".into())),
    };
    match files {
        Some((train_path, valid_path)) => Ok(LoadedData {
            train: load_tsv(&train_path)?,
            valid: load_tsv(&valid_path)?,
            origin: DataOrigin::Files {
                train: train_path,
                valid: valid_path,
            },
        }),
        None => Ok(LoadedData {
            train: synthetic::generate(
                "synthetic-train",
                cfg.data.synthetic_train_size,
                0.47,
                0.1,
                SYNTHETIC_DATA_SEED,
            )?,
            valid: synthetic::generate(
                "synthetic-valid",
                cfg.data.synthetic_valid_size,
                0.47,
                0.1,
                SYNTHETIC_DATA_SEED + 1,
            )?,
            origin: DataOrigin::Synthetic {
                seed: SYNTHETIC_DATA_SEED,
            },
        }),
    }
}
