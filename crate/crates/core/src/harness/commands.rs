//! `stats`, `preprocess`, `train` and `eval`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{load_data, DataOrigin, ExperimentConfig, FeatureKind, LoadedData, ModelKind};
use crate::classical::ClassicalModel;
use crate::corpus::{load_tsv, split_train_dev, word_count_stats, CorpusStats, Dataset, Label};
use crate::encoder::{encoder_train, load_checkpoint, save_checkpoint, TrainReport, TrainedEncoder};
use crate::error::{Error, Result};
use crate::features::Featurizer;
use crate::metrics::{evaluate, EvalReport};
use crate::preprocess::{clean, Lexicons};

pub const CLASSICAL_ARTIFACT: &str = "model.json";
pub const ENCODER_ARTIFACT: &str = "encoder.bin";
pub const REPORT_FILE: &str = "report.json";
pub const PREDICTIONS_FILE: &str = "predictions.tsv";
const CLASSICAL_MAGIC: &str = "infotweet-classical";
const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub raw: CorpusStats,
    pub cleaned: CorpusStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub data: DataOrigin,
    pub train: SplitStats,
    pub valid: SplitStats,
}

impl StatsReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<28}{:>10}{:>12}", "", "Train", "Validation");
        let row = |s: &mut String, name: &str, a: String, b: String| {
            let _ = writeln!(s, "{name:<28}{a:>10}{b:>12}");
        };
        row(
            &mut s,
            "Informative",
            self.train.raw.count_informative.to_string(),
            self.valid.raw.count_informative.to_string(),
        );
        row(
            &mut s,
            "Uninformative",
            self.train.raw.count_uninformative.to_string(),
            self.valid.raw.count_uninformative.to_string(),
        );
        for (title, pick) in [
            ("before preprocessing", (|x: &SplitStats| &x.raw) as fn(&SplitStats) -> &CorpusStats),
            ("after preprocessing", |x: &SplitStats| &x.cleaned),
        ] {
            let (t, v) = (pick(&self.train), pick(&self.valid));
            row(&mut s, &format!("Max words {title}"), t.wc_max.to_string(), v.wc_max.to_string());
            row(&mut s, &format!("Min words {title}"), t.wc_min.to_string(), v.wc_min.to_string());
            row(&mut s, &format!("Avg words {title}"), format!("{:.3}", t.wc_avg), format!("{:.3}", v.wc_avg));
        }
        s
    }
}

fn clean_dataset(d: &Dataset, lex: &Lexicons) -> Dataset {
    d.map_texts(format!("{}-clean", d.name), |t| clean(t, lex))
}

/// Class counts and word-count statistics before and after cleaning.
pub fn cmd_stats(cfg: &ExperimentConfig) -> Result<StatsReport> {
    let data = load_data(cfg)?;
    let lex = cfg.lexicons()?;
    let split = |d: &Dataset| -> Result<SplitStats> {
        Ok(SplitStats {
            raw: word_count_stats(d)?,
            cleaned: word_count_stats(&clean_dataset(d, &lex))?,
        })
    };
    Ok(StatsReport {
        train: split(&data.train)?,
        valid: split(&data.valid)?,
        data: data.origin,
    })
}

/// Cleaned copies of the train and validation sets.
pub fn cmd_preprocess(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let data = load_data(cfg)?;
    let lex = cfg.lexicons()?;
    Ok((clean_dataset(&data.train, &lex), clean_dataset(&data.valid, &lex)))
}

/// Persisted conventional model together with its fitted featurizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalArtifact {
    pub magic: String,
    pub schema_version: u32,
    pub features: FeatureKind,
    pub featurizer: Featurizer<f64>,
    pub model: ClassicalModel<f64>,
}

impl ClassicalArtifact {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let a: ClassicalArtifact = serde_json::from_str(&text)?;
        if a.magic != CLASSICAL_MAGIC || a.schema_version != SCHEMA_VERSION {
            return Err(Error::Artifact(format!(
                "{}: not a version-{SCHEMA_VERSION} classical model artifact",
                path.display()
            )));
        }
        Ok(a)
    }

    pub fn predict(&self, texts: &[&str]) -> Vec<Label> {
        self.model.predict_all(&self.featurizer.transform_all(texts))
    }
}

/// A trained model of either family.
pub enum TrainedModel {
    Classical(ClassicalArtifact),
    Encoder(Box<TrainedEncoder<f32>>),
}

impl TrainedModel {
    /// Predicts labels for already-cleaned texts.
    pub fn predict(&self, texts: &[&str]) -> Result<Vec<Label>> {
        match self {
            TrainedModel::Classical(a) => Ok(a.predict(texts)),
            TrainedModel::Encoder(e) => e.predict(texts),
        }
    }

    /// Loads whichever artifact `dir` contains.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let classical = dir.join(CLASSICAL_ARTIFACT);
        let encoder = dir.join(ENCODER_ARTIFACT);
        if classical.is_file() {
            Ok(TrainedModel::Classical(ClassicalArtifact::load(classical)?))
        } else if encoder.is_file() {
            Ok(TrainedModel::Encoder(Box::new(load_checkpoint(encoder)?)))
        } else {
            Err(Error::Artifact(format!(
                "{} holds neither {CLASSICAL_ARTIFACT} nor {ENCODER_ARTIFACT}",
                dir.display()
            )))
        }
    }
}

/// Everything `train` records about one run; contains no timestamps, so
/// identical inputs produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub model: ModelKind,
    pub features: FeatureKind,
    pub seed: u64,
    pub data: DataOrigin,
    pub n_train: usize,
    pub n_valid: usize,
    pub eval: EvalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub encoder_training: Option<TrainReport>,
}

/// Fits the configured model on cleaned training data and evaluates it on
/// the cleaned validation set; also returns the validation predictions.
pub fn train_and_evaluate(
    cfg: &ExperimentConfig,
    data: &LoadedData,
) -> Result<(TrainedModel, RunReport, Vec<Label>)> {
    cfg.validate()?;
    let lex = cfg.lexicons()?;
    let train = clean_dataset(&data.train, &lex);
    let valid = clean_dataset(&data.valid, &lex);
    let valid_texts: Vec<&str> = valid.texts().collect();
    let golds = valid.labels()?;

    let (model, encoder_training) = match cfg.model.classical() {
        Some(kind) => {
            let texts: Vec<&str> = train.texts().collect();
            let featurizer = match cfg.features {
                FeatureKind::Bow => Featurizer::fit_bow(&texts)?,
                FeatureKind::Tfidf => Featurizer::fit_tfidf(&texts)?,
                FeatureKind::Subword => unreachable!("rejected by validate"),
            };
            let x = featurizer.transform_all(&texts);
            let model = ClassicalModel::fit(kind, &x, &train.labels()?, &cfg.classical, cfg.seed)?;
            let artifact = ClassicalArtifact {
                magic: CLASSICAL_MAGIC.into(),
                schema_version: SCHEMA_VERSION,
                features: cfg.features,
                featurizer,
                model,
            };
            (TrainedModel::Classical(artifact), None)
        }
        None => {
            let (fit, dev) = split_train_dev(&train, cfg.seed)?;
            let (enc, report) = encoder_train::<f32>(&fit, &dev, &cfg.encoder, cfg.seed)?;
            (TrainedModel::Encoder(Box::new(enc)), Some(report))
        }
    };
    let preds = model.predict(&valid_texts)?;
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        model: cfg.model,
        features: cfg.features,
        seed: cfg.seed,
        data: data.origin.clone(),
        n_train: train.len(),
        n_valid: valid.len(),
        eval: evaluate(&preds, &golds)?,
        encoder_training,
    };
    Ok((model, report, preds))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn predictions_tsv(ids: impl Iterator<Item = impl AsRef<str>>, preds: &[Label]) -> String {
    let mut s = String::from("Id\tLabel\n");
    for (id, p) in ids.zip(preds) {
        let _ = writeln!(s, "{}\t{p}", id.as_ref());
    }
    s
}

/// Trains, evaluates, and writes `report.json`, the model artifact and
/// validation predictions into `out_dir`.
pub fn cmd_train_eval(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let data = load_data(cfg)?;
    let (model, report, preds) = train_and_evaluate(cfg, &data)?;
    ensure_dir(out_dir)?;
    match &model {
        TrainedModel::Classical(a) => write_file(&out_dir.join(CLASSICAL_ARTIFACT), serde_json::to_vec(a)?)?,
        TrainedModel::Encoder(e) => save_checkpoint(e, out_dir.join(ENCODER_ARTIFACT))?,
    }
    write_file(
        &out_dir.join(PREDICTIONS_FILE),
        predictions_tsv(data.valid.tweets().iter().map(|t| t.id.as_str()), &preds),
    )?;
    write_file(&out_dir.join(REPORT_FILE), serde_json::to_vec_pretty(&report)?)?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub dataset: PathBuf,
    pub predictions: Vec<Label>,
    /// Present when every tweet in the evaluated file carries a label.
    pub report: Option<EvalReport>,
    pub predictions_tsv: String,
}

/// Applies a saved model (from `train`) to a TSV file; the validation file
/// from the config when `data` is `None`.
pub fn cmd_eval(cfg: &ExperimentConfig, model_dir: &Path, data: Option<&Path>) -> Result<EvalOutcome> {
    let model = TrainedModel::load_dir(model_dir)?;
    let (path, dataset) = match data {
        Some(p) => (p.to_path_buf(), load_tsv(p)?),
        None => {
            let loaded = load_data(cfg)?;
            let path = match &loaded.origin {
                DataOrigin::Files { valid, .. } => valid.clone(),
                DataOrigin::Synthetic { .. } => PathBuf::from("<synthetic-valid>"),
            };
            (path, loaded.valid)
        }
    };
    let lex = cfg.lexicons()?;
    let texts: Vec<String> = dataset.texts().map(|t| clean(t, &lex)).collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let predictions = model.predict(&refs)?;
    let report = match dataset.labels() {
        Ok(golds) if !golds.is_empty() => Some(evaluate(&predictions, &golds)?),
        _ => None,
    };
    Ok(EvalOutcome {
        dataset: path,
        predictions_tsv: predictions_tsv(dataset.tweets().iter().map(|t| t.id.as_str()), &predictions),
        predictions,
        report,
    })
}
