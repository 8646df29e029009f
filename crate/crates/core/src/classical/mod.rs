//! The five conventional classifiers over sparse BoW / TF-IDF features.

pub mod forest;
pub mod linear;
pub mod mlp;
pub mod naive_bayes;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::numopt::QuasiNewtonConfig;
use crate::scalar::Scalar;

pub use forest::{forest_fit, forest_predict, DecisionTree, ForestParams};
pub use linear::{logreg_fit, svm_fit, LinearLoss, LinearModelParams};
pub use mlp::{mlp_fit, mlp_predict, MlpParams};
pub use naive_bayes::{nb_fit, nb_predict, NaiveBayesParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalKind {
    Logreg,
    Svm,
    Nb,
    Forest,
    Mlp,
}

impl ClassicalKind {
    pub const ALL: [ClassicalKind; 5] = [
        ClassicalKind::Logreg,
        ClassicalKind::Svm,
        ClassicalKind::Nb,
        ClassicalKind::Forest,
        ClassicalKind::Mlp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassicalKind::Logreg => "logreg",
            ClassicalKind::Svm => "svm",
            ClassicalKind::Nb => "nb",
            ClassicalKind::Forest => "forest",
            ClassicalKind::Mlp => "mlp",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ClassicalKind::Logreg => "Logistic Regression",
            ClassicalKind::Svm => "SVM",
            ClassicalKind::Nb => "Naive Bayes",
            ClassicalKind::Forest => "Random Forest",
            ClassicalKind::Mlp => "MLP",
        }
    }
}

impl fmt::Display for ClassicalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassicalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassicalKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown classical model `{s}`")))
    }
}

/// Hyperparameters for all conventional models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassicalConfig {
    pub logreg_c: f64,
    pub svm_c: f64,
    pub nb_alpha: f64,
    pub n_trees: usize,
    pub max_depth: usize,
    pub mlp_alpha: f64,
    pub solver: QuasiNewtonConfig,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        ClassicalConfig {
            logreg_c: 1.0,
            svm_c: 1.0,
            nb_alpha: 1.0,
            n_trees: 100,
            max_depth: 8,
            mlp_alpha: 1e-5,
            solver: QuasiNewtonConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ClassicalModel<T> {
    Logreg(LinearModelParams<T>),
    Svm(LinearModelParams<T>),
    Nb(NaiveBayesParams<T>),
    Forest(ForestParams<T>),
    Mlp(MlpParams<T>),
}

impl<T: Scalar> ClassicalModel<T> {
    pub fn fit(
        kind: ClassicalKind,
        x: &[SparseVector<T>],
        y: &[Label],
        cfg: &ClassicalConfig,
        seed: u64,
    ) -> Result<Self> {
        Ok(match kind {
            ClassicalKind::Logreg => ClassicalModel::Logreg(logreg_fit(x, y, T::of(cfg.logreg_c), &cfg.solver)?),
            ClassicalKind::Svm => ClassicalModel::Svm(svm_fit(x, y, T::of(cfg.svm_c), &cfg.solver)?),
            ClassicalKind::Nb => ClassicalModel::Nb(nb_fit(x, y, T::of(cfg.nb_alpha))?),
            ClassicalKind::Forest => ClassicalModel::Forest(forest_fit(x, y, cfg.n_trees, cfg.max_depth, seed)?),
            ClassicalKind::Mlp => ClassicalModel::Mlp(mlp_fit(x, y, T::of(cfg.mlp_alpha), seed, &cfg.solver)?),
        })
    }

    pub fn kind(&self) -> ClassicalKind {
        match self {
            ClassicalModel::Logreg(_) => ClassicalKind::Logreg,
            ClassicalModel::Svm(_) => ClassicalKind::Svm,
            ClassicalModel::Nb(_) => ClassicalKind::Nb,
            ClassicalModel::Forest(_) => ClassicalKind::Forest,
            ClassicalModel::Mlp(_) => ClassicalKind::Mlp,
        }
    }

    pub fn predict(&self, x: &SparseVector<T>) -> Label {
        match self {
            ClassicalModel::Logreg(m) | ClassicalModel::Svm(m) => m.predict(x),
            ClassicalModel::Nb(m) => m.predict(x),
            ClassicalModel::Forest(m) => m.predict(x),
            ClassicalModel::Mlp(m) => m.predict(x),
        }
    }

    pub fn predict_all(&self, xs: &[SparseVector<T>]) -> Vec<Label> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}
