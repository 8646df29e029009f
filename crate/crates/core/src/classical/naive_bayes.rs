//! Multinomial naive Bayes with additive (Laplace) smoothing.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::scalar::{log_sum_exp, Scalar};

use super::linear::check_xy;

/// Per-class log prior and per-(class, term) log likelihood, indexed by
/// [`Label::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesParams<T> {
    pub log_prior: [T; 2],
    pub log_likelihood: [Vec<T>; 2],
    pub smoothing_alpha: T,
}

/// Fits class priors from label frequencies and
/// `θ_ct = (N_ct + α) / (N_c + α·V)` from summed feature values.
pub fn nb_fit<T: Scalar>(x: &[SparseVector<T>], y: &[Label], alpha: T) -> Result<NaiveBayesParams<T>> {
    let dim = check_xy(x, y)?;
    if !(alpha > T::zero()) {
        return Err(Error::InvalidArgument("smoothing alpha must be > 0".into()));
    }
    let mut class_docs = [0usize; 2];
    let mut counts = [vec![T::zero(); dim], vec![T::zero(); dim]];
    for (xi, &yi) in x.iter().zip(y) {
        let c = yi.index();
        class_docs[c] += 1;
        for (j, v) in xi.iter() {
            if v < T::zero() {
                return Err(Error::InvalidArgument(format!(
                    "naive Bayes needs non-negative features, found {v} at term {j}"
                )));
            }
            counts[c][j] += v;
        }
    }
    if class_docs.contains(&0) {
        return Err(Error::InvalidArgument("naive Bayes needs examples of both classes".into()));
    }
    let n = T::of(x.len() as f64);
    let log_prior = class_docs.map(|k| (T::of(k as f64) / n).ln());
    let v = T::of(dim as f64);
    let log_likelihood = counts.map(|row| {
        let total: T = row.iter().copied().sum();
        let denom = (total + alpha * v).ln();
        row.into_iter().map(|c| (c + alpha).ln() - denom).collect()
    });
    Ok(NaiveBayesParams {
        log_prior,
        log_likelihood,
        smoothing_alpha: alpha,
    })
}

impl<T: Scalar> NaiveBayesParams<T> {
    /// Unnormalized joint log probability per class.
    pub fn joint_log_likelihood(&self, x: &SparseVector<T>) -> [T; 2] {
        [0, 1].map(|c| {
            self.log_prior[c] + x.iter().map(|(j, v)| v * self.log_likelihood[c][j]).sum::<T>()
        })
    }

    /// Normalized log posterior per class.
    pub fn log_posterior(&self, x: &SparseVector<T>) -> [T; 2] {
        let jll = self.joint_log_likelihood(x);
        let z = log_sum_exp(&jll);
        jll.map(|v| v - z)
    }

    /// Arg-max class; an exact tie goes to UNINFORMATIVE.
    pub fn predict(&self, x: &SparseVector<T>) -> Label {
        let jll = self.joint_log_likelihood(x);
        if jll[Label::Informative.index()] > jll[Label::Uninformative.index()] {
            Label::Informative
        } else {
            Label::Uninformative
        }
    }
}

pub fn nb_predict<T: Scalar>(x: &SparseVector<T>, params: &NaiveBayesParams<T>) -> Label {
    params.predict(x)
}
