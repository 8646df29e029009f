//! L2-regularized linear models: logistic regression and squared-hinge SVM.
//!
//! Both minimize `½‖θ‖² + C·Σ loss(yᵢ·(w·xᵢ + b))` over `θ = (w, b)` with the
//! quasi-Newton solver. The bias is regularized together with the weights,
//! as in LIBLINEAR's bias-as-feature formulation.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::numopt::{minimize_quasi_newton, Objective, QuasiNewtonConfig};
use crate::scalar::{sigmoid, softplus, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearLoss {
    Logistic,
    SquaredHinge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModelParams<T> {
    pub loss: LinearLoss,
    pub weights: Vec<T>,
    pub bias: T,
    pub regularization_c: T,
}

impl<T: Scalar> LinearModelParams<T> {
    pub fn decision(&self, x: &SparseVector<T>) -> T {
        x.dot(&self.weights) + self.bias
    }

    pub fn predict(&self, x: &SparseVector<T>) -> Label {
        Label::from_score(self.decision(x).as_f64())
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// The regularized empirical risk; the last coordinate of `θ` is the bias.
pub struct LinearObjective<'a, T> {
    x: &'a [SparseVector<T>],
    y: Vec<T>,
    c: T,
    loss: LinearLoss,
    dim: usize,
}

impl<'a, T: Scalar> LinearObjective<'a, T> {
    pub fn new(x: &'a [SparseVector<T>], y: &[Label], c: T, loss: LinearLoss) -> Result<Self> {
        let dim = check_xy(x, y)?;
        Ok(LinearObjective {
            x,
            y: y.iter().map(|l| T::of(l.sign())).collect(),
            c,
            loss,
            dim,
        })
    }
}

impl<T: Scalar> Objective<T> for LinearObjective<'_, T> {
    fn dim(&self) -> usize {
        self.dim + 1
    }

    fn eval(&self, theta: &[T], grad: &mut [T]) -> T {
        let (w, b) = theta.split_at(self.dim);
        let b = b[0];
        let half = T::of(0.5);
        let mut f = half * theta.iter().map(|&t| t * t).sum::<T>();
        grad.copy_from_slice(theta);
        let two = T::of(2.0);
        for (xi, &yi) in self.x.iter().zip(&self.y) {
            let margin = yi * (xi.dot(w) + b);
            // d loss / d margin
            let dl = match self.loss {
                LinearLoss::Logistic => {
                    f += self.c * softplus(-margin);
                    -sigmoid(-margin)
                }
                LinearLoss::SquaredHinge => {
                    let slack = T::one() - margin;
                    if slack > T::zero() {
                        f += self.c * slack * slack;
                        -two * slack
                    } else {
                        continue;
                    }
                }
            };
            let coef = self.c * dl * yi;
            for (j, v) in xi.iter() {
                grad[j] += coef * v;
            }
            grad[self.dim] += coef;
        }
        f
    }
}

pub(crate) fn check_xy<T: Scalar>(x: &[SparseVector<T>], y: &[Label]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} feature rows but {} labels", x.len(), y.len())));
    }
    let dim = x[0].dim();
    if x.iter().any(|v| v.dim() != dim) {
        return Err(Error::Shape("feature rows have differing dimensions".into()));
    }
    Ok(dim)
}

fn check_two_classes(y: &[Label]) -> Result<()> {
    if y.iter().all(|&l| l == y[0]) {
        return Err(Error::InvalidArgument(format!(
            "training labels are all {}; need both classes",
            y[0]
        )));
    }
    Ok(())
}

pub fn linear_fit<T: Scalar>(
    x: &[SparseVector<T>],
    y: &[Label],
    c: T,
    loss: LinearLoss,
    solver: &QuasiNewtonConfig,
) -> Result<LinearModelParams<T>> {
    let obj = LinearObjective::new(x, y, c, loss)?;
    check_two_classes(y)?;
    if !(c > T::zero()) {
        return Err(Error::InvalidArgument("C must be > 0".into()));
    }
    let theta0 = vec![T::zero(); obj.dim()];
    let min = minimize_quasi_newton(&obj, &theta0, solver)?;
    log::debug!(
        "{loss:?}: {} iterations, objective {}, converged {}",
        min.iterations,
        min.value,
        min.converged
    );
    let mut weights = min.point;
    let bias = weights.pop().expect("bias coordinate");
    Ok(LinearModelParams {
        loss,
        weights,
        bias,
        regularization_c: c,
    })
}

/// L2-regularized logistic regression; INFORMATIVE is the +1 class.
pub fn logreg_fit<T: Scalar>(
    x: &[SparseVector<T>],
    y: &[Label],
    c: T,
    solver: &QuasiNewtonConfig,
) -> Result<LinearModelParams<T>> {
    linear_fit(x, y, c, LinearLoss::Logistic, solver)
}

/// Linear SVM with the squared hinge loss.
pub fn svm_fit<T: Scalar>(
    x: &[SparseVector<T>],
    y: &[Label],
    c: T,
    solver: &QuasiNewtonConfig,
) -> Result<LinearModelParams<T>> {
    linear_fit(x, y, c, LinearLoss::SquaredHinge, solver)
}
