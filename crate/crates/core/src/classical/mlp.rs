//! Two-hidden-layer perceptron (input → 5 → 2 → 1) with rectified hidden
//! units, a logistic output and an L2 weight penalty, trained full-batch
//! with the quasi-Newton solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::numopt::{minimize_quasi_newton, Objective, QuasiNewtonConfig};
use crate::scalar::{softplus, Scalar};

use super::linear::check_xy;

pub const HIDDEN1: usize = 5;
pub const HIDDEN2: usize = 2;

/// Flat parameter layout: `w1 (in×5) | b1 (5) | w2 (5×2) | b2 (2) | w3 (2) | b3 (1)`,
/// matrices row-major by input unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams<T> {
    pub input_dim: usize,
    pub flat: Vec<T>,
    pub l2_alpha: T,
}

#[derive(Clone, Copy)]
struct Layout {
    input: usize,
}

impl Layout {
    fn w1(self) -> usize {
        0
    }
    fn b1(self) -> usize {
        self.input * HIDDEN1
    }
    fn w2(self) -> usize {
        self.b1() + HIDDEN1
    }
    fn b2(self) -> usize {
        self.w2() + HIDDEN1 * HIDDEN2
    }
    fn w3(self) -> usize {
        self.b2() + HIDDEN2
    }
    fn b3(self) -> usize {
        self.w3() + HIDDEN2
    }
    fn len(self) -> usize {
        self.b3() + 1
    }
    fn is_weight(self, i: usize) -> bool {
        i < self.b1() || (self.w2()..self.b2()).contains(&i) || (self.w3()..self.b3()).contains(&i)
    }
}

struct Activations<T> {
    z1: [T; HIDDEN1],
    a1: [T; HIDDEN1],
    z2: [T; HIDDEN2],
    a2: [T; HIDDEN2],
    out: T,
}

fn relu<T: Scalar>(z: T) -> T {
    z.max(T::zero())
}

fn forward<T: Scalar>(p: &[T], lay: Layout, x: &SparseVector<T>) -> Activations<T> {
    let mut z1 = [T::zero(); HIDDEN1];
    z1.copy_from_slice(&p[lay.b1()..lay.b1() + HIDDEN1]);
    for (j, v) in x.iter() {
        let row = &p[lay.w1() + j * HIDDEN1..lay.w1() + (j + 1) * HIDDEN1];
        for h in 0..HIDDEN1 {
            z1[h] += v * row[h];
        }
    }
    let a1 = z1.map(relu);
    let mut z2 = [T::zero(); HIDDEN2];
    for k in 0..HIDDEN2 {
        z2[k] = p[lay.b2() + k]
            + (0..HIDDEN1).map(|h| a1[h] * p[lay.w2() + h * HIDDEN2 + k]).sum::<T>();
    }
    let a2 = z2.map(relu);
    let out = p[lay.b3()] + (0..HIDDEN2).map(|k| a2[k] * p[lay.w3() + k]).sum::<T>();
    Activations { z1, a1, z2, a2, out }
}

/// Mean binary cross-entropy plus `α/(2n)·‖W‖²` over the weight matrices.
pub struct MlpObjective<'a, T> {
    x: &'a [SparseVector<T>],
    target: Vec<T>,
    alpha: T,
    layout: Layout,
}

impl<'a, T: Scalar> MlpObjective<'a, T> {
    pub fn new(x: &'a [SparseVector<T>], y: &[Label], alpha: T) -> Result<Self> {
        let input = check_xy(x, y)?;
        Ok(MlpObjective {
            x,
            target: y
                .iter()
                .map(|&l| if l == Label::Informative { T::one() } else { T::zero() })
                .collect(),
            alpha,
            layout: Layout { input },
        })
    }
}

impl<T: Scalar> Objective<T> for MlpObjective<'_, T> {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn eval(&self, p: &[T], grad: &mut [T]) -> T {
        let lay = self.layout;
        grad.fill(T::zero());
        let n = T::of(self.x.len() as f64);
        let inv_n = T::one() / n;
        let mut loss = T::zero();
        for (x, &t) in self.x.iter().zip(&self.target) {
            let a = forward(p, lay, x);
            // BCE with logits: softplus(z) − t·z
            loss += softplus(a.out) - t * a.out;
            let d_out = (crate::scalar::sigmoid(a.out) - t) * inv_n;
            grad[lay.b3()] += d_out;
            let mut d_z2 = [T::zero(); HIDDEN2];
            for k in 0..HIDDEN2 {
                grad[lay.w3() + k] += d_out * a.a2[k];
                if a.z2[k] > T::zero() {
                    d_z2[k] = d_out * p[lay.w3() + k];
                }
            }
            let mut d_z1 = [T::zero(); HIDDEN1];
            for h in 0..HIDDEN1 {
                let mut acc = T::zero();
                for k in 0..HIDDEN2 {
                    grad[lay.w2() + h * HIDDEN2 + k] += d_z2[k] * a.a1[h];
                    acc += d_z2[k] * p[lay.w2() + h * HIDDEN2 + k];
                }
                if a.z1[h] > T::zero() {
                    d_z1[h] = acc;
                }
            }
            for k in 0..HIDDEN2 {
                grad[lay.b2() + k] += d_z2[k];
            }
            for h in 0..HIDDEN1 {
                grad[lay.b1() + h] += d_z1[h];
            }
            for (j, v) in x.iter() {
                let base = lay.w1() + j * HIDDEN1;
                for h in 0..HIDDEN1 {
                    grad[base + h] += d_z1[h] * v;
                }
            }
        }
        loss *= inv_n;
        let scale = self.alpha * inv_n;
        let mut penalty = T::zero();
        for (i, (&w, g)) in p.iter().zip(grad.iter_mut()).enumerate() {
            if lay.is_weight(i) {
                penalty += w * w;
                *g += scale * w;
            }
        }
        loss + scale * T::of(0.5) * penalty
    }
}

impl<T: Scalar> MlpParams<T> {
    /// All-zero parameters: every input is scored at probability ½.
    pub fn zeros(input_dim: usize, l2_alpha: T) -> Self {
        MlpParams {
            input_dim,
            flat: vec![T::zero(); Layout { input: input_dim }.len()],
            l2_alpha,
        }
    }

    /// Glorot-uniform weights and biases: bound `√(6/(fan_in+fan_out))` for
    /// the rectified layers, `√(2/(fan_in+fan_out))` for the logistic output.
    pub fn glorot(input_dim: usize, l2_alpha: T, seed: u64) -> Self {
        let lay = Layout { input: input_dim };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut flat = vec![T::zero(); lay.len()];
        let mut fill = |range: std::ops::Range<usize>, bound: f64, rng: &mut ChaCha8Rng| {
            for v in &mut flat[range] {
                *v = T::of(rng.random_range(-bound..bound));
            }
        };
        let b1 = (6.0 / (input_dim + HIDDEN1) as f64).sqrt();
        let b2 = (6.0 / (HIDDEN1 + HIDDEN2) as f64).sqrt();
        let b3 = (2.0 / (HIDDEN2 + 1) as f64).sqrt();
        fill(lay.w1()..lay.w2(), b1, &mut rng);
        fill(lay.w2()..lay.w3(), b2, &mut rng);
        fill(lay.w3()..lay.len(), b3, &mut rng);
        MlpParams { input_dim, flat, l2_alpha }
    }

    pub fn logit(&self, x: &SparseVector<T>) -> T {
        forward(&self.flat, Layout { input: self.input_dim }, x).out
    }

    /// INFORMATIVE iff the output logit is strictly positive.
    pub fn predict(&self, x: &SparseVector<T>) -> Label {
        Label::from_score(self.logit(x).as_f64())
    }

    /// Sum of squares of the three weight matrices.
    pub fn weight_norm_sq(&self) -> T {
        let lay = Layout { input: self.input_dim };
        self.flat
            .iter()
            .enumerate()
            .filter(|(i, _)| lay.is_weight(*i))
            .map(|(_, &w)| w * w)
            .sum()
    }
}

pub fn mlp_predict<T: Scalar>(x: &SparseVector<T>, params: &MlpParams<T>) -> Label {
    params.predict(x)
}

/// Initialisations tried before giving up on escaping the collapsed solution.
const MAX_FIT_DRAWS: u64 = 8;

/// Fits from a Glorot initialisation drawn with `seed`. With only two
/// units in the second hidden layer, a start (or an early step) can leave
/// both silent on every row; the fit then cannot beat a constant
/// predictor, and it is repeated from the next derived seed.
pub fn mlp_fit<T: Scalar>(
    x: &[SparseVector<T>],
    y: &[Label],
    alpha: T,
    seed: u64,
    solver: &QuasiNewtonConfig,
) -> Result<MlpParams<T>> {
    let obj = MlpObjective::new(x, y, alpha)?;
    // The best constant predictor's loss: a fit that cannot beat it has
    // collapsed (every second-layer unit silent on every row).
    let pos = obj.target.iter().filter(|&&t| t > T::zero()).count() as f64 / x.len() as f64;
    let constant_loss = -(pos * pos.ln() + (1.0 - pos) * (1.0 - pos).ln());
    let mut fallback = None;
    for draw in 0..MAX_FIT_DRAWS {
        let init = MlpParams::glorot(x[0].dim(), alpha, seed.wrapping_add(draw.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        let min = minimize_quasi_newton(&obj, &init.flat, solver)?;
        if !min.value.is_finite() {
            return Err(Error::NonFinite { iteration: min.iterations });
        }
        log::debug!("mlp: draw {draw}, {} iterations, loss {}", min.iterations, min.value);
        let fitted = MlpParams {
            input_dim: init.input_dim,
            flat: min.point,
            l2_alpha: alpha,
        };
        if min.value.as_f64() < constant_loss * (1.0 - 1e-3) {
            return Ok(fitted);
        }
        fallback.get_or_insert(fitted);
    }
    log::warn!("mlp: every initialisation collapsed to a constant predictor");
    Ok(fallback.expect("at least one draw"))
}
