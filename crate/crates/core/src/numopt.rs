//! Full-batch limited-memory quasi-Newton minimization and the
//! adaptive-moment (Adam) update.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A differentiable function of `dim` variables.
pub trait Objective<T: Scalar> {
    fn dim(&self) -> usize;

    /// Writes the gradient at `x` into `grad` and returns the value.
    fn eval(&self, x: &[T], grad: &mut [T]) -> T;

    fn value(&self, x: &[T]) -> T {
        let mut g = vec![T::zero(); self.dim()];
        self.eval(x, &mut g)
    }
}

/// Closure-backed [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnObjective { dim, f }
    }
}

impl<T: Scalar, F: Fn(&[T], &mut [T]) -> T> Objective<T> for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[T], grad: &mut [T]) -> T {
        (self.f)(x, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiNewtonConfig {
    /// Number of correction pairs kept.
    pub memory: usize,
    pub max_iters: usize,
    /// Stop once `‖∇f‖∞ ≤ grad_tol`.
    pub grad_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    /// Step shrink factor per backtrack.
    pub backtrack: f64,
    pub max_line_search: usize,
}

impl Default for QuasiNewtonConfig {
    fn default() -> Self {
        QuasiNewtonConfig {
            memory: 10,
            max_iters: 200,
            grad_tol: 1e-5,
            c1: 1e-4,
            backtrack: 0.5,
            max_line_search: 50,
        }
    }
}

impl QuasiNewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.memory == 0 {
            return Err(Error::InvalidArgument("quasi-Newton memory must be ≥ 1".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidArgument("grad_tol must be > 0".into()));
        }
        if !(self.c1 > 0.0 && self.c1 < 1.0) || !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidArgument("line-search parameters must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub point: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn inf_norm<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// L-BFGS with two-loop recursion and backtracking Armijo line search.
///
/// Only steps that decrease the objective are accepted, so the returned
/// value never exceeds `f(x0)`. Correction pairs with non-positive
/// curvature are discarded.
pub fn minimize_quasi_newton<T: Scalar>(
    obj: &dyn Objective<T>,
    x0: &[T],
    cfg: &QuasiNewtonConfig,
) -> Result<Minimum<T>> {
    cfg.validate()?;
    let n = obj.dim();
    if x0.len() != n {
        return Err(Error::Shape(format!("x0 has {} entries, objective expects {n}", x0.len())));
    }
    let tol = T::of(cfg.grad_tol);
    let c1 = T::of(cfg.c1);
    let shrink = T::of(cfg.backtrack);

    let mut x = x0.to_vec();
    let mut g = vec![T::zero(); n];
    let mut f = obj.eval(&x, &mut g);
    if !f.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }

    let mut history: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::with_capacity(cfg.memory);
    let mut dir = vec![T::zero(); n];
    let mut x_new = vec![T::zero(); n];
    let mut g_new = vec![T::zero(); n];
    let mut alpha_buf = vec![T::zero(); cfg.memory];

    for iter in 0..cfg.max_iters {
        if inf_norm(&g) <= tol {
            return Ok(Minimum { point: x, value: f, iterations: iter, converged: true });
        }

        // Two-loop recursion: dir = -H g.
        dir.copy_from_slice(&g);
        for (k, (s, y, rho)) in history.iter().enumerate().rev() {
            let a = *rho * dot(s, &dir);
            alpha_buf[k] = a;
            for (d, &yi) in dir.iter_mut().zip(y) {
                *d -= a * yi;
            }
        }
        let gamma = match history.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            // First step has unit length, as in the reference L-BFGS-B code.
            None => T::one() / dot(&g, &g).sqrt(),
        };
        for d in dir.iter_mut() {
            *d *= gamma;
        }
        for (k, (s, y, rho)) in history.iter().enumerate() {
            let b = *rho * dot(y, &dir);
            let a = alpha_buf[k];
            for (d, &si) in dir.iter_mut().zip(s) {
                *d += (a - b) * si;
            }
        }
        for d in dir.iter_mut() {
            *d = -*d;
        }

        let mut slope = dot(&g, &dir);
        if !(slope < T::zero()) {
            // Not a descent direction: restart from steepest descent.
            history.clear();
            let scale = T::one() / dot(&g, &g).sqrt();
            for (d, &gi) in dir.iter_mut().zip(&g) {
                *d = -gi * scale;
            }
            slope = dot(&g, &dir);
        }

        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..cfg.max_line_search {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            let f_new = obj.eval(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= f + c1 * step * slope {
                accepted = Some(f_new);
                break;
            }
            if f_new.is_nan() {
                return Err(Error::NonFinite { iteration: iter + 1 });
            }
            step *= shrink;
        }
        let Some(f_new) = accepted else {
            // Line search exhausted: x is as good as this solver gets.
            return Ok(Minimum { point: x, value: f, iterations: iter, converged: false });
        };

        let s: Vec<T> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > T::epsilon() * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s, y, T::one() / sy));
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        let stalled = f - f_new <= T::epsilon() * f.abs().max(T::one());
        f = f_new;
        if stalled && inf_norm(&g) > tol && history.is_empty() {
            return Ok(Minimum { point: x, value: f, iterations: iter + 1, converged: false });
        }
    }
    let converged = inf_norm(&g) <= tol;
    Ok(Minimum { point: x, value: f, iterations: cfg.max_iters, converged })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub epsilon: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 2e-5,
            epsilon: 1e-8,
            beta1: 0.9,
            beta2: 0.999,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |b: f64| b > 0.0 && b < 1.0;
        if !(self.learning_rate > 0.0) || !(self.epsilon > 0.0) || !in_unit(self.beta1) || !in_unit(self.beta2) {
            return Err(Error::InvalidArgument(format!("invalid Adam configuration {self:?}")));
        }
        Ok(())
    }
}

/// First/second moment estimates and step count for one parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub step: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update, in place:
/// `p ← p − lr · m̂ / (√v̂ + ε)`.
pub fn adam_step<T: Scalar>(
    params: &mut [T],
    grads: &[T],
    state: &mut AdamState<T>,
    cfg: &AdamConfig,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() || params.len() != state.v.len() {
        return Err(Error::Shape(format!(
            "adam: {} params, {} grads, state for {}",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (T::of(cfg.beta1), T::of(cfg.beta2));
    let bc1 = T::one() - T::of(cfg.beta1.powi(t));
    let bc2 = T::one() - T::of(cfg.beta2.powi(t));
    let lr = T::of(cfg.learning_rate);
    let eps = T::of(cfg.epsilon);
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        *m = b1 * *m + (T::one() - b1) * g;
        *v = b2 * *v + (T::one() - b2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// Central finite-difference gradient of `obj` at `x` with step `h`.
pub fn finite_difference_gradient<T: Scalar>(obj: &dyn Objective<T>, x: &[T], h: T) -> Vec<T> {
    let mut probe = x.to_vec();
    let two = T::one() + T::one();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let fp = obj.value(&probe);
            probe[i] = orig - h;
            let fm = obj.value(&probe);
            probe[i] = orig;
            (fp - fm) / (two * h)
        })
        .collect()
}

/// `‖a − b‖₂ / max(‖a‖₂, ‖b‖₂)`, or the absolute difference when both are tiny.
pub fn relative_error<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(&x, &y)| (x - y).as_f64().powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x.as_f64().powi(2)).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x.as_f64().powi(2)).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quadratic(c: Vec<f64>) -> impl Objective<f64> {
        FnObjective::new(c.len(), move |x: &[f64], g: &mut [f64]| {
            let mut f = 0.0;
            for i in 0..x.len() {
                let d = x[i] - c[i];
                f += d * d;
                g[i] = 2.0 * d;
            }
            f
        })
    }

    fn rosenbrock() -> impl Objective<f64> {
        FnObjective::new(2, |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        })
    }

    #[test]
    fn quadratic_converges_to_center() {
        let c = vec![1.5, -2.0, 0.25, 7.0];
        let obj = quadratic(c.clone());
        let m = minimize_quasi_newton(&obj, &[0.0; 4], &QuasiNewtonConfig::default()).unwrap();
        assert!(m.converged);
        for (p, q) in m.point.iter().zip(&c) {
            assert!((p - q).abs() < 1e-6);
        }
    }

    /// Plain gradient descent with a tiny fixed step, run long enough to
    /// settle; independent of the quasi-Newton path.
    fn gradient_descent_rosenbrock() -> [f64; 2] {
        let obj = rosenbrock();
        let mut x = [-1.2, 1.0];
        let mut g = [0.0; 2];
        for _ in 0..2_000_000 {
            obj.eval(&x, &mut g);
            x[0] -= 1e-3 * g[0];
            x[1] -= 1e-3 * g[1];
        }
        x
    }

    #[test]
    fn rosenbrock_reaches_unit_point() {
        let oracle = gradient_descent_rosenbrock();
        assert!((oracle[0] - 1.0).abs() < 1e-4 && (oracle[1] - 1.0).abs() < 1e-4);
        let cfg = QuasiNewtonConfig { grad_tol: 1e-8, ..Default::default() };
        let m = minimize_quasi_newton(&rosenbrock(), &[-1.2, 1.0], &cfg).unwrap();
        assert!((m.point[0] - oracle[0]).abs() < 1e-4, "{:?}", m);
        assert!((m.point[1] - oracle[1]).abs() < 1e-4, "{:?}", m);
    }

    #[test]
    fn logistic_loss_descends() {
        let pts = [(1.0, 2.0, 1.0), (2.0, 1.0, 1.0), (-1.0, -1.5, -1.0), (-2.0, -0.5, -1.0)];
        let obj = FnObjective::new(2, move |w: &[f64], g: &mut [f64]| {
            g.fill(0.0);
            let mut f = 0.0;
            for &(a, b, y) in &pts {
                let z = y * (w[0] * a + w[1] * b);
                f += crate::scalar::softplus(-z);
                let s = -y * crate::scalar::sigmoid(-z);
                g[0] += s * a;
                g[1] += s * b;
            }
            f
        });
        let f0 = obj.value(&[0.0, 0.0]);
        let m = minimize_quasi_newton(&obj, &[0.0, 0.0], &QuasiNewtonConfig::default()).unwrap();
        assert!(m.value <= f0);
    }

    #[test]
    fn non_finite_start_is_error() {
        let obj = FnObjective::new(1, |_: &[f64], g: &mut [f64]| {
            g[0] = 0.0;
            f64::NAN
        });
        assert!(matches!(
            minimize_quasi_newton(&obj, &[0.0], &QuasiNewtonConfig::default()),
            Err(Error::NonFinite { iteration: 0 })
        ));
    }

    #[test]
    fn config_validation() {
        let bad = QuasiNewtonConfig { memory: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = QuasiNewtonConfig { grad_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(AdamConfig { beta1: 1.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn adam_zero_gradient() {
        let mut p = vec![0.5f64, -1.0];
        let mut st = AdamState::new(2);
        adam_step(&mut p, &[0.0, 0.0], &mut st, &AdamConfig::default()).unwrap();
        assert_eq!(p, [0.5, -1.0]);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn adam_first_step_magnitude() {
        let cfg = AdamConfig::default();
        let mut p = vec![0.0f64];
        let mut st = AdamState::new(1);
        adam_step(&mut p, &[1.0], &mut st, &cfg).unwrap();
        let expected = cfg.learning_rate * 1.0 / (1.0 + cfg.epsilon);
        assert!((p[0] + expected).abs() < 1e-18);
    }

    #[test]
    fn adam_shape_mismatch() {
        let mut st = AdamState::<f64>::new(2);
        assert!(adam_step(&mut [0.0, 0.0], &[1.0], &mut st, &AdamConfig::default()).is_err());
    }

    #[test]
    fn adam_shrinks_parabola() {
        // Frozen from a scripted run of the textbook update on f(x) = x².
        let cfg = AdamConfig { learning_rate: 0.1, ..Default::default() };
        let mut x = vec![1.0f64];
        let mut st = AdamState::new(1);
        let mut prev = 1.0f64;
        for _ in 0..10 {
            let g = 2.0 * x[0];
            adam_step(&mut x, &[g], &mut st, &cfg).unwrap();
            assert!(x[0].abs() < prev);
            prev = x[0].abs();
        }
        assert!((x[0] - 0.076_249_155_606_912_21).abs() < 1e-12, "{}", x[0]);
    }

    proptest! {
        #[test]
        fn quasi_newton_never_ascends(c in prop::collection::vec(-5.0f64..5.0, 1..6), x0 in prop::collection::vec(-5.0f64..5.0, 6)) {
            let n = c.len();
            let obj = quadratic(c);
            let start = &x0[..n];
            let f0 = obj.value(start);
            let m = minimize_quasi_newton(&obj, start, &QuasiNewtonConfig::default()).unwrap();
            prop_assert!(m.value <= f0);
            let again = minimize_quasi_newton(&obj, start, &QuasiNewtonConfig::default()).unwrap();
            prop_assert_eq!(m, again);
        }
    }
}
