//! Post-LayerNorm transformer encoder with a linear head on the `[CLS]`
//! vector, and its hand-written backward pass.
//!
//! Attention is evaluated only over the unmasked positions of an input.
//! That is exactly equivalent to adding −∞ to the scores of padded keys,
//! and it makes the output independent of whatever ids sit under the
//! padding.

use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::bpe::{TokenizedInput, MAX_LEN};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::scalar::{sigmoid, softplus, Scalar};

const LN_EPS: f64 = 1e-5;

/// Architecture and optimisation settings. Defaults are the reference
/// configuration; smaller dimensions are useful for tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub vocab_size: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ffn: usize,
    pub dropout: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_epsilon: f64,
    pub epochs: usize,
    pub init_std: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            vocab_size: 8000,
            d_model: 128,
            n_heads: 4,
            n_layers: 2,
            d_ffn: 256,
            dropout: 0.1,
            batch_size: 32,
            learning_rate: 2e-5,
            adam_epsilon: 1e-8,
            epochs: 4,
            init_std: 0.02,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("encoder config: {m}")));
        if self.d_model == 0 || self.n_heads == 0 || self.d_ffn == 0 || self.n_layers == 0 {
            return bad("dimensions must be positive".into());
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return bad(format!("d_model {} is not divisible by n_heads {}", self.d_model, self.n_heads));
        }
        if self.vocab_size < 5 {
            return bad(format!("vocab_size {} leaves no room beyond the special tokens", self.vocab_size));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if !(self.learning_rate > 0.0) || !(self.adam_epsilon > 0.0) || !(self.init_std > 0.0) {
            return bad("learning_rate, adam_epsilon and init_std must be positive".into());
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams<T> {
    pub wq: Array2<T>,
    pub bq: Array1<T>,
    pub wk: Array2<T>,
    pub bk: Array1<T>,
    pub wv: Array2<T>,
    pub bv: Array1<T>,
    pub wo: Array2<T>,
    pub bo: Array1<T>,
    pub ln1_gamma: Array1<T>,
    pub ln1_beta: Array1<T>,
    pub w1: Array2<T>,
    pub b1: Array1<T>,
    pub w2: Array2<T>,
    pub b2: Array1<T>,
    pub ln2_gamma: Array1<T>,
    pub ln2_beta: Array1<T>,
}

macro_rules! tensor_views {
    ($s:expr, $prefix:expr; $($f:ident),*) => {
        vec![$((format!("{}{}", $prefix, stringify!($f)), $s.$f.shape().to_vec(),
                $s.$f.as_slice().expect("parameters are kept in standard layout"))),*]
    };
}

macro_rules! tensor_views_mut {
    ($s:expr; $($f:ident),*) => {
        vec![$($s.$f.as_slice_mut().expect("parameters are kept in standard layout")),*]
    };
}

impl<T: Scalar> LayerParams<T> {
    fn zeros(d: usize, f: usize) -> Self {
        let m = |r, c| Array2::zeros((r, c));
        let v = |n| Array1::zeros(n);
        LayerParams {
            wq: m(d, d),
            bq: v(d),
            wk: m(d, d),
            bk: v(d),
            wv: m(d, d),
            bv: v(d),
            wo: m(d, d),
            bo: v(d),
            ln1_gamma: v(d),
            ln1_beta: v(d),
            w1: m(d, f),
            b1: v(f),
            w2: m(f, d),
            b2: v(d),
            ln2_gamma: v(d),
            ln2_beta: v(d),
        }
    }

    fn tensors(&self, prefix: &str) -> Vec<(String, Vec<usize>, &[T])> {
        tensor_views!(self, prefix; wq, bq, wk, bk, wv, bv, wo, bo, ln1_gamma, ln1_beta, w1, b1, w2, b2, ln2_gamma, ln2_beta)
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        tensor_views_mut!(self; wq, bq, wk, bk, wv, bv, wo, bo, ln1_gamma, ln1_beta, w1, b1, w2, b2, ln2_gamma, ln2_beta)
    }
}

/// All trainable tensors. Also used as the gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams<T> {
    pub config: EncoderConfig,
    pub tok_emb: Array2<T>,
    pub pos_emb: Array2<T>,
    pub emb_ln_gamma: Array1<T>,
    pub emb_ln_beta: Array1<T>,
    pub layers: Vec<LayerParams<T>>,
    pub head_w: Array1<T>,
    pub head_b: Array1<T>,
}

impl<T: Scalar> EncoderParams<T> {
    /// All-zero tensors shaped for `config`.
    pub fn zeros(config: &EncoderConfig) -> Result<Self> {
        config.validate()?;
        let d = config.d_model;
        Ok(EncoderParams {
            config: config.clone(),
            tok_emb: Array2::zeros((config.vocab_size, d)),
            pos_emb: Array2::zeros((MAX_LEN, d)),
            emb_ln_gamma: Array1::zeros(d),
            emb_ln_beta: Array1::zeros(d),
            layers: (0..config.n_layers).map(|_| LayerParams::zeros(d, config.d_ffn)).collect(),
            head_w: Array1::zeros(d),
            head_b: Array1::zeros(1),
        })
    }

    /// Gaussian(0, init_std) weights and embeddings, zero biases, unit
    /// LayerNorm gains.
    pub fn init(config: &EncoderConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let mut p = Self::zeros(config)?;
        let normal = Normal::new(0.0, config.init_std)
            .map_err(|e| Error::InvalidArgument(format!("init_std: {e}")))?;
        let mut fill = |a: &mut [T]| a.iter_mut().for_each(|x| *x = T::of(normal.sample(rng)));
        fill(p.tok_emb.as_slice_mut().expect("standard layout"));
        fill(p.pos_emb.as_slice_mut().expect("standard layout"));
        p.emb_ln_gamma.fill(T::one());
        for l in &mut p.layers {
            for w in [&mut l.wq, &mut l.wk, &mut l.wv, &mut l.wo, &mut l.w1, &mut l.w2] {
                fill(w.as_slice_mut().expect("standard layout"));
            }
            l.ln1_gamma.fill(T::one());
            l.ln2_gamma.fill(T::one());
        }
        fill(p.head_w.as_slice_mut().expect("standard layout"));
        Ok(p)
    }

    /// `(name, shape, data)` for every tensor in a fixed order.
    pub fn tensors(&self) -> Vec<(String, Vec<usize>, &[T])> {
        let mut out: Vec<(String, Vec<usize>, &[T])> = tensor_views!(self, ""; tok_emb, pos_emb, emb_ln_gamma, emb_ln_beta);
        for (i, l) in self.layers.iter().enumerate() {
            out.extend(l.tensors(&format!("layers.{i}.")));
        }
        out.extend::<Vec<(String, Vec<usize>, &[T])>>(tensor_views!(self, ""; head_w, head_b));
        out
    }

    /// Mutable data slices in the same order as [`EncoderParams::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = tensor_views_mut!(self; tok_emb, pos_emb, emb_ln_gamma, emb_ln_beta);
        for l in &mut self.layers {
            out.extend(l.tensors_mut());
        }
        out.extend::<Vec<&mut [T]>>(tensor_views_mut!(self; head_w, head_b));
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.2.len()).sum()
    }

    pub fn flatten(&self) -> Vec<T> {
        self.tensors().iter().flat_map(|t| t.2.iter().copied()).collect()
    }

    pub fn assign_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.num_parameters() {
            return Err(Error::Shape(format!(
                "flat vector has {} entries, model has {}",
                flat.len(),
                self.num_parameters()
            )));
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.2.iter().all(|x| x.is_finite()))
    }
}

struct LnCache<T> {
    xhat: Array2<T>,
    inv_std: Array1<T>,
}

fn layer_norm<T: Scalar>(x: &Array2<T>, gamma: &Array1<T>, beta: &Array1<T>) -> (Array2<T>, LnCache<T>) {
    let d = T::of(x.ncols() as f64);
    let eps = T::of(LN_EPS);
    let mut xhat = x.clone();
    let mut inv_std = Array1::zeros(x.nrows());
    for (mut row, is) in xhat.rows_mut().into_iter().zip(inv_std.iter_mut()) {
        let mean = row.sum() / d;
        row.mapv_inplace(|v| v - mean);
        let var = row.iter().map(|&v| v * v).sum::<T>() / d;
        let s = T::one() / (var + eps).sqrt();
        *is = s;
        row.mapv_inplace(|v| v * s);
    }
    let y = &xhat * gamma + beta;
    (y, LnCache { xhat, inv_std })
}

fn layer_norm_backward<T: Scalar>(
    dy: &Array2<T>,
    cache: &LnCache<T>,
    gamma: &Array1<T>,
    dgamma: &mut Array1<T>,
    dbeta: &mut Array1<T>,
) -> Array2<T> {
    *dgamma += &(dy * &cache.xhat).sum_axis(Axis(0));
    *dbeta += &dy.sum_axis(Axis(0));
    let d = T::of(dy.ncols() as f64);
    let mut dx = dy * gamma;
    for ((mut row, xh), &is) in dx.rows_mut().into_iter().zip(cache.xhat.rows()).zip(&cache.inv_std) {
        let m1 = row.sum() / d;
        let m2 = row.iter().zip(xh.iter()).map(|(&a, &b)| a * b).sum::<T>() / d;
        row.zip_mut_with(&xh, |g, &x| *g = is * (*g - m1 - x * m2));
    }
    dx
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_K: f64 = 0.044_715;

fn gelu<T: Scalar>(u: T) -> T {
    let (c, k, half) = (T::of(GELU_C), T::of(GELU_K), T::of(0.5));
    half * u * (T::one() + (c * (u + k * u * u * u)).tanh())
}

fn gelu_grad<T: Scalar>(u: T) -> T {
    let (c, k, half) = (T::of(GELU_C), T::of(GELU_K), T::of(0.5));
    let t = (c * (u + k * u * u * u)).tanh();
    half * (T::one() + t) + half * u * (T::one() - t * t) * c * (T::one() + T::of(3.0) * k * u * u)
}

fn softmax_rows<T: Scalar>(s: &mut Array2<T>) {
    for mut row in s.rows_mut() {
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let z = row.sum();
        row.mapv_inplace(|v| v / z);
    }
}

fn add_bias<T: Scalar>(mut x: Array2<T>, b: &Array1<T>) -> Array2<T> {
    x += b;
    x
}

/// Dropout mask source; `None` in evaluation mode.
pub(crate) struct DropoutRng<'a> {
    pub p: f64,
    pub rng: &'a mut ChaCha8Rng,
}

impl DropoutRng<'_> {
    fn mask<T: Scalar>(&mut self, rows: usize, cols: usize) -> Array2<T> {
        let keep = T::of(1.0 / (1.0 - self.p));
        Array2::from_shape_simple_fn((rows, cols), || {
            if self.rng.random::<f64>() < self.p {
                T::zero()
            } else {
                keep
            }
        })
    }
}

struct LayerCache<T> {
    x: Array2<T>,
    q: Array2<T>,
    k: Array2<T>,
    v: Array2<T>,
    probs: Vec<Array2<T>>,
    ctx: Array2<T>,
    drop_attn: Option<Array2<T>>,
    ln1: LnCache<T>,
    h1: Array2<T>,
    u: Array2<T>,
    g: Array2<T>,
    drop_ffn: Option<Array2<T>>,
    ln2: LnCache<T>,
}

struct ForwardCache<T> {
    ids: Vec<usize>,
    ln_emb: LnCache<T>,
    drop_emb: Option<Array2<T>>,
    layers: Vec<LayerCache<T>>,
    cls: Array1<T>,
}

fn gather_ids<T: Scalar>(params: &EncoderParams<T>, input: &TokenizedInput) -> Result<Vec<usize>> {
    if input.ids.len() != input.mask.len() || input.ids.len() > MAX_LEN {
        return Err(Error::Shape(format!(
            "input has {} ids and {} mask entries (max {MAX_LEN})",
            input.ids.len(),
            input.mask.len()
        )));
    }
    if input.mask.first() != Some(&1) {
        return Err(Error::InvalidData("first input position must be an unmasked [CLS]".into()));
    }
    let v = params.config.vocab_size;
    let mut ids = Vec::with_capacity(input.ids.len());
    for (pos, (&id, &m)) in input.ids.iter().zip(&input.mask).enumerate() {
        if id as usize >= v {
            return Err(Error::InvalidData(format!("token id {id} at position {pos} ≥ vocab size {v}")));
        }
        if m == 1 {
            if pos != ids.len() {
                return Err(Error::InvalidData("unmasked positions must form a prefix".into()));
            }
            ids.push(id as usize);
        }
    }
    Ok(ids)
}

fn apply_dropout<T: Scalar>(
    x: Array2<T>,
    dropout: &mut Option<DropoutRng<'_>>,
) -> (Array2<T>, Option<Array2<T>>) {
    match dropout {
        Some(d) if d.p > 0.0 => {
            let m = d.mask(x.nrows(), x.ncols());
            (x * &m, Some(m))
        }
        _ => (x, None),
    }
}

fn forward_cached<T: Scalar>(
    params: &EncoderParams<T>,
    input: &TokenizedInput,
    mut dropout: Option<DropoutRng<'_>>,
) -> Result<(T, ForwardCache<T>)> {
    let cfg = &params.config;
    let ids = gather_ids(params, input)?;
    let n = ids.len();
    let d = cfg.d_model;
    let dh = cfg.head_dim();
    let scale = T::of(1.0 / (dh as f64).sqrt());

    let mut x0 = Array2::zeros((n, d));
    for (i, &id) in ids.iter().enumerate() {
        let mut row = x0.row_mut(i);
        row.assign(&params.tok_emb.row(id));
        row += &params.pos_emb.row(i);
    }
    let (h, ln_emb) = layer_norm(&x0, &params.emb_ln_gamma, &params.emb_ln_beta);
    let (mut h, drop_emb) = apply_dropout(h, &mut dropout);

    let mut layers = Vec::with_capacity(cfg.n_layers);
    for lp in &params.layers {
        let q = add_bias(h.dot(&lp.wq), &lp.bq);
        let k = add_bias(h.dot(&lp.wk), &lp.bk);
        let v = add_bias(h.dot(&lp.wv), &lp.bv);
        let mut ctx = Array2::zeros((n, d));
        let mut probs = Vec::with_capacity(cfg.n_heads);
        for head in 0..cfg.n_heads {
            let cols = s![.., head * dh..(head + 1) * dh];
            let mut p = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            softmax_rows(&mut p);
            ctx.slice_mut(cols).assign(&p.dot(&v.slice(cols)));
            probs.push(p);
        }
        let a = add_bias(ctx.dot(&lp.wo), &lp.bo);
        let (a, drop_attn) = apply_dropout(a, &mut dropout);
        let (h1, ln1) = layer_norm(&(&h + &a), &lp.ln1_gamma, &lp.ln1_beta);
        let u = add_bias(h1.dot(&lp.w1), &lp.b1);
        let g = u.mapv(gelu);
        let f = add_bias(g.dot(&lp.w2), &lp.b2);
        let (f, drop_ffn) = apply_dropout(f, &mut dropout);
        let (h2, ln2) = layer_norm(&(&h1 + &f), &lp.ln2_gamma, &lp.ln2_beta);
        layers.push(LayerCache {
            x: h,
            q,
            k,
            v,
            probs,
            ctx,
            drop_attn,
            ln1,
            h1,
            u,
            g,
            drop_ffn,
            ln2,
        });
        h = h2;
    }
    let cls = h.row(0).to_owned();
    let logit = cls.dot(&params.head_w) + params.head_b[0];
    Ok((
        logit,
        ForwardCache {
            ids,
            ln_emb,
            drop_emb,
            layers,
            cls,
        },
    ))
}

fn mask_grad<T: Scalar>(dy: Array2<T>, mask: &Option<Array2<T>>) -> Array2<T> {
    match mask {
        Some(m) => dy * m,
        None => dy,
    }
}

fn accumulate_linear<T: Scalar>(
    x: &Array2<T>,
    dy: &Array2<T>,
    dw: &mut Array2<T>,
    db: &mut Array1<T>,
) {
    *dw += &x.t().dot(dy);
    *db += &dy.sum_axis(Axis(0));
}

fn backward<T: Scalar>(params: &EncoderParams<T>, cache: &ForwardCache<T>, dlogit: T, grads: &mut EncoderParams<T>) {
    let cfg = &params.config;
    let n = cache.ids.len();
    let dh_dim = cfg.head_dim();
    let scale = T::of(1.0 / (dh_dim as f64).sqrt());

    grads.head_w.scaled_add(dlogit, &cache.cls);
    grads.head_b[0] += dlogit;
    let mut dh = Array2::zeros((n, cfg.d_model));
    dh.row_mut(0).scaled_add(dlogit, &params.head_w);

    for ((lp, lc), lg) in params.layers.iter().zip(&cache.layers).zip(grads.layers.iter_mut()).rev() {
        let d_sum2 = layer_norm_backward(&dh, &lc.ln2, &lp.ln2_gamma, &mut lg.ln2_gamma, &mut lg.ln2_beta);
        let df = mask_grad(d_sum2.clone(), &lc.drop_ffn);
        accumulate_linear(&lc.g, &df, &mut lg.w2, &mut lg.b2);
        let mut du = df.dot(&lp.w2.t());
        du.zip_mut_with(&lc.u, |g, &u| *g *= gelu_grad(u));
        accumulate_linear(&lc.h1, &du, &mut lg.w1, &mut lg.b1);
        let dh1 = d_sum2 + du.dot(&lp.w1.t());

        let d_sum1 = layer_norm_backward(&dh1, &lc.ln1, &lp.ln1_gamma, &mut lg.ln1_gamma, &mut lg.ln1_beta);
        let da = mask_grad(d_sum1.clone(), &lc.drop_attn);
        accumulate_linear(&lc.ctx, &da, &mut lg.wo, &mut lg.bo);
        let dctx = da.dot(&lp.wo.t());

        let mut dq = Array2::zeros((n, cfg.d_model));
        let mut dk = Array2::zeros((n, cfg.d_model));
        let mut dv = Array2::zeros((n, cfg.d_model));
        for (head, p) in lc.probs.iter().enumerate() {
            let cols = s![.., head * dh_dim..(head + 1) * dh_dim];
            let dctx_h = dctx.slice(cols);
            let dp = dctx_h.dot(&lc.v.slice(cols).t());
            dv.slice_mut(cols).assign(&p.t().dot(&dctx_h));
            let ds = softmax_backward(&dp, p) * scale;
            dq.slice_mut(cols).assign(&ds.dot(&lc.k.slice(cols)));
            dk.slice_mut(cols).assign(&ds.t().dot(&lc.q.slice(cols)));
        }
        accumulate_linear(&lc.x, &dq, &mut lg.wq, &mut lg.bq);
        accumulate_linear(&lc.x, &dk, &mut lg.wk, &mut lg.bk);
        accumulate_linear(&lc.x, &dv, &mut lg.wv, &mut lg.bv);
        dh = d_sum1 + dq.dot(&lp.wq.t()) + dk.dot(&lp.wk.t()) + dv.dot(&lp.wv.t());
    }

    let dh = mask_grad(dh, &cache.drop_emb);
    let dx0 = layer_norm_backward(
        &dh,
        &cache.ln_emb,
        &params.emb_ln_gamma,
        &mut grads.emb_ln_gamma,
        &mut grads.emb_ln_beta,
    );
    for (i, (&id, row)) in cache.ids.iter().zip(dx0.rows()).enumerate() {
        grads.tok_emb.row_mut(id).zip_mut_with(&row, |g, &x| *g += x);
        grads.pos_emb.row_mut(i).zip_mut_with(&row, |g, &x| *g += x);
    }
}

/// `dS = P ⊙ (dP − rowsum(dP ⊙ P))`
fn softmax_backward<T: Scalar>(dp: &Array2<T>, p: &Array2<T>) -> Array2<T> {
    let mut ds = dp.clone();
    for ((mut row, prow), dprow) in ds.rows_mut().into_iter().zip(p.rows()).zip(dp.rows()) {
        let dot: T = dprow.iter().zip(prow.iter()).map(|(&a, &b)| a * b).sum();
        row.zip_mut_with(&prow, |x, &pp| *x = pp * (*x - dot));
    }
    ds
}

/// Logit of INFORMATIVE for one input (evaluation mode, no dropout).
pub fn encoder_forward<T: Scalar>(params: &EncoderParams<T>, input: &TokenizedInput) -> Result<T> {
    forward_cached(params, input, None).map(|(z, _)| z)
}

/// Attention probabilities per layer and head, each `n × n` over the
/// `n` unmasked positions of `input`.
pub fn attention_probabilities<T: Scalar>(
    params: &EncoderParams<T>,
    input: &TokenizedInput,
) -> Result<Vec<Vec<Array2<T>>>> {
    let (_, cache) = forward_cached(params, input, None)?;
    Ok(cache.layers.into_iter().map(|l| l.probs).collect())
}

/// Mean binary cross-entropy over `batch` and its gradient with respect
/// to every parameter.
pub(crate) fn batch_loss_and_grad_with<T: Scalar>(
    params: &EncoderParams<T>,
    batch: &[&TokenizedInput],
    labels: &[Label],
    mut dropout: Option<DropoutRng<'_>>,
) -> Result<(T, EncoderParams<T>)> {
    if batch.len() != labels.len() || batch.is_empty() {
        return Err(Error::Shape(format!(
            "batch of {} inputs with {} labels",
            batch.len(),
            labels.len()
        )));
    }
    let mut grads = EncoderParams::zeros(&params.config)?;
    let inv_b = T::of(1.0 / batch.len() as f64);
    let mut loss = T::zero();
    for (input, &label) in batch.iter().zip(labels) {
        let drop = dropout.as_mut().map(|d| DropoutRng { p: d.p, rng: &mut *d.rng });
        let (z, cache) = forward_cached(params, input, drop)?;
        let t = if label == Label::Informative { T::one() } else { T::zero() };
        loss += (softplus(z) - t * z) * inv_b;
        backward(params, &cache, (sigmoid(z) - t) * inv_b, &mut grads);
    }
    Ok((loss, grads))
}

/// Mean binary cross-entropy over `batch` (no dropout) and its gradient.
pub fn batch_loss_and_grad<T: Scalar>(
    params: &EncoderParams<T>,
    batch: &[&TokenizedInput],
    labels: &[Label],
) -> Result<(T, EncoderParams<T>)> {
    batch_loss_and_grad_with(params, batch, labels, None)
}

/// Mean binary cross-entropy without gradients.
pub fn batch_loss<T: Scalar>(params: &EncoderParams<T>, batch: &[&TokenizedInput], labels: &[Label]) -> Result<T> {
    let inv_b = T::of(1.0 / batch.len().max(1) as f64);
    batch.iter().zip(labels).try_fold(T::zero(), |acc, (input, &label)| {
        let z = encoder_forward(params, input)?;
        let t = if label == Label::Informative { T::one() } else { T::zero() };
        Ok(acc + (softplus(z) - t * z) * inv_b)
    })
}
