//! Mini-batch Adam training of the encoder and batch prediction.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bpe::{bpe_train, encode, SubwordVocab, TokenizedInput};
use super::model::{batch_loss_and_grad_with, encoder_forward, DropoutRng, EncoderConfig, EncoderParams};
use crate::corpus::{Dataset, Label};
use crate::error::{Error, Result};
use crate::metrics::evaluate;
use crate::numopt::{adam_step, AdamConfig, AdamState};
use crate::scalar::{softplus, Scalar};

/// Subword vocabulary plus the weights that consume its ids.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedEncoder<T> {
    pub vocab: SubwordVocab,
    pub params: EncoderParams<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    /// Mean mini-batch loss seen during the epoch (dropout active).
    pub train_loss: f64,
    pub dev_loss: f64,
    pub dev_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: EncoderConfig,
    pub seed: u64,
    pub n_train: usize,
    pub n_dev: usize,
    pub subword_vocab_size: usize,
    pub n_parameters: usize,
    /// Dev loss of the freshly initialised model.
    pub initial_dev_loss: f64,
    pub epochs: Vec<EpochReport>,
}

impl TrainReport {
    pub fn final_dev_f1(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.dev_f1)
    }
}

impl<T: Scalar> TrainedEncoder<T> {
    pub fn encode(&self, text: &str) -> TokenizedInput {
        encode(text, &self.vocab)
    }

    pub fn logits(&self, texts: &[&str]) -> Result<Vec<T>> {
        texts
            .par_iter()
            .map(|t| encoder_forward(&self.params, &self.encode(t)))
            .collect()
    }

    pub fn predict(&self, texts: &[&str]) -> Result<Vec<Label>> {
        Ok(self
            .logits(texts)?
            .into_iter()
            .map(|z| Label::from_score(z.as_f64()))
            .collect())
    }
}

/// Labels for `texts` (already cleaned); a positive logit means INFORMATIVE.
pub fn encoder_predict<T: Scalar>(model: &TrainedEncoder<T>, texts: &[&str]) -> Result<Vec<Label>> {
    model.predict(texts)
}

fn logits_of<T: Scalar>(params: &EncoderParams<T>, inputs: &[TokenizedInput]) -> Result<Vec<T>> {
    inputs.par_iter().map(|x| encoder_forward(params, x)).collect()
}

fn mean_bce<T: Scalar>(logits: &[T], labels: &[Label]) -> f64 {
    let total: f64 = logits
        .iter()
        .zip(labels)
        .map(|(&z, &l)| {
            let t = if l == Label::Informative { T::one() } else { T::zero() };
            (softplus(z) - t * z).as_f64()
        })
        .sum();
    total / logits.len().max(1) as f64
}

/// Learns the subword vocabulary on `train`, then trains the encoder for
/// `cfg.epochs` epochs, evaluating on `dev` after each one. Texts are used
/// as given, so callers should clean them first.
///
/// Initialisation, batch order and dropout each draw from their own
/// stream of a generator seeded with `seed`.
pub fn encoder_train<T: Scalar>(
    train: &Dataset,
    dev: &Dataset,
    cfg: &EncoderConfig,
    seed: u64,
) -> Result<(TrainedEncoder<T>, TrainReport)> {
    cfg.validate()?;
    let train_labels = train.labels()?;
    let dev_labels = dev.labels()?;
    if train.is_empty() || dev.is_empty() {
        return Err(Error::InvalidData("encoder training needs non-empty train and dev sets".into()));
    }
    let train_texts: Vec<&str> = train.texts().collect();
    let vocab = bpe_train(&train_texts, cfg.vocab_size)?;
    let mut model_cfg = cfg.clone();
    model_cfg.vocab_size = vocab.len();
    let train_inputs: Vec<TokenizedInput> = train_texts.iter().map(|t| encode(t, &vocab)).collect();
    let dev_inputs: Vec<TokenizedInput> = dev.texts().map(|t| encode(t, &vocab)).collect();

    let stream = |s| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(s);
        r
    };
    let mut init_rng = stream(0);
    let mut order_rng = stream(1);
    let mut dropout_rng = stream(2);

    let mut params = EncoderParams::<T>::init(&model_cfg, &mut init_rng)?;
    let adam = AdamConfig {
        learning_rate: cfg.learning_rate,
        epsilon: cfg.adam_epsilon,
        ..AdamConfig::default()
    };
    let mut states: Vec<AdamState<T>> = params.tensors().iter().map(|t| AdamState::new(t.2.len())).collect();

    let initial_dev_loss = mean_bce(&logits_of(&params, &dev_inputs)?, &dev_labels);
    log::info!(
        "encoder: {} parameters, {} subwords, initial dev loss {initial_dev_loss:.4}",
        params.num_parameters(),
        vocab.len()
    );

    let mut order: Vec<usize> = (0..train_inputs.len()).collect();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut order_rng);
        let mut loss_sum = 0.0;
        let mut n_batches = 0;
        for (batch_idx, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&TokenizedInput> = chunk.iter().map(|&i| &train_inputs[i]).collect();
            let labels: Vec<Label> = chunk.iter().map(|&i| train_labels[i]).collect();
            let dropout = Some(DropoutRng {
                p: cfg.dropout,
                rng: &mut dropout_rng,
            });
            let (loss, grads) = batch_loss_and_grad_with(&params, &batch, &labels, dropout)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: batch_idx });
            }
            for ((p, g), st) in params.tensors_mut().into_iter().zip(grads.tensors()).zip(&mut states) {
                adam_step(p, g.2, st, &adam)?;
            }
            loss_sum += loss.as_f64();
            n_batches += 1;
        }
        let dev_logits = logits_of(&params, &dev_inputs)?;
        let dev_loss = mean_bce(&dev_logits, &dev_labels);
        let preds: Vec<Label> = dev_logits.iter().map(|z| Label::from_score(z.as_f64())).collect();
        let dev_f1 = evaluate(&preds, &dev_labels)?.f1;
        let report = EpochReport {
            epoch,
            train_loss: loss_sum / n_batches as f64,
            dev_loss,
            dev_f1,
        };
        log::info!(
            "encoder epoch {epoch}: train loss {:.4}, dev loss {:.4}, dev F1 {:.4}",
            report.train_loss,
            report.dev_loss,
            report.dev_f1
        );
        epochs.push(report);
    }

    let report = TrainReport {
        config: model_cfg,
        seed,
        n_train: train.len(),
        n_dev: dev.len(),
        subword_vocab_size: vocab.len(),
        n_parameters: params.num_parameters(),
        initial_dev_loss,
        epochs,
    };
    Ok((TrainedEncoder { vocab, params }, report))
}
