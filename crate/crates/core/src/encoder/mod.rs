//! Subword tokenisation and a small transformer encoder trained from
//! scratch for binary tweet classification.

pub mod bpe;
pub mod checkpoint;
pub mod model;
pub mod train;

pub use bpe::{bpe_train, encode, SubwordVocab, TokenizedInput, CLS, MAX_LEN, PAD, SEP, SPECIAL_TOKENS, UNK};
pub use checkpoint::{checkpoint_from_bytes, checkpoint_to_bytes, load_checkpoint, save_checkpoint};
pub use model::{
    attention_probabilities, batch_loss, batch_loss_and_grad, encoder_forward, EncoderConfig, EncoderParams,
    LayerParams,
};
pub use train::{encoder_predict, encoder_train, EpochReport, TrainReport, TrainedEncoder};
