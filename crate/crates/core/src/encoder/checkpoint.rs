//! Binary checkpoint: magic, little-endian header length, JSON header
//! (config, dtype, tensor table, subword vocabulary), then every tensor's
//! values as little-endian floats in header order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bpe::SubwordVocab;
use super::model::{EncoderConfig, EncoderParams};
use super::train::TrainedEncoder;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"ITWENC01";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    dtype: String,
    config: EncoderConfig,
    tensors: Vec<TensorEntry>,
    subword_vocab: String,
}

pub fn checkpoint_to_bytes<T: Scalar>(model: &TrainedEncoder<T>) -> Result<Vec<u8>> {
    let tensors = model.params.tensors();
    let header = Header {
        format_version: FORMAT_VERSION,
        dtype: T::DTYPE.to_string(),
        config: model.params.config.clone(),
        tensors: tensors
            .iter()
            .map(|(name, shape, _)| TensorEntry {
                name: name.clone(),
                shape: shape.clone(),
            })
            .collect(),
        subword_vocab: model.vocab.to_text(),
    };
    let header = serde_json::to_vec(&header)?;
    let width = std::mem::size_of::<T>();
    let mut out = Vec::with_capacity(12 + header.len() + model.params.num_parameters() * width);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for (_, _, data) in tensors {
        for &x in data {
            x.write_le(&mut out);
        }
    }
    Ok(out)
}

pub fn checkpoint_from_bytes<T: Scalar>(bytes: &[u8]) -> Result<TrainedEncoder<T>> {
    let bad = |m: String| Error::Artifact(format!("encoder checkpoint: {m}"));
    if bytes.len() < 12 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(bad("bad magic".into()));
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let body = bytes.get(12..12 + hlen).ok_or_else(|| bad("truncated header".into()))?;
    let header: Header = serde_json::from_slice(body)?;
    if header.format_version != FORMAT_VERSION {
        return Err(bad(format!("unsupported format version {}", header.format_version)));
    }
    if header.dtype != T::DTYPE {
        return Err(bad(format!("stored as {}, requested {}", header.dtype, T::DTYPE)));
    }
    let vocab = SubwordVocab::from_text(&header.subword_vocab)?;
    let mut params = EncoderParams::<T>::zeros(&header.config)?;
    {
        let expected = params.tensors();
        if expected.len() != header.tensors.len()
            || expected
                .iter()
                .zip(&header.tensors)
                .any(|((n, s, _), e)| *n != e.name || *s != e.shape)
        {
            return Err(bad("tensor table does not match the configuration".into()));
        }
    }
    let width = std::mem::size_of::<T>();
    let mut data = &bytes[12 + hlen..];
    if data.len() != params.num_parameters() * width {
        return Err(bad(format!(
            "expected {} bytes of tensor data, found {}",
            params.num_parameters() * width,
            data.len()
        )));
    }
    for t in params.tensors_mut() {
        for x in t.iter_mut() {
            *x = T::read_le(&data[..width]);
            data = &data[width..];
        }
    }
    Ok(TrainedEncoder { vocab, params })
}

pub fn save_checkpoint<T: Scalar>(model: &TrainedEncoder<T>, path: impl AsRef<Path>) -> Result<()> {
    let bytes = checkpoint_to_bytes(model)?;
    std::fs::write(path.as_ref(), bytes).map_err(|e| Error::io(path.as_ref(), e))
}

pub fn load_checkpoint<T: Scalar>(path: impl AsRef<Path>) -> Result<TrainedEncoder<T>> {
    let bytes = std::fs::read(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    checkpoint_from_bytes(&bytes)
}
