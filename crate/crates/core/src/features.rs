//! Vocabulary, bag-of-words counts and TF-IDF vectors over cleaned text.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Maximal runs of at least two word characters (alphanumeric or `_`).
pub fn tokenize_terms(text: &str) -> Vec<&str> {
    let is_word = |c: char| c.is_alphanumeric() || c == '_';
    text.split(|c: char| !is_word(c))
        .filter(|t| t.chars().nth(1).is_some())
        .collect()
}

/// Term ↔ index bijection; indices follow lexicographic term order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    index_to_term: Vec<String>,
    term_to_index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(index_to_term: Vec<String>) -> Self {
        let term_to_index = index_to_term
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            index_to_term,
            term_to_index,
        }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.index_to_term
    }
}

impl Vocabulary {
    pub fn from_terms(terms: impl IntoIterator<Item = String>) -> Self {
        let sorted: BTreeSet<String> = terms.into_iter().collect();
        Vocabulary::from(sorted.into_iter().collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.index_to_term.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_to_term.is_empty()
    }

    pub fn index(&self, term: &str) -> Option<usize> {
        self.term_to_index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.index_to_term.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.index_to_term
    }

    /// Raw in-vocabulary term counts keyed by index.
    fn counts(&self, text: &str) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for t in tokenize_terms(text) {
            if let Some(i) = self.index(t) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        counts
    }
}

pub fn build_vocabulary<S: AsRef<str>>(corpus: &[S]) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("cannot build a vocabulary from an empty corpus".into()));
    }
    Ok(Vocabulary::from_terms(
        corpus
            .iter()
            .flat_map(|d| tokenize_terms(d.as_ref()).into_iter().map(str::to_string)),
    ))
}

/// Sparse vector with strictly increasing indices and non-zero values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector<T> {
    indices: Vec<usize>,
    values: Vec<T>,
    dim: usize,
}

impl<T: Scalar> SparseVector<T> {
    pub fn new(indices: Vec<usize>, values: Vec<T>, dim: usize) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("sparse indices must be strictly increasing".into()));
        }
        if indices.last().is_some_and(|&i| i >= dim) {
            return Err(Error::InvalidArgument(format!("sparse index out of range for dim {dim}")));
        }
        if values.iter().any(|v| v.is_zero()) {
            return Err(Error::InvalidArgument("sparse values must be non-zero".into()));
        }
        Ok(SparseVector { indices, values, dim })
    }

    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            indices: Vec::new(),
            values: Vec::new(),
            dim,
        }
    }

    pub fn from_dense(dense: &[T]) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, &v)| (i, v))
            .unzip();
        SparseVector {
            indices,
            values,
            dim: dense.len(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> T {
        self.indices
            .binary_search(&index)
            .map(|p| self.values[p])
            .unwrap_or_else(|_| T::zero())
    }

    /// `Σ vᵢ·wᵢ`; `weights` must cover `dim`.
    #[inline]
    pub fn dot(&self, weights: &[T]) -> T {
        self.iter().map(|(i, v)| v * weights[i]).sum()
    }

    pub fn l2_norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.dim];
        for (i, v) in self.iter() {
            d[i] = v;
        }
        d
    }

    pub fn cast<U: Scalar>(&self) -> SparseVector<U> {
        SparseVector {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| U::of(v.as_f64())).collect(),
            dim: self.dim,
        }
    }
}

/// Raw term counts; out-of-vocabulary terms are ignored.
pub fn bow_vector<T: Scalar>(text: &str, vocab: &Vocabulary) -> SparseVector<T> {
    let (indices, values) = vocab
        .counts(text)
        .into_iter()
        .map(|(i, c)| (i, T::of(c as f64)))
        .unzip();
    SparseVector {
        indices,
        values,
        dim: vocab.len(),
    }
}

/// Smoothed inverse document frequencies over a fixed vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel<T> {
    pub vocab: Vocabulary,
    pub idf: Vec<T>,
    pub n_docs: usize,
}

/// Fits `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
pub fn tfidf_fit<T: Scalar, S: AsRef<str>>(corpus: &[S]) -> Result<TfidfModel<T>> {
    let vocab = build_vocabulary(corpus)?;
    let mut df = vec![0usize; vocab.len()];
    for doc in corpus {
        for i in vocab.counts(doc.as_ref()).into_keys() {
            df[i] += 1;
        }
    }
    let n = T::of(corpus.len() as f64);
    let idf = df
        .iter()
        .map(|&d| ((T::one() + n) / (T::one() + T::of(d as f64))).ln() + T::one())
        .collect();
    Ok(TfidfModel {
        vocab,
        idf,
        n_docs: corpus.len(),
    })
}

/// `count(t)·idf(t)`, L2-normalized; an all-OOV text maps to the zero vector.
pub fn tfidf_transform<T: Scalar>(text: &str, model: &TfidfModel<T>) -> SparseVector<T> {
    let mut v: SparseVector<T> = bow_vector(text, &model.vocab);
    for (value, &i) in v.values.iter_mut().zip(&v.indices) {
        *value *= model.idf[i];
    }
    let norm = v.l2_norm();
    if norm > T::zero() {
        for value in &mut v.values {
            *value /= norm;
        }
    }
    v
}

impl<T: Scalar> TfidfModel<T> {
    /// `term<TAB>index<TAB>idf` per line, in index order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, term) in self.vocab.terms().iter().enumerate() {
            let _ = writeln!(out, "{term}\t{i}\t{}", self.idf[i]);
        }
        out
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_tsv()).map_err(|e| Error::io(path.as_ref(), e))
    }
}

/// The two sparse representations compared by the classical models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Featurizer<T> {
    Bow { vocab: Vocabulary },
    Tfidf { model: TfidfModel<T> },
}

impl<T: Scalar> Featurizer<T> {
    pub fn fit_bow<S: AsRef<str>>(corpus: &[S]) -> Result<Self> {
        Ok(Featurizer::Bow {
            vocab: build_vocabulary(corpus)?,
        })
    }

    pub fn fit_tfidf<S: AsRef<str>>(corpus: &[S]) -> Result<Self> {
        Ok(Featurizer::Tfidf {
            model: tfidf_fit(corpus)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.vocab().len()
    }

    pub fn vocab(&self) -> &Vocabulary {
        match self {
            Featurizer::Bow { vocab } => vocab,
            Featurizer::Tfidf { model } => &model.vocab,
        }
    }

    pub fn transform(&self, text: &str) -> SparseVector<T> {
        match self {
            Featurizer::Bow { vocab } => bow_vector(text, vocab),
            Featurizer::Tfidf { model } => tfidf_transform(text, model),
        }
    }

    pub fn transform_all<S: AsRef<str>>(&self, texts: &[S]) -> Vec<SparseVector<T>> {
        texts.iter().map(|t| self.transform(t.as_ref())).collect()
    }
}
