//! Shared-task data: labels, tweets, TSV ingestion, class and word-count
//! statistics, and the seeded 9:1 train/dev split.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    Informative,
    Uninformative,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Informative, Label::Uninformative];

    /// Index used by per-class parameter tables.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Label::Informative => 0,
            Label::Uninformative => 1,
        }
    }

    /// `+1` for INFORMATIVE, `-1` otherwise.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Informative => 1.0,
            Label::Uninformative => -1.0,
        }
    }

    /// A strictly positive score means INFORMATIVE; zero falls to UNINFORMATIVE.
    #[inline]
    pub fn from_score(score: f64) -> Label {
        if score > 0.0 {
            Label::Informative
        } else {
            Label::Uninformative
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Informative => "INFORMATIVE",
            Label::Uninformative => "UNINFORMATIVE",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "INFORMATIVE" => Ok(Label::Informative),
            "UNINFORMATIVE" => Ok(Label::Uninformative),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
}

impl Tweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<Label>) -> Result<Self> {
        let (id, text) = (id.into(), text.into());
        if id.is_empty() {
            return Err(Error::InvalidData("tweet id is empty".into()));
        }
        if text.is_empty() {
            return Err(Error::InvalidData(format!("tweet {id} has empty text")));
        }
        Ok(Tweet { id, text, label })
    }
}

/// An ordered, named collection of tweets with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    tweets: Vec<Tweet>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, tweets: Vec<Tweet>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(tweets.len());
        for t in &tweets {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::InvalidData(format!("duplicate tweet id {}", t.id)));
            }
        }
        Ok(Dataset {
            name: name.into(),
            tweets,
        })
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.tweets.iter().map(|t| t.text.as_str())
    }

    /// Gold labels; errors if any tweet is unlabeled.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.tweets
            .iter()
            .map(|t| {
                t.label
                    .ok_or_else(|| Error::InvalidData(format!("tweet {} is unlabeled", t.id)))
            })
            .collect()
    }

    /// Same ids and labels with each text replaced by `f(text)`.
    pub fn map_texts(&self, name: impl Into<String>, mut f: impl FnMut(&str) -> String) -> Dataset {
        let tweets = self
            .tweets
            .iter()
            .map(|t| Tweet {
                id: t.id.clone(),
                text: f(&t.text),
                label: t.label,
            })
            .collect();
        Dataset {
            name: name.into(),
            tweets,
        }
    }
}

/// Parses `Id<TAB>Text<TAB>Label` data with one header row.
///
/// A two-column header (`Id<TAB>Text`) is accepted for unlabeled files.
pub fn parse_tsv(name: &str, content: &str) -> Result<Dataset> {
    let mut lines = content.lines().enumerate();
    let columns = match lines.next() {
        Some((_, header)) => header.trim_end_matches('\r').split('\t').count(),
        None => {
            return Err(Error::Parse {
                path: name.into(),
                line: 1,
                message: "missing header row".into(),
            })
        }
    };
    if columns != 2 && columns != 3 {
        return Err(Error::Parse {
            path: name.into(),
            line: 1,
            message: format!("header has {columns} columns, expected 3 (Id, Text, Label)"),
        });
    }

    let mut tweets = Vec::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns {
            return Err(Error::Parse {
                path: name.into(),
                line: line_no,
                message: format!("expected {columns} tab-separated fields, found {}", fields.len()),
            });
        }
        let label = if columns == 3 {
            Some(fields[2].parse::<Label>().map_err(|e| Error::Parse {
                path: name.into(),
                line: line_no,
                message: e.to_string(),
            })?)
        } else {
            None
        };
        let tweet = Tweet::new(fields[0], fields[1], label).map_err(|e| Error::Parse {
            path: name.into(),
            line: line_no,
            message: e.to_string(),
        })?;
        tweets.push(tweet);
    }
    Dataset::new(name, tweets)
}

pub fn load_tsv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_tsv(&name, &content).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.display().to_string(),
            line,
            message,
        },
        other => other,
    })
}

/// Writes the dataset in the same three-column layout `load_tsv` reads.
pub fn write_tsv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("Id\tText\tLabel\n");
    for t in d.tweets() {
        let label = t.label.map(Label::as_str).unwrap_or("");
        out.push_str(&format!("{}\t{}\t{}\n", t.id, t.text, label));
    }
    std::fs::write(path.as_ref(), out).map_err(|e| Error::io(path.as_ref(), e))
}

/// `(informative, uninformative)` counts.
pub fn class_counts(d: &Dataset) -> Result<(usize, usize)> {
    let mut counts = (0, 0);
    for label in d.labels()? {
        match label {
            Label::Informative => counts.0 += 1,
            Label::Uninformative => counts.1 += 1,
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub count_informative: usize,
    pub count_uninformative: usize,
    pub wc_max: usize,
    pub wc_min: usize,
    /// Mean words per tweet, rounded to 3 decimals.
    pub wc_avg: f64,
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Class counts plus max/min/mean whitespace word counts.
///
/// Unlabeled tweets contribute to the word counts but not the class counts.
pub fn word_count_stats(d: &Dataset) -> Result<CorpusStats> {
    if d.is_empty() {
        return Err(Error::InvalidData(format!("dataset {} is empty", d.name)));
    }
    let counts: Vec<usize> = d.texts().map(word_count).collect();
    let total: usize = counts.iter().sum();
    let avg = total as f64 / counts.len() as f64;
    let (mut inf, mut uninf) = (0, 0);
    for t in d.tweets() {
        match t.label {
            Some(Label::Informative) => inf += 1,
            Some(Label::Uninformative) => uninf += 1,
            None => {}
        }
    }
    Ok(CorpusStats {
        count_informative: inf,
        count_uninformative: uninf,
        wc_max: *counts.iter().max().unwrap(),
        wc_min: *counts.iter().min().unwrap(),
        wc_avg: (avg * 1000.0).round() / 1000.0,
    })
}

/// Uniform seeded permutation, first ⌈0.9·n⌉ to train, remainder to dev.
pub fn split_train_dev(d: &Dataset, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = d.len();
    if n < 10 {
        return Err(Error::InvalidData(format!(
            "need at least 10 tweets to split, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (n * 9).div_ceil(10);
    let pick = |idx: &[usize]| idx.iter().map(|&i| d.tweets[i].clone()).collect::<Vec<_>>();
    Ok((
        Dataset {
            name: format!("{}-train", d.name),
            tweets: pick(&order[..n_train]),
        },
        Dataset {
            name: format!("{}-dev", d.name),
            tweets: pick(&order[n_train..]),
        },
    ))
}
