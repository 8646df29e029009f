//! Byte-pair subword vocabulary and fixed-length input encoding.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PAD: u32 = 0;
pub const CLS: u32 = 1;
pub const SEP: u32 = 2;
pub const UNK: u32 = 3;
pub const SPECIAL_TOKENS: [&str; 4] = ["[PAD]", "[CLS]", "[SEP]", "[UNK]"];

/// Encoded sequence length, special tokens included.
pub const MAX_LEN: usize = 100;

const FILE_MAGIC: &str = "subword-vocab v1";

/// Learned merges plus the id table. Ids 0..4 are the special tokens,
/// followed by the base alphabet in char order, then merge results in
/// the order they were learned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubwordVocab {
    tokens: Vec<String>,
    token_to_id: HashMap<String, u32>,
    merges: Vec<(String, String)>,
    /// `(left id, right id) → (rank, merged id)`
    merge_rank: HashMap<(u32, u32), (usize, u32)>,
}

impl SubwordVocab {
    fn from_parts(tokens: Vec<String>, merges: Vec<(String, String)>) -> Result<Self> {
        if tokens.len() < SPECIAL_TOKENS.len() || tokens[..4] != SPECIAL_TOKENS {
            return Err(Error::InvalidData("subword vocabulary must start with the four special tokens".into()));
        }
        let mut token_to_id = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if token_to_id.insert(t.clone(), i as u32).is_some() {
                return Err(Error::InvalidData(format!("duplicate subword token {t:?}")));
            }
        }
        let mut merge_rank = HashMap::with_capacity(merges.len());
        for (rank, (a, b)) in merges.iter().enumerate() {
            let id = |s: &str| {
                token_to_id
                    .get(s)
                    .copied()
                    .ok_or_else(|| Error::InvalidData(format!("merge refers to unknown token {s:?}")))
            };
            let merged = id(&format!("{a}{b}"))?;
            if merged < 4 {
                return Err(Error::InvalidData("a merge may not produce a special token".into()));
            }
            merge_rank.entry((id(a)?, id(b)?)).or_insert((rank, merged));
        }
        Ok(SubwordVocab {
            tokens,
            token_to_id,
            merges,
            merge_rank,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    /// Subword ids of one whitespace-free word; unknown chars map to UNK.
    pub fn encode_word(&self, word: &str) -> Vec<u32> {
        let mut buf = [0u8; 4];
        let mut symbols: Vec<u32> = word
            .chars()
            .map(|c| self.id(c.encode_utf8(&mut buf)).unwrap_or(UNK))
            .collect();
        loop {
            let best = symbols
                .windows(2)
                .filter_map(|w| self.merge_rank.get(&(w[0], w[1])))
                .min();
            let Some(&(rank, merged)) = best else { break };
            let (a, b) = {
                let (l, r) = &self.merges[rank];
                (self.token_to_id[l], self.token_to_id[r])
            };
            let mut out = Vec::with_capacity(symbols.len());
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len() && symbols[i] == a && symbols[i + 1] == b {
                    out.push(merged);
                    i += 2;
                } else {
                    out.push(symbols[i]);
                    i += 1;
                }
            }
            symbols = out;
        }
        symbols
    }

    pub fn tokenize(&self, text: &str) -> Vec<u32> {
        text.split_whitespace().flat_map(|w| self.encode_word(w)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{FILE_MAGIC}");
        let _ = writeln!(s, "tokens {}", self.tokens.len());
        for t in &self.tokens {
            let _ = writeln!(s, "{t}");
        }
        let _ = writeln!(s, "merges {}", self.merges.len());
        for (a, b) in &self.merges {
            let _ = writeln!(s, "{a}\t{b}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidData(format!("subword vocab file: {m}"));
        let mut lines = text.lines();
        if lines.next() != Some(FILE_MAGIC) {
            return Err(bad("missing `subword-vocab v1` header"));
        }
        let count = |line: Option<&str>, key: &str| -> Result<usize> {
            line.and_then(|l| l.strip_prefix(key))
                .and_then(|n| n.trim().parse().ok())
                .ok_or_else(|| bad(&format!("expected `{key}<count>`")))
        };
        let n_tokens = count(lines.next(), "tokens ")?;
        let tokens: Vec<String> = lines.by_ref().take(n_tokens).map(str::to_string).collect();
        if tokens.len() != n_tokens {
            return Err(bad("truncated token table"));
        }
        let n_merges = count(lines.next(), "merges ")?;
        let merges = lines
            .by_ref()
            .take(n_merges)
            .map(|l| {
                l.split_once('\t')
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .ok_or_else(|| bad("merge line without tab"))
            })
            .collect::<Result<Vec<_>>>()?;
        if merges.len() != n_merges {
            return Err(bad("truncated merge list"));
        }
        Self::from_parts(tokens, merges)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_text()).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_text(&text)
    }
}

/// Learns byte-pair merges over the whitespace-split words of `corpus`
/// until the vocabulary (specials + alphabet + merges) reaches `vocab_size`
/// or no pair remains. Equal pair counts break toward the lexicographically
/// smallest `(left, right)` pair.
pub fn bpe_train<S: AsRef<str>>(corpus: &[S], vocab_size: usize) -> Result<SubwordVocab> {
    let mut word_freq: BTreeMap<&str, i64> = BTreeMap::new();
    for doc in corpus {
        for w in doc.as_ref().split_whitespace() {
            *word_freq.entry(w).or_insert(0) += 1;
        }
    }
    let alphabet: BTreeSet<char> = word_freq.keys().flat_map(|w| w.chars()).collect();
    let base = SPECIAL_TOKENS.len() + alphabet.len();
    if vocab_size < base {
        return Err(Error::InvalidArgument(format!(
            "vocab_size {vocab_size} is smaller than the base alphabet ({base} including 4 specials)"
        )));
    }

    let mut tokens: Vec<String> = SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
    tokens.extend(alphabet.iter().map(|c| c.to_string()));
    let mut token_to_id: HashMap<String, u32> =
        tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();

    let mut words: Vec<(Vec<u32>, i64)> = word_freq
        .iter()
        .map(|(w, &f)| (w.chars().map(|c| token_to_id[&c.to_string()]).collect(), f))
        .collect();

    let mut counts: HashMap<(u32, u32), i64> = HashMap::new();
    let mut occurs: HashMap<(u32, u32), HashSet<usize>> = HashMap::new();
    for (wi, (sym, f)) in words.iter().enumerate() {
        for p in sym.windows(2) {
            *counts.entry((p[0], p[1])).or_insert(0) += f;
            occurs.entry((p[0], p[1])).or_default().insert(wi);
        }
    }

    type Entry = (i64, Reverse<(String, String)>, (u32, u32));
    let entry = |tokens: &[String], pair: (u32, u32), c: i64| -> Entry {
        (
            c,
            Reverse((tokens[pair.0 as usize].clone(), tokens[pair.1 as usize].clone())),
            pair,
        )
    };
    let mut heap: BinaryHeap<Entry> = counts.iter().map(|(&p, &c)| entry(&tokens, p, c)).collect();

    let mut merges = Vec::new();
    let mut banned: HashSet<(u32, u32)> = HashSet::new();
    while tokens.len() < vocab_size {
        let Some((c, _, pair)) = heap.pop() else { break };
        if counts.get(&pair).copied() != Some(c) || banned.contains(&pair) {
            continue;
        }
        if c <= 0 {
            break;
        }
        let merged_str = format!("{}{}", tokens[pair.0 as usize], tokens[pair.1 as usize]);
        if SPECIAL_TOKENS.contains(&merged_str.as_str()) {
            banned.insert(pair);
            continue;
        }
        let merged = match token_to_id.get(&merged_str) {
            Some(&id) => id,
            None => {
                let id = tokens.len() as u32;
                tokens.push(merged_str.clone());
                token_to_id.insert(merged_str, id);
                id
            }
        };
        merges.push((tokens[pair.0 as usize].clone(), tokens[pair.1 as usize].clone()));

        let mut affected: Vec<usize> = occurs.remove(&pair).unwrap_or_default().into_iter().collect();
        affected.sort_unstable();
        let mut touched: BTreeSet<(u32, u32)> = BTreeSet::new();
        for wi in affected {
            let (sym, f) = &mut words[wi];
            if !sym.windows(2).any(|w| (w[0], w[1]) == pair) {
                continue;
            }
            for p in sym.windows(2) {
                let key = (p[0], p[1]);
                *counts.get_mut(&key).expect("counted pair") -= *f;
                touched.insert(key);
            }
            let mut out = Vec::with_capacity(sym.len());
            let mut i = 0;
            while i < sym.len() {
                if i + 1 < sym.len() && (sym[i], sym[i + 1]) == pair {
                    out.push(merged);
                    i += 2;
                } else {
                    out.push(sym[i]);
                    i += 1;
                }
            }
            *sym = out;
            for p in sym.windows(2) {
                let key = (p[0], p[1]);
                *counts.entry(key).or_insert(0) += *f;
                occurs.entry(key).or_default().insert(wi);
                touched.insert(key);
            }
        }
        counts.remove(&pair);
        for key in touched {
            if let Some(&c) = counts.get(&key) {
                if c > 0 {
                    heap.push(entry(&tokens, key, c));
                }
            }
        }
    }
    SubwordVocab::from_parts(tokens, merges)
}

/// Fixed-length model input: `[CLS] subwords… [SEP]` then PAD to [`MAX_LEN`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedInput {
    pub ids: Vec<u32>,
    /// 1 for real tokens, 0 for padding (exactly where the id is 0).
    pub mask: Vec<u8>,
}

impl TokenizedInput {
    /// Number of unmasked positions.
    pub fn len_unpadded(&self) -> usize {
        self.mask.iter().filter(|&&m| m == 1).count()
    }
}

/// Encodes `text`, dropping trailing subwords past `MAX_LEN - 2`.
pub fn encode(text: &str, vocab: &SubwordVocab) -> TokenizedInput {
    let mut ids = Vec::with_capacity(MAX_LEN);
    ids.push(CLS);
    ids.extend(vocab.tokenize(text).into_iter().take(MAX_LEN - 2));
    ids.push(SEP);
    ids.resize(MAX_LEN, PAD);
    let mask = ids.iter().map(|&i| u8::from(i != PAD)).collect();
    TokenizedInput { ids, mask }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_merge_is_most_frequent_pair() {
        // pairs in "aaab": (a,a)×2, (a,b)×1 per word
        let v = bpe_train(&["aaab", "aaab"], 4 + 2 + 1).unwrap();
        assert_eq!(v.merges(), [("a".to_string(), "a".to_string())]);
        assert_eq!(v.len(), 7);
    }

    #[test]
    fn ties_break_lexicographically() {
        // (a,b) and (c,d) both occur once
        let v = bpe_train(&["ab cd"], 4 + 4 + 1).unwrap();
        assert_eq!(v.merges()[0], ("a".to_string(), "b".to_string()));
    }

    #[test]
    fn alphabet_size_means_no_merges() {
        let v = bpe_train(&["hello world"], 4 + 7).unwrap();
        assert!(v.merges().is_empty());
        assert_eq!(v.tokenize("hello").len(), 5);
        assert!(bpe_train(&["hello world"], 4 + 6).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = ["the cases rise in the city", "the city reports new cases", "stay home stay safe"];
        assert_eq!(bpe_train(&corpus, 60).unwrap(), bpe_train(&corpus, 60).unwrap());
    }

    #[test]
    fn merges_compress_known_words() {
        let corpus = ["covid covid covid cases cases"];
        let v = bpe_train(&corpus, 200).unwrap();
        assert_eq!(v.encode_word("covid").len(), 1);
        assert_eq!(v.encode_word("cases").len(), 1);
        assert_eq!(v.encode_word("z"), [UNK]);
    }

    #[test]
    fn specials_are_never_merged_into() {
        let v = bpe_train(&["[pad] [PAD] [PAD]"], 100).unwrap();
        assert_eq!(v.id("[PAD]"), Some(PAD));
        assert!(v.merges().iter().all(|(a, b)| !SPECIAL_TOKENS.contains(&format!("{a}{b}").as_str())));
    }

    #[test]
    fn encode_short_and_empty() {
        let v = bpe_train(&["abc abd"], 20).unwrap();
        let e = encode("", &v);
        assert_eq!(&e.ids[..3], [CLS, SEP, PAD]);
        assert_eq!(&e.mask[..3], [1, 1, 0]);
        assert_eq!(e.ids.len(), MAX_LEN);
        let e = encode("abc abd", &v);
        let n = e.len_unpadded();
        assert!(e.mask[..n].iter().all(|&m| m == 1));
        assert!(e.mask[n..].iter().all(|&m| m == 0));
        assert_eq!(e.ids[n - 1], SEP);
    }

    #[test]
    fn long_text_truncates_keeping_sep() {
        let v = bpe_train(&["x y"], 6).unwrap();
        let text = vec!["x"; 500].join(" ");
        let e = encode(&text, &v);
        assert_eq!(e.ids.len(), MAX_LEN);
        assert_eq!(e.ids[0], CLS);
        assert_eq!(e.ids[MAX_LEN - 1], SEP);
        assert!(e.mask.iter().all(|&m| m == 1));
    }

    #[test]
    fn text_format_round_trips() {
        let v = bpe_train(&["the cases rise", "the city"], 30).unwrap();
        let back = SubwordVocab::from_text(&v.to_text()).unwrap();
        assert_eq!(v, back);
        assert!(SubwordVocab::from_text("nope").is_err());
    }
}
