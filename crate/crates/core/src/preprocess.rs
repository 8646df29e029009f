//! Tweet cleaning: lowercase, emoji-to-text, contraction expansion, URL
//! removal and non-ASCII removal, followed by whitespace normalization.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED_EMOJI: &str = include_str!("../data/lexicons/emoji.tsv");
const BUNDLED_CONTRACTIONS: &str = include_str!("../data/lexicons/contractions.tsv");

const URL_PREFIXES: [&str; 3] = ["http://", "https://", "www."];

/// Emoji and contraction replacement tables.
///
/// Construction checks that every value is lowercase ASCII, carries no URL
/// token and contains none of the contraction keys, which is what makes
/// [`preprocess`] idempotent.
#[derive(Debug, Clone)]
pub struct Lexicons {
    emoji: HashMap<String, String>,
    /// Longest emoji key, in chars.
    max_emoji_chars: usize,
    contractions: HashMap<String, String>,
}

fn parse_lexicon(name: &str, content: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: name.into(),
            line: i + 1,
            message: "expected key<TAB>value".into(),
        })?;
        if key.is_empty() || value.contains('\t') {
            return Err(Error::Parse {
                path: name.into(),
                line: i + 1,
                message: "expected exactly two non-empty columns".into(),
            });
        }
        map.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_contraction_char(c: char) -> bool {
    c.is_alphanumeric() || is_apostrophe(c)
}

fn is_url_token(token: &str) -> bool {
    URL_PREFIXES.iter().any(|p| token.starts_with(p))
}

impl Lexicons {
    pub fn new(emoji: HashMap<String, String>, contractions: HashMap<String, String>) -> Result<Self> {
        for (k, v) in &emoji {
            if k.is_ascii() {
                return Err(Error::Lexicon(format!("emoji key {k:?} is plain ASCII")));
            }
            Self::check_value("emoji", k, v)?;
        }
        for (k, v) in &contractions {
            if k.chars().any(char::is_whitespace) || k != &k.to_lowercase() {
                return Err(Error::Lexicon(format!("contraction key {k:?} must be one lowercase token")));
            }
            Self::check_value("contraction", k, v)?;
        }
        // Values must not reintroduce a key on a second pass.
        for (kind, map) in [("emoji", &emoji), ("contraction", &contractions)] {
            for (k, v) in map {
                for span in v.split(|c: char| !is_contraction_char(c)) {
                    if contractions.contains_key(span) {
                        return Err(Error::Lexicon(format!(
                            "{kind} value for {k:?} contains contraction {span:?}"
                        )));
                    }
                }
            }
        }
        let max_emoji_chars = emoji.keys().map(|k| k.chars().count()).max().unwrap_or(0);
        Ok(Lexicons {
            emoji,
            max_emoji_chars,
            contractions,
        })
    }

    fn check_value(kind: &str, key: &str, value: &str) -> Result<()> {
        if !value.is_ascii() || value.chars().any(|c| c.is_ascii_uppercase()) {
            return Err(Error::Lexicon(format!(
                "{kind} value for {key:?} is not lowercase ASCII: {value:?}"
            )));
        }
        if value.split_whitespace().any(is_url_token) {
            return Err(Error::Lexicon(format!("{kind} value for {key:?} contains a URL")));
        }
        Ok(())
    }

    pub fn from_tsv_strs(emoji_tsv: &str, contractions_tsv: &str) -> Result<Self> {
        Self::new(
            parse_lexicon("emoji.tsv", emoji_tsv)?,
            parse_lexicon("contractions.tsv", contractions_tsv)?,
        )
    }

    /// Loads `emoji.tsv` and `contractions.tsv` from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            let p = dir.join(name);
            std::fs::read_to_string(&p).map_err(|e| Error::io(p, e))
        };
        Self::from_tsv_strs(&read("emoji.tsv")?, &read("contractions.tsv")?)
    }

    /// The lexicons shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_tsv_strs(BUNDLED_EMOJI, BUNDLED_CONTRACTIONS).expect("bundled lexicons are valid")
    }

    pub fn emoji_len(&self) -> usize {
        self.emoji.len()
    }

    pub fn contractions_len(&self) -> usize {
        self.contractions.len()
    }

    pub fn contraction(&self, key: &str) -> Option<&str> {
        self.contractions.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Lowercase,
    ReplaceEmojis,
    ExpandContractions,
    StripUrls,
    StripNonAscii,
}

impl Step {
    pub const CANONICAL: [Step; 5] = [
        Step::Lowercase,
        Step::ReplaceEmojis,
        Step::ExpandContractions,
        Step::StripUrls,
        Step::StripNonAscii,
    ];
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::Lowercase => "lowercase",
            Step::ReplaceEmojis => "replace_emojis",
            Step::ExpandContractions => "expand_contractions",
            Step::StripUrls => "strip_urls",
            Step::StripNonAscii => "strip_non_ascii",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub original: String,
    pub cleaned: String,
    pub steps_applied: Vec<Step>,
}

pub fn lowercase(text: &str) -> String {
    text.to_lowercase()
}

/// Replaces each longest-matching emoji sequence with ` description `.
pub fn replace_emojis(text: &str, lex: &Lexicons) -> String {
    if text.is_ascii() || lex.max_emoji_chars == 0 {
        return text.to_string();
    }
    // Byte offset of every char boundary, including the end.
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let n_chars = bounds.len() - 1;
    let mut out = String::with_capacity(text.len() + 16);
    let mut i = 0;
    while i < n_chars {
        let start = bounds[i];
        if text.as_bytes()[start].is_ascii() {
            out.push_str(&text[start..bounds[i + 1]]);
            i += 1;
            continue;
        }
        let longest = lex.max_emoji_chars.min(n_chars - i);
        let hit = (1..=longest)
            .rev()
            .find_map(|len| lex.emoji.get(&text[start..bounds[i + len]]).map(|d| (len, d)));
        match hit {
            Some((len, desc)) => {
                out.push(' ');
                out.push_str(desc);
                out.push(' ');
                i += len;
            }
            None => {
                out.push_str(&text[start..bounds[i + 1]]);
                i += 1;
            }
        }
    }
    out
}

/// Expands contractions that form a whole word.
///
/// A word is a maximal run of alphanumerics and apostrophes (`'` or `’`);
/// curly apostrophes are matched as straight ones. Quote marks wrapping a
/// word are kept when the inner word matches.
pub fn expand_contractions(text: &str, lex: &Lexicons) -> String {
    if lex.contractions.is_empty() || !text.chars().any(is_apostrophe) {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len() + 16);
    let mut rest = text;
    while !rest.is_empty() {
        let span_start = rest.find(is_contraction_char).unwrap_or(rest.len());
        out.push_str(&rest[..span_start]);
        rest = &rest[span_start..];
        if rest.is_empty() {
            break;
        }
        let span_end = rest.find(|c: char| !is_contraction_char(c)).unwrap_or(rest.len());
        let span = &rest[..span_end];
        out.push_str(&expand_span(span, lex));
        rest = &rest[span_end..];
    }
    out
}

fn expand_span(span: &str, lex: &Lexicons) -> String {
    if !span.contains(is_apostrophe) {
        return span.to_string();
    }
    let normalized = span.replace('\u{2019}', "'");
    if let Some(v) = lex.contraction(&normalized) {
        return v.to_string();
    }
    let inner = normalized.trim_matches('\'');
    if inner.len() != normalized.len() && !inner.is_empty() {
        if let Some(v) = lex.contraction(inner) {
            let lead = normalized.len() - normalized.trim_start_matches('\'').len();
            let trail = normalized.len() - normalized.trim_end_matches('\'').len();
            return format!("{}{}{}", &normalized[..lead], v, &normalized[normalized.len() - trail..]);
        }
    }
    span.to_string()
}

/// Drops every whitespace-delimited token starting with `http://`,
/// `https://` or `www.`; the whitespace around a removed token becomes a
/// single space (or nothing at either end of the text).
pub fn strip_urls(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    // Whitespace seen since the last kept token, not yet emitted.
    let mut pending_ws: &str = "";
    let mut removed_since_kept = false;
    let mut rest = text;
    while !rest.is_empty() {
        let ws_end = rest.find(|c: char| !c.is_whitespace()).unwrap_or(rest.len());
        if ws_end > 0 {
            if removed_since_kept {
                // whitespace after a removed URL merges into one space
            } else {
                pending_ws = &rest[..ws_end];
            }
            rest = &rest[ws_end..];
            continue;
        }
        let tok_end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let token = &rest[..tok_end];
        rest = &rest[tok_end..];
        if is_url_token(token) {
            removed_since_kept = true;
            continue;
        }
        if removed_since_kept {
            if !out.is_empty() {
                out.push(' ');
            }
        } else {
            out.push_str(pending_ws);
        }
        pending_ws = "";
        removed_since_kept = false;
        out.push_str(token);
    }
    if !removed_since_kept {
        out.push_str(pending_ws);
    }
    out
}

pub fn strip_non_ascii(text: &str) -> String {
    text.chars().filter(char::is_ascii).collect()
}

fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Runs the five cleaning steps in order, then collapses whitespace.
///
/// Deleting non-ASCII characters can splice a contraction or URL prefix
/// together (`ca🦠n't`, `ht\u{a0}tps://`); the contraction and URL steps are
/// re-run until the text stops changing, so the output never contains
/// either and a second call is a no-op.
pub fn preprocess(text: &str, lex: &Lexicons) -> PreprocessReport {
    let mut cleaned = lowercase(text);
    cleaned = replace_emojis(&cleaned, lex);
    cleaned = expand_contractions(&cleaned, lex);
    cleaned = strip_urls(&cleaned);
    cleaned = strip_non_ascii(&cleaned);
    cleaned = normalize_whitespace(&cleaned);
    loop {
        let next = normalize_whitespace(&strip_urls(&expand_contractions(&cleaned, lex)));
        if next == cleaned {
            break;
        }
        cleaned = next;
    }
    PreprocessReport {
        original: text.to_string(),
        cleaned,
        steps_applied: Step::CANONICAL.to_vec(),
    }
}

pub fn clean(text: &str, lex: &Lexicons) -> String {
    preprocess(text, lex).cleaned
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::word_count;
    use proptest::prelude::*;

    fn tiny() -> Lexicons {
        let emoji = [("🙏", "folded hands"), ("😂", "face with tears of joy")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let contractions = [("can't", "cannot"), ("y'all'd've", "you all would have"), ("it's", "it is")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        Lexicons::new(emoji, contractions).unwrap()
    }

    #[test]
    fn lowercase_examples() {
        assert_eq!(lowercase("COVID-19 Update"), "covid-19 update");
        assert_eq!(lowercase(""), "");
        // Unicode SpecialCasing, locale independent: İ -> i + U+0307.
        assert_eq!(lowercase("İstanbul"), "i\u{307}stanbul");
    }

    #[test]
    fn emoji_substitution() {
        let lex = tiny();
        assert_eq!(replace_emojis("stay safe 🙏", &lex), "stay safe  folded hands ");
        assert_eq!(replace_emojis("no emoji here", &lex), "no emoji here");
        assert_eq!(replace_emojis("x🦠y", &lex), "x🦠y");
    }

    #[test]
    fn emoji_expansion_raises_word_count() {
        let lex = tiny();
        let raw = "lol😂";
        assert!(word_count(&replace_emojis(raw, &lex)) > word_count(raw));
    }

    #[test]
    fn longest_emoji_sequence_wins() {
        let lex = Lexicons::bundled();
        // thumbs up + medium skin tone is its own entry
        let out = replace_emojis("👍🏽", &lex);
        assert_eq!(out.split_whitespace().collect::<Vec<_>>(), ["thumbs", "up", "medium", "skin", "tone"]);
    }

    #[test]
    fn contraction_examples() {
        let lex = tiny();
        assert_eq!(expand_contractions("we can't go", &lex), "we cannot go");
        assert_eq!(expand_contractions("cant", &lex), "cant");
        assert_eq!(expand_contractions("we can\u{2019}t go", &lex), "we cannot go");
        assert_eq!(expand_contractions("'it's'", &lex), "'it is'");
        assert_eq!(expand_contractions("scan't", &lex), "scan't");
    }

    #[test]
    fn bundled_compound_contraction() {
        let lex = Lexicons::bundled();
        assert_eq!(lex.contraction("y'all'd've"), Some("you all would have"));
        assert_eq!(expand_contractions("y'all'd've", &lex), "you all would have");
    }

    #[test]
    fn url_examples() {
        assert_eq!(strip_urls("cases rise https://t.co/abc now"), "cases rise now");
        assert_eq!(strip_urls("no links here"), "no links here");
        assert_eq!(strip_urls("http://a.b lead"), "lead");
        // the anonymised-link placeholder is an ordinary word, not a URL
        assert_eq!(strip_urls("cases up httpurl"), "cases up httpurl");
        assert_eq!(strip_urls("tail www.x.org"), "tail");
        assert_eq!(strip_urls("a http://x  http://y b"), "a b");
        assert_eq!(strip_urls("keep  double"), "keep  double");
        let lex = tiny();
        assert_eq!(clean("see HTTPS://T.CO/X now", &lex), "see now");
    }

    #[test]
    fn non_ascii_examples() {
        assert_eq!(strip_non_ascii("café"), "caf");
        assert_eq!(strip_non_ascii("plain text"), "plain text");
        assert_eq!(strip_non_ascii("🦠"), "");
    }

    #[test]
    fn full_pipeline() {
        let lex = tiny();
        let r = preprocess("Stay SAFE 🙏 it's bad https://t.co/x café", &lex);
        assert_eq!(r.cleaned, "stay safe folded hands it is bad caf");
        assert_eq!(r.steps_applied, Step::CANONICAL.to_vec());
        assert_eq!(preprocess("", &lex).cleaned, "");
    }

    #[test]
    fn spliced_tokens_are_cleaned() {
        let lex = tiny();
        assert_eq!(clean("ca🦠n't", &lex), "cannot");
        assert_eq!(clean("go ht\u{a0}tps://t.co/x", &lex), "go");
    }

    #[test]
    fn invalid_lexicons_rejected() {
        let m = |k: &str, v: &str| [(k.to_string(), v.to_string())].into_iter().collect::<HashMap<_, _>>();
        assert!(Lexicons::new(m("🙏", "Folded"), HashMap::new()).is_err());
        assert!(Lexicons::new(m("🙏", "www.x.com"), HashMap::new()).is_err());
        assert!(Lexicons::new(HashMap::new(), m("can't", "can't")).is_err());
        assert!(Lexicons::from_tsv_strs("bad line\n", "").is_err());
    }

    #[test]
    fn bundled_lexicons_load() {
        let lex = Lexicons::bundled();
        assert!(lex.emoji_len() > 3000);
        assert!(lex.contractions_len() > 80);
    }

    fn tweetish() -> impl Strategy<Value = String> {
        let pieces = prop::sample::select(vec![
            "COVID", "cases", " ", "  ", "\t", "can't", "It’s", "'cause", "🙏", "😂", "🦠", "👍🏽", "https://t.co/Ab",
            "www.x.org", "http", "://", "café", "İ", "\u{a0}", "y'all'd've", "'", "’", "-", "19", "\n", "ß", "Ǆ",
        ]);
        prop::collection::vec(pieces, 0..25).prop_map(|v| v.concat())
    }

    proptest! {
        #[test]
        fn output_is_lowercase_ascii_without_urls(s in tweetish()) {
            let lex = Lexicons::bundled();
            let c = clean(&s, &lex);
            prop_assert!(c.chars().all(|ch| ch.is_ascii() && !ch.is_ascii_uppercase()));
            prop_assert!(!c.split_whitespace().any(is_url_token));
        }

        #[test]
        fn preprocess_is_idempotent(s in tweetish()) {
            let lex = Lexicons::bundled();
            let once = clean(&s, &lex);
            prop_assert_eq!(clean(&once, &lex), once);
        }

        #[test]
        fn arbitrary_unicode_is_idempotent(s in "\\PC{0,40}") {
            let lex = Lexicons::bundled();
            let once = clean(&s, &lex);
            prop_assert!(once.is_ascii());
            prop_assert_eq!(clean(&once, &lex), once);
        }

        #[test]
        fn emoji_replacement_never_lowers_word_count(s in tweetish()) {
            let lex = Lexicons::bundled();
            let lower = lowercase(&s);
            prop_assert!(word_count(&replace_emojis(&lower, &lex)) >= word_count(&lower));
        }
    }
}
