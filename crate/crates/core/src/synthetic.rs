//! Deterministic generator of tweet-like labelled data.
//!
//! Used when the shared-task files are not available: it exercises every
//! pipeline stage (emoji, contractions, links, mentions, mixed case,
//! numbers) and yields a learnable but noisy INFORMATIVE/UNINFORMATIVE
//! split. Scores on it say nothing about performance on real tweets.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, Label, Tweet};
use crate::error::Result;

/// Shared-task split sizes.
pub const OFFICIAL_TRAIN_SIZE: usize = 7000;
pub const OFFICIAL_VALID_SIZE: usize = 1000;

const INFORMATIVE: &[&str] = &[
    "{N} new cases of #COVID19 confirmed in {PLACE} today, bringing the total to {M} {URL}",
    "BREAKING: {PLACE} reports {N} deaths from coronavirus, {M} patients have recovered {URL}",
    "Officials in {PLACE} say {N} people have tested positive for COVID-19 {EMO}",
    "Update: {PLACE} confirms {N} new coronavirus infections and {M} hospitalisations",
    "{PLACE} health department: {N} cases, {M} deaths as of {DATE} {URL}",
    "#COVID19 {PLACE}: {N} confirmed, {M} recovered, {K} deaths. Stay informed {URL}",
    "The number of confirmed cases in {PLACE} rose to {M} on {DATE}, with {N} new infections {URL}",
    "{USER} {PLACE} has recorded {N} COVID-19 deaths in the last 24 hours, officials said {URL}",
    "Ministry of Health: {N} more people in {PLACE} tested positive, total now {M}",
    "{PLACE} county reports its first coronavirus death; {N} cases are under investigation {URL}",
    "Coronavirus death toll in {PLACE} climbs to {M} after {N} more fatalities {URL}",
    "We've confirmed {N} additional cases in {PLACE}; {K} patients are in intensive care {EMO}",
];

const UNINFORMATIVE: &[&str] = &[
    "I can't believe people in {PLACE} still aren't wearing masks {EMO}",
    "Stay home, stay safe everyone {EMO}{EMO} #COVID19",
    "praying for everyone affected by the coronavirus {EMO} {URL}",
    "This pandemic is so tiring, I just want to see my friends again {EMO}",
    "Why won't the government do anything about COVID-19? {EMO}",
    "day {N} of quarantine and I've watched everything on Netflix {EMO}",
    "{USER} you're so right, this virus is scary but we'll get through it {EMO}",
    "Can't wait for this coronavirus thing to be over so I can travel to {PLACE} {EMO}",
    "Wash your hands, don't touch your face, and check on your neighbours {EMO} {URL}",
    "My mom keeps sending me conspiracy videos about COVID-19 {EMO}",
    "{N} reasons why working from home is the best thing ever {URL}",
    "Thank you to all the nurses and doctors in {PLACE} {EMO}{EMO}",
    "Isn't it weird how {DATE} feels like a year ago? #coronavirus",
    "Not gonna lie, the lockdown memes are the only thing keeping me sane {EMO}",
];

/// Drawn by either class, so they carry no label signal.
const AMBIGUOUS: &[&str] = &[
    "Coronavirus cases in {PLACE} keep rising {EMO}",
    "{USER} what's the latest on COVID-19 in {PLACE}? {URL}",
    "New coronavirus update from {PLACE} {URL}",
    "COVID-19 is spreading in {PLACE}, please be careful {EMO}",
    "Another {N} days of lockdown announced for {PLACE} {URL}",
    "Hospitals in {PLACE} are under pressure because of the virus {URL}",
];

const TAILS: &[&str] = &[
    "#coronavirus",
    "#COVID19",
    "#StayHome",
    "Please share.",
    "via {USER}",
    "{URL}",
    "{EMO}",
    "thoughts?",
    "#pandemic",
    "More at {URL}",
];

const PLACES: &[&str] = &[
    "New York", "Italy", "Lombardy", "California", "Ontario", "Texas", "Spain", "Madrid", "Iran", "Florida",
    "Brazil", "India", "Delhi", "London", "Germany", "Bavaria", "Wuhan", "Seoul", "Lagos", "Sydney", "Quebec",
    "Ohio", "Georgia", "Manila", "Jakarta", "Cape Town", "Peru", "Chile", "Dublin", "Tokyo",
];

const EMOJIS: &[&str] = &["🙏", "😷", "🦠", "😂", "😭", "❤️", "👍", "😡", "💔", "🤔", "🏠", "🚨"];

const MONTHS: &[&str] = &["March", "April", "May", "June", "July"];

fn fill(template: &str, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::with_capacity(template.len() + 32);
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let end = start + rest[start..].find('}').expect("balanced template");
        let slot = &rest[start + 1..end];
        match slot {
            "N" => out.push_str(&rng.random_range(1..900).to_string()),
            "M" => out.push_str(&rng.random_range(900..60_000).to_string()),
            "K" => out.push_str(&rng.random_range(1..300).to_string()),
            "PLACE" => out.push_str(PLACES.choose(rng).expect("non-empty")),
            "EMO" => out.push_str(EMOJIS.choose(rng).expect("non-empty")),
            "USER" => out.push_str("@USER"),
            "URL" => {
                if rng.random_bool(0.5) {
                    out.push_str("HTTPURL");
                } else {
                    let id: String = (0..8)
                        .map(|_| char::from(b"abcdefghijkmnpqrstuvwxyzABCDEFGH23456789"[rng.random_range(0..40)]))
                        .collect();
                    out.push_str(&format!("https://t.co/{id}"));
                }
            }
            "DATE" => {
                let m = MONTHS.choose(rng).expect("non-empty");
                out.push_str(&format!("{m} {}", rng.random_range(1..29)));
            }
            other => unreachable!("unknown template slot {other}"),
        }
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    out
}

fn tweet_text(label: Label, rng: &mut ChaCha8Rng) -> String {
    let pool = match label {
        _ if rng.random_bool(0.25) => AMBIGUOUS,
        Label::Informative => INFORMATIVE,
        Label::Uninformative => UNINFORMATIVE,
    };
    let mut text = fill(pool.choose(rng).expect("non-empty"), rng);
    for _ in 0..rng.random_range(0..4) {
        text.push(' ');
        text.push_str(&fill(TAILS.choose(rng).expect("non-empty"), rng));
    }
    if rng.random_bool(0.1) {
        text = text.to_uppercase();
    }
    text
}

/// `n` tweets with ids `{name}-{i}`; about `informative_fraction` carry
/// the INFORMATIVE template family and `label_noise` of all labels are
/// then flipped.
pub fn generate(name: &str, n: usize, informative_fraction: f64, label_noise: f64, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tweets = (0..n)
        .map(|i| {
            let family = if rng.random_bool(informative_fraction) {
                Label::Informative
            } else {
                Label::Uninformative
            };
            let text = tweet_text(family, &mut rng);
            let label = if rng.random_bool(label_noise) {
                match family {
                    Label::Informative => Label::Uninformative,
                    Label::Uninformative => Label::Informative,
                }
            } else {
                family
            };
            Tweet::new(format!("{name}-{i}"), text, Some(label))
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(name, tweets)
}
