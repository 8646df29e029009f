//! Acceptance suite: prints one `PASS`/`FAIL`/`SKIP` line per criterion
//! and exits non-zero if any criterion fails.
//!
//! Criteria that need the shared-task files read them from
//! `$INFOTWEET_DATA/{train,valid}.tsv` and are skipped when it is unset.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use infotweet::classical::mlp::MlpObjective;
use infotweet::classical::nb_fit;
use infotweet::corpus::{load_tsv, word_count_stats, CorpusStats, Label};
use infotweet::encoder::{
    batch_loss, batch_loss_and_grad, bpe_train, encode, encoder_forward, EncoderConfig, EncoderParams,
    TokenizedInput, CLS, MAX_LEN, SEP,
};
use infotweet::features::{tfidf_fit, tfidf_transform, SparseVector};
use infotweet::harness::{
    cmd_reproduce, load_data, tolerance, train_and_evaluate, ExperimentConfig, FeatureKind, LoadedData, ModelKind,
    DATA_DIR_ENV, REFERENCE_F1, REPRODUCE_JSON,
};
use infotweet::numopt::Objective;
use infotweet::preprocess::{clean, Lexicons};
use infotweet::synthetic::generate;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn report(id: u32, name: &str, elapsed: Duration, v: &Verdict) {
    let (tag, detail) = match v {
        Verdict::Pass(d) => ("PASS", d),
        Verdict::Fail(d) => ("FAIL", d),
        Verdict::Skip(d) => ("SKIP", d),
    };
    println!("{tag} [{id}] {name} ({:.1}s): {detail}", elapsed.as_secs_f64());
}

fn official_data() -> Option<(PathBuf, PathBuf)> {
    let dir = std::env::var_os(DATA_DIR_ENV).filter(|d| !d.is_empty())?;
    let dir = PathBuf::from(dir);
    Some((dir.join("train.tsv"), dir.join("valid.tsv")))
}

fn official_config() -> Option<ExperimentConfig> {
    let (train, valid) = official_data()?;
    let mut cfg = ExperimentConfig::default();
    cfg.data.train = Some(train);
    cfg.data.valid = Some(valid);
    Some(cfg)
}

// ---------------------------------------------------------------- [1]

struct Table1Column {
    informative: usize,
    uninformative: usize,
    raw: (usize, usize, f64),
    cleaned: (usize, usize, f64),
}

const TABLE1_TRAIN: Table1Column = Table1Column {
    informative: 3303,
    uninformative: 3697,
    raw: (76, 8, 35.87),
    cleaned: (217, 7, 36.301),
};

const TABLE1_VALID: Table1Column = Table1Column {
    informative: 472,
    uninformative: 528,
    raw: (62, 11, 37.052),
    cleaned: (69, 10, 37.215),
};

fn check_words(label: &str, got: &CorpusStats, want: (usize, usize, f64), problems: &mut Vec<String>) {
    let (max, min, avg) = want;
    if got.wc_max.abs_diff(max) > 1 {
        problems.push(format!("{label} max {} vs {max}", got.wc_max));
    }
    if got.wc_min.abs_diff(min) > 1 {
        problems.push(format!("{label} min {} vs {min}", got.wc_min));
    }
    if (got.wc_avg - avg).abs() > 0.5 {
        problems.push(format!("{label} avg {} vs {avg}", got.wc_avg));
    }
}

fn criterion_stats() -> Verdict {
    let Some((train_path, valid_path)) = official_data() else {
        return Verdict::Skip(format!("shared-task data not available (set {DATA_DIR_ENV})"));
    };
    let start = Instant::now();
    let lex = Lexicons::bundled();
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for (name, path, want) in [("train", train_path, TABLE1_TRAIN), ("valid", valid_path, TABLE1_VALID)] {
        let d = match load_tsv(&path) {
            Ok(d) => d,
            Err(e) => return Verdict::Fail(format!("{}: {e}", path.display())),
        };
        let raw = word_count_stats(&d).expect("non-empty");
        let cleaned = word_count_stats(&d.map_texts("clean", |t| clean(t, &lex))).expect("non-empty");
        if (raw.count_informative, raw.count_uninformative) != (want.informative, want.uninformative) {
            problems.push(format!(
                "{name} counts {}/{} vs {}/{}",
                raw.count_informative, raw.count_uninformative, want.informative, want.uninformative
            ));
        }
        check_words(&format!("{name} raw"), &raw, want.raw, &mut problems);
        check_words(&format!("{name} cleaned"), &cleaned, want.cleaned, &mut problems);
        summary.push(format!(
            "{name} {}/{} raw {}/{}/{:.3} cleaned {}/{}/{:.3}",
            raw.count_informative,
            raw.count_uninformative,
            raw.wc_max,
            raw.wc_min,
            raw.wc_avg,
            cleaned.wc_max,
            cleaned.wc_min,
            cleaned.wc_avg
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 10.0 {
        problems.push(format!("runtime {secs:.1}s ≥ 10s"));
    }
    if problems.is_empty() {
        Verdict::Pass(summary.join("; "))
    } else {
        Verdict::Fail(format!("{} [{}]", problems.join(", "), summary.join("; ")))
    }
}

// ---------------------------------------------------------------- [2]

fn criterion_conventional() -> Verdict {
    let Some(cfg) = official_config() else {
        return Verdict::Skip(format!("shared-task data not available (set {DATA_DIR_ENV})"));
    };
    let start = Instant::now();
    let data = match load_data(&cfg) {
        Ok(d) => d,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    if !data.is_official_sized() {
        return Verdict::Fail(format!("expected 7000/1000 tweets, found {}/{}", data.train.len(), data.valid.len()));
    }
    let mut problems = Vec::new();
    let mut scores = BTreeMap::new();
    for (kind, features, reference) in REFERENCE_F1 {
        let cell = ExperimentConfig {
            model: kind.into(),
            features,
            ..cfg.clone()
        };
        match train_and_evaluate(&cell, &data) {
            Ok((_, r, _)) => {
                let f1 = r.eval.f1;
                if (f1 - reference).abs() > tolerance(kind) {
                    problems.push(format!("{kind}+{features} {f1:.5} vs {reference} (±{})", tolerance(kind)));
                }
                scores.insert((ModelKind::from(kind).as_str(), features.as_str()), f1);
            }
            Err(e) => problems.push(format!("{kind}+{features} failed: {e}")),
        }
    }
    if scores.len() == REFERENCE_F1.len() {
        let top = scores[&("mlp", "tfidf")];
        if scores.values().any(|&f| f > top) {
            problems.push("mlp+tfidf is not the best cell".into());
        }
        if scores[&("nb", "bow")] <= scores[&("nb", "tfidf")] {
            problems.push("nb does not prefer bow over tfidf".into());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 15.0 * 60.0 {
        problems.push(format!("runtime {secs:.0}s ≥ 15 min"));
    }
    let table: Vec<String> = scores.iter().map(|((m, f), v)| format!("{m}+{f}={v:.5}")).collect();
    if problems.is_empty() {
        Verdict::Pass(table.join(" "))
    } else {
        Verdict::Fail(format!("{} [{}]", problems.join("; "), table.join(" ")))
    }
}

// ---------------------------------------------------------------- [3]

fn encoder_data() -> (LoadedData, bool) {
    if let Some(cfg) = official_config() {
        if let Ok(d) = load_data(&cfg) {
            return (d, true);
        }
    }
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = synthetic_files(dir.path(), 7000, 1000);
    (load_data(&cfg).expect("synthetic data"), false)
}

fn synthetic_files(dir: &std::path::Path, n_train: usize, n_valid: usize) -> ExperimentConfig {
    let train = generate("synthetic-train", n_train, 0.47, 0.1, 2020).expect("generate");
    let valid = generate("synthetic-valid", n_valid, 0.47, 0.1, 2021).expect("generate");
    infotweet::corpus::write_tsv(&train, dir.join("train.tsv")).expect("write");
    infotweet::corpus::write_tsv(&valid, dir.join("valid.tsv")).expect("write");
    let mut cfg = ExperimentConfig::default();
    cfg.data.train = Some(dir.join("train.tsv"));
    cfg.data.valid = Some(dir.join("valid.tsv"));
    cfg
}

fn criterion_encoder() -> Verdict {
    let (data, official) = encoder_data();
    let source = if official {
        "shared-task data"
    } else {
        "synthetic 7000/1000 stand-in, shared-task data not available"
    };
    let mut problems = Vec::new();
    let mut f1s = Vec::new();
    for seed in [0u64, 1, 2] {
        let cfg = ExperimentConfig {
            model: ModelKind::Encoder,
            features: FeatureKind::Subword,
            seed,
            encoder: EncoderConfig::default(),
            ..ExperimentConfig::default()
        };
        let start = Instant::now();
        match train_and_evaluate(&cfg, &data) {
            Ok((_, r, _)) => {
                let f1 = r.eval.f1;
                let secs = start.elapsed().as_secs_f64();
                if f1.is_nan() || f1 < 0.65 {
                    problems.push(format!("seed {seed}: F1 {f1:.5} < 0.65"));
                }
                if f1.is_nan() || f1 <= 0.0 {
                    problems.push(format!("seed {seed}: does not beat the all-UNINFORMATIVE baseline"));
                }
                if secs >= 20.0 * 60.0 {
                    problems.push(format!("seed {seed}: runtime {secs:.0}s ≥ 20 min"));
                }
                f1s.push(format!("seed {seed} F1 {f1:.5} in {secs:.0}s"));
            }
            Err(e) => problems.push(format!("seed {seed} failed: {e}")),
        }
    }
    let detail = format!("{} ({source})", f1s.join(", "));
    if problems.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{}; {detail}", problems.join("; ")))
    }
}

// ---------------------------------------------------------------- [4]

const WORDS: &[&str] = &["covid", "cases", "new", "death", "stay", "home", "ab", "zz", "it", "virus", "ok", "go"];

fn micro_corpus(rng: &mut ChaCha8Rng) -> Vec<String> {
    let n_docs = rng.random_range(1..8);
    (0..n_docs)
        .map(|_| {
            let n = rng.random_range(1..10);
            (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
        })
        .collect()
}

/// Smoothed idf, raw counts, L2 row normalisation, evaluated term by term.
fn tfidf_oracle(corpus: &[String]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut terms: Vec<String> = corpus.iter().flat_map(|d| d.split(' ').map(str::to_string)).collect();
    terms.sort();
    terms.dedup();
    let n = corpus.len() as f64;
    let idf: Vec<f64> = terms
        .iter()
        .map(|t| {
            let df = corpus.iter().filter(|d| d.split(' ').any(|w| w == t)).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    let rows = corpus
        .iter()
        .map(|d| {
            let raw: Vec<f64> = terms
                .iter()
                .zip(&idf)
                .map(|(t, w)| d.split(' ').filter(|x| x == t).count() as f64 * w)
                .collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            raw.iter().map(|v| if norm > 0.0 { v / norm } else { 0.0 }).collect()
        })
        .collect();
    (terms, rows)
}

/// Posterior by direct multiplication of smoothed class-conditional
/// probabilities, normalised over both classes.
fn nb_oracle(x: &[Vec<u32>], y: &[Label], query: &[u32], alpha: f64) -> [f64; 2] {
    let v = query.len();
    let mut joint = [0.0; 2];
    for (c, label) in Label::ALL.iter().enumerate() {
        let rows: Vec<&Vec<u32>> = x.iter().zip(y).filter(|(_, l)| *l == label).map(|(r, _)| r).collect();
        let prior = rows.len() as f64 / x.len() as f64;
        let total: f64 = rows.iter().flat_map(|r| r.iter()).map(|&k| k as f64).sum();
        let mut p = prior;
        for j in 0..v {
            let count: f64 = rows.iter().map(|r| r[j] as f64).sum();
            let theta = (count + alpha) / (total + alpha * v as f64);
            p *= theta.powi(query[j] as i32);
        }
        joint[c] = p;
    }
    let z = joint[0] + joint[1];
    [joint[0] / z, joint[1] / z]
}

fn criterion_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst_tfidf: f64 = 0.0;
    for _ in 0..100 {
        let corpus = micro_corpus(&mut rng);
        let model = tfidf_fit::<f64, _>(&corpus).expect("fit");
        let (terms, rows) = tfidf_oracle(&corpus);
        if model.vocab.terms() != terms.as_slice() {
            return Verdict::Fail(format!("vocabulary mismatch on {corpus:?}"));
        }
        for (doc, want) in corpus.iter().zip(&rows) {
            let got = tfidf_transform(doc, &model).to_dense();
            for (a, b) in got.iter().zip(want) {
                worst_tfidf = worst_tfidf.max((a - b).abs());
            }
        }
    }
    let mut worst_nb: f64 = 0.0;
    for _ in 0..100 {
        let v = rng.random_range(1..6);
        let n = rng.random_range(2..8);
        let mut y: Vec<Label> = (0..n)
            .map(|_| if rng.random_bool(0.5) { Label::Informative } else { Label::Uninformative })
            .collect();
        y[0] = Label::Informative;
        y[1] = Label::Uninformative;
        let x: Vec<Vec<u32>> = (0..n).map(|_| (0..v).map(|_| rng.random_range(0..4)).collect()).collect();
        let alpha = [1.0, 0.5, 2.0][rng.random_range(0..3)];
        let sparse: Vec<SparseVector<f64>> = x
            .iter()
            .map(|r| SparseVector::from_dense(&r.iter().map(|&k| k as f64).collect::<Vec<_>>()))
            .collect();
        let params = nb_fit(&sparse, &y, alpha).expect("fit");
        let query: Vec<u32> = (0..v).map(|_| rng.random_range(0..4)).collect();
        let q = SparseVector::from_dense(&query.iter().map(|&k| k as f64).collect::<Vec<_>>());
        let got = params.log_posterior(&q);
        let want = nb_oracle(&x, &y, &query, alpha);
        for c in 0..2 {
            worst_nb = worst_nb.max((got[c].exp() - want[c]).abs());
        }
    }
    let detail = format!("tf-idf max |Δ| {worst_tfidf:.2e}, naive Bayes posterior max |Δ| {worst_nb:.2e}");
    if worst_tfidf <= 1e-12 && worst_nb <= 1e-12 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// ---------------------------------------------------------------- [5]

fn norm_relative(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt() + b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn central_differences(theta: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            t[i] = theta[i] + h;
            let up = f(&t);
            t[i] = theta[i] - h;
            let down = f(&t);
            t[i] = theta[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn criterion_gradients() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dim = 12;
    let x: Vec<SparseVector<f64>> = (0..20)
        .map(|_| {
            let dense: Vec<f64> = (0..dim)
                .map(|_| if rng.random_bool(0.4) { rng.random_range(0.0..2.0) } else { 0.0 })
                .collect();
            SparseVector::from_dense(&dense)
        })
        .collect();
    let y: Vec<Label> = (0..20)
        .map(|i| if i % 2 == 0 { Label::Informative } else { Label::Uninformative })
        .collect();
    let obj = MlpObjective::new(&x, &y, 1e-2).expect("objective");
    let mut worst_mlp: f64 = 0.0;
    for _ in 0..10 {
        let theta: Vec<f64> = (0..obj.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut g = vec![0.0; theta.len()];
        obj.eval(&theta, &mut g);
        let fd = central_differences(&theta, 1e-6, |t| obj.value(t));
        worst_mlp = worst_mlp.max(norm_relative(&g, &fd));
    }

    let cfg = EncoderConfig {
        vocab_size: 12,
        d_model: 8,
        n_heads: 2,
        n_layers: 2,
        d_ffn: 12,
        dropout: 0.0,
        init_std: 0.5,
        ..EncoderConfig::default()
    };
    let mut worst_enc: f64 = 0.0;
    for point in 0..10 {
        let mut prng = ChaCha8Rng::seed_from_u64(100 + point);
        let params = EncoderParams::<f64>::init(&cfg, &mut prng).expect("init");
        let inputs: Vec<TokenizedInput> = (0..2)
            .map(|_| {
                let n = prng.random_range(1..6);
                let mut ids = vec![CLS];
                ids.extend((0..n).map(|_| prng.random_range(4..12u32)));
                ids.push(SEP);
                ids.resize(MAX_LEN, 0);
                let mask = ids.iter().map(|&i| u8::from(i != 0)).collect();
                TokenizedInput { ids, mask }
            })
            .collect();
        let batch: Vec<&TokenizedInput> = inputs.iter().collect();
        let labels = [Label::Informative, Label::Uninformative];
        let (_, grads) = batch_loss_and_grad(&params, &batch, &labels).expect("grad");
        let theta = params.flatten();
        let mut probe = params.clone();
        let fd = central_differences(&theta, 1e-5, |t| {
            probe.assign_flat(t).expect("shape");
            batch_loss(&probe, &batch, &labels).expect("loss")
        });
        worst_enc = worst_enc.max(norm_relative(&grads.flatten(), &fd));
    }
    let detail = format!("mlp worst relative error {worst_mlp:.2e}, encoder worst relative error {worst_enc:.2e}");
    if worst_mlp < 1e-4 && worst_enc < 1e-3 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// ---------------------------------------------------------------- [6]

const PIECES: &[&str] = &[
    "covid", "cases", "rise", "in", "new", "york", "🙏", "stay", "home", "can't", "https://t.co/x", "😷", "deaths",
    "İstanbul", "#covid19", "@user", "12", "ZZZ", "naïve", "“quoted”", "\u{a0}",
];

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let n = if rng.random_bool(0.1) {
        rng.random_range(60..200)
    } else {
        rng.random_range(0..40)
    };
    (0..n).map(|_| *PIECES.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn criterion_mask() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let lex = Lexicons::bundled();
    let corpus: Vec<String> = (0..300).map(|_| clean(&random_text(&mut rng), &lex)).collect();
    let vocab = bpe_train(&corpus, 200).expect("bpe");
    let cfg = EncoderConfig {
        vocab_size: vocab.len(),
        d_model: 16,
        n_heads: 4,
        n_layers: 2,
        d_ffn: 32,
        ..EncoderConfig::default()
    };
    let params = EncoderParams::<f32>::init(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).expect("init");
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let text = clean(&random_text(&mut rng), &lex);
        let input = encode(&text, &vocab);
        let ok = input.ids.len() == MAX_LEN
            && input.mask.len() == MAX_LEN
            && input.ids.iter().zip(&input.mask).all(|(&id, &m)| (m == 1) == (id != 0))
            && input.ids[0] == CLS
            && input.ids.iter().filter(|&&id| id == SEP).count() == 1;
        if !ok {
            return Verdict::Fail(format!("text {i} ({text:?}) encodes to {:?}", input.ids));
        }
        let z = encoder_forward(&params, &input).expect("forward");
        let mut mutated = input.clone();
        for (id, &m) in mutated.ids.iter_mut().zip(&input.mask) {
            if m == 0 {
                *id = rng.random_range(0..vocab.len() as u32);
            }
        }
        let z2 = encoder_forward(&params, &mutated).expect("forward");
        worst = worst.max((z - z2).abs() as f64);
    }
    let detail = format!("1000 encodings well-formed, max logit change under pad mutation {worst:.2e}");
    if worst < 1e-6 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// ---------------------------------------------------------------- [7]

fn criterion_determinism() -> Verdict {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut cfg = synthetic_files(dir.path(), 2000, 500);
    cfg.seed = 3;
    cfg.encoder = EncoderConfig {
        vocab_size: 500,
        d_model: 32,
        n_heads: 2,
        n_layers: 1,
        d_ffn: 64,
        epochs: 1,
        ..EncoderConfig::default()
    };
    let (a, b) = (dir.path().join("run-a"), dir.path().join("run-b"));
    for out in [&a, &b] {
        if let Err(e) = cmd_reproduce(&cfg, out) {
            return Verdict::Fail(format!("reproduce failed: {e}"));
        }
    }
    let ja = std::fs::read(a.join(REPRODUCE_JSON)).expect("json a");
    let jb = std::fs::read(b.join(REPRODUCE_JSON)).expect("json b");
    let mut differing = Vec::new();
    for entry in walk(&a) {
        let rel = entry.strip_prefix(&a).expect("prefix");
        if std::fs::read(&entry).ok() != std::fs::read(b.join(rel)).ok() {
            differing.push(rel.display().to_string());
        }
    }
    if ja == jb && differing.is_empty() {
        Verdict::Pass(format!("{} bytes of summary JSON and every cell artifact identical across two runs (seed 3, synthetic 2000/500, reduced encoder)", ja.len()))
    } else {
        Verdict::Fail(format!("artifacts differ: {}", differing.join(", ")))
    }
}

fn walk(dir: &std::path::Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).expect("read_dir") {
        let path = entry.expect("entry").path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out.sort();
    out
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 7] = [
        (1, "dataset statistics", criterion_stats),
        (2, "conventional-model F1 and orderings", criterion_conventional),
        (3, "from-scratch encoder F1 >= 0.65 and > 0", criterion_encoder),
        (4, "tf-idf and naive Bayes oracle equivalence", criterion_oracles),
        (5, "mlp and encoder gradient checks", criterion_gradients),
        (6, "encoding and padding-mask invariants", criterion_mask),
        (7, "reproduce determinism", criterion_determinism),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let verdict = run();
        report(id, name, start.elapsed(), &verdict);
        if matches!(verdict, Verdict::Fail(_)) {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
