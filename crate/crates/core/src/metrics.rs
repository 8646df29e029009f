//! Binary classification metrics with INFORMATIVE as the positive class.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Unweighted mean of per-class F1, for diagnosing averaging differences.
    pub macro_f1: f64,
    /// Support-weighted mean of per-class F1.
    pub weighted_f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_of(tp: usize, fp: usize, fn_: usize) -> f64 {
    let (p, r) = (ratio(tp, tp + fp), ratio(tp, tp + fn_));
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

pub fn evaluate(preds: &[Label], golds: &[Label]) -> Result<EvalReport> {
    if preds.len() != golds.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} gold labels",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate zero predictions".into()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &g) in preds.iter().zip(golds) {
        match (p, g) {
            (Label::Informative, Label::Informative) => tp += 1,
            (Label::Informative, Label::Uninformative) => fp += 1,
            (Label::Uninformative, Label::Informative) => fn_ += 1,
            (Label::Uninformative, Label::Uninformative) => tn += 1,
        }
    }
    let n = preds.len();
    let f1_pos = f1_of(tp, fp, fn_);
    let f1_neg = f1_of(tn, fn_, fp);
    let (support_pos, support_neg) = (tp + fn_, tn + fp);
    Ok(EvalReport {
        tp,
        fp,
        fn_,
        tn,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        f1: f1_pos,
        accuracy: ratio(tp + tn, n),
        macro_f1: (f1_pos + f1_neg) / 2.0,
        weighted_f1: (f1_pos * support_pos as f64 + f1_neg * support_neg as f64) / n as f64,
    })
}

impl EvalReport {
    pub fn n(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Aligned plain-text rendering.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "                 pred INF   pred UNINF");
        let _ = writeln!(s, "gold INF      {:>10} {:>12}", self.tp, self.fn_);
        let _ = writeln!(s, "gold UNINF    {:>10} {:>12}", self.fp, self.tn);
        let _ = writeln!(s);
        for (name, v) in [
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
            ("accuracy", self.accuracy),
            ("macro_f1", self.macro_f1),
            ("weighted_f1", self.weighted_f1),
        ] {
            let _ = writeln!(s, "{name:<12} {v:>8.5}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Informative as I, Uninformative as U};

    #[test]
    fn perfect_predictions() {
        let g = [I, U, I, U];
        let r = evaluate(&g, &g).unwrap();
        assert_eq!(r.f1, 1.0);
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn hand_enumerated_confusion() {
        let r = evaluate(&[I, U, U, I], &[I, I, U, U]).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_, r.tn), (1, 1, 1, 1));
        assert_eq!((r.precision, r.recall, r.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn no_positive_predictions() {
        let r = evaluate(&[U, U, U], &[I, U, I]).unwrap();
        assert_eq!(r.f1, 0.0);
        assert_eq!(r.precision, 0.0);
    }

    #[test]
    fn errors() {
        assert!(evaluate(&[I], &[I, U]).is_err());
        assert!(evaluate(&[], &[]).is_err());
    }

    #[test]
    fn json_uses_fn_key() {
        let r = evaluate(&[I, U], &[I, I]).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["fn"], 1);
        assert!(r.to_table().contains("f1"));
    }

    fn labels() -> impl Strategy<Value = Vec<(Label, Label)>> {
        prop::collection::vec((prop::sample::select(vec![I, U]), prop::sample::select(vec![I, U])), 1..=20)
    }

    proptest! {
        #[test]
        fn agrees_with_pairwise_oracle(pairs in labels()) {
            let (p, g): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
            let r = evaluate(&p, &g).unwrap();
            let count = |a: Label, b: Label| pairs.iter().filter(|&&(x, y)| x == a && y == b).count();
            prop_assert_eq!(r.tp, count(I, I));
            prop_assert_eq!(r.fp, count(I, U));
            prop_assert_eq!(r.fn_, count(U, I));
            prop_assert_eq!(r.tn, count(U, U));
            prop_assert_eq!(r.n(), pairs.len());
            let prec = if r.tp + r.fp == 0 { 0.0 } else { r.tp as f64 / (r.tp + r.fp) as f64 };
            let rec = if r.tp + r.fn_ == 0 { 0.0 } else { r.tp as f64 / (r.tp + r.fn_) as f64 };
            let f1 = if prec + rec == 0.0 { 0.0 } else { 2.0 * prec * rec / (prec + rec) };
            prop_assert!((r.f1 - f1).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&r.f1));
            prop_assert_eq!(r.f1 == 1.0, r.fp == 0 && r.fn_ == 0 && r.tp > 0);
        }

        #[test]
        fn accuracy_is_swap_symmetric(pairs in labels()) {
            let (p, g): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            prop_assert_eq!(evaluate(&p, &g).unwrap().accuracy, evaluate(&g, &p).unwrap().accuracy);
        }
    }
}
