//! Classification metrics over collision probabilities. "Positive" means
//! colliding unless a name says otherwise.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Counts at a fixed decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Confusion {
    /// A score `≥ threshold` predicts collision.
    pub fn at(scores: &[f32], labels: &[u8], threshold: f32) -> Self {
        let mut c = Confusion::default();
        for (&s, &l) in scores.iter().zip(labels) {
            match (s >= threshold, l != 0) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Precision with collision-free as the positive class.
    pub fn precision_free(&self) -> f64 {
        ratio(self.tn, self.tn + self.fn_)
    }

    pub fn recall_free(&self) -> f64 {
        ratio(self.tn, self.tn + self.fp)
    }

    pub fn positive_rate(&self) -> f64 {
        ratio(self.tp + self.fn_, self.total())
    }

    /// Accuracy of always predicting the more common label.
    pub fn majority_accuracy(&self) -> f64 {
        let p = self.positive_rate();
        p.max(1.0 - p)
    }
}

/// Operating points `(recall, precision)` at every distinct score, in
/// descending score order; tied scores enter together.
pub fn pr_curve(scores: &[f32], labels: &[u8]) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..scores.len().min(labels.len())).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let positives = order.iter().filter(|&&i| labels[i] != 0).count() as u64;
    let mut out = Vec::new();
    let (mut tp, mut seen) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            tp += u64::from(labels[order[i]] != 0);
            seen += 1;
            i += 1;
        }
        out.push((ratio(tp, positives), ratio(tp, seen)));
    }
    out
}

/// Average precision: `Σ (Rₖ − Rₖ₋₁)·Pₖ` over the operating points of
/// [`pr_curve`]. Without ties this is the mean precision at each positive's
/// rank. `None` when there are no positives.
pub fn average_precision(scores: &[f32], labels: &[u8]) -> Option<f64> {
    if !labels.iter().any(|&l| l != 0) {
        return None;
    }
    let mut prev = 0.0;
    let mut ap = 0.0;
    for (r, p) in pr_curve(scores, labels) {
        ap += (r - prev) * p;
        prev = r;
    }
    Some(ap)
}

/// Average precision with collision-free as the positive class, scoring each
/// query by `1 - score`.
pub fn average_precision_free(scores: &[f32], labels: &[u8]) -> Option<f64> {
    let s: Vec<f32> = scores.iter().map(|&v| 1.0 - v).collect();
    let l: Vec<u8> = labels.iter().map(|&v| u8::from(v == 0)).collect();
    average_precision(&s, &l)
}

/// Interpolated precision (best precision at recall `≥ r`) on `points`
/// evenly spaced recall levels from 0 to 1; non-increasing by construction.
pub fn interpolated_pr(scores: &[f32], labels: &[u8], points: usize) -> Vec<(f64, f64)> {
    let curve = pr_curve(scores, labels);
    let n = points.max(2);
    (0..n)
        .map(|k| {
            let r = k as f64 / (n - 1) as f64;
            let p = curve.iter().filter(|(cr, _)| *cr >= r - 1e-12).map(|(_, p)| *p).fold(0.0, f64::max);
            (r, p)
        })
        .collect()
}

/// Summary of a scored batch at a decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub confusion: Confusion,
    pub accuracy: f64,
    pub ap: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub precision_free: f64,
    pub recall_free: f64,
}

pub fn summarize(scores: &[f32], labels: &[u8]) -> Summary {
    summarize_at(scores, labels, 0.5)
}

pub fn summarize_at(scores: &[f32], labels: &[u8], threshold: f32) -> Summary {
    let c = Confusion::at(scores, labels, threshold);
    Summary {
        confusion: c,
        accuracy: c.accuracy(),
        ap: average_precision(scores, labels),
        precision: c.precision(),
        recall: c.recall(),
        precision_free: c.precision_free(),
        recall_free: c.recall_free(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Enumerates every distinct threshold independently and integrates
    /// precision over recall steps.
    fn brute_ap(scores: &[f32], labels: &[u8]) -> Option<f64> {
        let pos = labels.iter().filter(|&&l| l != 0).count();
        if pos == 0 {
            return None;
        }
        let mut thresholds: Vec<f32> = scores.to_vec();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let mut prev_r = 0.0;
        let mut ap = 0.0;
        for t in thresholds {
            let above: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] >= t).collect();
            let tp = above.iter().filter(|&&i| labels[i] != 0).count();
            let r = tp as f64 / pos as f64;
            let p = tp as f64 / above.len() as f64;
            ap += (r - prev_r) * p;
            prev_r = r;
        }
        Some(ap)
    }

    #[test]
    fn hand_example() {
        let ap = average_precision(&[0.9, 0.8, 0.3], &[1, 0, 1]).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(alloc::format!("{ap:.4}"), "0.8333");
    }

    #[test]
    fn perfect_and_uninformative() {
        let labels = [1, 0, 1, 1, 0, 0, 0];
        let perfect: Vec<f32> = labels.iter().map(|&l| f32::from(l)).collect();
        assert_eq!(average_precision(&perfect, &labels), Some(1.0));
        assert_eq!(summarize(&perfect, &labels).accuracy, 1.0);
        let flat = [0.5f32; 7];
        let ap = average_precision(&flat, &labels).unwrap();
        assert!((ap - 3.0 / 7.0).abs() < 1e-12);
        assert_eq!(average_precision(&flat, &[0; 7]), None);
    }

    #[test]
    fn confusion_reconciles() {
        let s = [0.1, 0.7, 0.5, 0.4, 0.9];
        let l = [0, 0, 1, 1, 1];
        let c = Confusion::at(&s, &l, 0.5);
        assert_eq!(c, Confusion { tp: 2, fp: 1, tn: 1, fn_: 1 });
        assert_eq!(c.total(), 5);
        assert!((c.precision() - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.recall_free() - 0.5).abs() < 1e-12);
        assert!((c.majority_accuracy() - 0.6).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn matches_brute_force(pairs in prop::collection::vec((0u8..6, 0u8..2), 1..=20)) {
            // coarse score levels force plenty of ties
            let scores: Vec<f32> = pairs.iter().map(|p| f32::from(p.0) / 5.0).collect();
            let labels: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            let (a, b) = (average_precision(&scores, &labels), brute_ap(&scores, &labels));
            match (a, b) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (a, b) => prop_assert_eq!(a, b),
            }
        }

        #[test]
        fn curve_recall_is_monotone(pairs in prop::collection::vec((0.0f32..1.0, 0u8..2), 1..50)) {
            let scores: Vec<f32> = pairs.iter().map(|p| p.0).collect();
            let labels: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            let curve = pr_curve(&scores, &labels);
            prop_assert!(curve.windows(2).all(|w| w[0].0 <= w[1].0));
            prop_assert!(curve.iter().all(|&(r, p)| (0.0..=1.0).contains(&r) && (0.0..=1.0).contains(&p)));
        }

        #[test]
        fn interpolated_precision_is_non_increasing(pairs in prop::collection::vec((0.0f32..1.0, 0u8..2), 1..50)) {
            let scores: Vec<f32> = pairs.iter().map(|p| p.0).collect();
            let labels: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            let grid = interpolated_pr(&scores, &labels, 11);
            prop_assert_eq!(grid.len(), 11);
            prop_assert!(grid.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 >= w[1].1));
        }

        #[test]
        fn free_ap_mirrors_collision_ap(pairs in prop::collection::vec((0u8..6, 0u8..2), 1..=20)) {
            let scores: Vec<f32> = pairs.iter().map(|p| f32::from(p.0) / 5.0).collect();
            let labels: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            let flipped: Vec<f32> = scores.iter().map(|s| 1.0 - s).collect();
            let neg: Vec<u8> = labels.iter().map(|&l| 1 - l).collect();
            prop_assert_eq!(average_precision_free(&scores, &labels), average_precision(&flipped, &neg));
        }
    }
}
