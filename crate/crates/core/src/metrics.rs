//! Pixel-wise segmentation metrics, dataset aggregates, mean score
//! difference and equal error rate.
//!
//! Ratios with an empty denominator follow one convention: 1.0 when the
//! prediction and the ground truth are both empty, 0.0 otherwise.

use serde::{Deserialize, Serialize};

use crate::decompose::DecomposeConfig;
use crate::error::{Error, Result};
use crate::imgcore::BinaryMask;
use crate::score::{score_mask, ScoreParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    fn both_empty(&self) -> bool {
        self.tp == 0 && self.fp == 0 && self.fn_ == 0
    }

    fn ratio(&self, num: f64, den: f64) -> f64 {
        if den > 0.0 {
            num / den
        } else if self.both_empty() {
            1.0
        } else {
            0.0
        }
    }

    pub fn iou(&self) -> f64 {
        self.ratio(self.tp as f64, (self.tp + self.fp + self.fn_) as f64)
    }

    pub fn f_beta(&self, beta: f64) -> f64 {
        let b2 = beta * beta;
        let tp = self.tp as f64;
        self.ratio((1.0 + b2) * tp, (1.0 + b2) * tp + b2 * self.fn_ as f64 + self.fp as f64)
    }

    pub fn f1(&self) -> f64 {
        self.f_beta(1.0)
    }

    pub fn f2(&self) -> f64 {
        self.f_beta(2.0)
    }

    pub fn accuracy(&self) -> f64 {
        self.ratio((self.tp + self.tn) as f64, self.total() as f64)
    }

    pub fn recall(&self) -> f64 {
        self.ratio(self.tp as f64, (self.tp + self.fn_) as f64)
    }

    pub fn precision(&self) -> f64 {
        self.ratio(self.tp as f64, (self.tp + self.fp) as f64)
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, o: ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts { tp: self.tp + o.tp, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_, tn: self.tn + o.tn }
    }
}

pub fn confusion_counts(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    pred.check_same_dims(gt)?;
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn iou(c: &ConfusionCounts) -> f64 {
    c.iou()
}

pub fn f_beta(c: &ConfusionCounts, beta: f64) -> f64 {
    c.f_beta(beta)
}

pub fn accuracy(c: &ConfusionCounts) -> f64 {
    c.accuracy()
}

pub fn recall(c: &ConfusionCounts) -> f64 {
    c.recall()
}

/// Mean over pairs of `|S(pred) − S(gt)|`.
pub fn mean_score_difference(
    pairs: &[(BinaryMask, BinaryMask)],
    dcfg: &DecomposeConfig,
    p: &ScoreParams,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::arg("mean score difference needs at least one mask pair"));
    }
    let mut total = 0.0;
    for (pred, gt) in pairs {
        pred.check_same_dims(gt)?;
        total += score_difference(pred, gt, dcfg, p);
    }
    Ok(total / pairs.len() as f64)
}

pub fn score_difference(pred: &BinaryMask, gt: &BinaryMask, dcfg: &DecomposeConfig, p: &ScoreParams) -> f64 {
    (score_mask(pred, dcfg, p).score - score_mask(gt, dcfg, p).score).abs()
}

/// Equal error rate of a matcher from its genuine and impostor scores
/// (higher means more similar).
///
/// At threshold `t`, FNMR is the fraction of genuine scores below `t` and
/// FMR the fraction of impostor scores at or above `t`. Both are evaluated at
/// every threshold separating consecutive distinct pooled scores, plus below
/// the minimum. The EER is the first point where FNMR reaches FMR, linearly
/// interpolated between that threshold and the previous one.
pub fn compute_eer(genuine: &[f64], impostor: &[f64]) -> Result<f64> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(Error::arg("EER needs nonempty genuine and impostor score lists"));
    }
    if genuine.iter().chain(impostor).any(|v| !v.is_finite()) {
        return Err(Error::arg("match scores must be finite"));
    }
    let mut gen = genuine.to_vec();
    let mut imp = impostor.to_vec();
    gen.sort_by(f64::total_cmp);
    imp.sort_by(f64::total_cmp);
    let mut pooled: Vec<f64> = gen.iter().chain(&imp).copied().collect();
    pooled.sort_by(f64::total_cmp);
    pooled.dedup();

    let (ng, ni) = (gen.len() as f64, imp.len() as f64);
    // threshold just above `v`: genuine <= v are rejected, impostor > v accepted
    let rates = |v: f64| {
        let fnmr = gen.partition_point(|&g| g <= v) as f64 / ng;
        let fmr = (imp.len() - imp.partition_point(|&i| i <= v)) as f64 / ni;
        (fnmr, fmr)
    };
    let mut prev = (0.0, 1.0);
    for &v in &pooled {
        let cur = rates(v);
        if cur.0 >= cur.1 {
            return Ok(interpolate_crossing(prev, cur));
        }
        prev = cur;
    }
    unreachable!("FNMR reaches 1 and FMR reaches 0 above the largest score")
}

/// Crossing of two piecewise-linear rate curves between the points `a`
/// (FNMR < FMR) and `b` (FNMR >= FMR).
pub(crate) fn interpolate_crossing(a: (f64, f64), b: (f64, f64)) -> f64 {
    let da = a.0 - a.1;
    let db = b.0 - b.1;
    if db == 0.0 {
        return b.0;
    }
    let t = -da / (db - da);
    a.0 + t * (b.0 - a.0)
}

/// Aggregation scheme for dataset reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Per-image metrics, then the arithmetic mean.
    #[default]
    Macro,
    /// Pooled pixel counts over the dataset.
    Micro,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "IoU")]
    pub iou: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(rename = "F2")]
    pub f2: f64,
    #[serde(rename = "Accuracy")]
    pub accuracy: f64,
    #[serde(rename = "Recall")]
    pub recall: f64,
    #[serde(rename = "Mean Score Dif.")]
    pub mean_score_difference: f64,
    #[serde(rename = "Samples")]
    pub samples: usize,
}

pub fn dataset_report(
    pairs: &[(BinaryMask, BinaryMask)],
    dcfg: &DecomposeConfig,
    p: &ScoreParams,
) -> Result<MetricsReport> {
    dataset_report_with(pairs, dcfg, p, Aggregation::Macro)
}

pub fn dataset_report_with(
    pairs: &[(BinaryMask, BinaryMask)],
    dcfg: &DecomposeConfig,
    p: &ScoreParams,
    aggregation: Aggregation,
) -> Result<MetricsReport> {
    if pairs.is_empty() {
        return Err(Error::arg("dataset report needs at least one mask pair"));
    }
    let counts = pairs.iter().map(|(pred, gt)| confusion_counts(pred, gt)).collect::<Result<Vec<_>>>()?;
    let mean_score_difference = mean_score_difference(pairs, dcfg, p)?;
    let n = pairs.len() as f64;
    let (iou, f1, f2, accuracy, recall) = match aggregation {
        Aggregation::Macro => {
            let mean = |f: fn(&ConfusionCounts) -> f64| counts.iter().map(f).sum::<f64>() / n;
            (
                mean(ConfusionCounts::iou),
                mean(ConfusionCounts::f1),
                mean(ConfusionCounts::f2),
                mean(ConfusionCounts::accuracy),
                mean(ConfusionCounts::recall),
            )
        }
        Aggregation::Micro => {
            let c = counts.iter().copied().fold(ConfusionCounts::default(), |a, b| a + b);
            (c.iou(), c.f1(), c.f2(), c.accuracy(), c.recall())
        }
    };
    Ok(MetricsReport { iou, f1, f2, accuracy, recall, mean_score_difference, samples: pairs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::Rect;

    fn counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, fn_, tn }
    }

    #[test]
    fn half_overlap_counts() {
        let gt = BinaryMask::from_fn(10, 10, |x, _| x < 5).unwrap();
        let pred = BinaryMask::from_fn(10, 10, |_, y| y < 5).unwrap();
        assert_eq!(confusion_counts(&pred, &gt).unwrap(), counts(25, 25, 25, 25));
    }

    #[test]
    fn identical_and_inverted() {
        let gt = BinaryMask::from_fn(8, 8, |x, y| (x * y) % 3 == 0).unwrap();
        let c = confusion_counts(&gt, &gt).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
        for v in [c.iou(), c.f1(), c.f2(), c.accuracy(), c.recall()] {
            assert_eq!(v, 1.0);
        }
        let c = confusion_counts(&gt.invert(), &gt).unwrap();
        assert_eq!((c.tp, c.tn), (0, 0));
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let a = BinaryMask::empty(4, 4).unwrap();
        let b = BinaryMask::empty(4, 5).unwrap();
        assert!(confusion_counts(&a, &b).is_err());
    }

    #[test]
    fn formula_values() {
        let c = counts(50, 0, 50, 0);
        assert!((c.iou() - 0.5).abs() < 1e-15);
        assert!((c.f1() - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.f2() - 250.0 / 450.0).abs() < 1e-15);
        assert!((c.recall() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_conventions() {
        let both_empty = counts(0, 0, 0, 100);
        for v in [both_empty.iou(), both_empty.f1(), both_empty.f2(), both_empty.recall(), both_empty.accuracy()] {
            assert_eq!(v, 1.0);
        }
        let missed = counts(0, 0, 10, 90);
        for v in [missed.iou(), missed.f1(), missed.f2(), missed.recall()] {
            assert_eq!(v, 0.0);
        }
        // false alarm on an empty ground truth: recall has no positives
        let false_alarm = counts(0, 10, 0, 90);
        assert_eq!(false_alarm.recall(), 0.0);
        assert_eq!(false_alarm.iou(), 0.0);
    }

    #[test]
    fn eer_fixed_cases() {
        assert_eq!(compute_eer(&[0.8, 0.9], &[0.1, 0.2]).unwrap(), 0.0);
        assert_eq!(compute_eer(&[0.1, 0.2, 0.3], &[0.3, 0.1, 0.2]).unwrap(), 0.5);
        assert_eq!(compute_eer(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.5);
        let eer = compute_eer(&[0.6, 0.7, 0.8, 0.9], &[0.2, 0.3, 0.5, 0.65]).unwrap();
        assert!((eer - 0.25).abs() < 1e-12);
    }

    #[test]
    fn eer_rejects_bad_input() {
        assert!(compute_eer(&[], &[0.1]).is_err());
        assert!(compute_eer(&[0.1], &[]).is_err());
        assert!(compute_eer(&[f64::NAN], &[0.1]).is_err());
    }

    #[test]
    fn mean_score_difference_cases() {
        let dcfg = DecomposeConfig::default();
        let p = ScoreParams::default();
        assert!(mean_score_difference(&[], &dcfg, &p).is_err());
        let mut gt = BinaryMask::empty(224, 224).unwrap();
        gt.fill_rect(&Rect::new(30, 40, 20, 20));
        let empty = BinaryMask::empty(224, 224).unwrap();
        let d = mean_score_difference(&[(empty.clone(), gt.clone())], &dcfg, &p).unwrap();
        assert!((d - (5.0 + 100.0 * 400.0 / 50176.0)).abs() < 1e-9);
        let same = mean_score_difference(&[(gt.clone(), gt.clone()), (empty.clone(), empty.clone())], &dcfg, &p);
        assert_eq!(same.unwrap(), 0.0);
    }

    #[test]
    fn report_aggregation() {
        let dcfg = DecomposeConfig::default();
        let p = ScoreParams::default();
        let gt = BinaryMask::from_fn(10, 10, |x, _| x < 5).unwrap();
        let perfect = (gt.clone(), gt.clone());
        let miss = (BinaryMask::empty(10, 10).unwrap(), gt.clone());
        let single = dataset_report(std::slice::from_ref(&perfect), &dcfg, &p).unwrap();
        assert_eq!(single.iou, 1.0);
        let r = dataset_report(&[perfect.clone(), miss.clone()], &dcfg, &p).unwrap();
        assert!((r.iou - 0.5).abs() < 1e-15);
        assert_eq!(r.samples, 2);
        let dup = dataset_report(&[perfect.clone(), miss.clone(), perfect, miss], &dcfg, &p).unwrap();
        assert_eq!((dup.iou, dup.f1, dup.recall), (r.iou, r.f1, r.recall));
        let micro = dataset_report_with(
            &[(gt.clone(), gt.clone()), (BinaryMask::empty(10, 10).unwrap(), gt)],
            &dcfg,
            &p,
            Aggregation::Micro,
        )
        .unwrap();
        assert!((micro.iou - 0.5).abs() < 1e-15);
        let json = serde_json::to_value(r).unwrap();
        for key in ["IoU", "F1", "F2", "Accuracy", "Recall", "Mean Score Dif."] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
