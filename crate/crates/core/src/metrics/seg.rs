//! Per-class overlap scores between integer masks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::SegMask;

/// A score together with whether it fell back to a convention because its
/// denominator was empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub value: f64,
    pub degenerate: bool,
}

impl Score {
    fn ratio(num: usize, den: usize) -> Self {
        if den == 0 {
            Score { value: 1.0, degenerate: true }
        } else {
            Score { value: num as f64 / den as f64, degenerate: false }
        }
    }
}

struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
}

fn counts(pred: &SegMask, gt: &SegMask, k: u32) -> Result<Counts> {
    if pred.shape() != gt.shape() {
        return Err(Error::Shape(format!("pred {:?} vs gt {:?}", pred.shape(), gt.shape())));
    }
    let mut c = Counts { tp: 0, fp: 0, fn_: 0 };
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        match (p == k, g == k) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            _ => {}
        }
    }
    Ok(c)
}

/// `|A ∩ B| / |A ∪ B|` for the class-`k` supports; 1 when both are empty.
pub fn iou(pred: &SegMask, gt: &SegMask, k: u32) -> Result<Score> {
    let c = counts(pred, gt, k)?;
    Ok(Score::ratio(c.tp, c.tp + c.fp + c.fn_))
}

/// `2|A ∩ B| / (|A| + |B|)`; 1 when both are empty.
pub fn dice(pred: &SegMask, gt: &SegMask, k: u32) -> Result<Score> {
    let c = counts(pred, gt, k)?;
    Ok(Score::ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_))
}

/// `(TP / (TP + FP), TP / (TP + FN))`.
pub fn pixel_precision_recall(pred: &SegMask, gt: &SegMask, k: u32) -> Result<(Score, Score)> {
    let c = counts(pred, gt, k)?;
    Ok((Score::ratio(c.tp, c.tp + c.fp), Score::ratio(c.tp, c.tp + c.fn_)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeanKind {
    Arithmetic,
    Harmonic,
}

/// Arithmetic or harmonic mean; the harmonic mean is 0 as soon as any value
/// is non-positive.
pub fn mean_aggregate(values: &[f64], kind: MeanKind) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::param("values", "cannot average an empty list"));
    }
    let n = values.len() as f64;
    Ok(match kind {
        MeanKind::Arithmetic => values.iter().sum::<f64>() / n,
        MeanKind::Harmonic => {
            if values.iter().any(|&v| v <= 0.0) {
                0.0
            } else {
                n / values.iter().map(|v| 1.0 / v).sum::<f64>()
            }
        }
    })
}
