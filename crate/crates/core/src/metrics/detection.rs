//! Box-level detection precision and recall.

use serde::{Deserialize, Serialize};

/// Axis-aligned box `[r0, r1) x [c0, c1)` in continuous grid coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub r0: f64,
    pub c0: f64,
    pub r1: f64,
    pub c1: f64,
}

impl BBox {
    /// Box covering the inclusive cell range `(min_r, min_c)..=(max_r, max_c)`.
    pub fn from_cells(min_r: usize, min_c: usize, max_r: usize, max_c: usize) -> Self {
        BBox { r0: min_r as f64, c0: min_c as f64, r1: max_r as f64 + 1.0, c1: max_c as f64 + 1.0 }
    }

    pub fn area(&self) -> f64 {
        (self.r1 - self.r0).max(0.0) * (self.c1 - self.c0).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredBox {
    pub bbox: BBox,
    pub score: f64,
}

pub fn box_iou(a: &BBox, b: &BBox) -> f64 {
    let inter = BBox { r0: a.r0.max(b.r0), c0: a.c0.max(b.c0), r1: a.r1.min(b.r1), c1: a.c1.min(b.c1) }.area();
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Greedy matching by descending score: each prediction takes the unmatched
/// ground truth of highest IoU if that IoU reaches `threshold`. Returns
/// `(TP / #pred, TP / #gt)`; an empty side scores 1 when the other side is
/// empty too.
pub fn detection_ap_ar(preds: &[ScoredBox], gts: &[BBox], threshold: f64) -> (f64, f64) {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].score.total_cmp(&preds[a].score));
    let mut taken = vec![false; gts.len()];
    let mut tp = 0usize;
    for i in order {
        let mut best: Option<(usize, f64)> = None;
        for (j, g) in gts.iter().enumerate() {
            if taken[j] {
                continue;
            }
            let v = box_iou(&preds[i].bbox, g);
            if v >= threshold && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((j, v));
            }
        }
        if let Some((j, _)) = best {
            taken[j] = true;
            tp += 1;
        }
    }
    let ratio = |n: usize, other_empty: bool| {
        if n == 0 {
            if other_empty { 1.0 } else { 0.0 }
        } else {
            tp as f64 / n as f64
        }
    };
    (ratio(preds.len(), gts.is_empty()), ratio(gts.len(), preds.is_empty()))
}

/// 4-connected components of a row-major boolean mask, as inclusive cell
/// bounds `(min_r, min_c, max_r, max_c)` in scan order of their first cell.
pub fn components(mask: &[bool], rows: usize, cols: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut seen = vec![false; rows * cols];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..rows * cols {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut b0, mut b1, mut b2, mut b3) = (usize::MAX, usize::MAX, 0, 0);
        while let Some(i) = stack.pop() {
            let (r, c) = (i / cols, i % cols);
            b0 = b0.min(r);
            b1 = b1.min(c);
            b2 = b2.max(r);
            b3 = b3.max(c);
            let mut visit = |j: usize| {
                if mask[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if r > 0 {
                visit(i - cols);
            }
            if r + 1 < rows {
                visit(i + cols);
            }
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < cols {
                visit(i + 1);
            }
        }
        out.push((b0, b1, b2, b3));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(r0: f64, c0: f64, r1: f64, c1: f64) -> BBox {
        BBox { r0, c0, r1, c1 }
    }

    #[test]
    fn perfect_predictions() {
        let gts = [b(0.0, 0.0, 2.0, 2.0), b(5.0, 5.0, 8.0, 9.0)];
        let preds: Vec<ScoredBox> = gts.iter().map(|&g| ScoredBox { bbox: g, score: 0.9 }).collect();
        assert_eq!(detection_ap_ar(&preds, &gts, 0.5), (1.0, 1.0));
    }

    #[test]
    fn one_match_one_false_positive() {
        let gt = [b(0.0, 0.0, 10.0, 10.0)];
        let hit = b(0.0, 0.0, 10.0, 6.0);
        assert!((box_iou(&hit, &gt[0]) - 0.6).abs() < 1e-12);
        let preds = [ScoredBox { bbox: hit, score: 0.8 }, ScoredBox { bbox: b(20.0, 20.0, 22.0, 22.0), score: 0.9 }];
        assert_eq!(detection_ap_ar(&preds, &gt, 0.5), (0.5, 1.0));
    }

    #[test]
    fn components_are_four_connected() {
        #[rustfmt::skip]
        let m = [
            true, true, false, false,
            false, false, true, false,
            false, false, true, true,
        ];
        assert_eq!(components(&m, 3, 4), vec![(0, 0, 0, 1), (1, 2, 2, 3)]);
    }

    fn boxes(n: usize) -> impl Strategy<Value = Vec<BBox>> {
        prop::collection::vec((0.0f64..20.0, 0.0f64..20.0, 1.0f64..8.0, 1.0f64..8.0), 0..n)
            .prop_map(|v| v.into_iter().map(|(r, c, h, w)| b(r, c, r + h, c + w)).collect())
    }

    proptest! {
        #[test]
        fn raising_threshold_never_helps(gts in boxes(6), preds in boxes(8), scores in prop::collection::vec(0.0f64..1.0, 8), t in 0.05f64..0.9, dt in 0.0f64..0.5) {
            let preds: Vec<ScoredBox> = preds.into_iter().zip(scores).map(|(bbox, score)| ScoredBox { bbox, score }).collect();
            let lo = detection_ap_ar(&preds, &gts, t);
            let hi = detection_ap_ar(&preds, &gts, t + dt);
            prop_assert!(hi.0 <= lo.0 + 1e-12 && hi.1 <= lo.1 + 1e-12);
        }
    }
}
