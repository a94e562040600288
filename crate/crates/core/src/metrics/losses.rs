//! Segmentation losses with analytic gradients with respect to the
//! predicted probabilities, and scalar detection losses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ClassStack, SegMask};

/// Probabilities are clipped to `[CLIP, 1 - CLIP]` inside every logarithm.
pub const CLIP: f64 = 1e-12;

/// Class weights proportional to inverse class frequency over a corpus,
/// normalised to sum to one.
pub fn class_weights(corpus: &[SegMask], classes: usize) -> Result<Vec<f64>> {
    let mut counts = vec![0usize; classes];
    for m in corpus {
        if m.classes() != classes {
            return Err(Error::Shape(format!("mask has {} classes, expected {classes}", m.classes())));
        }
        for &l in m.labels() {
            counts[l as usize] += 1;
        }
    }
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(Error::param("corpus", format!("class {k} never appears")));
    }
    let inv: Vec<f64> = counts.iter().map(|&c| 1.0 / c as f64).collect();
    let s: f64 = inv.iter().sum();
    Ok(inv.into_iter().map(|v| v / s).collect())
}

fn check_pair(y: &ClassStack, p: &ClassStack) -> Result<()> {
    if !y.same_shape(p) {
        return Err(Error::Shape(format!(
            "target {}x{}x{} vs prediction {}x{}x{}",
            y.rows, y.cols, y.classes, p.rows, p.cols, p.classes
        )));
    }
    if y.classes == 0 {
        return Err(Error::Shape("no classes".into()));
    }
    Ok(())
}

/// `-(1/K) sum_k w_k sum_{m,n} y log p`.
pub fn wce_loss(y: &ClassStack, p: &ClassStack, w: &[f64]) -> Result<(f64, ClassStack)> {
    check_pair(y, p)?;
    let k = y.classes;
    if w.len() != k {
        return Err(Error::Shape(format!("{} weights for {k} classes", w.len())));
    }
    let mut grad = ClassStack::zeros(y.rows, y.cols, k);
    let mut value = 0.0;
    for (i, (&yi, &pi)) in y.data.iter().zip(&p.data).enumerate() {
        let wk = w[i % k];
        let pc = pi.max(CLIP);
        value -= wk * yi * pc.ln();
        grad.data[i] = -wk * yi / (k as f64 * pc);
    }
    Ok((value / k as f64, grad))
}

/// `(1/K) sum_k [1 - 2 sum(y p) / sum(y^2 + p^2)]`; a class with an empty
/// denominator contributes 0.
pub fn soft_dice_loss(y: &ClassStack, p: &ClassStack) -> Result<(f64, ClassStack)> {
    check_pair(y, p)?;
    let k = y.classes;
    let mut num = vec![0.0; k];
    let mut den = vec![0.0; k];
    for (i, (&yi, &pi)) in y.data.iter().zip(&p.data).enumerate() {
        num[i % k] += yi * pi;
        den[i % k] += yi * yi + pi * pi;
    }
    let kf = k as f64;
    let value = (0..k)
        .map(|c| if den[c] == 0.0 { 0.0 } else { 1.0 - 2.0 * num[c] / den[c] })
        .sum::<f64>()
        / kf;
    let mut grad = ClassStack::zeros(y.rows, y.cols, k);
    for (i, (&yi, &pi)) in y.data.iter().zip(&p.data).enumerate() {
        let c = i % k;
        if den[c] > 0.0 {
            grad.data[i] = -2.0 * (yi * den[c] - 2.0 * pi * num[c]) / (den[c] * den[c] * kf);
        }
    }
    Ok((value, grad))
}

/// Max over the columns of an `R x C x K` stack, with the first column
/// reaching each maximum.
fn pool_cols(p: &ClassStack) -> (Vec<f64>, Vec<usize>) {
    let (r, k) = (p.rows, p.classes);
    let mut best = vec![f64::NEG_INFINITY; r * k];
    let mut arg = vec![0usize; r * k];
    for m in 0..r {
        for n in 0..p.cols {
            for c in 0..k {
                let v = p.get(m, n, c);
                if v > best[m * k + c] {
                    best[m * k + c] = v;
                    arg[m * k + c] = n;
                }
            }
        }
    }
    (best, arg)
}

/// `(1 / (R K)) ||max_D p_RD - max_A p_RA||^2` with subgradients through the
/// pooled cells.
pub fn coherence_loss(p_rd: &ClassStack, p_ra: &ClassStack) -> Result<(f64, ClassStack, ClassStack)> {
    if p_rd.rows != p_ra.rows || p_rd.classes != p_ra.classes {
        return Err(Error::Shape(format!(
            "RD is {}x{}x{}, RA is {}x{}x{}: range bins and classes must agree",
            p_rd.rows, p_rd.cols, p_rd.classes, p_ra.rows, p_ra.cols, p_ra.classes
        )));
    }
    if p_rd.rows == 0 || p_rd.classes == 0 || p_rd.cols == 0 || p_ra.cols == 0 {
        return Err(Error::Shape("empty prediction".into()));
    }
    let (a, ia) = pool_cols(p_rd);
    let (b, ib) = pool_cols(p_ra);
    let k = p_rd.classes;
    let norm = (p_rd.rows * k) as f64;
    let mut g_rd = ClassStack::zeros(p_rd.rows, p_rd.cols, k);
    let mut g_ra = ClassStack::zeros(p_ra.rows, p_ra.cols, k);
    let mut value = 0.0;
    for i in 0..a.len() {
        let (m, c) = (i / k, i % k);
        let d = a[i] - b[i];
        value += d * d;
        let idx = g_rd.index(m, ia[i], c);
        g_rd.data[idx] = 2.0 * d / norm;
        let idx = g_ra.index(m, ib[i], c);
        g_ra.data[idx] = -2.0 * d / norm;
    }
    Ok((value / norm, g_rd, g_ra))
}

#[derive(Debug, Clone, Copy)]
pub struct ViewPair<'a> {
    pub rd: &'a ClassStack,
    pub ra: &'a ClassStack,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub wce: f64,
    pub sdice: f64,
    pub col: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { wce: 1.0, sdice: 10.0, col: 5.0 }
    }
}

/// `l_wce (wCE_RD + wCE_RA) + l_sdice (SDice_RD + SDice_RA) + l_col CoL`.
pub fn combined_loss(
    gts: ViewPair,
    preds: ViewPair,
    class_w: (&[f64], &[f64]),
    lambda: &LossWeights,
) -> Result<f64> {
    if lambda.wce < 0.0 || lambda.sdice < 0.0 || lambda.col < 0.0 {
        return Err(Error::param("lambda", "loss weights must be non-negative"));
    }
    let wce = wce_loss(gts.rd, preds.rd, class_w.0)?.0 + wce_loss(gts.ra, preds.ra, class_w.1)?.0;
    let sd = soft_dice_loss(gts.rd, preds.rd)?.0 + soft_dice_loss(gts.ra, preds.ra)?.0;
    let col = coherence_loss(preds.rd, preds.ra)?.0;
    Ok(lambda.wce * wce + lambda.sdice * sd + lambda.col * col)
}

fn clip(p: f64) -> f64 {
    p.clamp(CLIP, 1.0 - CLIP)
}

/// `-(1-p)^g log p` for a positive, `-p^g log(1-p)` for a negative.
pub fn focal_loss(y: bool, p: f64, gamma: f64) -> f64 {
    let p = clip(p);
    if y {
        -(1.0 - p).powf(gamma) * p.ln()
    } else {
        -p.powf(gamma) * (1.0 - p).ln()
    }
}

/// Derivative of [`focal_loss`] with respect to `p`.
pub fn focal_loss_grad(y: bool, p: f64, gamma: f64) -> f64 {
    let p = clip(p);
    let (q, sign) = if y { (p, 1.0) } else { (1.0 - p, -1.0) };
    // d/dq of -(1-q)^g ln q, then chain through q = p or q = 1 - p
    let mut d = -(1.0 - q).powf(gamma) / q;
    if gamma != 0.0 {
        d += gamma * (1.0 - q).powf(gamma - 1.0) * q.ln();
    }
    sign * d
}

pub fn smooth_l1(x: f64) -> f64 {
    if x.abs() < 1.0 {
        0.5 * x * x
    } else {
        x.abs() - 0.5
    }
}

pub fn smooth_l1_grad(x: f64) -> f64 {
    if x.abs() < 1.0 {
        x
    } else {
        x.signum()
    }
}

/// Binary cross-entropy summed over the grid, with its gradient.
pub fn bce_loss(y: &[f64], p: &[f64]) -> Result<(f64, Vec<f64>)> {
    if y.len() != p.len() {
        return Err(Error::Shape(format!("{} targets for {} predictions", y.len(), p.len())));
    }
    let mut value = 0.0;
    let grad = y
        .iter()
        .zip(p)
        .map(|(&yi, &pi)| {
            let pc = clip(pi);
            value -= yi * pc.ln() + (1.0 - yi) * (1.0 - pc).ln();
            -yi / pc + (1.0 - yi) / (1.0 - pc)
        })
        .collect();
    Ok((value, grad))
}
