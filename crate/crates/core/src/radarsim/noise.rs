//! Background, false-alarm and zero-Doppler noise for simulated RD maps,
//! plus the multilook gamma speckle these statistics stand in for.

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Additive log-domain noise of one RD cell.
///
/// The background is Gaussian in dB (a multilooked Fisher-Tippett
/// approximation). A Bernoulli false alarm adds `false_alarm_db`, and the
/// zero-Doppler column gets a Bernoulli clutter term whose probability starts
/// at 1 on range bin 0 and drops by `zero_doppler_decay` per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub background_mean: f64,
    pub background_var: f64,
    pub false_alarm_p: f64,
    pub false_alarm_db: f64,
    pub zero_doppler_decay: f64,
    pub zero_doppler_db: f64,
    pub looks: u32,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            background_mean: 35.473,
            background_var: 0.244,
            false_alarm_p: 0.01,
            false_alarm_db: 15.0,
            zero_doppler_decay: 0.005,
            zero_doppler_db: 15.0,
            looks: 4,
        }
    }
}

impl NoiseModel {
    /// Background only: no false alarms and no zero-Doppler clutter.
    pub fn background_only() -> Self {
        Self {
            false_alarm_p: 0.0,
            zero_doppler_decay: 1.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.background_var > 0.0) || !self.background_var.is_finite() {
            return Err(Error::param("background_var", "must be positive"));
        }
        if !self.background_mean.is_finite() {
            return Err(Error::param("background_mean", "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.false_alarm_p) {
            return Err(Error::param("false_alarm_p", "must lie in [0, 1]"));
        }
        if !(self.zero_doppler_decay >= 0.0) || !self.zero_doppler_decay.is_finite() {
            return Err(Error::param("zero_doppler_decay", "must be non-negative"));
        }
        if !self.false_alarm_db.is_finite() || !self.zero_doppler_db.is_finite() {
            return Err(Error::param("false_alarm_db", "amplitudes must be finite"));
        }
        if self.looks == 0 {
            return Err(Error::param("looks", "need at least one look"));
        }
        Ok(())
    }

    /// Probability of zero-Doppler clutter at `range_bin`.
    pub fn zero_doppler_p(&self, range_bin: usize) -> f64 {
        (1.0 - self.zero_doppler_decay * range_bin as f64).clamp(0.0, 1.0)
    }
}

/// One draw of `n = s + r + z * 1[Doppler = 0]` in dB.
///
/// Draw order is fixed (Gaussian, false alarm, then zero-Doppler when
/// applicable) so sequences are reproducible from the generator state.
pub fn sample_background<R: Rng + ?Sized>(
    nm: &NoiseModel,
    rng: &mut R,
    range_bin: usize,
    zero_doppler: bool,
) -> f64 {
    let normal = Normal::new(nm.background_mean, nm.background_var.sqrt())
        .expect("validated noise model");
    let mut n = normal.sample(rng);
    if bernoulli(nm.false_alarm_p).sample(rng) {
        n += nm.false_alarm_db;
    }
    if zero_doppler && bernoulli(nm.zero_doppler_p(range_bin)).sample(rng) {
        n += nm.zero_doppler_db;
    }
    n
}

fn bernoulli(p: f64) -> Bernoulli {
    Bernoulli::new(p.clamp(0.0, 1.0)).expect("probability clamped to [0, 1]")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeckleStats {
    pub mean: f64,
    pub variance: f64,
    pub samples: usize,
}

/// Draws `n` multilook speckle intensities `s ~ Gamma(L, 1/L)` (unit mean,
/// variance `1/L`) and reports their sample mean and unbiased variance.
pub fn multilook_speckle<R: Rng + ?Sized>(looks: u32, rng: &mut R, n: usize) -> Result<SpeckleStats> {
    if looks == 0 {
        return Err(Error::param("looks", "need at least one look"));
    }
    if n < 2 {
        return Err(Error::param("n", "need at least two samples for a variance"));
    }
    let l = looks as f64;
    let gamma = Gamma::new(l, 1.0 / l).map_err(|e| Error::param("looks", e.to_string()))?;
    let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
    let (mean, variance) = mean_var(&draws);
    Ok(SpeckleStats { mean, variance, samples: n })
}

pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn background_moments() {
        let nm = NoiseModel::background_only();
        let mut rng = seeded(1);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_background(&nm, &mut rng, 10, false)).collect();
        let (m, v) = mean_var(&xs);
        assert!((m - 35.473).abs() < 0.01, "mean {m}");
        assert!((v - 0.244).abs() < 0.01, "var {v}");
    }

    #[test]
    fn zero_doppler_probability_decays_to_zero() {
        let nm = NoiseModel::default();
        assert_eq!(nm.zero_doppler_p(0), 1.0);
        assert!((nm.zero_doppler_p(100) - 0.5).abs() < 1e-12);
        assert_eq!(nm.zero_doppler_p(200), 0.0);
        assert_eq!(nm.zero_doppler_p(219), 0.0);
    }

    #[test]
    fn zero_doppler_clutter_always_fires_at_bin_zero() {
        let nm = NoiseModel { false_alarm_p: 0.0, ..NoiseModel::default() };
        let mut rng = seeded(2);
        let xs: Vec<f64> = (0..2000).map(|_| sample_background(&nm, &mut rng, 0, true)).collect();
        let (m, _) = mean_var(&xs);
        assert!((m - 35.473 - 15.0).abs() < 0.1);
    }

    #[test]
    fn speckle_moments() {
        let mut rng = seeded(3);
        for (l, tol) in [(1, 0.02), (4, 0.01)] {
            let s = multilook_speckle(l, &mut rng, 100_000).unwrap();
            assert!((s.mean - 1.0).abs() < 0.01);
            assert!((s.variance - 1.0 / l as f64).abs() < tol, "L={l} var={}", s.variance);
        }
        assert!(multilook_speckle(0, &mut rng, 10).is_err());
    }
}
