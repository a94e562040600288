//! Two-dimensional cell-averaging CFAR over a dB view.
//!
//! A cell under test is flagged when its linear power exceeds `scale` times
//! the mean linear power of its training ring: the cells at Chebyshev
//! distance in `(guard, guard + train]`. Rings are truncated at the view
//! border rather than wrapped or padded.

use crate::error::{Error, Result};
use crate::types::RadarView;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfarParams {
    pub guard: usize,
    pub train: usize,
    pub scale: f64,
}

impl CfarParams {
    pub fn validate(&self) -> Result<()> {
        if self.guard < 1 {
            return Err(Error::param("guard", "need at least one guard cell"));
        }
        if self.train < 1 {
            return Err(Error::param("train", "need at least one training cell"));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::param("scale", format!("must be positive, got {}", self.scale)));
        }
        Ok(())
    }
}

/// Returns flagged `(row, col)` cells in row-major order.
pub fn cfar_detect(view: &RadarView, guard: usize, train: usize, scale: f64) -> Result<Vec<(usize, usize)>> {
    let params = CfarParams { guard, train, scale };
    params.validate()?;
    let (rows, cols) = (view.rows(), view.cols());
    let min = 2 * (guard + train) + 1;
    if rows < min || cols < min {
        return Err(Error::param(
            "view",
            format!("{rows}x{cols} view is smaller than the {min}x{min} CFAR window"),
        ));
    }
    let power: Vec<f64> = view
        .data()
        .iter()
        .map(|&db| 10f64.powf(db as f64 / 10.0))
        .collect();
    let reach = (guard + train) as isize;
    let mut hits = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let mut sum = 0.0;
            let mut count = 0usize;
            for dr in -reach..=reach {
                let rr = r as isize + dr;
                if rr < 0 || rr >= rows as isize {
                    continue;
                }
                for dc in -reach..=reach {
                    if dr.unsigned_abs().max(dc.unsigned_abs()) <= guard {
                        continue;
                    }
                    let cc = c as isize + dc;
                    if cc < 0 || cc >= cols as isize {
                        continue;
                    }
                    sum += power[rr as usize * cols + cc as usize];
                    count += 1;
                }
            }
            if count > 0 && power[r * cols + c] > scale * (sum / count as f64) {
                hits.push((r, c));
            }
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{AxisKind, AxisSpec, ViewKind};
    use rand::{Rng, SeedableRng};

    fn view(rows: usize, cols: usize, data: Vec<f32>) -> RadarView {
        RadarView::new(
            ViewKind::RD,
            [
                AxisSpec::new(AxisKind::Range, rows, 0.0, 1.0).unwrap(),
                AxisSpec::new(AxisKind::Doppler, cols, 0.0, 1.0).unwrap(),
            ],
            data,
        )
        .unwrap()
    }

    #[test]
    fn constant_view_has_no_detections() {
        let v = view(20, 20, vec![12.5; 400]);
        assert!(cfar_detect(&v, 2, 4, 1.5).unwrap().is_empty());
    }

    #[test]
    fn isolated_spike_is_the_only_detection() {
        let mut data = vec![-10.0; 21 * 21];
        data[10 * 21 + 10] = 30.0;
        let v = view(21, 21, data);
        assert_eq!(cfar_detect(&v, 2, 4, 5.0).unwrap(), vec![(10, 10)]);
    }

    #[test]
    fn spike_near_border_uses_truncated_ring() {
        let mut data = vec![-10.0; 15 * 15];
        data[0] = 30.0;
        let v = view(15, 15, data);
        assert_eq!(cfar_detect(&v, 1, 2, 5.0).unwrap(), vec![(0, 0)]);
    }

    #[test]
    fn detections_invariant_to_db_offset() {
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(21);
        let data: Vec<f32> = (0..30 * 25).map(|_| rng.random_range(0.0..20.0)).collect();
        let v = view(30, 25, data);
        let base = cfar_detect(&v, 1, 3, 2.0).unwrap();
        assert!(!base.is_empty());
        for off in [-40.0, 7.25, 55.0] {
            assert_eq!(cfar_detect(&v.offset(off).unwrap(), 1, 3, 2.0).unwrap(), base);
        }
    }

    #[test]
    fn parameter_errors() {
        let v = view(10, 10, vec![0.0; 100]);
        assert!(cfar_detect(&v, 0, 2, 2.0).is_err());
        assert!(cfar_detect(&v, 1, 0, 2.0).is_err());
        assert!(cfar_detect(&v, 1, 2, 0.0).is_err());
        assert!(cfar_detect(&v, 2, 3, 2.0).is_err());
    }
}
