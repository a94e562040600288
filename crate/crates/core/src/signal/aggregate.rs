//! Compression of a RAD tensor into 2-D log-power views.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{RadTensor, RadarView, ViewKind};

/// Value assigned to cells whose aggregated power is zero.
pub const DB_FLOOR: f64 = -120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregation {
    /// `10 log10(mean |x|^2)` over the dropped axis.
    MeanLog,
    /// `10 log10(max |x|^2)` over the dropped axis.
    MaxLog,
}

pub fn aggregate(t: &RadTensor, target: ViewKind, method: Aggregation) -> Result<RadarView> {
    aggregate_with_floor(t, target, method, DB_FLOOR)
}

/// Like [`aggregate`] with an explicit dB floor. Power is accumulated in f64
/// in ascending index order along the dropped axis.
pub fn aggregate_with_floor(
    t: &RadTensor,
    target: ViewKind,
    method: Aggregation,
    floor_db: f64,
) -> Result<RadarView> {
    let [nr, na, nd] = t.dims();
    if nr * na * nd == 0 {
        return Err(Error::Shape("cannot aggregate an empty tensor".into()));
    }
    let [ra, aa, da] = *t.axes();
    let (axes, rows, cols, depth) = match target {
        ViewKind::RD => ([ra, da], nr, nd, na),
        ViewKind::RA => ([ra, aa], nr, na, nd),
        ViewKind::AD => ([aa, da], na, nd, nr),
    };
    let index = |i: usize, j: usize, k: usize| match target {
        ViewKind::RD => t.index(i, k, j),
        ViewKind::RA => t.index(i, j, k),
        ViewKind::AD => t.index(k, i, j),
    };
    let data = t.data();
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut acc = 0.0f64;
            for k in 0..depth {
                let c = data[index(i, j, k)];
                let p = (c.re as f64) * (c.re as f64) + (c.im as f64) * (c.im as f64);
                acc = match method {
                    Aggregation::MeanLog => acc + p,
                    Aggregation::MaxLog => acc.max(p),
                };
            }
            if method == Aggregation::MeanLog {
                acc /= depth as f64;
            }
            out.push(to_db(acc, floor_db) as f32);
        }
    }
    RadarView::new(target, axes, out)
}

fn to_db(power: f64, floor_db: f64) -> f64 {
    if power > 0.0 {
        (10.0 * power.log10()).max(floor_db)
    } else {
        floor_db
    }
}
