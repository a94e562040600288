//! Semi-automatic annotation: seed radial velocity, Mean-Shift clustering in
//! (x, y, Doppler) space, bandwidth selection, centroid tracking and the
//! projection of tracked clusters to sparse, box and dense view labels.

pub mod bandwidth;
pub mod meanshift;
pub mod morph;
pub mod project;
pub mod track;

pub use bandwidth::{
    cluster_js, fit_gaussian, js_divergence, log_ratio_bandwidth, select_bandwidth, BandwidthMethod,
    Gaussian,
};
pub use meanshift::{mean_shift, mean_shift_with, Cluster, MERGE_RADIUS, TOL_FACTOR, MAX_ITER};
pub use morph::{dilate, erode, morph, morph_chain, to_dense, DenseVariant, MorphOp};
pub use project::{annotate_cluster, project, Annotation, Projection};
pub use track::{track_sequence, TrackStep};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A DoA detection with its Doppler, the feature space of the clustering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoaPoint {
    pub x: f64,
    pub y: f64,
    /// Radial velocity, m/s, positive when approaching.
    pub doppler: f64,
}

impl DoaPoint {
    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.doppler]
    }
}

/// Tracker seed: a position and the radial velocity at that position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedPoint {
    pub x: f64,
    pub y: f64,
    pub v_r: f64,
}

impl SeedPoint {
    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.v_r]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self { x: a[0], y: a[1], v_r: a[2] }
    }
}

/// Radial velocity of an object that moved from `prev` to `curr` in `dt`,
/// projected on the radar-to-object line. Positive when approaching.
pub fn radial_velocity(prev: [f64; 2], curr: [f64; 2], dt: f64, radar: [f64; 2]) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    let (lx, ly) = (curr[0] - radar[0], curr[1] - radar[1]);
    let d = lx.hypot(ly);
    if d == 0.0 {
        return Err(Error::Singular("object coincides with the radar".into()));
    }
    let (vx, vy) = ((curr[0] - prev[0]) / dt, (curr[1] - prev[1]) / dt);
    Ok(-(vx * lx + vy * ly) / d)
}

pub(crate) fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}
