//! RadarSim: synthetic Range-Doppler sequences of a single moving object
//! over a noisy background, with ground-truth reflections and masks.

pub mod noise;
pub mod scene;

pub use noise::{multilook_speckle, sample_background, NoiseModel, SpeckleStats};
pub use scene::{
    default_doppler_axis, default_range_axis, simulate_sequence, sinc, FrameTruth, GroundTruth,
    ObjectClass, SceneConfig, SimScene, TruthPoint,
};

use rand::Rng;

use crate::annotate::DoaPoint;
use crate::error::{Error, Result};
use crate::rng::stream;

/// Most frequent label, ties going to the smaller id.
pub fn majority_vote(labels: &[u32], classes: u32) -> Result<u32> {
    if labels.is_empty() {
        return Err(Error::param("labels", "cannot vote on an empty list"));
    }
    let mut counts = vec![0usize; classes as usize];
    for &l in labels {
        if l >= classes {
            return Err(Error::param("labels", format!("label {l} outside [0, {classes})")));
        }
        counts[l as usize] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    Ok(counts.iter().position(|&c| c == best).unwrap_or(0) as u32)
}

/// DoA point clouds for a simulated sequence: the true reflections (with
/// their radial velocity as Doppler) plus `clutter` uniform false points per
/// frame over the simulation space. Frame `t` draws clutter from stream `t`
/// of `seed`.
pub fn to_doa_frames(gt: &GroundTruth, clutter: usize, seed: u64) -> Vec<Vec<DoaPoint>> {
    gt.frames
        .iter()
        .enumerate()
        .map(|(t, f)| {
            let mut rng = stream(seed, t as u64);
            let mut pts: Vec<DoaPoint> =
                f.points.iter().map(|p| DoaPoint { x: p.x, y: p.y, doppler: p.v_r }).collect();
            for _ in 0..clutter {
                pts.push(DoaPoint {
                    x: rng.random_range(-25.0..25.0),
                    y: rng.random_range(1.0..54.0),
                    doppler: rng.random_range(-5.0..5.0),
                });
            }
            pts
        })
        .collect()
}
