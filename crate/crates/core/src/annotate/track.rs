//! Frame-to-frame tracking of one object by its cluster centroid.

use serde::{Deserialize, Serialize};

use super::bandwidth::{log_ratio_bandwidth, select_bandwidth, BandwidthMethod};
use super::meanshift::{mean_shift, Cluster};
use super::{dist2, DoaPoint, SeedPoint};
use crate::error::{Error, Result};

/// A seed further than `MISS_RADIUS * sigma` from every point of a frame
/// produces a miss.
pub const MISS_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrackStep {
    Hit { cluster: Cluster, sigma: f64 },
    /// No match; the carried seed is kept for the next frame.
    Miss { seed: SeedPoint },
}

impl TrackStep {
    pub fn cluster(&self) -> Option<&Cluster> {
        match self {
            TrackStep::Hit { cluster, .. } => Some(cluster),
            TrackStep::Miss { .. } => None,
        }
    }
}

/// Cluster whose centroid is nearest to `seed`; ties go to the first.
fn nearest(clusters: Vec<Cluster>, seed: &[f64; 3]) -> Option<Cluster> {
    let mut best: Option<(f64, Cluster)> = None;
    for c in clusters {
        let d = dist2(&c.centroid, seed);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, c));
        }
    }
    best.map(|(_, c)| c)
}

fn step(frame: &[DoaPoint], seed: &SeedPoint, sigmas: &[f64], method: BandwidthMethod) -> Result<TrackStep> {
    let miss = TrackStep::Miss { seed: *seed };
    if frame.is_empty() {
        return Ok(miss);
    }
    let s = seed.as_array();
    let (sigma, cluster) = match method {
        BandwidthMethod::LogRatio { d_max } => {
            let d_prev = seed.x.hypot(seed.y).min(d_max);
            let sigma = log_ratio_bandwidth(d_max, d_prev)?;
            (sigma, nearest(mean_shift(frame, sigma)?, &s))
        }
        _ => {
            let sweep = sigmas
                .iter()
                .map(|&sg| Ok(nearest(mean_shift(frame, sg)?, &s)))
                .collect::<Result<Vec<_>>>()?;
            let b = select_bandwidth(&sweep, method)?;
            (sigmas[b], sweep.into_iter().nth(b).flatten())
        }
    };
    let reach2 = (MISS_RADIUS * sigma).powi(2);
    if !frame.iter().any(|p| dist2(&p.as_array(), &s) <= reach2) {
        return Ok(miss);
    }
    Ok(match cluster {
        Some(cluster) => TrackStep::Hit { cluster, sigma },
        None => miss,
    })
}

/// Tracks the object identified by `seed` in `frames[seed_frame]` through the
/// whole sequence. Each hit's centroid seeds the neighbouring frame, forward
/// and backward from the seed frame; misses leave the carried seed as is.
pub fn track_sequence(
    frames: &[Vec<DoaPoint>],
    seed: SeedPoint,
    seed_frame: usize,
    sigmas: &[f64],
    method: BandwidthMethod,
) -> Result<Vec<TrackStep>> {
    if seed_frame >= frames.len() {
        return Err(Error::Index { axis: "frame", bin: seed_frame, bins: frames.len() });
    }
    if !matches!(method, BandwidthMethod::LogRatio { .. }) && sigmas.len() < 3 {
        return Err(Error::param("sigmas", "stability criteria need at least 3 bandwidths"));
    }
    if sigmas.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::param("sigmas", "bandwidths must be positive"));
    }
    let mut out: Vec<Option<TrackStep>> = vec![None; frames.len()];
    let first = step(&frames[seed_frame], &seed, sigmas, method)?;
    let origin = carried(&first, &seed);
    out[seed_frame] = Some(first);

    let mut s = origin;
    for t in seed_frame + 1..frames.len() {
        let st = step(&frames[t], &s, sigmas, method)?;
        s = carried(&st, &s);
        out[t] = Some(st);
    }
    let mut s = origin;
    for t in (0..seed_frame).rev() {
        let st = step(&frames[t], &s, sigmas, method)?;
        s = carried(&st, &s);
        out[t] = Some(st);
    }
    Ok(out.into_iter().map(|s| s.expect("every frame visited")).collect())
}

fn carried(step: &TrackStep, prev: &SeedPoint) -> SeedPoint {
    match step {
        TrackStep::Hit { cluster, .. } => SeedPoint::from_array(cluster.centroid),
        TrackStep::Miss { .. } => *prev,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn object(rng: &mut crate::rng::SimRng, c: [f64; 3], n: usize) -> Vec<DoaPoint> {
        (0..n)
            .map(|_| DoaPoint {
                x: c[0] + rng.random_range(-0.3..0.3),
                y: c[1] + rng.random_range(-0.3..0.3),
                doppler: c[2] + rng.random_range(-0.05..0.05),
            })
            .collect()
    }

    #[test]
    fn static_object_is_tracked_without_drift() {
        let mut rng = seeded(13);
        let c = [2.0, 15.0, 0.0];
        let frames: Vec<Vec<DoaPoint>> = (0..20)
            .map(|_| {
                let mut f = object(&mut rng, c, 8);
                f.extend(object(&mut rng, [-10.0, 30.0, 2.0], 6));
                f
            })
            .collect();
        let sigmas = [0.5, 1.0, 1.5, 2.0, 2.5];
        let seed = SeedPoint { x: 2.1, y: 15.1, v_r: 0.0 };
        let track = track_sequence(&frames, seed, 7, &sigmas, BandwidthMethod::JensenShannon).unwrap();
        for st in &track {
            let cl = st.cluster().expect("hit");
            assert!(dist2(&cl.centroid, &c).sqrt() < 0.5);
        }
    }

    #[test]
    fn empty_frames_carry_the_seed() {
        let mut rng = seeded(14);
        let c = [0.0, 10.0, 1.0];
        let mut frames: Vec<Vec<DoaPoint>> = (0..5).map(|_| object(&mut rng, c, 6)).collect();
        frames[2].clear();
        let seed = SeedPoint { x: 0.0, y: 10.0, v_r: 1.0 };
        let track = track_sequence(&frames, seed, 0, &[0.5, 1.0, 2.0], BandwidthMethod::PointCount).unwrap();
        assert!(matches!(track[2], TrackStep::Miss { .. }));
        assert!(track[3].cluster().is_some() && track[4].cluster().is_some());
    }

    #[test]
    fn far_seed_is_a_miss() {
        let mut rng = seeded(15);
        let frames = vec![object(&mut rng, [0.0, 10.0, 0.0], 6)];
        let seed = SeedPoint { x: 20.0, y: 40.0, v_r: 0.0 };
        let track = track_sequence(&frames, seed, 0, &[0.5, 1.0, 2.0], BandwidthMethod::Determinant).unwrap();
        assert_eq!(track[0], TrackStep::Miss { seed });
    }

    #[test]
    fn equidistant_seed_picks_first_cluster() {
        let a = [DoaPoint { x: -5.0, y: 10.0, doppler: 0.0 }];
        let b = [DoaPoint { x: 5.0, y: 10.0, doppler: 0.0 }];
        let frame: Vec<DoaPoint> = a.iter().chain(&b).copied().collect();
        let got = nearest(mean_shift(&frame, 1.0).unwrap(), &[0.0, 10.0, 0.0]).unwrap();
        assert_eq!(got.centroid, [-5.0, 10.0, 0.0]);
    }

    #[test]
    fn log_ratio_tracking_runs() {
        let mut rng = seeded(16);
        let frames: Vec<Vec<DoaPoint>> = (0..4).map(|_| object(&mut rng, [1.0, 20.0, -1.0], 6)).collect();
        let seed = SeedPoint { x: 1.0, y: 20.0, v_r: -1.0 };
        let track = track_sequence(&frames, seed, 3, &[], BandwidthMethod::LogRatio { d_max: 50.0 }).unwrap();
        assert!(track.iter().all(|s| s.cluster().is_some()));
        assert!(track_sequence(&frames, seed, 4, &[], BandwidthMethod::LogRatio { d_max: 50.0 }).is_err());
    }
}
