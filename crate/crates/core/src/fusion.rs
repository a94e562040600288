//! Radar-to-lidar information propagation under per-mode sensor
//! uncertainty.
//!
//! Each in-scope radar detection claims the lidar points inside its polar
//! uncertainty ellipse. Claimed points inherit the detection's Doppler vector
//! and RCS, and the detection takes the mean intensity of what it claimed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{FusedPoint, LidarPoint, Provenance, RadarPoint, SensorMode, SensorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    /// Azimuth from the +y axis, degrees, positive towards +x.
    pub alpha: f64,
    pub r: f64,
}

/// `alpha = atan2(x - ox, y - oy)` in degrees and `r` the distance to the
/// origin.
pub fn to_polar(x: f64, y: f64, origin: [f64; 2]) -> Result<PolarPoint> {
    let (dx, dy) = (x - origin[0], y - origin[1]);
    let r = dx.hypot(dy);
    if r == 0.0 {
        return Err(Error::Singular(format!("point ({x}, {y}) coincides with the sensor origin")));
    }
    Ok(PolarPoint { alpha: dx.atan2(dy).to_degrees(), r })
}

pub fn to_cartesian(p: PolarPoint, origin: [f64; 2]) -> [f64; 2] {
    let (s, c) = p.alpha.to_radians().sin_cos();
    [origin[0] + p.r * s, origin[1] + p.r * c]
}

/// How the ellipse half-extents are built from a mode's figures:
/// `scale * (resolution + accuracy_factor * accuracy)` on each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyPolicy {
    pub accuracy_factor: f64,
    pub scale: f64,
}

impl Default for UncertaintyPolicy {
    fn default() -> Self {
        Self { accuracy_factor: 2.0, scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyEllipse {
    pub center: PolarPoint,
    /// degrees
    pub d_alpha: f64,
    /// m
    pub d_r: f64,
}

/// The most precise covering mode: smallest azimuth accuracy, first wins.
pub fn select_mode(spec: &SensorSpec, alpha: f64, r: f64) -> Option<&SensorMode> {
    spec.modes
        .iter()
        .filter(|m| m.covers(alpha, r))
        .fold(None, |best: Option<&SensorMode>, m| match best {
            Some(b) if b.azimuth_acc_deg <= m.azimuth_acc_deg => Some(b),
            _ => Some(m),
        })
}

pub fn uncertainty_of(
    spec: &SensorSpec,
    alpha: f64,
    r: f64,
    policy: &UncertaintyPolicy,
) -> Result<UncertaintyEllipse> {
    let mode = select_mode(spec, alpha, r).ok_or(Error::OutOfScope { alpha_deg: alpha, range_m: r })?;
    let t = (r - mode.range_min_m) / (mode.range_max_m - mode.range_min_m);
    let res_r = mode.range_res_m.0 + t * (mode.range_res_m.1 - mode.range_res_m.0);
    Ok(UncertaintyEllipse {
        center: PolarPoint { alpha, r },
        d_alpha: policy.scale * (mode.azimuth_res_deg + policy.accuracy_factor * mode.azimuth_acc_deg),
        d_r: policy.scale * (res_r + policy.accuracy_factor * mode.range_acc_m),
    })
}

/// `(da)^2 / d_alpha + (dr)^2 / d_r <= 1`; the extents divide unsquared.
pub fn ellipse_contains(e: &UncertaintyEllipse, p: PolarPoint) -> bool {
    let da = p.alpha - e.center.alpha;
    let dr = p.r - e.center.r;
    da * da / e.d_alpha + dr * dr / e.d_r <= 1.0
}

/// Constants standing in for fields a sensor does not measure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Placeholders {
    pub intensity: f64,
    pub vx: f64,
    pub vy: f64,
    pub rcs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionResult {
    /// In-scope radar rows, then enriched lidar rows in claim order, then
    /// the remaining lidar rows in input order.
    pub points: Vec<FusedPoint>,
    /// `(lidar index, radar index)` per enriched lidar point, in claim order.
    pub enriched: Vec<(usize, usize)>,
    pub out_of_scope: Vec<usize>,
}

/// Pools larger than this are filtered in parallel.
const PAR_POOL: usize = 8192;

/// Radar points are processed in input order; each removes its claims from
/// the pool, so overlapping ellipses resolve in favour of the earlier
/// detection. Output rows keep the original Cartesian coordinates.
pub fn propagate_fuse(
    radar: &[RadarPoint],
    lidar: &[LidarPoint],
    spec: &SensorSpec,
    policy: &UncertaintyPolicy,
    placeholders: &Placeholders,
    origin: [f64; 2],
) -> Result<FusionResult> {
    spec.validate()?;
    let lidar_polar = lidar
        .iter()
        .map(|p| to_polar(p.x, p.y, origin))
        .collect::<Result<Vec<_>>>()?;
    let mut pool: Vec<usize> = (0..lidar.len()).collect();
    let mut radar_rows = Vec::with_capacity(radar.len());
    let mut enriched_rows = Vec::new();
    let mut enriched = Vec::new();
    let mut out_of_scope = Vec::new();

    for (i, q) in radar.iter().enumerate() {
        let pr = to_polar(q.x, q.y, origin)?;
        let ellipse = match uncertainty_of(spec, pr.alpha, pr.r, policy) {
            Ok(e) => e,
            Err(Error::OutOfScope { .. }) => {
                out_of_scope.push(i);
                continue;
            }
            Err(e) => return Err(e),
        };
        let inside = |j: &usize| ellipse_contains(&ellipse, lidar_polar[*j]);
        let claimed: Vec<usize> = if pool.len() > PAR_POOL {
            pool.par_iter().copied().filter(inside).collect()
        } else {
            pool.iter().copied().filter(inside).collect()
        };
        let intensity = if claimed.is_empty() {
            placeholders.intensity
        } else {
            claimed.iter().map(|&j| lidar[j].intensity).sum::<f64>() / claimed.len() as f64
        };
        radar_rows.push(FusedPoint {
            x: q.x,
            y: q.y,
            intensity,
            vx: q.vx,
            vy: q.vy,
            rcs: q.rcs,
            provenance: Provenance::Radar,
        });
        if !claimed.is_empty() {
            let mut k = 0;
            pool.retain(|j| {
                let hit = k < claimed.len() && claimed[k] == *j;
                k += hit as usize;
                !hit
            });
        }
        for j in claimed {
            let l = lidar[j];
            enriched_rows.push(FusedPoint {
                x: l.x,
                y: l.y,
                intensity: l.intensity,
                vx: q.vx,
                vy: q.vy,
                rcs: q.rcs,
                provenance: Provenance::LidarEnriched,
            });
            enriched.push((j, i));
        }
    }
    let plain = pool.iter().map(|&j| {
        let l = lidar[j];
        FusedPoint {
            x: l.x,
            y: l.y,
            intensity: l.intensity,
            vx: placeholders.vx,
            vy: placeholders.vy,
            rcs: placeholders.rcs,
            provenance: Provenance::LidarPlain,
        }
    });
    let mut points = radar_rows;
    points.extend(enriched_rows);
    points.extend(plain);
    Ok(FusionResult { points, enriched, out_of_scope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const O: [f64; 2] = [0.0, 0.0];

    #[test]
    fn polar_examples() {
        let p = to_polar(0.0, 10.0, O).unwrap();
        assert_eq!((p.alpha, p.r), (0.0, 10.0));
        let p = to_polar(10.0, 0.0, O).unwrap();
        assert_eq!((p.alpha, p.r), (90.0, 10.0));
        let p = to_polar(3.0, 4.0, O).unwrap();
        assert!((p.alpha - 36.8699).abs() < 1e-4 && (p.r - 5.0).abs() < 1e-12);
        assert!(to_polar(1.0, 2.0, [1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn polar_round_trip(x in -100.0f64..100.0, y in -100.0f64..100.0, ox in -5.0f64..5.0, oy in -5.0f64..5.0) {
            prop_assume!((x - ox).hypot(y - oy) > 1e-6);
            let back = to_cartesian(to_polar(x, y, [ox, oy]).unwrap(), [ox, oy]);
            prop_assert!((back[0] - x).abs() < 1e-9 && (back[1] - y).abs() < 1e-9);
        }
    }

    #[test]
    fn mode_selection() {
        let spec = SensorSpec::nuscenes();
        let pol = UncertaintyPolicy::default();
        assert_eq!(select_mode(&spec, 5.0, 150.0).unwrap().name, "far_range");
        assert_eq!(select_mode(&spec, 50.0, 15.0).unwrap().name, "near_range_60");
        assert_eq!(select_mode(&spec, 0.0, 10.0).unwrap().name, "far_range");
        assert!(matches!(uncertainty_of(&spec, 0.0, 300.0, &pol), Err(Error::OutOfScope { .. })));
        let e = uncertainty_of(&spec, 50.0, 15.0, &pol).unwrap();
        assert!((e.d_alpha - (12.3 + 10.0)).abs() < 1e-12);
        let lerp = 0.39 * (15.0 - 0.2) / (20.0 - 0.2);
        assert!((e.d_r - (lerp + 0.2)).abs() < 1e-12);
    }

    #[test]
    fn ellipse_examples() {
        let e = UncertaintyEllipse { center: PolarPoint { alpha: 0.0, r: 10.0 }, d_alpha: 1.0, d_r: 0.4 };
        assert!(ellipse_contains(&e, e.center));
        assert!(ellipse_contains(&e, PolarPoint { alpha: 0.0, r: 10.1 }));
        assert!(!ellipse_contains(&e, PolarPoint { alpha: 0.0, r: 10.7 }));
    }

    #[test]
    fn no_lidar_keeps_radar_with_placeholder() {
        let radar = [
            RadarPoint { x: 0.0, y: 10.0, vx: 1.0, vy: -1.0, rcs: 5.0 },
            RadarPoint { x: 0.0, y: 400.0, vx: 0.0, vy: 0.0, rcs: 1.0 },
        ];
        let ph = Placeholders { intensity: -1.0, ..Default::default() };
        let out = propagate_fuse(&radar, &[], &SensorSpec::nuscenes(), &Default::default(), &ph, O).unwrap();
        assert_eq!(out.points.len(), 1);
        assert_eq!(out.points[0].intensity, -1.0);
        assert_eq!(out.out_of_scope, vec![1]);
    }

    #[test]
    fn single_claim_trace() {
        let radar = [RadarPoint { x: 0.0, y: 10.0, vx: 0.5, vy: -2.0, rcs: 7.5 }];
        let lidar = [LidarPoint { x: 0.0, y: 10.05, intensity: 0.3 }];
        let out = propagate_fuse(&radar, &lidar, &SensorSpec::nuscenes(), &Default::default(), &Default::default(), O)
            .unwrap();
        assert_eq!(out.points.len(), 2);
        assert_eq!(out.points[0].intensity, 0.3);
        let l = out.points[1];
        assert_eq!((l.vx, l.vy, l.rcs, l.provenance), (0.5, -2.0, 7.5, Provenance::LidarEnriched));
        assert_eq!(out.enriched, vec![(0, 0)]);
    }

    #[test]
    fn earlier_radar_point_wins_overlaps() {
        let radar = [
            RadarPoint { x: 0.0, y: 10.0, vx: 1.0, vy: 0.0, rcs: 1.0 },
            RadarPoint { x: 0.0, y: 10.1, vx: 2.0, vy: 0.0, rcs: 2.0 },
        ];
        let lidar = [LidarPoint { x: 0.0, y: 10.05, intensity: 0.3 }];
        let out = propagate_fuse(&radar, &lidar, &SensorSpec::nuscenes(), &Default::default(), &Default::default(), O)
            .unwrap();
        assert_eq!(out.enriched, vec![(0, 0)]);
        assert_eq!(out.points.len(), 3);
        assert_eq!(out.points[1].intensity, 0.0);
    }

    #[test]
    fn empty_spec_errors() {
        let spec = SensorSpec { modes: vec![] };
        assert!(propagate_fuse(&[], &[], &spec, &Default::default(), &Default::default(), O).is_err());
    }
}
