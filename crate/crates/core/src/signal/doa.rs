//! Conversion of Range-Angle detections into a Cartesian radar point cloud.

use crate::error::{Error, Result};
use crate::types::{AxisKind, AxisSpec, RadarPoint, RadarView, ViewKind};

/// Builds one [`RadarPoint`] per `(range_bin, angle_bin)` detection.
///
/// Position is `(r sin alpha, r cos alpha)` with alpha measured from
/// boresight (+y). The Doppler comes from the strongest Doppler bin of the
/// same range row in `rd_view`, whose dB power is reported as the RCS. The
/// Doppler vector points along the line of sight, with positive radial
/// velocity meaning the target approaches.
pub fn doa_points(
    ra_detections: &[(usize, usize)],
    ra_axes: &[AxisSpec; 2],
    rd_view: &RadarView,
) -> Result<Vec<RadarPoint>> {
    if ra_axes[0].kind != AxisKind::Range || ra_axes[1].kind != AxisKind::Angle {
        return Err(Error::Shape("detections must be indexed (range, angle)".into()));
    }
    if rd_view.kind() != ViewKind::RD {
        return Err(Error::Shape(format!("expected an RD view, got {:?}", rd_view.kind())));
    }
    if rd_view.rows() != ra_axes[0].bins {
        return Err(Error::Shape(format!(
            "RD view has {} range bins, detections use {}",
            rd_view.rows(),
            ra_axes[0].bins
        )));
    }
    let doppler_axis = rd_view.axes()[1];
    ra_detections
        .iter()
        .map(|&(rb, ab)| {
            let r = ra_axes[0].value(rb)?;
            let alpha = ra_axes[1].value(ab)?.to_radians();
            let (best, power) = (0..rd_view.cols())
                .map(|d| (d, rd_view.get(rb, d)))
                .fold((0, f32::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            let v_r = doppler_axis.value(best)?;
            let (s, c) = alpha.sin_cos();
            Ok(RadarPoint {
                x: r * s,
                y: r * c,
                vx: -v_r * s,
                vy: -v_r * c,
                rcs: power as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> ([AxisSpec; 2], RadarView) {
        let ra = [
            AxisSpec::new(AxisKind::Range, 41, 0.0, 0.25).unwrap(),
            AxisSpec::new(AxisKind::Angle, 181, -90.0, 1.0).unwrap(),
        ];
        let doppler = AxisSpec::new(AxisKind::Doppler, 5, -2.0, 1.0).unwrap();
        let mut data = vec![0.0f32; 41 * 5];
        data[40 * 5 + 4] = 9.0;
        data[20 * 5 + 1] = 3.0;
        let rd = RadarView::new(ViewKind::RD, [ra[0], doppler], data).unwrap();
        (ra, rd)
    }

    #[test]
    fn boresight_and_side_points() {
        let (ra, rd) = setup();
        let pts = doa_points(&[(40, 90), (40, 180), (20, 120)], &ra, &rd).unwrap();
        assert!(pts[0].x.abs() < 1e-12 && (pts[0].y - 10.0).abs() < 1e-12);
        assert!((pts[1].x - 10.0).abs() < 1e-9 && pts[1].y.abs() < 1e-9);
        assert!((pts[2].x - 2.5).abs() < 1e-9 && (pts[2].y - 4.3301).abs() < 1e-4);
    }

    #[test]
    fn doppler_and_rcs_come_from_strongest_bin() {
        let (ra, rd) = setup();
        let p = doa_points(&[(40, 90)], &ra, &rd).unwrap()[0];
        assert_eq!(p.rcs, 9.0);
        assert!((p.radial_velocity() - 2.0).abs() < 1e-12);
        let q = doa_points(&[(20, 90)], &ra, &rd).unwrap()[0];
        assert!((q.radial_velocity() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_bounds_detection_errors() {
        let (ra, rd) = setup();
        assert!(doa_points(&[(41, 0)], &ra, &rd).is_err());
    }
}
