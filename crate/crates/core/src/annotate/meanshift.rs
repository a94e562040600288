//! Gaussian-kernel Mean Shift.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dist2, DoaPoint};
use crate::error::{Error, Result};

/// Converged modes closer than `MERGE_RADIUS * sigma` share a cluster.
pub const MERGE_RADIUS: f64 = 0.5;
/// Iteration stops once a step is shorter than `TOL_FACTOR * sigma`.
pub const TOL_FACTOR: f64 = 1e-5;
pub const MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub members: Vec<DoaPoint>,
    /// Positions of the members in the clustered input.
    pub indices: Vec<usize>,
    /// Mean of the members.
    pub centroid: [f64; 3],
    /// Converged mode the members were assigned to.
    pub mode: [f64; 3],
    pub bandwidth: f64,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Mean Shift with the default tolerance and iteration cap.
pub fn mean_shift(points: &[DoaPoint], sigma: f64) -> Result<Vec<Cluster>> {
    mean_shift_with(points, sigma, TOL_FACTOR * sigma, MAX_ITER)
}

/// Every point climbs to its mode independently. Clusters are listed in order
/// of the first point that reached them.
pub fn mean_shift_with(points: &[DoaPoint], sigma: f64, tol: f64, max_iter: usize) -> Result<Vec<Cluster>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
    }
    if points.is_empty() {
        return Err(Error::param("points", "cannot cluster an empty set"));
    }
    let xs: Vec<[f64; 3]> = points.iter().map(DoaPoint::as_array).collect();
    let modes: Vec<[f64; 3]> = xs.par_iter().map(|x0| climb(&xs, *x0, sigma, tol, max_iter)).collect();

    let merge2 = (MERGE_RADIUS * sigma).powi(2);
    let mut centres: Vec<[f64; 3]> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, m) in modes.iter().enumerate() {
        match centres.iter().position(|c| dist2(c, m) <= merge2) {
            Some(k) => groups[k].push(i),
            None => {
                centres.push(*m);
                groups.push(vec![i]);
            }
        }
    }
    Ok(centres
        .into_iter()
        .zip(groups)
        .map(|(mode, indices)| {
            let members: Vec<DoaPoint> = indices.iter().map(|&i| points[i]).collect();
            Cluster { centroid: mean(&members), members, indices, mode, bandwidth: sigma }
        })
        .collect())
}

pub(crate) fn mean(points: &[DoaPoint]) -> [f64; 3] {
    let n = points.len() as f64;
    let mut m = [0.0; 3];
    for p in points {
        m[0] += p.x;
        m[1] += p.y;
        m[2] += p.doppler;
    }
    m.map(|v| v / n)
}

fn climb(xs: &[[f64; 3]], mut x: [f64; 3], sigma: f64, tol: f64, max_iter: usize) -> [f64; 3] {
    let inv = 1.0 / (2.0 * sigma * sigma);
    let tol2 = tol * tol;
    let mut d2 = vec![0.0; xs.len()];
    for _ in 0..max_iter {
        let mut dmin = f64::INFINITY;
        for (d, p) in d2.iter_mut().zip(xs) {
            *d = dist2(&x, p);
            dmin = dmin.min(*d);
        }
        let mut acc = [0.0; 3];
        let mut wsum = 0.0;
        for (d, p) in d2.iter().zip(xs) {
            let w = (-(d - dmin) * inv).exp();
            wsum += w;
            for k in 0..3 {
                acc[k] += w * p[k];
            }
        }
        let next = acc.map(|a| a / wsum);
        let step = dist2(&next, &x);
        x = next;
        if step < tol2 {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand_distr::{Distribution, Normal};

    fn blob(rng: &mut crate::rng::SimRng, c: [f64; 3], s: f64, n: usize) -> Vec<DoaPoint> {
        let g = Normal::new(0.0, s).unwrap();
        (0..n)
            .map(|_| DoaPoint { x: c[0] + g.sample(rng), y: c[1] + g.sample(rng), doppler: c[2] + g.sample(rng) })
            .collect()
    }

    #[test]
    fn single_point() {
        let p = DoaPoint { x: 1.0, y: 2.0, doppler: -0.5 };
        let c = mean_shift(&[p], 1.0).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].centroid, [1.0, 2.0, -0.5]);
    }

    #[test]
    fn two_separated_blobs() {
        let mut rng = seeded(8);
        let s = 0.5;
        let (a, b) = ([0.0, 10.0, 1.0], [5.0, 10.0, 1.0]);
        let mut pts = blob(&mut rng, a, s, 100);
        pts.extend(blob(&mut rng, b, s, 100));
        let c = mean_shift(&pts, s).unwrap();
        assert_eq!(c.len(), 2);
        assert!(dist2(&c[0].centroid, &a).sqrt() < 0.5 * s);
        assert!(dist2(&c[1].centroid, &b).sqrt() < 0.5 * s);
        assert_eq!(c[0].len() + c[1].len(), 200);
    }

    #[test]
    fn huge_bandwidth_gives_global_mean() {
        let mut rng = seeded(9);
        let pts = blob(&mut rng, [1.0, 5.0, 0.0], 2.0, 50);
        let c = mean_shift(&pts, 1e6 * 20.0).unwrap();
        assert_eq!(c.len(), 1);
        let m = mean(&pts);
        for (got, want) in c[0].mode.iter().zip(m) {
            assert!((got - want).abs() < 1e-6);
        }
    }

    #[test]
    fn modes_stay_in_bounding_box() {
        let mut rng = seeded(10);
        let pts = blob(&mut rng, [0.0, 0.0, 0.0], 1.0, 60);
        for c in mean_shift(&pts, 0.7).unwrap() {
            for k in 0..3 {
                let lo = pts.iter().map(|p| p.as_array()[k]).fold(f64::INFINITY, f64::min);
                let hi = pts.iter().map(|p| p.as_array()[k]).fold(f64::NEG_INFINITY, f64::max);
                assert!(c.mode[k] >= lo - 1e-12 && c.mode[k] <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(mean_shift(&[], 1.0).is_err());
        assert!(mean_shift(&[DoaPoint { x: 0.0, y: 0.0, doppler: 0.0 }], 0.0).is_err());
    }
}
