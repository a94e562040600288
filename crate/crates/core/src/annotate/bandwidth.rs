//! Gaussian fits of clusters, Jensen-Shannon distances and the four
//! bandwidth selection criteria.

use serde::{Deserialize, Serialize};

use super::meanshift::Cluster;
use super::DoaPoint;
use crate::error::{Error, Result};

/// Sample mean and unbiased covariance of a 3-D point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: [f64; 3],
    pub cov: [[f64; 3]; 3],
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl Gaussian {
    pub fn det(&self) -> f64 {
        det3(&self.cov)
    }

    /// Log-density; a small ridge keeps degenerate (flat) clusters usable.
    pub fn log_pdf(&self, x: [f64; 3]) -> f64 {
        let trace = self.cov[0][0] + self.cov[1][1] + self.cov[2][2];
        let ridge = 1e-9 * (trace / 3.0).max(1.0);
        let mut m = self.cov;
        for (k, row) in m.iter_mut().enumerate() {
            row[k] += ridge;
        }
        let det = det3(&m);
        let inv = [
            [
                m[1][1] * m[2][2] - m[1][2] * m[2][1],
                m[0][2] * m[2][1] - m[0][1] * m[2][2],
                m[0][1] * m[1][2] - m[0][2] * m[1][1],
            ],
            [
                m[1][2] * m[2][0] - m[1][0] * m[2][2],
                m[0][0] * m[2][2] - m[0][2] * m[2][0],
                m[0][2] * m[1][0] - m[0][0] * m[1][2],
            ],
            [
                m[1][0] * m[2][1] - m[1][1] * m[2][0],
                m[0][1] * m[2][0] - m[0][0] * m[2][1],
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ],
        ];
        let d = [x[0] - self.mean[0], x[1] - self.mean[1], x[2] - self.mean[2]];
        let mut q = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                q += d[i] * inv[i][j] * d[j];
            }
        }
        q /= det;
        -0.5 * (q + det.ln() + 3.0 * (2.0 * std::f64::consts::PI).ln())
    }
}

pub fn fit_gaussian(points: &[DoaPoint]) -> Result<Gaussian> {
    if points.len() < 2 {
        return Err(Error::param("cluster", format!("need at least 2 points, got {}", points.len())));
    }
    let mean = super::meanshift::mean(points);
    let mut cov = [[0.0; 3]; 3];
    for p in points {
        let d = [p.x - mean[0], p.y - mean[1], p.doppler - mean[2]];
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    let n1 = (points.len() - 1) as f64;
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v /= n1;
        }
    }
    Ok(Gaussian { mean, cov })
}

const MASS_TOL: f64 = 1e-9;

fn check_distribution(name: &'static str, p: &[f64]) -> Result<()> {
    if p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::param(name, "masses must be finite and non-negative"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > MASS_TOL {
        return Err(Error::param(name, format!("masses sum to {s}, expected 1")));
    }
    Ok(())
}

fn kl_to_mix(p: &[f64], m: &[f64]) -> f64 {
    p.iter()
        .zip(m)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &mi)| pi * (pi / mi).ln())
        .sum()
}

/// Jensen-Shannon distance: the square root of the mean KL divergence of
/// `p` and `q` to their mixture, in nats.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::Shape(format!("supports of size {} and {}", p.len(), q.len())));
    }
    check_distribution("p", p)?;
    check_distribution("q", q)?;
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let js2 = 0.5 * (kl_to_mix(p, &m) + kl_to_mix(q, &m));
    Ok(js2.max(0.0).sqrt())
}

/// Normalises log-weights into a discrete distribution.
fn softmax(logs: &[f64]) -> Vec<f64> {
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - hi).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// JS distance between the Gaussian fits of two clusters, discretised on
/// the union of their member points.
pub fn cluster_js(a: &Cluster, b: &Cluster) -> Result<f64> {
    let (ga, gb) = (fit_gaussian(&a.members)?, fit_gaussian(&b.members)?);
    let mut support: Vec<[f64; 3]> = Vec::with_capacity(a.len() + b.len());
    let mut seen = std::collections::HashSet::new();
    for p in a.members.iter().chain(&b.members) {
        let arr = p.as_array();
        if seen.insert(arr.map(f64::to_bits)) {
            support.push(arr);
        }
    }
    let pa = softmax(&support.iter().map(|x| ga.log_pdf(*x)).collect::<Vec<_>>());
    let pb = softmax(&support.iter().map(|x| gb.log_pdf(*x)).collect::<Vec<_>>());
    let renorm = |p: Vec<f64>| {
        let s: f64 = p.iter().sum();
        p.into_iter().map(|v| v / s).collect::<Vec<_>>()
    };
    js_divergence(&renorm(pa), &renorm(pb))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BandwidthMethod {
    /// Stability of the covariance determinant.
    Determinant,
    /// Stability of the number of members.
    PointCount,
    /// Stability of the fitted distribution under JS distance.
    JensenShannon,
    /// Range-dependent closed form; `d_max` is the farthest expected range.
    LogRatio { d_max: f64 },
}

impl BandwidthMethod {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "det" | "determinant" => Some(Self::Determinant),
            "count" | "pointcount" => Some(Self::PointCount),
            "js" | "jensenshannon" => Some(Self::JensenShannon),
            "logratio" => Some(Self::LogRatio { d_max: 50.0 }),
            _ => None,
        }
    }
}

/// `(1 + ln(1 + d_max)) / (1 + ln(1 + d_prev))`, unclipped.
pub fn log_ratio_bandwidth(d_max: f64, d_prev: f64) -> Result<f64> {
    if !(d_max >= 0.0) || !(d_prev >= 0.0) {
        return Err(Error::param("distance", "distances must be non-negative"));
    }
    Ok((1.0 + d_max.ln_1p()) / (1.0 + d_prev.ln_1p()))
}

/// Clusters with fewer members than this are skipped by the stability
/// criteria.
pub const MIN_STABLE_POINTS: usize = 4;

/// Index into the bandwidth sweep minimising the chosen stability score
/// over the interior indices `1..B-1`. Entry `b` is the cluster the seed
/// falls into at bandwidth `b`, if any.
///
/// Determinant and point-count scores sum the absolute changes to both
/// neighbours; the JS score sums the distances to both neighbours. An index
/// whose triple contains a missing or degenerate cluster is skipped; if every
/// index is skipped the point-count score decides with missing clusters
/// counted as empty. Ties go to the smaller index.
pub fn select_bandwidth(clusters: &[Option<Cluster>], method: BandwidthMethod) -> Result<usize> {
    if clusters.len() < 3 {
        return Err(Error::param("sigmas", "stability criteria need at least 3 bandwidths"));
    }
    let ok = |c: &Option<Cluster>| c.as_ref().is_some_and(|c| c.len() >= MIN_STABLE_POINTS);
    let score = |b: usize| -> Result<Option<f64>> {
        if !(ok(&clusters[b - 1]) && ok(&clusters[b]) && ok(&clusters[b + 1])) {
            return Ok(None);
        }
        let [p, c, n] = [&clusters[b - 1], &clusters[b], &clusters[b + 1]].map(|c| c.as_ref().unwrap());
        Ok(Some(match method {
            BandwidthMethod::Determinant => {
                let [dp, dc, dn] = [p, c, n].map(|k| fit_gaussian(&k.members).map(|g| g.det()));
                let (dp, dc, dn) = (dp?, dc?, dn?);
                (dc - dp).abs() + (dn - dc).abs()
            }
            BandwidthMethod::PointCount => {
                (c.len() as f64 - p.len() as f64).abs() + (n.len() as f64 - c.len() as f64).abs()
            }
            BandwidthMethod::JensenShannon => cluster_js(c, p)? + cluster_js(c, n)?,
            BandwidthMethod::LogRatio { .. } => {
                return Err(Error::param("method", "log-ratio does not select from a sweep"))
            }
        }))
    };
    let mut best: Option<(usize, f64)> = None;
    for b in 1..clusters.len() - 1 {
        if let Some(s) = score(b)? {
            if best.is_none_or(|(_, v)| s < v) {
                best = Some((b, s));
            }
        }
    }
    if let Some((b, _)) = best {
        return Ok(b);
    }
    let count = |c: &Option<Cluster>| c.as_ref().map_or(0.0, |c| c.len() as f64);
    let mut fallback = (1, f64::INFINITY);
    for b in 1..clusters.len() - 1 {
        let s = (count(&clusters[b]) - count(&clusters[b - 1])).abs()
            + (count(&clusters[b + 1]) - count(&clusters[b])).abs();
        if s < fallback.1 {
            fallback = (b, s);
        }
    }
    Ok(fallback.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::mean_shift;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;

    fn pts(v: &[[f64; 3]]) -> Vec<DoaPoint> {
        v.iter().map(|a| DoaPoint { x: a[0], y: a[1], doppler: a[2] }).collect()
    }

    fn cluster(members: Vec<DoaPoint>, sigma: f64) -> Cluster {
        let centroid = super::super::meanshift::mean(&members);
        Cluster { indices: (0..members.len()).collect(), members, centroid, mode: centroid, bandwidth: sigma }
    }

    #[test]
    fn gaussian_examples() {
        let g = fit_gaussian(&pts(&[[1.0, 1.0, 1.0]; 3])).unwrap();
        assert_eq!(g.cov, [[0.0; 3]; 3]);
        let g = fit_gaussian(&pts(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]])).unwrap();
        assert_eq!(g.mean, [1.0, 0.0, 0.0]);
        assert_eq!(g.cov[0][0], 2.0);
        assert!(fit_gaussian(&pts(&[[0.0; 3]])).is_err());
    }

    #[test]
    fn determinant_scales_by_c_to_the_sixth() {
        let mut rng = seeded(4);
        let raw: Vec<[f64; 3]> = (0..50).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        let c = 1.7;
        let scaled: Vec<[f64; 3]> = raw.iter().map(|a| a.map(|v| v * c)).collect();
        let d0 = fit_gaussian(&pts(&raw)).unwrap().det();
        let d1 = fit_gaussian(&pts(&scaled)).unwrap().det();
        assert!((d1 / d0 - c.powi(6)).abs() < 1e-9 * c.powi(6));
    }

    #[test]
    fn log_pdf_of_isotropic_gaussian() {
        let g = Gaussian { mean: [0.0; 3], cov: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] };
        let expect = -1.5 * (2.0 * std::f64::consts::PI).ln() - 0.5;
        assert!((g.log_pdf([1.0, 0.0, 0.0]) - expect).abs() < 1e-8);
    }

    #[test]
    fn js_examples() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(js_divergence(&p, &p).unwrap(), 0.0);
        let d = js_divergence(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((d - 2f64.ln().sqrt()).abs() < 1e-12);
        assert!(js_divergence(&[1.5, -0.5], &[0.5, 0.5]).is_err());
        assert!(js_divergence(&[0.5, 0.4], &[0.5, 0.5]).is_err());
        assert!(js_divergence(&[1.0], &[0.5, 0.5]).is_err());
    }

    fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, n).prop_filter_map("zero mass", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-6).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn js_is_a_metric(p in simplex(6), q in simplex(6), r in simplex(6)) {
            let pq = js_divergence(&p, &q).unwrap();
            prop_assert!((pq - js_divergence(&q, &p).unwrap()).abs() < 1e-12);
            let pr = js_divergence(&p, &r).unwrap();
            let rq = js_divergence(&r, &q).unwrap();
            prop_assert!(pq <= pr + rq + 1e-9);
            prop_assert!(pq <= 2f64.ln().sqrt() + 1e-12);
        }
    }

    #[test]
    fn log_ratio_cases() {
        assert_eq!(log_ratio_bandwidth(50.0, 50.0).unwrap(), 1.0);
        assert!((log_ratio_bandwidth(50.0, 0.0).unwrap() - (1.0 + 51f64.ln())).abs() < 1e-12);
        assert!(log_ratio_bandwidth(50.0, 80.0).unwrap() < 1.0);
    }

    #[test]
    fn js_plateau_is_selected() {
        let mut rng = seeded(12);
        let base: Vec<DoaPoint> = (0..30)
            .map(|_| DoaPoint { x: rng.random(), y: rng.random::<f64>() + 5.0, doppler: rng.random() })
            .collect();
        let sizes = [8, 14, 30, 30, 30, 22];
        let sweep: Vec<Option<Cluster>> =
            sizes.iter().enumerate().map(|(b, &n)| Some(cluster(base[..n].to_vec(), b as f64))).collect();
        let b = select_bandwidth(&sweep, BandwidthMethod::JensenShannon).unwrap();
        assert!(b == 2 || b == 3, "b* = {b}");
        let b = select_bandwidth(&sweep, BandwidthMethod::PointCount).unwrap();
        assert_eq!(b, 3);
    }

    #[test]
    fn degenerate_sweep_falls_back_to_counts() {
        let one = |n: usize| Some(cluster(pts(&vec![[0.0, 1.0, 0.0]; n]), 1.0));
        let sweep = vec![one(1), one(2), one(2), one(3)];
        assert_eq!(select_bandwidth(&sweep, BandwidthMethod::Determinant).unwrap(), 1);
        assert!(select_bandwidth(&sweep[..2], BandwidthMethod::JensenShannon).is_err());
    }

    #[test]
    fn identical_clusters_have_zero_js() {
        let mut rng = seeded(5);
        let p: Vec<DoaPoint> =
            (0..20).map(|_| DoaPoint { x: rng.random(), y: rng.random(), doppler: rng.random() }).collect();
        let c = &mean_shift(&p, 100.0).unwrap()[0];
        assert_eq!(cluster_js(c, c).unwrap(), 0.0);
    }
}
