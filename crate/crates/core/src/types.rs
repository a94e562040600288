//! Shared domain types: axis geometry, tensors, views, point clouds, sensor
//! descriptions and segmentation masks.
//!
//! Everything here is an immutable value after construction. Constructors
//! validate invariants so downstream code can rely on them.

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack applied to axis extents so that values computed with
/// floating-point arithmetic right on a boundary are not rejected.
const AXIS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisKind {
    Range,
    Angle,
    Doppler,
}

impl AxisKind {
    pub fn name(self) -> &'static str {
        match self {
            AxisKind::Range => "range",
            AxisKind::Angle => "angle",
            AxisKind::Doppler => "doppler",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "range" => Some(AxisKind::Range),
            "angle" => Some(AxisKind::Angle),
            "doppler" => Some(AxisKind::Doppler),
            _ => None,
        }
    }
}

/// A uniformly discretised physical axis: bin `k` sits at `origin + k * step`.
///
/// Units are meters for range, m/s for Doppler and degrees for angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub kind: AxisKind,
    pub bins: usize,
    pub origin: f64,
    pub step: f64,
}

impl AxisSpec {
    pub fn new(kind: AxisKind, bins: usize, origin: f64, step: f64) -> Result<Self> {
        if bins == 0 {
            return Err(Error::param("bins", "axis needs at least one bin"));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::param("step", format!("must be positive, got {step}")));
        }
        if !origin.is_finite() {
            return Err(Error::param("origin", "must be finite"));
        }
        Ok(Self {
            kind,
            bins,
            origin,
            step,
        })
    }

    /// Physical value of `bin`.
    pub fn value(&self, bin: usize) -> Result<f64> {
        if bin >= self.bins {
            return Err(Error::Index {
                axis: self.kind.name(),
                bin,
                bins: self.bins,
            });
        }
        Ok(self.origin + bin as f64 * self.step)
    }

    /// Nearest bin of a physical value, clamped to the axis.
    ///
    /// Accepted values span half a step below bin 0 up to one full step past
    /// the last bin, so an axis described as `[0, 55]` m with 0.25 m bins
    /// accepts 55 m and maps it to the last bin.
    pub fn bin_of(&self, value: f64) -> Result<usize> {
        let (lo, hi) = self.padded_extent();
        let slack = AXIS_EPS * self.step.max(1.0);
        if !value.is_finite() || value < lo - slack || value > hi + slack {
            return Err(Error::Range {
                axis: self.kind.name(),
                value,
                lo,
                hi,
            });
        }
        let k = ((value - self.origin) / self.step).round();
        Ok((k.max(0.0) as usize).min(self.bins - 1))
    }

    /// The interval of values `bin_of` accepts.
    pub fn padded_extent(&self) -> (f64, f64) {
        (
            self.origin - 0.5 * self.step,
            self.origin + self.bins as f64 * self.step,
        )
    }

    /// Physical value of the last bin.
    pub fn last_value(&self) -> f64 {
        self.origin + (self.bins - 1) as f64 * self.step
    }
}

/// Complex Range-Angle-Doppler cube, row-major in (range, angle, Doppler).
#[derive(Debug, Clone, PartialEq)]
pub struct RadTensor {
    axes: [AxisSpec; 3],
    data: Vec<Complex32>,
}

impl RadTensor {
    pub fn new(axes: [AxisSpec; 3], data: Vec<Complex32>) -> Result<Self> {
        let expected_kinds = [AxisKind::Range, AxisKind::Angle, AxisKind::Doppler];
        for (axis, kind) in axes.iter().zip(expected_kinds) {
            if axis.kind != kind {
                return Err(Error::Shape(format!(
                    "RAD axes must be ordered range, angle, doppler; found {:?}",
                    axes.map(|a| a.kind)
                )));
            }
        }
        let n: usize = axes.iter().map(|a| a.bins).product();
        if data.len() != n {
            return Err(Error::Shape(format!(
                "RAD data has {} values, axes require {n}",
                data.len()
            )));
        }
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::param("data", "RAD tensor values must be finite"));
        }
        Ok(Self { axes, data })
    }

    pub fn zeros(axes: [AxisSpec; 3]) -> Result<Self> {
        let n = axes.iter().map(|a| a.bins).product();
        Self::new(axes, vec![Complex32::new(0.0, 0.0); n])
    }

    pub fn axes(&self) -> &[AxisSpec; 3] {
        &self.axes
    }

    pub fn dims(&self) -> [usize; 3] {
        self.axes.map(|a| a.bins)
    }

    pub fn data(&self) -> &[Complex32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex32> {
        self.data
    }

    #[inline]
    pub fn index(&self, r: usize, a: usize, d: usize) -> usize {
        let [_, na, nd] = self.dims();
        (r * na + a) * nd + d
    }

    #[inline]
    pub fn get(&self, r: usize, a: usize, d: usize) -> Complex32 {
        self.data[self.index(r, a, d)]
    }
}

/// Which pair of axes a 2-D view keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ViewKind {
    RD,
    RA,
    AD,
}

impl ViewKind {
    pub fn axis_kinds(self) -> [AxisKind; 2] {
        match self {
            ViewKind::RD => [AxisKind::Range, AxisKind::Doppler],
            ViewKind::RA => [AxisKind::Range, AxisKind::Angle],
            ViewKind::AD => [AxisKind::Angle, AxisKind::Doppler],
        }
    }

    pub fn from_axes(rows: AxisKind, cols: AxisKind) -> Option<Self> {
        [ViewKind::RD, ViewKind::RA, ViewKind::AD]
            .into_iter()
            .find(|k| k.axis_kinds() == [rows, cols])
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rd" => Some(ViewKind::RD),
            "ra" => Some(ViewKind::RA),
            "ad" => Some(ViewKind::AD),
            _ => None,
        }
    }
}

/// Real 2-D log-intensity map (dB), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarView {
    kind: ViewKind,
    axes: [AxisSpec; 2],
    data: Vec<f32>,
}

impl RadarView {
    pub fn new(kind: ViewKind, axes: [AxisSpec; 2], data: Vec<f32>) -> Result<Self> {
        if [axes[0].kind, axes[1].kind] != kind.axis_kinds() {
            return Err(Error::Shape(format!(
                "{kind:?} view expects axes {:?}, got {:?}",
                kind.axis_kinds(),
                [axes[0].kind, axes[1].kind]
            )));
        }
        let n = axes[0].bins * axes[1].bins;
        if data.len() != n {
            return Err(Error::Shape(format!(
                "view data has {} values, axes require {n}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("data", "view values must be finite"));
        }
        Ok(Self { kind, axes, data })
    }

    pub fn kind(&self) -> ViewKind {
        self.kind
    }

    pub fn axes(&self) -> &[AxisSpec; 2] {
        &self.axes
    }

    pub fn rows(&self) -> usize {
        self.axes[0].bins
    }

    pub fn cols(&self) -> usize {
        self.axes[1].bins
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.data[r * self.cols() + c]
    }

    /// Same view with every cell shifted by `db`.
    pub fn offset(&self, db: f32) -> Result<Self> {
        Self::new(
            self.kind,
            self.axes,
            self.data.iter().map(|v| v + db).collect(),
        )
    }
}

/// Radar detection in Cartesian sensor coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarPoint {
    pub x: f64,
    pub y: f64,
    /// Ego-compensated Doppler vector, m/s.
    pub vx: f64,
    pub vy: f64,
    /// Radar cross-section, dBsm.
    pub rcs: f64,
}

impl RadarPoint {
    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.vx, self.vy, self.rcs]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Signed radial velocity, positive when approaching the origin.
    pub fn radial_velocity(&self) -> f64 {
        let r = self.x.hypot(self.y);
        if r == 0.0 {
            return 0.0;
        }
        -(self.vx * self.x + self.vy * self.y) / r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarPoint {
    pub x: f64,
    pub y: f64,
    /// Reflectance, unitless and non-negative.
    pub intensity: f64,
}

impl LidarPoint {
    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.intensity.is_finite() && self.intensity >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Radar,
    LidarEnriched,
    LidarPlain,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Radar => "radar",
            Provenance::LidarEnriched => "lidar_enriched",
            Provenance::LidarPlain => "lidar_plain",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "radar" => Some(Provenance::Radar),
            "lidar_enriched" => Some(Provenance::LidarEnriched),
            "lidar_plain" => Some(Provenance::LidarPlain),
            _ => None,
        }
    }
}

/// One row of a fused radar/lidar point cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusedPoint {
    pub x: f64,
    pub y: f64,
    pub intensity: f64,
    pub vx: f64,
    pub vy: f64,
    pub rcs: f64,
    pub provenance: Provenance,
}

/// One transmission mode of a radar sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorMode {
    pub name: String,
    /// Half field of view: the mode covers `|alpha| <= azimuth_fov_deg`.
    pub azimuth_fov_deg: f64,
    pub azimuth_res_deg: f64,
    pub azimuth_acc_deg: f64,
    pub range_min_m: f64,
    pub range_max_m: f64,
    /// Range resolution at `range_min_m` and at `range_max_m`; linear in between.
    pub range_res_m: (f64, f64),
    pub range_acc_m: f64,
}

impl SensorMode {
    pub fn covers(&self, alpha_deg: f64, range_m: f64) -> bool {
        alpha_deg.abs() <= self.azimuth_fov_deg
            && range_m >= self.range_min_m
            && range_m <= self.range_max_m
    }

    fn validate(&self) -> Result<()> {
        if !(self.range_min_m < self.range_max_m) {
            return Err(Error::param(
                "range_min_m",
                format!("mode `{}`: range_min_m must be below range_max_m", self.name),
            ));
        }
        let positive = [
            self.azimuth_fov_deg,
            self.azimuth_res_deg,
            self.azimuth_acc_deg,
            self.range_res_m.1,
            self.range_acc_m,
        ];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || self.range_res_m.0 < 0.0 {
            return Err(Error::param(
                "modes",
                format!("mode `{}`: resolutions and accuracies must be positive", self.name),
            ));
        }
        Ok(())
    }
}

/// Per-mode resolution/accuracy description of a radar sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub modes: Vec<SensorMode>,
}

impl SensorSpec {
    pub fn new(modes: Vec<SensorMode>) -> Result<Self> {
        let spec = Self { modes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::param("modes", "sensor spec has no modes"));
        }
        self.modes.iter().try_for_each(SensorMode::validate)
    }

    /// The three-mode long-range automotive radar used by nuScenes
    /// (Continental ARS 408-21).
    pub fn nuscenes() -> Self {
        let mode = |name: &str, fov, res, acc, rmax, rres, racc| SensorMode {
            name: name.to_string(),
            azimuth_fov_deg: fov,
            azimuth_res_deg: res,
            azimuth_acc_deg: acc,
            range_min_m: 0.2,
            range_max_m: rmax,
            range_res_m: (0.0, rres),
            range_acc_m: racc,
        };
        Self {
            modes: vec![
                mode("far_range", 9.0, 1.6, 0.1, 250.0, 1.79, 0.40),
                mode("near_range_45", 45.0, 4.5, 1.0, 100.0, 0.39, 0.10),
                mode("near_range_60", 60.0, 12.3, 5.0, 20.0, 0.39, 0.10),
            ],
        }
    }
}

/// Integer class-label mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegMask {
    rows: usize,
    cols: usize,
    classes: usize,
    labels: Vec<u32>,
}

impl SegMask {
    pub fn new(rows: usize, cols: usize, classes: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != rows * cols {
            return Err(Error::Shape(format!(
                "mask has {} labels for a {rows}x{cols} grid",
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= classes) {
            return Err(Error::param(
                "labels",
                format!("label {bad} not in [0, {classes})"),
            ));
        }
        Ok(Self {
            rows,
            cols,
            classes,
            labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.labels[r * self.cols + c]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// One-hot encoding as a class stack.
    pub fn one_hot(&self) -> ClassStack {
        let mut data = vec![0.0; self.rows * self.cols * self.classes];
        for (i, &l) in self.labels.iter().enumerate() {
            data[i * self.classes + l as usize] = 1.0;
        }
        ClassStack {
            rows: self.rows,
            cols: self.cols,
            classes: self.classes,
            data,
        }
    }
}

/// Dense `rows x cols x classes` real array laid out as `[m][n][k]`.
///
/// Used for one-hot targets, soft predictions and loss gradients. It does not
/// enforce the probability simplex; see [`SoftMask`] for that.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStack {
    pub rows: usize,
    pub cols: usize,
    pub classes: usize,
    pub data: Vec<f64>,
}

impl ClassStack {
    pub fn new(rows: usize, cols: usize, classes: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols * classes {
            return Err(Error::Shape(format!(
                "class stack has {} values for {rows}x{cols}x{classes}",
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            classes,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize, classes: usize) -> Self {
        Self {
            rows,
            cols,
            classes,
            data: vec![0.0; rows * cols * classes],
        }
    }

    #[inline]
    pub fn index(&self, m: usize, n: usize, k: usize) -> usize {
        (m * self.cols + n) * self.classes + k
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize, k: usize) -> f64 {
        self.data[self.index(m, n, k)]
    }

    pub fn same_shape(&self, other: &ClassStack) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.classes == other.classes
    }
}

/// Per-class probability stack summing to one across classes at every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask(ClassStack);

impl SoftMask {
    pub const SUM_TOLERANCE: f64 = 1e-6;

    pub fn new(stack: ClassStack) -> Result<Self> {
        for (cell, probs) in stack.data.chunks(stack.classes.max(1)).enumerate() {
            if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::param(
                    "probabilities",
                    format!("cell {cell} has a value outside [0, 1]"),
                ));
            }
            let s: f64 = probs.iter().sum();
            if (s - 1.0).abs() > Self::SUM_TOLERANCE {
                return Err(Error::param(
                    "probabilities",
                    format!("cell {cell} sums to {s}"),
                ));
            }
        }
        Ok(Self(stack))
    }

    pub fn as_stack(&self) -> &ClassStack {
        &self.0
    }

    pub fn into_stack(self) -> ClassStack {
        self.0
    }
}

impl std::ops::Deref for SoftMask {
    type Target = ClassStack;
    fn deref(&self) -> &ClassStack {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn range_axis() -> AxisSpec {
        AxisSpec::new(AxisKind::Range, 220, 0.0, 0.25).unwrap()
    }

    fn doppler_axis() -> AxisSpec {
        AxisSpec::new(AxisKind::Doppler, 100, -5.0, 0.1).unwrap()
    }

    #[test]
    fn axis_value_examples() {
        let a = range_axis();
        assert_eq!(a.value(0).unwrap(), 0.0);
        assert_eq!(a.value(40).unwrap(), 10.0);
        let d = AxisSpec::new(AxisKind::Doppler, 100, -5.0, 0.1).unwrap();
        assert!((d.value(50).unwrap()).abs() < 1e-12);
        assert!(matches!(a.value(220), Err(Error::Index { .. })));
    }

    #[test]
    fn bin_of_examples() {
        assert_eq!(range_axis().bin_of(10.0).unwrap(), 40);
        assert_eq!(doppler_axis().bin_of(-5.0).unwrap(), 0);
        assert_eq!(doppler_axis().bin_of(4.96).unwrap(), 99);
        assert_eq!(range_axis().bin_of(55.0).unwrap(), 219);
        assert!(matches!(doppler_axis().bin_of(5.2), Err(Error::Range { .. })));
        assert!(matches!(doppler_axis().bin_of(-5.2), Err(Error::Range { .. })));
    }

    #[test]
    fn axis_rejects_bad_geometry() {
        assert!(AxisSpec::new(AxisKind::Range, 0, 0.0, 1.0).is_err());
        assert!(AxisSpec::new(AxisKind::Range, 4, 0.0, 0.0).is_err());
        assert!(AxisSpec::new(AxisKind::Range, 4, 0.0, -1.0).is_err());
    }

    #[test]
    fn rad_tensor_checks_length_and_order() {
        let r = AxisSpec::new(AxisKind::Range, 2, 0.0, 1.0).unwrap();
        let a = AxisSpec::new(AxisKind::Angle, 3, 0.0, 1.0).unwrap();
        let d = AxisSpec::new(AxisKind::Doppler, 4, 0.0, 1.0).unwrap();
        assert!(RadTensor::zeros([r, a, d]).is_ok());
        assert!(RadTensor::new([r, a, d], vec![Complex32::new(0.0, 0.0); 23]).is_err());
        assert!(RadTensor::zeros([a, r, d]).is_err());
        let mut data = vec![Complex32::new(0.0, 0.0); 24];
        data[3].re = f32::NAN;
        assert!(RadTensor::new([r, a, d], data).is_err());
    }

    #[test]
    fn soft_mask_requires_simplex() {
        let ok = ClassStack::new(1, 2, 2, vec![0.3, 0.7, 1.0, 0.0]).unwrap();
        assert!(SoftMask::new(ok).is_ok());
        let bad = ClassStack::new(1, 1, 2, vec![0.3, 0.6]).unwrap();
        assert!(SoftMask::new(bad).is_err());
    }

    #[test]
    fn nuscenes_spec_is_valid() {
        let spec = SensorSpec::nuscenes();
        spec.validate().unwrap();
        assert_eq!(spec.modes.len(), 3);
        assert!(SensorSpec::new(vec![]).is_err());
    }

    proptest! {
        #[test]
        fn bin_round_trip(bins in 1usize..500, origin in -100.0f64..100.0, step in 1e-3f64..10.0, frac in 0.0f64..1.0) {
            let axis = AxisSpec::new(AxisKind::Range, bins, origin, step).unwrap();
            let k = ((bins as f64 - 1.0) * frac).round() as usize;
            prop_assert_eq!(axis.bin_of(axis.value(k).unwrap()).unwrap(), k);
        }
    }
}
