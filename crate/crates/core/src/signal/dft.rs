//! Frequency-domain frames and the inverse-DFT chain that turns them into
//! RAD tensors.
//!
//! Normalisation: the forward transform is unnormalised and the inverse is
//! scaled by `1/N` per axis, so for a frame `F` and its tensor `X` over
//! `N = n_chirps * n_samples * n_pairs` cells, `sum |F|^2 = N * sum |X|^2`.

use num_complex::{Complex32, Complex64};
use rustfft::{FftDirection, FftPlanner};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::signal::physics::{phase_shift, ChirpConfig, Reflector};
use crate::types::{AxisSpec, RadTensor};

/// Mixed IF buffer indexed `(chirp index, chirp sample, antenna pair)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyFrame {
    dims: [usize; 3],
    data: Vec<Complex64>,
    /// Axes of the RAD tensor this frame transforms into.
    axes: [AxisSpec; 3],
}

impl FrequencyFrame {
    /// `axes` are the output (range, angle, Doppler) axes; their bin counts
    /// must equal `(dims[0], dims[2], dims[1])`.
    pub fn new(dims: [usize; 3], data: Vec<Complex64>, axes: [AxisSpec; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Shape(format!("frame dims must be positive, got {dims:?}")));
        }
        if data.len() != dims.iter().product::<usize>() {
            return Err(Error::Shape(format!(
                "frame has {} values for dims {dims:?}",
                data.len()
            )));
        }
        if [axes[0].bins, axes[1].bins, axes[2].bins] != [dims[0], dims[2], dims[1]] {
            return Err(Error::Shape(format!(
                "frame dims {dims:?} do not match output axes {:?}",
                axes.map(|a| a.bins)
            )));
        }
        Ok(Self { dims, data, axes })
    }

    pub fn zeros(cfg: &ChirpConfig) -> Result<Self> {
        cfg.validate()?;
        let dims = [cfg.n_chirps, cfg.n_samples, cfg.n_pairs()];
        Self::new(dims, vec![Complex64::new(0.0, 0.0); dims.iter().product()], cfg.rad_axes())
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn axes(&self) -> &[AxisSpec; 3] {
        &self.axes
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn ramp(n: usize, pos: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 * pos / n as f64))
        .collect()
}

/// Builds the IF buffer for a set of point reflectors.
///
/// Each reflector contributes a separable complex exponential: the
/// chirp-index ramp places it at range bin `r / dR`, the chirp-sample ramp at
/// the centred Doppler bin of `v_R`, and the antenna ramp advances by
/// `2 pi f_c (2 h sin alpha) / c` per adjacent pair (plus the centring
/// offset). A global factor `exp(-j phi(r))` carries the round-trip phase.
pub fn synthesize_frame(cfg: &ChirpConfig, reflectors: &[Reflector]) -> Result<FrequencyFrame> {
    let mut frame = FrequencyFrame::zeros(cfg)?;
    let [nc, ns, np] = frame.dims;
    let [range_axis, _, doppler_axis] = frame.axes;
    for refl in reflectors {
        let kr = refl.range / range_axis.step;
        let kd = refl.radial_velocity / doppler_axis.step + (ns / 2) as f64;
        let ka = np as f64 * cfg.spatial_cycles() * refl.azimuth.to_radians().sin() + (np / 2) as f64;
        let gain = Complex64::from_polar(refl.amplitude, -phase_shift(cfg, refl.range)?);
        let (ec, es, ep) = (ramp(nc, kr), ramp(ns, kd), ramp(np, ka));
        for (c, &vc) in ec.iter().enumerate() {
            let gc = gain * vc;
            for (s, &vs) in es.iter().enumerate() {
                let gcs = gc * vs;
                let row = &mut frame.data[(c * ns + s) * np..(c * ns + s + 1) * np];
                for (cell, &vp) in row.iter_mut().zip(&ep) {
                    *cell += gcs * vp;
                }
            }
        }
    }
    Ok(frame)
}

/// In-place FFT along one axis of a row-major 3-D cube.
fn fft_axis(data: &mut [Complex64], dims: [usize; 3], axis: usize, dir: FftDirection) {
    let n = dims[axis];
    let fft = FftPlanner::<f64>::new().plan_fft(n, dir);
    let stride: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut lane = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for o in 0..outer {
        for i in 0..stride {
            let base = o * n * stride + i;
            for (k, v) in lane.iter_mut().enumerate() {
                *v = data[base + k * stride];
            }
            fft.process_with_scratch(&mut lane, &mut scratch);
            for (k, v) in lane.iter().enumerate() {
                data[base + k * stride] = *v;
            }
        }
    }
}

/// Inverse DFT along the chirp-index (range), chirp-sample (Doppler) and
/// antenna-pair (angle) axes, reordered to a `(range, angle, Doppler)` cube.
pub fn rad_from_frame(frame: &FrequencyFrame) -> Result<RadTensor> {
    let dims = frame.dims;
    let mut buf = frame.data.clone();
    for axis in 0..3 {
        fft_axis(&mut buf, dims, axis, FftDirection::Inverse);
    }
    let scale = 1.0 / dims.iter().product::<usize>() as f64;
    let [nc, ns, np] = dims;
    let mut out = vec![Complex32::new(0.0, 0.0); buf.len()];
    for c in 0..nc {
        for s in 0..ns {
            for p in 0..np {
                let v = buf[(c * ns + s) * np + p] * scale;
                out[(c * np + p) * ns + s] = Complex32::new(v.re as f32, v.im as f32);
            }
        }
    }
    RadTensor::new(frame.axes, out)
}

/// Forward DFT taking a RAD tensor back to its frequency-domain frame; the
/// exact inverse of [`rad_from_frame`] up to f32 storage of the tensor.
pub fn frame_from_rad(tensor: &RadTensor) -> Result<FrequencyFrame> {
    let [nr, na, nd] = tensor.dims();
    let dims = [nr, nd, na];
    let mut buf = vec![Complex64::new(0.0, 0.0); tensor.data().len()];
    for r in 0..nr {
        for a in 0..na {
            for d in 0..nd {
                let v = tensor.get(r, a, d);
                buf[(r * nd + d) * na + a] = Complex64::new(v.re as f64, v.im as f64);
            }
        }
    }
    for axis in 0..3 {
        fft_axis(&mut buf, dims, axis, FftDirection::Forward);
    }
    FrequencyFrame::new(dims, buf, *tensor.axes())
}
