//! Chirp-level FMCW relations: phase shift, Doppler shift, resolutions and
//! the bin geometry of the RAD cube a chirp configuration produces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{AxisKind, AxisSpec};

/// Propagation speed used throughout, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// FMCW waveform and antenna layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChirpConfig {
    /// Carrier (start-of-sweep) frequency, Hz.
    pub fc: f64,
    /// Swept bandwidth, Hz.
    pub bandwidth: f64,
    /// Sweep duration of one chirp, s.
    pub sweep: f64,
    /// Frame duration, s.
    pub frame_time: f64,
    pub n_chirps: usize,
    pub n_samples: usize,
    pub n_tx: usize,
    pub n_rx: usize,
    /// Spacing between adjacent receivers, m.
    pub rx_spacing: f64,
}

impl ChirpConfig {
    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("fc", self.fc),
            ("bandwidth", self.bandwidth),
            ("sweep", self.sweep),
            ("frame_time", self.frame_time),
            ("rx_spacing", self.rx_spacing),
        ];
        for (name, v) in reals {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        let counts = [
            ("n_chirps", self.n_chirps),
            ("n_samples", self.n_samples),
            ("n_tx", self.n_tx),
            ("n_rx", self.n_rx),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::param(name, "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Number of virtual (Tx, Rx) antenna pairs.
    pub fn n_pairs(&self) -> usize {
        self.n_tx * self.n_rx
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.fc
    }

    /// Phase-ramp cycles per antenna pair per unit `sin(alpha)`:
    /// `2 h f_c / c`.
    pub fn spatial_cycles(&self) -> f64 {
        2.0 * self.rx_spacing * self.fc / SPEED_OF_LIGHT
    }

    pub fn range_axis(&self) -> AxisSpec {
        AxisSpec {
            kind: AxisKind::Range,
            bins: self.n_chirps,
            origin: 0.0,
            step: SPEED_OF_LIGHT / (2.0 * self.bandwidth),
        }
    }

    /// Centred Doppler axis: bin `n_samples / 2` is 0 m/s.
    pub fn doppler_axis(&self) -> AxisSpec {
        let step = SPEED_OF_LIGHT / (2.0 * self.fc * self.frame_time);
        AxisSpec {
            kind: AxisKind::Doppler,
            bins: self.n_samples,
            origin: -((self.n_samples / 2) as f64) * step,
            step,
        }
    }

    /// Centred angle axis in degrees, linearised around boresight.
    ///
    /// The angle FFT bins are uniform in `sin(alpha)`; the degree step is the
    /// boresight slope, so off-boresight bins drift from the true angle by
    /// `alpha - sin(alpha)` scaled to bins.
    pub fn angle_axis(&self) -> AxisSpec {
        let np = self.n_pairs();
        let step = (1.0 / (np as f64 * self.spatial_cycles())).to_degrees();
        AxisSpec {
            kind: AxisKind::Angle,
            bins: np,
            origin: -((np / 2) as f64) * step,
            step,
        }
    }

    /// Axes of the RAD tensor produced from this configuration.
    pub fn rad_axes(&self) -> [AxisSpec; 3] {
        [self.range_axis(), self.angle_axis(), self.doppler_axis()]
    }

    /// Largest range whose FFT peak cannot wrap.
    pub fn max_unambiguous_range(&self) -> f64 {
        let a = self.range_axis();
        (a.bins - 1) as f64 * a.step
    }

    /// Largest |v_R| whose FFT peak stays at least one bin from the wrap.
    pub fn max_unambiguous_velocity(&self) -> f64 {
        let a = self.doppler_axis();
        ((a.bins / 2) as f64 - 1.0).max(0.0) * a.step
    }

    /// Largest |alpha| (degrees) whose FFT peak stays at least one bin from
    /// the wrap.
    pub fn max_unambiguous_azimuth(&self) -> f64 {
        let np = self.n_pairs() as f64;
        let s = (((self.n_pairs() / 2) as f64 - 1.0).max(0.0) / (np * self.spatial_cycles())).min(1.0);
        s.asin().to_degrees()
    }
}

/// A point reflector seen by the radar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reflector {
    /// m
    pub range: f64,
    /// m/s, positive when approaching.
    pub radial_velocity: f64,
    /// degrees
    pub azimuth: f64,
    /// linear gain
    pub amplitude: f64,
}

/// Round-trip phase shift `2 pi f_c (2 r / c)` at range `r`.
pub fn phase_shift(cfg: &ChirpConfig, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::param("r", format!("range must be non-negative, got {r}")));
    }
    Ok(2.0 * std::f64::consts::PI * cfg.fc * (2.0 * r / SPEED_OF_LIGHT))
}

/// Doppler shift `f_d = 2 v_R f_c / c` in Hz.
pub fn doppler_frequency(cfg: &ChirpConfig, radial_velocity: f64) -> f64 {
    2.0 * radial_velocity * cfg.fc / SPEED_OF_LIGHT
}

/// Inverse of [`doppler_frequency`]: `v_R = c f_d / (2 f_c)`.
pub fn radial_velocity_of(cfg: &ChirpConfig, doppler_hz: f64) -> f64 {
    SPEED_OF_LIGHT * doppler_hz / (2.0 * cfg.fc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolutions {
    pub range_m: f64,
    pub doppler_mps: f64,
    pub angle_deg: f64,
}

/// Closed-form range, Doppler and angle resolutions at azimuth `alpha_deg`.
pub fn resolutions(cfg: &ChirpConfig, alpha_deg: f64) -> Result<Resolutions> {
    let cos = alpha_deg.to_radians().cos();
    if cos.abs() < 1e-12 {
        return Err(Error::Singular(format!(
            "angle resolution diverges at alpha = {alpha_deg} deg"
        )));
    }
    let c = SPEED_OF_LIGHT;
    Ok(Resolutions {
        range_m: c / (2.0 * cfg.bandwidth),
        doppler_mps: c / (2.0 * cfg.fc * cfg.frame_time),
        angle_deg: (c / (cfg.fc * cfg.n_rx as f64 * cfg.rx_spacing * cos)).to_degrees(),
    })
}
