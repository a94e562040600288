//! The RAD signal chain: chirp physics, frequency-domain synthesis, the
//! inverse-DFT transform, view aggregation, MIMO de-interleaving, CFAR and
//! DoA point extraction.

pub mod aggregate;
pub mod cfar;
pub mod dft;
pub mod doa;
pub mod mimo;
pub mod physics;

pub use aggregate::{aggregate, aggregate_with_floor, Aggregation, DB_FLOOR};
pub use cfar::{cfar_detect, CfarParams};
pub use dft::{frame_from_rad, rad_from_frame, synthesize_frame, FrequencyFrame};
pub use doa::doa_points;
pub use mimo::{mimo_deinterleave, RdCube};
pub use physics::{
    doppler_frequency, phase_shift, radial_velocity_of, resolutions, ChirpConfig, Reflector,
    Resolutions, SPEED_OF_LIGHT,
};
