//! Radar scene toolkit.
//!
//! * [`signal`]: FMCW chirp relations, RAD tensor generation by inverse DFT,
//!   view aggregation, MIMO de-interleaving, CFAR and DoA points.
//! * [`radarsim`]: synthetic Range-Doppler sequences with speckle-like noise.
//! * [`annotate`]: Mean-Shift based semi-automatic labelling of radar views.
//! * [`fusion`]: propagation of radar Doppler and RCS onto lidar points.
//! * [`metrics`]: segmentation metrics and losses with analytic gradients.
//! * [`io`] and [`manifest`]: RTF tensors, point-cloud CSV and run manifests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annotate;
pub mod error;
pub mod fusion;
pub mod io;
pub mod manifest;
pub mod metrics;
pub mod radarsim;
pub mod rng;
pub mod signal;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    AxisKind, AxisSpec, ClassStack, FusedPoint, LidarPoint, Provenance, RadTensor, RadarPoint,
    RadarView, SegMask, SensorMode, SensorSpec, SoftMask, ViewKind,
};
