//! Secure hybrid analog/digital beamforming for mmWave MIMO wiretap channels.
//!
//! The crate covers the full simulation chain:
//!
//! * [`channel`] draws scatterer-sharing limited-scattering channels for the
//!   Alice→Bob and Alice→Eve links.
//! * [`beamforming`] holds steering codebooks, hybrid precoder/combiner
//!   containers and the rate/secrecy metrics.
//! * [`secure_design`] is the joint codebook design for a known eavesdropper
//!   channel: Eve null-space projection, successive beam-pair selection with
//!   Gram–Schmidt deflation and an SVD baseband stage.
//! * [`an_design`] is the artificial-noise design for an unknown eavesdropper
//!   channel under a QoS target at Bob.
//! * [`benchmarks`] provides full-digital reference designs.
//! * [`harness`] runs seeded Monte-Carlo sweeps and writes CSV/JSON tables.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod an_design;
pub mod beamforming;
pub mod benchmarks;
pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod secure_design;

pub use error::{Error, LinkSide, Result};

pub use nalgebra::Complex;

/// Complex double used throughout.
pub type C64 = Complex<f64>;
/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dynamically sized complex column vector.
pub type CVector = nalgebra::DVector<C64>;
