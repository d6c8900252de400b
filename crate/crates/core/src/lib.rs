//! Simulation of an NV-center molecular structure microscope.
//!
//! A molecule's proton distribution is encoded into gradient-indexed spin-noise
//! spectra seen by a shallow NV sensor, and the 3D proton density is recovered
//! by quadratic-filtered back-projection of the plane-integral projections.
//!
//! Modules follow the data flow:
//! [`phantom`] → [`physics`] → [`encoder`] → [`recon`], with [`cli`] holding
//! configuration, artifact formats, the acquisition-time planner and the
//! end-to-end pipeline.

pub mod error;
pub mod phantom;
pub mod physics;
pub mod encoder;
pub mod recon;
pub mod cli;

pub use error::{Error, Result};

/// 3-vector of f64; positions are in nm unless stated otherwise.
pub type Vec3 = nalgebra::Vector3<f64>;
