//! Number-conditioned entanglement of two atomic ensembles.
//!
//! Two cells each produce a two-mode squeezed Stokes/atom state; the Stokes
//! fields meet on a 50:50 beam splitter and are counted. This crate builds the
//! resulting conditioned anti-Stokes state, evaluates partial-transpose moment
//! matrices on it (ideal, noisy Stokes detection, lossy readout), scans for the
//! largest detectable photon number, and covers the quadrature-variance side:
//! Duan sums, loss/electronic-noise equivalence, and a phase-randomized
//! homodyne sampler with the Hermite-polynomial moment estimator.
//!
//! Modules, bottom-up:
//! - [`exact`]: exact combinatorics, surds, Hermite functions
//! - [`fock`]: squeezed amplitudes, beam-splitter coefficients, conditioned state
//! - [`noise`]: Stokes-detector posteriors and the anti-Stokes loss model
//! - [`correlations`]: conditional photon-number correlation
//! - [`pt`]: moment matrices, the Fock-basis oracle and verdicts
//! - [`scan`]: MaxN search, region maps, sweeps
//! - [`quadrature`]: wavefunctions, Duan criterion, homodyne sampling

pub mod correlations;
pub mod error;
pub mod exact;
pub mod fock;
pub mod noise;
pub mod pt;
pub mod quadrature;
pub mod scan;

pub use error::{Error, Result};
pub use fock::{DetectionRecord, JointFockState, SqueezingParams};
pub use noise::NoiseModel;
pub use pt::{MomentMatrix, PTVerdict, TensorFunctionSpec};
