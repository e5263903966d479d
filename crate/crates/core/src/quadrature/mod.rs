//! Quadrature-domain analysis: wavefunctions, variance criteria and
//! homodyne moment reconstruction.

pub mod duan;
pub mod gauss_hermite;
pub mod homodyne;
pub mod wavefunction;

pub use duan::{
    electronic_noise_efficiency, gaussian_state_duan, lossy_duan, lossy_variance, number_state_duan,
    numeric_moments, numeric_moments_from_position, signal_to_noise, DuanReport, QuadratureMoments,
};
pub use homodyne::{
    homodyne_sample, richter_constant, richter_estimate, FockSuperposition, HomodyneSample,
    HomodyneSampler, PhaseMode, RichterEstimate,
};
pub use wavefunction::{ConditionedState, QuadratureWavefunction, Representation};
