//! Sum-of-variances entanglement test for the conditioned anti-Stokes
//! states, with optical loss and electronic detector noise.

use serde::Serialize;

use super::gauss_hermite::integrate_2d_many;
use super::wavefunction::{ConditionedState, QuadratureWavefunction, Representation};
use crate::error::{invalid, Result};
use crate::fock::{DetectionRecord, SqueezingParams};

/// Separable states satisfy `Var(q_A + q_B) + Var(p_B − p_A) ≥ 2`.
pub const SEPARABLE_BOUND: f64 = 2.0;

pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-10;

const FD_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DuanReport {
    pub var_q_sum: f64,
    pub var_p_diff: f64,
    pub total: f64,
    pub entangled_detected: bool,
}

impl DuanReport {
    pub fn new(var_q_sum: f64, var_p_diff: f64) -> Self {
        let total = var_q_sum + var_p_diff;
        DuanReport {
            var_q_sum,
            var_p_diff,
            total,
            entangled_detected: total < SEPARABLE_BOUND,
        }
    }
}

pub fn number_state_duan(rec: DetectionRecord) -> DuanReport {
    DuanReport::new((2 * rec.n + 1) as f64, (2 * rec.m + 1) as f64)
}

/// Both variances equal `1/s`; the measured `P`, `Q` only move the means.
pub fn gaussian_state_duan(alpha: f64, p: f64, q: f64) -> Result<DuanReport> {
    ConditionedState::gaussian(alpha, p, q)?;
    let s = SqueezingParams::symmetric(alpha)?.s();
    Ok(DuanReport::new(1.0 / s, 1.0 / s))
}

/// A variance after loss `η`, measured in vacuum units.
pub fn lossy_variance(var_ideal: f64, eta: f64) -> Result<f64> {
    if !(var_ideal >= 0.0 && var_ideal.is_finite()) {
        return Err(invalid("var_ideal", format!("must be nonnegative, got {var_ideal}")));
    }
    check_eta(eta)?;
    Ok(eta * var_ideal + (1.0 - eta))
}

/// Applies [`lossy_variance`] to both variances; the report's variances are
/// in units where the vacuum gives 1 per mode pair term.
pub fn lossy_duan(report: &DuanReport, eta: f64) -> Result<DuanReport> {
    Ok(DuanReport::new(
        lossy_variance(report.var_q_sum, eta)?,
        lossy_variance(report.var_p_diff, eta)?,
    ))
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", format!("must lie in [0, 1], got {eta}")));
    }
    Ok(())
}

fn check_electronic(signal_coeff: f64, sigma_e: f64) -> Result<()> {
    if !(signal_coeff > 0.0 && signal_coeff.is_finite()) {
        return Err(invalid("signal_coeff", format!("must be positive, got {signal_coeff}")));
    }
    if !(sigma_e >= 0.0 && sigma_e.is_finite()) {
        return Err(invalid("sigma_e", format!("must be nonnegative, got {sigma_e}")));
    }
    Ok(())
}

/// Loss efficiency equivalent to Gaussian electronic noise of width `σ_e`
/// added to a signal scaled by `signal_coeff`.
pub fn electronic_noise_efficiency(signal_coeff: f64, sigma_e: f64) -> Result<f64> {
    check_electronic(signal_coeff, sigma_e)?;
    let a2 = signal_coeff * signal_coeff;
    Ok(a2 / (a2 + sigma_e * sigma_e))
}

/// `S = (α² + σ²)/σ²`, infinite without electronic noise.
pub fn signal_to_noise(signal_coeff: f64, sigma_e: f64) -> Result<f64> {
    check_electronic(signal_coeff, sigma_e)?;
    if sigma_e == 0.0 {
        return Ok(f64::INFINITY);
    }
    let s2 = sigma_e * sigma_e;
    Ok((signal_coeff * signal_coeff + s2) / s2)
}

/// Means and variances of `q_A + q_B` and `p_B − p_A` by direct integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureMoments {
    pub norm: f64,
    pub mean_q_sum: f64,
    pub var_q_sum: f64,
    pub mean_p_diff: f64,
    pub var_p_diff: f64,
}

impl QuadratureMoments {
    pub fn report(&self) -> DuanReport {
        DuanReport::new(self.var_q_sum, self.var_p_diff)
    }
}

/// First two moments of `f(x_A, x_B)` under `|ψ|²`, normalized.
fn density_moments(
    wf: &QuadratureWavefunction,
    f: impl Fn(f64, f64) -> f64 + Sync,
    tol: f64,
) -> Result<(f64, f64, f64)> {
    let v = integrate_2d_many(
        |a, b, out| {
            let d = wf.density(a, b);
            let x = f(a, b);
            out[0] = d;
            out[1] = d * x;
            out[2] = d * x * x;
        },
        3,
        &wf.density_frame(),
        tol,
    )?;
    let mean = v[1] / v[0];
    Ok((v[0], mean, v[2] / v[0] - mean * mean))
}

/// `p_B − p_A` statistics from the position wavefunction, with
/// `(p_B − p_A)ψ = −i(∂_B − ∂_A)ψ` by a five-point difference.
fn p_diff_from_derivative(wf: &QuadratureWavefunction, tol: f64) -> Result<(f64, f64)> {
    let h = FD_STEP;
    let v = integrate_2d_many(
        |a, b, out| {
            let at = |t: f64| wf.eval(a - t, b + t);
            let d = (at(-2.0 * h) - at(2.0 * h) + (at(h) - at(-h)) * 8.0) / (12.0 * h);
            let psi = wf.eval(a, b);
            // ψ̄ (−i D)
            let m1 = psi.conj() * d * num_complex::Complex64::new(0.0, -1.0);
            out[0] = psi.norm_sqr();
            out[1] = m1.re;
            out[2] = d.norm_sqr();
        },
        3,
        &wf.density_frame(),
        tol,
    )?;
    let mean = v[1] / v[0];
    Ok((mean, v[2] / v[0] - mean * mean))
}

/// Moments from the position and momentum wavefunctions of `state`.
pub fn numeric_moments(state: ConditionedState, tol: f64) -> Result<QuadratureMoments> {
    let q = QuadratureWavefunction::new(state, Representation::Q);
    let p = QuadratureWavefunction::new(state, Representation::P);
    let (norm, mean_q, var_q) = density_moments(&q, |a, b| a + b, tol)?;
    let (_, mean_p, var_p) = density_moments(&p, |a, b| b - a, tol)?;
    Ok(QuadratureMoments {
        norm,
        mean_q_sum: mean_q,
        var_q_sum: var_q,
        mean_p_diff: mean_p,
        var_p_diff: var_p,
    })
}

/// Like [`numeric_moments`] but the momentum side is obtained by
/// differentiating the position wavefunction.
pub fn numeric_moments_from_position(state: ConditionedState, tol: f64) -> Result<QuadratureMoments> {
    let q = QuadratureWavefunction::new(state, Representation::Q);
    let (norm, mean_q, var_q) = density_moments(&q, |a, b| a + b, tol)?;
    let (mean_p, var_p) = p_diff_from_derivative(&q, tol)?;
    Ok(QuadratureMoments {
        norm,
        mean_q_sum: mean_q,
        var_q_sum: var_q,
        mean_p_diff: mean_p,
        var_p_diff: var_p,
    })
}
