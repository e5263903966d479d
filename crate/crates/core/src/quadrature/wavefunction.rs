//! Two-mode quadrature wavefunctions of the conditioned anti-Stokes states,
//! in the convention where the vacuum quadrature variance is 1/2.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use super::gauss_hermite::{integrate_2d_many, Frame};
use crate::error::{invalid, Result};
use crate::exact::hermite_gaussian;
use crate::fock::{bs_coefficient, DetectionRecord, SqueezingParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Representation {
    Q,
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ConditionedState {
    /// Stokes photon numbers `(n, m)` were counted.
    Number(DetectionRecord),
    /// Stokes quadratures were measured with outcomes `p`, `q`.
    Gaussian { alpha: f64, p: f64, q: f64 },
}

impl ConditionedState {
    pub fn gaussian(alpha: f64, p: f64, q: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("must be positive, got {alpha}")));
        }
        if !(p.is_finite() && q.is_finite()) {
            return Err(invalid("outcome", "P and Q must be finite"));
        }
        Ok(ConditionedState::Gaussian { alpha, p, q })
    }
}

/// `φ_0(x), …, φ_nmax(x)` by the normalized recurrence; intended for
/// moderate `|x|` where `e^{−x²/2}` stays representable.
pub fn hermite_functions(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if nmax >= 1 {
        out.push(2f64.sqrt() * x * out[0]);
    }
    for j in 1..nmax {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * out[j] - (jf / (jf + 1.0)).sqrt() * out[j - 1];
        out.push(next);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureWavefunction {
    pub state: ConditionedState,
    pub representation: Representation,
}

impl QuadratureWavefunction {
    pub fn new(state: ConditionedState, representation: Representation) -> Self {
        QuadratureWavefunction {
            state,
            representation,
        }
    }

    /// `ψ(x_A, x_B)`. Number states use the product form in both
    /// representations; the momentum form drops the global phase `(−i)^{n+m}`.
    pub fn eval(&self, xa: f64, xb: f64) -> Complex64 {
        match self.state {
            ConditionedState::Number(rec) => {
                let u = (xb + xa) * FRAC_1_SQRT_2;
                let v = (xb - xa) * FRAC_1_SQRT_2;
                Complex64::new(
                    hermite_gaussian(rec.n as usize, u) * hermite_gaussian(rec.m as usize, v),
                    0.0,
                )
            }
            ConditionedState::Gaussian { alpha, p, q } => {
                let g = GaussianShape::new(alpha, p, q);
                match self.representation {
                    Representation::Q => g.q_amplitude(xa, xb),
                    Representation::P => g.p_amplitude(xa, xb),
                }
            }
        }
    }

    pub fn density(&self, xa: f64, xb: f64) -> f64 {
        self.eval(xa, xb).norm_sqr()
    }

    /// Frame in which `|ψ|²` is a polynomial times `e^{−|x|²}`.
    pub fn density_frame(&self) -> Frame {
        match self.state {
            ConditionedState::Number(_) => Frame::identity(),
            ConditionedState::Gaussian { alpha, p, q } => {
                GaussianShape::new(alpha, p, q).frame(self.representation, 1.0)
            }
        }
    }

    /// Frame in which `ψ` itself is a polynomial times `e^{−|x|²}`.
    pub fn amplitude_frame(&self) -> Frame {
        match self.state {
            ConditionedState::Number(_) => Frame::scaled(2f64.sqrt()),
            ConditionedState::Gaussian { alpha, p, q } => {
                GaussianShape::new(alpha, p, q).frame(self.representation, 2f64.sqrt())
            }
        }
    }
}

/// Constants of the Gaussian conditioned state: `s = cosh 2α` and the
/// phase gradients set by the measured Stokes quadratures.
#[derive(Clone, Copy, Debug)]
struct GaussianShape {
    s: f64,
    /// Phase gradient along `q_A + q_B`.
    k_w: f64,
    /// Phase gradient along `q_A − q_B`.
    k_z: f64,
}

impl GaussianShape {
    fn new(alpha: f64, p: f64, q: f64) -> Self {
        let params = SqueezingParams::symmetric(alpha).expect("validated alpha");
        let (mu, nu, s) = (params.mu(), params.nu(), params.s());
        GaussianShape {
            s,
            k_w: 2.0 * mu * nu * 2f64.sqrt() * q,
            k_z: 2.0 * 2f64.sqrt() * mu * nu * p / s,
        }
    }

    fn q_amplitude(&self, xa: f64, xb: f64) -> Complex64 {
        let (w, z) = (xa + xb, xa - xb);
        let re = -self.s * w * w / 4.0 - z * z / (4.0 * self.s);
        let im = self.k_z * z + self.k_w * w;
        Complex64::new(re, im).exp() / PI.sqrt()
    }

    /// Fourier transform of [`Self::q_amplitude`]; the offsets are
    /// `c₁ = 2k_w` and `c₂ = −2k_z`.
    fn p_amplitude(&self, pa: f64, pb: f64) -> Complex64 {
        let (c1, c2) = (2.0 * self.k_w, -2.0 * self.k_z);
        let (w, z) = (pa + pb - c1, pa - pb + c2);
        Complex64::new(-w * w / (4.0 * self.s) - self.s * z * z / 4.0, 0.0).exp() / PI.sqrt()
    }

    /// Maps `x` to the principal axes, scaled by `t` (1 for `|ψ|²`, √2 for `ψ`).
    fn frame(&self, rep: Representation, t: f64) -> Frame {
        // widths along w = x_A + x_B and z = x_A − x_B
        let (sw, sz, cw, cz) = match rep {
            Representation::Q => ((2.0 / self.s).sqrt(), (2.0 * self.s).sqrt(), 0.0, 0.0),
            Representation::P => (
                (2.0 * self.s).sqrt(),
                (2.0 / self.s).sqrt(),
                2.0 * self.k_w,
                2.0 * self.k_z,
            ),
        };
        let (sw, sz) = (t * sw, t * sz);
        let center = match rep {
            Representation::Q => [0.0, 0.0],
            Representation::P => [(cw + cz) / 2.0, (cw - cz) / 2.0],
        };
        Frame {
            center,
            m: [[sw / 2.0, sz / 2.0], [sw / 2.0, -sz / 2.0]],
        }
    }
}

/// `Σ_i B_i^{n,m} φ_i(x_A) φ_{n+m−i}(x_B)`: the conditioned Fock state
/// written in a quadrature basis.
pub fn fock_expansion(rec: DetectionRecord, xa: f64, xb: f64) -> Result<f64> {
    let total = rec.total() as usize;
    let fa = hermite_functions(total, xa);
    let fb = hermite_functions(total, xb);
    let mut acc = 0.0;
    for i in 0..=total {
        let b = bs_coefficient(rec.n, rec.m, i as u64)?.to_f64();
        acc += b * fa[i] * fb[total - i];
    }
    Ok(acc)
}

/// `(2π)^{−1} ∬ ψ(q_A, q_B) e^{−i(p_A q_A + p_B q_B)} dq_A dq_B`.
pub fn numeric_fourier(wf: &QuadratureWavefunction, pa: f64, pb: f64, tol: f64) -> Result<Complex64> {
    let v = integrate_2d_many(
        |a, b, out| {
            let z = wf.eval(a, b) * Complex64::new(0.0, -(pa * a + pb * b)).exp();
            out[0] = z.re;
            out[1] = z.im;
        },
        2,
        &wf.amplitude_frame(),
        tol,
    )?;
    Ok(Complex64::new(v[0], v[1]) / (2.0 * PI))
}
