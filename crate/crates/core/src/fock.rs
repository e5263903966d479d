//! Per-cell squeezed amplitudes, 50:50 beam-splitter Fock coefficients and
//! the anti-Stokes state conditioned on a Stokes detection record.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::{binomial, factorial, rational_to_f64, sqrt_exact, Surd};

/// Squeezing parameters of the Stokes process in cells A and B.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezingParams {
    alpha: f64,
    beta: f64,
}

impl SqueezingParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(SqueezingParams { alpha, beta })
    }

    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_symmetric(&self) -> bool {
        self.alpha == self.beta
    }

    /// cosh α
    pub fn mu(&self) -> f64 {
        self.alpha.cosh()
    }

    /// sinh α
    pub fn nu(&self) -> f64 {
        self.alpha.sinh()
    }

    /// μ² + ν² = cosh 2α
    pub fn s(&self) -> f64 {
        (2.0 * self.alpha).cosh()
    }

    fn parameter(&self, cell: Cell) -> f64 {
        match cell {
            Cell::A => self.alpha,
            Cell::B => self.beta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    A,
    B,
}

/// Stokes photoelectron counts at detectors C (`n`) and D (`m`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub n: u64,
    pub m: u64,
}

impl DetectionRecord {
    pub fn new(n: u64, m: u64) -> Self {
        DetectionRecord { n, m }
    }

    pub fn symmetric(n: u64) -> Self {
        DetectionRecord { n, m: n }
    }

    pub fn total(&self) -> u64 {
        self.n + self.m
    }
}

impl fmt::Display for DetectionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n, self.m)
    }
}

/// Two-mode state `Σ_i amplitudes[i] |i⟩_A |total − i⟩_B` with exact
/// real amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct JointFockState {
    total: u64,
    amplitudes: Vec<Surd>,
}

impl JointFockState {
    /// Fixes the global sign so that the first nonzero amplitude is positive.
    pub fn new(total: u64, mut amplitudes: Vec<Surd>) -> Result<Self> {
        if amplitudes.len() as u64 != total + 1 {
            return Err(invalid(
                "amplitudes",
                format!("expected {} entries, got {}", total + 1, amplitudes.len()),
            ));
        }
        if let Some(first) = amplitudes.iter().find(|a| !a.is_zero()) {
            if first.signum() < 0 {
                amplitudes = amplitudes.into_iter().map(|a| -a).collect();
            }
        }
        Ok(JointFockState { total, amplitudes })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn amplitudes(&self) -> &[Surd] {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: u64) -> Option<&Surd> {
        self.amplitudes.get(i as usize)
    }

    pub fn amplitudes_f64(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Surd::to_f64).collect()
    }

    pub fn norm_squared(&self) -> BigRational {
        self.amplitudes.iter().map(Surd::square).sum()
    }

    /// Exact photon-number distribution of mode A.
    pub fn probabilities_exact(&self) -> Vec<BigRational> {
        self.amplitudes.iter().map(Surd::square).collect()
    }
}

/// Two-mode squeezed amplitude C_i = (cosh α)^{-1} (tanh α)^i of one cell.
pub fn squeezed_amplitude(params: &SqueezingParams, cell: Cell, i: u64) -> f64 {
    let a = params.parameter(cell);
    if i == 0 {
        return 1.0 / a.cosh();
    }
    let t = a.tanh();
    if t == 0.0 {
        return 0.0;
    }
    (i as f64 * t.ln() - a.cosh().ln()).exp()
}

/// Beam-splitter coefficient B_i^{n,m}: the amplitude linking detected Stokes
/// numbers `(n, m)` to `(i, n + m − i)` excitations in the two cells.
///
/// The value is `S · √(i!(N−i)! / (n! m! 2^N))` with `S` an exact signed
/// binomial sum, so zeros and signs are exact.
pub fn bs_coefficient(n: u64, m: u64, i: u64) -> Result<Surd> {
    let total = n + m;
    if i > total {
        return Err(Error::IndexOutOfRange { index: i, total });
    }
    let lo = i.saturating_sub(m);
    let hi = i.min(n);
    let mut sum = BigInt::zero();
    for k in lo..=hi {
        let term = binomial(n, k as i64) * binomial(m, (i - k) as i64);
        if (i - k).is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let radicand = BigRational::new(
        factorial(i) * factorial(total - i),
        factorial(n) * factorial(m) * (BigInt::one() << total as usize),
    );
    Ok(Surd::new(BigRational::from_integer(sum), radicand))
}

/// The anti-Stokes state conditioned on the record, for equal squeezing in
/// both cells (where it no longer depends on the squeezing strength).
pub fn conditioned_state(rec: DetectionRecord) -> JointFockState {
    let total = rec.total();
    let amplitudes = (0..=total)
        .map(|i| bs_coefficient(i, total - i, rec.n).expect("n <= total"))
        .collect();
    JointFockState::new(total, amplitudes).expect("length matches")
}

/// Unnormalized conditioned state for arbitrary (possibly unequal) squeezing:
/// amplitude i is C_i^A · C_{N−i}^B · B_n^{i,N−i}.
pub fn unnormalized_conditioned_state(params: &SqueezingParams, rec: DetectionRecord) -> Vec<f64> {
    let total = rec.total();
    (0..=total)
        .map(|i| {
            let b = bs_coefficient(i, total - i, rec.n).expect("n <= total");
            squeezed_amplitude(params, Cell::A, i)
                * squeezed_amplitude(params, Cell::B, total - i)
                * b.to_f64()
        })
        .collect()
}

/// Photon-number distribution of mode A, `p_i = amplitudes[i]²`.
pub fn marginal_distribution(state: &JointFockState) -> Vec<f64> {
    state
        .probabilities_exact()
        .iter()
        .map(rational_to_f64)
        .collect()
}

/// Single-cell Stokes photon-number law sech²α · tanh^{2k}α.
pub fn thermal_probability(alpha: f64, k: u64) -> f64 {
    let t2 = alpha.tanh().powi(2);
    let lead = 1.0 / alpha.cosh().powi(2);
    if k == 0 {
        return lead;
    }
    if t2 == 0.0 {
        return 0.0;
    }
    (k as f64 * t2.ln()).exp() * lead
}

/// Probability of registering `(n, m)` at ideal detectors C and D.
///
/// Two identical thermal Stokes marginals pass a 50:50 splitter unchanged,
/// so the joint law factorizes into two geometric distributions.
pub fn stokes_joint_probability(params: &SqueezingParams, rec: DetectionRecord) -> Result<f64> {
    if !params.is_symmetric() {
        return Err(invalid("params", "joint Stokes law requires alpha == beta"));
    }
    let a = params.alpha();
    Ok(thermal_probability(a, rec.n) * thermal_probability(a, rec.m))
}

/// Sums surds whose radicands differ by rational squares; `None` otherwise.
pub fn sum_surds<'a>(items: impl IntoIterator<Item = &'a Surd>) -> Option<Surd> {
    let mut base: Option<BigRational> = None;
    let mut coeff = BigRational::zero();
    for s in items {
        if s.is_zero() {
            continue;
        }
        match &base {
            None => {
                base = Some(s.radicand().clone());
                coeff += s.coeff();
            }
            Some(r) => {
                let ratio = sqrt_exact(&(s.radicand() / r))?;
                coeff += s.coeff() * ratio;
            }
        }
    }
    Some(match base {
        None => Surd::zero(),
        Some(r) => Surd::new(coeff, r),
    })
}

/// Mean photon number of mode A, exact.
pub fn mean_photons_a(state: &JointFockState) -> BigRational {
    state
        .probabilities_exact()
        .into_iter()
        .enumerate()
        .map(|(i, p)| p * BigInt::from(i))
        .sum()
}
