//! Imperfect Stokes detection (efficiency, additive Gaussian noise) and lossy
//! anti-Stokes readout.
//!
//! Detector imperfections enter as posteriors `p(i | n)` over the true Stokes
//! photon number given a photoelectron count, under a uniform prior. Readout
//! loss enters as a beam splitter of transmission η coupling each anti-Stokes
//! mode to vacuum.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::{binomial, falling_factorial, rational_from_f64, rational_to_f64, DyadicWeights};
use crate::fock::{conditioned_state, DetectionRecord};

/// Default discarded-tail mass for every truncated infinite sum.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Ideal,
    DetectorEfficiency { eta_c: f64, eta_d: f64 },
    DetectorGaussian { sigma_c: f64, sigma_d: f64 },
    ReadoutLoss { eta_a: f64, eta_b: f64 },
}

impl NoiseModel {
    pub fn efficiency(eta_c: f64, eta_d: f64) -> Result<Self> {
        let m = NoiseModel::DetectorEfficiency { eta_c, eta_d };
        m.validate()?;
        Ok(m)
    }

    pub fn gaussian(sigma_c: f64, sigma_d: f64) -> Result<Self> {
        let m = NoiseModel::DetectorGaussian { sigma_c, sigma_d };
        m.validate()?;
        Ok(m)
    }

    pub fn readout_loss(eta_a: f64, eta_b: f64) -> Result<Self> {
        let m = NoiseModel::ReadoutLoss { eta_a, eta_b };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Ideal => Ok(()),
            NoiseModel::DetectorEfficiency { eta_c, eta_d } => {
                check_efficiency("eta_c", eta_c)?;
                check_efficiency("eta_d", eta_d)
            }
            NoiseModel::DetectorGaussian { sigma_c, sigma_d } => {
                check_sigma("sigma_c", sigma_c)?;
                check_sigma("sigma_d", sigma_d)
            }
            NoiseModel::ReadoutLoss { eta_a, eta_b } => {
                check_transmission("eta_a", eta_a)?;
                check_transmission("eta_b", eta_b)
            }
        }
    }

    /// Whether the Stokes photon numbers are uncertain under this model.
    pub fn is_detector_noise(&self) -> bool {
        matches!(
            self,
            NoiseModel::DetectorEfficiency { .. } | NoiseModel::DetectorGaussian { .. }
        )
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::Ideal => write!(f, "ideal"),
            NoiseModel::DetectorEfficiency { eta_c, eta_d } => write!(f, "eff:{eta_c},{eta_d}"),
            NoiseModel::DetectorGaussian { sigma_c, sigma_d } => {
                write!(f, "gauss:{sigma_c},{sigma_d}")
            }
            NoiseModel::ReadoutLoss { eta_a, eta_b } => write!(f, "loss:{eta_a},{eta_b}"),
        }
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    /// `ideal`, `eff:ηC,ηD`, `gauss:σC,σD` or `loss:ηA,ηB`. A single value is
    /// used for both detectors.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "ideal" {
            return Ok(NoiseModel::Ideal);
        }
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| invalid("model", format!("unrecognized model `{s}`")))?;
        let vals: Vec<f64> = args
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid("model", format!("bad number `{v}`")))
            })
            .collect::<Result<_>>()?;
        let (a, b) = match vals.as_slice() {
            [a] => (*a, *a),
            [a, b] => (*a, *b),
            _ => return Err(invalid("model", "expected one or two parameters")),
        };
        match kind {
            "eff" => NoiseModel::efficiency(a, b),
            "gauss" => NoiseModel::gaussian(a, b),
            "loss" => NoiseModel::readout_loss(a, b),
            _ => Err(invalid("model", format!("unknown kind `{kind}`"))),
        }
    }
}

fn check_efficiency(name: &'static str, eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid(name, format!("must lie in (0, 1], got {eta}")));
    }
    Ok(())
}

fn check_transmission(name: &'static str, eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(name, format!("must lie in [0, 1], got {eta}")));
    }
    Ok(())
}

fn check_sigma(name: &'static str, sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(name, format!("must be positive and finite, got {sigma}")));
    }
    Ok(())
}

fn check_tail(tail_eps: f64) -> Result<()> {
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(invalid("tail_eps", format!("must lie in (0, 1), got {tail_eps}")));
    }
    Ok(())
}

/// Posterior over the true photon number `i` given a photoelectron count.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalDistribution {
    support_offset: u64,
    weights: Vec<f64>,
    truncation_bound: f64,
}

impl ConditionalDistribution {
    /// Point mass at `i`.
    pub fn delta(i: u64) -> Self {
        ConditionalDistribution {
            support_offset: i,
            weights: vec![1.0],
            truncation_bound: 0.0,
        }
    }

    fn from_raw(support_offset: u64, raw: Vec<f64>, truncation_bound: f64) -> Self {
        let z: f64 = raw.iter().sum();
        ConditionalDistribution {
            support_offset,
            weights: raw.into_iter().map(|w| w / z).collect(),
            truncation_bound,
        }
    }

    pub fn support_offset(&self) -> u64 {
        self.support_offset
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Estimated probability mass dropped by truncation.
    pub fn truncation_bound(&self) -> f64 {
        self.truncation_bound
    }

    pub fn prob(&self, i: u64) -> f64 {
        i.checked_sub(self.support_offset)
            .and_then(|k| self.weights.get(k as usize).copied())
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(k, &w)| (self.support_offset + k as u64, w))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(i, w)| i as f64 * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.iter().map(|(i, w)| (i as f64 - mu).powi(2) * w).sum()
    }

    pub fn is_delta(&self) -> bool {
        self.weights.len() == 1
    }

    pub fn dyadic(&self) -> DyadicWeights {
        DyadicWeights::new(&self.weights)
    }

    /// Exact `E[i!/(i−h)!]` for `h = 0..=max_h`, using the binary values of
    /// the weights renormalized exactly.
    pub fn factorial_moments(&self, max_h: u64) -> Vec<BigRational> {
        let d = self.dyadic();
        (0..=max_h)
            .map(|h| d.expect(self.iter().map(|(i, _)| falling_factorial(i, h))))
            .collect()
    }

    /// Exact `E[i^p]` for `p = 0..=max_p`.
    pub fn raw_moments(&self, max_p: u32) -> Vec<BigRational> {
        let d = self.dyadic();
        (0..=max_p)
            .map(|p| d.expect(self.iter().map(|(i, _)| BigInt::from(i).pow(p))))
            .collect()
    }
}

/// Negative-binomial posterior `p(i|n) = C(i,n) η^{n+1} (1−η)^{i−n}`, i ≥ n.
pub fn efficiency_posterior(n: u64, eta: f64, tail_eps: f64) -> Result<ConditionalDistribution> {
    check_efficiency("eta", eta)?;
    check_tail(tail_eps)?;
    if eta == 1.0 {
        return Ok(ConditionalDistribution::delta(n));
    }
    let q = 1.0 - eta;
    let mut logw = (n as f64 + 1.0) * eta.ln();
    let mut logs = vec![logw];
    let mut i = n;
    let tail = loop {
        // w(i+1)/w(i) = (i+1)(1−η)/(i+1−n), decreasing in i
        let ratio = (i as f64 + 1.0) * q / ((i - n) as f64 + 1.0);
        if ratio < 1.0 {
            let bound = logw.exp() * ratio / (1.0 - ratio);
            if bound < tail_eps {
                break bound;
            }
        }
        logw += ratio.ln();
        logs.push(logw);
        i += 1;
    };
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw = logs.into_iter().map(|l| (l - top).exp()).collect();
    Ok(ConditionalDistribution::from_raw(n, raw, tail))
}

/// Discretized Gaussian posterior `p(i|n) ∝ exp(−(i−n)²/2σ²)` on integers
/// `i ≥ 0`, renormalized after clipping and truncation at `|i − n| > K`.
pub fn gaussian_posterior(n: u64, sigma: f64, tail_eps: f64) -> Result<ConditionalDistribution> {
    check_sigma("sigma", sigma)?;
    check_tail(tail_eps)?;
    let s2 = 2.0 * sigma * sigma;
    // Σ_{d>K} e^{−d²/2σ²} ≤ e^{−(K+1)²/2σ²} / (1 − e^{−(2K+3)/2σ²}); the
    // normalizer is at least 1 (the d = 0 term), so twice this bounds the
    // discarded mass.
    let mut k: u64 = 0;
    let tail = loop {
        let k1 = (k + 1) as f64;
        let lead = (-k1 * k1 / s2).exp();
        let ratio = (-(2.0 * k1 + 1.0) / s2).exp();
        let bound = 2.0 * lead / (1.0 - ratio);
        if bound < tail_eps {
            break bound;
        }
        k += 1;
    };
    let lo = n.saturating_sub(k);
    let raw = (lo..=n + k)
        .map(|i| {
            let d = i as f64 - n as f64;
            (-d * d / s2).exp()
        })
        .collect();
    Ok(ConditionalDistribution::from_raw(lo, raw, tail))
}

/// Posteriors for detectors C and D under `model`; point masses when Stokes
/// detection is ideal.
pub fn stokes_posteriors(
    model: &NoiseModel,
    rec: DetectionRecord,
    tail_eps: f64,
) -> Result<(ConditionalDistribution, ConditionalDistribution)> {
    model.validate()?;
    Ok(match *model {
        NoiseModel::Ideal | NoiseModel::ReadoutLoss { .. } => (
            ConditionalDistribution::delta(rec.n),
            ConditionalDistribution::delta(rec.m),
        ),
        NoiseModel::DetectorEfficiency { eta_c, eta_d } => (
            efficiency_posterior(rec.n, eta_c, tail_eps)?,
            efficiency_posterior(rec.m, eta_d, tail_eps)?,
        ),
        NoiseModel::DetectorGaussian { sigma_c, sigma_d } => (
            gaussian_posterior(rec.n, sigma_c, tail_eps)?,
            gaussian_posterior(rec.m, sigma_d, tail_eps)?,
        ),
    })
}

/// Binomial pmf C(n,k) p^k (1−p)^{n−k}, with 0^0 = 1.
pub fn binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let lc = ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    (lc + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Loss amplitude `b_{r,s}^{i,total−i}`: the detected pair `(r, s)` from
/// `(i, total − i)` anti-Stokes photons through transmissions `η_A`, `η_B`.
pub fn loss_amplitude(i: u64, total: u64, r: u64, s: u64, eta_a: f64, eta_b: f64) -> Result<f64> {
    check_transmission("eta_a", eta_a)?;
    check_transmission("eta_b", eta_b)?;
    if i > total {
        return Err(Error::IndexOutOfRange { index: i, total });
    }
    if r > i {
        return Err(invalid("r", format!("r = {r} exceeds i = {i}")));
    }
    if s > total - i {
        return Err(invalid("s", format!("s = {s} exceeds total − i = {}", total - i)));
    }
    Ok((binomial_pmf(r, i, eta_a) * binomial_pmf(s, total - i, eta_b)).sqrt())
}

fn exact_binomial_pmf(k: u64, n: u64, p: &BigRational) -> BigRational {
    if k > n {
        return BigRational::zero();
    }
    let q = BigRational::one() - p;
    BigRational::from_integer(binomial(n, k as i64))
        * num_traits::pow(p.clone(), k as usize)
        * num_traits::pow(q, (n - k) as usize)
}

/// Exact joint distribution `P(r, s)` of detected anti-Stokes photoelectrons
/// after loss, with the loss modes traced out.
///
/// Fixing `r` and the lost count pins `i`, so the trace leaves an incoherent
/// mixture over `i` weighted by the conditioned-state populations.
pub fn lossy_joint_distribution_exact(
    rec: DetectionRecord,
    eta_a: &BigRational,
    eta_b: &BigRational,
) -> Result<Vec<Vec<BigRational>>> {
    for (name, eta) in [("eta_a", eta_a), ("eta_b", eta_b)] {
        if eta.is_negative() || eta > &BigRational::one() {
            return Err(invalid(name, format!("must lie in [0, 1], got {eta}")));
        }
    }
    let total = rec.total();
    let pops = conditioned_state(rec).probabilities_exact();
    let dim = total as usize + 1;
    let mut joint = vec![vec![BigRational::zero(); dim]; dim];
    for (i, p) in pops.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let i = i as u64;
        let j = total - i;
        let ba: Vec<BigRational> = (0..=i).map(|r| exact_binomial_pmf(r, i, eta_a)).collect();
        let bb: Vec<BigRational> = (0..=j).map(|s| exact_binomial_pmf(s, j, eta_b)).collect();
        for (r, pa) in ba.iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            let pa = p * pa;
            for (s, pb) in bb.iter().enumerate() {
                joint[r][s] += &pa * pb;
            }
        }
    }
    Ok(joint)
}

/// Distribution of detected anti-Stokes photoelectrons `r` from cell A.
pub fn lossy_photoelectron_distribution(
    rec: DetectionRecord,
    eta_a: f64,
    eta_b: f64,
) -> Result<Vec<f64>> {
    check_transmission("eta_a", eta_a)?;
    check_transmission("eta_b", eta_b)?;
    let joint = lossy_joint_distribution_exact(rec, &rational_from_f64(eta_a), &rational_from_f64(eta_b))?;
    Ok(joint
        .iter()
        .map(|row| rational_to_f64(&row.iter().sum()))
        .collect())
}

fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift as usize;
    top.to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
}

/// `|B_r^{n,m}|²` for every `r`, in floating point.
pub fn bs_squares(n: u64, m: u64) -> Vec<f64> {
    let total = n + m;
    let cn: Vec<BigInt> = (0..=n).map(|k| binomial(n, k as i64)).collect();
    let cm: Vec<BigInt> = (0..=m).map(|k| binomial(m, k as i64)).collect();
    let lf: Vec<f64> = {
        let mut v = vec![0.0; total as usize + 1];
        for k in 1..=total as usize {
            v[k] = v[k - 1] + (k as f64).ln();
        }
        v
    };
    let base = -lf[n as usize] - lf[m as usize] - total as f64 * std::f64::consts::LN_2;
    (0..=total)
        .map(|r| {
            let lo = r.saturating_sub(m);
            let hi = r.min(n);
            let mut sum = BigInt::zero();
            for k in lo..=hi {
                let t = &cn[k as usize] * &cm[(r - k) as usize];
                if (r - k) % 2 == 0 {
                    sum += t;
                } else {
                    sum -= t;
                }
            }
            if sum.is_zero() {
                0.0
            } else {
                (2.0 * ln_bigint(&sum) + lf[r as usize] + lf[(total - r) as usize] + base).exp()
            }
        })
        .collect()
}

/// Anti-Stokes photon-number distribution of cell A when the Stokes numbers
/// are only known through the detector posteriors:
/// `p_r = Σ_{i,j} p_C(i|n) p_D(j|m) |B_r^{i,j}|²`.
pub fn mixed_marginal_vector(
    rec: DetectionRecord,
    model: &NoiseModel,
    tail_eps: f64,
) -> Result<Vec<f64>> {
    if matches!(model, NoiseModel::ReadoutLoss { .. }) {
        return Err(Error::UnsupportedModel(model.to_string()));
    }
    let (pc, pd) = stokes_posteriors(model, rec, tail_eps)?;
    let max_total = (pc.support_offset() + pc.weights().len() as u64 - 1)
        + (pd.support_offset() + pd.weights().len() as u64 - 1);
    let pairs: Vec<(u64, f64, u64, f64)> = pc
        .iter()
        .flat_map(|(i, wi)| pd.iter().map(move |(j, wj)| (i, wi, j, wj)))
        .collect();
    let out = pairs
        .par_iter()
        .map(|&(i, wi, j, wj)| {
            let mut acc = vec![0.0; max_total as usize + 1];
            let w = wi * wj;
            for (r, b2) in bs_squares(i, j).into_iter().enumerate() {
                acc[r] += w * b2;
            }
            acc
        })
        .reduce(
            || vec![0.0; max_total as usize + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(out)
}

/// Single entry `p_r` of [`mixed_marginal_vector`].
pub fn mixed_marginal_distribution(
    rec: DetectionRecord,
    model: &NoiseModel,
    r: u64,
    tail_eps: f64,
) -> Result<f64> {
    Ok(mixed_marginal_vector(rec, model, tail_eps)?
        .get(r as usize)
        .copied()
        .unwrap_or(0.0))
}
