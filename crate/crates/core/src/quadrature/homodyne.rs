//! Phase-randomized homodyne sampling of a single-mode Fock superposition
//! and moment reconstruction from the quadrature record.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::wavefunction::hermite_functions;
use crate::error::{invalid, Error, Result};
use crate::exact::{binomial, hermite};
use num_traits::ToPrimitive;

pub const MAX_CUTOFF: usize = 100;

const GRID_STEP: f64 = 0.01;
const GRID_MARGIN: f64 = 7.0;
const BATCH: usize = 1 << 14;
const BISECTIONS: usize = 48;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
const GL5: [(f64, f64); 5] = [
    (0.046_910_077_030_668, 0.118_463_442_528_094_5),
    (0.230_765_344_947_158_5, 0.239_314_335_249_683_2),
    (0.5, 0.284_444_444_444_444_4),
    (0.769_234_655_052_841_5, 0.239_314_335_249_683_2),
    (0.953_089_922_969_332, 0.118_463_442_528_094_5),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FockSuperposition {
    coeffs: Vec<Complex64>,
}

impl FockSuperposition {
    /// Normalizes `coeffs`; the cutoff is `coeffs.len() − 1`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("coeffs", "empty amplitude vector"));
        }
        if coeffs.len() - 1 > MAX_CUTOFF {
            return Err(Error::CutoffExceeded {
                cutoff: coeffs.len() - 1,
                max: MAX_CUTOFF,
            });
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("coeffs", "amplitudes must be finite and not all zero"));
        }
        Ok(FockSuperposition {
            coeffs: coeffs.into_iter().map(|c| c / norm).collect(),
        })
    }

    pub fn fock(n: usize) -> Result<Self> {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[n] = Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `⟨a†^k a^l⟩` from the amplitudes.
    pub fn normal_moment(&self, k: usize, l: usize) -> Complex64 {
        let c = &self.coeffs;
        let fall = |n: usize, h: usize| ((n + 1 - h)..=n).map(|x| x as f64).product::<f64>();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..c.len() {
            if j + k >= c.len() || j + l >= c.len() {
                continue;
            }
            let w = (fall(j + k, k) * fall(j + l, l)).sqrt();
            acc += c[j + k].conj() * c[j + l] * w;
        }
        acc
    }

    /// Density of the quadrature at local-oscillator phase `phase`.
    pub fn density(&self, q: f64, phase: f64) -> f64 {
        let phi = hermite_functions(self.cutoff(), q);
        let amp: Complex64 = self
            .coeffs
            .iter()
            .zip(&phi)
            .enumerate()
            .map(|(n, (c, f))| c * Complex64::from_polar(*f, n as f64 * phase))
            .sum();
        amp.norm_sqr()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HomodyneSample {
    pub value: f64,
    pub phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PhaseMode {
    /// Independent uniform phases.
    Random,
    /// Sample `i` of `count` takes a uniform phase in the `i`-th of `count`
    /// equal bins.
    Stratified,
}

/// Inverse-CDF sampler. The density at phase Φ is `Σ_d Re(e^{idΦ} A_d(q))`,
/// so one table of `A_d` and of its running integral serves every phase.
#[derive(Clone, Debug)]
pub struct HomodyneSampler {
    lo: f64,
    h: f64,
    /// `density[j][d] = A_d(q_j)`.
    density: Vec<Vec<Complex64>>,
    /// `cdf[j][d] = ∫_{lo}^{q_j} A_d`.
    cdf: Vec<Vec<Complex64>>,
}

fn components(state: &FockSuperposition, q: f64) -> Vec<Complex64> {
    let c = state.coeffs();
    let phi = hermite_functions(state.cutoff(), q);
    (0..c.len())
        .map(|d| {
            let sum: Complex64 = (0..c.len() - d)
                .map(|n| c[n + d] * c[n].conj() * (phi[n + d] * phi[n]))
                .sum();
            if d == 0 {
                sum
            } else {
                sum * 2.0
            }
        })
        .collect()
}

fn phases(d: usize, phase: f64) -> Vec<Complex64> {
    let step = Complex64::from_polar(1.0, phase);
    let mut out = Vec::with_capacity(d);
    let mut z = Complex64::new(1.0, 0.0);
    for _ in 0..d {
        out.push(z);
        z *= step;
    }
    out
}

fn project(row: &[Complex64], ph: &[Complex64]) -> f64 {
    row.iter().zip(ph).map(|(a, e)| (a * e).re).sum()
}

impl HomodyneSampler {
    pub fn new(state: &FockSuperposition) -> Self {
        let half = (2.0 * state.cutoff() as f64 + 1.0).sqrt() + GRID_MARGIN;
        let cells = (2.0 * half / GRID_STEP).ceil() as usize;
        let h = 2.0 * half / cells as f64;
        let lo = -half;
        let nodes: Vec<Vec<Complex64>> = (0..=cells)
            .into_par_iter()
            .map(|j| components(state, lo + j as f64 * h))
            .collect();
        let increments: Vec<Vec<Complex64>> = (0..cells)
            .into_par_iter()
            .map(|j| {
                let a = lo + j as f64 * h;
                let mut acc = vec![Complex64::new(0.0, 0.0); state.coeffs().len()];
                for (x, w) in GL5 {
                    for (s, v) in acc.iter_mut().zip(components(state, a + x * h)) {
                        *s += v * (w * h);
                    }
                }
                acc
            })
            .collect();
        let mut cdf = Vec::with_capacity(cells + 1);
        let mut run = vec![Complex64::new(0.0, 0.0); state.coeffs().len()];
        cdf.push(run.clone());
        for inc in &increments {
            for (r, v) in run.iter_mut().zip(inc) {
                *r += v;
            }
            cdf.push(run.clone());
        }
        HomodyneSampler {
            lo,
            h,
            density: nodes,
            cdf,
        }
    }

    fn cells(&self) -> usize {
        self.cdf.len() - 1
    }

    /// Cubic Hermite interpolant of the CDF on cell `j` at fraction `t`,
    /// with end values `f0, f1` and slopes `d0, d1` (per unit of `q`).
    fn cubic(&self, f0: f64, f1: f64, d0: f64, d1: f64, t: f64) -> f64 {
        let h = self.h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * f0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * f1
            + (t3 - t2) * h * d1
    }

    /// Derivative of the interpolated CDF: the density actually sampled.
    pub fn interpolated_density(&self, q: f64, phase: f64) -> f64 {
        let x = (q - self.lo) / self.h;
        if x < 0.0 || x >= self.cells() as f64 {
            return 0.0;
        }
        let j = x.floor() as usize;
        let t = x - j as f64;
        let ph = phases(self.density[0].len(), phase);
        let (f0, f1) = (project(&self.cdf[j], &ph), project(&self.cdf[j + 1], &ph));
        let (d0, d1) = (project(&self.density[j], &ph), project(&self.density[j + 1], &ph));
        let h = self.h;
        ((6.0 * t * t - 6.0 * t) * (f0 - f1)) / h
            + (3.0 * t * t - 4.0 * t + 1.0) * d0
            + (3.0 * t * t - 2.0 * t) * d1
    }

    /// Integral of the tabulated density at `phase`; 1 up to truncation.
    pub fn total_mass(&self, phase: f64) -> f64 {
        let ph = phases(self.density[0].len(), phase);
        project(&self.cdf[self.cells()], &ph)
    }

    /// Quadrature value with CDF fraction `u` at phase `phase`.
    pub fn invert(&self, u: f64, phase: f64) -> f64 {
        let ph = phases(self.density[0].len(), phase);
        let total = project(&self.cdf[self.cells()], &ph);
        let target = u * total;
        let (mut a, mut b) = (0usize, self.cells());
        while b - a > 1 {
            let mid = (a + b) / 2;
            if project(&self.cdf[mid], &ph) <= target {
                a = mid;
            } else {
                b = mid;
            }
        }
        let (f0, f1) = (project(&self.cdf[a], &ph), project(&self.cdf[b], &ph));
        let (d0, d1) = (project(&self.density[a], &ph), project(&self.density[b], &ph));
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if self.cubic(f0, f1, d0, d1, mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.lo + (a as f64 + 0.5 * (lo + hi)) * self.h
    }

    /// `count` samples; batches of samples come from independent streams of
    /// one seeded generator, so the output depends only on `seed`.
    pub fn sample(&self, count: usize, seed: u64, mode: PhaseMode) -> Vec<HomodyneSample> {
        let batches = count.div_ceil(BATCH);
        (0..batches)
            .into_par_iter()
            .flat_map_iter(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let start = b * BATCH;
                let end = (start + BATCH).min(count);
                (start..end)
                    .map(|i| {
                        let r: f64 = rng.random();
                        let phase = match mode {
                            PhaseMode::Random => TAU * r,
                            PhaseMode::Stratified => TAU * (i as f64 + r) / count as f64,
                        };
                        let value = self.invert(rng.random(), phase);
                        HomodyneSample { value, phase }
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Phase-randomized samples of `state`.
pub fn homodyne_sample(state: &FockSuperposition, count: usize, seed: u64) -> Result<Vec<HomodyneSample>> {
    if count == 0 {
        return Err(invalid("count", "must be positive"));
    }
    Ok(HomodyneSampler::new(state).sample(count, seed, PhaseMode::Random))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RichterEstimate {
    pub value: Complex64,
    pub std_error_re: f64,
    pub std_error_im: f64,
}

/// Normalization making the `(0, 0)` estimate identically 1.
pub fn richter_constant(k: usize, l: usize) -> f64 {
    let c = binomial((k + l) as u64, k as i64).to_f64().unwrap_or(f64::INFINITY);
    1.0 / (2f64.powi((k + l) as i32).sqrt() * c)
}

/// Estimates `⟨a†^k a^l⟩` as the sample mean of
/// `H_{k+l}(q) e^{i(k−l)Φ} / (√(2^{k+l}) C(k+l, k))`.
pub fn richter_estimate(samples: &[HomodyneSample], k: usize, l: usize) -> Result<RichterEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let c = richter_constant(k, l);
    let dphi = k as f64 - l as f64;
    let terms: Vec<Complex64> = samples
        .iter()
        .map(|s| Complex64::from_polar(c * hermite(k + l, s.value), dphi * s.phase))
        .collect();
    let n = terms.len() as f64;
    let mean: Complex64 = terms.iter().sum::<Complex64>() / n;
    let se = |f: fn(&Complex64) -> f64, m: f64| {
        if terms.len() < 2 {
            return f64::NAN;
        }
        let ss: f64 = terms.iter().map(|z| (f(z) - m).powi(2)).sum();
        (ss / (n - 1.0) / n).sqrt()
    };
    Ok(RichterEstimate {
        value: mean,
        std_error_re: se(|z| z.re, mean.re),
        std_error_im: se(|z| z.im, mean.im),
    })
}
