//! MaxN/MinN searches, region maps over `(n, m)`, the a-priori detection
//! probability and the detector-noise sweeps.
//!
//! Grid points are evaluated in parallel; results are collected in index
//! order, so output never depends on scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fock::{thermal_probability, DetectionRecord};
use crate::noise::{NoiseModel, DEFAULT_TAIL_EPS};
use crate::pt::{verdict, PtMatrixBuilder, TensorFunctionSpec};

pub const DEFAULT_N_CAP: u64 = 600;
pub const DEFAULT_PATIENCE: u64 = 50;
pub const CLOSURE_STEP: f64 = 0.005;

const CHUNK: u64 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanOptions {
    pub n_cap: u64,
    /// Stop after this many consecutive misses following a detection;
    /// `None` scans all of `1..=n_cap`.
    pub patience: Option<u64>,
    pub tail_eps: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            n_cap: DEFAULT_N_CAP,
            patience: Some(DEFAULT_PATIENCE),
            tail_eps: DEFAULT_TAIL_EPS,
        }
    }
}

/// Evaluates verdicts for one tensor function under one noise model.
#[derive(Clone, Debug)]
pub struct Detector {
    builder: PtMatrixBuilder,
    model: NoiseModel,
    tail_eps: f64,
}

impl Detector {
    pub fn new(spec: &TensorFunctionSpec, model: NoiseModel, tail_eps: f64) -> Result<Self> {
        model.validate()?;
        Ok(Detector {
            builder: PtMatrixBuilder::new(spec),
            model,
            tail_eps,
        })
    }

    pub fn detects(&self, rec: DetectionRecord) -> Result<bool> {
        let m = self.builder.build(rec, &self.model, self.tail_eps)?;
        Ok(verdict(&m).entangled_detected)
    }
}

/// Detected diagonal points `n = m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalScan {
    pub min_n: u64,
    pub max_n: u64,
    pub detected: Vec<u64>,
    /// Every `n` in `min_n..=max_n` is detected.
    pub contiguous: bool,
    /// The scan stopped at `n_cap` while still inside the patience window.
    pub hit_cap: bool,
}

/// Smallest and largest `n = m ≥ 1` with a positive verdict.
pub fn find_max_n(
    spec: &TensorFunctionSpec,
    model: &NoiseModel,
    opts: &ScanOptions,
) -> Result<Option<DiagonalScan>> {
    let det = Detector::new(spec, *model, opts.tail_eps)?;
    let mut detected = Vec::new();
    let mut misses = 0u64;
    let mut start = 1u64;
    let mut stopped = false;
    while start <= opts.n_cap && !stopped {
        let end = (start + CHUNK - 1).min(opts.n_cap);
        let flags: Vec<bool> = (start..=end)
            .into_par_iter()
            .map(|n| det.detects(DetectionRecord::symmetric(n)))
            .collect::<Result<_>>()?;
        for (n, hit) in (start..=end).zip(flags) {
            if hit {
                detected.push(n);
                misses = 0;
            } else if !detected.is_empty() {
                misses += 1;
                if opts.patience.is_some_and(|p| misses >= p) {
                    stopped = true;
                    break;
                }
            }
        }
        start = end + 1;
    }
    let (Some(&min_n), Some(&max_n)) = (detected.first(), detected.last()) else {
        return Ok(None);
    };
    Ok(Some(DiagonalScan {
        min_n,
        max_n,
        contiguous: detected.len() as u64 == max_n - min_n + 1,
        hit_cap: !stopped && opts.patience.is_some(),
        detected,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionPoint {
    pub n: u64,
    pub m: u64,
    /// Probability of observing `(n, m)` when a squeezing parameter is given.
    pub weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub spec: TensorFunctionSpec,
    pub model: NoiseModel,
    pub max_n: Option<u64>,
    pub min_n: Option<u64>,
    pub region: Vec<RegionPoint>,
    pub apriori_probability: Option<f64>,
    pub grid: (u64, u64),
}

impl ScanResult {
    pub fn contains(&self, n: u64, m: u64) -> bool {
        self.region
            .binary_search_by(|p| (p.n, p.m).cmp(&(n, m)))
            .is_ok()
    }
}

/// Verdicts on every `(n, m)` with `n ≤ n_max`, `m ≤ m_max`.
pub fn region_scan(
    spec: &TensorFunctionSpec,
    model: &NoiseModel,
    n_max: u64,
    m_max: u64,
    alpha: Option<f64>,
    tail_eps: f64,
) -> Result<ScanResult> {
    if let Some(a) = alpha {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(invalid("alpha", format!("must be nonnegative, got {a}")));
        }
    }
    let det = Detector::new(spec, *model, tail_eps)?;
    let points: Vec<(u64, u64)> = (0..=n_max)
        .flat_map(|n| (0..=m_max).map(move |m| (n, m)))
        .collect();
    let flags: Vec<bool> = points
        .par_iter()
        .map(|&(n, m)| det.detects(DetectionRecord::new(n, m)))
        .collect::<Result<_>>()?;
    let region: Vec<RegionPoint> = points
        .iter()
        .zip(&flags)
        .filter(|(_, &f)| f)
        .map(|(&(n, m), _)| RegionPoint {
            n,
            m,
            weight: alpha.map(|a| thermal_probability(a, n) * thermal_probability(a, m)),
        })
        .collect();
    let diag: Vec<u64> = region.iter().filter(|p| p.n == p.m).map(|p| p.n).collect();
    let apriori = alpha.map(|_| region.iter().filter_map(|p| p.weight).sum());
    Ok(ScanResult {
        spec: spec.clone(),
        model: *model,
        max_n: diag.last().copied(),
        min_n: diag.first().copied(),
        region,
        apriori_probability: apriori,
        grid: (n_max, m_max),
    })
}

/// Per-cell photon cutoff `K` with `Σ_{k>K} P_thermal(k) = tanh^{2(K+1)} α`
/// below `tail_eps / 2`, so the square `[0, K]²` misses less than `tail_eps`.
pub fn thermal_cutoff(alpha: f64, tail_eps: f64) -> u64 {
    let t2 = alpha.tanh().powi(2);
    if t2 == 0.0 {
        return 0;
    }
    let k = ((tail_eps / 2.0).ln() / t2.ln()).ceil() as u64;
    k.saturating_sub(1)
}

/// Probability that the observed `(n, m)` lies in the detected region, for
/// symmetric squeezing `α`.
pub fn apriori_probability(spec: &TensorFunctionSpec, alpha: f64, tail_eps: f64) -> Result<f64> {
    Ok(apriori_curve(spec, &[alpha], tail_eps)?[0])
}

/// [`apriori_probability`] on a grid of `α`, sharing one region scan.
pub fn apriori_curve(spec: &TensorFunctionSpec, alphas: &[f64], tail_eps: f64) -> Result<Vec<f64>> {
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(invalid("tail_eps", format!("must lie in (0, 1), got {tail_eps}")));
    }
    for &a in alphas {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(invalid("alpha", format!("must be nonnegative, got {a}")));
        }
    }
    let k = alphas
        .iter()
        .map(|&a| thermal_cutoff(a, tail_eps))
        .max()
        .unwrap_or(0);
    let region = region_scan(spec, &NoiseModel::Ideal, k, k, None, tail_eps)?;
    Ok(alphas
        .iter()
        .map(|&a| {
            region
                .region
                .iter()
                .map(|p| thermal_probability(a, p.n) * thermal_probability(a, p.m))
                .sum()
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

/// Least-squares line through `(x, y)`; `None` for fewer than two points.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Some(LinearFit {
        slope,
        intercept,
        rms_residual: (rss / n).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub min_n: Option<u64>,
    pub max_n: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfficiencySweep {
    pub spec: TensorFunctionSpec,
    pub points: Vec<SweepPoint>,
    /// Fit of `max_n` against η over the points where something is detected.
    pub fit: Option<LinearFit>,
}

fn sweep_point(
    spec: &TensorFunctionSpec,
    model: NoiseModel,
    parameter: f64,
    opts: &ScanOptions,
) -> Result<SweepPoint> {
    let scan = find_max_n(spec, &model, opts)?;
    Ok(SweepPoint {
        parameter,
        min_n: scan.as_ref().map(|s| s.min_n),
        max_n: scan.as_ref().map(|s| s.max_n),
    })
}

/// MaxN against a symmetric Stokes-detector efficiency η_C = η_D.
pub fn efficiency_sweep(
    spec: &TensorFunctionSpec,
    etas: &[f64],
    opts: &ScanOptions,
) -> Result<EfficiencySweep> {
    let points = etas
        .iter()
        .map(|&eta| sweep_point(spec, NoiseModel::efficiency(eta, eta)?, eta, opts))
        .collect::<Result<Vec<_>>>()?;
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.max_n.map(|m| (p.parameter, m as f64)))
        .collect();
    Ok(EfficiencySweep {
        spec: spec.clone(),
        fit: linear_fit(&xy),
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaSweep {
    pub spec: TensorFunctionSpec,
    pub points: Vec<SweepPoint>,
    pub closure: Option<Closure>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Closure {
    /// Largest σ found with a nonempty detected set.
    pub last_open: f64,
    /// Smallest σ found with nothing detected; the closure lies in between.
    pub first_closed: f64,
    /// Detected window at `last_open`.
    pub last_window: (u64, u64),
}

impl Closure {
    pub fn sigma(&self) -> f64 {
        0.5 * (self.last_open + self.first_closed)
    }
}

/// (MinN, MaxN) against a symmetric Gaussian noise σ_C = σ_D; the closure σ
/// is refined by bisection whenever the grid brackets it.
pub fn sigma_sweep(
    spec: &TensorFunctionSpec,
    sigmas: &[f64],
    opts: &ScanOptions,
) -> Result<SigmaSweep> {
    let points = sigmas
        .iter()
        .map(|&s| sweep_point(spec, NoiseModel::gaussian(s, s)?, s, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut closure = None;
    for w in points.windows(2) {
        if w[0].max_n.is_some() && w[1].max_n.is_none() {
            closure = Some(closure_sigma(spec, w[0].parameter, w[1].parameter, opts)?);
            break;
        }
    }
    Ok(SigmaSweep {
        spec: spec.clone(),
        points,
        closure,
    })
}

/// Bisects `[open, closed]` down to [`CLOSURE_STEP`], where something is
/// detected at `open` and nothing at `closed`.
pub fn closure_sigma(
    spec: &TensorFunctionSpec,
    open: f64,
    closed: f64,
    opts: &ScanOptions,
) -> Result<Closure> {
    if !(open > 0.0 && closed > open) {
        return Err(invalid("sigma", "need 0 < open < closed"));
    }
    let window = |s: f64| -> Result<Option<(u64, u64)>> {
        Ok(find_max_n(spec, &NoiseModel::gaussian(s, s)?, opts)?.map(|d| (d.min_n, d.max_n)))
    };
    let mut last_window = window(open)?
        .ok_or_else(|| invalid("sigma", format!("nothing detected at σ = {open}")))?;
    if window(closed)?.is_some() {
        return Err(invalid("sigma", format!("still detected at σ = {closed}")));
    }
    let (mut lo, mut hi) = (open, closed);
    while hi - lo > CLOSURE_STEP {
        let mid = 0.5 * (lo + hi);
        match window(mid)? {
            Some(w) => {
                lo = mid;
                last_window = w;
            }
            None => hi = mid,
        }
    }
    Ok(Closure {
        last_open: lo,
        first_closed: hi,
        last_window,
    })
}
