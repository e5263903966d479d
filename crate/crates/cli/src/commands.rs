use std::fs;
use std::path::Path;

use meso_ent::fock::thermal_probability;
use meso_ent::noise::{lossy_photoelectron_distribution, mixed_marginal_vector};
use meso_ent::quadrature::duan::DEFAULT_QUADRATURE_TOL;
use meso_ent::quadrature::{
    gaussian_state_duan, homodyne_sample, lossy_duan, number_state_duan, numeric_moments,
    richter_estimate, ConditionedState, DuanReport, FockSuperposition, QuadratureMoments,
};
use meso_ent::scan::{apriori_curve, efficiency_sweep, find_max_n, region_scan, sigma_sweep, ScanOptions};
use meso_ent::{DetectionRecord, NoiseModel, TensorFunctionSpec};
use num_complex::Complex64;

use crate::output::{fmt_f64, Cell, Report};
use crate::{CliError, Grid, QuadratureKind, SweepKind};

const TABLE1_FIXTURE: &str = include_str!("../fixtures/table1.csv");

fn parse_fixture(text: &str) -> Result<Vec<(TensorFunctionSpec, u64)>, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.records()
        .map(|r| {
            let r = r?;
            let spec: TensorFunctionSpec = r[0].parse()?;
            let max_n = r[1]
                .parse()
                .map_err(|_| CliError::Usage(format!("fixture: bad MaxN `{}`", &r[1])))?;
            Ok((spec, max_n))
        })
        .collect()
}

pub fn table1(n_cap: u64, fixture: Option<&Path>, tail_eps: f64) -> Result<(Report, bool), CliError> {
    if n_cap == 0 {
        return Err(CliError::Usage("--n-cap must be positive".into()));
    }
    let rows = match fixture {
        Some(path) => parse_fixture(&fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?)?,
        None => parse_fixture(TABLE1_FIXTURE)?,
    };
    let mut rep = Report::new(
        "table1",
        "largest and smallest detected symmetric record n = m per tensor function, ideal detection",
        &["spec", "max_n", "min_n", "expected_max_n", "status"],
    );
    rep.config("n_cap", n_cap);
    rep.config("fixture", fixture.map_or("embedded".to_string(), |p| p.display().to_string()));
    rep.config("tail_eps", fmt_f64(tail_eps));
    let opts = ScanOptions {
        n_cap,
        tail_eps,
        ..ScanOptions::default()
    };
    let mut all_ok = true;
    let (mut matched, mut capped) = (0u64, 0u64);
    for (spec, expected) in rows {
        let scan = find_max_n(&spec, &NoiseModel::Ideal, &opts)?;
        let (max_cell, min_cell, status) = match &scan {
            Some(d) if d.hit_cap => (Cell::from("capped"), Cell::from(d.min_n), "capped"),
            None if n_cap < expected => (Cell::from("capped"), Cell::Empty, "capped"),
            Some(d) if d.max_n == expected => (Cell::from(d.max_n), Cell::from(d.min_n), "match"),
            Some(d) => (Cell::from(d.max_n), Cell::from(d.min_n), "mismatch"),
            None => (Cell::Empty, Cell::Empty, "mismatch"),
        };
        match status {
            "match" => matched += 1,
            "capped" => capped += 1,
            _ => all_ok = false,
        }
        rep.row(vec![spec.label().into(), max_cell, min_cell, expected.into(), status.into()]);
    }
    rep.summary("matched", matched);
    rep.summary("capped", capped);
    rep.summary("fixture_ok", all_ok);
    Ok((rep, all_ok))
}

fn parse_model(s: &str) -> Result<NoiseModel, CliError> {
    Ok(s.parse::<NoiseModel>()?)
}

pub fn region(
    spec: &TensorFunctionSpec,
    model: &str,
    grid: Grid,
    alpha: Option<f64>,
    tail_eps: f64,
) -> Result<Report, CliError> {
    let model = parse_model(model)?;
    let scan = region_scan(spec, &model, grid.n - 1, grid.m - 1, alpha, tail_eps)?;
    let mut rep = Report::new(
        "region",
        "entanglement-detectable region over the (n, m) grid of Stokes records",
        &["n", "m", "detected", "weight"],
    );
    rep.config("spec", spec.label());
    rep.config("model", model);
    rep.config("grid", grid);
    rep.config("alpha", alpha.map_or("none".to_string(), fmt_f64));
    rep.config("tail_eps", fmt_f64(tail_eps));
    let mut weight_sum = 0.0;
    for n in 0..grid.n {
        for m in 0..grid.m {
            let w = alpha.map(|a| thermal_probability(a, n) * thermal_probability(a, m));
            weight_sum += w.unwrap_or(0.0);
            rep.row(vec![n.into(), m.into(), scan.contains(n, m).into(), w.into()]);
        }
    }
    let diagonal = scan.region.iter().filter(|p| p.n == p.m).count() as u64;
    rep.summary("detected_cells", scan.region.len() as u64);
    rep.summary("diagonal_detected", diagonal);
    rep.summary("min_n", scan.min_n);
    rep.summary("max_n", scan.max_n);
    if alpha.is_some() {
        rep.summary("weight_sum", weight_sum);
        rep.summary("apriori_probability", scan.apriori_probability);
    }
    Ok(rep)
}

/// Named detection configurations for the photoelectron distribution.
pub fn preset(name: &str) -> Result<NoiseModel, CliError> {
    match name {
        "ideal" => Ok(NoiseModel::Ideal),
        "loss50" => Ok(NoiseModel::readout_loss(0.5, 0.5)?),
        "eff90" => Ok(NoiseModel::efficiency(0.9, 0.9)?),
        "gauss2" => Ok(NoiseModel::gaussian(2.0, 2.0)?),
        other => parse_model(other),
    }
}

pub fn distribution(n: u64, m: u64, model: &str, tail_eps: f64) -> Result<Report, CliError> {
    let name = model;
    let model = preset(model)?;
    let rec = DetectionRecord::new(n, m);
    let p = match model {
        NoiseModel::ReadoutLoss { eta_a, eta_b } => lossy_photoelectron_distribution(rec, eta_a, eta_b)?,
        _ => mixed_marginal_vector(rec, &model, tail_eps)?,
    };
    let mut rep = Report::new(
        "distribution",
        "anti-Stokes photoelectron-number distribution of cell A given the Stokes record",
        &["r", "p"],
    );
    rep.config("n", n);
    rep.config("m", m);
    rep.config("preset", name);
    rep.config("model", model);
    rep.config("tail_eps", fmt_f64(tail_eps));
    for (r, pr) in p.iter().enumerate() {
        rep.row(vec![(r as u64).into(), (*pr).into()]);
    }
    let sum: f64 = p.iter().sum();
    let mean: f64 = p.iter().enumerate().map(|(r, v)| r as f64 * v).sum();
    rep.summary("sum", sum);
    rep.summary("mean", mean);
    Ok(rep)
}

fn steps(from: i64, to: i64, step: i64, scale: f64) -> Vec<f64> {
    let n = (to - from) / step;
    (0..=n).map(|i| (from + i * step) as f64 / scale).collect()
}

pub fn sweep(
    kind: SweepKind,
    spec: &TensorFunctionSpec,
    values: Option<&[f64]>,
    n_cap: u64,
    tail_eps: f64,
) -> Result<Report, CliError> {
    let opts = ScanOptions {
        n_cap,
        tail_eps,
        ..ScanOptions::default()
    };
    let values: Vec<f64> = match (values, kind) {
        (Some(v), _) => v.to_vec(),
        (None, SweepKind::Efficiency) => steps(100, 50, -5, 100.0),
        (None, SweepKind::Sigma) => steps(5, 60, 5, 10.0),
        (None, SweepKind::Apriori) => steps(0, 15, 1, 10.0),
    };
    if values.is_empty() {
        return Err(CliError::Usage("--values must not be empty".into()));
    }
    let mut rep = match kind {
        SweepKind::Efficiency => Report::new(
            "sweep efficiency",
            "detected window versus Stokes detector efficiency",
            &["eta", "min_n", "max_n"],
        ),
        SweepKind::Sigma => Report::new(
            "sweep sigma",
            "detected window versus Stokes detector noise standard deviation",
            &["sigma", "min_n", "max_n"],
        ),
        SweepKind::Apriori => Report::new(
            "sweep apriori",
            "a-priori entanglement detection probability versus squeezing",
            &["alpha", "probability"],
        ),
    };
    rep.config("spec", spec.label());
    rep.config(
        "values",
        values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","),
    );
    rep.config("n_cap", n_cap);
    rep.config("tail_eps", fmt_f64(tail_eps));
    match kind {
        SweepKind::Efficiency => {
            let s = efficiency_sweep(spec, &values, &opts)?;
            for p in &s.points {
                rep.row(vec![p.parameter.into(), p.min_n.into(), p.max_n.into()]);
            }
            rep.summary("fit_slope", s.fit.map(|f| f.slope));
            rep.summary("fit_intercept", s.fit.map(|f| f.intercept));
            rep.summary("fit_rms_residual", s.fit.map(|f| f.rms_residual));
        }
        SweepKind::Sigma => {
            let s = sigma_sweep(spec, &values, &opts)?;
            for p in &s.points {
                rep.row(vec![p.parameter.into(), p.min_n.into(), p.max_n.into()]);
            }
            rep.summary("closure_sigma", s.closure.map(|c| c.sigma()));
            rep.summary("closure_last_open", s.closure.map(|c| c.last_open));
            rep.summary("closure_first_closed", s.closure.map(|c| c.first_closed));
            rep.summary("closure_last_min_n", s.closure.map(|c| c.last_window.0));
            rep.summary("closure_last_max_n", s.closure.map(|c| c.last_window.1));
        }
        SweepKind::Apriori => {
            let probs = apriori_curve(spec, &values, tail_eps)?;
            for (a, p) in values.iter().zip(&probs) {
                rep.row(vec![(*a).into(), (*p).into()]);
            }
            let (best, arg) = values
                .iter()
                .zip(&probs)
                .fold((f64::NEG_INFINITY, f64::NAN), |acc, (a, p)| if *p > acc.0 { (*p, *a) } else { acc });
            rep.summary("max_probability", best);
            rep.summary("argmax_alpha", arg);
        }
    }
    Ok(rep)
}

pub struct QuadratureArgs {
    pub n: u64,
    pub m: u64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub eta: Option<f64>,
    pub state: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

fn duan_rows(rep: &mut Report, analytic: &DuanReport, numeric: &QuadratureMoments, eta: Option<f64>) -> Result<(), CliError> {
    let num = numeric.report();
    rep.row(vec!["var_q_sum".into(), analytic.var_q_sum.into(), num.var_q_sum.into()]);
    rep.row(vec!["var_p_diff".into(), analytic.var_p_diff.into(), num.var_p_diff.into()]);
    rep.row(vec!["total".into(), analytic.total.into(), num.total.into()]);
    rep.row(vec!["mean_q_sum".into(), Cell::Empty, numeric.mean_q_sum.into()]);
    rep.row(vec!["mean_p_diff".into(), Cell::Empty, numeric.mean_p_diff.into()]);
    rep.summary("total", analytic.total);
    rep.summary("entangled_detected", analytic.entangled_detected);
    if let Some(eta) = eta {
        let lossy = lossy_duan(analytic, eta)?;
        rep.summary("lossy_total", lossy.total);
        rep.summary("lossy_entangled_detected", lossy.entangled_detected);
    }
    Ok(())
}

pub fn quadrature(kind: QuadratureKind, a: &QuadratureArgs) -> Result<Report, CliError> {
    match kind {
        QuadratureKind::DuanNumber => {
            let rec = DetectionRecord::new(a.n, a.m);
            let mut rep = Report::new(
                "quadrature duan-number",
                "quadrature variance sum for the number-conditioned anti-Stokes state",
                &["quantity", "analytic", "numeric"],
            );
            rep.config("n", a.n);
            rep.config("m", a.m);
            rep.config("eta", a.eta.map_or("none".to_string(), fmt_f64));
            let numeric = numeric_moments(ConditionedState::Number(rec), DEFAULT_QUADRATURE_TOL)?;
            duan_rows(&mut rep, &number_state_duan(rec), &numeric, a.eta)?;
            Ok(rep)
        }
        QuadratureKind::DuanGaussian => {
            let mut rep = Report::new(
                "quadrature duan-gaussian",
                "quadrature variance sum for the quadrature-conditioned anti-Stokes state",
                &["quantity", "analytic", "numeric"],
            );
            rep.config("alpha", fmt_f64(a.alpha));
            rep.config("p", fmt_f64(a.p));
            rep.config("q", fmt_f64(a.q));
            rep.config("eta", a.eta.map_or("none".to_string(), fmt_f64));
            let analytic = gaussian_state_duan(a.alpha, a.p, a.q)?;
            let st = ConditionedState::gaussian(a.alpha, a.p, a.q)?;
            let numeric = numeric_moments(st, DEFAULT_QUADRATURE_TOL)?;
            duan_rows(&mut rep, &analytic, &numeric, a.eta)?;
            Ok(rep)
        }
        QuadratureKind::RichterDemo => {
            if a.samples == 0 {
                return Err(CliError::Usage("--samples must be positive".into()));
            }
            let st = FockSuperposition::new(a.state.iter().map(|&c| Complex64::new(c, 0.0)).collect())?;
            let samples = homodyne_sample(&st, a.samples, a.seed)?;
            let mut rep = Report::new(
                "quadrature richter-demo",
                "normally ordered moments reconstructed from phase-randomized homodyne samples",
                &["k", "l", "estimate_re", "estimate_im", "se_re", "se_im", "exact_re", "exact_im", "within_3se"],
            );
            rep.config(
                "state",
                a.state.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","),
            );
            rep.config("samples", a.samples);
            rep.config("seed", a.seed);
            let mut all = true;
            for (k, l) in [(0usize, 0usize), (1, 1), (0, 1), (1, 0), (2, 2)] {
                let est = richter_estimate(&samples, k, l)?;
                let exact = st.normal_moment(k, l);
                let close = |d: f64, se: f64| d.abs() <= 3.0 * se || d.abs() < 1e-12;
                let ok = close(est.value.re - exact.re, est.std_error_re)
                    && close(est.value.im - exact.im, est.std_error_im);
                all &= ok;
                rep.row(vec![
                    (k as u64).into(),
                    (l as u64).into(),
                    est.value.re.into(),
                    est.value.im.into(),
                    est.std_error_re.into(),
                    est.std_error_im.into(),
                    exact.re.into(),
                    exact.im.into(),
                    ok.into(),
                ]);
            }
            rep.summary("all_within_3se", all);
            Ok(rep)
        }
    }
}
