//! Conditional photon-number correlation between the two anti-Stokes fields.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exact::{rational_from_f64, rational_to_f64};
use crate::fock::{conditioned_state, DetectionRecord};
use crate::noise::{lossy_joint_distribution_exact, stokes_posteriors, NoiseModel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Correlation {
    Defined(f64),
    /// One of the photon numbers is deterministic.
    Undefined,
}

impl Correlation {
    pub fn value(&self) -> Option<f64> {
        match self {
            Correlation::Defined(c) => Some(*c),
            Correlation::Undefined => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub mean_na: f64,
    pub mean_nb: f64,
    pub mean_nanb: f64,
    pub mean_na2: f64,
    pub mean_nb2: f64,
    pub var_na: f64,
    pub var_nb: f64,
    pub c: Correlation,
}

/// Builds a report from exact first and second moments. When the variances
/// coincide the correlation is the exact ratio `cov / var`.
fn report(
    mean_a: BigRational,
    mean_b: BigRational,
    mean_ab: BigRational,
    mean_a2: BigRational,
    mean_b2: BigRational,
) -> CorrelationReport {
    let var_a = &mean_a2 - &mean_a * &mean_a;
    let var_b = &mean_b2 - &mean_b * &mean_b;
    let cov = &mean_ab - &mean_a * &mean_b;
    let c = if !var_a.is_positive() || !var_b.is_positive() {
        Correlation::Undefined
    } else if var_a == var_b {
        Correlation::Defined(rational_to_f64(&(&cov / &var_a)))
    } else {
        let denom = (rational_to_f64(&var_a) * rational_to_f64(&var_b)).sqrt();
        Correlation::Defined(rational_to_f64(&cov) / denom)
    };
    CorrelationReport {
        mean_na: rational_to_f64(&mean_a),
        mean_nb: rational_to_f64(&mean_b),
        mean_nanb: rational_to_f64(&mean_ab),
        mean_na2: rational_to_f64(&mean_a2),
        mean_nb2: rational_to_f64(&mean_b2),
        var_na: rational_to_f64(&var_a),
        var_nb: rational_to_f64(&var_b),
        c,
    }
}

fn int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn quarter() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(4))
}

/// Heisenberg-picture moments for perfectly known Stokes numbers.
pub fn ideal_correlation(rec: DetectionRecord) -> CorrelationReport {
    let (n, m) = (int(rec.n), int(rec.m));
    let q = quarter();
    let mean = (&n + &m) / BigInt::from(2);
    let ab = &q * (&n * &n + &m * &m - &n - &m);
    let a2 = &q * (&n * &n + &m * &m + &n * &m * BigInt::from(4) + &n + &m);
    report(mean.clone(), mean, ab, a2.clone(), a2)
}

/// Moments averaged over the detector posteriors `p_C(i|n) p_D(j|m)`.
///
/// The binary values of the posterior weights are averaged exactly, so the
/// result carries no rounding beyond the posteriors themselves.
pub fn uncertain_stokes_correlation(
    rec: DetectionRecord,
    model: &NoiseModel,
    tail_eps: f64,
) -> Result<CorrelationReport> {
    if !model.is_detector_noise() && *model != NoiseModel::Ideal {
        return Err(Error::UnsupportedModel(model.to_string()));
    }
    let (pc, pd) = stokes_posteriors(model, rec, tail_eps)?;
    let mi = pc.raw_moments(2);
    let mj = pd.raw_moments(2);
    let q = quarter();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let (ei, ei2, ej, ej2) = (&mi[1], &mi[2], &mj[1], &mj[2]);
    let eij = ei * ej;
    let mean = &half * (ei + ej);
    let ab = &q * (ei2 + ej2 - ei - ej);
    let a2 = &q * (ei2 + ej2 + ei + ej + &eij * BigInt::from(4));
    Ok(report(mean.clone(), mean, ab, a2.clone(), a2))
}

/// Closed-form correlation after symmetric readout loss η.
pub fn lossy_correlation(rec: DetectionRecord, eta: f64) -> Result<CorrelationReport> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", format!("must lie in [0, 1], got {eta}")));
    }
    let e = rational_from_f64(eta);
    let (n, m) = (int(rec.n), int(rec.m));
    let q = quarter();
    let e2 = &e * &e;
    let mean = &e * (&n + &m) / BigInt::from(2);
    let ab = &q * &e2 * (&n * &n + &m * &m - &n - &m);
    let a2 = &q * &e2 * (&n * &n + &m * &m + &n * &m * BigInt::from(4) + &n + &m)
        + &e * (BigRational::one() - &e) * (&n + &m) / BigInt::from(2);
    Ok(report(mean.clone(), mean, ab, a2.clone(), a2))
}

/// `−1 / (1 + 2(1−η)/η · (n+m)/(n+m+2nm))`; `None` when undefined.
pub fn lossy_correlation_closed_form(rec: DetectionRecord, eta: f64) -> Option<f64> {
    let (n, m) = (rec.n as f64, rec.m as f64);
    if eta <= 0.0 || n + m == 0.0 {
        return None;
    }
    Some(-1.0 / (1.0 + 2.0 * (1.0 - eta) / eta * (n + m) / (n + m + 2.0 * n * m)))
}

fn joint_report(joint: &[Vec<BigRational>]) -> CorrelationReport {
    let [ma, mb, mab, ma2, mb2] = joint_report_exact(joint);
    report(ma, mb, mab, ma2, mb2)
}

fn ideal_joint(rec: DetectionRecord) -> Vec<Vec<BigRational>> {
    let total = rec.total() as usize;
    let mut joint = vec![vec![BigRational::zero(); total + 1]; total + 1];
    for (i, p) in conditioned_state(rec).probabilities_exact().into_iter().enumerate() {
        joint[i][total - i] = p;
    }
    joint
}

/// Correlation computed directly from the Fock-basis joint distribution.
///
/// Detector noise is handled by mixing the conditioned states over the
/// posteriors; readout loss traces out the vacuum modes, and unequal
/// transmissions are accepted.
pub fn schrodinger_correlation(
    rec: DetectionRecord,
    model: &NoiseModel,
    tail_eps: f64,
) -> Result<CorrelationReport> {
    model.validate()?;
    match *model {
        NoiseModel::Ideal => Ok(joint_report(&ideal_joint(rec))),
        NoiseModel::ReadoutLoss { eta_a, eta_b } => {
            let joint = lossy_joint_distribution_exact(
                rec,
                &rational_from_f64(eta_a),
                &rational_from_f64(eta_b),
            )?;
            Ok(joint_report(&joint))
        }
        _ => {
            let (pc, pd) = stokes_posteriors(model, rec, tail_eps)?;
            let wc = pc.dyadic();
            let wd = pd.dyadic();
            let mut acc = [(); 5].map(|_| BigRational::zero());
            for (a, (i, _)) in pc.iter().enumerate() {
                for (b, (j, _)) in pd.iter().enumerate() {
                    let w = wc.probability(a) * wd.probability(b);
                    let r = joint_report_exact(&ideal_joint(DetectionRecord::new(i, j)));
                    for (slot, v) in acc.iter_mut().zip(r) {
                        *slot += &w * v;
                    }
                }
            }
            let [ma, mb, mab, ma2, mb2] = acc;
            Ok(report(ma, mb, mab, ma2, mb2))
        }
    }
}

fn joint_report_exact(joint: &[Vec<BigRational>]) -> [BigRational; 5] {
    let mut out = [(); 5].map(|_| BigRational::zero());
    for (r, row) in joint.iter().enumerate() {
        for (s, p) in row.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let (r, s) = (int(r as u64), int(s as u64));
            out[0] += p * &r;
            out[1] += p * &s;
            out[2] += p * &r * &s;
            out[3] += p * &r * &r;
            out[4] += p * &s * &s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::DEFAULT_TAIL_EPS;

    fn c(r: &CorrelationReport) -> f64 {
        r.c.value().expect("defined")
    }

    #[test]
    fn ideal_examples() {
        let r = ideal_correlation(DetectionRecord::symmetric(10));
        assert_eq!(r.mean_nanb, 45.0);
        assert_eq!(r.mean_na, 10.0);
        assert_eq!(r.mean_na2, 155.0);
        assert_eq!(c(&r), -1.0);

        let r = ideal_correlation(DetectionRecord::symmetric(1));
        assert_eq!(r.mean_nanb, 0.0);
        assert_eq!(c(&r), -1.0);

        assert_eq!(ideal_correlation(DetectionRecord::new(0, 0)).c, Correlation::Undefined);
    }

    #[test]
    fn ideal_is_perfect_anticorrelation() {
        for n in 0..=50 {
            for m in 0..=50 {
                if n + m < 2 {
                    continue;
                }
                assert_eq!(c(&ideal_correlation(DetectionRecord::new(n, m))), -1.0);
            }
        }
    }

    #[test]
    fn lossy_examples() {
        let rec = DetectionRecord::symmetric(10);
        assert_eq!(c(&lossy_correlation(rec, 1.0).unwrap()), -1.0);
        let r = lossy_correlation(rec, 0.5).unwrap();
        assert!((c(&r) + 11.0 / 13.0).abs() < 1e-12);
        assert!((lossy_correlation_closed_form(rec, 0.5).unwrap() + 11.0 / 13.0).abs() < 1e-15);
        let big = lossy_correlation(DetectionRecord::symmetric(100), 0.5).unwrap();
        assert!((c(&big) + 101.0 / 103.0).abs() < 1e-12);
        assert_eq!(lossy_correlation(rec, 0.0).unwrap().c, Correlation::Undefined);
        assert!(lossy_correlation(rec, 1.1).is_err());
    }

    #[test]
    fn lossy_moments_match_closed_form() {
        for n in 1..=12 {
            for m in 0..=12 {
                for eta in [0.2, 0.5, 0.9] {
                    let rec = DetectionRecord::new(n, m);
                    let r = lossy_correlation(rec, eta).unwrap();
                    let cf = lossy_correlation_closed_form(rec, eta).unwrap();
                    assert!((c(&r) - cf).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lossy_monotone() {
        for n in 1..=20u64 {
            let mut prev = 0.0;
            for k in 1..=20 {
                let eta = k as f64 / 20.0;
                let v = c(&lossy_correlation(DetectionRecord::symmetric(n), eta).unwrap()).abs();
                assert!(v >= prev - 1e-15);
                prev = v;
            }
        }
        for eta in [0.1, 0.5, 0.9] {
            let mut prev = 0.0;
            for total in 2..=60u64 {
                let rec = DetectionRecord::new(total / 2, total - total / 2);
                let v = c(&lossy_correlation(rec, eta).unwrap()).abs();
                assert!(v >= prev - 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn heisenberg_matches_schrodinger() {
        let eps = DEFAULT_TAIL_EPS;
        for n in 0..=8 {
            for m in 0..=8 {
                let rec = DetectionRecord::new(n, m);
                let h = ideal_correlation(rec);
                let s = schrodinger_correlation(rec, &NoiseModel::Ideal, eps).unwrap();
                assert_eq!(h, s);

                let loss = NoiseModel::readout_loss(0.5, 0.5).unwrap();
                let h = lossy_correlation(rec, 0.5).unwrap();
                let s = schrodinger_correlation(rec, &loss, eps).unwrap();
                for (a, b) in [
                    (h.mean_na, s.mean_na),
                    (h.mean_nanb, s.mean_nanb),
                    (h.mean_na2, s.mean_na2),
                    (h.var_nb, s.var_nb),
                ] {
                    assert!((a - b).abs() < 1e-10);
                }
                match (h.c, s.c) {
                    (Correlation::Defined(a), Correlation::Defined(b)) => assert!((a - b).abs() < 1e-10),
                    (a, b) => assert_eq!(a, b),
                }
            }
        }
    }

    #[test]
    fn posterior_average_matches_mixture() {
        for model in [
            NoiseModel::efficiency(0.9, 0.9).unwrap(),
            NoiseModel::gaussian(2.0, 2.0).unwrap(),
        ] {
            for (n, m) in [(3, 3), (5, 2), (8, 8)] {
                let rec = DetectionRecord::new(n, m);
                let h = uncertain_stokes_correlation(rec, &model, DEFAULT_TAIL_EPS).unwrap();
                let s = schrodinger_correlation(rec, &model, DEFAULT_TAIL_EPS).unwrap();
                assert!((h.mean_nanb - s.mean_nanb).abs() < 1e-10 * h.mean_nanb.max(1.0));
                assert!((h.var_na - s.var_na).abs() < 1e-10 * h.var_na.max(1.0));
                assert!((c(&h) - c(&s)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn uncertain_stokes_perfect_detectors() {
        let rec = DetectionRecord::new(6, 4);
        let r = uncertain_stokes_correlation(rec, &NoiseModel::efficiency(1.0, 1.0).unwrap(), DEFAULT_TAIL_EPS)
            .unwrap();
        assert_eq!(r, ideal_correlation(rec));
    }

    #[test]
    fn uncertain_total_number_weakens_anticorrelation() {
        // cov + var = Var(i + j) / 2, so a spread posterior moves C above −1
        let rec = DetectionRecord::symmetric(10);
        let model = NoiseModel::efficiency(0.9, 0.9).unwrap();
        let r = uncertain_stokes_correlation(rec, &model, DEFAULT_TAIL_EPS).unwrap();
        let (pc, pd) = stokes_posteriors(&model, rec, DEFAULT_TAIL_EPS).unwrap();
        let var_total = pc.variance() + pd.variance();
        let cov = r.mean_nanb - r.mean_na * r.mean_nb;
        assert!((cov + r.var_na - var_total / 2.0).abs() < 1e-9);
        assert!(c(&r) > -1.0);
    }
}
