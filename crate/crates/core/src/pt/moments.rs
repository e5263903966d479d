//! Closed-form partial-transpose moments `⟨a†^k b†^l a^k b^l⟩`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{binomial, falling_factorial, rational_to_f64};
use crate::fock::DetectionRecord;
use crate::noise::{stokes_posteriors, ConditionalDistribution, NoiseModel};

/// `g(h) = 2^{−(k+l)} Σ_{r,i} (−1)^{r+i} C(k,r) C(l,h−r) C(l,i) C(k,h−i)`.
pub fn g_coefficient(k: u64, l: u64, h: u64) -> BigRational {
    let h = h as i64;
    let mut a = BigInt::zero();
    for r in 0..=k {
        let t = binomial(k, r as i64) * binomial(l, h - r as i64);
        if r % 2 == 0 {
            a += t;
        } else {
            a -= t;
        }
    }
    let mut b = BigInt::zero();
    for i in 0..=l {
        let t = binomial(l, i as i64) * binomial(k, h - i as i64);
        if i % 2 == 0 {
            b += t;
        } else {
            b -= t;
        }
    }
    BigRational::new(a * b, BigInt::one() << (k + l) as usize)
}

/// `g(0..=k+l)`.
pub fn g_table(k: u64, l: u64) -> Vec<BigRational> {
    (0..=k + l).map(|h| g_coefficient(k, l, h)).collect()
}

/// `Σ_h g(h) F_C(h) F_D(k+l−h)` for factorial-moment tables of the two
/// Stokes modes.
pub(crate) fn contract(g: &[BigRational], fc: &[BigRational], fd: &[BigRational]) -> BigRational {
    let kl = g.len() - 1;
    let mut acc = BigRational::zero();
    for (h, gh) in g.iter().enumerate() {
        if gh.is_zero() || fc[h].is_zero() || fd[kl - h].is_zero() {
            continue;
        }
        acc += gh * &fc[h] * &fd[kl - h];
    }
    acc
}

fn point_factorials(n: u64, max_h: u64) -> Vec<BigRational> {
    (0..=max_h)
        .map(|h| BigRational::from_integer(falling_factorial(n, h)))
        .collect()
}

/// Exact moment for known Stokes numbers.
pub fn pt_moment_ideal(k: u64, l: u64, rec: DetectionRecord) -> BigRational {
    contract(
        &g_table(k, l),
        &point_factorials(rec.n, k + l),
        &point_factorials(rec.m, k + l),
    )
}

/// Moment averaged over the posteriors `pc`, `pd`. Exact in the binary
/// values of the posterior weights.
pub fn pt_moment_posterior(
    k: u64,
    l: u64,
    pc: &ConditionalDistribution,
    pd: &ConditionalDistribution,
) -> BigRational {
    contract(
        &g_table(k, l),
        &pc.factorial_moments(k + l),
        &pd.factorial_moments(k + l),
    )
}

/// Moment under detector efficiency or Gaussian noise on the Stokes counts.
pub fn pt_moment_noisy(
    k: u64,
    l: u64,
    rec: DetectionRecord,
    model: &NoiseModel,
    tail_eps: f64,
) -> Result<f64> {
    if !model.is_detector_noise() && *model != NoiseModel::Ideal {
        return Err(Error::UnsupportedModel(model.to_string()));
    }
    let (pc, pd) = stokes_posteriors(model, rec, tail_eps)?;
    Ok(rational_to_f64(&pt_moment_posterior(k, l, &pc, &pd)))
}

/// Moment after readout loss: `(√(η_A η_B))^{k+l}` times the ideal moment.
pub fn pt_moment_lossy(k: u64, l: u64, rec: DetectionRecord, eta_a: f64, eta_b: f64) -> Result<f64> {
    NoiseModel::readout_loss(eta_a, eta_b)?;
    let scale = (eta_a * eta_b).sqrt().powi((k + l) as i32);
    Ok(scale * rational_to_f64(&pt_moment_ideal(k, l, rec)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{gaussian_posterior, DEFAULT_TAIL_EPS};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_table(1, 1), vec![q(1, 4), q(0, 1), q(1, 4)]);
        assert_eq!(g_table(0, 0), vec![q(1, 1)]);
    }

    #[test]
    fn ideal_examples() {
        assert_eq!(pt_moment_ideal(1, 1, DetectionRecord::symmetric(10)), q(45, 1));
        assert_eq!(pt_moment_ideal(1, 1, DetectionRecord::symmetric(1)), q(0, 1));
        for n in 0..=12 {
            for (k, l) in [(0, 1), (1, 2), (3, 0), (2, 3)] {
                assert!(pt_moment_ideal(k, l, DetectionRecord::symmetric(n)).is_zero());
            }
        }
    }

    #[test]
    fn low_order_moments() {
        for n in 0..=15u64 {
            for m in 0..=15u64 {
                let rec = DetectionRecord::new(n, m);
                let (nn, mm) = (n as i64, m as i64);
                // ⟨a†b⟩ = ⟨b†a⟩ = (m − n)/2 in the Stokes basis
                assert_eq!(pt_moment_ideal(1, 0, rec), q(mm - nn, 2));
                assert_eq!(pt_moment_ideal(0, 1, rec), q(mm - nn, 2));
                assert_eq!(pt_moment_ideal(1, 1, rec), q(nn * nn + mm * mm - nn - mm, 4));
            }
        }
    }

    #[test]
    fn lossy_examples() {
        let rec = DetectionRecord::symmetric(10);
        assert_eq!(pt_moment_lossy(1, 1, rec, 1.0, 1.0).unwrap(), 45.0);
        assert!((pt_moment_lossy(1, 1, rec, 0.5, 0.5).unwrap() - 11.25).abs() < 1e-12);
    }

    #[test]
    fn noisy_perfect_detectors_reduce_to_ideal() {
        let rec = DetectionRecord::new(7, 4);
        let model = NoiseModel::efficiency(1.0, 1.0).unwrap();
        for (k, l) in [(2, 2), (4, 2), (0, 6)] {
            let v = pt_moment_noisy(k, l, rec, &model, DEFAULT_TAIL_EPS).unwrap();
            assert_eq!(v, rational_to_f64(&pt_moment_ideal(k, l, rec)));
        }
    }

    #[test]
    fn noisy_efficiency_matches_direct_sum() {
        let rec = DetectionRecord::symmetric(10);
        let model = NoiseModel::efficiency(0.9, 0.9).unwrap();
        let v = pt_moment_noisy(1, 1, rec, &model, DEFAULT_TAIL_EPS).unwrap();
        assert!(v >= 45.0);
        // truncated double sum over the posterior of ideal moments
        let (pc, pd) = stokes_posteriors(&model, rec, DEFAULT_TAIL_EPS).unwrap();
        let mut direct = 0.0;
        for (i, wi) in pc.iter() {
            for (j, wj) in pd.iter() {
                direct += wi * wj * rational_to_f64(&pt_moment_ideal(1, 1, DetectionRecord::new(i, j)));
            }
        }
        assert!((v - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn noisy_gaussian_matches_sampling() {
        let rec = DetectionRecord::symmetric(10);
        let model = NoiseModel::gaussian(2.0, 2.0).unwrap();
        let v = pt_moment_noisy(1, 1, rec, &model, DEFAULT_TAIL_EPS).unwrap();
        let post = gaussian_posterior(10, 2.0, DEFAULT_TAIL_EPS).unwrap();
        let cdf: Vec<f64> = post
            .weights()
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        let draw = |rng: &mut ChaCha8Rng| {
            let u: f64 = rng.random();
            post.support_offset() + cdf.iter().position(|&c| c >= u).unwrap_or(cdf.len() - 1) as u64
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..samples {
            let (i, j) = (draw(&mut rng), draw(&mut rng));
            let x = rational_to_f64(&pt_moment_ideal(1, 1, DetectionRecord::new(i, j)));
            s += x;
            s2 += x * x;
        }
        let mean = s / samples as f64;
        let se = ((s2 / samples as f64 - mean * mean) / samples as f64).sqrt();
        assert!((v - mean).abs() < 3.0 * se, "{v} vs {mean} ± {se}");
    }

    proptest! {
        #[test]
        fn lossy_sign_follows_ideal(k in 0u64..6, l in 0u64..6, n in 0u64..20, m in 0u64..20, eta in 0.01f64..1.0) {
            let rec = DetectionRecord::new(n, m);
            let ideal = rational_to_f64(&pt_moment_ideal(k, l, rec));
            let lossy = pt_moment_lossy(k, l, rec, eta, eta).unwrap();
            prop_assert_eq!(ideal.partial_cmp(&0.0), lossy.partial_cmp(&0.0));
        }

        #[test]
        fn g_symmetries(k in 0u64..8, l in 0u64..8) {
            // the two binomial convolutions swap under k ↔ l, and each is
            // palindromic up to (−1)^k or (−1)^l
            let a = g_table(k, l);
            prop_assert_eq!(&a, &g_table(l, k));
            let kl = (k + l) as usize;
            for h in 0..=kl {
                let mirrored = if (k + l) % 2 == 0 { a[kl - h].clone() } else { -a[kl - h].clone() };
                prop_assert_eq!(&a[h], &mirrored);
            }
        }
    }
}
