//! Fock-basis evaluation of the moments by explicit operator action.

use std::collections::HashMap;


use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::exact::{binomial, falling_factorial, rational_from_f64, Surd};
use crate::fock::{conditioned_state, sum_surds, DetectionRecord};
use crate::noise::NoiseModel;

pub const DEFAULT_ORACLE_BOUND: u64 = 60;

/// Pure state over `|a, b, v, u⟩`, where `v`, `u` are the vacuum modes that
/// absorb the photons lost from A and B.
#[derive(Clone, Debug)]
pub struct PurifiedState {
    terms: Vec<([u64; 4], Surd)>,
}

impl PurifiedState {
    /// The conditioned state with each mode sent through a beam splitter of
    /// transmission `η`. Amplitude signs of the loss splitter are dropped:
    /// every basis vector is reached from exactly one `i`, so they cancel in
    /// any moment of A and B.
    pub fn lossy(rec: DetectionRecord, eta_a: &BigRational, eta_b: &BigRational) -> Self {
        let state = conditioned_state(rec);
        let total = rec.total();
        let ones = BigRational::one();
        let mut terms = Vec::new();
        for (i, amp) in state.amplitudes().iter().enumerate() {
            if amp.is_zero() {
                continue;
            }
            let i = i as u64;
            let j = total - i;
            for r in 0..=i {
                let wa = BigRational::from_integer(binomial(i, r as i64))
                    * num_traits::pow(eta_a.clone(), r as usize)
                    * num_traits::pow(&ones - eta_a, (i - r) as usize);
                if wa.is_zero() {
                    continue;
                }
                for s in 0..=j {
                    let wb = BigRational::from_integer(binomial(j, s as i64))
                        * num_traits::pow(eta_b.clone(), s as usize)
                        * num_traits::pow(&ones - eta_b, (j - s) as usize);
                    if wb.is_zero() {
                        continue;
                    }
                    let split = Surd::new(BigRational::one(), &wa * wb);
                    terms.push(([r, s, i - r, j - s], amp * &split));
                }
            }
        }
        PurifiedState { terms }
    }

    pub fn ideal(rec: DetectionRecord) -> Self {
        let total = rec.total();
        let terms = conditioned_state(rec)
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| ([i as u64, total - i as u64, 0, 0], a.clone()))
            .collect();
        PurifiedState { terms }
    }

    /// `a^k b^l |ψ⟩`.
    pub fn lower(&self, k: u64, l: u64) -> Vec<([u64; 4], Surd)> {
        self.terms
            .iter()
            .filter(|(key, _)| key[0] >= k && key[1] >= l)
            .map(|(key, amp)| {
                let f = falling_factorial(key[0], k) * falling_factorial(key[1], l);
                let factor = Surd::new(BigRational::one(), BigRational::from_integer(f));
                ([key[0] - k, key[1] - l, key[2], key[3]], amp * &factor)
            })
            .collect()
    }

    /// `⟨a†^p b†^q a^r b^s⟩ = ⟨a^p b^q ψ | a^r b^s ψ⟩`, exactly. `None` if
    /// the terms do not share a common surd.
    pub fn moment(&self, p: u64, q: u64, r: u64, s: u64) -> Option<Surd> {
        let bra: HashMap<[u64; 4], Surd> = self.lower(p, q).into_iter().collect();
        let products: Vec<Surd> = self
            .lower(r, s)
            .iter()
            .filter_map(|(k, a)| bra.get(k).map(|b| b * a))
            .collect();
        sum_surds(&products)
    }

    /// `⟨a†^p b†^q a^r b^s⟩`, in floating point.
    pub fn moment_f64(&self, p: u64, q: u64, r: u64, s: u64) -> f64 {
        let bra: HashMap<[u64; 4], f64> = self
            .lower(p, q)
            .into_iter()
            .map(|(k, a)| (k, a.to_f64()))
            .collect();
        self.lower(r, s)
            .into_iter()
            .filter_map(|(k, a)| bra.get(&k).map(|b| b * a.to_f64()))
            .sum()
    }

    /// Partial-transpose moment `⟨a†^k b†^l a^l b^k⟩`.
    pub fn pt_moment(&self, k: u64, l: u64) -> Option<Surd> {
        self.moment(k, l, l, k)
    }
}

pub fn schrodinger_oracle_moment(
    k: u64,
    l: u64,
    rec: DetectionRecord,
    model: &NoiseModel,
) -> Result<Surd> {
    schrodinger_oracle_moment_bounded(k, l, rec, model, DEFAULT_ORACLE_BOUND)
}

pub fn schrodinger_oracle_moment_bounded(
    k: u64,
    l: u64,
    rec: DetectionRecord,
    model: &NoiseModel,
    bound: u64,
) -> Result<Surd> {
    if rec.total() > bound {
        return Err(Error::OracleBound {
            total: rec.total(),
            bound,
        });
    }
    model.validate()?;
    let state = match *model {
        NoiseModel::Ideal => PurifiedState::ideal(rec),
        NoiseModel::ReadoutLoss { eta_a, eta_b } => {
            PurifiedState::lossy(rec, &rational_from_f64(eta_a), &rational_from_f64(eta_b))
        }
        _ => return Err(Error::UnsupportedModel(model.to_string())),
    };
    state
        .pt_moment(k, l)
        .ok_or_else(|| invalid("moment", "terms do not share a common surd"))
}
