//! Exact combinatorics, surd scalars and the Hermite special functions.
//!
//! Everything integer- or rational-valued here is computed without rounding.
//! Conversion to `f64` is always an explicit call.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Mul, Neg};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// C(n, k). Zero outside `0 <= k <= n`.
pub fn binomial(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc *= n - j;
        acc /= j + 1;
    }
    acc
}

/// n! / (n - h)!, the number of ordered ways to remove `h` quanta from `n`.
/// Zero when `h > n`.
pub fn falling_factorial(n: u64, h: u64) -> BigInt {
    if h > n {
        return BigInt::zero();
    }
    (0..h).fold(BigInt::one(), |acc, j| acc * (n - j))
}

pub fn factorial(n: u64) -> BigInt {
    falling_factorial(n, n)
}

/// Physicists' Hermite polynomial H_k(x) by the three-term recurrence.
pub fn hermite(k: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for j in 1..k {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Orthonormal oscillator eigenfunction
/// φ_n(x) = (2^n n! √π)^{-1/2} H_n(x) e^{-x²/2}.
///
/// Runs the normalized recurrence without the Gaussian factor and rescales
/// as it goes, so large `n` and large `|x|` neither overflow nor flush to
/// zero early.
pub fn hermite_gaussian(n: usize, x: f64) -> f64 {
    const BIG: f64 = 1e150;
    let mut log_scale = 0.0f64;
    let mut prev = PI.powf(-0.25);
    if n == 0 {
        return prev * (-0.5 * x * x).exp();
    }
    let mut cur = std::f64::consts::SQRT_2 * x * prev;
    for j in 1..n {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += BIG.ln();
        }
    }
    if cur == 0.0 {
        return 0.0;
    }
    cur.signum() * (cur.abs().ln() + log_scale - 0.5 * x * x).exp()
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn sqrt_exact(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let num = q.numer();
    let den = q.denom();
    let rn = num.sqrt();
    let rd = den.sqrt();
    if &(&rn * &rn) == num && &(&rd * &rd) == den {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

/// The exact binary value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Converts a rational to the nearest `f64` (may overflow to ±inf).
pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// A real number of the form `coeff · √radicand` with rational parts.
///
/// Beam-splitter coefficients and Fock amplitudes live in this set; products
/// of two of them are often rational again, which [`Surd::to_rational`]
/// detects exactly.
#[derive(Clone, Debug)]
pub struct Surd {
    coeff: BigRational,
    radicand: BigRational,
}

impl Surd {
    pub fn new(coeff: BigRational, radicand: BigRational) -> Self {
        assert!(!radicand.is_negative(), "negative radicand");
        if coeff.is_zero() || radicand.is_zero() {
            return Self::zero();
        }
        Surd { coeff, radicand }
    }

    pub fn zero() -> Self {
        Surd {
            coeff: BigRational::zero(),
            radicand: BigRational::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self::new(q, BigRational::one())
    }

    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn radicand(&self) -> &BigRational {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.coeff.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// The exact square `coeff² · radicand`.
    pub fn square(&self) -> BigRational {
        &self.coeff * &self.coeff * &self.radicand
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        sqrt_exact(&self.radicand).map(|r| r * &self.coeff)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.signum() as f64 * rational_to_f64(&self.square()).sqrt()
    }
}

impl PartialEq for Surd {
    fn eq(&self, other: &Self) -> bool {
        self.signum() == other.signum() && self.square() == other.square()
    }
}

impl Eq for Surd {}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.signum().cmp(&other.signum()) {
            Ordering::Equal => {
                let mag = self.square().cmp(&other.square());
                if self.signum() < 0 {
                    mag.reverse()
                } else {
                    mag
                }
            }
            ord => ord,
        }
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            coeff: -self.coeff,
            radicand: self.radicand,
        }
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        Surd::new(&self.coeff * &rhs.coeff, &self.radicand * &rhs.radicand)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_rational() {
            Some(q) => write!(f, "{q}"),
            None => write!(f, "{}*sqrt({})", self.coeff, self.radicand),
        }
    }
}

/// Accumulates `Σ wᵢ·xᵢ / Σ wᵢ` exactly for nonnegative `f64` weights.
///
/// Each weight is taken at its exact binary value and shifted onto a common
/// power-of-two grid, so the normalization is exact even though the weights
/// themselves came out of floating-point evaluation.
#[derive(Clone, Debug)]
pub struct DyadicWeights {
    scaled: Vec<BigInt>,
    total: BigInt,
    shift: i32,
}

impl DyadicWeights {
    pub fn new(weights: &[f64]) -> Self {
        let parts: Vec<(u64, i32)> = weights
            .iter()
            .map(|&w| {
                assert!(w.is_finite() && w >= 0.0, "weight must be finite and nonnegative");
                decode(w)
            })
            .collect();
        let shift = parts
            .iter()
            .filter(|(m, _)| *m != 0)
            .map(|&(_, e)| e)
            .min()
            .unwrap_or(0);
        let scaled: Vec<BigInt> = parts
            .iter()
            .map(|&(m, e)| {
                if m == 0 {
                    BigInt::zero()
                } else {
                    BigInt::from(m) << ((e - shift) as usize)
                }
            })
            .collect();
        let total = scaled.iter().sum();
        DyadicWeights {
            scaled,
            total,
            shift,
        }
    }

    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    /// Exact probability of entry `idx` after normalization.
    pub fn probability(&self, idx: usize) -> BigRational {
        BigRational::new(self.scaled[idx].clone(), self.total.clone())
    }

    /// Exact expectation of `values[idx]` under the normalized weights.
    pub fn expect(&self, values: impl IntoIterator<Item = BigInt>) -> BigRational {
        let acc: BigInt = self
            .scaled
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum();
        BigRational::new(acc, self.total.clone())
    }

    /// Power-of-two exponent of the common grid (diagnostic).
    pub fn shift(&self) -> i32 {
        self.shift
    }
}

fn decode(x: f64) -> (u64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    }
}
