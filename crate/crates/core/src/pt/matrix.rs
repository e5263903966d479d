//! Partially transposed moment matrices and entanglement verdicts.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::linalg::{
    characteristic_polynomial, charpoly_from_minors, negative_root_count,
    principal_minor_sets, principal_minors, to_integer, RatMatrix,
};
use super::moments::{contract, g_table};
use super::spec::TensorFunctionSpec;
use crate::error::{Error, Result};
use crate::exact::{falling_factorial, rational_from_f64, rational_to_f64};
use crate::fock::DetectionRecord;
use crate::noise::{stokes_posteriors, ConditionalDistribution, NoiseModel, DEFAULT_TAIL_EPS};

#[derive(Clone, Debug, PartialEq)]
pub enum Entries {
    Exact(RatMatrix),
    Real(DMatrix<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix {
    entries: Entries,
    transposed: bool,
}

impl MomentMatrix {
    pub fn exact(rows: RatMatrix, transposed: bool) -> Result<Self> {
        let r = rows.len();
        if rows.iter().any(|row| row.len() != r) {
            return Err(crate::error::invalid("matrix", "must be square"));
        }
        for i in 0..r {
            for j in i + 1..r {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Asymmetric { row: i, col: j });
                }
            }
        }
        Ok(MomentMatrix {
            entries: Entries::Exact(rows),
            transposed,
        })
    }

    pub fn real(m: DMatrix<f64>, transposed: bool) -> Result<Self> {
        if !m.is_square() {
            return Err(crate::error::invalid("matrix", "must be square"));
        }
        let tol = 1e-12 * m.amax().max(1.0);
        for i in 0..m.nrows() {
            for j in i + 1..m.ncols() {
                if (m[(i, j)] - m[(j, i)]).abs() > tol {
                    return Err(Error::Asymmetric { row: i, col: j });
                }
            }
        }
        Ok(MomentMatrix {
            entries: Entries::Real(m),
            transposed,
        })
    }

    pub fn dim(&self) -> usize {
        match &self.entries {
            Entries::Exact(rows) => rows.len(),
            Entries::Real(m) => m.nrows(),
        }
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn is_transposed(&self) -> bool {
        self.transposed
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.entries, Entries::Exact(_))
    }

    pub fn get_f64(&self, i: usize, j: usize) -> f64 {
        match &self.entries {
            Entries::Exact(rows) => rational_to_f64(&rows[i][j]),
            Entries::Real(m) => m[(i, j)],
        }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let r = self.dim();
        DMatrix::from_fn(r, r, |i, j| self.get_f64(i, j))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Real(f64),
}

impl Scalar {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => rational_to_f64(q),
            Scalar::Real(x) => *x,
        }
    }

    pub fn signum(&self) -> i8 {
        match self {
            Scalar::Exact(q) if q.is_positive() => 1,
            Scalar::Exact(q) if q.is_negative() => -1,
            Scalar::Exact(_) => 0,
            Scalar::Real(x) if *x > 0.0 => 1,
            Scalar::Real(x) if *x < 0.0 => -1,
            Scalar::Real(_) => 0,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            Scalar::Real(x) => write!(f, "{x:e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PTVerdict {
    pub determinant: Scalar,
    pub negative_eigenvalue_count: usize,
    /// Some examined principal minor is negative.
    pub minor_violation: bool,
    pub entangled_detected: bool,
}

fn point_factorials(n: u64, max_h: u64) -> Vec<BigRational> {
    (0..=max_h)
        .map(|h| BigRational::from_integer(falling_factorial(n, h)))
        .collect()
}

fn factorials(d: &ConditionalDistribution, max_h: u64) -> Vec<BigRational> {
    if d.is_delta() {
        point_factorials(d.support_offset(), max_h)
    } else {
        d.factorial_moments(max_h)
    }
}

/// Builds PT matrices for one tensor function, caching the `g(h)` tables.
///
/// Entry `(a, b)` is the moment with `(k, l) = (2(t_a − 1), 2(t_b − 1))`.
#[derive(Clone, Debug)]
pub struct PtMatrixBuilder {
    spec: TensorFunctionSpec,
    exponents: Vec<u64>,
    g: Vec<Vec<Vec<BigRational>>>,
}

impl PtMatrixBuilder {
    pub fn new(spec: &TensorFunctionSpec) -> Self {
        let exponents = spec.exponents();
        let g = exponents
            .iter()
            .map(|&k| exponents.iter().map(|&l| g_table(k, l)).collect())
            .collect();
        PtMatrixBuilder {
            spec: spec.clone(),
            exponents,
            g,
        }
    }

    pub fn spec(&self) -> &TensorFunctionSpec {
        &self.spec
    }

    fn max_order(&self) -> u64 {
        2 * *self.exponents.last().expect("nonempty spec")
    }

    fn assemble(&self, fc: &[BigRational], fd: &[BigRational]) -> RatMatrix {
        let r = self.exponents.len();
        let mut rows = vec![vec![BigRational::zero(); r]; r];
        for a in 0..r {
            for b in a..r {
                let kl = (self.exponents[a] + self.exponents[b]) as usize;
                let v = contract(&self.g[a][b], &fc[..=kl], &fd[..=kl]);
                rows[b][a] = v.clone();
                rows[a][b] = v;
            }
        }
        rows
    }

    /// Matrix for Stokes posteriors `pc`, `pd`; every entry is exact in the
    /// binary values of the posterior weights.
    pub fn from_posteriors(
        &self,
        pc: &ConditionalDistribution,
        pd: &ConditionalDistribution,
    ) -> RatMatrix {
        let max_h = self.max_order();
        let fc = factorials(pc, max_h);
        let fd = if pc == pd { fc.clone() } else { factorials(pd, max_h) };
        self.assemble(&fc, &fd)
    }

    pub fn build(&self, rec: DetectionRecord, model: &NoiseModel, tail_eps: f64) -> Result<MomentMatrix> {
        let (pc, pd) = stokes_posteriors(model, rec, tail_eps)?;
        let mut rows = self.from_posteriors(&pc, &pd);
        if let NoiseModel::ReadoutLoss { eta_a, eta_b } = *model {
            // (√(η_A η_B))^{k+l} with k + l even
            let p = rational_from_f64(eta_a) * rational_from_f64(eta_b);
            for (a, row) in rows.iter_mut().enumerate() {
                for (b, v) in row.iter_mut().enumerate() {
                    let e = (self.exponents[a] + self.exponents[b]) / 2;
                    *v *= num_traits::pow(p.clone(), e as usize);
                }
            }
        }
        MomentMatrix::exact(rows, true)
    }
}

/// Matrix for explicit Stokes posteriors.
pub fn build_pt_matrix_posterior(
    spec: &TensorFunctionSpec,
    pc: &ConditionalDistribution,
    pd: &ConditionalDistribution,
) -> Result<MomentMatrix> {
    MomentMatrix::exact(PtMatrixBuilder::new(spec).from_posteriors(pc, pd), true)
}

pub fn build_pt_matrix(
    spec: &TensorFunctionSpec,
    rec: DetectionRecord,
    model: &NoiseModel,
) -> Result<MomentMatrix> {
    build_pt_matrix_with_tail(spec, rec, model, DEFAULT_TAIL_EPS)
}

pub fn build_pt_matrix_with_tail(
    spec: &TensorFunctionSpec,
    rec: DetectionRecord,
    model: &NoiseModel,
    tail_eps: f64,
) -> Result<MomentMatrix> {
    PtMatrixBuilder::new(spec).build(rec, model, tail_eps)
}

pub fn verdict(matrix: &MomentMatrix) -> PTVerdict {
    match matrix.entries() {
        Entries::Exact(rows) => exact_verdict(rows),
        Entries::Real(m) => real_verdict(m),
    }
}

fn exact_verdict(rows: &RatMatrix) -> PTVerdict {
    let r = rows.len();
    let sets = principal_minor_sets(r);
    // scaling by the common denominator L > 0 preserves every sign
    let (ints, l) = to_integer(rows);
    let minors = principal_minors(&ints, &sets);
    let minor_violation = minors.iter().any(|d| d.is_negative());
    let det = minors.last().expect("the full index set comes last").clone();
    let negative = if r <= 4 {
        negative_root_count(&charpoly_from_minors(r, &sets, &minors))
    } else {
        let ints_q: RatMatrix = ints
            .iter()
            .map(|row| row.iter().cloned().map(BigRational::from_integer).collect())
            .collect();
        negative_root_count(&characteristic_polynomial(&ints_q))
    };
    PTVerdict {
        determinant: Scalar::Exact(BigRational::new(det, num_traits::pow(l, r))),
        negative_eigenvalue_count: negative,
        minor_violation,
        entangled_detected: negative > 0 || minor_violation,
    }
}

fn real_verdict(m: &DMatrix<f64>) -> PTVerdict {
    let r = m.nrows();
    let norm = m.norm().max(f64::MIN_POSITIVE);
    let thr = 1e-10 * norm;
    let eig = m.clone().symmetric_eigen().eigenvalues;
    let negative = eig.iter().filter(|&&e| e < -thr).count();
    let minor_violation = principal_minor_sets(r).iter().any(|idx| {
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
        sub.determinant() < -1e-10 * norm.powi(idx.len() as i32)
    });
    PTVerdict {
        determinant: Scalar::Real(m.determinant()),
        negative_eigenvalue_count: negative,
        minor_violation,
        entangled_detected: negative > 0 || minor_violation,
    }
}

/// `−(3/4)n + (11/8)n² − (7/4)n³ + (1/8)n⁴`.
pub fn det_f12_closed_form(n: u64) -> BigRational {
    let n = BigInt::from(n);
    let terms = [(-6, 1u32), (11, 2), (-14, 3), (1, 4)];
    terms
        .iter()
        .map(|&(c, p)| BigRational::new(BigInt::from(c) * num_traits::pow(n.clone(), p as usize), BigInt::from(8)))
        .sum()
}
