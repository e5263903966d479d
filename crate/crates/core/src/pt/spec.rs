use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Tensor function `f_{t1,t2,…}`: index `t` stands for the monomial
/// `a^{2(t−1)} b^{2(t−1)}`, so index 1 is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TensorFunctionSpec {
    indices: Vec<u32>,
}

impl TensorFunctionSpec {
    pub fn new(indices: Vec<u32>) -> Result<Self> {
        if indices.is_empty() {
            return Err(invalid("spec", "needs at least one index"));
        }
        if indices[0] == 0 {
            return Err(invalid("spec", "indices start at 1"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("spec", "indices must be strictly increasing"));
        }
        Ok(TensorFunctionSpec { indices })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Operator exponents `2(t − 1)` for each term.
    pub fn exponents(&self) -> Vec<u64> {
        self.indices.iter().map(|&t| 2 * (t as u64 - 1)).collect()
    }

    /// `Σ_t (t − 1)`.
    pub fn order_sum(&self) -> u64 {
        self.indices.iter().map(|&t| t as u64 - 1).sum()
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Every nonempty proper sub-spec, in lexicographic index order.
    pub fn proper_subspecs(&self) -> Vec<TensorFunctionSpec> {
        let r = self.dim();
        let mut out: Vec<TensorFunctionSpec> = (1..(1u32 << r) - 1)
            .map(|mask| TensorFunctionSpec {
                indices: (0..r)
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| self.indices[b])
                    .collect(),
            })
            .collect();
        out.sort();
        out
    }
}

impl fmt::Display for TensorFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let joined: Vec<String> = self.indices.iter().map(|t| t.to_string()).collect();
        write!(f, "f{}", joined.join(","))
    }
}

impl FromStr for TensorFunctionSpec {
    type Err = Error;

    /// Accepts `1,2,3`, `f1,2,3` or `{1,2,3}`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .trim_start_matches('f')
            .trim_start_matches('{')
            .trim_end_matches('}');
        let indices = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| invalid("spec", format!("bad index `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        TensorFunctionSpec::new(indices)
    }
}
