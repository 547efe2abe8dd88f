use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Tolerance for "masses sum to 1" at construction time.
pub const MASS_SUM_TOL: f64 = 1e-12;

/// A probability distribution on consecutive integers, in canonical
/// trimmed form: the first and last stored masses are nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    offset: i64,
    pmf: Vec<f64>,
}

impl DiscreteDistribution {
    /// Builds a distribution whose support starts at `offset`. Leading and
    /// trailing exact zeros are trimmed; interior zeros are kept.
    pub fn new(offset: i64, pmf: Vec<f64>) -> Result<Self> {
        if pmf.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "masses must be finite and non-negative"
            )));
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {sum}, expected 1 within {MASS_SUM_TOL:e}"
            )));
        }
        let first = pmf.iter().position(|&m| m > 0.0);
        let last = pmf.iter().rposition(|&m| m > 0.0);
        match (first, last) {
            (Some(lo), Some(hi)) => Ok(Self {
                offset: offset + lo as i64,
                pmf: pmf[lo..=hi].to_vec(),
            }),
            _ => Err(Error::InvalidDistribution(format!("all masses are zero"))),
        }
    }

    /// Point mass at `x`.
    pub fn point_mass(x: i64) -> Self {
        Self { offset: x, pmf: alloc::vec![1.0] }
    }

    /// Uniform distribution on `{offset, …, offset + n − 1}`.
    pub fn uniform(offset: i64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("uniform support must be non-empty"));
        }
        Ok(Self {
            offset,
            pmf: alloc::vec![1.0 / n as f64; n],
        })
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Smallest support point.
    pub fn min_support(&self) -> i64 {
        self.offset
    }

    /// Largest support point.
    pub fn max_support(&self) -> i64 {
        self.offset + self.pmf.len() as i64 - 1
    }

    /// Mass at `x` (zero outside the stored range).
    pub fn mass(&self, x: i64) -> f64 {
        if x < self.offset {
            return 0.0;
        }
        let idx = (x - self.offset) as usize;
        self.pmf.get(idx).copied().unwrap_or(0.0)
    }

    /// The shift of this distribution by `k`: `P₊ = shifted(1)` satisfies
    /// `P(x) = P₊(x + 1)`.
    pub fn shifted(&self, k: i64) -> Self {
        Self {
            offset: self.offset + k,
            pmf: self.pmf.clone(),
        }
    }

    /// Mass strictly above `x`.
    pub fn tail_above(&self, x: i64) -> f64 {
        let mut acc = 0.0;
        for (i, &m) in self.pmf.iter().enumerate().rev() {
            if self.offset + i as i64 > x {
                acc += m;
            } else {
                break;
            }
        }
        acc
    }

    /// Writes both distributions onto their common support range.
    /// Returns `(offset, a, b)` with equal-length mass vectors.
    pub fn aligned(a: &Self, b: &Self) -> (i64, Vec<f64>, Vec<f64>) {
        let lo = a.min_support().min(b.min_support());
        let hi = a.max_support().max(b.max_support());
        let n = (hi - lo + 1) as usize;
        let mut va = alloc::vec![0.0; n];
        let mut vb = alloc::vec![0.0; n];
        for (i, &m) in a.pmf.iter().enumerate() {
            va[(a.offset - lo) as usize + i] = m;
        }
        for (i, &m) in b.pmf.iter().enumerate() {
            vb[(b.offset - lo) as usize + i] = m;
        }
        (lo, va, vb)
    }

    /// Total variation distance.
    pub fn total_variation(a: &Self, b: &Self) -> f64 {
        let (_, va, vb) = Self::aligned(a, b);
        0.5 * va
            .iter()
            .zip(&vb)
            .map(|(&x, &y)| (x - y).abs())
            .sum::<f64>()
    }
}
