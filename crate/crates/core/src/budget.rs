use crate::{Error, Result};

/// A δ-approximate (α, ε)-Rényi DP constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiBudget {
    pub delta: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

impl RenyiBudget {
    pub fn new(delta: f64, alpha: f64, epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Domain("delta must lie in [0, 1)"));
        }
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::Domain("alpha must be finite and > 1"));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::Domain("epsilon must be >= 0"));
        }
        Ok(Self { delta, alpha, epsilon })
    }
}

/// An (ε̂, δ̂) approximate-DP target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpBudget {
    pub epsilon_hat: f64,
    pub delta_hat: f64,
}

impl DpBudget {
    pub fn new(epsilon_hat: f64, delta_hat: f64) -> Result<Self> {
        if !(epsilon_hat >= 0.0) {
            return Err(Error::Domain("epsilon_hat must be >= 0"));
        }
        if !(delta_hat > 0.0 && delta_hat < 1.0) {
            return Err(Error::Domain("delta_hat must lie in (0, 1)"));
        }
        Ok(Self { epsilon_hat, delta_hat })
    }
}
