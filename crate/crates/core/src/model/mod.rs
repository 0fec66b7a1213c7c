//! Domain types shared by every other module: the game instance, utility
//! expressions, adversary strategies and equilibrium points.

mod monotonicity;
mod parse;
mod strategy;
mod utility;

use alloc::format;
use alloc::string::ToString;

pub use monotonicity::{
    validate_monotonicity, Axis, MonotonicityGrid, MonotonicityReport, Player, Violation,
    DEFAULT_GRID_POINTS, MIN_GRID_POINTS,
};
pub use parse::parse_utility;
pub use strategy::{AdversaryStrategy, Atom, OpaqueSampler, SamplerKind, SymmetricAtoms, DEFAULT_MAX_ATOMS};
pub use utility::{BinaryOp, UnaryOp, UtilityExpr, Var};

use crate::error::{Error, Result};

/// Largest admissible `Δ / M`; the analysis assumes `Δ ≪ M`.
pub const MAX_DELTA_OVER_M: f64 = 0.01;

/// Default lower PA bound used when screening utilities for monotonicity.
pub const DEFAULT_PA_FLOOR: f64 = 1e-3;

/// One instance of the repetition game: `ℓ` honest nodes with noise
/// `U[-Δ, Δ]`, data `u ~ U[-M, M]`, acceptance threshold `η`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GameConfig {
    ell: u32,
    delta: f64,
    m_half: f64,
    eta: f64,
}

impl GameConfig {
    pub fn new(ell: u32, delta: f64, m_half: f64, eta: f64) -> Result<Self> {
        if ell == 0 {
            return Err(invalid("ell", "must be at least 1"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", "must be positive and finite"));
        }
        if !(m_half > 0.0 && m_half.is_finite()) {
            return Err(invalid("m_half", "must be positive and finite"));
        }
        if !(eta >= 2.0 && eta.is_finite()) {
            return Err(invalid("eta", "must be finite and at least 2"));
        }
        if delta / m_half > MAX_DELTA_OVER_M {
            return Err(Error::InvalidConfig {
                field: "delta",
                reason: format!(
                    "delta / m_half = {} exceeds {}",
                    delta / m_half,
                    MAX_DELTA_OVER_M
                ),
            });
        }
        Ok(Self {
            ell,
            delta,
            m_half,
            eta,
        })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn m_half(&self) -> f64 {
        self.m_half
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Same instance with a different threshold.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.ell, self.delta, self.m_half, eta)
    }

    /// Largest accepted spread `ηΔ`.
    pub fn acceptance_width(&self) -> f64 {
        self.eta * self.delta
    }
}

pub(crate) fn invalid(field: &'static str, reason: &str) -> Error {
    Error::InvalidConfig {
        field,
        reason: reason.to_string(),
    }
}

/// Utilities of the data collector and the adversary, both as functions of
/// `(MSE, PA)` in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityPair {
    pub q_dc: UtilityExpr,
    pub q_ad: UtilityExpr,
    pub pa_floor: f64,
}

impl UtilityPair {
    pub fn new(q_dc: UtilityExpr, q_ad: UtilityExpr) -> Self {
        Self {
            q_dc,
            q_ad,
            pa_floor: DEFAULT_PA_FLOOR,
        }
    }

    pub fn parse(q_dc: &str, q_ad: &str) -> Result<Self> {
        Ok(Self::new(parse_utility(q_dc)?, parse_utility(q_ad)?))
    }

    pub fn with_pa_floor(mut self, pa_floor: f64) -> Result<Self> {
        if !(pa_floor > 0.0 && pa_floor < 1.0) {
            return Err(invalid("pa_floor", "must lie in (0, 1)"));
        }
        self.pa_floor = pa_floor;
        Ok(self)
    }
}

/// Stackelberg equilibrium of one game instance.
///
/// `boundary` marks the degenerate case where the adversary's supremum is
/// only approached as `PA -> 0`; `alpha` is then 0, `mse` is the curve's
/// limit at 0 and `noise` is the limiting never-accepted spike pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EquilibriumPoint {
    pub eta_star: f64,
    pub alpha: f64,
    pub mse: f64,
    pub dc_utility: f64,
    pub ad_utility: f64,
    pub noise: SymmetricAtoms,
    pub boundary: bool,
}
