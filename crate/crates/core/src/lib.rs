#![cfg_attr(not(test), no_std)]

//! Equilibrium engine for the repetition-coding game between a data collector
//! (DC) and a rational adversary.
//!
//! The DC receives `ℓ` honest reports `u + n_i` with `n_i ~ U[-Δ, Δ]` plus one
//! or more adversarial reports, accepts when `max(y) - min(y) <= ηΔ`, and
//! estimates `u` by the midrange. This crate computes
//!
//! - the worst-case MSE/acceptance trade-off curve `c_η(α)` ([`curves`]),
//! - the Stackelberg threshold `η*` and the adversary's optimal noise
//!   ([`equilibrium`]),
//! - Monte-Carlo estimates of the game as actually played ([`sim`]),
//! - threshold learning when the adversary's utility is hidden ([`learn`]).
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the CLI and
//! parallel drivers live in the `coding-game` crate.

extern crate alloc;

pub mod curves;
pub mod equilibrium;
mod error;
pub mod learn;
mod math;
pub mod model;
pub mod sim;

pub use error::{Error, EvalError, EvalErrorKind, Result};
