//! The trade-off curve `c_η(α) = h*(α) / (4α)` for uniform honest noise.
//!
//! A symmetric spike pair at `±z` is accepted with probability `k(z)` and,
//! given acceptance, contributes squared error `ν(z) / (4 k(z))`. Tracing
//! `h(q) = ν(k⁻¹(q))` and taking its concave envelope `h*` gives the largest
//! MSE the adversary can reach at each acceptance level; mixtures of two
//! spike pairs attain every point of the envelope.

mod envelope;
mod kernel;
mod tradeoff;

pub use envelope::{concave_envelope, CurveSamples};
pub use kernel::{KernelContext, MixturePrediction};
pub use tradeoff::{
    c_curve, default_alpha_grid, TradeoffCurve, DEFAULT_ALPHA_POINTS, DEFAULT_ENVELOPE_POINTS,
    REFINE_RESOLUTION,
};
