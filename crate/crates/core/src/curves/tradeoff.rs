use alloc::vec::Vec;

use super::envelope::{concave_envelope, CurveSamples};
use super::kernel::KernelContext;
use crate::error::{Error, Result};

/// Uniform base grid for the envelope, endpoints included.
pub const DEFAULT_ENVELOPE_POINTS: usize = 4097;

/// Number of points in the default `α` grid `{1/n, 2/n, …, 1}`.
pub const DEFAULT_ALPHA_POINTS: usize = 4096;

/// Target spacing of samples around every interior chord endpoint.
pub const REFINE_RESOLUTION: f64 = 1e-7;

const REFINE_POINTS: usize = 32;
const MAX_REFINE_ROUNDS: usize = 12;

pub fn default_alpha_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|i| i as f64 / points as f64).collect()
}

/// The worst-case MSE at each acceptance level, `c_η(α) = h*(α) / (4α)`.
///
/// Besides the tabulated `c_values` on `alpha_grid`, the curve can be
/// evaluated anywhere in `(0, 1]` with [`c_at`](Self::c_at); between chord
/// ends it uses the closed-form `h`, on chords the exact secant.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TradeoffCurve {
    pub eta: f64,
    pub ell: u32,
    pub delta: f64,
    pub alpha_grid: Vec<f64>,
    pub c_values: Vec<f64>,
    /// `lim_{α→0+} c_η(α)`: the envelope's right-derivative at 0, over 4.
    pub limit_at_zero: f64,
    pub samples: CurveSamples,
    #[cfg_attr(feature = "serde", serde(skip))]
    ctx: KernelContext,
}

/// Samples `h` on a uniform grid and refines around chord endpoints until
/// their neighbours are within [`REFINE_RESOLUTION`].
fn refined_envelope(ctx: &KernelContext, base_points: usize) -> Result<CurveSamples> {
    let mut q: Vec<f64> = (0..base_points)
        .map(|i| {
            if i + 1 == base_points {
                1.0
            } else {
                i as f64 / (base_points - 1) as f64
            }
        })
        .collect();
    let mut h: Vec<f64> = q.iter().map(|&x| x * ctx.spike_ratio(x)).collect();

    for _ in 0..MAX_REFINE_ROUNDS {
        let samples = concave_envelope(&q, &h)?;
        let mut extra: Vec<f64> = Vec::new();
        for &(lo, hi) in &samples.segments {
            for end in [lo, hi] {
                if end <= 0.0 || end >= 1.0 {
                    continue;
                }
                let i = samples.index_of(end).expect("segment ends are grid points");
                for (a, b) in [(q[i - 1], q[i]), (q[i], q[i + 1])] {
                    if b - a <= REFINE_RESOLUTION {
                        continue;
                    }
                    let step = (b - a) / (REFINE_POINTS + 1) as f64;
                    extra.extend((1..=REFINE_POINTS).map(|k| a + step * k as f64));
                }
            }
        }
        if extra.is_empty() {
            return Ok(samples);
        }
        let mut merged: Vec<f64> = q.iter().copied().chain(extra).collect();
        merged.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        merged.dedup();
        h = merged.iter().map(|&x| x * ctx.spike_ratio(x)).collect();
        q = merged;
    }
    concave_envelope(&q, &h)
}

/// Builds `c_η` for the kernel context, tabulated on `alpha_grid ⊂ (0, 1]`.
pub fn c_curve(ctx: &KernelContext, alpha_grid: &[f64]) -> Result<TradeoffCurve> {
    for (i, &a) in alpha_grid.iter().enumerate() {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::OutOfDomain {
                what: "alpha",
                value: a,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if i > 0 && a <= alpha_grid[i - 1] {
            return Err(Error::NonMonotoneGrid { index: i });
        }
    }
    let samples = refined_envelope(ctx, DEFAULT_ENVELOPE_POINTS)?;
    let limit_at_zero = match samples.segments.first() {
        // a chord leaving the origin sets the slope
        Some(&(0.0, hi)) => {
            let i = samples.index_of(hi).expect("segment ends are grid points");
            samples.h_values[i] / hi / 4.0
        }
        _ => ctx.spike_ratio(0.0) / 4.0,
    };
    let mut curve = TradeoffCurve {
        eta: ctx.eta(),
        ell: ctx.ell(),
        delta: ctx.delta(),
        alpha_grid: alpha_grid.to_vec(),
        c_values: Vec::new(),
        limit_at_zero,
        samples,
        ctx: *ctx,
    };
    curve.c_values = alpha_grid
        .iter()
        .map(|&a| curve.c_at(a))
        .collect::<Result<_>>()?;
    Ok(curve)
}

impl TradeoffCurve {
    /// Curve on the default grid of [`DEFAULT_ALPHA_POINTS`] points.
    pub fn build(ctx: &KernelContext) -> Result<Self> {
        c_curve(ctx, &default_alpha_grid(DEFAULT_ALPHA_POINTS))
    }

    pub fn context(&self) -> &KernelContext {
        &self.ctx
    }

    /// Chord `(q_lo, q_hi)` of the envelope strictly containing `q`.
    pub fn chord_containing(&self, q: f64) -> Option<(f64, f64)> {
        self.samples.chord_containing(q)
    }

    /// Whether the envelope touches `h` at `q`.
    pub fn is_contact(&self, q: f64) -> bool {
        self.chord_containing(q).is_none()
    }

    fn chord_value(&self, lo: f64, hi: f64, q: f64) -> f64 {
        let s = &self.samples;
        let (i, j) = (
            s.index_of(lo).expect("segment ends are grid points"),
            s.index_of(hi).expect("segment ends are grid points"),
        );
        let t = (q - lo) / (hi - lo);
        s.h_values[i] + (s.h_values[j] - s.h_values[i]) * t
    }

    /// Single-spike curve `h(q)`.
    pub fn h_at(&self, q: f64) -> Result<f64> {
        self.ctx.spike_mse_curve(q)
    }

    /// Concave envelope `h*(q)` for `q ∈ [0, 1]`.
    pub fn h_star_at(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::OutOfDomain {
                what: "q",
                value: q,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(match self.chord_containing(q) {
            Some((lo, hi)) => self.chord_value(lo, hi, q),
            None => q * self.ctx.spike_ratio(q),
        })
    }

    /// `c_η(α)` for `α ∈ (0, 1]`.
    pub fn c_at(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::OutOfDomain {
                what: "alpha",
                value: alpha,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(match self.chord_containing(alpha) {
            Some((lo, hi)) => self.chord_value(lo, hi, alpha) / (4.0 * alpha),
            None => self.ctx.spike_ratio(alpha) / 4.0,
        })
    }

    /// `c_η(α)` extended to `α = 0` by its limit.
    pub fn c_or_limit(&self, alpha: f64) -> Result<f64> {
        if alpha == 0.0 {
            Ok(self.limit_at_zero)
        } else {
            self.c_at(alpha)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(ell: u32, eta: f64, grid: &[f64]) -> TradeoffCurve {
        c_curve(&KernelContext::new(ell, 1.0, eta).unwrap(), grid).unwrap()
    }

    #[test]
    fn full_acceptance_value() {
        let c = curve(1, 2.0, &[1.0]);
        assert!((c.c_values[0] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn example_one_point() {
        let c = curve(1, 6.75, &[0.807]);
        assert!((c.c_values[0] - 10.07).abs() < 0.01, "{}", c.c_values[0]);
    }

    #[test]
    fn example_two_point() {
        let c = curve(1, 3.75, &[0.214]);
        assert!((c.c_values[0] - 6.52).abs() < 0.01, "{}", c.c_values[0]);
    }

    #[test]
    fn eta_two_has_one_right_tail_chord() {
        let c = curve(1, 2.0, &[0.5]);
        assert_eq!(c.samples.segments.len(), 1);
        let (lo, hi) = c.samples.segments[0];
        assert_eq!(hi, 1.0);
        assert!(lo > 0.7 && lo < 0.86, "{lo}");
        assert_eq!(c.samples.h_star_values[0], 0.0);
        assert!((c.h_star_at(1.0).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        assert!(!c.is_contact(0.95));
        assert!(c.is_contact(0.5));
    }

    #[test]
    fn large_eta_is_concave_throughout() {
        // h is concave on [0, 1] once 1/(η+2) < 3/14
        let c = curve(1, 3.0, &[0.5]);
        assert!(c.samples.segments.is_empty());
    }

    #[test]
    fn limit_at_zero() {
        let c = curve(1, 2.0, &[0.5]);
        assert_eq!(c.limit_at_zero, 4.0);
        assert!((c.c_at(1e-9).unwrap() - 4.0).abs() < 1e-7);
        assert_eq!(c.c_or_limit(0.0).unwrap(), 4.0);
        assert!(c.c_at(0.0).is_err());
    }

    #[test]
    fn rejects_bad_alpha_grid() {
        let ctx = KernelContext::new(1, 1.0, 2.0).unwrap();
        assert!(c_curve(&ctx, &[0.0, 0.5]).is_err());
        assert!(c_curve(&ctx, &[0.5, 0.4]).is_err());
        assert!(c_curve(&ctx, &[0.5, 1.5]).is_err());
    }
}
