use crate::error::{Error, Result};
use crate::math;
use crate::model::{invalid, GameConfig, SymmetricAtoms};

/// Parameters of the acceptance and error kernels: `ℓ` honest nodes, noise
/// half-width `Δ`, threshold `η`. Kernels are defined for
/// `z ∈ [(η-1)Δ, (η+1)Δ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KernelContext {
    ell: u32,
    delta: f64,
    eta: f64,
}

impl KernelContext {
    pub fn new(ell: u32, delta: f64, eta: f64) -> Result<Self> {
        if ell == 0 {
            return Err(invalid("ell", "must be at least 1"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", "must be positive and finite"));
        }
        if !(eta >= 2.0 && eta.is_finite()) {
            return Err(invalid("eta", "must be finite and at least 2"));
        }
        Ok(Self { ell, delta, eta })
    }

    pub fn from_game(config: &GameConfig) -> Self {
        Self {
            ell: config.ell(),
            delta: config.delta(),
            eta: config.eta(),
        }
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `[(η-1)Δ, (η+1)Δ]`.
    pub fn domain(&self) -> (f64, f64) {
        ((self.eta - 1.0) * self.delta, (self.eta + 1.0) * self.delta)
    }

    fn check_z(&self, z: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if z >= lo && z <= hi {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what: "z",
                value: z,
                lo,
                hi,
            })
        }
    }

    fn check_q(q: f64) -> Result<()> {
        if (0.0..=1.0).contains(&q) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what: "q",
                value: q,
                lo: 0.0,
                hi: 1.0,
            })
        }
    }

    /// Density of the smallest of `ℓ` honest noises,
    /// `w(x) = ℓ (Δ - x)^(ℓ-1) / (2Δ)^ℓ` on `[-Δ, Δ]`.
    pub fn honest_min_density(&self, x: f64) -> Result<f64> {
        if !(x >= -self.delta && x <= self.delta) {
            return Err(Error::OutOfDomain {
                what: "x",
                value: x,
                lo: -self.delta,
                hi: self.delta,
            });
        }
        let ell = self.ell as f64;
        Ok(ell * math::powi(self.delta - x, self.ell - 1) / math::powi(2.0 * self.delta, self.ell))
    }

    /// Width `S = (η+1)Δ - z ∈ [0, 2Δ]` of the accepted range of the honest
    /// minimum when the adversary reports `+z`.
    fn accepted_width(&self, z: f64) -> f64 {
        ((self.eta + 1.0) * self.delta - z).clamp(0.0, 2.0 * self.delta)
    }

    /// `E[(B - s)^2]`-style bracket: `ν(z) = k(z) · bracket(S, B)` where
    /// `s = Δ - x` has density `ℓ s^(ℓ-1) / S^ℓ` on `[0, S]` given acceptance.
    fn error_bracket(&self, width: f64, reach: f64) -> f64 {
        let ell = self.ell as f64;
        reach * reach - 2.0 * ell * reach * width / (ell + 1.0)
            + ell * width * width / (ell + 2.0)
    }

    /// Acceptance probability of a spike at `+z`:
    /// `k(z) = ∫_{z-ηΔ}^{Δ} w(x) dx = (((η+1)Δ - z) / 2Δ)^ℓ`.
    pub fn acceptance_kernel(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        Ok(math::powi(self.accepted_width(z) / (2.0 * self.delta), self.ell))
    }

    /// Unnormalised squared error of a spike at `+z`:
    /// `ν(z) = ∫_{z-ηΔ}^{Δ} (x + z)^2 w(x) dx`.
    pub fn error_kernel(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        let width = self.accepted_width(z);
        let accept = math::powi(width / (2.0 * self.delta), self.ell);
        Ok(accept * self.error_bracket(width, self.delta + z))
    }

    /// The unique `z` with `k(z) = q`: `z = (η+1)Δ - 2Δ q^(1/ℓ)`.
    pub fn inverse_kernel(&self, q: f64) -> Result<f64> {
        Self::check_q(q)?;
        let (lo, hi) = self.domain();
        let z = hi - 2.0 * self.delta * math::root(q, self.ell);
        Ok(z.clamp(lo, hi))
    }

    /// Inverse of [`acceptance_kernel`](Self::acceptance_kernel) by monotone
    /// bisection, to `1e-12` absolute in `z`. Works for any strictly
    /// decreasing kernel; kept as an independent route to the closed form.
    pub fn inverse_kernel_bisect(&self, q: f64) -> Result<f64> {
        Self::check_q(q)?;
        let (mut lo, mut hi) = self.domain();
        // k(lo) = 1 >= q >= 0 = k(hi)
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.acceptance_kernel(mid)? > q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `h(q) = ν(k⁻¹(q))`, the unnormalised error of the single spike pair
    /// accepted with probability `q`.
    pub fn spike_mse_curve(&self, q: f64) -> Result<f64> {
        Self::check_q(q)?;
        Ok(q * self.spike_ratio(q))
    }

    /// `h(q) / q` for `q ∈ [0, 1]`, continuous at 0 where it equals
    /// `((η+2)Δ)^2`. Computed without forming `z`, so small `q` keeps full
    /// precision.
    pub(crate) fn spike_ratio(&self, q: f64) -> f64 {
        let width = 2.0 * self.delta * math::root(q, self.ell);
        let reach = (self.eta + 2.0) * self.delta - width;
        self.error_bracket(width, reach)
    }
}

/// Acceptance probability and conditional MSE of a symmetric spike mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MixturePrediction {
    pub pa: f64,
    /// `None` when the mixture is never accepted.
    pub mse: Option<f64>,
}

impl KernelContext {
    /// `PA = Σ 2β_j k(z_j)` and `MSE = Σ 2β_j ν(z_j) / (4 PA)`.
    pub fn mixture(&self, atoms: &SymmetricAtoms) -> Result<MixturePrediction> {
        let mut pa = 0.0;
        let mut err = 0.0;
        for atom in atoms.atoms() {
            pa += 2.0 * atom.weight * self.acceptance_kernel(atom.offset)?;
            err += 2.0 * atom.weight * self.error_kernel(atom.offset)?;
        }
        let mse = if pa > 0.0 { Some(err / (4.0 * pa)) } else { None };
        Ok(MixturePrediction { pa, mse })
    }
}
