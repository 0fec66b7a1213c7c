//! Stackelberg solution of the game: the adversary's best-response set at
//! each threshold, the DC's pessimistic choice of `η`, and the noise that
//! realises the adversary's best response.

use alloc::vec;
use alloc::vec::Vec;

use crate::curves::{c_curve, default_alpha_grid, KernelContext, TradeoffCurve, DEFAULT_ALPHA_POINTS};
use crate::error::{Error, Result};
use crate::model::{Atom, EquilibriumPoint, SymmetricAtoms, UtilityExpr, UtilityPair};

/// Default relative tolerance for treating two adversary utilities as tied.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

/// Resolution in `α` of the golden-section refinement.
pub const ALPHA_RESOLUTION: f64 = 1e-7;

/// Best responses closer than this to `α = 0` are reported as the boundary
/// point `α = 0`.
pub const BOUNDARY_ALPHA: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// The adversary's best-response set `L_η` on one trade-off curve.
///
/// `alphas` is sorted and `mses[i] = c_η(alphas[i])`. A boundary response is
/// stored as `α = 0` with the curve's limit MSE.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BestResponseSet {
    pub eta: f64,
    pub alphas: Vec<f64>,
    pub mses: Vec<f64>,
    pub ad_utility: f64,
    /// Whether `alphas[0]` is the boundary point `α = 0`.
    pub boundary: bool,
    /// Grid points where the adversary utility could not be evaluated.
    pub skipped: usize,
}

/// `Q(c_η(α), α)`, or `-∞` where the utility is undefined.
fn utility_on_curve(curve: &TradeoffCurve, q: &UtilityExpr, alpha: f64) -> f64 {
    match curve.c_at(alpha) {
        Ok(c) => q.eval(c, alpha).unwrap_or(f64::NEG_INFINITY),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Maximiser of `f` on `[lo, hi]` to width `tol`, with its value.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `L_η = argmax_α Q_AD(c_η(α), α)`.
///
/// Every local maximum of the tabulated utility is refined by golden-section
/// search over its two neighbouring grid cells; a grid point is kept over
/// the refined point unless the latter is strictly better. All refined maxima
/// within `tie_tol · |best|` of the best (absolute `tie_tol` when the best is
/// 0) are returned.
pub fn adversary_best_response(
    curve: &TradeoffCurve,
    q_ad: &UtilityExpr,
    tie_tol: f64,
) -> Result<BestResponseSet> {
    if !(tie_tol > 0.0 && tie_tol.is_finite()) {
        return Err(Error::InvalidConfig {
            field: "tie_tol",
            reason: "must be positive and finite".into(),
        });
    }
    let grid = &curve.alpha_grid;
    let values: Vec<f64> = grid
        .iter()
        .zip(&curve.c_values)
        .map(|(&a, &c)| q_ad.eval(c, a).unwrap_or(f64::NEG_INFINITY))
        .collect();
    let skipped = values.iter().filter(|v| **v == f64::NEG_INFINITY).count();
    if skipped == values.len() {
        return Err(Error::NoBestResponse { eta: curve.eta });
    }

    let f = |a: f64| utility_on_curve(curve, q_ad, a);
    let last = grid.len() - 1;
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for i in 0..grid.len() {
        let v = values[i];
        if v == f64::NEG_INFINITY {
            continue;
        }
        let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
        let right = if i == last { f64::NEG_INFINITY } else { values[i + 1] };
        if v < left || v < right {
            continue;
        }
        let lo = if i == 0 { 0.0 } else { grid[i - 1] };
        let hi = if i == last { grid[i] } else { grid[i + 1] };
        let (x, fx) = golden_max(f, lo, hi, ALPHA_RESOLUTION);
        candidates.push(if fx > v { (x, fx) } else { (grid[i], v) });
    }

    let best = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let floor = if best == 0.0 {
        -tie_tol
    } else {
        best - tie_tol * best.abs()
    };
    candidates.retain(|c| c.1 >= floor);
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite alpha"));
    candidates.dedup_by(|b, a| b.0 - a.0 <= 2.0 * ALPHA_RESOLUTION);

    let mut boundary = false;
    let mut ad_utility = best;
    let mut alphas = Vec::with_capacity(candidates.len());
    let mut mses = Vec::with_capacity(candidates.len());
    for (i, &(a, _)) in candidates.iter().enumerate() {
        if i == 0 && a < BOUNDARY_ALPHA {
            boundary = true;
            alphas.push(0.0);
            mses.push(curve.limit_at_zero);
            // supremum as α -> 0, by continuity where the utility is defined
            if let Ok(v) = q_ad.eval(curve.limit_at_zero, 0.0) {
                ad_utility = ad_utility.max(v);
            }
        } else {
            alphas.push(a);
            mses.push(curve.c_at(a)?);
        }
    }
    Ok(BestResponseSet {
        eta: curve.eta,
        alphas,
        mses,
        ad_utility,
        boundary,
        skipped,
    })
}

/// `Q_DC(c_η(α), α)`. At `α = 0` the curve's limit MSE is used and a utility
/// that is undefined there (for example `log PA`) evaluates to `-∞`.
pub fn dc_utility_at(curve: &TradeoffCurve, q_dc: &UtilityExpr, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Ok(q_dc
            .eval(curve.limit_at_zero, 0.0)
            .unwrap_or(f64::NEG_INFINITY));
    }
    let mse = curve.c_at(alpha)?;
    q_dc.eval(mse, alpha)
        .map_err(|error| Error::EvalAt { mse, pa: alpha, error })
}

/// Numerical settings of the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tie_tol: f64,
    pub alpha_points: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tie_tol: DEFAULT_TIE_TOLERANCE,
            alpha_points: DEFAULT_ALPHA_POINTS,
        }
    }
}

/// One row of the per-threshold table: `L_η` and the DC's worst case over it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EtaRecord {
    pub eta: f64,
    pub best_response: BestResponseSet,
    pub worst_dc_utility: f64,
    /// Member of `L_η` attaining the worst case (the smallest on ties).
    pub worst_alpha: f64,
    /// `false` when the adversary utility is undefined on the whole grid.
    pub defined: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StackelbergSolution {
    pub point: EquilibriumPoint,
    pub per_eta: Vec<EtaRecord>,
    pub eta_grid: Vec<f64>,
}

fn build_curve(ell: u32, delta: f64, eta: f64, opts: &SolveOptions) -> Result<TradeoffCurve> {
    let ctx = KernelContext::new(ell, delta, eta)?;
    c_curve(&ctx, &default_alpha_grid(opts.alpha_points))
}

/// The table row for one threshold. Independent across `η`, so callers may
/// evaluate the grid in parallel and pass the rows to
/// [`assemble_solution`] in grid order.
pub fn evaluate_eta(
    eta: f64,
    pair: &UtilityPair,
    ell: u32,
    delta: f64,
    opts: &SolveOptions,
) -> Result<EtaRecord> {
    let curve = build_curve(ell, delta, eta, opts)?;
    let best_response = match adversary_best_response(&curve, &pair.q_ad, opts.tie_tol) {
        Ok(br) => br,
        Err(Error::NoBestResponse { .. }) => {
            return Ok(EtaRecord {
                eta,
                best_response: BestResponseSet {
                    eta,
                    alphas: Vec::new(),
                    mses: Vec::new(),
                    ad_utility: f64::NEG_INFINITY,
                    boundary: false,
                    skipped: curve.alpha_grid.len(),
                },
                worst_dc_utility: f64::NEG_INFINITY,
                worst_alpha: f64::NAN,
                defined: false,
            })
        }
        Err(e) => return Err(e),
    };
    let mut worst = f64::INFINITY;
    let mut worst_alpha = best_response.alphas[0];
    for &a in &best_response.alphas {
        let u = dc_utility_at(&curve, &pair.q_dc, a)?;
        if u < worst {
            worst = u;
            worst_alpha = a;
        }
    }
    Ok(EtaRecord {
        eta,
        best_response,
        worst_dc_utility: worst,
        worst_alpha,
        defined: true,
    })
}

fn check_eta_grid(eta_grid: &[f64]) -> Result<()> {
    if eta_grid.is_empty() {
        return Err(Error::InvalidConfig {
            field: "eta_grid",
            reason: "must not be empty".into(),
        });
    }
    for &eta in eta_grid {
        if !(eta >= 2.0 && eta.is_finite()) {
            return Err(Error::OutOfDomain {
                what: "eta",
                value: eta,
                lo: 2.0,
                hi: f64::INFINITY,
            });
        }
    }
    Ok(())
}

/// Picks `η*` from the per-threshold rows (first strict maximum of the
/// worst-case DC utility, so ties go to the smallest `η`) and builds its
/// equilibrium point.
pub fn assemble_solution(
    per_eta: Vec<EtaRecord>,
    ell: u32,
    delta: f64,
    opts: &SolveOptions,
) -> Result<StackelbergSolution> {
    let mut chosen: Option<usize> = None;
    for (i, rec) in per_eta.iter().enumerate() {
        if !rec.defined {
            continue;
        }
        match chosen {
            Some(j) if rec.worst_dc_utility <= per_eta[j].worst_dc_utility => {}
            _ => chosen = Some(i),
        }
    }
    let j = chosen.ok_or(Error::NoEquilibrium)?;
    let rec = &per_eta[j];
    let curve = build_curve(ell, delta, rec.eta, opts)?;
    let alpha = rec.worst_alpha;
    let boundary = alpha == 0.0;
    let (mse, noise) = if boundary {
        (
            curve.limit_at_zero,
            SymmetricAtoms::single_pair(curve.context().domain().1)?,
        )
    } else {
        (curve.c_at(alpha)?, optimal_noise(&curve, alpha)?)
    };
    let point = EquilibriumPoint {
        eta_star: rec.eta,
        alpha,
        mse,
        dc_utility: rec.worst_dc_utility,
        ad_utility: rec.best_response.ad_utility,
        noise,
        boundary,
    };
    let eta_grid = per_eta.iter().map(|r| r.eta).collect();
    Ok(StackelbergSolution {
        point,
        per_eta,
        eta_grid,
    })
}

/// `η* = argmax_η min_{α ∈ L_η} Q_DC(c_η(α), α)` over `eta_grid`.
pub fn stackelberg_solve(
    eta_grid: &[f64],
    pair: &UtilityPair,
    ell: u32,
    delta: f64,
    opts: &SolveOptions,
) -> Result<StackelbergSolution> {
    check_eta_grid(eta_grid)?;
    let per_eta = eta_grid
        .iter()
        .map(|&eta| evaluate_eta(eta, pair, ell, delta, opts))
        .collect::<Result<Vec<_>>>()?;
    assemble_solution(per_eta, ell, delta, opts)
}

/// Grid validation shared with parallel drivers.
pub fn validate_eta_grid(eta_grid: &[f64]) -> Result<()> {
    check_eta_grid(eta_grid)
}

/// Noise attaining `(α, c_η(α))`: one spike pair at `k⁻¹(α)` where the
/// envelope touches `h`, otherwise the mixture of the two pairs at the ends
/// of the chord through `α`. Atoms are sorted by offset.
pub fn optimal_noise(curve: &TradeoffCurve, alpha: f64) -> Result<SymmetricAtoms> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfDomain {
            what: "alpha",
            value: alpha,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let ctx = curve.context();
    match curve.chord_containing(alpha) {
        None => SymmetricAtoms::single_pair(ctx.inverse_kernel(alpha)?),
        Some((q1, q2)) => {
            let z1 = ctx.inverse_kernel(q1)?;
            let z2 = ctx.inverse_kernel(q2)?;
            let beta1 = (q2 - alpha) / (2.0 * (q2 - q1));
            let beta2 = (alpha - q1) / (2.0 * (q2 - q1));
            // k is decreasing, so q2 > q1 puts z2 below z1
            SymmetricAtoms::new(vec![
                Atom {
                    offset: z2,
                    weight: beta2,
                },
                Atom {
                    offset: z1,
                    weight: beta1,
                },
            ])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Trend {
    Constant,
    NonDecreasing,
    NonIncreasing,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProbeRow {
    pub ell: u32,
    pub alpha: f64,
    pub mse: f64,
    pub dc_utility: f64,
    pub boundary: bool,
}

/// DC utility at a frozen `η*` as the number of honest nodes grows.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProbeTable {
    pub eta_star: f64,
    pub delta: f64,
    pub rows: Vec<ProbeRow>,
    pub trend: Trend,
    /// The DC never loses from additional honest nodes.
    pub proper: bool,
}

fn trend_of(values: &[f64]) -> Trend {
    let up = values.windows(2).any(|w| w[1] > w[0]);
    let down = values.windows(2).any(|w| w[1] < w[0]);
    match (up, down) {
        (false, false) => Trend::Constant,
        (true, false) => Trend::NonDecreasing,
        (false, true) => Trend::NonIncreasing,
        (true, true) => Trend::Mixed,
    }
}

/// Re-solves the adversary's problem at `(η*, ℓ)` for each honest count and
/// records the DC's pessimistic utility.
pub fn properness_probe(
    pair: &UtilityPair,
    eta_star: f64,
    ell_values: &[u32],
    delta: f64,
    opts: &SolveOptions,
) -> Result<ProbeTable> {
    if ell_values.is_empty() {
        return Err(Error::InvalidConfig {
            field: "ell_values",
            reason: "must not be empty".into(),
        });
    }
    for (i, &ell) in ell_values.iter().enumerate() {
        if ell == 0 || (i > 0 && ell <= ell_values[i - 1]) {
            return Err(Error::InvalidConfig {
                field: "ell_values",
                reason: "must be strictly increasing positive integers".into(),
            });
        }
    }
    let mut rows = Vec::with_capacity(ell_values.len());
    for &ell in ell_values {
        let rec = evaluate_eta(eta_star, pair, ell, delta, opts)?;
        if !rec.defined {
            return Err(Error::NoBestResponse { eta: eta_star });
        }
        let i = rec
            .best_response
            .alphas
            .iter()
            .position(|&a| a == rec.worst_alpha)
            .expect("worst alpha is a member");
        rows.push(ProbeRow {
            ell,
            alpha: rec.worst_alpha,
            mse: rec.best_response.mses[i],
            dc_utility: rec.worst_dc_utility,
            boundary: rec.worst_alpha == 0.0,
        });
    }
    let utilities: Vec<f64> = rows.iter().map(|r| r.dc_utility).collect();
    let trend = trend_of(&utilities);
    Ok(ProbeTable {
        eta_star,
        delta,
        rows,
        trend,
        proper: matches!(trend, Trend::Constant | Trend::NonDecreasing),
    })
}
