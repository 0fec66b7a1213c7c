//! Numerical screening of the utilities' monotonicity assumptions on a grid.
//!
//! `Q_AD` must be strictly increasing in both arguments; `Q_DC` must be
//! non-increasing in MSE and non-decreasing in PA.

use alloc::vec::Vec;

use super::{invalid, UtilityExpr, UtilityPair};
use crate::error::{Error, Result};

pub const MIN_GRID_POINTS: usize = 64;
pub const DEFAULT_GRID_POINTS: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityGrid {
    pub mse: Vec<f64>,
    pub pa: Vec<f64>,
}

impl MonotonicityGrid {
    /// `points` uniform samples of `MSE ∈ [mse_min, mse_max]` and of
    /// `PA ∈ [pa_floor, 1]`.
    pub fn uniform(mse_min: f64, mse_max: f64, pa_floor: f64, points: usize) -> Result<Self> {
        if !(mse_min > 0.0 && mse_max > mse_min && mse_max.is_finite()) {
            return Err(invalid("mse range", "need 0 < mse_min < mse_max"));
        }
        if !(pa_floor > 0.0 && pa_floor < 1.0) {
            return Err(invalid("pa_floor", "must lie in (0, 1)"));
        }
        if points < MIN_GRID_POINTS {
            return Err(Error::GridTooSmall {
                len: points,
                min: MIN_GRID_POINTS,
            });
        }
        Ok(Self {
            mse: linspace(mse_min, mse_max, points),
            pa: linspace(pa_floor, 1.0, points),
        })
    }

    /// Default 128 × 128 grid above the pair's PA floor.
    pub fn for_pair(pair: &UtilityPair, mse_min: f64, mse_max: f64) -> Result<Self> {
        Self::uniform(mse_min, mse_max, pair.pa_floor, DEFAULT_GRID_POINTS)
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / last)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Player {
    Dc,
    Ad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Axis {
    Mse,
    Pa,
}

/// An adjacent grid pair `(from, to)`, stepping up along `axis`, on which
/// `player`'s utility moves the wrong way.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Violation {
    pub player: Player,
    pub axis: Axis,
    pub from: (f64, f64),
    pub to: (f64, f64),
    pub values: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MonotonicityReport {
    pub pa_floor: f64,
    pub mse_points: usize,
    pub pa_points: usize,
    pub violations: Vec<Violation>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_grid(values: &[f64], field: &'static str) -> Result<()> {
    if values.len() < MIN_GRID_POINTS {
        return Err(Error::GridTooSmall {
            len: values.len(),
            min: MIN_GRID_POINTS,
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid(field, "contains non-finite values"));
    }
    for i in 1..values.len() {
        if values[i] <= values[i - 1] {
            return Err(Error::NonMonotoneGrid { index: i });
        }
    }
    Ok(())
}

fn tabulate(expr: &UtilityExpr, grid: &MonotonicityGrid) -> Result<Vec<f64>> {
    let mut table = Vec::with_capacity(grid.mse.len() * grid.pa.len());
    for &mse in &grid.mse {
        for &pa in &grid.pa {
            let v = expr
                .eval(mse, pa)
                .map_err(|error| Error::EvalAt { mse, pa, error })?;
            table.push(v);
        }
    }
    Ok(table)
}

/// Lists every adjacent grid pair on which either utility violates its
/// required monotonicity. An empty list means the pair passes.
pub fn validate_monotonicity(
    pair: &UtilityPair,
    grid: &MonotonicityGrid,
) -> Result<MonotonicityReport> {
    check_grid(&grid.mse, "mse grid")?;
    check_grid(&grid.pa, "pa grid")?;
    if grid.mse[0] <= 0.0 {
        return Err(invalid("mse grid", "must be positive"));
    }
    if grid.pa[0] < pair.pa_floor || grid.pa[grid.pa.len() - 1] > 1.0 {
        return Err(invalid("pa grid", "must lie within [pa_floor, 1]"));
    }

    let cols = grid.pa.len();
    let dc = tabulate(&pair.q_dc, grid)?;
    let ad = tabulate(&pair.q_ad, grid)?;
    let mut violations = Vec::new();

    for (player, table) in [(Player::Dc, &dc), (Player::Ad, &ad)] {
        for (i, &mse) in grid.mse.iter().enumerate() {
            for (j, &pa) in grid.pa.iter().enumerate() {
                let here = table[i * cols + j];
                if i + 1 < grid.mse.len() {
                    let up = table[(i + 1) * cols + j];
                    let ok = match player {
                        Player::Dc => up <= here,
                        Player::Ad => up > here,
                    };
                    if !ok {
                        violations.push(Violation {
                            player,
                            axis: Axis::Mse,
                            from: (mse, pa),
                            to: (grid.mse[i + 1], pa),
                            values: (here, up),
                        });
                    }
                }
                if j + 1 < cols {
                    let up = table[i * cols + j + 1];
                    let ok = match player {
                        Player::Dc => up >= here,
                        Player::Ad => up > here,
                    };
                    if !ok {
                        violations.push(Violation {
                            player,
                            axis: Axis::Pa,
                            from: (mse, pa),
                            to: (mse, grid.pa[j + 1]),
                            values: (here, up),
                        });
                    }
                }
            }
        }
    }

    Ok(MonotonicityReport {
        pa_floor: pair.pa_floor,
        mse_points: grid.mse.len(),
        pa_points: cols,
        violations,
    })
}
