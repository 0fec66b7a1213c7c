//! Rayon drivers for the core computations. Each gives the same bits as its
//! sequential counterpart: work items are independent and results are
//! reduced in a fixed order.

use coding_game_core::curves::{c_curve, KernelContext, TradeoffCurve};
use coding_game_core::equilibrium::{
    assemble_solution, evaluate_eta, validate_eta_grid, SolveOptions, StackelbergSolution,
};
use coding_game_core::model::{AdversaryStrategy, GameConfig, UtilityPair};
use coding_game_core::sim::{chunks, combine, tally_rounds, EmpiricalStats, Tally};
use coding_game_core::{Error, Result};
use rayon::prelude::*;

pub fn monte_carlo(
    config: &GameConfig,
    strategy: &AdversaryStrategy,
    adversary_count: u32,
    rounds: u64,
    seed: u64,
) -> Result<EmpiricalStats> {
    if rounds == 0 || adversary_count == 0 {
        // let the core produce the validation error
        return coding_game_core::sim::monte_carlo(config, strategy, adversary_count, rounds, seed);
    }
    let tallies: Vec<Tally> = chunks(rounds)
        .into_par_iter()
        .map(|c| tally_rounds(config, strategy, adversary_count, seed, c))
        .collect();
    Ok(EmpiricalStats::from_tally(&combine(&tallies), seed))
}

pub fn sybil_compare(
    config: &GameConfig,
    strategy: &AdversaryStrategy,
    clone_counts: &[u32],
    rounds: u64,
    seed: u64,
) -> Result<Vec<(u32, EmpiricalStats)>> {
    if clone_counts.is_empty() {
        return coding_game_core::sim::sybil_compare(config, strategy, clone_counts, rounds, seed);
    }
    clone_counts
        .iter()
        .map(|&c| Ok((c, monte_carlo(config, strategy, c, rounds, seed)?)))
        .collect()
}

pub fn stackelberg_solve(
    eta_grid: &[f64],
    pair: &UtilityPair,
    ell: u32,
    delta: f64,
    opts: &SolveOptions,
) -> Result<StackelbergSolution> {
    validate_eta_grid(eta_grid)?;
    let per_eta = eta_grid
        .par_iter()
        .map(|&eta| evaluate_eta(eta, pair, ell, delta, opts))
        .collect::<Result<Vec<_>>>()?;
    assemble_solution(per_eta, ell, delta, opts)
}

pub fn curves(
    eta_grid: &[f64],
    ell: u32,
    delta: f64,
    alpha_grid: &[f64],
) -> Result<Vec<TradeoffCurve>> {
    if eta_grid.is_empty() {
        return Err(Error::InvalidConfig {
            field: "eta_grid",
            reason: "must not be empty".into(),
        });
    }
    eta_grid
        .par_iter()
        .map(|&eta| c_curve(&KernelContext::new(ell, delta, eta)?, alpha_grid))
        .collect()
}
