//! Monte-Carlo play of the game.
//!
//! Round `r` of a run with seed `s` draws from ChaCha8 keyed by `s` on stream
//! `r`, so every round is reproducible on its own and runs can be split into
//! chunks and evaluated in any order. Per-chunk sums are combined in a fixed
//! pairwise order.
//!
//! Rounds are evaluated relative to the true value `u`: the reports are
//! `u + n_i`, and both the acceptance test and the midrange error `û - u`
//! only depend on the noises `n_i`. `u` is still drawn each round.

use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curves::KernelContext;
use crate::error::{Error, Result};
use crate::math;
use crate::model::{AdversaryStrategy, GameConfig, SamplerKind, SymmetricAtoms};

/// Rounds per independently evaluated chunk.
pub const CHUNK_ROUNDS: u64 = 1 << 14;

/// Agreement threshold of [`analytic_check`], in standard errors.
pub const CHECK_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RoundOutcome {
    pub accepted: bool,
    /// `û - u`, present iff accepted.
    pub estimate_error: Option<f64>,
    /// `max y - min y`.
    pub spread: f64,
}

/// Acceptance test and midrange estimate on raw reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub accepted: bool,
    pub spread: f64,
    pub estimate: f64,
}

/// Accepts iff `max y - min y <= width` and estimates by `(max y + min y) / 2`.
pub fn decide(reports: &[f64], width: f64) -> Decision {
    let (lo, hi) = reports
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
            (lo.min(y), hi.max(y))
        });
    let spread = hi - lo;
    Decision {
        accepted: spread <= width,
        spread,
        estimate: 0.5 * (hi + lo),
    }
}

/// Outcome of one round given the honest noises and the adversarial offset
/// reported by `adversary_count` clones.
pub fn evaluate_round(
    config: &GameConfig,
    honest: &[f64],
    offset: f64,
    adversary_count: u32,
) -> RoundOutcome {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &n in honest {
        lo = lo.min(n);
        hi = hi.max(n);
    }
    for _ in 0..adversary_count {
        lo = lo.min(offset);
        hi = hi.max(offset);
    }
    outcome(config, lo, hi)
}

fn outcome(config: &GameConfig, lo: f64, hi: f64) -> RoundOutcome {
    let spread = hi - lo;
    let accepted = spread <= config.acceptance_width();
    RoundOutcome {
        accepted,
        estimate_error: accepted.then_some(0.5 * (hi + lo)),
        spread,
    }
}

fn draw_offset<R: RngCore>(strategy: &AdversaryStrategy, rng: &mut R) -> f64 {
    match strategy {
        AdversaryStrategy::SymmetricAtoms(atoms) => {
            let t: f64 = rng.random();
            let negative: bool = rng.random();
            atoms.offset_for(t, negative)
        }
        AdversaryStrategy::OpaqueSampler(s) => match s.kind {
            SamplerKind::Uniform { lo, hi } => rng.random_range(lo..=hi),
            SamplerKind::SymmetricUniform { lo, hi } => {
                let magnitude = rng.random_range(lo..=hi);
                let negative: bool = rng.random();
                if negative {
                    -magnitude
                } else {
                    magnitude
                }
            }
            SamplerKind::Point { offset } => offset,
        },
    }
}

/// One round: draws `u`, the `ℓ` honest noises and one adversarial offset
/// (reported by every clone), in that order.
pub fn play_round<R: RngCore>(
    config: &GameConfig,
    strategy: &AdversaryStrategy,
    adversary_count: u32,
    rng: &mut R,
) -> RoundOutcome {
    let m = config.m_half();
    let _u: f64 = rng.random_range(-m..=m);
    let d = config.delta();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..config.ell() {
        let n = rng.random_range(-d..=d);
        lo = lo.min(n);
        hi = hi.max(n);
    }
    let offset = draw_offset(strategy, rng);
    if adversary_count > 0 {
        lo = lo.min(offset);
        hi = hi.max(offset);
    }
    outcome(config, lo, hi)
}

/// Generator for round `round` of a run seeded with `seed`.
pub fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

fn check_run(rounds: u64, adversary_count: u32) -> Result<()> {
    if rounds == 0 {
        return Err(Error::InvalidConfig {
            field: "rounds",
            reason: "must be at least 1".into(),
        });
    }
    if adversary_count == 0 {
        return Err(Error::InvalidConfig {
            field: "adversary_count",
            reason: "must be at least 1".into(),
        });
    }
    Ok(())
}

/// Per-round outcomes for the given round indices.
pub fn trace_rounds(
    config: &GameConfig,
    strategy: &AdversaryStrategy,
    adversary_count: u32,
    seed: u64,
    rounds: Range<u64>,
) -> Vec<RoundOutcome> {
    let base = ChaCha8Rng::seed_from_u64(seed);
    rounds
        .map(|r| {
            let mut rng = base.clone();
            rng.set_stream(r);
            play_round(config, strategy, adversary_count, &mut rng)
        })
        .collect()
}

/// Sufficient statistics of a block of rounds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub rounds: u64,
    pub accepted: u64,
    pub sum_sq: f64,
    pub sum_quad: f64,
}

impl Tally {
    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            rounds: self.rounds + other.rounds,
            accepted: self.accepted + other.accepted,
            sum_sq: self.sum_sq + other.sum_sq,
            sum_quad: self.sum_quad + other.sum_quad,
        }
    }
}

/// Accumulates the given rounds.
pub fn tally_rounds(
    config: &GameConfig,
    strategy: &AdversaryStrategy,
    adversary_count: u32,
    seed: u64,
    rounds: Range<u64>,
) -> Tally {
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    for r in rounds {
        let mut rng = base.clone();
        rng.set_stream(r);
        let o = play_round(config, strategy, adversary_count, &mut rng);
        t.rounds += 1;
        if let Some(e) = o.estimate_error {
            let e2 = e * e;
            t.accepted += 1;
            t.sum_sq += e2;
            t.sum_quad += e2 * e2;
        }
    }
    t
}

/// Round ranges of the chunks of a run.
pub fn chunks(rounds: u64) -> Vec<Range<u64>> {
    (0..rounds.div_ceil(CHUNK_ROUNDS))
        .map(|c| c * CHUNK_ROUNDS..((c + 1) * CHUNK_ROUNDS).min(rounds))
        .collect()
}

/// Pairwise sum of chunk tallies in a fixed tree order.
pub fn combine(tallies: &[Tally]) -> Tally {
    match tallies.len() {
        0 => Tally::default(),
        1 => tallies[0],
        n => combine(&tallies[..n / 2]).merge(combine(&tallies[n / 2..])),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EmpiricalStats {
    pub rounds: u64,
    pub accepted_count: u64,
    pub pa_hat: f64,
    /// Mean squared error over accepted rounds; absent when none was accepted.
    pub mse_hat: Option<f64>,
    pub pa_stderr: f64,
    /// Absent with fewer than two accepted rounds.
    pub mse_stderr: Option<f64>,
    pub seed: u64,
}

impl EmpiricalStats {
    pub fn from_tally(t: &Tally, seed: u64) -> Self {
        let n = t.rounds as f64;
        let pa_hat = t.accepted as f64 / n;
        let acc = t.accepted as f64;
        let mse_hat = (t.accepted > 0).then(|| t.sum_sq / acc);
        let mse_stderr = mse_hat.filter(|_| t.accepted > 1).map(|m| {
            let var = ((t.sum_quad - acc * m * m) / (acc - 1.0)).max(0.0);
            math::sqrt(var / acc)
        });
        Self {
            rounds: t.rounds,
            accepted_count: t.accepted,
            pa_hat,
            mse_hat,
            pa_stderr: math::sqrt(pa_hat * (1.0 - pa_hat) / n),
            mse_stderr,
            seed,
        }
    }
}

/// Estimates PA and the conditional MSE over `rounds` independent rounds.
pub fn monte_carlo(
    config: &GameConfig,
    strategy: &AdversaryStrategy,
    adversary_count: u32,
    rounds: u64,
    seed: u64,
) -> Result<EmpiricalStats> {
    check_run(rounds, adversary_count)?;
    let tallies: Vec<Tally> = chunks(rounds)
        .into_iter()
        .map(|c| tally_rounds(config, strategy, adversary_count, seed, c))
        .collect();
    Ok(EmpiricalStats::from_tally(&combine(&tallies), seed))
}

/// Runs [`monte_carlo`] for each clone count with the same seed, so all runs
/// see the same `u`, honest and offset draws.
pub fn sybil_compare(
    config: &GameConfig,
    strategy: &AdversaryStrategy,
    clone_counts: &[u32],
    rounds: u64,
    seed: u64,
) -> Result<Vec<(u32, EmpiricalStats)>> {
    if clone_counts.is_empty() {
        return Err(Error::InvalidConfig {
            field: "clone_counts",
            reason: "must not be empty".into(),
        });
    }
    clone_counts
        .iter()
        .map(|&c| Ok((c, monte_carlo(config, strategy, c, rounds, seed)?)))
        .collect()
}

/// Simulated statistics against the mixture formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AnalyticCheck {
    pub predicted_pa: f64,
    pub predicted_mse: Option<f64>,
    pub pa_hat: f64,
    pub mse_hat: Option<f64>,
    pub pa_z: f64,
    pub mse_z: Option<f64>,
    /// The MSE comparison was impossible: predicted or simulated MSE absent.
    pub mse_absent: bool,
    pub passed: bool,
}

fn z_score(diff: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        diff / stderr
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// z-scores of `(pa_hat, mse_hat)` against the predicted `(PA, MSE)` of the
/// strategy; passes within [`CHECK_SIGMAS`] standard errors. The PA standard
/// error is taken at the predicted PA.
pub fn analytic_check(
    ctx: &KernelContext,
    strategy: &SymmetricAtoms,
    stats: &EmpiricalStats,
) -> Result<AnalyticCheck> {
    let p = ctx.mixture(strategy)?;
    let n = stats.rounds as f64;
    let pa_z = z_score(stats.pa_hat - p.pa, math::sqrt(p.pa * (1.0 - p.pa) / n));
    let mse_z = match (p.mse, stats.mse_hat, stats.mse_stderr) {
        (Some(m), Some(m_hat), Some(se)) => Some(z_score(m_hat - m, se)),
        _ => None,
    };
    let passed = pa_z.abs() <= CHECK_SIGMAS && mse_z.is_none_or(|z| z.abs() <= CHECK_SIGMAS);
    Ok(AnalyticCheck {
        predicted_pa: p.pa,
        predicted_mse: p.mse,
        pa_hat: stats.pa_hat,
        mse_hat: stats.mse_hat,
        pa_z,
        mse_z,
        mse_absent: mse_z.is_none(),
        passed,
    })
}
