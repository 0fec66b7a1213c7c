//! Learning `η*` when the adversary's utility is hidden.
//!
//! The learner commits to thresholds on a grid `η_i = a + (b-a)(i-1)/n`,
//! observes only whether each round's output was accepted, estimates
//! `α(η_i)` by the acceptance frequency and reads the MSE off the known
//! curve `c_{η_i}`. Two schedules are provided: a fixed budget of `k`
//! commits per candidate, and successive elimination with a confidence
//! radius.
//!
//! Two Lipschitz constants appear: `big_l` for `η ↦ U(η)`, which sets the
//! grid size, and `lip_alpha` for `α ↦ Q_DC(c_η(α), α)`, which sets the
//! sample budget. `ell` is always the honest-node count.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curves::{default_alpha_grid, c_curve, KernelContext, TradeoffCurve};
use crate::equilibrium::{dc_utility_at, evaluate_eta, SolveOptions};
use crate::error::{Error, Result};
use crate::math;
use crate::model::{invalid, AdversaryStrategy, GameConfig, SymmetricAtoms, UtilityExpr, UtilityPair};
use crate::sim::play_round;

/// Default grid-spacing parameter `d`, equal to the spacing of the reference
/// threshold grid.
pub const DEFAULT_D: f64 = 0.25;

/// Largest candidate grid built without an explicit `n_override`.
pub const MAX_CANDIDATES: u64 = 100_000;

/// Log note attached to every run: `d` is a free parameter.
pub const D_NOTE: &str = "d is a user-chosen grid-spacing parameter (default 0.25), not derived from the game";

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LearnerConfig {
    pub a: f64,
    pub b: f64,
    /// Confidence parameter `δ`.
    pub delta: f64,
    /// Accuracy `λ`.
    pub lambda: f64,
    /// Lipschitz constant of `η ↦ U(η)`.
    pub big_l: f64,
    /// Lipschitz constant of `α ↦ Q_DC(c_η(α), α)`; estimated from the curves
    /// when absent.
    pub lip_alpha: Option<f64>,
    pub d: f64,
    pub n_override: Option<u64>,
    pub k_override: Option<u64>,
    /// Keep per-round rows in the log.
    pub record_trace: bool,
}

/// Grid size and sample budget of a run, with the bounds they came from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Budget {
    pub n: u64,
    pub k: u64,
    pub n_bound: u64,
    pub k_bound: u64,
    pub lip_alpha: f64,
}

/// Smallest integer strictly greater than `x >= 0`, saturating.
fn next_integer(x: f64) -> u64 {
    let f = math::floor(x) + 1.0;
    if f >= u64::MAX as f64 {
        u64::MAX
    } else {
        f as u64
    }
}

impl LearnerConfig {
    pub fn new(a: f64, b: f64, delta: f64, lambda: f64, big_l: f64) -> Result<Self> {
        let cfg = Self {
            a,
            b,
            delta,
            lambda,
            big_l,
            lip_alpha: None,
            d: DEFAULT_D,
            n_override: None,
            k_override: None,
            record_trace: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 2.0 && self.a.is_finite()) {
            return Err(invalid("a", "must be finite and at least 2"));
        }
        if !(self.b > self.a && self.b.is_finite()) {
            return Err(invalid("b", "must be finite and greater than a"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid("delta", "must lie in (0, 1)"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda", "must be positive and finite"));
        }
        if !(self.big_l > 0.0 && self.big_l.is_finite()) {
            return Err(invalid("big_l", "must be positive and finite"));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(invalid("d", "must be positive and finite"));
        }
        if let Some(l) = self.lip_alpha {
            if !(l > 0.0 && l.is_finite()) {
                return Err(invalid("lip_alpha", "must be positive and finite"));
            }
        }
        if self.k_override == Some(0) {
            return Err(invalid("k_override", "must be at least 1"));
        }
        Ok(())
    }

    /// Minimal `n > (b-a) max{2L/λ, 1/d}`.
    pub fn n_bound(&self) -> u64 {
        let per_unit = (2.0 * self.big_l / self.lambda).max(1.0 / self.d);
        next_integer((self.b - self.a) * per_unit)
    }

    pub fn n(&self) -> u64 {
        self.n_override.unwrap_or_else(|| self.n_bound())
    }

    /// Minimal `k > (8 lip_alpha² / λ²) ln(2(n+1)/δ)`.
    pub fn k_bound(&self, n: u64, lip_alpha: f64) -> u64 {
        let ratio = lip_alpha / self.lambda;
        next_integer(8.0 * ratio * ratio * math::ln(2.0 * (n as f64 + 1.0) / self.delta))
    }

    pub fn budget(&self, lip_alpha: f64) -> Budget {
        let n = self.n();
        let k_bound = self.k_bound(n, lip_alpha);
        Budget {
            n,
            k: self.k_override.unwrap_or(k_bound),
            n_bound: self.n_bound(),
            k_bound,
            lip_alpha,
        }
    }

    /// `η_i = a + (b-a)(i-1)/n` for `i = 1..n+1`; just `a` when `n = 0`.
    pub fn candidates(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if self.n_override.is_none() && n >= MAX_CANDIDATES {
            return Err(Error::InvalidConfig {
                field: "n_override",
                reason: alloc::format!(
                    "the grid bound asks for {} candidates; set an override",
                    n.saturating_add(1)
                ),
            });
        }
        if n == 0 {
            return Ok(alloc::vec![self.a]);
        }
        Ok((0..=n)
            .map(|i| self.a + (self.b - self.a) * i as f64 / n as f64)
            .collect())
    }

    /// `ε_r = 2 lip_alpha √(ln(4(n+1)/δ) / 2r)`.
    pub fn radius(&self, n: u64, lip_alpha: f64, round: u64) -> f64 {
        2.0 * lip_alpha
            * math::sqrt(math::ln(4.0 * (n as f64 + 1.0) / self.delta) / (2.0 * round as f64))
    }
}

/// Trade-off curves of every grid candidate, as known to the learner.
#[derive(Debug, Clone)]
pub struct CurveFamily {
    curves: Vec<TradeoffCurve>,
}

impl CurveFamily {
    pub fn build(etas: &[f64], ell: u32, delta: f64, alpha_points: usize) -> Result<Self> {
        let grid = default_alpha_grid(alpha_points);
        let curves = etas
            .iter()
            .map(|&eta| c_curve(&KernelContext::new(ell, delta, eta)?, &grid))
            .collect::<Result<_>>()?;
        Ok(Self { curves })
    }

    pub fn from_curves(curves: Vec<TradeoffCurve>) -> Self {
        Self { curves }
    }

    pub fn curves(&self) -> &[TradeoffCurve] {
        &self.curves
    }

    pub fn etas(&self) -> Vec<f64> {
        self.curves.iter().map(|c| c.eta).collect()
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }
}

/// Largest absolute finite-difference slope of `α ↦ Q_DC(c_η(α), α)` over
/// every curve's grid.
pub fn estimate_lip_alpha(family: &CurveFamily, q_dc: &UtilityExpr) -> f64 {
    let mut lip: f64 = 0.0;
    for curve in family.curves() {
        let values: Vec<Option<f64>> = curve
            .alpha_grid
            .iter()
            .zip(&curve.c_values)
            .map(|(&a, &c)| q_dc.eval(c, a).ok())
            .collect();
        for i in 1..values.len() {
            if let (Some(u0), Some(u1)) = (values[i - 1], values[i]) {
                let slope = (u1 - u0) / (curve.alpha_grid[i] - curve.alpha_grid[i - 1]);
                lip = lip.max(slope.abs());
            }
        }
    }
    lip
}

/// Answers one commitment to a threshold with the accept bit of one round.
pub trait AcceptanceOracle {
    fn commit(&mut self, eta: f64) -> Result<bool>;
}

/// The hidden adversary's cached reply to one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct MyopicResponse {
    /// PA of the best response the DC fares worst under.
    pub alpha: f64,
    pub strategy: AdversaryStrategy,
    pub game: GameConfig,
}

/// A myopic adversary with a hidden utility pair. It best-responds to each
/// committed threshold (taking the member of `L_η` worst for the DC), plays
/// its optimal noise for one round and reveals only whether the output was
/// accepted.
///
/// The `j`-th commit to `η` draws from ChaCha8 keyed by `(seed, η)` on stream
/// `j`, so answers do not depend on the order of commits across thresholds.
#[derive(Debug, Clone)]
pub struct MyopicOracle {
    pair: UtilityPair,
    game: GameConfig,
    opts: SolveOptions,
    seed: u64,
    responses: BTreeMap<u64, MyopicResponse>,
    commits: BTreeMap<u64, u64>,
}

impl MyopicOracle {
    /// `game` supplies `ℓ`, `Δ` and `M`; its threshold is ignored.
    pub fn new(pair: UtilityPair, game: GameConfig, seed: u64) -> Self {
        Self {
            pair,
            game,
            opts: SolveOptions::default(),
            seed,
            responses: BTreeMap::new(),
            commits: BTreeMap::new(),
        }
    }

    pub fn with_options(mut self, opts: SolveOptions) -> Self {
        self.opts = opts;
        self.responses.clear();
        self
    }

    /// Restarts the commit counters under a new seed, keeping cached
    /// responses.
    pub fn reseed(&mut self, seed: u64) {
        self.seed = seed;
        self.commits.clear();
    }

    pub fn response(&mut self, eta: f64) -> Result<&MyopicResponse> {
        let key = eta.to_bits();
        if !self.responses.contains_key(&key) {
            let game = self.game.with_eta(eta)?;
            let rec = evaluate_eta(eta, &self.pair, game.ell(), game.delta(), &self.opts)?;
            if !rec.defined {
                return Err(Error::NoBestResponse { eta });
            }
            let alpha = rec.worst_alpha;
            let strategy = if alpha == 0.0 {
                let ctx = KernelContext::from_game(&game);
                SymmetricAtoms::single_pair(ctx.domain().1)?
            } else {
                let ctx = KernelContext::from_game(&game);
                let curve = c_curve(&ctx, &default_alpha_grid(self.opts.alpha_points))?;
                crate::equilibrium::optimal_noise(&curve, alpha)?
            };
            self.responses.insert(
                key,
                MyopicResponse {
                    alpha,
                    strategy: strategy.into(),
                    game,
                },
            );
        }
        Ok(&self.responses[&key])
    }
}

impl AcceptanceOracle for MyopicOracle {
    fn commit(&mut self, eta: f64) -> Result<bool> {
        let key = eta.to_bits();
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.seed.to_le_bytes());
        seed[8..16].copy_from_slice(&key.to_le_bytes());
        let count = self.commits.entry(key).or_insert(0);
        let stream = *count;
        *count += 1;
        let r = self.response(eta)?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(stream);
        Ok(play_round(&r.game, &r.strategy, 1, &mut rng).accepted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Algorithm {
    /// `k` commits to every candidate.
    GridSampling,
    /// Rounds of one commit per surviving candidate with elimination.
    SuccessiveElimination,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CandidateLog {
    pub eta: f64,
    pub commits: u64,
    pub accepts: u64,
    pub alpha_hat: f64,
    pub u_hat: f64,
    pub eliminated_at_round: Option<u64>,
}

/// One row per surviving candidate per round.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TraceRow {
    pub round: u64,
    pub candidate: usize,
    pub eta: f64,
    pub alpha_hat: f64,
    pub u_hat: f64,
    pub eliminated: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TrialLog {
    pub algorithm: Algorithm,
    pub candidates: Vec<CandidateLog>,
    pub final_choice: f64,
    pub final_index: usize,
    pub budget: Budget,
    pub lip_alpha_estimated: bool,
    pub config: LearnerConfig,
    pub d_note: &'static str,
    pub trace: Vec<TraceRow>,
}

impl TrialLog {
    pub fn eliminated(&self) -> usize {
        self.candidates
            .iter()
            .filter(|c| c.eliminated_at_round.is_some())
            .count()
    }
}

struct Setup {
    etas: Vec<f64>,
    budget: Budget,
    estimated: bool,
}

fn setup(cfg: &LearnerConfig, q_dc: &UtilityExpr, family: &CurveFamily) -> Result<Setup> {
    cfg.validate()?;
    let etas = cfg.candidates()?;
    if family.etas() != etas {
        return Err(invalid("curve family", "must match the learner's candidate grid"));
    }
    let (lip, estimated) = match cfg.lip_alpha {
        Some(l) => (l, false),
        None => (estimate_lip_alpha(family, q_dc), true),
    };
    Ok(Setup {
        etas,
        budget: cfg.budget(lip),
        estimated,
    })
}

/// `Û = Q_DC(c_η(α̂), α̂)`.
fn u_hat(curve: &TradeoffCurve, q_dc: &UtilityExpr, accepts: u64, commits: u64) -> Result<(f64, f64)> {
    let alpha = accepts as f64 / commits as f64;
    Ok((alpha, dc_utility_at(curve, q_dc, alpha)?))
}

/// First index of the largest value among `indices`.
fn argmax(values: &[f64], indices: impl Iterator<Item = usize>) -> usize {
    let mut best: Option<usize> = None;
    for i in indices {
        match best {
            Some(j) if values[i] <= values[j] => {}
            _ => best = Some(i),
        }
    }
    best.expect("at least one candidate")
}

fn finish(
    algorithm: Algorithm,
    cfg: &LearnerConfig,
    s: Setup,
    candidates: Vec<CandidateLog>,
    final_index: usize,
    trace: Vec<TraceRow>,
) -> (f64, TrialLog) {
    let eta = s.etas[final_index];
    (
        eta,
        TrialLog {
            algorithm,
            candidates,
            final_choice: eta,
            final_index,
            budget: s.budget,
            lip_alpha_estimated: s.estimated,
            config: *cfg,
            d_note: D_NOTE,
            trace,
        },
    )
}

/// Commits `k` times to every candidate (round by round, candidates in grid
/// order) and returns the candidate with the best estimated utility.
pub fn algorithm3<O: AcceptanceOracle>(
    cfg: &LearnerConfig,
    q_dc: &UtilityExpr,
    family: &CurveFamily,
    oracle: &mut O,
) -> Result<(f64, TrialLog)> {
    let s = setup(cfg, q_dc, family)?;
    let k = s.budget.k;
    let m = s.etas.len();
    let curves = family.curves();
    let mut accepts = alloc::vec![0u64; m];
    let mut trace = Vec::new();
    for r in 1..=k {
        for i in 0..m {
            if oracle.commit(s.etas[i])? {
                accepts[i] += 1;
            }
            if cfg.record_trace {
                let (alpha_hat, u) = u_hat(&curves[i], q_dc, accepts[i], r)?;
                trace.push(TraceRow {
                    round: r,
                    candidate: i,
                    eta: s.etas[i],
                    alpha_hat,
                    u_hat: u,
                    eliminated: false,
                });
            }
        }
    }
    let mut logs = Vec::with_capacity(m);
    let mut utilities = Vec::with_capacity(m);
    for i in 0..m {
        let (alpha_hat, u) = u_hat(&curves[i], q_dc, accepts[i], k)?;
        utilities.push(u);
        logs.push(CandidateLog {
            eta: s.etas[i],
            commits: k,
            accepts: accepts[i],
            alpha_hat,
            u_hat: u,
            eliminated_at_round: None,
        });
    }
    let best = argmax(&utilities, 0..m);
    Ok(finish(Algorithm::GridSampling, cfg, s, logs, best, trace))
}

/// Successive elimination: each round commits once to every surviving
/// candidate, then drops those whose estimated utility trails the leader by
/// more than `ε_r`. Returns the best survivor after `k` rounds.
pub fn algorithm4<O: AcceptanceOracle>(
    cfg: &LearnerConfig,
    q_dc: &UtilityExpr,
    family: &CurveFamily,
    oracle: &mut O,
) -> Result<(f64, TrialLog)> {
    let s = setup(cfg, q_dc, family)?;
    let (n, k, lip) = (s.budget.n, s.budget.k, s.budget.lip_alpha);
    let m = s.etas.len();
    let curves = family.curves();
    let mut logs: Vec<CandidateLog> = s
        .etas
        .iter()
        .map(|&eta| CandidateLog {
            eta,
            commits: 0,
            accepts: 0,
            alpha_hat: 0.0,
            u_hat: f64::NEG_INFINITY,
            eliminated_at_round: None,
        })
        .collect();
    let mut utilities = alloc::vec![f64::NEG_INFINITY; m];
    let mut trace = Vec::new();
    for r in 1..=k {
        let alive: Vec<usize> = (0..m)
            .filter(|&i| logs[i].eliminated_at_round.is_none())
            .collect();
        for &i in &alive {
            let c = &mut logs[i];
            c.commits += 1;
            if oracle.commit(c.eta)? {
                c.accepts += 1;
            }
            let (alpha_hat, u) = u_hat(&curves[i], q_dc, c.accepts, c.commits)?;
            c.alpha_hat = alpha_hat;
            c.u_hat = u;
            utilities[i] = u;
        }
        let leader = argmax(&utilities, alive.iter().copied());
        let eps = cfg.radius(n, lip, r);
        for &i in &alive {
            let gap = utilities[leader] - utilities[i];
            let out = gap > eps;
            if out {
                logs[i].eliminated_at_round = Some(r);
            }
            if cfg.record_trace {
                trace.push(TraceRow {
                    round: r,
                    candidate: i,
                    eta: s.etas[i],
                    alpha_hat: logs[i].alpha_hat,
                    u_hat: utilities[i],
                    eliminated: out,
                });
            }
        }
    }
    let best = argmax(
        &utilities,
        (0..m).filter(|&i| logs[i].eliminated_at_round.is_none()),
    );
    Ok(finish(Algorithm::SuccessiveElimination, cfg, s, logs, best, trace))
}

/// A learning problem with a known ground truth.
#[derive(Debug, Clone)]
pub struct LearnInstance {
    pub pair: UtilityPair,
    /// Supplies `ℓ`, `Δ` and `M`.
    pub game: GameConfig,
    pub learner: LearnerConfig,
    pub algorithm: Algorithm,
    pub opts: SolveOptions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RunRecord {
    pub seed: u64,
    pub eta_hat: f64,
    /// True (analytic) utility of the returned candidate.
    pub utility: f64,
    pub failed: bool,
    pub eliminated: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FailureReport {
    pub algorithm: Algorithm,
    pub repetitions: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub delta: f64,
    pub lambda: f64,
    /// One-sided 95% binomial slack `1.96 √(δ(1-δ)/R)`.
    pub slack: f64,
    pub threshold: f64,
    /// 95% Wilson interval of the failure probability.
    pub wilson: (f64, f64),
    pub passed: bool,
    pub u_star: f64,
    /// Analytic utility of every candidate.
    pub truth: Vec<f64>,
    pub runs: Vec<RunRecord>,
}

const Z95: f64 = 1.96;

/// Wilson score interval for `failures / trials` at 95%.
pub fn wilson_interval(failures: usize, trials: usize) -> (f64, f64) {
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * math::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Pessimistic analytic utility `min_{α ∈ L_η} Q_DC` of every candidate.
pub fn true_utilities(instance: &LearnInstance) -> Result<Vec<f64>> {
    instance
        .learner
        .candidates()?
        .into_iter()
        .map(|eta| {
            evaluate_eta(
                eta,
                &instance.pair,
                instance.game.ell(),
                instance.game.delta(),
                &instance.opts,
            )
            .map(|r| r.worst_dc_utility)
        })
        .collect()
}

/// Runs the learner once per seed and counts runs whose choice falls more
/// than `λ` short of the best candidate's true utility.
pub fn evaluate_learner(instance: &LearnInstance, seeds: &[u64]) -> Result<FailureReport> {
    if seeds.is_empty() {
        return Err(invalid("seeds", "must not be empty"));
    }
    let mut learner = instance.learner;
    learner.record_trace = false;
    let etas = learner.candidates()?;
    let truth = true_utilities(instance)?;
    let u_star = truth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let family = CurveFamily::build(
        &etas,
        instance.game.ell(),
        instance.game.delta(),
        instance.opts.alpha_points,
    )?;
    let mut oracle = MyopicOracle::new(instance.pair.clone(), instance.game, seeds[0])
        .with_options(instance.opts);
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        oracle.reseed(seed);
        let (eta_hat, log) = match instance.algorithm {
            Algorithm::GridSampling => algorithm3(&learner, &instance.pair.q_dc, &family, &mut oracle)?,
            Algorithm::SuccessiveElimination => {
                algorithm4(&learner, &instance.pair.q_dc, &family, &mut oracle)?
            }
        };
        let utility = truth[log.final_index];
        runs.push(RunRecord {
            seed,
            eta_hat,
            utility,
            failed: u_star - utility > learner.lambda,
            eliminated: log.eliminated(),
        });
    }
    let failures = runs.iter().filter(|r| r.failed).count();
    let reps = seeds.len() as f64;
    let failure_rate = failures as f64 / reps;
    let delta = learner.delta;
    let slack = Z95 * math::sqrt(delta * (1.0 - delta) / reps);
    Ok(FailureReport {
        algorithm: instance.algorithm,
        repetitions: seeds.len(),
        failures,
        failure_rate,
        delta,
        lambda: learner.lambda,
        slack,
        threshold: delta + slack,
        wilson: wilson_interval(failures, seeds.len()),
        passed: failure_rate <= delta + slack,
        u_star,
        truth,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct AlwaysAccept;

    impl AcceptanceOracle for AlwaysAccept {
        fn commit(&mut self, _eta: f64) -> Result<bool> {
            Ok(true)
        }
    }

    fn game() -> GameConfig {
        GameConfig::new(1, 1.0, 1000.0, 2.0).unwrap()
    }

    fn example_one() -> UtilityPair {
        UtilityPair::parse("-MSE + 25*PA", "log(MSE) + 0.75*log(PA)").unwrap()
    }

    fn config(n: u64, k: u64) -> LearnerConfig {
        let mut c = LearnerConfig::new(2.0, 8.0, 0.1, 0.5, 1.0).unwrap();
        c.n_override = Some(n);
        c.k_override = Some(k);
        c
    }

    #[test]
    fn bounds_are_minimal_integers() {
        let c = LearnerConfig::new(2.0, 8.0, 0.1, 0.5, 1.0).unwrap();
        // 6 * max(4, 4) = 24 -> 25
        assert_eq!(c.n_bound(), 25);
        let k = c.k_bound(24, 1.0);
        let x = 8.0 / 0.25 * (2.0 * 25.0 / 0.1_f64).ln();
        assert_eq!(k as f64, x.floor() + 1.0);
        assert!(LearnerConfig::new(1.0, 8.0, 0.1, 0.5, 1.0).is_err());
        assert!(LearnerConfig::new(2.0, 2.0, 0.1, 0.5, 1.0).is_err());
        assert!(LearnerConfig::new(2.0, 8.0, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn candidate_grid() {
        let c = config(24, 1);
        let etas = c.candidates().unwrap();
        assert_eq!(etas.len(), 25);
        assert_eq!(etas[0], 2.0);
        assert_eq!(etas[24], 8.0);
        assert_eq!(etas[19], 6.75);
        assert_eq!(config(0, 1).candidates().unwrap(), alloc::vec![2.0]);
    }

    #[test]
    fn single_candidate_is_returned() {
        let c = config(0, 5);
        let fam = CurveFamily::build(&[2.0], 1, 1.0, 256).unwrap();
        let q = example_one().q_dc;
        let (eta, log) = algorithm3(&c, &q, &fam, &mut AlwaysAccept).unwrap();
        assert_eq!(eta, 2.0);
        assert_eq!(log.candidates[0].commits, 5);
    }

    #[test]
    fn always_accept_picks_full_acceptance_optimum() {
        let c = config(24, 3);
        let etas = c.candidates().unwrap();
        let fam = CurveFamily::build(&etas, 1, 1.0, 256).unwrap();
        let q = example_one().q_dc;
        let (eta, log) = algorithm3(&c, &q, &fam, &mut AlwaysAccept).unwrap();
        let direct: Vec<f64> = fam
            .curves()
            .iter()
            .map(|cv| q.eval(cv.c_at(1.0).unwrap(), 1.0).unwrap())
            .collect();
        assert_eq!(eta, etas[argmax(&direct, 0..direct.len())]);
        assert!(log.candidates.iter().all(|c| c.alpha_hat == 1.0));
        assert_eq!(log.trace.len(), 3 * 25);
    }

    #[test]
    fn flat_utility_eliminates_nothing() {
        let c = config(24, 50);
        let fam = CurveFamily::build(&c.candidates().unwrap(), 1, 1.0, 256).unwrap();
        let mut oracle = MyopicOracle::new(example_one(), game(), 3);
        let mut cfg = c;
        cfg.lip_alpha = Some(1.0);
        let (eta, log) = algorithm4(&cfg, &UtilityExpr::constant(1.0), &fam, &mut oracle).unwrap();
        assert_eq!(log.eliminated(), 0);
        assert_eq!(eta, 2.0);
    }

    #[test]
    fn gap_eliminates_when_radius_allows() {
        // with an always-accept oracle Û is exact, so elimination happens at
        // the first round where ε_r drops below the gap
        let mut c = config(1, 200);
        c.lip_alpha = Some(1.0);
        let etas = c.candidates().unwrap();
        let fam = CurveFamily::build(&etas, 1, 1.0, 256).unwrap();
        let q: UtilityExpr = "-MSE".parse().unwrap();
        let u: Vec<f64> = fam
            .curves()
            .iter()
            .map(|cv| -cv.c_at(1.0).unwrap())
            .collect();
        let gap = (u[0] - u[1]).abs();
        let first = (1..).find(|&r| c.radius(1, 1.0, r) < gap).unwrap();
        let (_, log) = algorithm4(&c, &q, &fam, &mut AlwaysAccept).unwrap();
        let loser = if u[0] > u[1] { 1 } else { 0 };
        assert_eq!(log.candidates[loser].eliminated_at_round, Some(first));
        assert_eq!(log.candidates[loser].commits, first);
    }

    #[test]
    fn oracle_examples() {
        let mut o = MyopicOracle::new(UtilityPair::parse("PA", "PA").unwrap(), game(), 1);
        assert_eq!(o.response(4.0).unwrap().alpha, 1.0);
        assert!((0..500).all(|_| o.commit(4.0).unwrap()));

        let mut o = MyopicOracle::new(example_one(), game(), 2);
        let hits = (0..20_000).filter(|_| o.commit(6.75).unwrap()).count();
        assert!((hits as f64 / 20_000.0 - 0.807).abs() < 0.015, "{hits}");
    }

    #[test]
    fn oracle_answers_do_not_depend_on_commit_order() {
        let mut a = MyopicOracle::new(example_one(), game(), 9);
        let mut b = a.clone();
        let xs: Vec<bool> = (0..50).map(|_| a.commit(3.0).unwrap()).collect();
        for _ in 0..50 {
            b.commit(5.0).unwrap();
        }
        let ys: Vec<bool> = (0..50).map(|_| b.commit(3.0).unwrap()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn learners_agree_without_eliminations() {
        let mut c = config(4, 40);
        c.lip_alpha = Some(1e6);
        let fam = CurveFamily::build(&c.candidates().unwrap(), 1, 1.0, 512).unwrap();
        let q = example_one().q_dc;
        let mut o3 = MyopicOracle::new(example_one(), game(), 5);
        let mut o4 = o3.clone();
        let (_, l3) = algorithm3(&c, &q, &fam, &mut o3).unwrap();
        let (_, l4) = algorithm4(&c, &q, &fam, &mut o4).unwrap();
        assert_eq!(l4.eliminated(), 0);
        for (x, y) in l3.candidates.iter().zip(&l4.candidates) {
            assert_eq!(x.alpha_hat, y.alpha_hat);
        }
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 50);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.05 && hi < 0.1);
        let (lo, hi) = wilson_interval(25, 50);
        assert!((lo + hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vacuous_accuracy_never_fails() {
        let mut learner = config(4, 20);
        learner.lambda = 1e6;
        let inst = LearnInstance {
            pair: example_one(),
            game: game(),
            learner,
            algorithm: Algorithm::GridSampling,
            opts: SolveOptions::default(),
        };
        let r = evaluate_learner(&inst, &[1, 2, 3]).unwrap();
        assert_eq!(r.failures, 0);
        assert!(r.passed);
    }
}
