//! The subcommands. Each validates everything it needs from the config
//! before computing, and renders its outputs in memory.

use coding_game_core::curves::{c_curve, default_alpha_grid, KernelContext};
use coding_game_core::equilibrium::{optimal_noise, properness_probe, ProbeTable, StackelbergSolution};
use coding_game_core::learn::{
    algorithm3, algorithm4, evaluate_learner, Algorithm, CurveFamily, FailureReport,
    LearnInstance, MyopicOracle, TrialLog,
};
use coding_game_core::model::{validate_monotonicity, AdversaryStrategy, SymmetricAtoms};
use coding_game_core::sim::{analytic_check, AnalyticCheck, EmpiricalStats};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{json, num, opt, Artifact, Table};
use crate::parallel;

/// Rendered outputs, a one-paragraph summary for the terminal and the exit
/// code to use once the outputs are written.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(artifacts: Vec<Artifact>, summary: String) -> Self {
        Self {
            artifacts,
            summary,
            exit_code: 0,
        }
    }
}

#[derive(Serialize)]
struct CurveDoc<'a> {
    eta: f64,
    ell: u32,
    delta: f64,
    limit_at_zero: f64,
    chords: &'a [(f64, f64)],
    alpha: &'a [f64],
    h: Vec<f64>,
    h_star: Vec<f64>,
    c: &'a [f64],
}

pub fn curve(cfg: &RunConfig) -> CliResult<Outcome> {
    let etas = cfg.eta_grid()?;
    for &eta in &etas {
        cfg.game(eta)?;
    }
    let alpha_grid = cfg.curve_alpha_grid()?;

    let curves = parallel::curves(&etas, cfg.game.ell, cfg.game.delta, &alpha_grid)?;
    let mut table = Table::new(&["eta", "alpha", "h", "h_star", "c"]);
    let mut docs = Vec::with_capacity(curves.len());
    for c in &curves {
        let mut h = Vec::with_capacity(alpha_grid.len());
        let mut h_star = Vec::with_capacity(alpha_grid.len());
        for (&a, &cv) in alpha_grid.iter().zip(&c.c_values) {
            let (hv, hs) = (c.h_at(a)?, c.h_star_at(a)?);
            table.row(vec![num(c.eta), num(a), num(hv), num(hs), num(cv)]);
            h.push(hv);
            h_star.push(hs);
        }
        docs.push(CurveDoc {
            eta: c.eta,
            ell: c.ell,
            delta: c.delta,
            limit_at_zero: c.limit_at_zero,
            chords: &c.samples.segments,
            alpha: &c.alpha_grid,
            h,
            h_star,
            c: &c.c_values,
        });
    }
    let summary = format!(
        "{} curve(s) on {} alpha point(s), eta from {} to {}",
        curves.len(),
        alpha_grid.len(),
        etas[0],
        etas[etas.len() - 1]
    );
    Ok(Outcome::ok(
        vec![json("curve", &docs)?, table.into_artifact("curve")?],
        summary,
    ))
}

#[derive(Serialize)]
struct EquilibriumDoc<'a> {
    solution: &'a StackelbergSolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    properness: Option<&'a ProbeTable>,
}

fn solve(cfg: &RunConfig) -> CliResult<StackelbergSolution> {
    let pair = cfg.pair()?;
    let etas = cfg.eta_grid()?;
    cfg.game(etas[0])?;
    let opts = cfg.solve_options()?;
    Ok(parallel::stackelberg_solve(
        &etas,
        &pair,
        cfg.game.ell,
        cfg.game.delta,
        &opts,
    )?)
}

fn point_summary(sol: &StackelbergSolution) -> String {
    let p = &sol.point;
    let mut s = format!(
        "eta* = {}, PA = {:.6}, MSE = {:.6}, DC utility = {:.6}",
        p.eta_star, p.alpha, p.mse, p.dc_utility
    );
    if p.boundary {
        s.push_str(" (boundary: PA -> 0, MSE is the limit)");
    }
    s
}

pub fn equilibrium(cfg: &RunConfig) -> CliResult<Outcome> {
    // validate the probe before solving
    let pair = cfg.pair()?;
    let opts = cfg.solve_options()?;
    let ell_values = match cfg.properness {
        Some(ref p) => {
            let v = &p.ell_values;
            if v.is_empty() || v[0] == 0 || v.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::invalid(
                    "properness.ell_values",
                    "must be strictly increasing positive integers",
                ));
            }
            Some(v.clone())
        }
        None => None,
    };
    cfg.eta_grid()?;

    let sol = solve(cfg)?;
    let probe = match ell_values {
        Some(v) => Some(properness_probe(
            &pair,
            sol.point.eta_star,
            &v,
            cfg.game.delta,
            &opts,
        )?),
        None => None,
    };

    let p = &sol.point;
    let mut summary = Table::new(&[
        "eta_star",
        "alpha",
        "mse",
        "dc_utility",
        "ad_utility",
        "boundary",
    ]);
    summary.row(vec![
        num(p.eta_star),
        num(p.alpha),
        num(p.mse),
        num(p.dc_utility),
        num(p.ad_utility),
        p.boundary.to_string(),
    ]);
    let mut per_eta = Table::new(&[
        "eta",
        "alphas",
        "ad_utility",
        "worst_dc_utility",
        "worst_alpha",
        "boundary",
        "defined",
    ]);
    for r in &sol.per_eta {
        let alphas: Vec<String> = r.best_response.alphas.iter().map(|&a| num(a)).collect();
        per_eta.row(vec![
            num(r.eta),
            alphas.join(";"),
            num(r.best_response.ad_utility),
            num(r.worst_dc_utility),
            num(r.worst_alpha),
            r.best_response.boundary.to_string(),
            r.defined.to_string(),
        ]);
    }
    let mut artifacts = vec![
        json(
            "equilibrium",
            &EquilibriumDoc {
                solution: &sol,
                properness: probe.as_ref(),
            },
        )?,
        summary.into_artifact("equilibrium")?,
        per_eta.into_artifact("equilibrium_per_eta")?,
    ];
    let mut text = point_summary(&sol);
    if let Some(ref t) = probe {
        let mut table = Table::new(&["ell", "alpha", "mse", "dc_utility", "boundary"]);
        for r in &t.rows {
            table.row(vec![
                r.ell.to_string(),
                num(r.alpha),
                num(r.mse),
                num(r.dc_utility),
                r.boundary.to_string(),
            ]);
        }
        artifacts.push(table.into_artifact("properness")?);
        text.push_str(&format!(
            "\nproperness at eta* over ell = {:?}: {:?}",
            t.rows.iter().map(|r| r.ell).collect::<Vec<_>>(),
            t.trend
        ));
    }
    Ok(Outcome::ok(artifacts, text))
}

#[derive(Serialize)]
struct NoiseDoc {
    eta: f64,
    alpha: f64,
    boundary: bool,
    atoms: SymmetricAtoms,
    predicted_pa: f64,
    predicted_mse: Option<f64>,
    /// `c_η(α)`, or the limit at 0 for a boundary point.
    target_mse: f64,
}

pub fn noise(cfg: &RunConfig) -> CliResult<Outcome> {
    let (eta, alpha, boundary, curve, atoms) = match (cfg.noise.eta, cfg.noise.alpha) {
        (Some(eta), Some(alpha)) => {
            let game = cfg.game(eta)?;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(CliError::invalid("noise.alpha", "must lie in (0, 1]"));
            }
            let opts = cfg.solve_options()?;
            let curve = c_curve(
                &KernelContext::from_game(&game),
                &default_alpha_grid(opts.alpha_points),
            )?;
            let atoms = optimal_noise(&curve, alpha)?;
            (eta, alpha, false, curve, atoms)
        }
        (None, None) => {
            let sol = solve(cfg)?;
            let p = sol.point;
            let opts = cfg.solve_options()?;
            let curve = c_curve(
                &KernelContext::new(cfg.game.ell, cfg.game.delta, p.eta_star)?,
                &default_alpha_grid(opts.alpha_points),
            )?;
            (p.eta_star, p.alpha, p.boundary, curve, p.noise)
        }
        _ => {
            return Err(CliError::invalid(
                "noise",
                "set both eta and alpha, or neither to use the equilibrium",
            ))
        }
    };
    let prediction = curve.context().mixture(&atoms)?;
    let target_mse = curve.c_or_limit(alpha)?;
    let mut table = Table::new(&["offset", "weight"]);
    for a in atoms.atoms() {
        table.row(vec![num(a.offset), num(a.weight)]);
    }
    let summary = format!(
        "eta = {}, alpha = {}: {} spike pair(s), predicted PA = {:.9}, MSE = {}",
        eta,
        alpha,
        atoms.atoms().len(),
        prediction.pa,
        prediction
            .mse
            .map(|m| format!("{:.9}", m))
            .unwrap_or_else(|| "undefined".into())
    );
    let doc = NoiseDoc {
        eta,
        alpha,
        boundary,
        atoms,
        predicted_pa: prediction.pa,
        predicted_mse: prediction.mse,
        target_mse,
    };
    Ok(Outcome::ok(
        vec![json("noise", &doc)?, table.into_artifact("noise")?],
        summary,
    ))
}

/// Threshold and strategy to simulate: the configured ones, or the
/// equilibrium's.
fn simulated(cfg: &RunConfig) -> CliResult<(f64, AdversaryStrategy)> {
    match cfg.explicit_strategy()? {
        Some(s) => {
            let eta = cfg
                .simulation
                .eta
                .ok_or_else(|| CliError::invalid("simulation.eta", "required with an explicit strategy"))?;
            cfg.game(eta)?;
            Ok((eta, s))
        }
        None => {
            cfg.pair()?;
            cfg.eta_grid()?;
            let sol = solve(cfg)?;
            Ok((sol.point.eta_star, sol.point.noise.into()))
        }
    }
}

fn validate_simulation(cfg: &RunConfig) -> CliResult<()> {
    cfg.rounds()?;
    if cfg.simulation.adversary_count == 0 {
        return Err(CliError::invalid("simulation.adversary_count", "must be at least 1"));
    }
    if let Some(eta) = cfg.simulation.eta {
        cfg.game(eta)?;
    }
    if cfg.explicit_strategy()?.is_none() {
        cfg.pair()?;
        cfg.eta_grid()?;
        cfg.solve_options()?;
    }
    Ok(())
}

const STATS_HEADER: [&str; 7] = [
    "rounds",
    "accepted_count",
    "pa_hat",
    "mse_hat",
    "pa_stderr",
    "mse_stderr",
    "seed",
];

fn stats_cells(s: &EmpiricalStats) -> Vec<String> {
    vec![
        s.rounds.to_string(),
        s.accepted_count.to_string(),
        num(s.pa_hat),
        opt(s.mse_hat),
        num(s.pa_stderr),
        opt(s.mse_stderr),
        s.seed.to_string(),
    ]
}

#[derive(Serialize)]
struct SimulationDoc {
    eta: f64,
    adversary_count: u32,
    strategy: AdversaryStrategy,
    stats: EmpiricalStats,
    check: Option<AnalyticCheck>,
}

pub fn simulate(cfg: &RunConfig) -> CliResult<Outcome> {
    validate_simulation(cfg)?;
    let (eta, strategy) = simulated(cfg)?;
    let game = cfg.game(eta)?;
    let count = cfg.simulation.adversary_count;
    let stats = parallel::monte_carlo(&game, &strategy, count, cfg.simulation.rounds, cfg.seed)?;

    let ctx = KernelContext::from_game(&game);
    let (lo, hi) = ctx.domain();
    let check = match strategy {
        AdversaryStrategy::SymmetricAtoms(ref atoms)
            if atoms.atoms().iter().all(|a| a.offset >= lo && a.offset <= hi) =>
        {
            Some(analytic_check(&ctx, atoms, &stats)?)
        }
        _ => None,
    };

    let mut header: Vec<&'static str> = STATS_HEADER.to_vec();
    header.extend([
        "predicted_pa",
        "predicted_mse",
        "pa_z",
        "mse_z",
        "check_passed",
    ]);
    let mut table = Table::new(&header);
    let mut cells = stats_cells(&stats);
    match check {
        Some(ref c) => cells.extend([
            num(c.predicted_pa),
            opt(c.predicted_mse),
            num(c.pa_z),
            opt(c.mse_z),
            c.passed.to_string(),
        ]),
        None => cells.extend(std::iter::repeat_n(String::new(), 5)),
    }
    table.row(cells);

    let mut summary = format!(
        "eta = {}, {} rounds: PA = {:.6} ± {:.6}, MSE = {}",
        eta,
        stats.rounds,
        stats.pa_hat,
        stats.pa_stderr,
        match (stats.mse_hat, stats.mse_stderr) {
            (Some(m), Some(s)) => format!("{:.6} ± {:.6}", m, s),
            (Some(m), None) => format!("{:.6}", m),
            _ => "absent (nothing accepted)".into(),
        }
    );
    if let Some(ref c) = check {
        summary.push_str(&format!(
            "\nagainst prediction: PA z = {:.3}, MSE z = {}, {}",
            c.pa_z,
            c.mse_z.map(|z| format!("{:.3}", z)).unwrap_or_else(|| "n/a".into()),
            if c.passed { "pass" } else { "FAIL" }
        ));
    }
    let doc = SimulationDoc {
        eta,
        adversary_count: count,
        strategy,
        stats,
        check,
    };
    Ok(Outcome::ok(
        vec![json("simulate", &doc)?, table.into_artifact("simulate")?],
        summary,
    ))
}

#[derive(Serialize)]
struct SybilRow {
    clones: u32,
    stats: EmpiricalStats,
}

#[derive(Serialize)]
struct SybilDoc {
    eta: f64,
    strategy: AdversaryStrategy,
    rows: Vec<SybilRow>,
    identical: bool,
}

pub fn sybil(cfg: &RunConfig) -> CliResult<Outcome> {
    validate_simulation(cfg)?;
    let clones = cfg.clones()?;
    let (eta, strategy) = simulated(cfg)?;
    let game = cfg.game(eta)?;
    let rows = parallel::sybil_compare(&game, &strategy, &clones, cfg.simulation.rounds, cfg.seed)?;
    let identical = rows.iter().all(|(_, s)| *s == rows[0].1);

    let mut header = vec!["clones"];
    header.extend(STATS_HEADER);
    let mut table = Table::new(&header);
    for (c, s) in &rows {
        let mut cells = vec![c.to_string()];
        cells.extend(stats_cells(s));
        table.row(cells);
    }
    let summary = format!(
        "eta = {}, clone counts {:?}: statistics {}",
        eta,
        clones,
        if identical { "identical" } else { "DIFFER" }
    );
    let doc = SybilDoc {
        eta,
        strategy,
        rows: rows
            .into_iter()
            .map(|(clones, stats)| SybilRow { clones, stats })
            .collect(),
        identical,
    };
    Ok(Outcome::ok(
        vec![json("sybil", &doc)?, table.into_artifact("sybil")?],
        summary,
    ))
}

fn trace_table(log: &TrialLog) -> Table {
    let mut t = Table::new(&["round", "candidate", "eta", "alpha_hat", "u_hat", "eliminated"]);
    for r in &log.trace {
        t.row(vec![
            r.round.to_string(),
            r.candidate.to_string(),
            num(r.eta),
            num(r.alpha_hat),
            num(r.u_hat),
            r.eliminated.to_string(),
        ]);
    }
    t
}

fn candidate_table(log: &TrialLog) -> Table {
    let mut t = Table::new(&[
        "eta",
        "commits",
        "accepts",
        "alpha_hat",
        "u_hat",
        "eliminated_at_round",
    ]);
    for c in &log.candidates {
        t.row(vec![
            num(c.eta),
            c.commits.to_string(),
            c.accepts.to_string(),
            num(c.alpha_hat),
            num(c.u_hat),
            c.eliminated_at_round.map(|r| r.to_string()).unwrap_or_default(),
        ]);
    }
    t
}

fn report_table(r: &FailureReport) -> Table {
    let mut t = Table::new(&["seed", "eta_hat", "utility", "failed", "eliminated"]);
    for run in &r.runs {
        t.row(vec![
            run.seed.to_string(),
            num(run.eta_hat),
            num(run.utility),
            run.failed.to_string(),
            run.eliminated.to_string(),
        ]);
    }
    t
}

pub fn learn(cfg: &RunConfig) -> CliResult<Outcome> {
    let pair = cfg.pair()?;
    let (learner, algorithm, repetitions) = cfg.learner()?;
    let game = cfg.game(learner.a)?;
    let opts = cfg.solve_options()?;

    let etas = learner.candidates()?;
    let family = CurveFamily::from_curves(parallel::curves(
        &etas,
        game.ell(),
        game.delta(),
        &default_alpha_grid(opts.alpha_points),
    )?);
    let mut oracle = MyopicOracle::new(pair.clone(), game, cfg.seed).with_options(opts);
    let (eta_hat, log) = match algorithm {
        Algorithm::GridSampling => algorithm3(&learner, &pair.q_dc, &family, &mut oracle)?,
        Algorithm::SuccessiveElimination => algorithm4(&learner, &pair.q_dc, &family, &mut oracle)?,
    };
    let mut summary = format!(
        "{:?}: eta_hat = {} after k = {} round(s) over {} candidate(s) (bounds n > {}, k > {}), {} eliminated",
        algorithm,
        eta_hat,
        log.budget.k,
        etas.len(),
        log.budget.n_bound - 1,
        log.budget.k_bound.saturating_sub(1),
        log.eliminated()
    );
    let mut artifacts = vec![
        json("learn", &log)?,
        trace_table(&log).into_artifact("learn_trace")?,
        candidate_table(&log).into_artifact("learn_candidates")?,
    ];
    if let Some(reps) = repetitions {
        let instance = LearnInstance {
            pair,
            game,
            learner,
            algorithm,
            opts,
        };
        let seeds: Vec<u64> = (0..reps).map(|i| cfg.seed.wrapping_add(i)).collect();
        let report = evaluate_learner(&instance, &seeds)?;
        summary.push_str(&format!(
            "\n{} repetitions: failure rate {} (threshold {:.4}, Wilson 95% [{:.4}, {:.4}]): {}",
            report.repetitions,
            report.failure_rate,
            report.threshold,
            report.wilson.0,
            report.wilson.1,
            if report.passed { "pass" } else { "FAIL" }
        ));
        artifacts.push(json("learn_report", &report)?);
        artifacts.push(report_table(&report).into_artifact("learn_runs")?);
    }
    Ok(Outcome::ok(artifacts, summary))
}

pub fn validate_utility(cfg: &RunConfig) -> CliResult<Outcome> {
    let pair = cfg.pair()?;
    let grid = cfg.monotonicity_grid(&pair)?;
    let report = validate_monotonicity(&pair, &grid)?;
    let mut table = Table::new(&[
        "player", "axis", "from_mse", "from_pa", "to_mse", "to_pa", "value_from", "value_to",
    ]);
    for v in &report.violations {
        table.row(vec![
            format!("{:?}", v.player),
            format!("{:?}", v.axis),
            num(v.from.0),
            num(v.from.1),
            num(v.to.0),
            num(v.to.1),
            num(v.values.0),
            num(v.values.1),
        ]);
    }
    let passed = report.passed();
    let summary = if passed {
        format!(
            "utilities pass on a {}x{} grid (PA >= {})",
            report.mse_points, report.pa_points, report.pa_floor
        )
    } else {
        format!(
            "{} monotonicity violation(s); see validate_utility.csv",
            report.violations.len()
        )
    };
    Ok(Outcome {
        artifacts: vec![
            json("validate_utility", &report)?,
            table.into_artifact("validate_utility")?,
        ],
        summary,
        exit_code: if passed { 0 } else { 2 },
    })
}
