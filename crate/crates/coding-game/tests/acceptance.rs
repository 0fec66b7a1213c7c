//! Acceptance suite. Runs every reproduction and property criterion at its
//! stated tolerance and prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `UNATTAINABLE` are still computed and reported; they do
//! not fail the target. Every other criterion must pass.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use coding_game::commands;
use coding_game::config::RunConfig;
use coding_game::parallel;
use coding_game_core::curves::{c_curve, default_alpha_grid, KernelContext, TradeoffCurve};
use coding_game_core::equilibrium::{
    adversary_best_response, optimal_noise, SolveOptions,
};
use coding_game_core::learn::{
    algorithm4, evaluate_learner, true_utilities, Algorithm, CurveFamily, LearnInstance,
    LearnerConfig, MyopicOracle,
};
use coding_game_core::model::{AdversaryStrategy, Atom, GameConfig, SymmetricAtoms, UtilityPair};
use coding_game_core::sim::{analytic_check, monte_carlo, sybil_compare, trace_rounds};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const UNATTAINABLE: &[&str] = &["example 2 reproduction", "learning guarantee"];

const EX1_DC: &str = "-MSE + 25*PA";
const EX1_AD: &str = "log(MSE) + 0.75*log(PA)";

struct Verdict {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn fig6_grid() -> Vec<f64> {
    (0..=24).map(|i| 2.0 + 0.25 * i as f64).collect()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// Equilibrium as written by the `equilibrium` command for a shipped config.
struct Solved {
    point: Value,
    per_eta: Vec<Value>,
    elapsed: Duration,
}

fn run_equilibrium(config: &str) -> Solved {
    let cfg = RunConfig::load(&configs().join(config)).expect("config loads");
    let start = Instant::now();
    let outcome = commands::equilibrium(&cfg).expect("equilibrium solves");
    let elapsed = start.elapsed();
    let doc = outcome
        .artifacts
        .iter()
        .find(|a| a.name == "equilibrium.json")
        .expect("equilibrium.json");
    let v: Value = serde_json::from_slice(&doc.bytes).unwrap();
    Solved {
        point: v["solution"]["point"].clone(),
        per_eta: v["solution"]["per_eta"].as_array().unwrap().clone(),
        elapsed,
    }
}

fn f(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{} is not a number", key))
}

fn atoms_of(point: &Value) -> SymmetricAtoms {
    let atoms = point["noise"]["atoms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| Atom {
            offset: f(a, "offset"),
            weight: f(a, "weight"),
        })
        .collect();
    SymmetricAtoms::new(atoms).unwrap()
}

// ---------------------------------------------------------------------------
// Independent oracles

/// `w(x) = ℓ (Δ - x)^(ℓ-1) / (2Δ)^ℓ`, written out independently.
fn w(ell: u32, delta: f64, x: f64) -> f64 {
    ell as f64 * (delta - x).powi(ell as i32 - 1) / (2.0 * delta).powi(ell as i32)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    adaptive(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature with Richardson correction.
fn integrate(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (g(a), g(0.5 * (a + b)), g(b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(g, a, b, fa, fm, fb, whole, tol, 40)
}

/// `(k(z), ν(z))` by quadrature over `[z - ηΔ, Δ]`.
fn kernels_by_quadrature(ell: u32, delta: f64, eta: f64, z: f64) -> (f64, f64) {
    let lo = (z - eta * delta).max(-delta);
    let k = integrate(&|x| w(ell, delta, x), lo, delta, 1e-15);
    let nu = integrate(&|x| (x + z) * (x + z) * w(ell, delta, x), lo, delta, 1e-14);
    (k, nu)
}

/// Upper hull of a point set by the monotone chain.
fn upper_hull(q: &[f64], h: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..q.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (q[b] - q[a]) * (h[i] - h[a]) - (h[b] - h[a]) * (q[i] - q[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

// ---------------------------------------------------------------------------
// Criteria

fn example1(equilibria: &mut Vec<(String, TradeoffCurve, f64, SymmetricAtoms)>) -> Verdict {
    let s = run_equilibrium("example1.json");
    let (eta, alpha, mse) = (f(&s.point, "eta_star"), f(&s.point, "alpha"), f(&s.point, "mse"));
    let passed = eta == 6.75
        && within(alpha, 0.807, 0.005)
        && within(mse, 10.07, 0.05)
        && s.elapsed < Duration::from_secs(10);
    let ctx = KernelContext::new(1, 1.0, eta).unwrap();
    let curve = c_curve(&ctx, &default_alpha_grid(4096)).unwrap();
    equilibria.push(("example 1".into(), curve, alpha, atoms_of(&s.point)));
    Verdict {
        name: "example 1 reproduction",
        passed,
        detail: format!(
            "eta* = {}, alpha = {:.6}, MSE = {:.6}, {}",
            eta,
            alpha,
            mse,
            secs(s.elapsed)
        ),
    }
}

fn naive_baseline(equilibria: &mut Vec<(String, TradeoffCurve, f64, SymmetricAtoms)>) -> Verdict {
    let pair = UtilityPair::parse(EX1_DC, EX1_AD).unwrap();
    let ctx = KernelContext::new(1, 1.0, 2.0).unwrap();
    let curve = c_curve(&ctx, &default_alpha_grid(4096)).unwrap();
    let br = adversary_best_response(&curve, &pair.q_ad, 1e-9).unwrap();
    let (alpha, mse) = (br.alphas[0], br.mses[0]);
    let passed = br.alphas.len() == 1 && within(alpha, 0.37, 0.01) && within(mse, 2.10, 0.05);
    let atoms = optimal_noise(&curve, alpha).unwrap();
    equilibria.push(("naive baseline".into(), curve, alpha, atoms));
    Verdict {
        name: "example 1 naive baseline",
        passed,
        detail: format!("eta = 2: PA = {:.6}, MSE = {:.6}", alpha, mse),
    }
}

fn example2(equilibria: &mut Vec<(String, TradeoffCurve, f64, SymmetricAtoms)>) -> Verdict {
    let s = run_equilibrium("example2.json");
    let (eta, alpha, mse) = (f(&s.point, "eta_star"), f(&s.point, "alpha"), f(&s.point, "mse"));
    let passed = eta == 3.75 && within(alpha, 0.214, 0.005) && within(mse, 6.52, 0.05);

    let worst: Vec<f64> = s.per_eta.iter().map(|r| f(r, "worst_dc_utility")).collect();
    let hi = worst.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = worst.iter().copied().fold(f64::INFINITY, f64::min);
    let at = s
        .per_eta
        .iter()
        .find(|r| f(r, "eta") == 3.75)
        .expect("3.75 on the grid");
    let br = &at["best_response"];
    let a375 = br["alphas"][0].as_f64().unwrap();
    let m375 = br["mses"][0].as_f64().unwrap();

    let ctx = KernelContext::new(1, 1.0, eta).unwrap();
    let curve = c_curve(&ctx, &default_alpha_grid(4096)).unwrap();
    equilibria.push(("example 2".into(), curve, alpha, atoms_of(&s.point)));
    let ctx375 = KernelContext::new(1, 1.0, 3.75).unwrap();
    let curve375 = c_curve(&ctx375, &default_alpha_grid(4096)).unwrap();
    let atoms375 = optimal_noise(&curve375, a375).unwrap();
    equilibria.push(("example 2 at eta 3.75".into(), curve375, a375, atoms375));

    Verdict {
        name: "example 2 reproduction",
        passed,
        detail: format!(
            "eta* = {}, alpha = {:.6}, MSE = {:.6}; best response at 3.75 = ({:.6}, {:.6}) {}; \
             worst DC utility spans [{:.10}, {:.10}] over the grid (relative spread {:.1e})",
            eta,
            alpha,
            mse,
            a375,
            m375,
            if within(a375, 0.214, 0.005) && within(m375, 6.52, 0.05) {
                "matches"
            } else {
                "differs"
            },
            lo,
            hi,
            (hi - lo) / hi
        ),
    }
}

fn example3(equilibria: &mut Vec<(String, TradeoffCurve, f64, SymmetricAtoms)>) -> Verdict {
    let s = run_equilibrium("example3.json");
    let (eta, alpha, mse) = (f(&s.point, "eta_star"), f(&s.point, "alpha"), f(&s.point, "mse"));
    let boundary = s.point["boundary"].as_bool().unwrap();
    let passed = eta == 2.0 && boundary && alpha <= 1e-6 && within(mse, 4.0, 1e-3);
    let ctx = KernelContext::new(1, 1.0, eta).unwrap();
    let curve = c_curve(&ctx, &default_alpha_grid(4096)).unwrap();
    equilibria.push(("example 3".into(), curve, alpha, atoms_of(&s.point)));
    Verdict {
        name: "example 3 reproduction",
        passed,
        detail: format!(
            "eta* = {}, boundary = {}, alpha = {:e}, limit MSE = {:.9}",
            eta, boundary, alpha, mse
        ),
    }
}

fn kernel_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b65726e);
    let ells = [1u32, 2, 3, 5];
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..1000 {
        let eta = rng.random_range(2.0..=8.0);
        let ell = ells[rng.random_range(0..ells.len())];
        let z = rng.random_range((eta - 1.0)..(eta + 1.0));
        let ctx = KernelContext::new(ell, 1.0, eta).unwrap();
        let (k, nu) = kernels_by_quadrature(ell, 1.0, eta, z);
        let (kc, nuc) = (ctx.acceptance_kernel(z).unwrap(), ctx.error_kernel(z).unwrap());
        for (a, b) in [(k, kc), (nu, nuc)] {
            let rel = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            if rel > 1e-9 {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        name: "kernel oracle equivalence",
        passed: failures == 0 && elapsed < Duration::from_secs(5),
        detail: format!(
            "1000 triples, worst relative error {:.2e}, {} over 1e-9, {}",
            worst,
            failures,
            secs(elapsed)
        ),
    }
}

fn envelope_suite() -> Verdict {
    let start = Instant::now();
    let mut problems = Vec::new();
    let mut points = 0;
    for eta in fig6_grid() {
        let ctx = KernelContext::new(1, 1.0, eta).unwrap();
        let curve = TradeoffCurve::build(&ctx).unwrap();
        let s = &curve.samples;
        let (q, h, hs) = (&s.q_grid, &s.h_values, &s.h_star_values);
        let n = q.len();
        points = points.max(n);
        if n < 4097 {
            problems.push(format!("eta {}: only {} samples", eta, n));
        }
        if q[0] != 0.0 || q[n - 1] != 1.0 {
            problems.push(format!("eta {}: grid does not span [0, 1]", eta));
        }
        if (0..n).any(|i| hs[i] < h[i] - 1e-12) {
            problems.push(format!("eta {}: h* below h", eta));
        }
        for i in 1..n - 1 {
            let t = (q[i] - q[i - 1]) / (q[i + 1] - q[i - 1]);
            let chord = hs[i - 1] + t * (hs[i + 1] - hs[i - 1]);
            if hs[i] < chord - 1e-10 {
                problems.push(format!("eta {}: concavity fails at q = {}", eta, q[i]));
                break;
            }
        }
        if hs[0] != h[0] || hs[n - 1] != h[n - 1] {
            problems.push(format!("eta {}: endpoint mismatch", eta));
        }
        // a contact touches within 1e-12 relative to the curve's scale
        let scale = h.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for &(lo, hi) in &s.segments {
            for end in [lo, hi] {
                match s.index_of(end) {
                    Some(i) if s.contact_flags[i] && (hs[i] - h[i]).abs() <= 1e-12 * scale => {}
                    _ => problems.push(format!("eta {}: chord end {} is not a contact", eta, end)),
                }
            }
        }
        // independent hull of the same samples
        let hull = upper_hull(q, h);
        let mut j = 0;
        for i in 0..n {
            while j + 1 < hull.len() && q[hull[j + 1]] < q[i] {
                j += 1;
            }
            let (a, b) = (hull[j], hull[(j + 1).min(hull.len() - 1)]);
            let oracle = if a == b || q[i] == q[a] {
                h[a]
            } else {
                h[a] + (h[b] - h[a]) * (q[i] - q[a]) / (q[b] - q[a])
            };
            if (oracle - hs[i]).abs() > 1e-12 * oracle.abs().max(1.0) {
                problems.push(format!("eta {}: hull oracle disagrees at q = {}", eta, q[i]));
                break;
            }
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        name: "envelope property suite",
        passed: problems.is_empty() && elapsed < Duration::from_secs(5),
        detail: if problems.is_empty() {
            format!("25 thresholds, up to {} samples each, {}", points, secs(elapsed))
        } else {
            format!("{} ({})", problems.join("; "), secs(elapsed))
        },
    }
}

fn curve_ordering() -> Verdict {
    let grid = default_alpha_grid(512);
    let curves =
        parallel::curves(&fig6_grid(), 1, 1.0, &grid).expect("curves build for every threshold");
    let mut violations = 0;
    let mut first = None;
    for pair in curves.windows(2) {
        for (j, (&lo, &hi)) in pair[0].c_values.iter().zip(&pair[1].c_values).enumerate() {
            if hi < lo {
                violations += 1;
                first.get_or_insert((pair[0].eta, grid[j], lo - hi));
            }
        }
    }
    Verdict {
        name: "curve ordering",
        passed: violations == 0 && grid.len() == 512,
        detail: match first {
            None => format!("24 adjacent pairs x {} alphas, no violations", grid.len()),
            Some((eta, a, d)) => format!(
                "{} violation(s), first at eta {} alpha {} by {:e}",
                violations, eta, a, d
            ),
        },
    }
}

fn random_atoms(rng: &mut ChaCha8Rng, eta: f64) -> SymmetricAtoms {
    let pairs = rng.random_range(1..=4usize);
    let mut offsets: Vec<f64> = (0..pairs)
        .map(|_| rng.random_range((eta - 1.0)..(eta + 1.0)))
        .collect();
    offsets.sort_by(f64::total_cmp);
    offsets.dedup();
    let raw: Vec<f64> = offsets.iter().map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let atoms = offsets
        .iter()
        .zip(&raw)
        .map(|(&offset, &r)| Atom {
            offset,
            weight: 0.5 * r / total,
        })
        .collect();
    SymmetricAtoms::new(atoms).unwrap()
}

fn simulator_agreement(example1_noise: &SymmetricAtoms) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x73696d);
    let ells = [1u32, 2, 3, 5];
    let mut worst_z: f64 = 0.0;
    let mut failures = Vec::new();
    for i in 0..20 {
        let eta = rng.random_range(2.0..=8.0);
        let ell = ells[rng.random_range(0..ells.len())];
        let atoms = random_atoms(&mut rng, eta);
        let game = GameConfig::new(ell, 1.0, 1000.0, eta).unwrap();
        let strategy = AdversaryStrategy::from(atoms.clone());
        let stats = parallel::monte_carlo(&game, &strategy, 1, 1_000_000, 1000 + i).unwrap();
        let check = analytic_check(&KernelContext::from_game(&game), &atoms, &stats).unwrap();
        worst_z = worst_z.max(check.pa_z.abs()).max(check.mse_z.map_or(0.0, f64::abs));
        if !check.passed || check.mse_absent {
            failures.push(format!(
                "strategy {} (eta {:.3}, ell {}): pa z {:.2}, mse z {:?}",
                i, eta, ell, check.pa_z, check.mse_z
            ));
        }
    }

    let game = GameConfig::new(1, 1.0, 1000.0, 6.75).unwrap();
    let stats = parallel::monte_carlo(
        &game,
        &AdversaryStrategy::from(example1_noise.clone()),
        1,
        1_000_000,
        7,
    )
    .unwrap();
    let mse_hat = stats.mse_hat.unwrap();
    let pa_z = (stats.pa_hat - 0.807) / stats.pa_stderr;
    let mse_z = (mse_hat - 10.07) / stats.mse_stderr.unwrap();
    let ex1_ok = pa_z.abs() <= 4.0 && mse_z.abs() <= 4.0;
    let elapsed = start.elapsed();
    Verdict {
        name: "simulator-analytics agreement",
        passed: failures.is_empty() && ex1_ok && elapsed < Duration::from_secs(60),
        detail: format!(
            "20 strategies, worst |z| {:.2}{}; example 1 noise PA {:.5} (z {:.2}), MSE {:.4} (z {:.2}); {}",
            worst_z,
            if failures.is_empty() {
                String::new()
            } else {
                format!(" [{}]", failures.join("; "))
            },
            stats.pa_hat,
            pa_z,
            mse_hat,
            mse_z,
            secs(elapsed)
        ),
    }
}

fn same_outcomes(
    a: &[coding_game_core::sim::RoundOutcome],
    b: &[coding_game_core::sim::RoundOutcome],
) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.accepted == y.accepted
                && x.estimate_error.map(f64::to_bits) == y.estimate_error.map(f64::to_bits)
        })
}

fn sybil_invariance(example1_noise: &SymmetricAtoms) -> Verdict {
    let start = Instant::now();
    let game = GameConfig::new(1, 1.0, 1000.0, 6.75).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x737962);
    let strategies = [
        AdversaryStrategy::from(example1_noise.clone()),
        AdversaryStrategy::from(random_atoms(&mut rng, 6.75)),
    ];
    let clones = [1u32, 2, 5, 10];
    let mut traces_ok = true;
    let mut stats_ok = true;
    for (s, strategy) in strategies.iter().enumerate() {
        let seed = 21 + s as u64;
        let base = trace_rounds(&game, strategy, 1, seed, 0..200_000);
        for &c in &clones[1..] {
            traces_ok &= same_outcomes(&base, &trace_rounds(&game, strategy, c, seed, 0..200_000));
        }
        let rows = sybil_compare(&game, strategy, &clones, 1_000_000, seed).unwrap();
        stats_ok &= rows.iter().all(|(_, st)| *st == rows[0].1);
    }
    let elapsed = start.elapsed();
    Verdict {
        name: "sybil invariance",
        passed: traces_ok && stats_ok && elapsed < Duration::from_secs(30),
        detail: format!(
            "clones {{1, 2, 5, 10}}, 2 strategies: per-round outcomes {}, stats over 1e6 rounds {}, {}",
            if traces_ok { "bitwise identical" } else { "DIFFER" },
            if stats_ok { "identical" } else { "DIFFER" },
            secs(elapsed)
        ),
    }
}

fn m_independence(example1_noise: &SymmetricAtoms) -> Verdict {
    let small = GameConfig::new(1, 1.0, 1e3, 6.75).unwrap();
    let large = GameConfig::new(1, 1.0, 1e6, 6.75).unwrap();
    let strategy = AdversaryStrategy::from(example1_noise.clone());
    let a = trace_rounds(&small, &strategy, 1, 5, 0..200_000);
    let b = trace_rounds(&large, &strategy, 1, 5, 0..200_000);
    let sa = monte_carlo(&small, &strategy, 1, 200_000, 5).unwrap();
    let sb = monte_carlo(&large, &strategy, 1, 200_000, 5).unwrap();
    let same = same_outcomes(&a, &b);
    Verdict {
        name: "M-independence",
        passed: same && sa == sb,
        detail: format!(
            "M = 1e3 vs 1e6, 200000 rounds: outcomes {}, stats {}",
            if same { "identical" } else { "DIFFER" },
            if sa == sb { "identical" } else { "DIFFER" }
        ),
    }
}

fn learning() -> Verdict {
    let start = Instant::now();
    let pair = UtilityPair::parse(EX1_DC, EX1_AD).unwrap();
    let game = GameConfig::new(1, 1.0, 1000.0, 2.0).unwrap();
    let opts = SolveOptions::default();
    let mut learner = LearnerConfig::new(2.0, 8.0, 0.1, 1.0, 1.0).unwrap();
    learner.n_override = Some(24);
    learner.k_override = Some(4000);
    let mut instance = LearnInstance {
        pair: pair.clone(),
        game,
        learner,
        algorithm: Algorithm::GridSampling,
        opts,
    };

    // λ is half the analytic gap between the two best candidates
    let truth = true_utilities(&instance).unwrap();
    let mut sorted = truth.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let lambda = 0.5 * (sorted[0] - sorted[1]);
    instance.learner.lambda = lambda;
    let u_star = sorted[0];

    let seeds: Vec<u64> = (0..50).collect();
    let a3 = evaluate_learner(&instance, &seeds).unwrap();

    let etas = instance.learner.candidates().unwrap();
    let family = CurveFamily::build(&etas, 1, 1.0, opts.alpha_points).unwrap();
    let mut a4_learner = instance.learner;
    a4_learner.record_trace = false;
    let mut oracle = MyopicOracle::new(pair.clone(), game, 0).with_options(opts);
    let k = a4_learner.k_override.unwrap();
    let mut a4_failures = 0;
    let mut a4_early = 0;
    for &seed in &seeds {
        oracle.reseed(seed);
        let (_, log) = algorithm4(&a4_learner, &pair.q_dc, &family, &mut oracle).unwrap();
        if u_star - truth[log.final_index] > lambda {
            a4_failures += 1;
        }
        if log
            .candidates
            .iter()
            .any(|c| c.eliminated_at_round.is_some_and(|r| r < k))
        {
            a4_early += 1;
        }
    }
    let a4_rate = a4_failures as f64 / seeds.len() as f64;
    let a4_ok = a4_rate <= a3.threshold && a4_early == seeds.len();
    let elapsed = start.elapsed();
    Verdict {
        name: "learning guarantee",
        passed: a3.passed && a4_ok && elapsed < Duration::from_secs(120),
        detail: format!(
            "lambda = {:.6}, threshold {:.4}; grid sampling fails {}/{} (Wilson [{:.3}, {:.3}]); \
             successive elimination fails {}/{}, eliminates early in {}/{}; {}",
            lambda,
            a3.threshold,
            a3.failures,
            a3.repetitions,
            a3.wilson.0,
            a3.wilson.1,
            a4_failures,
            seeds.len(),
            a4_early,
            seeds.len(),
            secs(elapsed)
        ),
    }
}

fn noise_round_trip(equilibria: &[(String, TradeoffCurve, f64, SymmetricAtoms)]) -> Verdict {
    let mut problems = Vec::new();
    for (name, curve, alpha, atoms) in equilibria {
        let (ell, delta, eta) = (curve.ell, curve.delta, curve.eta);
        let mut pa = 0.0;
        let mut err = 0.0;
        for a in atoms.atoms() {
            let (k, nu) = kernels_by_quadrature(ell, delta, eta, a.offset);
            pa += 2.0 * a.weight * k;
            err += 2.0 * a.weight * nu;
        }
        if *alpha == 0.0 {
            // never-accepted limit pair: PA is exactly zero and the MSE is
            // the limit of the ratio as the spike approaches the edge
            let edge = (eta + 1.0) * delta;
            let ok_pa = pa == 0.0 && atoms.atoms().len() == 1 && atoms.atoms()[0].offset == edge;
            let z = edge - 1e-12;
            let (k, nu) = kernels_by_quadrature(ell, delta, eta, z);
            let limit = nu / (4.0 * k);
            if !ok_pa || !rel_close(limit, curve.limit_at_zero, 1e-9) {
                problems.push(format!("{}: boundary limit {} vs {}", name, limit, curve.limit_at_zero));
            }
            continue;
        }
        let mse = err / (4.0 * pa);
        let target = curve.c_at(*alpha).unwrap();
        if !rel_close(pa, *alpha, 1e-9) || !rel_close(mse, target, 1e-9) {
            problems.push(format!(
                "{}: PA {} vs {}, MSE {} vs {}",
                name, pa, alpha, mse, target
            ));
        }
    }
    Verdict {
        name: "optimal noise round-trip",
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            let names: Vec<&str> = equilibria.iter().map(|e| e.0.as_str()).collect();
            format!("{} equilibria ({})", equilibria.len(), names.join(", "))
        } else {
            problems.join("; ")
        },
    }
}

fn main() {
    // the harness passes its own flags; listing must not run the suite
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut equilibria = Vec::new();
    let mut verdicts = vec![
        example1(&mut equilibria),
        naive_baseline(&mut equilibria),
        example2(&mut equilibria),
        example3(&mut equilibria),
        kernel_oracle(),
        envelope_suite(),
        curve_ordering(),
    ];
    let ex1_noise = equilibria[0].3.clone();
    verdicts.push(simulator_agreement(&ex1_noise));
    verdicts.push(sybil_invariance(&ex1_noise));
    verdicts.push(m_independence(&ex1_noise));
    verdicts.push(learning());
    verdicts.push(noise_round_trip(&equilibria));

    let mut unexpected = 0;
    for v in &verdicts {
        let known = UNATTAINABLE.contains(&v.name);
        println!(
            "{} {}: {}{}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.detail,
            if !v.passed && known { " (known unattainable)" } else { "" }
        );
        if !v.passed && !known {
            unexpected += 1;
        }
    }
    let passed = verdicts.iter().filter(|v| v.passed).count();
    println!("{}/{} criteria pass", passed, verdicts.len());
    if unexpected > 0 {
        eprintln!("{} criterion/criteria failed unexpectedly", unexpected);
        std::process::exit(1);
    }
}
