//! Run configuration: one JSON document, optionally overridden by flags.
//!
//! Every section has defaults, so `{}` is a valid document; commands then
//! ask for what they need and fail validation when it is missing.

use std::path::{Path, PathBuf};

use coding_game_core::equilibrium::{SolveOptions, DEFAULT_TIE_TOLERANCE};
use coding_game_core::learn::{Algorithm, LearnerConfig, DEFAULT_D};
use coding_game_core::model::{
    AdversaryStrategy, Atom, GameConfig, MonotonicityGrid, OpaqueSampler, SymmetricAtoms,
    UtilityPair, DEFAULT_GRID_POINTS, DEFAULT_MAX_ATOMS, DEFAULT_PA_FLOOR,
};
use coding_game_core::curves::DEFAULT_ALPHA_POINTS;
use serde::Deserialize;

use crate::error::{in_field, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameSection {
    pub ell: u32,
    pub delta: f64,
    pub m_half: f64,
}

impl Default for GameSection {
    fn default() -> Self {
        Self {
            ell: 1,
            delta: 1.0,
            m_half: 1000.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitySection {
    pub q_dc: String,
    pub q_ad: String,
    #[serde(default)]
    pub pa_floor: Option<f64>,
}

/// Either an explicit list or `start`, `stop`, `step`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum EtaGridSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl EtaGridSpec {
    /// `"2:8:0.25"`, `"2,2.5,3"` or `"2"`.
    pub fn parse_flag(text: &str) -> CliResult<Self> {
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::invalid("eta_grid", format!("`{}` is not a number", s)))
        };
        let parts: Vec<&str> = text.split(':').collect();
        match parts.len() {
            1 => Ok(EtaGridSpec::List(
                text.split(',').map(num).collect::<CliResult<_>>()?,
            )),
            3 => Ok(EtaGridSpec::Range {
                start: num(parts[0])?,
                stop: num(parts[1])?,
                step: num(parts[2])?,
            }),
            _ => Err(CliError::invalid(
                "eta_grid",
                "expected start:stop:step or a comma-separated list",
            )),
        }
    }

    pub fn values(&self) -> CliResult<Vec<f64>> {
        let values = match *self {
            EtaGridSpec::List(ref v) => v.clone(),
            EtaGridSpec::Range { start, stop, step } => {
                if !(step > 0.0 && step.is_finite()) {
                    return Err(CliError::invalid("eta_grid.step", "must be positive"));
                }
                if stop < start || stop.is_nan() {
                    return Err(CliError::invalid("eta_grid.stop", "must be at least start"));
                }
                let n = ((stop - start) / step).round();
                if (start + n * step - stop).abs() > 1e-9 * step {
                    return Err(CliError::invalid(
                        "eta_grid",
                        "stop - start must be a whole number of steps",
                    ));
                }
                (0..=n as usize).map(|i| start + step * i as f64).collect()
            }
        };
        if values.is_empty() {
            return Err(CliError::invalid("eta_grid", "must not be empty"));
        }
        for (i, &eta) in values.iter().enumerate() {
            if !(eta >= 2.0 && eta.is_finite()) {
                return Err(CliError::invalid(
                    "eta_grid",
                    format!("entry {} = {} must be finite and at least 2", i, eta),
                ));
            }
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub offset: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    /// Symmetric spike pairs.
    Atoms {
        atoms: Vec<AtomSpec>,
        #[serde(default)]
        max_atoms: Option<usize>,
    },
    /// A built-in sampler: `uniform`, `symmetric_uniform` or `point`.
    Sampler { id: String, params: Vec<f64> },
    /// The adversary's noise at the Stackelberg equilibrium of `eta_grid`.
    Equilibrium,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// Threshold and acceptance level; both absent means "at the equilibrium".
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    /// Threshold to simulate at; ignored for the equilibrium strategy.
    pub eta: Option<f64>,
    pub rounds: u64,
    /// Adversarial clones reporting the same offset in `simulate`.
    pub adversary_count: u32,
    /// Clone counts compared by `sybil`.
    pub clones: Vec<u32>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            eta: None,
            rounds: 1_000_000,
            adversary_count: 1,
            clones: vec![1, 2, 5, 10],
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmSpec {
    GridSampling,
    #[default]
    SuccessiveElimination,
}

impl From<AlgorithmSpec> for Algorithm {
    fn from(a: AlgorithmSpec) -> Self {
        match a {
            AlgorithmSpec::GridSampling => Algorithm::GridSampling,
            AlgorithmSpec::SuccessiveElimination => Algorithm::SuccessiveElimination,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub lambda: f64,
    pub big_l: f64,
    #[serde(default)]
    pub lip_alpha: Option<f64>,
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub n_override: Option<u64>,
    #[serde(default)]
    pub k_override: Option<u64>,
    #[serde(default)]
    pub algorithm: AlgorithmSpec,
    /// Repeat the run over this many seeds and report the failure rate.
    #[serde(default)]
    pub repetitions: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub ell_values: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonotonicitySection {
    pub mse_min: f64,
    pub mse_max: f64,
    pub points: usize,
}

impl Default for MonotonicitySection {
    fn default() -> Self {
        Self {
            mse_min: 0.1,
            mse_max: 20.0,
            points: DEFAULT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub game: GameSection,
    pub utilities: Option<UtilitySection>,
    pub eta_grid: Option<EtaGridSpec>,
    /// Explicit `α` grid for `curve`; other commands use `alpha_points`.
    pub alpha_grid: Option<Vec<f64>>,
    pub alpha_points: Option<usize>,
    pub tie_tol: Option<f64>,
    pub strategy: Option<StrategySpec>,
    pub noise: NoiseSection,
    pub simulation: SimulationSection,
    pub learner: Option<LearnerSection>,
    pub properness: Option<ProbeSection>,
    pub monotonicity: MonotonicitySection,
    pub seed: u64,
    pub output: OutputSection,
}

/// Flag values that replace config fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub eta_grid: Option<String>,
    pub rounds: Option<u64>,
    pub clones: Option<Vec<u32>>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub k_override: Option<u64>,
    pub n_override: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid("config", format!("{}: {}", path.display(), e)))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::invalid("config", e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) -> CliResult<()> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(ref out) = o.out {
            self.output.dir = Some(out.clone());
        }
        if let Some(format) = o.format {
            self.output.format = Some(format);
        }
        if let Some(ref grid) = o.eta_grid {
            self.eta_grid = Some(EtaGridSpec::parse_flag(grid)?);
        }
        if let Some(rounds) = o.rounds {
            self.simulation.rounds = rounds;
        }
        if let Some(ref clones) = o.clones {
            self.simulation.clones = clones.clone();
        }
        let learner_flags = o.lambda.is_some()
            || o.delta.is_some()
            || o.k_override.is_some()
            || o.n_override.is_some();
        if learner_flags {
            let l = self.learner.as_mut().ok_or_else(|| {
                CliError::invalid("learner", "learner flags need a learner section in the config")
            })?;
            if let Some(v) = o.lambda {
                l.lambda = v;
            }
            if let Some(v) = o.delta {
                l.delta = v;
            }
            if o.k_override.is_some() {
                l.k_override = o.k_override;
            }
            if o.n_override.is_some() {
                l.n_override = o.n_override;
            }
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or_default()
    }

    pub fn game(&self, eta: f64) -> CliResult<GameConfig> {
        let g = &self.game;
        GameConfig::new(g.ell, g.delta, g.m_half, eta).map_err(in_field("game"))
    }

    pub fn pair(&self) -> CliResult<UtilityPair> {
        let u = self
            .utilities
            .as_ref()
            .ok_or_else(|| CliError::invalid("utilities", "required by this command"))?;
        let q_dc = u.q_dc.parse().map_err(in_field("utilities.q_dc"))?;
        let q_ad = u.q_ad.parse().map_err(in_field("utilities.q_ad"))?;
        UtilityPair::new(q_dc, q_ad)
            .with_pa_floor(u.pa_floor.unwrap_or(DEFAULT_PA_FLOOR))
            .map_err(in_field("utilities.pa_floor"))
    }

    pub fn eta_grid(&self) -> CliResult<Vec<f64>> {
        self.eta_grid
            .as_ref()
            .ok_or_else(|| CliError::invalid("eta_grid", "required by this command"))?
            .values()
    }

    pub fn solve_options(&self) -> CliResult<SolveOptions> {
        let tie_tol = self.tie_tol.unwrap_or(DEFAULT_TIE_TOLERANCE);
        if !(tie_tol > 0.0 && tie_tol.is_finite()) {
            return Err(CliError::invalid("tie_tol", "must be positive and finite"));
        }
        let alpha_points = self.alpha_points.unwrap_or(DEFAULT_ALPHA_POINTS);
        if alpha_points < 2 {
            return Err(CliError::invalid("alpha_points", "must be at least 2"));
        }
        Ok(SolveOptions {
            tie_tol,
            alpha_points,
        })
    }

    /// The `α` grid of `curve`: the explicit list, else `i / alpha_points`.
    pub fn curve_alpha_grid(&self) -> CliResult<Vec<f64>> {
        match self.alpha_grid {
            Some(ref grid) => {
                if grid.is_empty() {
                    return Err(CliError::invalid("alpha_grid", "must not be empty"));
                }
                for (i, &a) in grid.iter().enumerate() {
                    if !(a > 0.0 && a <= 1.0) {
                        return Err(CliError::invalid(
                            "alpha_grid",
                            format!("entry {} = {} outside (0, 1]", i, a),
                        ));
                    }
                    if i > 0 && a <= grid[i - 1] {
                        return Err(CliError::invalid(
                            "alpha_grid",
                            format!("not strictly increasing at entry {}", i),
                        ));
                    }
                }
                Ok(grid.clone())
            }
            None => Ok(coding_game_core::curves::default_alpha_grid(
                self.solve_options()?.alpha_points,
            )),
        }
    }

    /// The configured strategy, unless it is the equilibrium noise.
    pub fn explicit_strategy(&self) -> CliResult<Option<AdversaryStrategy>> {
        let spec = self
            .strategy
            .as_ref()
            .ok_or_else(|| CliError::invalid("strategy", "required by this command"))?;
        Ok(match spec {
            StrategySpec::Atoms { atoms, max_atoms } => {
                let atoms = atoms
                    .iter()
                    .map(|a| Atom {
                        offset: a.offset,
                        weight: a.weight,
                    })
                    .collect();
                Some(
                    SymmetricAtoms::with_max_atoms(atoms, max_atoms.unwrap_or(DEFAULT_MAX_ATOMS))
                        .map_err(in_field("strategy.atoms"))?
                        .into(),
                )
            }
            StrategySpec::Sampler { id, params } => Some(
                OpaqueSampler::new(id, params)
                    .map_err(in_field("strategy"))?
                    .into(),
            ),
            StrategySpec::Equilibrium => None,
        })
    }

    pub fn rounds(&self) -> CliResult<u64> {
        match self.simulation.rounds {
            0 => Err(CliError::invalid("simulation.rounds", "must be at least 1")),
            r => Ok(r),
        }
    }

    pub fn clones(&self) -> CliResult<Vec<u32>> {
        let c = &self.simulation.clones;
        if c.is_empty() {
            return Err(CliError::invalid("simulation.clones", "must not be empty"));
        }
        if c.contains(&0) {
            return Err(CliError::invalid("simulation.clones", "counts must be at least 1"));
        }
        Ok(c.clone())
    }

    pub fn learner(&self) -> CliResult<(LearnerConfig, Algorithm, Option<u64>)> {
        let l = self
            .learner
            .as_ref()
            .ok_or_else(|| CliError::invalid("learner", "required by this command"))?;
        let mut cfg = LearnerConfig::new(l.a, l.b, l.delta, l.lambda, l.big_l)
            .map_err(in_field("learner"))?;
        cfg.lip_alpha = l.lip_alpha;
        cfg.d = l.d.unwrap_or(DEFAULT_D);
        cfg.n_override = l.n_override;
        cfg.k_override = l.k_override;
        cfg.validate().map_err(in_field("learner"))?;
        cfg.candidates().map_err(in_field("learner"))?;
        if l.repetitions == Some(0) {
            return Err(CliError::invalid("learner.repetitions", "must be at least 1"));
        }
        Ok((cfg, l.algorithm.into(), l.repetitions))
    }

    pub fn monotonicity_grid(&self, pair: &UtilityPair) -> CliResult<MonotonicityGrid> {
        let m = &self.monotonicity;
        if !(m.mse_min > 0.0 && m.mse_max > m.mse_min && m.mse_max.is_finite()) {
            return Err(CliError::invalid(
                "monotonicity",
                "need 0 < mse_min < mse_max < inf",
            ));
        }
        MonotonicityGrid::uniform(m.mse_min, m.mse_max, pair.pa_floor, m.points)
            .map_err(in_field("monotonicity.points"))
    }
}
