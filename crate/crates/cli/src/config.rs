//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fxp_core::games::{make_motivating, make_sad, make_team_rps, sad_reference_policies, MotivatingParams, SadParams};
use fxp_core::learners::{Init, UpdateRule};
use fxp_core::trainers::{Algorithm, Evaluation, MetaSolverKind, Problem, TrainConfig};
use serde::Deserialize;
use serde_json::Value;

use crate::formats::MatrixGameFile;

/// A full experiment: one game, one or more algorithms, several seeds.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameSpec,
    pub algorithm: OneOrMany<AlgorithmSpec>,
    pub seeds: Vec<u64>,
    pub total_steps: usize,
    pub eval_every: usize,
    pub output_dir: PathBuf,
    pub convergence_threshold: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    pub fn as_slice(&self) -> &[T] {
        match self {
            OneOrMany::One(x) => std::slice::from_ref(x),
            OneOrMany::Many(xs) => xs,
        }
    }
}

/// Game id plus its parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub id: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct MotivatingArgs {
    #[serde(default = "default_n")]
    n: usize,
    #[serde(default = "default_c")]
    c: f64,
    #[serde(default = "default_eps")]
    eps: f64,
}

fn default_n() -> usize {
    3
}
fn default_c() -> f64 {
    1.5
}
fn default_eps() -> f64 {
    0.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SadArgs {
    #[serde(default = "default_sad_n")]
    n: usize,
    #[serde(default = "default_sad_seek")]
    max_seek: usize,
    rewards: Option<Vec<f64>>,
}

fn default_sad_n() -> usize {
    4
}
fn default_sad_seek() -> usize {
    4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyArgs {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixPath {
    path: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MatrixArgs {
    Path(MatrixPath),
    Inline(MatrixGameFile),
}

fn params<T: serde::de::DeserializeOwned>(id: &str, v: &Value) -> Result<T> {
    let v = if v.is_null() {
        Value::Object(Default::default())
    } else {
        v.clone()
    };
    serde_json::from_value(v).with_context(|| format!("bad parameters for game `{id}`"))
}

impl GameSpec {
    /// Builds the game and its exploitability measure. Relative matrix paths
    /// are resolved against `base`.
    pub fn problem(&self, base: &Path) -> Result<Problem> {
        Ok(match self.id.as_str() {
            "motivating" => {
                let a: MotivatingArgs = params(&self.id, &self.params)?;
                Problem::team(make_motivating(MotivatingParams {
                    n: a.n,
                    c: a.c,
                    eps: a.eps,
                })?)
            }
            "team_rps" => {
                let _: EmptyArgs = params(&self.id, &self.params)?;
                Problem::team(make_team_rps())
            }
            "sad" => {
                let a: SadArgs = params(&self.id, &self.params)?;
                let mut p = SadParams::linear(a.n, a.max_seek);
                if let Some(r) = a.rewards {
                    p.rewards = r;
                }
                let game = make_sad(&p)?;
                Problem {
                    game,
                    evaluation: Evaluation::SadReference(sad_reference_policies(&p)?),
                }
            }
            "matrix" => {
                let file = match params::<MatrixArgs>(&self.id, &self.params)? {
                    MatrixArgs::Inline(m) => m,
                    MatrixArgs::Path(p) => MatrixGameFile::load(&base.join(p.path))?,
                };
                Problem::team(file.game()?)
            }
            other => bail!("unknown game `{other}` (expected motivating, team_rps, sad or matrix)"),
        })
    }
}

/// Resolves a command-line game argument: a built-in id with default
/// parameters, or a JSON file holding either a game spec or a matrix game.
pub fn problem_from_arg(arg: &str) -> Result<Problem> {
    if matches!(arg, "motivating" | "team_rps" | "sad") {
        return GameSpec {
            id: arg.into(),
            params: Value::Null,
        }
        .problem(Path::new("."));
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path).with_context(|| format!("reading game file {arg}"))?;
    let base = path.parent().unwrap_or(Path::new("."));
    if let Ok(spec) = serde_json::from_str::<GameSpec>(&text) {
        return spec.problem(base);
    }
    let m: MatrixGameFile = serde_json::from_str(&text).with_context(|| format!("parsing game file {arg}"))?;
    Ok(Problem::team(m.game()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    Sp,
    Fsp,
    Psro,
    Odo,
    Fxp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    StepwiseBr,
    Forel,
    Replicator,
    Mwu,
    Cfr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverId {
    Uniform,
    Nash,
    Prioritized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitId {
    Uniform,
    Random,
}

/// One algorithm to run over every seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub id: AlgorithmId,
    #[serde(default = "default_rule")]
    pub rule: RuleId,
    #[serde(default)]
    pub hyperparams: Hyperparams,
    /// Label used in output file names; defaults to the id and rule.
    pub name: Option<String>,
}

fn default_rule() -> RuleId {
    RuleId::StepwiseBr
}

/// Optional overrides of the trainer defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    pub lr: Option<f64>,
    pub scale: Option<f64>,
    pub dt: Option<f64>,
    pub k: Option<f64>,
    pub eta: Option<f64>,
    pub eta_decay: Option<f64>,
    pub steps_per_iter: Option<usize>,
    pub meta_solver: Option<SolverId>,
    pub counter_meta_solver: Option<SolverId>,
    pub reset: Option<bool>,
    pub counter_reset: Option<bool>,
    pub main_reset: Option<bool>,
    pub plateau_tol: Option<f64>,
    pub plateau_window: Option<usize>,
    pub init: Option<InitId>,
    pub nash_tol: Option<f64>,
    pub stop_on_convergence: Option<bool>,
}

fn solver(s: SolverId) -> MetaSolverKind {
    match s {
        SolverId::Uniform => MetaSolverKind::Uniform,
        SolverId::Nash => MetaSolverKind::Nash,
        SolverId::Prioritized => MetaSolverKind::Prioritized,
    }
}

/// Short lowercase name of an update rule.
pub fn rule_name(rule: UpdateRule) -> &'static str {
    match rule {
        UpdateRule::StepwiseBr { .. } => "stepwise_br",
        UpdateRule::FoReL { .. } => "forel",
        UpdateRule::Replicator { .. } => "replicator",
        UpdateRule::Mwu { .. } => "mwu",
        UpdateRule::Cfr => "cfr",
    }
}

/// Parses a rule name, using the default constants.
pub fn parse_rule(name: &str) -> Result<UpdateRule> {
    Ok(match name {
        "stepwise_br" => UpdateRule::STEPWISE_BR,
        "forel" => UpdateRule::FOREL,
        "replicator" => UpdateRule::REPLICATOR,
        "mwu" => UpdateRule::MWU,
        "cfr" => UpdateRule::Cfr,
        other => bail!("unknown rule `{other}`"),
    })
}

impl AlgorithmSpec {
    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        let id = match self.id {
            AlgorithmId::Sp => "sp",
            AlgorithmId::Fsp => "fsp",
            AlgorithmId::Psro => "psro",
            AlgorithmId::Odo => "odo",
            AlgorithmId::Fxp => "fxp",
        };
        format!("{id}_{}", rule_name(self.update_rule()))
    }

    fn update_rule(&self) -> UpdateRule {
        let h = &self.hyperparams;
        match self.rule {
            RuleId::StepwiseBr => UpdateRule::StepwiseBr {
                lr: h.lr.unwrap_or(0.1),
            },
            RuleId::Forel => UpdateRule::FoReL {
                scale: h.scale.unwrap_or(20.0),
            },
            RuleId::Replicator => UpdateRule::Replicator {
                dt: h.dt.unwrap_or(0.8),
            },
            RuleId::Mwu => UpdateRule::Mwu { k: h.k.unwrap_or(10.0) },
            RuleId::Cfr => UpdateRule::Cfr,
        }
    }

    fn check_rule_params(&self) -> Result<()> {
        let h = &self.hyperparams;
        let given = [
            ("lr", h.lr.is_some(), RuleId::StepwiseBr),
            ("scale", h.scale.is_some(), RuleId::Forel),
            ("dt", h.dt.is_some(), RuleId::Replicator),
            ("k", h.k.is_some(), RuleId::Mwu),
        ];
        for (name, set, owner) in given {
            if set && owner != self.rule {
                bail!("hyperparameter `{name}` does not apply to rule {:?}", self.rule);
            }
        }
        Ok(())
    }

    /// Trainer settings for one seed.
    pub fn train_config(&self, exp: &ExperimentConfig, seed: u64) -> Result<TrainConfig> {
        self.check_rule_params()?;
        let algorithm = match self.id {
            AlgorithmId::Sp => Algorithm::Sp,
            AlgorithmId::Fsp => Algorithm::Fsp,
            AlgorithmId::Psro => Algorithm::Psro,
            AlgorithmId::Odo => Algorithm::Odo,
            AlgorithmId::Fxp => Algorithm::Fxp,
        };
        let h = &self.hyperparams;
        let mut c = TrainConfig::new(algorithm);
        c.rule = self.update_rule();
        c.total_steps = exp.total_steps;
        c.eval_every = exp.eval_every;
        c.convergence_threshold = exp.convergence_threshold;
        c.seed = seed;
        if let Some(x) = h.eta {
            c.eta = x;
        }
        if let Some(x) = h.eta_decay {
            c.eta_decay = x;
        }
        if let Some(x) = h.steps_per_iter {
            c.steps_per_iter = x;
        }
        if let Some(x) = h.meta_solver {
            c.meta_solver = solver(x);
        }
        if let Some(x) = h.counter_meta_solver {
            c.counter_meta_solver = solver(x);
        }
        if let Some(x) = h.reset {
            c.reset = x;
        }
        if let Some(x) = h.counter_reset {
            c.counter_reset = x;
        }
        if let Some(x) = h.main_reset {
            c.main_reset = x;
        }
        if let Some(x) = h.plateau_tol {
            c.plateau_tol = x;
        }
        if let Some(x) = h.plateau_window {
            c.plateau_window = x;
        }
        if let Some(x) = h.nash_tol {
            c.nash_tol = x;
        }
        if let Some(x) = h.stop_on_convergence {
            c.stop_on_convergence = x;
        }
        c.init = match h.init {
            Some(InitId::Random) => Init::Random,
            Some(InitId::Uniform) | None => Init::Uniform,
        };
        c.validate().with_context(|| format!("algorithm {}", self.label()))?;
        Ok(c)
    }
}

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).context("invalid experiment config")?;
        c.validate()?;
        Ok(c)
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn algorithms(&self) -> &[AlgorithmSpec] {
        self.algorithm.as_slice()
    }

    fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("`seeds` must list at least one seed");
        }
        if self.algorithms().is_empty() {
            bail!("`algorithm` must name at least one algorithm");
        }
        let mut labels: Vec<String> = self.algorithms().iter().map(|a| a.label()).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            bail!("two algorithms share the label `{}`; set distinct `name`s", w[0]);
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            bail!("`seeds` has duplicates");
        }
        for a in self.algorithms() {
            if let Some(n) = &a.name {
                if n.is_empty()
                    || !n
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
                {
                    bail!("algorithm name `{n}` may only use ASCII letters, digits, `_`, `-` and `.`");
                }
            }
            a.train_config(self, self.seeds[0])?;
        }
        Ok(())
    }
}
