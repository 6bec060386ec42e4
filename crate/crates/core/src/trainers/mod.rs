//! Training loops: self-play, fictitious self-play, PSRO, online double
//! oracle and fictitious cross-play, each producing an evaluated
//! [`RunRecord`].
//!
//! A *step* is one learner update. Population methods count every update of
//! every learner they train, so FXP's step axis includes both its main and
//! its counter policy.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::games::{sad_exploitability_dist, SadReferences};
use crate::learners::{Init, UpdateRule};
use crate::meta::{MetaPolicy, PayoffTable, NASH_TOL};
use crate::{Error, MixturePolicy, ProductPolicy, Result, TeamGame};

mod fxp;
mod psro;
mod selfplay;

pub use fxp::run_fxp;
pub use psro::{run_odo, run_psro};
pub use selfplay::{run_fsp, run_sp};

/// Default exploitability cutoff for "converged".
pub const CONVERGENCE_THRESHOLD: f64 = 1e-2;

/// How the evaluated policy of a run is scored.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    /// Team exploitability of the symmetric profile.
    Team,
    /// Total gain of the SAD reference policies against the evaluated policy.
    SadReference(SadReferences),
}

/// A game together with the exploitability measure used to evaluate runs on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    /// The game.
    pub game: TeamGame,
    /// The exploitability measure.
    pub evaluation: Evaluation,
}

impl Problem {
    /// Problem scored by team exploitability.
    pub fn team(game: TeamGame) -> Self {
        Problem {
            game,
            evaluation: Evaluation::Team,
        }
    }

    /// Exploitability of a joint-action distribution played by both teams.
    pub fn exploitability_of(&self, dist: &[f64]) -> f64 {
        match &self.evaluation {
            Evaluation::Team => crate::game::dist_exploitability(&self.game, dist, dist).max(0.0),
            Evaluation::SadReference(refs) => sad_exploitability_dist(&self.game, refs, dist),
        }
    }

    /// Exploitability of a mixture.
    pub fn exploitability(&self, policy: &MixturePolicy) -> Result<f64> {
        self.game.check_mixture(policy)?;
        Ok(self.exploitability_of(&policy.joint_distribution()))
    }
}

/// Training algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Self-play.
    Sp,
    /// Fictitious self-play.
    Fsp,
    /// Policy-space response oracles.
    Psro,
    /// Online double oracle.
    Odo,
    /// Fictitious cross-play.
    Fxp,
}

/// Meta-solver mapping a payoff table to a meta-policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaSolverKind {
    /// Equal weights.
    Uniform,
    /// Equilibrium of the restricted zero-sum game.
    Nash,
    /// Win-rate-based prioritized sampling against the policy being trained.
    Prioritized,
}

/// Every knob of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Which loop to run.
    pub algorithm: Algorithm,
    /// Per-agent update rule.
    pub rule: UpdateRule,
    /// Step budget.
    pub total_steps: usize,
    /// Maximum updates per learner in one population iteration.
    pub steps_per_iter: usize,
    /// Self-play weight for FSP and FXP's main policy.
    pub eta: f64,
    /// Per-update multiplicative decay of `eta` (1 disables decay).
    pub eta_decay: f64,
    /// Meta-solver over the population (PSRO) or joint population (FXP).
    pub meta_solver: MetaSolverKind,
    /// FXP meta-solver over the main-versus-counter table.
    pub counter_meta_solver: MetaSolverKind,
    /// PSRO/ODO: train each new policy from a fresh initialization.
    pub reset: bool,
    /// FXP: train each counter policy from a fresh initialization.
    pub counter_reset: bool,
    /// FXP: train each main policy from a fresh initialization.
    pub main_reset: bool,
    /// Largest per-step L∞ policy change that counts as no movement.
    pub plateau_tol: f64,
    /// Consecutive still steps that end an iteration early.
    pub plateau_window: usize,
    /// Evaluate every this many steps (self-play family and ODO).
    pub eval_every: usize,
    /// Seed for random initializations.
    pub seed: u64,
    /// Initial policy of every learner.
    pub init: Init,
    /// Exploitability at or below which a run counts as converged.
    pub convergence_threshold: f64,
    /// Certificate tolerance of the Nash meta-solver.
    pub nash_tol: f64,
    /// End the run at the first converged evaluation.
    pub stop_on_convergence: bool,
}

impl TrainConfig {
    /// Defaults for `algorithm`: stepwise best response with `lr = 0.1`,
    /// `eta = 0.3`, uniform initialization.
    pub fn new(algorithm: Algorithm) -> Self {
        TrainConfig {
            algorithm,
            rule: UpdateRule::STEPWISE_BR,
            total_steps: 1000,
            steps_per_iter: 1000,
            eta: 0.3,
            eta_decay: 1.0,
            meta_solver: MetaSolverKind::Nash,
            counter_meta_solver: MetaSolverKind::Nash,
            reset: true,
            counter_reset: true,
            main_reset: false,
            plateau_tol: 1e-6,
            plateau_window: 20,
            eval_every: 1,
            seed: 0,
            init: Init::Uniform,
            convergence_threshold: CONVERGENCE_THRESHOLD,
            nash_tol: NASH_TOL,
            stop_on_convergence: false,
        }
    }

    /// Checks the invariants on every knob.
    pub fn validate(&self) -> Result<()> {
        self.rule.validate()?;
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(0.0..=1.0).contains(&self.eta) {
            return bad("eta must lie in [0, 1]");
        }
        if !(self.eta_decay > 0.0 && self.eta_decay <= 1.0) {
            return bad("eta decay must lie in (0, 1]");
        }
        if self.total_steps == 0 || self.steps_per_iter == 0 || self.eval_every == 0 {
            return bad("step counts must be positive");
        }
        if self.plateau_window == 0 || !(self.plateau_tol >= 0.0) {
            return bad("plateau window must be positive and tolerance non-negative");
        }
        if !(self.nash_tol > 0.0) || !(self.convergence_threshold >= 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }

    pub(crate) fn check(&self, expected: Algorithm) -> Result<()> {
        if self.algorithm != expected {
            return Err(Error::InvalidConfig(format!(
                "config is for {:?}, not {:?}",
                self.algorithm, expected
            )));
        }
        self.validate()
    }
}

/// One evaluation of the run's target policy.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    /// Steps taken so far.
    pub step: usize,
    /// Exploitability of the evaluated policy.
    pub exploitability: f64,
    /// Per-agent marginal action distributions of the evaluated policy.
    pub marginals: Vec<Vec<f64>>,
}

/// Step accounting for one population iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationStats {
    /// Step count when the iteration started.
    pub start_step: usize,
    /// Updates applied to the main (or only) learner.
    pub main_steps: usize,
    /// Updates applied to the counter learner (FXP only).
    pub counter_steps: usize,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// Algorithm that produced the record.
    pub algorithm: Algorithm,
    /// Evaluations in strictly increasing step order.
    pub points: Vec<EvalPoint>,
    /// First evaluated step with exploitability at or below the threshold.
    pub convergence_step: Option<usize>,
    /// Steps actually taken.
    pub total_steps: usize,
    /// The policy evaluated at the last point.
    pub final_target: MixturePolicy,
    /// Final policy of the main (or only) learner.
    pub final_policy: ProductPolicy,
    /// Populations: `[Π]` for PSRO/ODO, `[Π_M, Π_C]` for FXP, empty otherwise.
    pub populations: Vec<Vec<ProductPolicy>>,
    /// Final meta-policies, aligned with `populations`.
    pub meta_policies: Vec<MetaPolicy>,
    /// Final payoff tables: `[U]` for PSRO/ODO, `[U_{M+C}, U_{M×C}]` for FXP.
    pub payoff_tables: Vec<PayoffTable>,
    /// Per-iteration step accounting for population methods.
    pub iterations: Vec<IterationStats>,
}

impl RunRecord {
    /// Exploitability at the last evaluation.
    pub fn final_exploitability(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.exploitability)
    }
}

/// Dispatches on `config.algorithm`.
pub fn run(problem: &Problem, config: &TrainConfig) -> Result<RunRecord> {
    match config.algorithm {
        Algorithm::Sp => run_sp(problem, config),
        Algorithm::Fsp => run_fsp(problem, config),
        Algorithm::Psro => run_psro(problem, config),
        Algorithm::Odo => run_odo(problem, config),
        Algorithm::Fxp => run_fxp(problem, config),
    }
}

/// True iff the last `window` consecutive policy changes all stayed below
/// `tol` in per-agent L∞ distance.
pub fn detect_plateau(history: &[ProductPolicy], tol: f64, window: usize) -> bool {
    if window == 0 || history.len() < window + 1 {
        return false;
    }
    history[history.len() - window - 1..]
        .windows(2)
        .all(|w| w[0].max_abs_diff(&w[1]) < tol)
}

/// Streaming form of [`detect_plateau`].
#[derive(Debug, Clone)]
pub(crate) struct Plateau {
    tol: f64,
    window: usize,
    calm: usize,
}

impl Plateau {
    pub(crate) fn new(tol: f64, window: usize) -> Self {
        Plateau { tol, window, calm: 0 }
    }

    /// Feeds one transition; returns true once the window is reached.
    pub(crate) fn observe(&mut self, before: &ProductPolicy, after: &ProductPolicy) -> bool {
        if before.max_abs_diff(after) < self.tol {
            self.calm += 1;
        } else {
            self.calm = 0;
        }
        self.calm >= self.window
    }
}

/// Accumulates evaluation points and tracks the first converged step.
pub(crate) struct Recorder<'a> {
    problem: &'a Problem,
    threshold: f64,
    points: Vec<EvalPoint>,
    convergence_step: Option<usize>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(problem: &'a Problem, config: &TrainConfig) -> Self {
        Recorder {
            problem,
            threshold: config.convergence_threshold,
            points: Vec::new(),
            convergence_step: None,
        }
    }

    /// Scores the joint-action distribution `dist` at `step`; a repeated step
    /// replaces the earlier point.
    pub(crate) fn record(&mut self, step: usize, dist: &[f64], marginals: Vec<Vec<f64>>) -> f64 {
        let exploitability = self.problem.exploitability_of(dist);
        if self.convergence_step.is_none() && exploitability <= self.threshold {
            self.convergence_step = Some(step);
        }
        let point = EvalPoint {
            step,
            exploitability,
            marginals,
        };
        match self.points.last_mut() {
            Some(last) if last.step == step => *last = point,
            _ => self.points.push(point),
        }
        exploitability
    }

    pub(crate) fn converged(&self) -> bool {
        self.convergence_step.is_some()
    }

    pub(crate) fn finish(
        self,
        algorithm: Algorithm,
        total_steps: usize,
        final_target: MixturePolicy,
        final_policy: ProductPolicy,
    ) -> RunRecord {
        RunRecord {
            algorithm,
            points: self.points,
            convergence_step: self.convergence_step,
            total_steps,
            final_target,
            final_policy,
            populations: Vec::new(),
            meta_policies: Vec::new(),
            payoff_tables: Vec::new(),
            iterations: Vec::new(),
        }
    }
}

/// `Σ_k w_k d_k` over joint-action distributions.
pub(crate) fn mix_dists(dists: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; dists[0].len()];
    for (d, &w) in dists.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (acc, p) in out.iter_mut().zip(d) {
            *acc += w * p;
        }
    }
    out
}

/// The population mixture `σΠ` as a policy object.
pub(crate) fn population_mixture(pop: &[ProductPolicy], weights: &[f64]) -> MixturePolicy {
    MixturePolicy::from_raw(pop.to_vec(), weights.to_vec())
}
