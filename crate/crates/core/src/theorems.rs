//! Empirical checks of the two results about preference-preserving
//! self-play on the motivating game.
//!
//! Theorem 1: when every agent's teammates start with `π_{-i}(0)` below
//! [`theorem1_threshold`], no preference-preserving rule reaches the global
//! equilibrium `0_N` under self-play. Theorem 2: training against the fixed
//! opponent `1_N` succeeds from strictly more symmetric initializations
//! than self-play does.

use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::dist_exploitability;
use crate::games::{make_motivating, MotivatingParams};
use crate::learners::{
    all_playing, check_preference_preservation, symmetric_binary_policy, theorem1_threshold, unit_f64, LearnerState,
    QValues, UpdateRule,
};
use crate::math::powf;
use crate::{ProductPolicy, Result, TeamGame};

/// Rules whose updates never shrink `π(x)/π(y)` while `Q(x) ≥ Q(y)` holds.
pub const PREFERENCE_PRESERVING: [UpdateRule; 4] = [
    UpdateRule::STEPWISE_BR,
    UpdateRule::FOREL,
    UpdateRule::MWU,
    UpdateRule::Cfr,
];

/// Outcome of one rule over all Theorem 1 trials.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleOutcome {
    /// The rule.
    pub rule: UpdateRule,
    /// Runs whose policy reached the convergence threshold.
    pub converged: usize,
    /// Runs whose trajectory broke preference preservation.
    pub runs_with_violations: usize,
    /// Total violations over all runs.
    pub violations: usize,
}

/// Result of [`theorem1_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Report {
    /// The threshold on `π_{-i}(0)`.
    pub threshold: f64,
    /// Number of sampled initializations.
    pub trials: usize,
    /// Steps per run.
    pub steps: usize,
    /// One entry per rule, in [`PREFERENCE_PRESERVING`] order.
    pub outcomes: Vec<RuleOutcome>,
}

/// Result of [`theorem2_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Report {
    /// Symmetric initializations `p = π_i(0)`.
    pub grid: Vec<f64>,
    /// Self-play reached the global equilibrium from `grid[k]`.
    pub sp_good: Vec<bool>,
    /// Training against `1_N` reached it from `grid[k]`.
    pub fixed_good: Vec<bool>,
    /// The point `(N+C)^{-1/(N-1)}`.
    pub critical: f64,
    /// Self-play from the critical point reached the equilibrium.
    pub critical_sp_good: bool,
    /// Training against `1_N` from the critical point reached it.
    pub critical_fixed_good: bool,
}

impl Theorem2Report {
    /// Every self-play success is also a fixed-opponent success.
    pub fn sp_subset_of_fixed(&self) -> bool {
        self.sp_good.iter().zip(&self.fixed_good).all(|(&s, &f)| !s || f)
    }

    /// Grid points where only the fixed-opponent run succeeds.
    pub fn difference(&self) -> Vec<f64> {
        self.grid
            .iter()
            .zip(self.sp_good.iter().zip(&self.fixed_good))
            .filter(|(_, (&s, &f))| f && !s)
            .map(|(&p, _)| p)
            .collect()
    }

    /// The critical point succeeds against `1_N` but not in self-play.
    pub fn critical_in_difference(&self) -> bool {
        self.critical_fixed_good && !self.critical_sp_good
    }
}

/// Draws a product policy with `π_j(0) ~ U[0, 1]` per agent, rejecting
/// draws until every agent's teammates satisfy `π_{-i}(0) ≤ threshold`.
pub fn sample_below_threshold(p: MotivatingParams, rng: &mut ChaCha8Rng) -> ProductPolicy {
    let threshold = theorem1_threshold(p);
    loop {
        let zeros: Vec<f64> = (0..p.n).map(|_| unit_f64(rng)).collect();
        let ok = (0..p.n).all(|i| {
            let others: f64 = zeros
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, z)| z)
                .product();
            others <= threshold
        });
        if ok {
            return ProductPolicy::from_raw(zeros.iter().map(|&z| alloc::vec![z, 1.0 - z]).collect());
        }
    }
}

/// Trajectory of a run plus whether it ever reached the threshold.
struct Trace {
    converged: bool,
    trajectory: Vec<(ProductPolicy, QValues)>,
}

/// Trains `start` for `steps` updates against itself (`fixed = None`) or a
/// fixed opponent, scoring the current policy by team exploitability.
fn trace(
    game: &TeamGame,
    rule: UpdateRule,
    start: ProductPolicy,
    fixed: Option<&ProductPolicy>,
    steps: usize,
    threshold: f64,
    keep: bool,
) -> Trace {
    let fixed = fixed.map(|f| f.joint_distribution());
    let mut learner = LearnerState::new(rule, start);
    let mut converged = false;
    let mut trajectory = Vec::new();
    for t in 0..=steps {
        let current = learner.policy().clone();
        let dist = current.joint_distribution();
        converged |= dist_exploitability(game, &dist, &dist) <= threshold;
        if t == steps {
            if keep {
                trajectory.push((current, Vec::new()));
            }
            break;
        }
        let opponent = fixed.as_ref().unwrap_or(&dist);
        let payoffs = game.payoff_against(opponent);
        let q = crate::learners::q_from_payoffs(game, &current, &payoffs);
        let value: f64 = dist.iter().zip(&payoffs).map(|(p, v)| p * v).sum();
        learner.step(&q, value);
        if keep {
            trajectory.push((current, q));
        }
    }
    Trace { converged, trajectory }
}

/// Runs every rule in [`PREFERENCE_PRESERVING`] in self-play from `trials`
/// sampled initializations below the threshold, counting runs that reach
/// exploitability `convergence_threshold` and preference violations.
pub fn theorem1_check(
    p: MotivatingParams,
    trials: usize,
    steps: usize,
    seed: u64,
    convergence_threshold: f64,
) -> Result<Theorem1Report> {
    let game = make_motivating(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<ProductPolicy> = (0..trials).map(|_| sample_below_threshold(p, &mut rng)).collect();
    let outcomes = PREFERENCE_PRESERVING
        .iter()
        .map(|&rule| {
            let mut out = RuleOutcome {
                rule,
                converged: 0,
                runs_with_violations: 0,
                violations: 0,
            };
            for start in &starts {
                let run = trace(&game, rule, start.clone(), None, steps, convergence_threshold, true);
                let v = check_preference_preservation(&run.trajectory).len();
                out.converged += run.converged as usize;
                out.runs_with_violations += (v > 0) as usize;
                out.violations += v;
            }
            out
        })
        .collect();
    Ok(Theorem1Report {
        threshold: theorem1_threshold(p),
        trials,
        steps,
        outcomes,
    })
}

/// The symmetric initialization `(N+C)^{-1/(N-1)}` at which agents facing
/// `1_N` are exactly indifferent between their two actions.
pub fn critical_initialization(p: MotivatingParams) -> f64 {
    powf(p.n as f64 + p.c, -1.0 / (p.n as f64 - 1.0))
}

/// The grid `{0.01, 0.02, ..., 0.99}`.
pub fn default_grid() -> Vec<f64> {
    (1..100).map(|k| k as f64 / 100.0).collect()
}

/// For each symmetric initialization on `grid` (and the critical point),
/// runs `rule` in self-play and against the fixed opponent `1_N` and
/// records which reach exploitability `convergence_threshold`.
pub fn theorem2_check(
    p: MotivatingParams,
    grid: &[f64],
    rule: UpdateRule,
    steps: usize,
    convergence_threshold: f64,
) -> Result<Theorem2Report> {
    let game = make_motivating(p)?;
    let ones = all_playing(p.n, 1, 2);
    let good = |p0: f64, fixed: Option<&ProductPolicy>| {
        let start = symmetric_binary_policy(p.n, p0);
        trace(&game, rule, start, fixed, steps, convergence_threshold, false).converged
    };
    let critical = critical_initialization(p);
    Ok(Theorem2Report {
        grid: grid.to_vec(),
        sp_good: grid.iter().map(|&p0| good(p0, None)).collect(),
        fixed_good: grid.iter().map(|&p0| good(p0, Some(&ones))).collect(),
        critical,
        critical_sp_good: good(critical, None),
        critical_fixed_good: good(critical, Some(&ones)),
    })
}
