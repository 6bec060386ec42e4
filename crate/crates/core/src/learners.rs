//! Exact per-agent Q-functions and the tabular update rules of the
//! self-play family, plus a checker for preference preservation along a
//! learning trajectory.
//!
//! Each agent of a team sees only its own Q-vector
//! `Q_i(a) = E[U([a, x_{-i}], y)]` with teammates drawn from the current
//! product policy and the opponent from a fixed or moving mixture.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::game::JointAction;
use crate::games::MotivatingParams;
use crate::math::{argmax_noisy, exp, softmax, sqrt};
use crate::{Error, MixturePolicy, ProductPolicy, Result, TeamGame};

/// Per-agent Q-values: `q[i][a]` is agent `i`'s expected utility for action `a`.
pub type QValues = Vec<Vec<f64>>;

/// Exact Q-values of every agent of `pi` against the opponent mixture `mu`.
pub fn compute_q(game: &TeamGame, pi: &ProductPolicy, mu: &MixturePolicy) -> Result<QValues> {
    game.check_product(pi)?;
    game.check_mixture(mu)?;
    Ok(q_against_dist(game, pi, &mu.joint_distribution()))
}

/// Q-values against an opponent given as a joint-action distribution.
pub fn q_against_dist(game: &TeamGame, pi: &ProductPolicy, opponent: &[f64]) -> QValues {
    q_from_payoffs(game, pi, &game.payoff_against(opponent))
}

/// Q-values from the precomputed payoff of every own joint action.
pub fn q_from_payoffs(game: &TeamGame, pi: &ProductPolicy, payoffs: &[f64]) -> QValues {
    let (n, a) = (game.team_size(), game.action_count());
    let mut q = vec![vec![0.0; a]; n];
    let mut digits = vec![0usize; n];
    for &v in payoffs {
        for i in 0..n {
            let weight: f64 = digits
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, &d)| pi.dist(j)[d])
                .product();
            q[i][digits[i]] += weight * v;
        }
        // Advance the odometer; the last agent is the fastest digit.
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < a {
                break;
            }
            *d = 0;
        }
    }
    q
}

/// One agent moves a fraction `lr` of its mass onto its best action.
pub fn stepwise_br(dist: &[f64], q: &[f64], lr: f64) -> Vec<f64> {
    let best = argmax_noisy(q);
    dist.iter()
        .enumerate()
        .map(|(a, &p)| (1.0 - lr) * p + if a == best { lr } else { 0.0 })
        .collect()
}

/// Replicator step in advantage form, clipped back onto the simplex.
pub fn replicator(dist: &[f64], q: &[f64], dt: f64) -> Vec<f64> {
    let mean: f64 = dist.iter().zip(q).map(|(p, v)| p * v).sum();
    let mut next: Vec<f64> = dist
        .iter()
        .zip(q)
        .map(|(&p, &v)| (p + dt * p * (v - mean)).max(0.0))
        .collect();
    normalize_or(&mut next, dist);
    next
}

/// Multiplicative weights: `π' ∝ π · softmax(k Q)`.
pub fn mwu(dist: &[f64], q: &[f64], k: f64) -> Vec<f64> {
    // Shift by the best Q on the support so the update cannot underflow to
    // an all-zero vector.
    let shift = dist
        .iter()
        .zip(q)
        .filter(|(&p, _)| p > 0.0)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut next: Vec<f64> = dist
        .iter()
        .zip(q)
        .map(|(&p, &v)| if p > 0.0 { p * exp(k * (v - shift)) } else { 0.0 })
        .collect();
    normalize_or(&mut next, dist);
    next
}

/// Regret matching on accumulated regrets; uniform when none is positive.
pub fn regret_matching(regrets: &[f64]) -> Vec<f64> {
    let total: f64 = regrets.iter().map(|r| r.max(0.0)).sum();
    if total > 0.0 {
        regrets.iter().map(|r| r.max(0.0) / total).collect()
    } else {
        vec![1.0 / regrets.len() as f64; regrets.len()]
    }
}

fn normalize_or(v: &mut [f64], fallback: &[f64]) {
    let total: f64 = v.iter().sum();
    if total > 0.0 && total.is_finite() {
        v.iter_mut().for_each(|p| *p /= total);
    } else {
        v.copy_from_slice(fallback);
    }
}

/// Tabular update rule applied independently by every agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateRule {
    /// Move `lr` of the mass toward the per-agent argmax action.
    StepwiseBr {
        /// Step size in `(0, 1]`.
        lr: f64,
    },
    /// Follow the regularized leader: softmax of `Σ_t (scale/√t) Q_t`.
    FoReL {
        /// Numerator of the `scale/√t` learning-rate schedule.
        scale: f64,
    },
    /// Discrete replicator dynamics with step `dt`.
    Replicator {
        /// Step size.
        dt: f64,
    },
    /// Multiplicative weights with inverse temperature `k`.
    Mwu {
        /// Inverse temperature.
        k: f64,
    },
    /// Regret matching on regrets measured against the team value.
    Cfr,
}

impl UpdateRule {
    /// Stepwise best response with `lr = 0.1`.
    pub const STEPWISE_BR: UpdateRule = UpdateRule::StepwiseBr { lr: 0.1 };
    /// FoReL with `lr_t = 20/√t`.
    pub const FOREL: UpdateRule = UpdateRule::FoReL { scale: 20.0 };
    /// Replicator with `Δt = 0.8`.
    pub const REPLICATOR: UpdateRule = UpdateRule::Replicator { dt: 0.8 };
    /// MWU with `k = 10`.
    pub const MWU: UpdateRule = UpdateRule::Mwu { k: 10.0 };

    /// Checks the rule's constants.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            UpdateRule::StepwiseBr { lr } => lr > 0.0 && lr <= 1.0,
            UpdateRule::FoReL { scale } => scale > 0.0 && scale.is_finite(),
            UpdateRule::Replicator { dt } => dt > 0.0 && dt.is_finite(),
            UpdateRule::Mwu { k } => k > 0.0 && k.is_finite(),
            UpdateRule::Cfr => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(alloc::format!(
                "bad update rule constants: {self:?}"
            )))
        }
    }
}

/// How a learner's first policy is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Uniform per agent.
    Uniform,
    /// Each `π_i(a)` drawn i.i.d. from `U[0, 1]`, then normalized.
    Random,
    /// An explicit starting policy.
    Given(ProductPolicy),
}

impl Init {
    /// Materializes the initial policy.
    pub fn policy<R: RngCore>(&self, team_size: usize, action_count: usize, rng: &mut R) -> ProductPolicy {
        match self {
            Init::Uniform => ProductPolicy::uniform(team_size, action_count),
            Init::Random => random_policy(team_size, action_count, rng),
            Init::Given(p) => p.clone(),
        }
    }
}

/// Uniform draw on `[0, 1)` with 53 bits of precision.
pub fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A product policy with i.i.d. uniform weights per agent, normalized.
pub fn random_policy<R: RngCore>(team_size: usize, action_count: usize, rng: &mut R) -> ProductPolicy {
    let dists = (0..team_size)
        .map(|_| {
            let mut d: Vec<f64> = (0..action_count).map(|_| unit_f64(rng)).collect();
            let total: f64 = d.iter().sum();
            if total > 0.0 {
                d.iter_mut().for_each(|p| *p /= total);
            } else {
                d.fill(1.0 / action_count as f64);
            }
            d
        })
        .collect();
    ProductPolicy::from_raw(dists)
}

/// A learner's full state: current policy plus the accumulators its rule needs.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    rule: UpdateRule,
    steps: usize,
    policy: ProductPolicy,
    forel_sum: Vec<Vec<f64>>,
    regrets: Vec<Vec<f64>>,
}

impl LearnerState {
    /// Fresh state starting from `policy`.
    pub fn new(rule: UpdateRule, policy: ProductPolicy) -> Self {
        let zeros = vec![vec![0.0; policy.action_count()]; policy.team_size()];
        LearnerState {
            rule,
            steps: 0,
            forel_sum: zeros.clone(),
            regrets: zeros,
            policy,
        }
    }

    /// Current policy.
    pub fn policy(&self) -> &ProductPolicy {
        &self.policy
    }

    /// Updates applied so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// The update rule.
    pub fn rule(&self) -> UpdateRule {
        self.rule
    }

    /// Applies one update from per-agent Q-values. `value` is the team's
    /// expected utility `U(π^t, μ^t)`, used as the CFR baseline.
    pub fn step(&mut self, q: &[Vec<f64>], value: f64) -> &ProductPolicy {
        self.steps += 1;
        let t = self.steps as f64;
        let dists = match self.rule {
            UpdateRule::StepwiseBr { lr } => self
                .policy
                .dists()
                .iter()
                .zip(q)
                .map(|(d, q)| stepwise_br(d, q, lr))
                .collect(),
            UpdateRule::FoReL { scale } => {
                let lr = scale / sqrt(t);
                self.forel_sum
                    .iter_mut()
                    .zip(q)
                    .map(|(acc, q)| {
                        acc.iter_mut().zip(q).for_each(|(r, v)| *r += lr * v);
                        softmax(acc)
                    })
                    .collect()
            }
            UpdateRule::Replicator { dt } => self
                .policy
                .dists()
                .iter()
                .zip(q)
                .map(|(d, q)| replicator(d, q, dt))
                .collect(),
            UpdateRule::Mwu { k } => self.policy.dists().iter().zip(q).map(|(d, q)| mwu(d, q, k)).collect(),
            UpdateRule::Cfr => self
                .regrets
                .iter_mut()
                .zip(q)
                .map(|(acc, q)| {
                    acc.iter_mut().zip(q).for_each(|(r, v)| *r += v - value);
                    regret_matching(acc)
                })
                .collect(),
        };
        self.policy = ProductPolicy::from_raw(dists);
        &self.policy
    }

    /// Restarts from `policy`, clearing all accumulators.
    pub fn reset(&mut self, policy: ProductPolicy) {
        *self = LearnerState::new(self.rule, policy);
    }
}

/// Opponent for fictitious self-play: weight `eta` on the current policy and
/// `(1-eta)/t` on each of the `t` policies in `history` (which includes the
/// current one as its last entry).
pub fn fsp_opponent(current: &ProductPolicy, history: &[ProductPolicy], eta: f64) -> Result<MixturePolicy> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidConfig(alloc::format!(
            "eta must lie in [0, 1], got {eta}"
        )));
    }
    if history.is_empty() {
        return Ok(MixturePolicy::pure(current.clone()));
    }
    let t = history.len() as f64;
    let mut members = Vec::with_capacity(history.len() + 1);
    let mut weights = Vec::with_capacity(history.len() + 1);
    members.push(current.clone());
    weights.push(eta);
    for p in history {
        members.push(p.clone());
        weights.push((1.0 - eta) / t);
    }
    Ok(MixturePolicy::from_raw(members, weights))
}

/// A step at which an agent's probability ratio moved against an action
/// pair whose Q-ordering had held at every earlier step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    /// Agent index.
    pub agent: usize,
    /// The action that was never worse.
    pub preferred: usize,
    /// The action it was compared against.
    pub other: usize,
    /// Step `t` whose transition to `t + 1` broke the ratio condition.
    pub step: usize,
}

/// Checks that `π(x)/π(y)` never decreases from step `t` to `t+1` while
/// `Q(x) ≥ Q(y)` has held at every step up to `t`. Entry `t` of the
/// trajectory holds `π^t` and the Q-values observed at `π^t`. Ratios are
/// compared by cross-multiplication with a relative slack of `1e-9`.
pub fn check_preference_preservation(trajectory: &[(ProductPolicy, QValues)]) -> Vec<Violation> {
    let mut out = Vec::new();
    let Some((first, _)) = trajectory.first() else {
        return out;
    };
    let (n, a) = (first.team_size(), first.action_count());
    // dominated[i][x][y]: Q_i(x) >= Q_i(y) at every step so far.
    let mut dominated = vec![vec![vec![true; a]; a]; n];
    for (t, window) in trajectory.windows(2).enumerate() {
        let (now, q) = (&window[0].0, &window[0].1);
        let next = &window[1].0;
        for i in 0..n {
            for x in 0..a {
                for y in 0..a {
                    if x == y {
                        continue;
                    }
                    dominated[i][x][y] &= q[i][x] >= q[i][y];
                    if !dominated[i][x][y] {
                        continue;
                    }
                    let lhs = next.dist(i)[x] * now.dist(i)[y];
                    let rhs = now.dist(i)[x] * next.dist(i)[y];
                    if lhs < rhs - 1e-9 * lhs.max(rhs) {
                        out.push(Violation {
                            agent: i,
                            preferred: x,
                            other: y,
                            step: t,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Upper bound on `π_{-i}(0)` below which preference-preserving self-play
/// cannot reach the motivating game's global equilibrium.
pub fn theorem1_threshold(p: MotivatingParams) -> f64 {
    1.0 / (p.n as f64 + 1.0 + 2.0 * p.c + p.eps)
}

/// Symmetric policy with every agent playing action 0 with probability `p0`.
pub fn symmetric_binary_policy(team_size: usize, p0: f64) -> ProductPolicy {
    ProductPolicy::from_raw(vec![vec![p0, 1.0 - p0]; team_size])
}

/// The all-`action` deterministic team.
pub fn all_playing(team_size: usize, action: usize, action_count: usize) -> ProductPolicy {
    ProductPolicy::deterministic(&JointAction::repeat(action, team_size), action_count)
}
