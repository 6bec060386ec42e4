//! Team games, factored and mixed team policies, and the exact evaluation
//! primitives every other module is built on.
//!
//! Joint actions of a team are flattened into a single index with the first
//! agent as the most significant digit, so index order is lexicographic
//! order. Utilities are stored densely as a `joint_count × joint_count`
//! row-major table holding the row team's payoff.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::abs;
use crate::{Error, Result};

/// Tolerance used when validating that probability vectors sum to one.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Largest number of joint actions per team a dense [`TeamGame`] may have.
pub const MAX_JOINT_ACTIONS: usize = 4096;

/// One pure action per agent of a team.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointAction(Vec<usize>);

impl JointAction {
    /// Wraps a vector of per-agent action indices.
    pub fn new(actions: Vec<usize>) -> Self {
        JointAction(actions)
    }

    /// Every agent plays `action`.
    pub fn repeat(action: usize, team_size: usize) -> Self {
        JointAction(vec![action; team_size])
    }

    /// Per-agent action indices.
    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    /// Flattened index in `[0, action_count^team_size)`.
    pub fn index(&self, action_count: usize) -> usize {
        self.0.iter().fold(0, |acc, &a| acc * action_count + a)
    }

    /// Inverse of [`JointAction::index`].
    pub fn from_index(mut index: usize, team_size: usize, action_count: usize) -> Self {
        let mut actions = vec![0; team_size];
        for slot in actions.iter_mut().rev() {
            *slot = index % action_count;
            index /= action_count;
        }
        JointAction(actions)
    }
}

impl From<Vec<usize>> for JointAction {
    fn from(actions: Vec<usize>) -> Self {
        JointAction(actions)
    }
}

/// A two-team zero-sum normal-form game with homogeneous per-agent action sets.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamGame {
    team_size: usize,
    action_count: usize,
    joint_count: usize,
    symmetric: bool,
    utility: Vec<f64>,
}

impl TeamGame {
    /// Builds a game by evaluating `utility(x, y)` (row team's payoff) on every
    /// pair of joint actions. The game is flagged symmetric when the table is
    /// exactly antisymmetric.
    pub fn from_fn<F>(team_size: usize, action_count: usize, mut utility: F) -> Result<Self>
    where
        F: FnMut(&[usize], &[usize]) -> f64,
    {
        let joint_count = joint_count(team_size, action_count)?;
        let actions: Vec<JointAction> = (0..joint_count)
            .map(|i| JointAction::from_index(i, team_size, action_count))
            .collect();
        let mut table = Vec::with_capacity(joint_count * joint_count);
        for x in &actions {
            for y in &actions {
                let u = utility(x.actions(), y.actions());
                if !u.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "utility({:?}, {:?}) is not finite",
                        x.actions(),
                        y.actions()
                    )));
                }
                table.push(u);
            }
        }
        Ok(Self::from_table(team_size, action_count, joint_count, table))
    }

    /// Builds a game from a dense matrix indexed by flattened joint actions.
    pub fn from_matrix(team_size: usize, action_count: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let joint_count = joint_count(team_size, action_count)?;
        if rows.len() != joint_count {
            return Err(Error::Dimension {
                what: "utility rows",
                expected: joint_count,
                found: rows.len(),
            });
        }
        let mut table = Vec::with_capacity(joint_count * joint_count);
        for row in rows {
            if row.len() != joint_count {
                return Err(Error::Dimension {
                    what: "utility columns",
                    expected: joint_count,
                    found: row.len(),
                });
            }
            if row.iter().any(|u| !u.is_finite()) {
                return Err(Error::InvalidConfig("utility matrix has non-finite entries".into()));
            }
            table.extend_from_slice(row);
        }
        Ok(Self::from_table(team_size, action_count, joint_count, table))
    }

    fn from_table(team_size: usize, action_count: usize, joint_count: usize, utility: Vec<f64>) -> Self {
        let symmetric = (0..joint_count)
            .all(|x| (x..joint_count).all(|y| utility[x * joint_count + y] == -utility[y * joint_count + x]));
        TeamGame {
            team_size,
            action_count,
            joint_count,
            symmetric,
            utility,
        }
    }

    /// Agents per team.
    pub fn team_size(&self) -> usize {
        self.team_size
    }

    /// Actions available to each agent.
    pub fn action_count(&self) -> usize {
        self.action_count
    }

    /// Number of joint pure strategies of one team.
    pub fn joint_count(&self) -> usize {
        self.joint_count
    }

    /// True when `U(x, y) = -U(y, x)` holds exactly everywhere.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Row team's payoff for a pair of joint actions.
    pub fn utility(&self, x: &JointAction, y: &JointAction) -> f64 {
        self.utility_at(x.index(self.action_count), y.index(self.action_count))
    }

    /// Row team's payoff by flattened joint-action indices.
    #[inline]
    pub fn utility_at(&self, x: usize, y: usize) -> f64 {
        self.utility[x * self.joint_count + y]
    }

    /// Row of the utility table for joint action index `x`.
    #[inline]
    pub fn utility_row(&self, x: usize) -> &[f64] {
        &self.utility[x * self.joint_count..(x + 1) * self.joint_count]
    }

    /// Expected payoff of every row joint action against a column
    /// distribution over joint actions: `v(x) = Σ_y U(x, y) q(y)`.
    pub fn payoff_against(&self, col: &[f64]) -> Vec<f64> {
        debug_assert_eq!(col.len(), self.joint_count);
        let support: Vec<(usize, f64)> = col.iter().copied().enumerate().filter(|&(_, q)| q != 0.0).collect();
        let sparse = support.len() * 4 < self.joint_count;
        (0..self.joint_count)
            .map(|x| {
                let row = self.utility_row(x);
                if sparse {
                    support.iter().map(|&(y, q)| row[y] * q).sum()
                } else {
                    row.iter().zip(col).map(|(u, q)| u * q).sum()
                }
            })
            .collect()
    }

    /// Expected row payoff of every column joint action when the row team
    /// plays `row`: `w(y) = Σ_x p(x) U(x, y)`.
    pub fn payoff_for_columns(&self, row: &[f64]) -> Vec<f64> {
        debug_assert_eq!(row.len(), self.joint_count);
        let mut out = vec![0.0; self.joint_count];
        for (x, &p) in row.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (acc, u) in out.iter_mut().zip(self.utility_row(x)) {
                *acc += p * u;
            }
        }
        out
    }

    pub(crate) fn check_product(&self, policy: &ProductPolicy) -> Result<()> {
        if policy.team_size() != self.team_size {
            return Err(Error::Dimension {
                what: "agents in policy",
                expected: self.team_size,
                found: policy.team_size(),
            });
        }
        if policy.action_count() != self.action_count {
            return Err(Error::Dimension {
                what: "actions per agent",
                expected: self.action_count,
                found: policy.action_count(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_mixture(&self, mixture: &MixturePolicy) -> Result<()> {
        mixture.members().iter().try_for_each(|m| self.check_product(m))
    }
}

fn joint_count(team_size: usize, action_count: usize) -> Result<usize> {
    if team_size == 0 || action_count == 0 {
        return Err(Error::InvalidConfig(
            "team size and action count must be positive".into(),
        ));
    }
    let mut count: usize = 1;
    for _ in 0..team_size {
        count = count
            .checked_mul(action_count)
            .filter(|&c| c <= MAX_JOINT_ACTIONS)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "{action_count}^{team_size} joint actions exceeds {MAX_JOINT_ACTIONS}"
                ))
            })?;
    }
    Ok(count)
}

fn check_simplex(dist: &[f64], what: &str) -> Result<()> {
    if dist.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidDistribution(format!(
            "{what} has negative or non-finite entries: {dist:?}"
        )));
    }
    let total: f64 = dist.iter().sum();
    if abs(total - 1.0) > SIMPLEX_TOL {
        return Err(Error::InvalidDistribution(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

/// A factored team policy: one independent categorical distribution per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPolicy {
    dists: Vec<Vec<f64>>,
}

impl ProductPolicy {
    /// Validates and wraps per-agent distributions.
    pub fn new(dists: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = dists.first() else {
            return Err(Error::InvalidDistribution("policy has no agents".into()));
        };
        let actions = first.len();
        if actions == 0 {
            return Err(Error::InvalidDistribution("agent has no actions".into()));
        }
        for (i, d) in dists.iter().enumerate() {
            if d.len() != actions {
                return Err(Error::Dimension {
                    what: "actions per agent",
                    expected: actions,
                    found: d.len(),
                });
            }
            check_simplex(d, &format!("agent {i}"))?;
        }
        Ok(ProductPolicy { dists })
    }

    /// Skips validation; callers guarantee the simplex invariant.
    pub(crate) fn from_raw(dists: Vec<Vec<f64>>) -> Self {
        ProductPolicy { dists }
    }

    /// Every agent uniform over its actions.
    pub fn uniform(team_size: usize, action_count: usize) -> Self {
        let p = 1.0 / action_count as f64;
        ProductPolicy {
            dists: vec![vec![p; action_count]; team_size],
        }
    }

    /// The point mass on a joint action.
    pub fn deterministic(joint: &JointAction, action_count: usize) -> Self {
        let dists = joint
            .actions()
            .iter()
            .map(|&a| {
                let mut d = vec![0.0; action_count];
                d[a] = 1.0;
                d
            })
            .collect();
        ProductPolicy { dists }
    }

    /// Agents in the team.
    pub fn team_size(&self) -> usize {
        self.dists.len()
    }

    /// Actions per agent.
    pub fn action_count(&self) -> usize {
        self.dists[0].len()
    }

    /// Distribution of agent `i`.
    pub fn dist(&self, i: usize) -> &[f64] {
        &self.dists[i]
    }

    /// All per-agent distributions.
    pub fn dists(&self) -> &[Vec<f64>] {
        &self.dists
    }

    /// Probability of a joint action.
    pub fn prob(&self, joint: &[usize]) -> f64 {
        joint.iter().zip(&self.dists).map(|(&a, d)| d[a]).product()
    }

    /// Probability of every flattened joint action.
    pub fn joint_distribution(&self) -> Vec<f64> {
        let mut out = vec![1.0];
        for d in &self.dists {
            let mut next = Vec::with_capacity(out.len() * d.len());
            for &p in &out {
                next.extend(d.iter().map(|&q| p * q));
            }
            out = next;
        }
        out
    }

    /// Largest per-agent L∞ distance to another policy of the same shape.
    pub fn max_abs_diff(&self, other: &ProductPolicy) -> f64 {
        self.dists
            .iter()
            .zip(&other.dists)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| abs(x - y)))
            .fold(0.0, f64::max)
    }
}

/// A weighted population of product policies (a meta-policy applied to a
/// population).
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePolicy {
    members: Vec<ProductPolicy>,
    weights: Vec<f64>,
}

impl MixturePolicy {
    /// Validates and wraps members with their weights.
    pub fn new(members: Vec<ProductPolicy>, weights: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidDistribution("mixture has no members".into()));
        }
        if members.len() != weights.len() {
            return Err(Error::Dimension {
                what: "mixture weights",
                expected: members.len(),
                found: weights.len(),
            });
        }
        check_simplex(&weights, "mixture weights")?;
        let (n, a) = (members[0].team_size(), members[0].action_count());
        for m in &members {
            if m.team_size() != n || m.action_count() != a {
                return Err(Error::Dimension {
                    what: "mixture member shape",
                    expected: n * a,
                    found: m.team_size() * m.action_count(),
                });
            }
        }
        Ok(MixturePolicy { members, weights })
    }

    pub(crate) fn from_raw(members: Vec<ProductPolicy>, weights: Vec<f64>) -> Self {
        MixturePolicy { members, weights }
    }

    /// A single policy with weight one.
    pub fn pure(policy: ProductPolicy) -> Self {
        MixturePolicy {
            members: vec![policy],
            weights: vec![1.0],
        }
    }

    /// Equal weight on every member.
    pub fn uniform(members: Vec<ProductPolicy>) -> Result<Self> {
        let w = 1.0 / members.len().max(1) as f64;
        let weights = vec![w; members.len()];
        Self::new(members, weights)
    }

    /// Member policies.
    pub fn members(&self) -> &[ProductPolicy] {
        &self.members
    }

    /// Member weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Agents per team.
    pub fn team_size(&self) -> usize {
        self.members[0].team_size()
    }

    /// Actions per agent.
    pub fn action_count(&self) -> usize {
        self.members[0].action_count()
    }

    /// Probability of every flattened joint action under the mixture.
    pub fn joint_distribution(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for (m, &w) in self.members.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            let d = m.joint_distribution();
            if out.is_empty() {
                out = vec![0.0; d.len()];
            }
            for (acc, p) in out.iter_mut().zip(d) {
                *acc += w * p;
            }
        }
        out
    }

    /// Per-agent marginal action distributions of the mixture.
    pub fn marginals(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.action_count()]; self.team_size()];
        for (m, &w) in self.members.iter().zip(&self.weights) {
            for (acc, d) in out.iter_mut().zip(m.dists()) {
                for (a, p) in acc.iter_mut().zip(d) {
                    *a += w * p;
                }
            }
        }
        out
    }
}

impl From<ProductPolicy> for MixturePolicy {
    fn from(policy: ProductPolicy) -> Self {
        MixturePolicy::pure(policy)
    }
}

/// Exact expected payoff of the row team.
pub fn expected_utility(game: &TeamGame, row: &MixturePolicy, col: &MixturePolicy) -> Result<f64> {
    game.check_mixture(row)?;
    game.check_mixture(col)?;
    Ok(dist_utility(game, &row.joint_distribution(), &col.joint_distribution()))
}

/// `pᵀ U q` for joint-action distributions.
pub fn dist_utility(game: &TeamGame, row: &[f64], col: &[f64]) -> f64 {
    let v = game.payoff_against(col);
    row.iter().zip(&v).map(|(p, u)| p * u).sum()
}

/// Best joint pure strategy against a joint-action distribution, with its
/// value. Ties go to the lowest lexicographic joint action.
pub fn best_response_to_dist(game: &TeamGame, opponent: &[f64]) -> (usize, f64) {
    let v = game.payoff_against(opponent);
    let best = crate::math::argmax(&v);
    (best, v[best])
}

/// Team best response against an opponent mixture by full enumeration.
pub fn team_best_response(game: &TeamGame, opponent: &MixturePolicy) -> Result<(JointAction, f64)> {
    game.check_mixture(opponent)?;
    let (best, value) = best_response_to_dist(game, &opponent.joint_distribution());
    Ok((
        JointAction::from_index(best, game.team_size(), game.action_count()),
        value,
    ))
}

/// Team exploitability of a joint-action distribution profile: what the
/// column team's best response gains against `row` plus what the row team's
/// best response gains against `col`.
pub fn dist_exploitability(game: &TeamGame, row: &[f64], col: &[f64]) -> f64 {
    let against_col = game.payoff_against(col).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let against_row = game.payoff_for_columns(row).into_iter().fold(f64::INFINITY, f64::min);
    against_col - against_row
}

/// Team exploitability of the profile `(row, col)`; zero exactly at a global
/// Nash equilibrium.
pub fn team_exploitability(game: &TeamGame, row: &MixturePolicy, col: &MixturePolicy) -> Result<f64> {
    game.check_mixture(row)?;
    game.check_mixture(col)?;
    Ok(dist_exploitability(
        game,
        &row.joint_distribution(),
        &col.joint_distribution(),
    ))
}

/// Exploitability of the symmetric profile in which both teams play `policy`.
pub fn symmetric_exploitability(game: &TeamGame, policy: &MixturePolicy) -> Result<f64> {
    team_exploitability(game, policy, policy)
}

/// Exact outcome probabilities from the row team's point of view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    /// `P(U > 0)`.
    pub win: f64,
    /// `P(U = 0)`.
    pub draw: f64,
    /// `P(U < 0)`.
    pub lose: f64,
}

impl Outcome {
    /// Win probability plus half the draw probability.
    pub fn score(&self) -> f64 {
        self.win + 0.5 * self.draw
    }
}

/// Outcome distribution for joint-action distributions.
pub fn dist_win_probability(game: &TeamGame, row: &[f64], col: &[f64]) -> Outcome {
    let (mut win, mut lose) = (0.0, 0.0);
    for (x, &p) in row.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let u = game.utility_row(x);
        let (mut w, mut l) = (0.0, 0.0);
        for (&q, &v) in col.iter().zip(u) {
            if v > 0.0 {
                w += q;
            } else if v < 0.0 {
                l += q;
            }
        }
        win += p * w;
        lose += p * l;
    }
    let draw = (1.0 - win - lose).max(0.0);
    Outcome { win, draw, lose }
}

/// Exact win/draw/lose probabilities; a win is a strictly positive payoff.
pub fn win_probability(game: &TeamGame, row: &MixturePolicy, col: &MixturePolicy) -> Result<Outcome> {
    game.check_mixture(row)?;
    game.check_mixture(col)?;
    Ok(dist_win_probability(
        game,
        &row.joint_distribution(),
        &col.joint_distribution(),
    ))
}
