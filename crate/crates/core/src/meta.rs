//! Population payoff tables and meta-solvers.

use alloc::vec;
use alloc::vec::Vec;

use crate::game::dist_win_probability;
use crate::lp::solve_zero_sum;
use crate::{Error, ProductPolicy, Result, TeamGame};

/// Weights over a population; non-negative and summing to one.
pub type MetaPolicy = Vec<f64>;

/// Default certificate tolerance of the Nash meta-solver.
pub const NASH_TOL: f64 = 1e-6;

/// Exact payoff table between a row population and a column population.
///
/// Column payoff vectors are cached so every entry is computed the same way,
/// which keeps incremental growth bit-identical to a full rebuild.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffTable {
    matrix: Vec<Vec<f64>>,
    row_dists: Vec<Vec<f64>>,
    col_payoffs: Vec<Vec<f64>>,
}

impl PayoffTable {
    /// An empty table.
    pub fn new() -> Self {
        PayoffTable {
            matrix: Vec::new(),
            row_dists: Vec::new(),
            col_payoffs: Vec::new(),
        }
    }

    /// Row team's expected payoffs, `matrix()[i][j] = U(row_i, col_j)`.
    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// Number of row policies.
    pub fn rows(&self) -> usize {
        self.row_dists.len()
    }

    /// Number of column policies.
    pub fn cols(&self) -> usize {
        self.col_payoffs.len()
    }

    /// Appends any policies of `row_pop` / `col_pop` beyond those already in
    /// the table; existing entries are left untouched. Both populations must
    /// extend the ones the table was built from.
    pub fn extend(&mut self, game: &TeamGame, row_pop: &[ProductPolicy], col_pop: &[ProductPolicy]) -> Result<()> {
        if row_pop.len() < self.rows() || col_pop.len() < self.cols() {
            return Err(Error::Dimension {
                what: "population shrank under payoff table",
                expected: self.rows().max(self.cols()),
                found: row_pop.len().min(col_pop.len()),
            });
        }
        for p in row_pop.iter().chain(col_pop) {
            game.check_product(p)?;
        }
        for q in &col_pop[self.cols()..] {
            let v = game.payoff_against(&q.joint_distribution());
            for (row, p) in self.matrix.iter_mut().zip(&self.row_dists) {
                row.push(dot(p, &v));
            }
            self.col_payoffs.push(v);
        }
        for p in &row_pop[self.rows()..] {
            let d = p.joint_distribution();
            let row = self.col_payoffs.iter().map(|v| dot(&d, v)).collect();
            self.matrix.push(row);
            self.row_dists.push(d);
        }
        Ok(())
    }
}

impl Default for PayoffTable {
    fn default() -> Self {
        Self::new()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Full payoff table between two populations.
pub fn fill_payoffs(game: &TeamGame, row_pop: &[ProductPolicy], col_pop: &[ProductPolicy]) -> Result<PayoffTable> {
    if row_pop.is_empty() || col_pop.is_empty() {
        return Err(Error::InvalidConfig("payoff table needs non-empty populations".into()));
    }
    let mut table = PayoffTable::new();
    table.extend(game, row_pop, col_pop)?;
    Ok(table)
}

/// Equal weight on each of `size` policies.
pub fn solve_uniform(size: usize) -> MetaPolicy {
    vec![1.0 / size as f64; size]
}

/// Equilibrium of a restricted zero-sum game.
#[derive(Debug, Clone, PartialEq)]
pub struct NashSolution {
    /// Row (maximizer) strategy.
    pub row: MetaPolicy,
    /// Column (minimizer) strategy.
    pub col: MetaPolicy,
    /// Row player's expected payoff under `(row, col)`.
    pub value: f64,
    /// Best row deviation gain plus best column deviation gain.
    pub certificate: f64,
}

/// Sum of the best pure deviation gains of both players in a matrix game.
pub fn restricted_exploitability(matrix: &[Vec<f64>], row: &[f64], col: &[f64]) -> f64 {
    let row_best = matrix.iter().map(|r| dot(r, col)).fold(f64::NEG_INFINITY, f64::max);
    let col_worst = (0..col.len())
        .map(|j| matrix.iter().zip(row).map(|(r, p)| r[j] * p).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    row_best - col_worst
}

/// Solves a zero-sum matrix game and certifies the result: the returned
/// strategies have restricted exploitability at most `tol`.
pub fn solve_nash_zero_sum(matrix: &[Vec<f64>], tol: f64) -> Result<NashSolution> {
    if matrix.is_empty() || matrix[0].is_empty() {
        return Err(Error::InvalidConfig("empty payoff matrix".into()));
    }
    let cols = matrix[0].len();
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidConfig("ragged payoff matrix".into()));
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("non-finite payoff entry".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("nash tolerance must be positive".into()));
    }
    let sol = solve_zero_sum(matrix);
    let certificate = restricted_exploitability(matrix, &sol.row, &sol.col);
    if certificate > tol {
        return Err(Error::NashNotConverged {
            certificate,
            row: sol.row,
            col: sol.col,
        });
    }
    let value = matrix.iter().zip(&sol.row).map(|(r, p)| p * dot(r, &sol.col)).sum();
    Ok(NashSolution {
        row: sol.row,
        col: sol.col,
        value,
        certificate,
    })
}

fn normalize_scores(scores: Vec<f64>) -> MetaPolicy {
    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        scores.into_iter().map(|s| s / total).collect()
    } else {
        solve_uniform(scores.len())
    }
}

/// Opponent weights for a main policy: each opponent's probability of
/// beating `current`, normalized (uniform if every score is zero).
pub fn prioritized_scores_main(game: &TeamGame, current: &ProductPolicy, pop: &[ProductPolicy]) -> Result<MetaPolicy> {
    scores(game, current, pop, |win, _| win)
}

/// Opponent weights for a counter policy: `P(opp wins) · P(current wins)`,
/// normalized (uniform if every score is zero).
pub fn prioritized_scores_counter(
    game: &TeamGame,
    current: &ProductPolicy,
    pop: &[ProductPolicy],
) -> Result<MetaPolicy> {
    scores(game, current, pop, |win, lose| win * lose)
}

fn scores(
    game: &TeamGame,
    current: &ProductPolicy,
    pop: &[ProductPolicy],
    score: impl Fn(f64, f64) -> f64,
) -> Result<MetaPolicy> {
    if pop.is_empty() {
        return Err(Error::InvalidConfig("prioritized sampling needs a population".into()));
    }
    game.check_product(current)?;
    let cur = current.joint_distribution();
    let raw = pop
        .iter()
        .map(|p| {
            game.check_product(p)?;
            let o = dist_win_probability(game, &p.joint_distribution(), &cur);
            Ok(score(o.win, o.lose))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(normalize_scores(raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::JointAction;
    use crate::games::make_team_rps;

    fn rps() -> Vec<Vec<f64>> {
        vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]]
    }

    fn moves() -> Vec<ProductPolicy> {
        // Rock, Paper, Scissors under the team encoding.
        [[0, 0], [0, 1], [1, 1]]
            .iter()
            .map(|a| ProductPolicy::deterministic(&JointAction::new(a.to_vec()), 2))
            .collect()
    }

    #[test]
    fn rps_table_from_team_game() {
        let g = make_team_rps();
        let t = fill_payoffs(&g, &moves(), &moves()).unwrap();
        assert_eq!(t.matrix(), rps().as_slice());
        let u = ProductPolicy::uniform(2, 2);
        let single = fill_payoffs(&g, core::slice::from_ref(&u), core::slice::from_ref(&u)).unwrap();
        assert_eq!(single.matrix(), &[vec![0.0]]);
    }

    #[test]
    fn incremental_growth_matches_full_rebuild() {
        let g = make_team_rps();
        let mut pop = moves();
        pop.insert(1, ProductPolicy::new(vec![vec![0.3, 0.7], vec![0.9, 0.1]]).unwrap());
        let mut t = fill_payoffs(&g, &pop[..2], &pop[..3]).unwrap();
        let before = t.clone();
        t.extend(&g, &pop[..3], &pop[..3]).unwrap();
        assert_eq!(&t.matrix()[0][..3], &before.matrix()[0][..3]);
        assert_eq!(t.matrix().len(), 3);
        t.extend(&g, &pop, &pop).unwrap();
        assert_eq!(t, fill_payoffs(&g, &pop, &pop).unwrap());
    }

    #[test]
    fn nash_examples() {
        let s = solve_nash_zero_sum(&rps(), NASH_TOL).unwrap();
        for w in s.row.iter().chain(&s.col) {
            assert!((w - 1.0 / 3.0).abs() < 1e-9);
        }
        let pennies = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let s = solve_nash_zero_sum(&pennies, NASH_TOL).unwrap();
        assert!((s.row[0] - 0.5).abs() < 1e-9 && (s.col[0] - 0.5).abs() < 1e-9);
        assert!(s.value.abs() < 1e-9);
        let dominant = vec![vec![1.0, 2.0, 0.5], vec![3.0, 4.0, 2.0], vec![0.0, 1.0, 1.0]];
        let s = solve_nash_zero_sum(&dominant, NASH_TOL).unwrap();
        assert!((s.row[1] - 1.0).abs() < 1e-12);
        assert!((s.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn nash_handles_degenerate_tables() {
        let zeros = vec![vec![0.0; 4]; 4];
        assert!(solve_nash_zero_sum(&zeros, NASH_TOL).is_ok());
        let dup = vec![vec![1.0, -1.0, 1.0], vec![1.0, -1.0, 1.0], vec![-1.0, 1.0, -1.0]];
        assert!(solve_nash_zero_sum(&dup, NASH_TOL).unwrap().certificate <= NASH_TOL);
        assert!(solve_nash_zero_sum(&[], NASH_TOL).is_err());
    }

    #[test]
    fn prioritized_examples() {
        let g = make_team_rps();
        let m = moves();
        let (rock, paper, scissors) = (&m[0], &m[1], &m[2]);
        let w = prioritized_scores_main(&g, rock, core::slice::from_ref(scissors)).unwrap();
        assert_eq!(w, vec![1.0]);
        let w = prioritized_scores_main(&g, rock, &[rock.clone(), paper.clone()]).unwrap();
        assert_eq!(w, vec![0.0, 1.0]);
        let w = prioritized_scores_main(&g, paper, &[scissors.clone(), scissors.clone()]).unwrap();
        assert_eq!(w, vec![0.5, 0.5]);
        // Draws and one-sided wins both score zero, so this falls back to uniform.
        let w = prioritized_scores_counter(&g, rock, &[rock.clone(), paper.clone()]).unwrap();
        assert_eq!(w, vec![0.5, 0.5]);
        let w = prioritized_scores_counter(&g, rock, &[rock.clone(), ProductPolicy::uniform(2, 2)]).unwrap();
        assert_eq!(w, vec![0.0, 1.0]);
    }

    #[test]
    fn counter_score_of_uniform_moves_is_one_ninth() {
        use crate::game::win_probability;
        use crate::MixturePolicy;
        let g = make_team_rps();
        let mix = MixturePolicy::uniform(moves()).unwrap();
        let o = win_probability(&g, &mix, &mix).unwrap();
        assert!((o.win * o.lose - 1.0 / 9.0).abs() < 1e-15);
    }
}
