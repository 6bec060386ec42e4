//! Bradley–Terry ratings on the Elo scale.
//!
//! Ratings are fitted by maximum likelihood to a full matrix of pairwise
//! scores, where a score is `p_win + p_draw / 2`. The expected score of a
//! rating gap `d` is `1 / (1 + 10^(-d/400))`, and ratings are shifted so
//! their mean is 1500.

use anyhow::{bail, Result};
use serde::Serialize;

/// Mean rating of every fitted table.
pub const MEAN_RATING: f64 = 1500.0;

// Pseudo-count mixed into every score so that a policy that never scores
// still gets a finite rating.
const PRIOR: f64 = 1e-9;
const MAX_ITERS: usize = 200_000;
const REL_TOL: f64 = 1e-14;

/// Fitted ratings with the measured and model-implied pairwise scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EloTable {
    pub names: Vec<String>,
    pub ratings: Vec<f64>,
    /// `expected[i][j]`: model score of `i` against `j`.
    pub expected: Vec<Vec<f64>>,
    /// `measured[i][j]`: input score of `i` against `j`.
    pub measured: Vec<Vec<f64>>,
}

impl EloTable {
    /// Largest off-diagonal gap between model and measured scores.
    pub fn max_residual(&self) -> f64 {
        let n = self.ratings.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max((self.expected[i][j] - self.measured[i][j]).abs());
                }
            }
        }
        worst
    }
}

/// Expected score of a player rated `gap` points above its opponent.
pub fn expected_score(gap: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(-gap / 400.0))
}

/// Fits ratings to `scores`, where `scores[i][j]` is the score of `i`
/// against `j` and `scores[i][j] + scores[j][i] = 1`. Diagonal entries are
/// ignored.
pub fn fit_elo(names: Vec<String>, scores: &[Vec<f64>]) -> Result<EloTable> {
    let n = scores.len();
    if n < 2 {
        bail!("a tournament needs at least two policies, got {n}");
    }
    if names.len() != n {
        bail!("{} names for {n} policies", names.len());
    }
    for (i, row) in scores.iter().enumerate() {
        if row.len() != n {
            bail!("score row {i} has {} entries, expected {n}", row.len());
        }
        for (j, &s) in row.iter().enumerate() {
            if i == j {
                continue;
            }
            if !(0.0..=1.0).contains(&s) {
                bail!("score of {i} against {j} is {s}, outside [0, 1]");
            }
            if (s + scores[j][i] - 1.0).abs() > 1e-9 {
                bail!("scores of {i} and {j} against each other do not sum to one");
            }
        }
    }

    // Minorization-maximization on strengths gamma_i = 10^(r_i / 400).
    let smoothed = |s: f64| (s + PRIOR) / (1.0 + 2.0 * PRIOR);
    let wins: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| smoothed(scores[i][j])).sum())
        .collect();
    let mut gamma = vec![1.0f64; n];
    for _ in 0..MAX_ITERS {
        let mut next: Vec<f64> = (0..n)
            .map(|i| {
                let denom: f64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (gamma[i] + gamma[j])).sum();
                wins[i] / denom
            })
            .collect();
        let log_mean = next.iter().map(|g| g.ln()).sum::<f64>() / n as f64;
        next.iter_mut().for_each(|g| *g /= log_mean.exp());
        let change = next
            .iter()
            .zip(&gamma)
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max);
        gamma = next;
        if change < REL_TOL {
            break;
        }
    }

    let scale = 400.0 / std::f64::consts::LN_10;
    let raw: Vec<f64> = gamma.iter().map(|g| scale * g.ln()).collect();
    let mean = raw.iter().sum::<f64>() / n as f64;
    let ratings: Vec<f64> = raw.iter().map(|r| r - mean + MEAN_RATING).collect();
    if ratings.iter().any(|r| !r.is_finite()) {
        bail!("rating fit diverged");
    }
    let expected = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.5
                    } else {
                        expected_score(ratings[i] - ratings[j])
                    }
                })
                .collect()
        })
        .collect();
    let measured = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.5 } else { scores[i][j] }).collect())
        .collect();
    Ok(EloTable {
        names,
        ratings,
        expected,
        measured,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn all_draws_give_the_mean() {
        let t = fit_elo(names(4), &vec![vec![0.5; 4]; 4]).unwrap();
        assert!(t.ratings.iter().all(|&r| r == MEAN_RATING));
    }

    #[test]
    fn consistent_scores_are_reproduced() {
        let truth = [1400.0, 1550.0, 1500.0, 1550.0];
        let scores: Vec<Vec<f64>> = truth
            .iter()
            .map(|a| truth.iter().map(|b| expected_score(a - b)).collect())
            .collect();
        let t = fit_elo(names(4), &scores).unwrap();
        assert!(t.max_residual() < 1e-9);
        for (r, want) in t.ratings.iter().zip(truth) {
            assert!((r - want).abs() < 1e-6);
        }
    }

    #[test]
    fn shutouts_stay_finite() {
        let t = fit_elo(names(2), &[vec![0.5, 1.0], vec![0.0, 0.5]]).unwrap();
        assert!(t.ratings[0] > t.ratings[1]);
        assert!(t.ratings.iter().all(|r| r.is_finite()));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(fit_elo(names(1), &[vec![0.5]]).is_err());
        assert!(fit_elo(names(2), &[vec![0.5, 0.7], vec![0.7, 0.5]]).is_err());
    }
}
