use alloc::format;

use crate::{Error, ProductPolicy, Result, TeamGame};

/// Parameters of the two-action motivating game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotivatingParams {
    /// Agents per team.
    pub n: usize,
    /// Bonus the all-zero team earns against the all-one team.
    pub c: f64,
    /// Per-agent leak earned by the all-zero team against other teams.
    pub eps: f64,
}

impl MotivatingParams {
    /// Checks `0 < eps < c < n`.
    pub fn validate(&self) -> Result<()> {
        let n = self.n as f64;
        if self.n >= 1 && 0.0 < self.eps && self.eps < self.c && self.c < n {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "motivating game needs 0 < eps < C < N, got N={}, C={}, eps={}",
                self.n, self.c, self.eps
            )))
        }
    }
}

impl Default for MotivatingParams {
    fn default() -> Self {
        MotivatingParams { n: 3, c: 1.5, eps: 0.1 }
    }
}

/// Builds the motivating game. `(0_N, 0_N)` is the unique global equilibrium
/// and `(1_N, 1_N)` a local one.
pub fn make_motivating(p: MotivatingParams) -> Result<TeamGame> {
    p.validate()?;
    let all = |x: &[usize], v: usize| x.iter().all(|&a| a == v);
    let ones = |x: &[usize]| x.iter().sum::<usize>() as f64;
    // Payoff for the cases stated directly; the rest follow by antisymmetry.
    let direct = move |x: &[usize], y: &[usize]| -> f64 {
        if all(x, 0) {
            if all(y, 1) {
                p.c
            } else {
                p.eps * ones(y)
            }
        } else {
            ones(x) - ones(y)
        }
    };
    TeamGame::from_fn(p.n, 2, |x, y| {
        if !all(x, 0) && all(y, 0) {
            -direct(y, x)
        } else {
            direct(x, y)
        }
    })
}

/// Closed-form `Q_i(0) - Q_i(1)` for one agent of the motivating game, given
/// its teammates' distributions and a product opponent.
pub fn motivating_delta_q(p: MotivatingParams, teammates: &[alloc::vec::Vec<f64>], opponent: &ProductPolicy) -> f64 {
    let team_zero: f64 = teammates.iter().map(|d| d[0]).product();
    let team_one: f64 = teammates.iter().map(|d| d[1]).product();
    let opp_zero: f64 = opponent.dists().iter().map(|d| d[0]).product();
    let opp_one: f64 = opponent.dists().iter().map(|d| d[1]).product();
    let opp_ones: f64 = opponent.dists().iter().map(|d| d[1]).sum();
    let n = p.n as f64;
    opp_zero * (1.0 + p.eps)
        + team_zero * opp_ones * (1.0 + p.eps)
        + (team_zero * opp_one + team_one * opp_zero) * (p.c - n * p.eps)
        - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::JointAction;
    use alloc::vec;

    fn ja(a: &[usize]) -> JointAction {
        JointAction::new(a.to_vec())
    }

    #[test]
    fn stated_payoffs() {
        let g = make_motivating(MotivatingParams::default()).unwrap();
        assert_eq!(g.utility(&ja(&[0, 0, 0]), &ja(&[1, 1, 1])), 1.5);
        assert!((g.utility(&ja(&[0, 0, 0]), &ja(&[1, 1, 0])) - 0.2).abs() < 1e-15);
        assert_eq!(g.utility(&ja(&[1, 0, 0]), &ja(&[1, 1, 0])), -1.0);
        assert_eq!(g.utility(&ja(&[1, 1, 1]), &ja(&[0, 0, 0])), -1.5);
        assert!(g.is_symmetric());
    }

    #[test]
    fn closed_form_delta_q_examples() {
        let p = MotivatingParams::default();
        let ones = ProductPolicy::deterministic(&JointAction::repeat(1, 3), 2);
        let dq = motivating_delta_q(p, &[vec![1.0, 0.0], vec![1.0, 0.0]], &ones);
        assert!((dq - 3.5).abs() < 1e-12);
        let dq = motivating_delta_q(p, &[vec![0.0, 1.0], vec![0.0, 1.0]], &ones);
        assert!((dq + 1.0).abs() < 1e-12);
        // Indifference at pi_{-i}(0) = 1/(N+C).
        let q = libm::sqrt(1.0 / 4.5);
        let dq = motivating_delta_q(p, &[vec![q, 1.0 - q], vec![q, 1.0 - q]], &ones);
        assert!(dq.abs() < 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        for (n, c, eps) in [(3, 1.5, 0.0), (3, 0.1, 0.2), (3, 3.0, 0.1), (0, 0.5, 0.1)] {
            assert!(make_motivating(MotivatingParams { n, c, eps }).is_err());
        }
    }
}
