use alloc::vec::Vec;

use crate::{MixturePolicy, TeamGame};

/// The move a two-agent team plays in team rock-paper-scissors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TeamMove {
    /// Both agents pick action 0.
    Rock,
    /// The agents disagree.
    Paper,
    /// Both agents pick action 1.
    Scissors,
}

impl TeamMove {
    /// Position in `[Rock, Paper, Scissors]`.
    pub fn index(self) -> usize {
        match self {
            TeamMove::Rock => 0,
            TeamMove::Paper => 1,
            TeamMove::Scissors => 2,
        }
    }

    fn beats(self, other: TeamMove) -> bool {
        matches!(
            (self, other),
            (TeamMove::Rock, TeamMove::Scissors)
                | (TeamMove::Scissors, TeamMove::Paper)
                | (TeamMove::Paper, TeamMove::Rock)
        )
    }
}

/// Maps a two-agent joint action to the team's move. Agreeing on 1 is the
/// Scissors consensus that forms the local equilibrium: a lone deviator turns
/// it into Paper, which Scissors beats.
pub fn team_move(joint: &[usize]) -> TeamMove {
    match (joint[0], joint[1]) {
        (0, 0) => TeamMove::Rock,
        (1, 1) => TeamMove::Scissors,
        _ => TeamMove::Paper,
    }
}

/// Two teams of two agents, two actions each, playing RPS with ±1 payoffs.
pub fn make_team_rps() -> TeamGame {
    TeamGame::from_fn(2, 2, |x, y| {
        let (a, b) = (team_move(x), team_move(y));
        if a.beats(b) {
            1.0
        } else if b.beats(a) {
            -1.0
        } else {
            0.0
        }
    })
    .expect("team RPS is a valid 2x2 team game")
}

/// Probability of Rock, Paper and Scissors under a team mixture.
pub fn team_move_distribution(policy: &MixturePolicy) -> [f64; 3] {
    let mut out = [0.0; 3];
    let joint = policy.joint_distribution();
    for (i, p) in joint.iter().enumerate() {
        let actions: Vec<usize> = alloc::vec![i / 2, i % 2];
        out[team_move(&actions).index()] += p;
    }
    out
}
