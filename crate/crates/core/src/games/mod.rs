//! Constructors for the concrete games: team rock-paper-scissors, the
//! two-action motivating game with a hidden global optimum, and
//! seek-attack-defend.

mod motivating;
mod rps;
mod sad;

pub use motivating::{make_motivating, motivating_delta_q, MotivatingParams};
pub use rps::{make_team_rps, team_move, team_move_distribution, TeamMove};
pub use sad::{
    make_sad, sad_exploitability, sad_exploitability_dist, sad_reference_policies, sad_team_reward, SadAction,
    SadParams, SadReferences,
};
