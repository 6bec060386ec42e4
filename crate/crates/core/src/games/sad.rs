use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::game::JointAction;
use crate::{Error, MixturePolicy, ProductPolicy, Result, TeamGame};

/// Parameters of the seek-attack-defend game.
#[derive(Debug, Clone, PartialEq)]
pub struct SadParams {
    /// Agents per team.
    pub n: usize,
    /// Highest seeking action; seeking actions are `0..=max_seek`.
    pub max_seek: usize,
    /// Reward `R_x` for seeking action `x`; `R_0 = 0` and strictly increasing.
    pub rewards: Vec<f64>,
}

impl SadParams {
    /// `R_x = x` rewards.
    pub fn linear(n: usize, max_seek: usize) -> Self {
        SadParams {
            n,
            max_seek,
            rewards: (0..=max_seek).map(|x| x as f64).collect(),
        }
    }

    /// Per-agent action count: the seeking actions plus attack and defend.
    pub fn action_count(&self) -> usize {
        self.max_seek + 3
    }

    /// Index of the attack action.
    pub fn attack(&self) -> usize {
        self.max_seek + 1
    }

    /// Index of the defend action.
    pub fn defend(&self) -> usize {
        self.max_seek + 2
    }

    /// Decodes an action index.
    pub fn decode(&self, action: usize) -> SadAction {
        if action <= self.max_seek {
            SadAction::Seek(action)
        } else if action == self.attack() {
            SadAction::Attack
        } else {
            SadAction::Defend
        }
    }

    /// Checks the reward table.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("SAD needs at least one agent".into()));
        }
        if self.rewards.len() != self.max_seek + 1 {
            return Err(Error::Dimension {
                what: "SAD rewards",
                expected: self.max_seek + 1,
                found: self.rewards.len(),
            });
        }
        if self.rewards[0] != 0.0 {
            return Err(Error::InvalidConfig("SAD needs R_0 = 0".into()));
        }
        if self.rewards.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig(format!(
                "SAD rewards must strictly increase: {:?}",
                self.rewards
            )));
        }
        Ok(())
    }
}

impl Default for SadParams {
    fn default() -> Self {
        SadParams::linear(4, 4)
    }
}

/// A decoded SAD action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SadAction {
    /// Seek at the given level.
    Seek(usize),
    /// Attack the other team's reward.
    Attack,
    /// Guard the own team's reward.
    Defend,
}

/// Reward a team keeps after the opponent's attacks are resolved.
pub fn sad_team_reward(p: &SadParams, team: &[usize], opponent: &[usize]) -> f64 {
    let seeks = || team.iter().copied().filter(|&a| a <= p.max_seek);
    let (lo, hi) = seeks().fold((usize::MAX, 0), |(lo, hi), a| (lo.min(a), hi.max(a)));
    let seeking = if lo == usize::MAX {
        0.0
    } else {
        // Everyone within one level of each other sets the level to the
        // minimum; any wider spread drops it to 0.
        let level = if hi - lo > 1 { 0 } else { lo };
        seeks()
            .filter(|&a| a >= level && a <= level + 1)
            .map(|a| p.rewards[a])
            .sum()
    };
    let defended = team.contains(&p.defend());
    let attackers = opponent.iter().filter(|&&a| a == p.attack()).count();
    if !defended && attackers >= 2 {
        0.0
    } else {
        seeking
    }
}

/// Builds the SAD game: utility is the row team's reward minus the column's.
pub fn make_sad(p: &SadParams) -> Result<TeamGame> {
    p.validate()?;
    TeamGame::from_fn(p.n, p.action_count(), |x, y| {
        sad_team_reward(p, x, y) - sad_team_reward(p, y, x)
    })
}

/// The three deterministic supports of the SAD equilibrium and the
/// equilibrium mixture over them.
#[derive(Debug, Clone, PartialEq)]
pub struct SadReferences {
    /// Everyone seeks the top level.
    pub seek: ProductPolicy,
    /// Two attackers, the rest seek the top level.
    pub attack: ProductPolicy,
    /// One defender, the rest seek the top level.
    pub defend: ProductPolicy,
    /// `(seek + attack + 2·defend) / 4`.
    pub sigma_star: MixturePolicy,
}

impl SadReferences {
    /// The three reference policies in `[seek, attack, defend]` order.
    pub fn all(&self) -> [&ProductPolicy; 3] {
        [&self.seek, &self.attack, &self.defend]
    }
}

/// Reference policies used to score SAD exploitability. Needs `n >= 3`.
pub fn sad_reference_policies(p: &SadParams) -> Result<SadReferences> {
    p.validate()?;
    if p.n < 3 {
        return Err(Error::InvalidConfig(
            "SAD reference policies need at least 3 agents".into(),
        ));
    }
    let a = p.action_count();
    let top = p.max_seek;
    let mut attack = vec![top; p.n];
    attack[0] = p.attack();
    attack[1] = p.attack();
    let mut defend = vec![top; p.n];
    defend[0] = p.defend();
    let seek = ProductPolicy::deterministic(&JointAction::repeat(top, p.n), a);
    let attack = ProductPolicy::deterministic(&JointAction::new(attack), a);
    let defend = ProductPolicy::deterministic(&JointAction::new(defend), a);
    let sigma_star = MixturePolicy::from_raw(
        vec![seek.clone(), attack.clone(), defend.clone()],
        vec![0.25, 0.25, 0.5],
    );
    Ok(SadReferences {
        seek,
        attack,
        defend,
        sigma_star,
    })
}

/// `Σ_μ max(0, U(μ, π))` over the three references, for a joint-action
/// distribution `pi` of the evaluated team.
pub fn sad_exploitability_dist(game: &TeamGame, refs: &SadReferences, pi: &[f64]) -> f64 {
    refs.all()
        .iter()
        .map(|r| {
            let x = joint_of(r);
            let gain: f64 = game
                .utility_row(x.index(game.action_count()))
                .iter()
                .zip(pi)
                .map(|(u, q)| u * q)
                .sum();
            gain.max(0.0)
        })
        .sum()
}

/// How much the reference policies gain against `pi` in total.
pub fn sad_exploitability(game: &TeamGame, refs: &SadReferences, pi: &MixturePolicy) -> Result<f64> {
    game.check_mixture(pi)?;
    Ok(sad_exploitability_dist(game, refs, &pi.joint_distribution()))
}

fn joint_of(policy: &ProductPolicy) -> JointAction {
    JointAction::new(
        policy
            .dists()
            .iter()
            .map(|d| d.iter().position(|&q| q == 1.0).unwrap_or(0))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{expected_utility, symmetric_exploitability};

    #[test]
    fn head_to_head_table() {
        let p = SadParams::default();
        let g = make_sad(&p).unwrap();
        let r = sad_reference_policies(&p).unwrap();
        let u =
            |a: &ProductPolicy, b: &ProductPolicy| expected_utility(&g, &a.clone().into(), &b.clone().into()).unwrap();
        assert_eq!(u(&r.seek, &r.attack), -8.0);
        assert_eq!(u(&r.defend, &r.attack), 4.0);
        assert_eq!(u(&r.seek, &r.defend), 4.0);
        assert_eq!(u(&r.seek, &r.seek), 0.0);
    }

    #[test]
    fn sigma_star_is_balanced() {
        let p = SadParams::default();
        let g = make_sad(&p).unwrap();
        let r = sad_reference_policies(&p).unwrap();
        for m in r.all() {
            let v = expected_utility(&g, &m.clone().into(), &r.sigma_star).unwrap();
            assert!(v.abs() < 1e-12);
        }
        assert!(sad_exploitability(&g, &r, &r.sigma_star).unwrap().abs() < 1e-12);
        assert_eq!(sad_exploitability(&g, &r, &r.seek.clone().into()).unwrap(), 8.0);
        assert_eq!(sad_exploitability(&g, &r, &r.defend.clone().into()).unwrap(), 4.0);
        assert!(symmetric_exploitability(&g, &r.sigma_star).unwrap().abs() < 1e-9);
    }

    #[test]
    fn reward_level_rules() {
        let p = SadParams::default();
        // Levels 2 and 3 together: level 2, all count.
        assert_eq!(sad_team_reward(&p, &[2, 3, 3, 2], &[0, 0, 0, 0]), 10.0);
        // Spread of two levels: level 0, only actions 0 and 1 count.
        assert_eq!(sad_team_reward(&p, &[1, 3, 1, 0], &[0, 0, 0, 0]), 2.0);
        // No seekers at all.
        assert_eq!(sad_team_reward(&p, &[5, 6, 5, 6], &[0, 0, 0, 0]), 0.0);
        // Attack and defend agents don't count toward the spread.
        assert_eq!(sad_team_reward(&p, &[4, 5, 6, 4], &[5, 5, 0, 0]), 8.0);
    }

    #[test]
    fn bad_params() {
        let mut p = SadParams::default();
        p.rewards[0] = 1.0;
        assert!(make_sad(&p).is_err());
        let mut p = SadParams::default();
        p.rewards[2] = 1.0;
        assert!(make_sad(&p).is_err());
        assert!(sad_reference_policies(&SadParams::linear(2, 2)).is_err());
    }
}
