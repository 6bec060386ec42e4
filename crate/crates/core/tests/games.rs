use fxp_core::game::{expected_utility, symmetric_exploitability};
use fxp_core::games::{
    make_motivating, make_sad, make_team_rps, motivating_delta_q, sad_exploitability, sad_reference_policies,
    team_move, team_move_distribution, MotivatingParams, SadParams, TeamMove,
};
use fxp_core::learners::{compute_q, random_policy};
use fxp_core::{JointAction, MixturePolicy, ProductPolicy};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ja(a: &[usize]) -> JointAction {
    JointAction::new(a.to_vec())
}

fn det(actions: &[usize], action_count: usize) -> MixturePolicy {
    ProductPolicy::deterministic(&ja(actions), action_count).into()
}

#[test]
fn motivating_payoff_cases() {
    let g = make_motivating(MotivatingParams::default()).unwrap();
    assert!((g.utility(&ja(&[0, 0, 0]), &ja(&[1, 1, 0])) - 0.2).abs() < 1e-15);
    assert_eq!(g.utility(&ja(&[1, 0, 0]), &ja(&[1, 1, 0])), -1.0);
    assert_eq!(g.utility(&ja(&[1, 1, 1]), &ja(&[0, 0, 0])), -1.5);
    assert_eq!(g.utility(&ja(&[0, 0, 0]), &ja(&[1, 1, 1])), 1.5);
}

#[test]
fn motivating_rejects_bad_params() {
    for (n, c, eps) in [(3, 1.5, 0.0), (3, 0.1, 0.2), (3, 3.0, 0.1)] {
        assert!(make_motivating(MotivatingParams { n, c, eps }).is_err());
    }
}

#[test]
fn delta_q_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..1000 {
        let n = 2 + (trial % 4);
        let c = 0.2 + (rng.next_u32() % 100) as f64 / 100.0 * (n as f64 - 0.4);
        let eps = c * (0.01 + (rng.next_u32() % 98) as f64 / 100.0);
        let p = MotivatingParams { n, c, eps };
        let g = make_motivating(p).unwrap();
        let pi = random_policy(n, 2, &mut rng);
        let mu = random_policy(n, 2, &mut rng);
        let q = compute_q(&g, &pi, &mu.clone().into()).unwrap();
        for i in 0..n {
            let mates: Vec<Vec<f64>> = (0..n).filter(|&j| j != i).map(|j| pi.dist(j).to_vec()).collect();
            let closed = motivating_delta_q(p, &mates, &mu);
            let brute = q[i][0] - q[i][1];
            assert!(
                (closed - brute).abs() <= 1e-12,
                "trial {trial} agent {i}: {closed} vs {brute}"
            );
        }
    }
}

#[test]
fn delta_q_examples() {
    let p = MotivatingParams::default();
    let ones = ProductPolicy::deterministic(&ja(&[1, 1, 1]), 2);
    assert!((motivating_delta_q(p, &[vec![1.0, 0.0], vec![1.0, 0.0]], &ones) - 3.5).abs() < 1e-12);
    assert!((motivating_delta_q(p, &[vec![0.0, 1.0], vec![0.0, 1.0]], &ones) + 1.0).abs() < 1e-12);
    // Teammates with joint all-zero probability 1/(N+C) leave the agent indifferent.
    let z = (1.0f64 / 4.5).sqrt();
    let mates = [vec![z, 1.0 - z], vec![z, 1.0 - z]];
    assert!(motivating_delta_q(p, &mates, &ones).abs() < 1e-12);
}

#[test]
fn team_rps_moves() {
    assert_eq!(team_move(&[0, 0]), TeamMove::Rock);
    assert_eq!(team_move(&[1, 1]), TeamMove::Scissors);
    assert_eq!(team_move(&[0, 1]), TeamMove::Paper);
    assert_eq!(team_move(&[1, 0]), TeamMove::Paper);
    let g = make_team_rps();
    // Rock loses to Paper, Paper ties Paper, Paper loses to Scissors.
    assert_eq!(g.utility(&ja(&[0, 0]), &ja(&[0, 1])), -1.0);
    assert_eq!(g.utility(&ja(&[0, 1]), &ja(&[1, 0])), 0.0);
    assert_eq!(g.utility(&ja(&[0, 1]), &ja(&[1, 1])), -1.0);
    let u: MixturePolicy = ProductPolicy::uniform(2, 2).into();
    assert_eq!(team_move_distribution(&u), [0.25, 0.5, 0.25]);
}

#[test]
fn team_rps_scissors_is_a_local_equilibrium() {
    let g = make_team_rps();
    let scissors = det(&[1, 1], 2);
    // A single deviation turns Scissors into Paper, which loses.
    for deviation in [[0, 1], [1, 0]] {
        assert_eq!(expected_utility(&g, &det(&deviation, 2), &scissors).unwrap(), -1.0);
    }
    // The joint deviation to Rock wins.
    assert_eq!(expected_utility(&g, &det(&[0, 0], 2), &scissors).unwrap(), 1.0);
}

/// Team reward straight from the rules: reward level, seeking reward, then
/// the attack/defend override.
fn sad_reward_oracle(team: &[usize], opp: &[usize], a: usize) -> f64 {
    let (attack, defend) = (a + 1, a + 2);
    let seeks: Vec<usize> = team.iter().copied().filter(|&x| x <= a).collect();
    let spread_ok = seeks.iter().all(|&x| seeks.iter().all(|&y| x.abs_diff(y) <= 1));
    let level = if seeks.is_empty() || !spread_ok {
        0
    } else {
        *seeks.iter().min().unwrap()
    };
    let seek_reward: f64 = if seeks.is_empty() {
        0.0
    } else {
        seeks
            .iter()
            .filter(|&&x| level <= x && x <= level + 1)
            .map(|&x| x as f64)
            .sum()
    };
    let defended = team.contains(&defend);
    let attackers = opp.iter().filter(|&&x| x == attack).count();
    if !defended && attackers >= 2 {
        0.0
    } else {
        seek_reward
    }
}

#[test]
fn sad_matches_reward_rules() {
    let p = SadParams::default();
    let g = make_sad(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let j = g.joint_count() as u64;
    for _ in 0..5000 {
        let x = JointAction::from_index((rng.next_u64() % j) as usize, 4, 7);
        let y = JointAction::from_index((rng.next_u64() % j) as usize, 4, 7);
        let expect = sad_reward_oracle(x.actions(), y.actions(), 4) - sad_reward_oracle(y.actions(), x.actions(), 4);
        assert_eq!(g.utility(&x, &y), expect, "{:?} vs {:?}", x.actions(), y.actions());
    }
}

#[test]
fn sad_examples() {
    let p = SadParams::default();
    let g = make_sad(&p).unwrap();
    let (atk, def) = (p.attack(), p.defend());
    assert_eq!(g.utility(&ja(&[4, 4, 4, 4]), &ja(&[atk, atk, 4, 4])), -8.0);
    assert_eq!(g.utility(&ja(&[def, 4, 4, 4]), &ja(&[atk, atk, 4, 4])), 4.0);
    assert_eq!(g.utility(&ja(&[4, 4, 4, 4]), &ja(&[4, 4, 4, 4])), 0.0);
    // No seekers: no reward.
    assert_eq!(g.utility(&ja(&[def, def, def, def]), &ja(&[atk, atk, atk, atk])), 0.0);
}

#[test]
fn sad_is_permutation_invariant() {
    let p = SadParams::default();
    let g = make_sad(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let j = g.joint_count() as u64;
    for _ in 0..1000 {
        let x = JointAction::from_index((rng.next_u64() % j) as usize, 4, 7);
        let y = JointAction::from_index((rng.next_u64() % j) as usize, 4, 7);
        let mut xs = x.actions().to_vec();
        let mut ys = y.actions().to_vec();
        xs.rotate_left((rng.next_u32() % 4) as usize);
        ys.swap(0, (rng.next_u32() % 4) as usize);
        assert_eq!(g.utility(&x, &y), g.utility(&ja(&xs), &ja(&ys)));
    }
}

#[test]
fn sad_reference_values() {
    let p = SadParams::default();
    let g = make_sad(&p).unwrap();
    let refs = sad_reference_policies(&p).unwrap();
    let star = &refs.sigma_star;
    assert_eq!(star.weights().iter().sum::<f64>(), 1.0);
    let seek: MixturePolicy = refs.seek.clone().into();
    let defend: MixturePolicy = refs.defend.clone().into();
    assert!(expected_utility(&g, &seek, star).unwrap().abs() < 1e-12);
    assert!(expected_utility(&g, &defend, star).unwrap().abs() < 1e-12);
    assert!(sad_exploitability(&g, &refs, star).unwrap().abs() < 1e-12);
    assert_eq!(sad_exploitability(&g, &refs, &seek).unwrap(), 8.0);
    assert_eq!(sad_exploitability(&g, &refs, &defend).unwrap(), 4.0);
}

#[test]
fn sad_sigma_star_is_a_global_equilibrium() {
    for a in [2, 4] {
        let p = SadParams::linear(4, a);
        let g = make_sad(&p).unwrap();
        let refs = sad_reference_policies(&p).unwrap();
        assert!(
            symmetric_exploitability(&g, &refs.sigma_star).unwrap().abs() < 1e-9,
            "A = {a}"
        );
    }
}

#[test]
fn sad_rejects_bad_rewards() {
    let mut p = SadParams::default();
    p.rewards[2] = p.rewards[1];
    assert!(make_sad(&p).is_err());
    let mut p = SadParams::default();
    p.rewards[0] = 1.0;
    assert!(make_sad(&p).is_err());
    assert!(sad_reference_policies(&SadParams::linear(2, 4)).is_err());
}
