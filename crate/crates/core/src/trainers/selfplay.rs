use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Algorithm, Problem, Recorder, RunRecord, TrainConfig};
use crate::learners::{q_from_payoffs, LearnerState, UpdateRule};
use crate::{MixturePolicy, ProductPolicy, Result};

/// Self-play: every step the opponent is the current policy itself. With the
/// CFR rule the time-average policy is evaluated, otherwise the current one.
pub fn run_sp(problem: &Problem, config: &TrainConfig) -> Result<RunRecord> {
    config.check(Algorithm::Sp)?;
    train_against_self(problem, config, None)
}

/// Fictitious self-play: the opponent is `eta` times the current policy plus
/// `1-eta` times the average of all policies so far. The average policy is
/// evaluated.
pub fn run_fsp(problem: &Problem, config: &TrainConfig) -> Result<RunRecord> {
    config.check(Algorithm::Fsp)?;
    train_against_self(problem, config, Some(config.eta))
}

fn train_against_self(problem: &Problem, config: &TrainConfig, fictitious: Option<f64>) -> Result<RunRecord> {
    let game = &problem.game;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start = config.init.policy(game.team_size(), game.action_count(), &mut rng);
    game.check_product(&start)?;
    let mut learner = LearnerState::new(config.rule, start);
    let evaluate_average = fictitious.is_some() || config.rule == UpdateRule::Cfr;

    let mut recorder = Recorder::new(problem, config);
    let mut history: Vec<ProductPolicy> = Vec::new();
    let mut dist_sum = vec![0.0; game.joint_count()];
    let mut marginal_sum = vec![vec![0.0; game.action_count()]; game.team_size()];

    let mut step = 0;
    loop {
        let current = learner.policy().clone();
        let dist = current.joint_distribution();
        let count = (step + 1) as f64;
        if evaluate_average {
            dist_sum.iter_mut().zip(&dist).for_each(|(s, p)| *s += p);
            for (acc, d) in marginal_sum.iter_mut().zip(current.dists()) {
                acc.iter_mut().zip(d).for_each(|(s, p)| *s += p);
            }
            history.push(current.clone());
        }
        let average = || -> Vec<f64> { dist_sum.iter().map(|s| s / count).collect() };

        if step % config.eval_every == 0 || step == config.total_steps {
            if evaluate_average {
                let marginals = marginal_sum
                    .iter()
                    .map(|m| m.iter().map(|s| s / count).collect())
                    .collect();
                recorder.record(step, &average(), marginals);
            } else {
                recorder.record(step, &dist, current.dists().to_vec());
            }
        }
        if step == config.total_steps || (config.stop_on_convergence && recorder.converged()) {
            break;
        }

        let opponent = match fictitious {
            None => dist.clone(),
            Some(eta) => {
                let avg = average();
                dist.iter().zip(&avg).map(|(c, a)| eta * c + (1.0 - eta) * a).collect()
            }
        };
        let payoffs = game.payoff_against(&opponent);
        let q = q_from_payoffs(game, &current, &payoffs);
        let value: f64 = dist.iter().zip(&payoffs).map(|(p, v)| p * v).sum();
        learner.step(&q, value);
        step += 1;
    }

    let final_policy = learner.policy().clone();
    let target = if evaluate_average {
        MixturePolicy::uniform(history)?
    } else {
        MixturePolicy::pure(final_policy.clone())
    };
    Ok(recorder.finish(config.algorithm, step, target, final_policy))
}
