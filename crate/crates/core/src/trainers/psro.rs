use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    mix_dists, population_mixture, Algorithm, IterationStats, MetaSolverKind, Plateau, Problem, Recorder, RunRecord,
    TrainConfig,
};
use crate::learners::{q_from_payoffs, LearnerState};
use crate::math::{exp, sqrt};
use crate::meta::{prioritized_scores_main, solve_nash_zero_sum, solve_uniform, MetaPolicy, PayoffTable};
use crate::{ProductPolicy, Result, TeamGame};

/// Meta-policy over a single symmetric population.
pub(super) fn solve_symmetric(
    kind: MetaSolverKind,
    game: &TeamGame,
    table: &PayoffTable,
    current: &ProductPolicy,
    pop: &[ProductPolicy],
    nash_tol: f64,
) -> Result<MetaPolicy> {
    match kind {
        MetaSolverKind::Uniform => Ok(solve_uniform(pop.len())),
        MetaSolverKind::Nash => Ok(solve_nash_zero_sum(table.matrix(), nash_tol)?.row),
        MetaSolverKind::Prioritized => prioritized_scores_main(game, current, pop),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trains `learner` against fixed opponent payoffs for up to `max_steps`
/// updates or until it plateaus. Returns the number of updates applied.
pub(super) fn train_fixed(
    game: &TeamGame,
    learner: &mut LearnerState,
    payoffs: &[f64],
    max_steps: usize,
    plateau: &mut Plateau,
) -> usize {
    for k in 0..max_steps {
        let current = learner.policy().clone();
        let q = q_from_payoffs(game, &current, payoffs);
        let value = dot(&current.joint_distribution(), payoffs);
        learner.step(&q, value);
        if plateau.observe(&current, learner.policy()) {
            return k + 1;
        }
    }
    max_steps
}

/// PSRO: each iteration solves the population's payoff table for a
/// meta-policy and trains one new policy against the resulting mixture,
/// either from a fresh initialization (`reset`) or warm-started from the
/// previous iteration's policy. The meta-policy mixture is evaluated.
pub fn run_psro(problem: &Problem, config: &TrainConfig) -> Result<RunRecord> {
    config.check(Algorithm::Psro)?;
    let game = &problem.game;
    let (n, a) = (game.team_size(), game.action_count());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let first = config.init.policy(n, a, &mut rng);
    game.check_product(&first)?;

    let mut pop = vec![first.clone()];
    let mut dists = vec![first.joint_distribution()];
    let mut table = PayoffTable::new();
    table.extend(game, &pop, &pop)?;
    let mut learner = LearnerState::new(config.rule, first);
    let mut recorder = Recorder::new(problem, config);
    let mut iterations = Vec::new();
    let mut step = 0;

    let sigma = loop {
        let sigma = solve_symmetric(
            config.meta_solver,
            game,
            &table,
            learner.policy(),
            &pop,
            config.nash_tol,
        )?;
        let target = mix_dists(&dists, &sigma);
        recorder.record(step, &target, population_mixture(&pop, &sigma).marginals());
        if step >= config.total_steps || (config.stop_on_convergence && recorder.converged()) {
            break sigma;
        }

        if config.reset {
            learner.reset(config.init.policy(n, a, &mut rng));
        }
        let payoffs = game.payoff_against(&target);
        let budget = config.steps_per_iter.min(config.total_steps - step);
        let mut plateau = Plateau::new(config.plateau_tol, config.plateau_window);
        let used = train_fixed(game, &mut learner, &payoffs, budget, &mut plateau);
        iterations.push(IterationStats {
            start_step: step,
            main_steps: used,
            counter_steps: 0,
        });
        step += used;

        pop.push(learner.policy().clone());
        dists.push(learner.policy().joint_distribution());
        table.extend(game, &pop, &pop)?;
    };

    let mut record = recorder.finish(
        config.algorithm,
        step,
        population_mixture(&pop, &sigma),
        learner.policy().clone(),
    );
    record.populations = vec![pop];
    record.meta_policies = vec![sigma];
    record.payoff_tables = vec![table];
    record.iterations = iterations;
    Ok(record)
}

/// Online double oracle: a PSRO-shaped loop whose meta-policy is not solved
/// but learned online. After every learner update the population's weights
/// take a multiplicative-weights step of size `1/√t` on each member's payoff
/// against the learner's new policy. The current meta-policy mixture is
/// evaluated.
pub fn run_odo(problem: &Problem, config: &TrainConfig) -> Result<RunRecord> {
    config.check(Algorithm::Odo)?;
    let game = &problem.game;
    let (n, a) = (game.team_size(), game.action_count());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let first = config.init.policy(n, a, &mut rng);
    game.check_product(&first)?;

    let mut pop = vec![first.clone()];
    let mut dists = vec![first.joint_distribution()];
    let mut learner = LearnerState::new(config.rule, first);
    let mut recorder = Recorder::new(problem, config);
    let mut iterations = Vec::new();
    let mut step = 0;
    let mut weights = vec![1.0];
    let mut cumulative = vec![0.0];
    let mut t = 0usize;

    'outer: loop {
        if config.reset && step > 0 {
            learner.reset(config.init.policy(n, a, &mut rng));
        }
        let mut plateau = Plateau::new(config.plateau_tol, config.plateau_window);
        let start = step;
        let mut used = 0;
        loop {
            let target = mix_dists(&dists, &weights);
            if step % config.eval_every == 0 || step >= config.total_steps {
                recorder.record(step, &target, population_mixture(&pop, &weights).marginals());
            }
            if step >= config.total_steps || (config.stop_on_convergence && recorder.converged()) {
                if used > 0 {
                    iterations.push(IterationStats {
                        start_step: start,
                        main_steps: used,
                        counter_steps: 0,
                    });
                }
                break 'outer;
            }
            if used == config.steps_per_iter {
                break;
            }

            let current = learner.policy().clone();
            let payoffs = game.payoff_against(&target);
            let q = q_from_payoffs(game, &current, &payoffs);
            let value = dot(&current.joint_distribution(), &payoffs);
            learner.step(&q, value);
            step += 1;
            used += 1;
            t += 1;

            // Each member's payoff against the learner's new policy.
            let against = game.payoff_against(&learner.policy().joint_distribution());
            let lr = 1.0 / sqrt(t as f64);
            for (c, d) in cumulative.iter_mut().zip(&dists) {
                *c += lr * dot(d, &against);
            }
            weights = hedge_weights(&cumulative);

            if plateau.observe(&current, learner.policy()) {
                break;
            }
        }
        iterations.push(IterationStats {
            start_step: start,
            main_steps: used,
            counter_steps: 0,
        });
        pop.push(learner.policy().clone());
        dists.push(learner.policy().joint_distribution());
        // A newcomer enters at the mixture's own cumulative payoff, so it
        // starts with zero regret relative to the meta-policy.
        let entry = dot(&weights, &cumulative);
        cumulative.push(entry);
        weights = hedge_weights(&cumulative);
    }

    let table = crate::meta::fill_payoffs(game, &pop, &pop)?;
    // Policies appended after the last evaluation carry no weight yet.
    let mut record = recorder.finish(
        config.algorithm,
        step,
        population_mixture(&pop, &weights),
        learner.policy().clone(),
    );
    record.populations = vec![pop];
    record.meta_policies = vec![weights];
    record.payoff_tables = vec![table];
    record.iterations = iterations;
    Ok(record)
}

fn hedge_weights(cumulative: &[f64]) -> Vec<f64> {
    let top = cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = cumulative.iter().map(|c| exp(c - top)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}
