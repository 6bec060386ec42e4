use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::psro::solve_symmetric;
use super::{
    mix_dists, population_mixture, Algorithm, IterationStats, MetaSolverKind, Plateau, Problem, Recorder, RunRecord,
    TrainConfig,
};
use crate::learners::{q_from_payoffs, LearnerState};
use crate::meta::{prioritized_scores_counter, solve_nash_zero_sum, solve_uniform, MetaPolicy, PayoffTable};
use crate::{ProductPolicy, Result, TeamGame};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn update(game: &TeamGame, learner: &mut LearnerState, payoffs: &[f64], plateau: &mut Plateau) -> bool {
    let current = learner.policy().clone();
    let q = q_from_payoffs(game, &current, payoffs);
    let value = dot(&current.joint_distribution(), payoffs);
    learner.step(&q, value);
    plateau.observe(&current, learner.policy())
}

/// Meta-policy over the main population for the counter learner to attack.
fn counter_meta(
    kind: MetaSolverKind,
    game: &TeamGame,
    table: &PayoffTable,
    counter: &ProductPolicy,
    mains: &[ProductPolicy],
    nash_tol: f64,
) -> Result<(MetaPolicy, MetaPolicy)> {
    match kind {
        MetaSolverKind::Uniform => Ok((solve_uniform(mains.len()), solve_uniform(table.cols()))),
        MetaSolverKind::Nash => {
            let s = solve_nash_zero_sum(table.matrix(), nash_tol)?;
            Ok((s.row, s.col))
        }
        MetaSolverKind::Prioritized => Ok((
            prioritized_scores_counter(game, counter, mains)?,
            solve_uniform(table.cols()),
        )),
    }
}

/// Fictitious cross-play. Two populations grow side by side. Each iteration
/// the main learner plays `eta` self-play against its own current policy
/// and `1-eta` against the meta-policy of the joint population, while the
/// counter learner best-responds to the meta-policy over the main
/// population. Each learner stops on its own when it plateaus. The main
/// learner keeps its state across iterations unless `main_reset`; the
/// counter learner restarts from the initialization unless `counter_reset`
/// is off. The joint meta-policy mixture is evaluated.
pub fn run_fxp(problem: &Problem, config: &TrainConfig) -> Result<RunRecord> {
    config.check(Algorithm::Fxp)?;
    let game = &problem.game;
    let (n, a) = (game.team_size(), game.action_count());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let first_main = config.init.policy(n, a, &mut rng);
    let first_counter = config.init.policy(n, a, &mut rng);
    game.check_product(&first_main)?;
    game.check_product(&first_counter)?;

    let mut mains = vec![first_main.clone()];
    let mut counters = vec![first_counter.clone()];
    // Interleaved main/counter so the joint table grows incrementally.
    let mut joint = vec![first_main.clone(), first_counter.clone()];
    let mut joint_dists = vec![first_main.joint_distribution(), first_counter.joint_distribution()];
    let mut main_dists = vec![first_main.joint_distribution()];
    let mut table_joint = PayoffTable::new();
    table_joint.extend(game, &joint, &joint)?;
    let mut table_mc = PayoffTable::new();
    table_mc.extend(game, &mains, &counters)?;

    let mut main = LearnerState::new(config.rule, first_main);
    let mut counter = LearnerState::new(config.rule, first_counter);
    let mut recorder = Recorder::new(problem, config);
    let mut iterations = Vec::new();
    let mut eta = config.eta;
    let mut step = 0;

    let (sigma, sigma_m, sigma_c) = loop {
        let sigma = solve_symmetric(
            config.meta_solver,
            game,
            &table_joint,
            main.policy(),
            &joint,
            config.nash_tol,
        )?;
        let (sigma_m, sigma_c) = counter_meta(
            config.counter_meta_solver,
            game,
            &table_mc,
            counter.policy(),
            &mains,
            config.nash_tol,
        )?;
        let target = mix_dists(&joint_dists, &sigma);
        recorder.record(step, &target, population_mixture(&joint, &sigma).marginals());
        if step >= config.total_steps || (config.stop_on_convergence && recorder.converged()) {
            break (sigma, sigma_m, sigma_c);
        }

        if config.main_reset {
            main.reset(config.init.policy(n, a, &mut rng));
        }
        if config.counter_reset {
            counter.reset(config.init.policy(n, a, &mut rng));
        }
        let main_fixed = game.payoff_against(&target);
        let counter_payoffs = game.payoff_against(&mix_dists(&main_dists, &sigma_m));
        let mut main_plateau = Plateau::new(config.plateau_tol, config.plateau_window);
        let mut counter_plateau = Plateau::new(config.plateau_tol, config.plateau_window);
        let (mut main_on, mut counter_on) = (true, true);
        let mut stats = IterationStats {
            start_step: step,
            main_steps: 0,
            counter_steps: 0,
        };
        for _ in 0..config.steps_per_iter {
            if main_on && step < config.total_steps {
                let payoffs: Vec<f64> = if eta > 0.0 {
                    let own = game.payoff_against(&main.policy().joint_distribution());
                    own.iter()
                        .zip(&main_fixed)
                        .map(|(s, f)| eta * s + (1.0 - eta) * f)
                        .collect()
                } else {
                    main_fixed.clone()
                };
                main_on = !update(game, &mut main, &payoffs, &mut main_plateau);
                eta *= config.eta_decay;
                stats.main_steps += 1;
                step += 1;
            }
            if counter_on && step < config.total_steps {
                counter_on = !update(game, &mut counter, &counter_payoffs, &mut counter_plateau);
                stats.counter_steps += 1;
                step += 1;
            }
            if !(main_on || counter_on) || step >= config.total_steps {
                break;
            }
        }
        iterations.push(stats);

        let (m, c) = (main.policy().clone(), counter.policy().clone());
        main_dists.push(m.joint_distribution());
        joint_dists.push(m.joint_distribution());
        joint_dists.push(c.joint_distribution());
        mains.push(m.clone());
        counters.push(c.clone());
        joint.push(m);
        joint.push(c);
        table_joint.extend(game, &joint, &joint)?;
        table_mc.extend(game, &mains, &counters)?;
    };

    let mut record = recorder.finish(
        config.algorithm,
        step,
        population_mixture(&joint, &sigma),
        main.policy().clone(),
    );
    record.populations = vec![mains, counters, joint];
    record.meta_policies = vec![sigma_m, sigma_c, sigma];
    record.payoff_tables = vec![table_joint, table_mc];
    record.iterations = iterations;
    Ok(record)
}
