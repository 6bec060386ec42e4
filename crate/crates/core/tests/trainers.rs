use fxp_core::games::{make_motivating, make_team_rps, MotivatingParams};
use fxp_core::learners::{Init, UpdateRule};
use fxp_core::trainers::{run, Algorithm, MetaSolverKind, Problem, RunRecord, TrainConfig};
use fxp_core::{ProductPolicy, TeamGame};

fn motivating() -> Problem {
    Problem::team(make_motivating(MotivatingParams::default()).unwrap())
}

fn config(algorithm: Algorithm) -> TrainConfig {
    let mut c = TrainConfig::new(algorithm);
    c.steps_per_iter = 40;
    c
}

fn assert_distribution(w: &[f64]) {
    assert!(w.iter().all(|&x| x >= 0.0));
    assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9, "{w:?}");
}

fn check_record(r: &RunRecord) {
    assert!(r.points.windows(2).all(|w| w[0].step < w[1].step));
    assert!(r.points.iter().all(|p| p.exploitability >= 0.0));
    for w in &r.meta_policies {
        assert_distribution(w);
    }
}

#[test]
fn every_algorithm_is_deterministic() {
    let p = motivating();
    for alg in [
        Algorithm::Sp,
        Algorithm::Fsp,
        Algorithm::Psro,
        Algorithm::Odo,
        Algorithm::Fxp,
    ] {
        let mut c = config(alg);
        c.init = Init::Random;
        c.seed = 9;
        c.total_steps = 300;
        let a = run(&p, &c).unwrap();
        let b = run(&p, &c).unwrap();
        assert_eq!(a, b, "{alg:?}");
        check_record(&a);
    }
}

#[test]
fn sp_on_zero_game_follows_tie_break() {
    let g = TeamGame::from_fn(2, 3, |_, _| 0.0).unwrap();
    let mut c = config(Algorithm::Sp);
    c.total_steps = 200;
    let r = run(&Problem::team(g), &c).unwrap();
    for d in r.final_policy.dists() {
        assert!(d[0] > 0.99);
    }
}

#[test]
fn fsp_with_full_self_play_weight_matches_sp() {
    let p = motivating();
    for steps in [1, 17, 250] {
        let mut sp = config(Algorithm::Sp);
        sp.init = Init::Random;
        sp.seed = 4;
        sp.total_steps = steps;
        let mut fsp = sp.clone();
        fsp.algorithm = Algorithm::Fsp;
        fsp.eta = 1.0;
        assert_eq!(run(&p, &sp).unwrap().final_policy, run(&p, &fsp).unwrap().final_policy);
    }
}

#[test]
fn fxp_main_with_full_self_play_weight_matches_sp() {
    let p = motivating();
    let mut c = config(Algorithm::Fxp);
    c.eta = 1.0;
    c.init = Init::Random;
    c.seed = 7;
    c.total_steps = 600;
    let r = run(&p, &c).unwrap();
    let mains = &r.populations[0];
    let mut main_steps = 0;
    for (k, it) in r.iterations.iter().enumerate() {
        main_steps += it.main_steps;
        let mut sp = config(Algorithm::Sp);
        sp.init = Init::Random;
        sp.seed = 7;
        sp.total_steps = main_steps;
        assert_eq!(run(&p, &sp).unwrap().final_policy, mains[k + 1], "iteration {k}");
    }
    assert!(main_steps > 0);
}

#[test]
fn fxp_populations_grow_by_one_per_iteration() {
    let p = motivating();
    let mut c = config(Algorithm::Fxp);
    c.total_steps = 500;
    let r = run(&p, &c).unwrap();
    let t = r.iterations.len();
    assert!(t > 2);
    assert_eq!(r.populations[0].len(), t + 1);
    assert_eq!(r.populations[1].len(), t + 1);
    assert_eq!(r.populations[2].len(), 2 * (t + 1));
    let steps: usize = r.iterations.iter().map(|i| i.main_steps + i.counter_steps).sum();
    assert_eq!(steps, r.total_steps);
    assert!(r.iterations.iter().all(|i| i.counter_steps > 0));
    let tables = &r.payoff_tables;
    assert_eq!((tables[0].rows(), tables[0].cols()), (2 * (t + 1), 2 * (t + 1)));
    assert_eq!((tables[1].rows(), tables[1].cols()), (t + 1, t + 1));
    check_record(&r);
}

#[test]
fn psro_populations_grow_by_one_per_iteration() {
    let p = motivating();
    for alg in [Algorithm::Psro, Algorithm::Odo] {
        let mut c = config(alg);
        c.total_steps = 400;
        let r = run(&p, &c).unwrap();
        let t = r.iterations.len();
        // The last ODO iteration may be cut by the budget before it is appended.
        let grown = r.populations[0].len() - 1;
        assert!(grown == t || (alg == Algorithm::Odo && grown + 1 == t), "{alg:?}");
        let steps: usize = r.iterations.iter().map(|i| i.main_steps).sum();
        assert_eq!(steps, r.total_steps);
        check_record(&r);
    }
}

#[test]
fn psro_nash_improves_on_the_motivating_game() {
    let p = motivating();
    let mut c = config(Algorithm::Psro);
    c.total_steps = 1000;
    let r = run(&p, &c).unwrap();
    assert!(r.final_exploitability() <= r.points[0].exploitability);
    assert!(r.convergence_step.is_some());
}

#[test]
fn plateau_ends_iterations_early() {
    let p = motivating();
    let mut c = TrainConfig::new(Algorithm::Psro);
    c.steps_per_iter = 1000;
    c.total_steps = 3000;
    let r = run(&p, &c).unwrap();
    assert!(r.iterations.len() > 1);
    assert!(r.iterations.iter().all(|i| i.main_steps < 1000));
}

#[test]
fn odo_starts_from_a_single_policy() {
    let p = motivating();
    let mut c = config(Algorithm::Odo);
    c.total_steps = 1;
    let r = run(&p, &c).unwrap();
    assert_eq!(r.points[0].step, 0);
    assert_eq!(r.final_target.weights().len(), r.populations[0].len());
    assert_distribution(r.final_target.weights());
}

#[test]
fn meta_solver_variants_run() {
    let p = Problem::team(make_team_rps());
    for solver in [
        MetaSolverKind::Uniform,
        MetaSolverKind::Nash,
        MetaSolverKind::Prioritized,
    ] {
        for alg in [Algorithm::Psro, Algorithm::Fxp] {
            let mut c = config(alg);
            c.meta_solver = solver;
            c.counter_meta_solver = solver;
            c.total_steps = 300;
            check_record(&run(&p, &c).unwrap());
        }
    }
}

#[test]
fn every_rule_runs_in_self_play() {
    let p = motivating();
    for rule in [
        UpdateRule::STEPWISE_BR,
        UpdateRule::FOREL,
        UpdateRule::REPLICATOR,
        UpdateRule::MWU,
        UpdateRule::Cfr,
    ] {
        let mut c = config(Algorithm::Sp);
        c.rule = rule;
        c.total_steps = 100;
        let r = run(&p, &c).unwrap();
        assert_eq!(r.points.len(), 101);
        check_record(&r);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let p = motivating();
    let mut c = config(Algorithm::Fxp);
    c.eta = -0.1;
    assert!(run(&p, &c).is_err());
    let mut c = config(Algorithm::Sp);
    c.init = Init::Given(ProductPolicy::uniform(2, 2));
    assert!(run(&p, &c).is_err());
}
