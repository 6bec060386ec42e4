use std::path::Path;
use std::process::Command;

use fxp_cli::config::problem_from_arg;
use fxp_cli::elo::{expected_score, fit_elo, MEAN_RATING};
use fxp_cli::experiment::theorem1_summary;
use fxp_cli::formats::PolicyFile;
use fxp_cli::{exploit, run_experiment, tournament, ExperimentConfig};
use fxp_core::games::MotivatingParams;
use fxp_core::{JointAction, MixturePolicy, ProductPolicy};

fn config_text(algorithm: &str, seeds: &str, extra: &str) -> String {
    format!(
        r#"{{"game": {{"id": "motivating"}}, "algorithm": {algorithm}, "seeds": {seeds},
            "total_steps": 120, "eval_every": 1, "output_dir": "out",
            "convergence_threshold": 0.01{extra}}}"#
    )
}

fn det(actions: &[usize]) -> MixturePolicy {
    ProductPolicy::deterministic(&JointAction::new(actions.to_vec()), 2).into()
}

fn write_policy(dir: &Path, name: &str, m: &MixturePolicy) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(&PolicyFile::from_mixture(m)).unwrap()).unwrap();
    path
}

#[test]
fn config_errors() {
    let ok = config_text(r#"{"id": "sp"}"#, "[1]", "");
    assert!(ExperimentConfig::from_json(&ok).is_ok());
    let cases = [
        config_text(r#"{"id": "sp"}"#, "[]", ""),
        config_text(r#"{"id": "sp"}"#, "[1, 1]", ""),
        config_text(r#"{"id": "sp"}"#, "[1]", r#", "extra": 3"#),
        config_text(r#"{"id": "sp", "hyperparams": {"etta": 0.3}}"#, "[1]", ""),
        config_text(r#"{"id": "sp", "rule": "mwu", "hyperparams": {"lr": 0.3}}"#, "[1]", ""),
        config_text(r#"{"id": "fxp", "hyperparams": {"eta": 1.5}}"#, "[1]", ""),
        config_text(r#"{"id": "alphazero"}"#, "[1]", ""),
        config_text(r#"[{"id": "sp"}, {"id": "sp"}]"#, "[1]", ""),
        r#"{"game": {"id": "motivating"}, "algorithm": {"id": "sp"}, "seeds": [1]}"#.to_string(),
    ];
    for text in cases {
        assert!(ExperimentConfig::from_json(&text).is_err(), "{text}");
    }
}

#[test]
fn unknown_games_and_params_fail_at_build_time() {
    let mut c = ExperimentConfig::from_json(&config_text(r#"{"id": "sp"}"#, "[1]", "")).unwrap();
    c.game.id = "chess".into();
    assert!(c.game.problem(Path::new(".")).is_err());
    c.game.id = "motivating".into();
    c.game.params = serde_json::json!({"n": 3, "cc": 1.0});
    assert!(c.game.problem(Path::new(".")).is_err());
    c.game.params = serde_json::json!({"n": 3, "c": 5.0});
    assert!(c.game.problem(Path::new(".")).is_err());
}

#[test]
fn csv_format_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::from_json(&config_text(
        r#"[{"id": "sp"}, {"id": "fxp", "hyperparams": {"steps_per_iter": 40}}]"#,
        "[5]",
        "",
    ))
    .unwrap();
    c.output_dir = dir.path().to_path_buf();
    let runs = run_experiment(&c, Path::new(".")).unwrap();
    assert_eq!(runs.len(), 2);
    for r in &runs {
        let text = std::fs::read_to_string(&r.csv).unwrap();
        assert!(!text.contains('\r'));
        assert!(text.ends_with('\n'));
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,exploitability,p1_agent0,p1_agent1,p1_agent2"
        );
        for line in lines {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 5);
            cols[0].parse::<usize>().unwrap();
            for v in &cols[1..] {
                let mantissa = v.split('e').next().unwrap().replace(['-', '.'], "");
                assert_eq!(mantissa.len(), 17, "{v}");
                v.parse::<f64>().unwrap();
            }
        }
        let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r.json).unwrap()).unwrap();
        for key in ["convergence_step", "final_exploitability", "population_sizes"] {
            assert!(summary.get(key).is_some(), "{key}");
        }
    }
    let sp = runs.iter().find(|r| r.summary.algorithm == "sp_stepwise_br").unwrap();
    assert_eq!(sp.summary.convergence_step, None);
    assert!(sp.summary.population_sizes.is_empty());
    let fxp = runs.iter().find(|r| r.summary.algorithm == "fxp_stepwise_br").unwrap();
    assert_eq!(fxp.summary.population_sizes.len(), 3);
    assert!(dir.path().join("fxp_stepwise_br_seed5_tables.json").exists());
}

#[test]
fn sad_csv_has_no_agent_columns() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"game": {"id": "sad", "params": {"n": 3, "max_seek": 1}}, "algorithm": {"id": "fsp"},
        "seeds": [0], "total_steps": 5, "eval_every": 1, "output_dir": "x", "convergence_threshold": 0.01}"#;
    let mut c = ExperimentConfig::from_json(text).unwrap();
    c.output_dir = dir.path().to_path_buf();
    let runs = run_experiment(&c, Path::new(".")).unwrap();
    let csv = std::fs::read_to_string(&runs[0].csv).unwrap();
    assert!(csv.starts_with("step,exploitability\n"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn elo_rps_cycle_is_flat() {
    let p = problem_from_arg("team_rps").unwrap();
    let rps = vec![det(&[0, 0]), det(&[0, 1]), det(&[1, 1])];
    let names = vec!["rock".into(), "paper".into(), "scissors".into()];
    let t = tournament(&p, names, &rps).unwrap();
    for r in &t.ratings {
        assert!((r - MEAN_RATING).abs() < 1e-9, "{:?}", t.ratings);
    }
    assert_eq!(t.measured[0][1], 0.0);
    assert_eq!(t.measured[0][2], 1.0);
}

#[test]
fn elo_identical_policies_and_draws() {
    let p = problem_from_arg("motivating").unwrap();
    let u: MixturePolicy = ProductPolicy::uniform(3, 2).into();
    let t = tournament(&p, vec!["a".into(), "b".into()], &[u.clone(), u]).unwrap();
    assert_eq!(t.ratings[0], t.ratings[1]);
    let zeros = det(&[0, 0, 0]);
    let t = tournament(
        &p,
        vec!["a".into(), "b".into(), "c".into()],
        &[zeros.clone(), zeros.clone(), zeros],
    )
    .unwrap();
    assert!(t.ratings.iter().all(|&r| r == MEAN_RATING));
    assert!(tournament(&p, vec!["a".into()], &[det(&[0, 0, 0])]).is_err());
}

#[test]
fn elo_reproduces_consistent_scores() {
    let truth = [1500.0 + 100.0, 1500.0, 1500.0 - 100.0];
    let scores: Vec<Vec<f64>> = truth
        .iter()
        .map(|a| truth.iter().map(|b| expected_score(a - b)).collect())
        .collect();
    let names = (0..3).map(|i| i.to_string()).collect();
    let t = fit_elo(names, &scores).unwrap();
    assert!(t.max_residual() < 1e-3);
    assert!((expected_score(100.0) - 0.64).abs() < 0.001);
}

#[test]
fn exploit_reports_best_response() {
    let p = problem_from_arg("motivating").unwrap();
    let r = exploit(&p, &det(&[1, 1, 1])).unwrap();
    assert_eq!(r.exploitability, 3.0);
    assert_eq!(r.best_response, vec![0, 0, 0]);
    assert_eq!(r.best_response_value, 1.5);
    let sad = problem_from_arg("sad").unwrap();
    assert_eq!(
        exploit(&sad, &ProductPolicy::uniform(4, 7).into()).unwrap().measure,
        "sad_reference"
    );
}

#[test]
fn theorem_reports_are_deterministic() {
    let p = MotivatingParams::default();
    let a = theorem1_summary(p, 5, 200, 7, 1e-2).unwrap();
    let b = theorem1_summary(p, 5, 200, 7, 1e-2).unwrap();
    assert_eq!(a, b);
    assert!(a.holds);
}

fn fxp(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fxp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

#[test]
fn binary_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("ok.json"),
        config_text(
            r#"{"id": "psro", "name": "psro", "hyperparams": {"steps_per_iter": 40}}"#,
            "[0]",
            "",
        ),
    )
    .unwrap();
    let out = fxp(&["run", "ok.json"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.join("out/psro_seed0.csv").exists());

    std::fs::write(d.join("bad.json"), config_text(r#"{"id": "sp"}"#, "[]", "")).unwrap();
    let out = fxp(&["run", "bad.json"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seeds"));

    let policy = d.join("out/psro_seed0_policy.json");
    let ones = write_policy(d, "ones.json", &det(&[1, 1, 1]));
    let out = fxp(&["exploit", "motivating", ones.to_str().unwrap()], d);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["exploitability"], 3.0);

    let out = fxp(
        &[
            "tournament",
            "motivating",
            policy.to_str().unwrap(),
            ones.to_str().unwrap(),
        ],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(table["ratings"][0].as_f64().unwrap() > table["ratings"][1].as_f64().unwrap());

    // A policy for the wrong game is rejected.
    let out = fxp(&["exploit", "team_rps", ones.to_str().unwrap()], d);
    assert!(!out.status.success());

    let out = fxp(
        &["theorem-check", "1", "--trials", "3", "--steps", "100", "--seed", "2"],
        d,
    );
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["holds"], true);
    assert!(!fxp(&["theorem-check", "3"], d).status.success());
}

#[test]
fn matrix_game_files() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("pennies.json");
    std::fs::write(
        &game,
        r#"{"team_size": 1, "action_count": 2, "utility": [[1, -1], [-1, 1]]}"#,
    )
    .unwrap();
    let p = problem_from_arg(game.to_str().unwrap()).unwrap();
    assert_eq!(p.game.joint_count(), 2);
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"id": "matrix", "params": {"path": "pennies.json"}}"#).unwrap();
    assert_eq!(problem_from_arg(spec.to_str().unwrap()).unwrap().game, p.game);
    let half = PolicyFile {
        members: vec![vec![vec![0.5, 0.5]]],
        weights: None,
    };
    let r = exploit(&p, &half.mixture().unwrap()).unwrap();
    assert!(r.exploitability.abs() < 1e-15);
    std::fs::write(&game, r#"{"team_size": 1, "action_count": 2, "utility": [[1, -1]]}"#).unwrap();
    assert!(problem_from_arg(game.to_str().unwrap()).is_err());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        ExperimentConfig::load(&path).unwrap();
        n += 1;
    }
    assert!(n >= 4);
}
