//! The commands behind the CLI: experiment runs, tournaments, exploitability
//! reports and theorem checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use fxp_core::game::{team_best_response, win_probability};
use fxp_core::games::MotivatingParams;
use fxp_core::learners::UpdateRule;
use fxp_core::theorems::{default_grid, theorem1_check, theorem2_check};
use fxp_core::trainers::{run, Algorithm, Evaluation, Problem, RunRecord};
use fxp_core::MixturePolicy;
use serde::Serialize;

use crate::config::{rule_name, ExperimentConfig};
use crate::elo::{fit_elo, EloTable};
use crate::formats::{run_csv, PolicyFile, RunSummary, TableAudit};

/// Files written for one (algorithm, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub csv: PathBuf,
    pub json: PathBuf,
}

fn table_audits(r: &RunRecord) -> Vec<TableAudit> {
    match r.algorithm {
        Algorithm::Fxp => {
            let mut out = Vec::new();
            if let Some(t) = r.payoff_tables.first() {
                out.push(TableAudit::new("joint", t, "joint", "joint"));
            }
            if let Some(t) = r.payoff_tables.get(1) {
                out.push(TableAudit::new("main_vs_counter", t, "main", "counter"));
            }
            out
        }
        _ => r
            .payoff_tables
            .iter()
            .map(|t| TableAudit::new("population", t, "policy", "policy"))
            .collect(),
    }
}

fn write_run(dir: &Path, label: &str, seed: u64, problem: &Problem, r: &RunRecord) -> Result<RunOutput> {
    let stem = format!("{label}_seed{seed}");
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    let g = &problem.game;
    fs::write(&csv, run_csv(r, g.action_count(), g.team_size()))
        .with_context(|| format!("writing {}", csv.display()))?;
    let policy = PolicyFile::from_mixture(&r.final_target);
    fs::write(
        dir.join(format!("{stem}_policy.json")),
        serde_json::to_string_pretty(&policy)? + "\n",
    )?;
    let audits = table_audits(r);
    if !audits.is_empty() {
        fs::write(
            dir.join(format!("{stem}_tables.json")),
            serde_json::to_string(&audits)? + "\n",
        )?;
    }
    let summary = RunSummary::new(label, seed, r);
    fs::write(&json, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("writing {}", json.display()))?;
    Ok(RunOutput { summary, csv, json })
}

/// Runs every (algorithm, seed) pair of `config` and writes its files into
/// the output directory. Relative paths resolve against `base`. Runs are
/// spread over the available cores; a failed run does not stop the others,
/// whose files are still written, but the first failure is returned.
pub fn run_experiment(config: &ExperimentConfig, base: &Path) -> Result<Vec<RunOutput>> {
    let problem = config.game.problem(base)?;
    let dir = base.join(&config.output_dir);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut jobs = Vec::new();
    for a in config.algorithms() {
        for &seed in &config.seeds {
            jobs.push((a.label(), seed, a.train_config(config, seed)?));
        }
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunOutput>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(jobs.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some((label, seed, tc)) = jobs.get(k) else { break };
                let out = run(&problem, tc)
                    .with_context(|| format!("{label} seed {seed}"))
                    .and_then(|r| write_run(&dir, label, *seed, &problem, &r));
                results.lock().unwrap()[k] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

/// Loads a policy file and checks it against the game.
pub fn load_policy(problem: &Problem, path: &Path) -> Result<MixturePolicy> {
    let m = PolicyFile::load(path)?
        .mixture()
        .with_context(|| format!("in {}", path.display()))?;
    problem
        .exploitability(&m)
        .with_context(|| format!("{} does not fit the game", path.display()))?;
    Ok(m)
}

/// Exact pairwise scores between `policies` and the fitted ratings.
pub fn tournament(problem: &Problem, names: Vec<String>, policies: &[MixturePolicy]) -> Result<EloTable> {
    if policies.len() < 2 {
        bail!("a tournament needs at least two policies");
    }
    let n = policies.len();
    let mut scores = vec![vec![0.5; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                scores[i][j] = win_probability(&problem.game, &policies[i], &policies[j])?.score();
            }
        }
    }
    fit_elo(names, &scores)
}

/// Exploitability of a policy and the team best response against it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExploitReport {
    pub measure: &'static str,
    pub exploitability: f64,
    pub best_response: Vec<usize>,
    pub best_response_value: f64,
}

pub fn exploit(problem: &Problem, policy: &MixturePolicy) -> Result<ExploitReport> {
    let exploitability = problem.exploitability(policy)?;
    let (br, value) = team_best_response(&problem.game, policy)?;
    let measure = match problem.evaluation {
        Evaluation::Team => "team",
        Evaluation::SadReference(_) => "sad_reference",
    };
    Ok(ExploitReport {
        measure,
        exploitability,
        best_response: br.actions().to_vec(),
        best_response_value: value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleReport {
    pub rule: &'static str,
    pub converged: usize,
    pub fraction_converged: f64,
    pub runs_with_violations: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Summary {
    pub threshold: f64,
    pub trials: usize,
    pub steps: usize,
    pub seed: u64,
    pub rules: Vec<RuleReport>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2Summary {
    pub rule: &'static str,
    pub steps: usize,
    pub sp_good: Vec<f64>,
    pub fixed_good: Vec<f64>,
    pub difference: Vec<f64>,
    pub critical: f64,
    pub critical_sp_good: bool,
    pub critical_fixed_good: bool,
    pub sp_subset_of_fixed: bool,
    pub holds: bool,
}

pub fn theorem1_summary(
    p: MotivatingParams,
    trials: usize,
    steps: usize,
    seed: u64,
    threshold: f64,
) -> Result<Theorem1Summary> {
    let r = theorem1_check(p, trials, steps, seed, threshold)?;
    let rules: Vec<RuleReport> = r
        .outcomes
        .iter()
        .map(|o| RuleReport {
            rule: rule_name(o.rule),
            converged: o.converged,
            fraction_converged: if trials == 0 {
                0.0
            } else {
                o.converged as f64 / trials as f64
            },
            runs_with_violations: o.runs_with_violations,
            violations: o.violations,
        })
        .collect();
    let holds = rules.iter().all(|o| o.converged == 0 && o.violations == 0);
    Ok(Theorem1Summary {
        threshold: r.threshold,
        trials,
        steps,
        seed,
        rules,
        holds,
    })
}

pub fn theorem2_summary(
    p: MotivatingParams,
    rule: UpdateRule,
    steps: usize,
    threshold: f64,
) -> Result<Theorem2Summary> {
    let r = theorem2_check(p, &default_grid(), rule, steps, threshold)?;
    let pick = |good: &[bool]| -> Vec<f64> { r.grid.iter().zip(good).filter(|(_, &g)| g).map(|(&x, _)| x).collect() };
    let difference = r.difference();
    let holds = r.sp_subset_of_fixed() && !difference.is_empty() && r.critical_in_difference();
    Ok(Theorem2Summary {
        rule: rule_name(rule),
        steps,
        sp_good: pick(&r.sp_good),
        fixed_good: pick(&r.fixed_good),
        difference,
        critical: r.critical,
        critical_sp_good: r.critical_sp_good,
        critical_fixed_good: r.critical_fixed_good,
        sp_subset_of_fixed: r.sp_subset_of_fixed(),
        holds,
    })
}
