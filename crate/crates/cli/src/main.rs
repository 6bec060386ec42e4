use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use fxp_cli::config::{parse_rule, problem_from_arg};
use fxp_cli::experiment::{load_policy, theorem1_summary, theorem2_summary};
use fxp_cli::{exploit, run_experiment, tournament, ExperimentConfig};
use fxp_core::games::MotivatingParams;

#[derive(Parser)]
#[command(
    name = "fxp",
    version,
    about = "Self-play, PSRO and fictitious cross-play on team matrix games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm and seed of an experiment config.
    Run { config: PathBuf },
    /// Fit Elo ratings to exact pairwise scores between policy files.
    Tournament {
        /// Built-in game id (motivating, team_rps, sad) or a game JSON file.
        game: String,
        #[arg(required = true, num_args = 2..)]
        policies: Vec<PathBuf>,
    },
    /// Empirical check of the motivating-game theorems.
    TheoremCheck {
        /// 1 or 2.
        which: u8,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        /// Update rule for theorem 2.
        #[arg(long, default_value = "stepwise_br")]
        rule: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1.5)]
        c: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Exploitability that counts as reaching the global equilibrium.
        #[arg(long, default_value_t = 1e-2)]
        threshold: f64,
    },
    /// Exploitability of a policy file.
    Exploit { game: String, policy: PathBuf },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config } => {
            let c = ExperimentConfig::load(&config)?;
            for out in run_experiment(&c, Path::new("."))? {
                let s = &out.summary;
                let conv = s.convergence_step.map_or("-".to_string(), |k| k.to_string());
                println!(
                    "{} seed {}: steps {} converged {} final {:.6} -> {}",
                    s.algorithm,
                    s.seed,
                    s.total_steps,
                    conv,
                    s.final_exploitability,
                    out.csv.display()
                );
            }
        }
        Command::Tournament { game, policies } => {
            let problem = problem_from_arg(&game)?;
            let loaded = policies
                .iter()
                .map(|p| load_policy(&problem, p))
                .collect::<Result<Vec<_>>>()?;
            let names = policies.iter().map(|p| p.display().to_string()).collect();
            let table = tournament(&problem, names, &loaded)?;
            println!("{}", serde_json::to_string_pretty(&table)?);
        }
        Command::TheoremCheck {
            which,
            trials,
            seed,
            steps,
            rule,
            n,
            c,
            eps,
            threshold,
        } => {
            let p = MotivatingParams { n, c, eps };
            let text = match which {
                1 => serde_json::to_string_pretty(&theorem1_summary(p, trials, steps, seed, threshold)?)?,
                2 => serde_json::to_string_pretty(&theorem2_summary(p, parse_rule(&rule)?, steps, threshold)?)?,
                other => bail!("theorem must be 1 or 2, got {other}"),
            };
            println!("{text}");
        }
        Command::Exploit { game, policy } => {
            let problem = problem_from_arg(&game)?;
            let m = load_policy(&problem, &policy)?;
            println!("{}", serde_json::to_string_pretty(&exploit(&problem, &m)?)?);
        }
    }
    Ok(())
}
