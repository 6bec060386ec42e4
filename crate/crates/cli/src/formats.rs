//! File formats: matrix games, policy files, payoff-table audits, run CSVs
//! and run summaries.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use fxp_core::meta::PayoffTable;
use fxp_core::trainers::RunRecord;
use fxp_core::{MixturePolicy, ProductPolicy, TeamGame};
use serde::{Deserialize, Serialize};

/// A game given by its full utility matrix over flattened joint actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixGameFile {
    pub team_size: usize,
    pub action_count: usize,
    pub utility: Vec<Vec<f64>>,
}

impl MatrixGameFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing matrix game {}", path.display()))
    }

    pub fn game(&self) -> Result<TeamGame> {
        Ok(TeamGame::from_matrix(self.team_size, self.action_count, &self.utility)?)
    }
}

/// A mixture of product policies: `members[k][i]` is agent `i`'s action
/// distribution in member `k`. Missing weights mean equal weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    pub members: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl PolicyFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing policy file {}", path.display()))
    }

    pub fn from_mixture(m: &MixturePolicy) -> Self {
        PolicyFile {
            members: m.members().iter().map(|p| p.dists().to_vec()).collect(),
            weights: Some(m.weights().to_vec()),
        }
    }

    pub fn mixture(&self) -> Result<MixturePolicy> {
        let members = self
            .members
            .iter()
            .map(|d| ProductPolicy::new(d.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(match &self.weights {
            Some(w) => MixturePolicy::new(members, w.clone())?,
            None => MixturePolicy::uniform(members)?,
        })
    }
}

/// A payoff table with names for its rows and columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableAudit {
    pub name: String,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

impl TableAudit {
    pub fn new(name: &str, table: &PayoffTable, row_prefix: &str, col_prefix: &str) -> Self {
        TableAudit {
            name: name.into(),
            rows: (0..table.rows()).map(|i| format!("{row_prefix}{i}")).collect(),
            cols: (0..table.cols()).map(|j| format!("{col_prefix}{j}")).collect(),
            matrix: table.matrix().to_vec(),
        }
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Per-run CSV: step, exploitability and, for two-action games, each
/// agent's probability of action 1.
pub fn run_csv(record: &RunRecord, action_count: usize, team_size: usize) -> String {
    let per_agent = action_count == 2;
    let mut out = String::from("step,exploitability");
    if per_agent {
        for i in 0..team_size {
            let _ = write!(out, ",p1_agent{i}");
        }
    }
    out.push('\n');
    for p in &record.points {
        let _ = write!(out, "{},{}", p.step, fmt17(p.exploitability));
        if per_agent {
            for d in &p.marginals {
                let _ = write!(out, ",{}", fmt17(d[1]));
            }
        }
        out.push('\n');
    }
    out
}

/// Per-run JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub seed: u64,
    pub total_steps: usize,
    pub convergence_step: Option<usize>,
    pub final_exploitability: f64,
    pub population_sizes: Vec<usize>,
    pub iterations: usize,
}

impl RunSummary {
    pub fn new(label: &str, seed: u64, r: &RunRecord) -> Self {
        RunSummary {
            algorithm: label.into(),
            seed,
            total_steps: r.total_steps,
            convergence_step: r.convergence_step,
            final_exploitability: r.final_exploitability(),
            population_sizes: r.populations.iter().map(Vec::len).collect(),
            iterations: r.iterations.len(),
        }
    }
}
