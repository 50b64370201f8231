//! Machine-readable reports for the command-line tools.
//!
//! Reports are deterministic for identical inputs: rationals are rendered as
//! `N/D` strings and wall-clock timings are deliberately left out (they go to
//! the human-readable stream instead).

use serde::Serialize;

use crate::dc::{DcReport, DcVerdict, EpsilonHatEstimate, SolveStats, VerifyReport};
use crate::network::{Entity, Severity, Violation};

#[derive(Serialize, Clone, Debug)]
pub struct SizesJson {
    pub propositions: usize,
    pub scenarios: u64,
    pub nodes: usize,
    pub constraints: usize,
    pub expanded_nodes: usize,
    pub hyperarcs: usize,
    pub hytn_size: usize,
    pub game_nodes: usize,
    pub game_edges: usize,
}

impl From<&SolveStats> for SizesJson {
    fn from(s: &SolveStats) -> Self {
        Self {
            propositions: s.propositions,
            scenarios: s.scenarios,
            nodes: s.nodes,
            constraints: s.constraints,
            expanded_nodes: s.expanded_nodes,
            hyperarcs: s.hyperarcs,
            hytn_size: s.hytn_size,
            game_nodes: s.game_nodes,
            game_edges: s.game_edges,
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct IterationsJson {
    pub lifts: u64,
    pub energy_cap: u64,
}

#[derive(Serialize, Clone, Debug)]
pub struct CheckJson {
    pub command: String,
    pub file: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    pub sizes: SizesJson,
    pub iterations: IterationsJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy_file: Option<String>,
}

pub fn verdict_tag(v: &DcVerdict) -> &'static str {
    match v {
        DcVerdict::Dc => "dc",
        DcVerdict::NotDc => "not-dc",
        DcVerdict::EpsDc(_) => "eps-dc",
        DcVerdict::NotEpsDc(_) => "not-eps-dc",
    }
}

pub fn check_json(
    command: &str,
    file: &str,
    report: &DcReport,
    strategy_file: Option<String>,
) -> CheckJson {
    let epsilon = match &report.verdict {
        DcVerdict::EpsDc(e) | DcVerdict::NotEpsDc(e) => Some(e.to_string()),
        _ => report.stats.epsilon.as_ref().map(|e| e.to_string()),
    };
    CheckJson {
        command: command.to_owned(),
        file: file.to_owned(),
        verdict: verdict_tag(&report.verdict).to_owned(),
        epsilon,
        sizes: SizesJson::from(&report.stats),
        iterations: IterationsJson {
            lifts: report.stats.lift_count,
            energy_cap: report.stats.energy_cap,
        },
        certificate: report
            .certificate
            .as_ref()
            .map(|c| c.iter().cloned().collect()),
        strategy_file,
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct ViolationJson {
    pub rule: String,
    pub severity: String,
    pub entity: String,
    pub message: String,
}

impl From<&Violation> for ViolationJson {
    fn from(v: &Violation) -> Self {
        Self {
            rule: v.rule.to_string(),
            severity: match v.severity {
                Severity::Error => "error".to_owned(),
                Severity::Warning => "warning".to_owned(),
            },
            entity: match &v.entity {
                Entity::Node(id) => format!("node {id}"),
                Entity::Constraint(i) => format!("constraint {i}"),
            },
            message: v.message.clone(),
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct ValidateJson {
    pub command: String,
    pub file: String,
    pub ok: bool,
    pub violations: Vec<ViolationJson>,
}

#[derive(Serialize, Clone, Debug)]
pub struct VerifyJson {
    pub command: String,
    pub file: String,
    pub strategy_file: String,
    pub viable: bool,
    pub dynamic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_dynamic: Option<bool>,
    pub ok: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub counterexamples: Vec<String>,
}

pub fn verify_json(file: &str, strategy_file: &str, report: &VerifyReport) -> VerifyJson {
    let mut counterexamples = Vec::new();
    for check in [&report.viable, &report.dynamic]
        .into_iter()
        .chain(report.eps_dynamic.as_ref())
    {
        if let Some(d) = &check.detail {
            counterexamples.push(d.clone());
        }
    }
    VerifyJson {
        command: "verify".to_owned(),
        file: file.to_owned(),
        strategy_file: strategy_file.to_owned(),
        viable: report.viable.ok,
        dynamic: report.dynamic.ok,
        eps_dynamic: report.eps_dynamic.as_ref().map(|c| c.ok),
        ok: report.all_ok(),
        counterexamples,
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct EpsilonHatJson {
    pub command: String,
    pub file: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<String>,
}

pub fn epsilon_hat_json(file: &str, estimate: &EpsilonHatEstimate) -> EpsilonHatJson {
    match estimate {
        EpsilonHatEstimate::NotDynamicallyConsistent => EpsilonHatJson {
            command: "epsilon-hat".to_owned(),
            file: file.to_owned(),
            verdict: "not-dc".to_owned(),
            lo: None,
            hi: None,
        },
        EpsilonHatEstimate::Bracket { lo, hi } => EpsilonHatJson {
            command: "epsilon-hat".to_owned(),
            file: file.to_owned(),
            verdict: "bracket".to_owned(),
            lo: Some(lo.to_string()),
            hi: hi.as_ref().map(|h| h.to_string()),
        },
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct BenchEntryJson {
    pub file: String,
    pub verdict: String,
    pub sizes: SizesJson,
    pub lifts: u64,
}
