//! Interactive execution of a verified strategy.
//!
//! The stepper advances through the strategy's event order, asking for each
//! observation outcome as its event executes. Between steps it prints every
//! event already *forced* by the history: an event is forced when all
//! scenarios consistent with the observations so far schedule it at the same
//! time. For a dynamic strategy the earliest pending event is always forced,
//! so the run never stalls.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num_rational::Rational64;
use thiserror::Error;

use crate::dc::ExecutionStrategy;
use crate::network::Cstn;
use crate::rational::format_ratio;
use crate::scenario::mask_of_index;

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("aborted by user")]
    Aborted,
    #[error("strategy does not fit the network: {0}")]
    Strategy(String),
    #[error("internal: {0}")]
    Internal(String),
}

/// The realized run: observed literals in observation order and the final
/// schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationOutcome {
    pub observations: Vec<(String, bool)>,
    pub scenario_label: String,
    pub schedule: BTreeMap<String, Rational64>,
}

fn parse_answer(token: &str) -> Option<bool> {
    match token.trim().to_ascii_lowercase().as_str() {
        "t" | "true" | "1" | "y" | "yes" => Some(true),
        "f" | "false" | "0" | "n" | "no" => Some(false),
        _ => None,
    }
}

/// Runs the stepper, reading observation outcomes from `input` and writing
/// the transcript to `output`. The strategy must verify against the network
/// (viable and dynamic); callers are expected to have checked that.
pub fn simulate<R: BufRead + ?Sized, W: Write + ?Sized>(
    g: &Cstn,
    sigma: &ExecutionStrategy,
    input: &mut R,
    output: &mut W,
) -> Result<SimulationOutcome, SimulateError> {
    if sigma.propositions() != g.propositions() {
        return Err(SimulateError::Strategy(
            "proposition sets differ".to_owned(),
        ));
    }
    let p_count = g.propositions().len();
    let s_count = g.scenario_count();
    let v_count = g.node_count();
    let masks: Vec<u64> = (0..s_count).map(|i| mask_of_index(i, p_count)).collect();

    // Times indexed [scenario][node]; None marks an inactive event.
    let mut times = vec![vec![None; v_count]; s_count as usize];
    for si in 0..s_count as usize {
        let sched = sigma.schedule(si as u64);
        for (ni, node) in g.nodes().iter().enumerate() {
            if g.node_active(ni, masks[si]) {
                let t = sched.get(&node.id).copied().ok_or_else(|| {
                    SimulateError::Strategy(format!(
                        "scenario {si} misses event `{}`",
                        node.id
                    ))
                })?;
                times[si][ni] = Some(t);
            }
        }
    }

    writeln!(
        output,
        "executing: {} events, {} propositions, {} scenarios",
        v_count,
        p_count,
        s_count
    )?;

    let mut consistent: Vec<bool> = vec![true; s_count as usize];
    let mut executed = vec![false; v_count];
    let mut observations: Vec<(String, bool)> = Vec::new();

    let print_forced = |output: &mut W,
                        consistent: &[bool],
                        executed: &[bool],
                        times: &Vec<Vec<Option<Rational64>>>|
     -> std::io::Result<()> {
        let mut forced: Vec<String> = Vec::new();
        'nodes: for ni in 0..v_count {
            if executed[ni] {
                continue;
            }
            let mut value: Option<Rational64> = None;
            for si in 0..s_count as usize {
                if !consistent[si] {
                    continue;
                }
                match (times[si][ni], value) {
                    (None, _) => continue 'nodes,
                    (Some(t), None) => value = Some(t),
                    (Some(t), Some(v)) if t != v => continue 'nodes,
                    _ => {}
                }
            }
            if let Some(t) = value {
                forced.push(format!("{}={}", g.nodes()[ni].id, format_ratio(t)));
            }
        }
        if forced.is_empty() {
            writeln!(output, "forced: (none)")
        } else {
            writeln!(output, "forced: {}", forced.join(", "))
        }
    };

    loop {
        print_forced(output, &consistent, &executed, &times)?;

        // Earliest pending time over consistent scenarios; for a dynamic
        // strategy it agrees across them.
        let mut next: Option<Rational64> = None;
        for si in 0..s_count as usize {
            if !consistent[si] {
                continue;
            }
            for ni in 0..v_count {
                if executed[ni] {
                    continue;
                }
                if let Some(t) = times[si][ni] {
                    if next.map_or(true, |n| t < n) {
                        next = Some(t);
                    }
                }
            }
        }
        let Some(now) = next else { break };

        let batch: Vec<usize> = (0..v_count)
            .filter(|&ni| {
                !executed[ni]
                    && (0..s_count as usize).any(|si| {
                        consistent[si] && times[si][ni] == Some(now)
                    })
            })
            .collect();

        for ni in batch {
            executed[ni] = true;
            let node = &g.nodes()[ni];
            match &node.observes {
                Some(p) => {
                    writeln!(
                        output,
                        "exec {} @ {} [observes {}]",
                        node.id,
                        format_ratio(now),
                        p
                    )?;
                    let truth = loop {
                        write!(output, "{p}? [t/f] ")?;
                        output.flush()?;
                        let mut line = String::new();
                        if input.read_line(&mut line)? == 0 {
                            return Err(SimulateError::Aborted);
                        }
                        let trimmed = line.trim();
                        if trimmed == "q" || trimmed == "quit" {
                            return Err(SimulateError::Aborted);
                        }
                        match parse_answer(trimmed) {
                            Some(v) => break v,
                            None => {
                                writeln!(output, "unrecognized answer, enter t or f")?;
                            }
                        }
                    };
                    writeln!(output, "-> {p} = {truth}")?;
                    observations.push((p.clone(), truth));
                    let j = g
                        .propositions()
                        .iter()
                        .position(|q| q == p)
                        .expect("observer proposition is declared");
                    for si in 0..s_count as usize {
                        if consistent[si] && (masks[si] >> j & 1 == 1) != truth {
                            consistent[si] = false;
                        }
                    }
                }
                None => {
                    writeln!(output, "exec {} @ {}", node.id, format_ratio(now))?;
                }
            }
        }
    }

    let realized = (0..s_count as usize)
        .find(|&si| consistent[si])
        .ok_or_else(|| SimulateError::Internal("no scenario left".to_owned()))?;
    let scenario = g.scenario(realized as u64);
    let schedule = sigma.schedule(realized as u64).clone();

    // Close the loop: the realized schedule satisfies its restriction.
    let restriction = g.restrict(&scenario);
    match restriction
        .check_schedule(&schedule)
        .map_err(|e| SimulateError::Internal(e.to_string()))?
    {
        None => {}
        Some(v) => {
            return Err(SimulateError::Internal(format!(
                "realized schedule violates its restriction: {v}"
            )))
        }
    }

    let observed_label: Vec<String> = observations
        .iter()
        .map(|(p, v)| if *v { p.clone() } else { format!("-{p}") })
        .collect();
    writeln!(output, "scenario: {}", observed_label.join(" "))?;
    let rendered: Vec<String> = schedule
        .iter()
        .map(|(n, t)| format!("{n}={}", format_ratio(*t)))
        .collect();
    writeln!(output, "schedule: {}", rendered.join(", "))?;
    writeln!(output, "verified viable for the realized scenario")?;

    Ok(SimulationOutcome {
        observations,
        scenario_label: scenario.label().to_string(),
        schedule,
    })
}
