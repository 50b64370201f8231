//! Textual document formats.
//!
//! Network documents are line based:
//!
//! ```text
//! # comment
//! props p q
//! node A
//! node Op observes p
//! node B label p -q
//! constraint B - A <= 3 label p -q
//! ```
//!
//! A `constraint v - u <= w` line bounds `v` at most `w` after `u`. The
//! `props` line, when present, must come first. Labels are literals
//! separated by single spaces with `-` for negation; an absent label clause
//! is the always-true label.
//!
//! Strategy documents start with a `strategy` line, repeat the proposition
//! list, and then give one `scenario <label>` block per scenario with
//! `node N/D` time lines. Rationals are always written `N/D`.

use std::fmt::Write as _;

use num_rational::Rational64;
use thiserror::Error;

use crate::dc::ExecutionStrategy;
use crate::label::Label;
use crate::network::{Cstn, CstnNode, Entity, LabeledConstraint, Severity, Violation};
use crate::rational::{format_ratio, parse_ratio};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DocumentError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}", format_semantic(.0))]
    Semantic(Vec<LocatedViolation>),
}

/// A well-definedness violation tied back to a source line when one is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocatedViolation {
    pub line: Option<usize>,
    pub violation: Violation,
}

fn format_semantic(vs: &[LocatedViolation]) -> String {
    vs.iter()
        .map(|lv| match lv.line {
            Some(line) => format!("line {line}: {}", lv.violation),
            None => lv.violation.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn syntax(line: usize, message: impl Into<String>) -> DocumentError {
    DocumentError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses and validates a network document. Structural problems are syntax
/// errors with line numbers; well-definedness violations of error severity
/// are reported together as a semantic error. Warnings do not fail the
/// parse; re-run [`Cstn::validate_wd`] to display them.
pub fn parse_cstn(text: &str) -> Result<Cstn, DocumentError> {
    let mut props: Option<(usize, Vec<String>)> = None;
    let mut nodes: Vec<CstnNode> = Vec::new();
    let mut node_lines: Vec<usize> = Vec::new();
    let mut constraints: Vec<LabeledConstraint> = Vec::new();
    let mut constraint_lines: Vec<usize> = Vec::new();
    let mut seen_any_entity = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (keyword, rest) = match line.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (line, ""),
        };
        match keyword {
            "props" => {
                if props.is_some() {
                    return Err(syntax(lineno, "duplicate `props` line"));
                }
                if seen_any_entity {
                    return Err(syntax(lineno, "`props` must precede nodes and constraints"));
                }
                let names: Vec<String> =
                    rest.split_whitespace().map(str::to_owned).collect();
                props = Some((lineno, names));
            }
            "node" => {
                seen_any_entity = true;
                let node = parse_node_line(rest, lineno)?;
                if nodes.iter().any(|n| n.id == node.id) {
                    return Err(syntax(lineno, format!("duplicate node id `{}`", node.id)));
                }
                nodes.push(node);
                node_lines.push(lineno);
            }
            "constraint" => {
                seen_any_entity = true;
                constraints.push(parse_constraint_line(rest, lineno)?);
                constraint_lines.push(lineno);
            }
            other => {
                return Err(syntax(
                    lineno,
                    format!("unknown directive `{other}` (expected props/node/constraint)"),
                ));
            }
        }
    }

    let (props_line, props) = props.unwrap_or((0, Vec::new()));
    let g = Cstn::new(props, nodes, constraints).map_err(|e| {
        // Map structural errors back to a best-effort line.
        use crate::network::CstnError::*;
        let line = match &e {
            UnknownNodeInConstraint { index, .. }
            | UnknownPropositionInConstraintLabel { index, .. } => {
                constraint_lines.get(*index).copied().unwrap_or(0)
            }
            UnknownObservedProposition { node, .. }
            | UnknownPropositionInNodeLabel { node, .. } => node_name_line(node, &node_lines, text),
            DuplicateProposition(_) | TooManyPropositions(_) | MissingObserver(_) => props_line,
            _ => 0,
        };
        syntax(line, e.to_string())
    })?;

    let violations = g.validate_wd();
    let errors: Vec<LocatedViolation> = violations
        .into_iter()
        .filter(|v| v.severity == Severity::Error)
        .map(|violation| {
            let line = match &violation.entity {
                Entity::Constraint(i) => constraint_lines.get(*i).copied(),
                Entity::Node(id) => {
                    let i = g.nodes().iter().position(|n| n.id == *id);
                    i.and_then(|i| node_lines.get(i).copied())
                }
            };
            LocatedViolation { line, violation }
        })
        .collect();
    if !errors.is_empty() {
        return Err(DocumentError::Semantic(errors));
    }
    Ok(g)
}

fn node_name_line(node: &str, node_lines: &[usize], text: &str) -> usize {
    // Recover the declaring line by scanning; only used for error paths.
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with("node")
            && line.split_whitespace().nth(1) == Some(node)
        {
            return idx + 1;
        }
    }
    node_lines.first().copied().unwrap_or(0)
}

fn parse_node_line(rest: &str, lineno: usize) -> Result<CstnNode, DocumentError> {
    let mut toks = rest.split_whitespace();
    let id = toks
        .next()
        .ok_or_else(|| syntax(lineno, "node needs an id"))?
        .to_owned();
    let mut observes = None;
    let mut label = Label::empty();
    let remainder: Vec<&str> = toks.collect();
    let mut i = 0;
    while i < remainder.len() {
        match remainder[i] {
            "observes" => {
                let p = remainder
                    .get(i + 1)
                    .ok_or_else(|| syntax(lineno, "`observes` needs a proposition"))?;
                if observes.is_some() {
                    return Err(syntax(lineno, "duplicate `observes` clause"));
                }
                observes = Some((*p).to_owned());
                i += 2;
            }
            "label" => {
                let lits = remainder[i + 1..].join(" ");
                label = Label::parse(&lits).map_err(|e| syntax(lineno, e.to_string()))?;
                i = remainder.len();
            }
            other => {
                return Err(syntax(lineno, format!("unexpected token `{other}`")));
            }
        }
    }
    Ok(CstnNode {
        id,
        label,
        observes,
    })
}

fn parse_constraint_line(rest: &str, lineno: usize) -> Result<LabeledConstraint, DocumentError> {
    // Shape: <v> - <u> <= <w> [label <lits...>]
    let toks: Vec<&str> = rest.split_whitespace().collect();
    if toks.len() < 5 {
        return Err(syntax(
            lineno,
            "expected `constraint <v> - <u> <= <w> [label ...]`",
        ));
    }
    if toks[1] != "-" || toks[3] != "<=" {
        return Err(syntax(
            lineno,
            "expected `constraint <v> - <u> <= <w> [label ...]`",
        ));
    }
    let v = toks[0].to_owned();
    let u = toks[2].to_owned();
    let weight: i64 = toks[4]
        .parse()
        .map_err(|_| syntax(lineno, format!("bad weight `{}`", toks[4])))?;
    let label = match toks.get(5) {
        None => Label::empty(),
        Some(&"label") => {
            let lits = toks[6..].join(" ");
            Label::parse(&lits).map_err(|e| syntax(lineno, e.to_string()))?
        }
        Some(other) => {
            return Err(syntax(lineno, format!("unexpected token `{other}`")));
        }
    };
    Ok(LabeledConstraint { u, v, weight, label })
}

/// Renders a network in the document format; parsing it back yields a
/// structurally identical network.
pub fn serialize_cstn(g: &Cstn) -> String {
    let mut out = String::new();
    if !g.propositions().is_empty() {
        let _ = writeln!(out, "props {}", g.propositions().join(" "));
        out.push('\n');
    }
    for node in g.nodes() {
        let _ = write!(out, "node {}", node.id);
        if let Some(p) = &node.observes {
            let _ = write!(out, " observes {p}");
        }
        if !node.label.is_empty() {
            let _ = write!(out, " label {}", node.label);
        }
        out.push('\n');
    }
    if !g.nodes().is_empty() && !g.constraints().is_empty() {
        out.push('\n');
    }
    for c in g.constraints() {
        let _ = write!(out, "constraint {} - {} <= {}", c.v, c.u, c.weight);
        if !c.label.is_empty() {
            let _ = write!(out, " label {}", c.label);
        }
        out.push('\n');
    }
    out
}

/// Parses a strategy document. Scenario coverage (exactly the full scenario
/// set) is enforced here; the per-scenario domain is checked against a
/// network at verification time.
pub fn parse_strategy(text: &str) -> Result<ExecutionStrategy, DocumentError> {
    let mut lines = text.lines().enumerate().filter_map(|(idx, raw)| {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        (!line.is_empty()).then_some((idx + 1, line.to_owned()))
    });

    let (first_line, first) = lines
        .next()
        .ok_or_else(|| syntax(0, "empty strategy document"))?;
    if first != "strategy" {
        return Err(syntax(first_line, "expected leading `strategy` line"));
    }

    let mut props: Option<Vec<String>> = None;
    let mut scenario_blocks: Vec<(usize, Label, std::collections::BTreeMap<String, Rational64>)> =
        Vec::new();
    for (lineno, line) in lines {
        let (keyword, rest) = match line.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim().to_owned()),
            None => (line.as_str(), String::new()),
        };
        match keyword {
            "props" => {
                if props.is_some() || !scenario_blocks.is_empty() {
                    return Err(syntax(lineno, "`props` must appear once, before scenarios"));
                }
                props = Some(rest.split_whitespace().map(str::to_owned).collect());
            }
            "scenario" => {
                let label =
                    Label::parse(&rest).map_err(|e| syntax(lineno, e.to_string()))?;
                scenario_blocks.push((lineno, label, Default::default()));
            }
            node => {
                let block = scenario_blocks
                    .last_mut()
                    .ok_or_else(|| syntax(lineno, "time line before any `scenario`"))?;
                let t = parse_ratio(&rest)
                    .map_err(|e| syntax(lineno, e.to_string()))?;
                if block.2.insert(node.to_owned(), t).is_some() {
                    return Err(syntax(lineno, format!("duplicate time for `{node}`")));
                }
            }
        }
    }

    let props = props.unwrap_or_default();
    let want = 1usize << props.len();
    if scenario_blocks.len() != want {
        return Err(syntax(
            0,
            format!(
                "strategy covers {} scenarios, the proposition set has {want}",
                scenario_blocks.len()
            ),
        ));
    }

    // Order blocks by scenario index derived from their labels.
    let mut schedules = vec![None; want];
    for (lineno, label, times) in scenario_blocks {
        let mut index: u64 = 0;
        if label.literals().len() != props.len() {
            return Err(syntax(
                lineno,
                "scenario label must assign every proposition",
            ));
        }
        for (j, p) in props.iter().enumerate() {
            let lit = label
                .literals()
                .iter()
                .find(|l| l.proposition == *p)
                .ok_or_else(|| syntax(lineno, format!("scenario label missing `{p}`")))?;
            if !lit.negated {
                index |= 1 << (props.len() - 1 - j);
            }
        }
        let slot = &mut schedules[index as usize];
        if slot.is_some() {
            return Err(syntax(lineno, "duplicate scenario"));
        }
        *slot = Some(times);
    }
    let schedules = schedules
        .into_iter()
        .map(|s| s.expect("count checked"))
        .collect();
    ExecutionStrategy::new(props, schedules)
        .map_err(|e| syntax(0, e.to_string()))
}

/// Renders a strategy; scenarios in enumeration order, nodes sorted.
pub fn serialize_strategy(sigma: &ExecutionStrategy) -> String {
    let mut out = String::from("strategy\n");
    if !sigma.propositions().is_empty() {
        let _ = writeln!(out, "props {}", sigma.propositions().join(" "));
    }
    let props = sigma.propositions();
    for index in 0..sigma.scenario_count() {
        let mut lits = Vec::new();
        for (j, p) in props.iter().enumerate() {
            let truth = index >> (props.len() - 1 - j) & 1 == 1;
            lits.push(if truth {
                p.clone()
            } else {
                format!("-{p}")
            });
        }
        if lits.is_empty() {
            let _ = writeln!(out, "scenario");
        } else {
            let _ = writeln!(out, "scenario {}", lits.join(" "));
        }
        for (node, t) in sigma.schedule(index) {
            let _ = writeln!(out, "{node} {}", format_ratio(*t));
        }
    }
    out
}
