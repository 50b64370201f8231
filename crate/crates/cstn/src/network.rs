//! The conditional simple temporal network model.
//!
//! A network couples events and binary difference constraints with
//! conjunctive labels over a proposition set; each proposition is tied to a
//! unique observation event that reveals its value at execution time.
//! Structural soundness (unique ids, the observation bijection, known
//! propositions) is enforced at construction; the well-definedness rules
//! WD1-WD3 are checked separately by [`Cstn::validate_wd`] and reported as
//! data rather than errors, so tooling can display all of them at once.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use thiserror::Error;

use crate::label::{is_valid_identifier, Label, LabelMask};
use crate::scenario::{self, Scenario};
use crate::stn::Stn;

/// Default ceiling on the number of expanded nodes (scenarios x events).
/// The expansion is exponential in the proposition count by design; past this
/// point the tools fail loudly instead of exhausting memory.
pub const DEFAULT_EXPANSION_NODE_CAP: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CstnError {
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("duplicate proposition `{0}`")]
    DuplicateProposition(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNodeId(String),
    #[error("node `{node}` observes unknown proposition `{proposition}`")]
    UnknownObservedProposition { node: String, proposition: String },
    #[error("proposition `{proposition}` observed by both `{first}` and `{second}`")]
    DuplicateObserver {
        proposition: String,
        first: String,
        second: String,
    },
    #[error("proposition `{0}` has no observation event")]
    MissingObserver(String),
    #[error("label of node `{node}` mentions unknown proposition `{proposition}`")]
    UnknownPropositionInNodeLabel { node: String, proposition: String },
    #[error("constraint {index} mentions unknown node `{node}`")]
    UnknownNodeInConstraint { index: usize, node: String },
    #[error("label of constraint {index} mentions unknown proposition `{proposition}`")]
    UnknownPropositionInConstraintLabel { index: usize, proposition: String },
    #[error("proposition count {0} exceeds the supported maximum of 60")]
    TooManyPropositions(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpansionError {
    #[error("expansion would create {needed} nodes, capacity is {cap}")]
    Capacity { needed: u64, cap: u64 },
}

/// An event node; `observes` is present exactly for observation events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CstnNode {
    pub id: String,
    pub label: Label,
    pub observes: Option<String>,
}

impl CstnNode {
    pub fn event(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: Label::empty(),
            observes: None,
        }
    }

    pub fn observation(id: impl Into<String>, proposition: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: Label::empty(),
            observes: Some(proposition.into()),
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = label;
        self
    }
}

/// A labeled difference constraint `v - u <= weight` under `label`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LabeledConstraint {
    pub u: String,
    pub v: String,
    pub weight: i64,
    pub label: Label,
}

impl LabeledConstraint {
    pub fn new(u: impl Into<String>, v: impl Into<String>, weight: i64, label: Label) -> Self {
        Self {
            u: u.into(),
            v: v.into(),
            weight,
            label,
        }
    }
}

impl fmt::Display for LabeledConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} - {} <= {}", self.v, self.u, self.weight)?;
        if !self.label.is_empty() {
            write!(f, " [{}]", self.label)?;
        }
        Ok(())
    }
}

/// The well-definedness rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WdRule {
    /// Constraint labels subsume both endpoint labels.
    Wd1,
    /// A node whose label mentions `p` is preceded by the observation of `p`.
    Wd2,
    /// Constraint labels mentioning `p` subsume the observer's label.
    Wd3,
}

impl fmt::Display for WdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WdRule::Wd1 => write!(f, "WD1"),
            WdRule::Wd2 => write!(f, "WD2"),
            WdRule::Wd3 => write!(f, "WD3"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// The entity a violation refers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entity {
    Node(String),
    Constraint(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: WdRule,
    pub severity: Severity,
    pub entity: Entity,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity {
            Severity::Error => "violation",
            Severity::Warning => "warning",
        };
        match &self.entity {
            Entity::Node(id) => write!(f, "{} {kind} at node `{id}`: {}", self.rule, self.message),
            Entity::Constraint(i) => {
                write!(f, "{} {kind} at constraint {i}: {}", self.rule, self.message)
            }
        }
    }
}

/// Name of an event's copy in the scenario expansion.
pub fn expanded_id(node: &str, scenario_index: u64) -> String {
    format!("{node}@{scenario_index}")
}

/// A structurally sound conditional network.
#[derive(Clone, Debug)]
pub struct Cstn {
    props: Arc<[String]>,
    nodes: Vec<CstnNode>,
    constraints: Vec<LabeledConstraint>,
    // Derived lookups, fixed at construction.
    node_index: BTreeMap<String, u32>,
    prop_index: BTreeMap<String, u32>,
    observer_of: Vec<u32>,
    node_masks: Vec<LabelMask>,
    cons_masks: Vec<LabelMask>,
    cons_endpoints: Vec<(u32, u32)>,
}

impl Cstn {
    pub fn new(
        props: Vec<String>,
        nodes: Vec<CstnNode>,
        constraints: Vec<LabeledConstraint>,
    ) -> Result<Self, CstnError> {
        if props.len() > 60 {
            return Err(CstnError::TooManyPropositions(props.len()));
        }
        let mut prop_index = BTreeMap::new();
        for (j, p) in props.iter().enumerate() {
            if !is_valid_identifier(p) {
                return Err(CstnError::InvalidIdentifier(p.clone()));
            }
            if prop_index.insert(p.clone(), j as u32).is_some() {
                return Err(CstnError::DuplicateProposition(p.clone()));
            }
        }

        let mut node_index = BTreeMap::new();
        let mut observer_of = vec![u32::MAX; props.len()];
        for (i, node) in nodes.iter().enumerate() {
            if !is_valid_identifier(&node.id) {
                return Err(CstnError::InvalidIdentifier(node.id.clone()));
            }
            if node_index.insert(node.id.clone(), i as u32).is_some() {
                return Err(CstnError::DuplicateNodeId(node.id.clone()));
            }
            if let Some(p) = &node.observes {
                let j = *prop_index.get(p).ok_or_else(|| {
                    CstnError::UnknownObservedProposition {
                        node: node.id.clone(),
                        proposition: p.clone(),
                    }
                })?;
                if observer_of[j as usize] != u32::MAX {
                    return Err(CstnError::DuplicateObserver {
                        proposition: p.clone(),
                        first: nodes[observer_of[j as usize] as usize].id.clone(),
                        second: node.id.clone(),
                    });
                }
                observer_of[j as usize] = i as u32;
            }
            for p in node.label.propositions() {
                if !prop_index.contains_key(p) {
                    return Err(CstnError::UnknownPropositionInNodeLabel {
                        node: node.id.clone(),
                        proposition: p.to_owned(),
                    });
                }
            }
        }
        for (j, &o) in observer_of.iter().enumerate() {
            if o == u32::MAX {
                return Err(CstnError::MissingObserver(props[j].clone()));
            }
        }

        let mut cons_endpoints = Vec::with_capacity(constraints.len());
        for (i, c) in constraints.iter().enumerate() {
            let u = *node_index
                .get(&c.u)
                .ok_or_else(|| CstnError::UnknownNodeInConstraint {
                    index: i,
                    node: c.u.clone(),
                })?;
            let v = *node_index
                .get(&c.v)
                .ok_or_else(|| CstnError::UnknownNodeInConstraint {
                    index: i,
                    node: c.v.clone(),
                })?;
            for p in c.label.propositions() {
                if !prop_index.contains_key(p) {
                    return Err(CstnError::UnknownPropositionInConstraintLabel {
                        index: i,
                        proposition: p.to_owned(),
                    });
                }
            }
            cons_endpoints.push((u, v));
        }

        let mask_of = |label: &Label| {
            let mut m = LabelMask::default();
            for lit in label.literals() {
                let j = prop_index[&lit.proposition];
                if lit.negated {
                    m.neg |= 1 << j;
                } else {
                    m.pos |= 1 << j;
                }
            }
            m
        };
        let node_masks = nodes.iter().map(|n| mask_of(&n.label)).collect();
        let cons_masks = constraints.iter().map(|c| mask_of(&c.label)).collect();

        Ok(Self {
            props: props.into(),
            nodes,
            constraints,
            node_index,
            prop_index,
            observer_of,
            node_masks,
            cons_masks,
            cons_endpoints,
        })
    }

    pub fn propositions(&self) -> &[String] {
        &self.props
    }

    pub fn nodes(&self) -> &[CstnNode] {
        &self.nodes
    }

    pub fn constraints(&self) -> &[LabeledConstraint] {
        &self.constraints
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.node_index.get(name).map(|&i| i as usize)
    }

    /// The observation event of a proposition.
    pub fn observer(&self, proposition: &str) -> Option<&CstnNode> {
        let j = *self.prop_index.get(proposition)?;
        Some(&self.nodes[self.observer_of[j as usize] as usize])
    }

    pub(crate) fn constraint_mask(&self, idx: usize) -> LabelMask {
        self.cons_masks[idx]
    }

    pub(crate) fn constraint_endpoints(&self, idx: usize) -> (usize, usize) {
        let (u, v) = self.cons_endpoints[idx];
        (u as usize, v as usize)
    }

    pub fn scenario_count(&self) -> u64 {
        1u64 << self.props.len()
    }

    /// All scenarios in enumeration order.
    pub fn scenarios(&self) -> Vec<Scenario> {
        scenario::enumerate(&self.props)
    }

    pub fn scenario(&self, index: u64) -> Scenario {
        debug_assert!(index < self.scenario_count());
        Scenario::from_index(self.props.clone(), index)
    }

    pub fn max_abs_weight(&self) -> i64 {
        self.constraints
            .iter()
            .map(|c| c.weight.abs())
            .max()
            .unwrap_or(0)
    }

    /// Checks the well-definedness rules. An empty result (or warnings only)
    /// means the network is accepted by the solving operations.
    pub fn validate_wd(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        // WD1: every constraint label subsumes both endpoint labels.
        // (Label satisfiability is guaranteed by construction.)
        for (i, c) in self.constraints.iter().enumerate() {
            let (u, v) = self.constraint_endpoints(i);
            for (end, node) in [(u, &c.u), (v, &c.v)] {
                if !c.label.subsumes(&self.nodes[end].label) {
                    out.push(Violation {
                        rule: WdRule::Wd1,
                        severity: Severity::Error,
                        entity: Entity::Constraint(i),
                        message: format!(
                            "label `{}` does not subsume label `{}` of endpoint `{}`",
                            c.label, self.nodes[end].label, node
                        ),
                    });
                }
            }
        }

        // WD2: a node mentioning p subsumes the observer's label and is
        // strictly preceded by the observation. Input weights are integral,
        // so "strictly before" means some constraint `O_p - u <= w` with
        // w <= -1 whose label is subsumed by the node's label.
        for (ni, node) in self.nodes.iter().enumerate() {
            for lit in node.label.literals() {
                let j = self.prop_index[&lit.proposition] as usize;
                let obs = self.observer_of[j] as usize;
                if !node.label.subsumes(&self.nodes[obs].label) {
                    out.push(Violation {
                        rule: WdRule::Wd2,
                        severity: Severity::Error,
                        entity: Entity::Node(node.id.clone()),
                        message: format!(
                            "label `{}` does not subsume label `{}` of observer `{}`",
                            node.label, self.nodes[obs].label, self.nodes[obs].id
                        ),
                    });
                }
                let mut lenient = false;
                let mut exact = false;
                for (ci, c) in self.constraints.iter().enumerate() {
                    let (cu, cv) = self.constraint_endpoints(ci);
                    if cu == ni && cv == obs && c.weight <= -1 && node.label.subsumes(&c.label) {
                        lenient = true;
                        if c.label == node.label {
                            exact = true;
                        }
                    }
                }
                if !lenient {
                    out.push(Violation {
                        rule: WdRule::Wd2,
                        severity: Severity::Error,
                        entity: Entity::Node(node.id.clone()),
                        message: format!(
                            "no constraint places `{}` strictly before `{}` (needs `{} - {} <= -1`)",
                            self.nodes[obs].id, node.id, self.nodes[obs].id, node.id
                        ),
                    });
                } else if !exact {
                    out.push(Violation {
                        rule: WdRule::Wd2,
                        severity: Severity::Warning,
                        entity: Entity::Node(node.id.clone()),
                        message: format!(
                            "`{}` precedes `{}` only via a constraint whose label differs from `{}`",
                            self.nodes[obs].id, node.id, node.label
                        ),
                    });
                }
            }
        }

        // WD3: constraint labels mentioning p subsume the observer's label.
        for (i, c) in self.constraints.iter().enumerate() {
            for lit in c.label.literals() {
                let j = self.prop_index[&lit.proposition] as usize;
                let obs = self.observer_of[j] as usize;
                if !c.label.subsumes(&self.nodes[obs].label) {
                    out.push(Violation {
                        rule: WdRule::Wd3,
                        severity: Severity::Error,
                        entity: Entity::Constraint(i),
                        message: format!(
                            "label `{}` mentions `{}` but does not subsume label `{}` of `{}`",
                            c.label, lit.proposition, self.nodes[obs].label, self.nodes[obs].id
                        ),
                    });
                }
            }
        }

        out
    }

    /// True when no error-severity rule is violated.
    pub fn is_well_defined(&self) -> bool {
        self.validate_wd()
            .iter()
            .all(|v| v.severity != Severity::Error)
    }

    pub(crate) fn node_active(&self, node: usize, scenario_mask: u64) -> bool {
        self.node_masks[node].holds_under(scenario_mask)
    }

    /// The restriction of the network to one scenario: the STN of nodes and
    /// constraints whose labels hold.
    pub fn restrict(&self, s: &Scenario) -> Stn {
        let mask = s.mask();
        let mut stn = Stn::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if self.node_masks[i].holds_under(mask) {
                stn.add_node(node.id.clone()).expect("ids unique");
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if self.cons_masks[i].holds_under(mask) {
                stn.add_arc(&c.u, &c.v, Rational64::from_integer(c.weight))
                    .expect("well-defined endpoints are active");
            }
        }
        stn
    }

    /// Observation events active in `s1` where the two scenarios disagree.
    /// Not symmetric in its arguments.
    pub fn difference_set(&self, s1: &Scenario, s2: &Scenario) -> BTreeSet<String> {
        self.difference_indices(s1.mask(), s2.mask())
            .into_iter()
            .map(|i| self.nodes[i].id.clone())
            .collect()
    }

    /// Difference set as node indices, in proposition order.
    pub(crate) fn difference_indices(&self, mask1: u64, mask2: u64) -> Vec<usize> {
        let mut out = Vec::new();
        let mut diff = mask1 ^ mask2;
        while diff != 0 {
            let j = diff.trailing_zeros() as usize;
            diff &= diff - 1;
            let obs = self.observer_of[j] as usize;
            if self.node_masks[obs].holds_under(mask1) {
                out.push(obs);
            }
        }
        out
    }

    /// Disjoint union of all per-scenario restrictions, one copy per
    /// scenario, with nodes renamed `<id>@<scenario index>`.
    pub fn expansion(&self) -> Result<Stn, ExpansionError> {
        self.expansion_with_cap(DEFAULT_EXPANSION_NODE_CAP)
    }

    pub fn expansion_with_cap(&self, cap: u64) -> Result<Stn, ExpansionError> {
        let needed = self
            .scenario_count()
            .saturating_mul(self.nodes.len() as u64);
        if needed > cap {
            return Err(ExpansionError::Capacity { needed, cap });
        }
        let mut stn = Stn::new();
        for si in 0..self.scenario_count() {
            let mask = scenario::mask_of_index(si, self.props.len());
            for (i, node) in self.nodes.iter().enumerate() {
                if self.node_masks[i].holds_under(mask) {
                    stn.add_node(expanded_id(&node.id, si)).expect("unique");
                }
            }
            for (i, c) in self.constraints.iter().enumerate() {
                if self.cons_masks[i].holds_under(mask) {
                    stn.add_arc(
                        &expanded_id(&c.u, si),
                        &expanded_id(&c.v, si),
                        Rational64::from_integer(c.weight),
                    )
                    .expect("endpoints active under WD1");
                }
            }
        }
        Ok(stn)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Literal;

    /// The two-observation five-event network used throughout the docs.
    pub(crate) fn sample_network() -> Cstn {
        let l = |s: &str| Label::parse(s).unwrap();
        Cstn::new(
            vec!["p".into(), "q".into()],
            vec![
                CstnNode::event("A"),
                CstnNode::event("B"),
                CstnNode::event("C"),
                CstnNode::observation("Op", "p"),
                CstnNode::observation("Oq", "q"),
            ],
            vec![
                LabeledConstraint::new("A", "C", 10, Label::empty()),
                LabeledConstraint::new("C", "A", -10, Label::empty()),
                LabeledConstraint::new("A", "B", 3, l("p -q")),
                LabeledConstraint::new("B", "A", 0, Label::empty()),
                LabeledConstraint::new("A", "Op", 5, Label::empty()),
                LabeledConstraint::new("Op", "A", 0, Label::empty()),
                LabeledConstraint::new("A", "Oq", 9, Label::empty()),
                LabeledConstraint::new("Oq", "A", 0, Label::empty()),
                LabeledConstraint::new("B", "C", 2, l("q")),
                LabeledConstraint::new("Op", "C", 10, Label::empty()),
                LabeledConstraint::new("Oq", "C", 1, l("-p")),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sample_is_well_defined() {
        let g = sample_network();
        assert_eq!(g.validate_wd(), vec![]);
        assert!(g.is_well_defined());
    }

    #[test]
    fn wd2_missing_precedence_detected() {
        let g = Cstn::new(
            vec!["p".into()],
            vec![
                CstnNode::observation("Op", "p"),
                CstnNode::event("B").with_label(Label::parse("p").unwrap()),
            ],
            vec![],
        )
        .unwrap();
        let viols = g.validate_wd();
        assert_eq!(viols.len(), 1);
        assert_eq!(viols[0].rule, WdRule::Wd2);
        assert_eq!(viols[0].severity, Severity::Error);
        assert!(!g.is_well_defined());
    }

    #[test]
    fn wd2_lenient_label_warns_alongside_wd1() {
        // The precedence constraint exists but carries a broader label: the
        // WD2 reading is satisfied leniently (warning), while the same broad
        // label breaks WD1's subsumption of the endpoint label. A network
        // where the two rules both pass necessarily uses the exact label.
        let g = Cstn::new(
            vec!["p".into()],
            vec![
                CstnNode::observation("Op", "p"),
                CstnNode::event("B").with_label(Label::parse("p").unwrap()),
            ],
            vec![LabeledConstraint::new("B", "Op", -1, Label::empty())],
        )
        .unwrap();
        let viols = g.validate_wd();
        assert_eq!(viols.len(), 2);
        assert!(viols
            .iter()
            .any(|v| v.rule == WdRule::Wd2 && v.severity == Severity::Warning));
        assert!(viols
            .iter()
            .any(|v| v.rule == WdRule::Wd1 && v.severity == Severity::Error));

        // With the exact label both rules pass cleanly.
        let exact = Cstn::new(
            vec!["p".into()],
            vec![
                CstnNode::observation("Op", "p"),
                CstnNode::event("B").with_label(Label::parse("p").unwrap()),
            ],
            vec![LabeledConstraint::new("B", "Op", -1, Label::parse("p").unwrap())],
        )
        .unwrap();
        assert_eq!(exact.validate_wd(), vec![]);
    }

    #[test]
    fn wd1_subsumption_failure_detected() {
        let g = Cstn::new(
            vec!["p".into()],
            vec![
                CstnNode::observation("Op", "p"),
                CstnNode::event("B").with_label(Label::parse("p").unwrap()),
            ],
            vec![
                LabeledConstraint::new("B", "Op", -1, Label::parse("p").unwrap()),
                // Label does not subsume B's label `p`.
                LabeledConstraint::new("Op", "B", 4, Label::empty()),
            ],
        )
        .unwrap();
        let viols = g.validate_wd();
        assert!(viols
            .iter()
            .any(|v| v.rule == WdRule::Wd1 && v.severity == Severity::Error));
    }

    #[test]
    fn wd3_detected() {
        let g = Cstn::new(
            vec!["p".into()],
            vec![
                CstnNode::observation("Op", "p").with_label(Label::parse("p").unwrap()),
                CstnNode::event("B"),
                CstnNode::event("C"),
            ],
            vec![LabeledConstraint::new("B", "C", 4, Label::parse("-p").unwrap())],
        )
        .unwrap();
        // Op's own label `p` needs WD2 arcs too, but the WD3 failure must be
        // reported against the B-C constraint.
        assert!(g
            .validate_wd()
            .iter()
            .any(|v| v.rule == WdRule::Wd3 && matches!(v.entity, Entity::Constraint(0))));
    }

    #[test]
    fn observation_bijection_enforced() {
        let err = Cstn::new(
            vec!["p".into()],
            vec![
                CstnNode::observation("O1", "p"),
                CstnNode::observation("O2", "p"),
            ],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, CstnError::DuplicateObserver { .. }));

        let err = Cstn::new(vec!["p".into()], vec![CstnNode::event("A")], vec![]).unwrap_err();
        assert!(matches!(err, CstnError::MissingObserver(_)));
    }

    #[test]
    fn restriction_both_false() {
        let g = sample_network();
        let s = g.scenario(0); // -p -q
        let stn = g.restrict(&s);
        assert_eq!(stn.node_count(), 5);
        assert_eq!(stn.arc_count(), 9);
        // The -p arc stays, the p -q and q arcs drop.
        assert!(stn.arcs().any(|(u, v, w)| u == "Oq"
            && v == "C"
            && w == Rational64::from_integer(1)));
        assert!(!stn.arcs().any(|(u, v, _)| u == "A" && v == "B"));
        assert!(!stn.arcs().any(|(u, v, _)| u == "B" && v == "C"));
    }

    #[test]
    fn restriction_both_true() {
        let g = sample_network();
        let s = g.scenario(3); // p q
        let stn = g.restrict(&s);
        assert_eq!(stn.arc_count(), 9);
        assert!(stn.arcs().any(|(u, v, _)| u == "B" && v == "C"));
        assert!(!stn.arcs().any(|(u, v, _)| u == "A" && v == "B"));
        assert!(!stn.arcs().any(|(u, v, _)| u == "Oq" && v == "C"));
    }

    #[test]
    fn restriction_endpoints_always_active() {
        let g = sample_network();
        for s in g.scenarios() {
            let stn = g.restrict(&s);
            for (u, v, _) in stn.arcs() {
                assert!(stn.contains_node(u));
                assert!(stn.contains_node(v));
            }
        }
    }

    #[test]
    fn difference_set_examples() {
        let g = sample_network();
        let s1 = g.scenario(0); // -p -q
        let s2 = g.scenario(1); // -p  q
        assert_eq!(
            g.difference_set(&s1, &s2),
            BTreeSet::from(["Oq".to_owned()])
        );
        assert!(g.difference_set(&s1, &s1).is_empty());
        // Differing in both propositions.
        let s4 = g.scenario(3);
        assert_eq!(
            g.difference_set(&s1, &s4),
            BTreeSet::from(["Op".to_owned(), "Oq".to_owned()])
        );
    }

    #[test]
    fn expansion_four_copies() {
        let g = sample_network();
        let ex = g.expansion().unwrap();
        assert_eq!(ex.node_count(), 20);
        // Eight unlabeled constraints are active everywhere; -p adds one in
        // two scenarios, q in two, p -q in one.
        assert_eq!(ex.arc_count(), 9 + 10 + 9 + 9);
        assert!(ex.contains_node("A@0"));
        assert!(ex.contains_node("Oq@3"));
    }

    #[test]
    fn expansion_without_propositions_is_the_network_itself() {
        let g = Cstn::new(
            vec![],
            vec![CstnNode::event("A"), CstnNode::event("B")],
            vec![LabeledConstraint::new("A", "B", 4, Label::empty())],
        )
        .unwrap();
        let ex = g.expansion().unwrap();
        assert_eq!(ex.node_count(), 2);
        assert_eq!(ex.arc_count(), 1);
        assert!(ex.contains_node("A@0"));
    }

    #[test]
    fn expansion_cap_is_enforced() {
        let g = sample_network();
        let err = g.expansion_with_cap(10).unwrap_err();
        assert_eq!(err, ExpansionError::Capacity { needed: 20, cap: 10 });
    }

    #[test]
    fn expansion_node_count_matches_restrictions() {
        let l = |s: &str| Label::parse(s).unwrap();
        let g = Cstn::new(
            vec!["p".into()],
            vec![
                CstnNode::observation("Op", "p"),
                CstnNode::event("B").with_label(l("p")),
            ],
            vec![LabeledConstraint::new("B", "Op", -1, l("p"))],
        )
        .unwrap();
        let total: usize = g.scenarios().iter().map(|s| g.restrict(s).node_count()).sum();
        assert_eq!(g.expansion().unwrap().node_count(), total);
        assert_eq!(total, 3); // B is absent when p is false
    }

    #[test]
    fn subsumption_implies_consistency() {
        let cases = ["", "p", "-p", "p q", "p -q", "-p -q", "q"];
        for a in cases {
            for b in cases {
                let (la, lb) = (Label::parse(a).unwrap(), Label::parse(b).unwrap());
                if la.subsumes(&lb) {
                    assert!(la.consistent_with(&lb), "{a} vs {b}");
                }
            }
        }
    }
}
