//! Dynamic-consistency checking.
//!
//! The pipeline: expand the network into one STN copy per scenario, add for
//! every ordered scenario pair and shared event a reaction hyperarc saying
//! "this event agrees across the two scenarios unless some distinguishing
//! observation happened at least `eps` earlier", scale the rational reaction
//! bound away, and decide consistency of the resulting hyper network as an
//! energy game. A feasible schedule of the expansion *is* an execution
//! strategy; every strategy emitted here is re-verified before being
//! returned, so a positive verdict always carries a checked witness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use num_traits::Zero;
use thiserror::Error;

use crate::hytn::{Hytn, HytnSchedule, HytnWeight};
use crate::mpg::{hytn_to_mpg, solve_energy, LiftStats};
use crate::network::{expanded_id, Cstn, ExpansionError, Severity, Violation, DEFAULT_EXPANSION_NODE_CAP};
use crate::rational::EpsilonRational;
use crate::scenario::{mask_of_index, Scenario};
use crate::stn::Stn;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("strategy propositions do not match the network")]
    PropositionMismatch,
    #[error("strategy has {got} scenarios, network has {want}")]
    WrongScenarioCount { got: u64, want: u64 },
    #[error("scenario `{scenario}`: domain mismatch (missing: {missing:?}, extra: {extra:?})")]
    DomainMismatch {
        scenario: String,
        missing: Vec<String>,
        extra: Vec<String>,
    },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("network is not well defined: {}", format_violations(.0))]
    InvalidNetwork(Vec<Violation>),
    #[error(transparent)]
    Capacity(#[from] ExpansionError),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("input: {0}")]
    Input(String),
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// An execution strategy: one schedule per scenario, each covering exactly
/// the events active in that scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionStrategy {
    props: Arc<[String]>,
    schedules: Vec<BTreeMap<String, Rational64>>,
}

impl ExecutionStrategy {
    pub fn new(
        props: Vec<String>,
        schedules: Vec<BTreeMap<String, Rational64>>,
    ) -> Result<Self, StrategyError> {
        let want = 1u64 << props.len();
        if schedules.len() as u64 != want {
            return Err(StrategyError::WrongScenarioCount {
                got: schedules.len() as u64,
                want,
            });
        }
        Ok(Self {
            props: props.into(),
            schedules,
        })
    }

    pub fn propositions(&self) -> &[String] {
        &self.props
    }

    pub fn scenario_count(&self) -> u64 {
        self.schedules.len() as u64
    }

    pub fn schedule(&self, scenario_index: u64) -> &BTreeMap<String, Rational64> {
        &self.schedules[scenario_index as usize]
    }

    pub fn schedules(&self) -> &[BTreeMap<String, Rational64>] {
        &self.schedules
    }

    pub fn schedule_for(&self, s: &Scenario) -> &BTreeMap<String, Rational64> {
        self.schedule(s.index())
    }

    pub fn time(&self, scenario_index: u64, node: &str) -> Option<Rational64> {
        self.schedules[scenario_index as usize].get(node).copied()
    }
}

/// One verified property with an optional counterexample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub ok: bool,
    pub detail: Option<String>,
}

impl Check {
    fn pass() -> Self {
        Self {
            ok: true,
            detail: None,
        }
    }

    fn fail(detail: String) -> Self {
        Self {
            ok: false,
            detail: Some(detail),
        }
    }
}

/// Result of [`verify_strategy`]: viability, the history-based dynamicity
/// condition, and (when a reaction bound is supplied) the reaction form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub viable: Check,
    pub dynamic: Check,
    pub eps_dynamic: Option<Check>,
}

impl VerifyReport {
    pub fn all_ok(&self) -> bool {
        self.viable.ok && self.dynamic.ok && self.eps_dynamic.as_ref().map_or(true, |c| c.ok)
    }
}

/// Checks a strategy against a network:
///
/// * viable — every restricted difference constraint holds exactly;
/// * dynamic — for every scenario pair and shared event, if no
///   distinguishing observation strictly precedes the event, the two
///   scenarios schedule it at the same time;
/// * eps-dynamic (when `eps` is given) — the event may only diverge from the
///   other scenario at least `eps` after some distinguishing observation.
pub fn verify_strategy(
    g: &Cstn,
    sigma: &ExecutionStrategy,
    eps: Option<&EpsilonRational>,
) -> Result<VerifyReport, StrategyError> {
    if sigma.propositions() != g.propositions() {
        return Err(StrategyError::PropositionMismatch);
    }
    let s_count = g.scenario_count();
    if sigma.scenario_count() != s_count {
        return Err(StrategyError::WrongScenarioCount {
            got: sigma.scenario_count(),
            want: s_count,
        });
    }

    let v_count = g.node_count();
    let p_count = g.propositions().len();
    let masks: Vec<u64> = (0..s_count).map(|i| mask_of_index(i, p_count)).collect();

    // Dense times, validated to match each restriction's node set exactly.
    let mut times: Vec<Vec<Option<Rational64>>> = vec![vec![None; v_count]; s_count as usize];
    for si in 0..s_count as usize {
        let sched = sigma.schedule(si as u64);
        let mut missing = Vec::new();
        for (i, node) in g.nodes().iter().enumerate() {
            if g.node_active(i, masks[si]) {
                match sched.get(&node.id) {
                    Some(&t) => times[si][i] = Some(t),
                    None => missing.push(node.id.clone()),
                }
            }
        }
        let extra: Vec<String> = sched
            .keys()
            .filter(|k| {
                g.node_id(k)
                    .map_or(true, |i| !g.node_active(i, masks[si]))
            })
            .cloned()
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(StrategyError::DomainMismatch {
                scenario: g.scenario(si as u64).label().to_string(),
                missing,
                extra,
            });
        }
    }

    // Viability: exact check of every active constraint.
    let mut viable = Check::pass();
    'viability: for si in 0..s_count as usize {
        for (ci, c) in g.constraints().iter().enumerate() {
            if !g.constraint_mask(ci).holds_under(masks[si]) {
                continue;
            }
            let (ui, vi) = g.constraint_endpoints(ci);
            let (tu, tv) = match (times[si][ui], times[si][vi]) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    viable = Check::fail(format!(
                        "scenario `{}`: constraint `{}` has an unscheduled endpoint",
                        g.scenario(si as u64).label(),
                        c
                    ));
                    break 'viability;
                }
            };
            if tv > tu + Rational64::from_integer(c.weight) {
                viable = Check::fail(format!(
                    "scenario `{}`: `{}` violated with {} = {}, {} = {}",
                    g.scenario(si as u64).label(),
                    c,
                    c.u,
                    tu,
                    c.v,
                    tv
                ));
                break 'viability;
            }
        }
    }

    // Dynamicity and the reaction-bounded form, over ordered scenario pairs.
    let mut dynamic = Check::pass();
    let mut eps_dynamic = eps.map(|_| Check::pass());
    let eps_ratio = eps.map(|e| e.as_ratio());
    for s1 in 0..s_count as usize {
        for s2 in 0..s_count as usize {
            if s1 == s2 {
                continue;
            }
            let delta = g.difference_indices(masks[s1], masks[s2]);
            for u in 0..v_count {
                let (t1, t2) = match (times[s1][u], times[s2][u]) {
                    (Some(a), Some(b)) => (a, b),
                    _ => continue,
                };
                if dynamic.ok {
                    let history_consistent = delta
                        .iter()
                        .all(|&d| t1 <= times[s1][d].expect("difference set is active"));
                    if history_consistent && t1 != t2 {
                        dynamic = Check::fail(format!(
                            "scenarios `{}` / `{}`, event `{}`: no distinguishing observation \
                             strictly precedes it, yet {} != {}",
                            g.scenario(s1 as u64).label(),
                            g.scenario(s2 as u64).label(),
                            g.nodes()[u].id,
                            t1,
                            t2
                        ));
                    }
                }
                if let (Some(check), Some(e)) = (&mut eps_dynamic, eps_ratio) {
                    if check.ok {
                        let mut bound = t2;
                        for &d in &delta {
                            let cand = times[s1][d].expect("difference set is active") + e;
                            if cand < bound {
                                bound = cand;
                            }
                        }
                        if t1 < bound {
                            *check = Check::fail(format!(
                                "scenarios `{}` / `{}`, event `{}`: {} is below the reaction \
                                 bound {}",
                                g.scenario(s1 as u64).label(),
                                g.scenario(s2 as u64).label(),
                                g.nodes()[u].id,
                                t1,
                                bound
                            ));
                        }
                    }
                }
            }
        }
    }

    Ok(VerifyReport {
        viable,
        dynamic,
        eps_dynamic,
    })
}

/// Node roles in the reaction-enriched expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum HNodeKind {
    /// Copy of an event in one scenario.
    Event { node: u32, scenario: u32 },
    /// Helper introduced to encode an unsatisfiable self-constraint.
    Aux,
}

/// The scenario expansion enriched with reaction hyperarcs, with a lookup
/// from (event, scenario) to expansion node.
pub struct HEpsilon {
    hytn: Hytn<Rational64>,
    epsilon: EpsilonRational,
    scenario_count: u64,
    cstn_nodes: usize,
    lookup: Vec<u32>,
    kinds: Vec<HNodeKind>,
    standard_arcs: usize,
    reaction_arcs: usize,
    aux_nodes: usize,
}

impl HEpsilon {
    pub fn hytn(&self) -> &Hytn<Rational64> {
        &self.hytn
    }

    pub fn epsilon(&self) -> &EpsilonRational {
        &self.epsilon
    }

    pub fn scenario_count(&self) -> u64 {
        self.scenario_count
    }

    /// Expansion nodes that are event copies (excludes helpers).
    pub fn event_count(&self) -> usize {
        self.kinds
            .iter()
            .filter(|k| matches!(k, HNodeKind::Event { .. }))
            .count()
    }

    pub fn aux_count(&self) -> usize {
        self.aux_nodes
    }

    /// Hyperarcs coming from expanded difference constraints.
    pub fn standard_arc_count(&self) -> usize {
        self.standard_arcs
    }

    /// Hyperarcs tying scenario pairs together.
    pub fn reaction_arc_count(&self) -> usize {
        self.reaction_arcs
    }

    pub fn expanded_index(&self, node: usize, scenario: u64) -> Option<usize> {
        let slot = self.lookup[scenario as usize * self.cstn_nodes + node];
        (slot != u32::MAX).then_some(slot as usize)
    }

    /// Iterates (event index, scenario index, expansion node index).
    pub fn events(&self) -> impl Iterator<Item = (usize, u64, usize)> + '_ {
        self.kinds.iter().enumerate().filter_map(|(i, k)| match k {
            HNodeKind::Event { node, scenario } => Some((*node as usize, *scenario as u64, i)),
            HNodeKind::Aux => None,
        })
    }
}

/// Builds the reaction-enriched expansion of a well-defined network.
///
/// Nodes are the expansion copies `id@scenario`. Hyperarcs are (a) every
/// restricted difference constraint as a standard arc in its scenario copy,
/// and (b) for every ordered scenario pair `(s1, s2)` and event `u` active in
/// both, an arc with tail `u@s1`, a 0-weight head `u@s2`, and a `-eps` head
/// at each s1-copy of an observation where the scenarios differ. Satisfying
/// (b) is exactly the reaction-bounded dynamicity condition.
///
/// Two degenerate inputs get special treatment: a self-constraint with
/// nonnegative weight is a tautology and is dropped, and one with negative
/// weight (unsatisfiable whenever its label holds) is encoded through a
/// helper node carrying an equivalent two-arc negative cycle. An event that
/// observes a differing proposition is itself never added as a reaction head:
/// that disjunct could never be satisfied.
pub fn construct_h_epsilon(g: &Cstn, eps: &EpsilonRational) -> Result<HEpsilon, SolveError> {
    construct_h_epsilon_with_cap(g, eps, DEFAULT_EXPANSION_NODE_CAP)
}

pub fn construct_h_epsilon_with_cap(
    g: &Cstn,
    eps: &EpsilonRational,
    cap: u64,
) -> Result<HEpsilon, SolveError> {
    let v_count = g.node_count();
    let p_count = g.propositions().len();
    let s_count = g.scenario_count();
    let needed = s_count.saturating_mul(v_count as u64);
    if needed > cap {
        return Err(ExpansionError::Capacity { needed, cap }.into());
    }

    let masks: Vec<u64> = (0..s_count).map(|i| mask_of_index(i, p_count)).collect();
    let mut hytn: Hytn<Rational64> = Hytn::new();
    let mut lookup = vec![u32::MAX; (s_count as usize) * v_count];
    let mut kinds = Vec::new();

    for (si, &mask) in masks.iter().enumerate() {
        for (ni, node) in g.nodes().iter().enumerate() {
            if g.node_active(ni, mask) {
                let idx = hytn
                    .add_node(expanded_id(&node.id, si as u64))
                    .expect("expanded names are unique");
                lookup[si * v_count + ni] = idx as u32;
                kinds.push(HNodeKind::Event {
                    node: ni as u32,
                    scenario: si as u32,
                });
            }
        }
    }

    let mut standard_arcs = 0;
    let mut aux_nodes = 0;
    for (si, &mask) in masks.iter().enumerate() {
        for (ci, c) in g.constraints().iter().enumerate() {
            if !g.constraint_mask(ci).holds_under(mask) {
                continue;
            }
            let (ui, vi) = g.constraint_endpoints(ci);
            let tail = lookup[si * v_count + ui];
            let head = lookup[si * v_count + vi];
            if tail == u32::MAX || head == u32::MAX {
                return Err(SolveError::InvalidNetwork(g.validate_wd()));
            }
            let w = Rational64::from_integer(c.weight);
            if ui == vi {
                if c.weight >= 0 {
                    continue; // tautological self-constraint
                }
                let aux = hytn
                    .add_node(format!("{}#g{}", expanded_id(&c.u, si as u64), aux_nodes))
                    .expect("helper names are unique");
                kinds.push(HNodeKind::Aux);
                aux_nodes += 1;
                hytn.add_hyperarc_by_id(tail as usize, vec![(aux, Rational64::zero())])
                    .expect("well-formed helper arc");
                hytn.add_hyperarc_by_id(aux, vec![(tail as usize, w)])
                    .expect("well-formed helper arc");
                standard_arcs += 2;
            } else {
                hytn.add_hyperarc_by_id(tail as usize, vec![(head as usize, w)])
                    .expect("well-formed standard arc");
                standard_arcs += 1;
            }
        }
    }

    let neg_eps = -eps.as_ratio();
    let mut reaction_arcs = 0;
    for (s1, &m1) in masks.iter().enumerate() {
        for (s2, &m2) in masks.iter().enumerate() {
            if s1 == s2 {
                continue;
            }
            let delta = g.difference_indices(m1, m2);
            for u in 0..v_count {
                let tail = lookup[s1 * v_count + u];
                let other = lookup[s2 * v_count + u];
                if tail == u32::MAX || other == u32::MAX {
                    continue;
                }
                let mut heads = Vec::with_capacity(delta.len() + 1);
                heads.push((other as usize, Rational64::zero()));
                for &d in &delta {
                    if d == u {
                        continue; // the event itself: an unsatisfiable disjunct
                    }
                    heads.push((lookup[s1 * v_count + d] as usize, neg_eps));
                }
                hytn.add_hyperarc_by_id(tail as usize, heads)
                    .expect("well-formed reaction arc");
                reaction_arcs += 1;
            }
        }
    }

    Ok(HEpsilon {
        hytn,
        epsilon: eps.clone(),
        scenario_count: s_count,
        cstn_nodes: v_count,
        lookup,
        kinds,
        standard_arcs,
        reaction_arcs,
        aux_nodes,
    })
}

/// Outcome of solving the reaction-enriched expansion: a rational feasible
/// schedule over its nodes, or the events with unbounded energy.
#[derive(Clone, Debug)]
pub enum ExpansionOutcome {
    Feasible(HytnSchedule),
    Infeasible(BTreeSet<String>),
}

/// Telemetry from one game solve.
#[derive(Clone, Copy, Debug, Default)]
pub struct GameTelemetry {
    pub game_nodes: usize,
    pub game_edges: usize,
    pub lifts: LiftStats,
}

/// Builds, scales and solves the reaction-enriched expansion, returning the
/// schedule rescaled back to rational times.
pub fn solve_h_epsilon(
    g: &Cstn,
    eps: &EpsilonRational,
    cap: u64,
) -> Result<(HEpsilon, ExpansionOutcome, GameTelemetry), SolveError> {
    let h = construct_h_epsilon_with_cap(g, eps, cap)?;
    let d = eps.denominator();
    let scaled = h
        .hytn
        .scale_to_integer(d)
        .map_err(|e| SolveError::Overflow(e.to_string()))?;
    let game = hytn_to_mpg(&scaled);
    let (energy, lifts) = solve_energy(&game);
    let telemetry = GameTelemetry {
        game_nodes: game.node_count(),
        game_edges: game.edge_count(),
        lifts,
    };

    let n = scaled.node_count();
    let all_finite = (0..n).all(|u| energy.value(u).is_finite());
    let outcome = if all_finite {
        let mut phi = HytnSchedule::new();
        for u in 0..n {
            let e = energy.value(u).finite().expect("checked finite");
            let e = i64::try_from(e)
                .map_err(|_| SolveError::Overflow("energy exceeds i64".into()))?;
            phi.insert(scaled.node_name(u).to_owned(), Rational64::new(e, d));
        }
        if let Some(bad) = h
            .hytn
            .check_schedule(&phi)
            .map_err(|e| SolveError::Internal(e.to_string()))?
        {
            return Err(SolveError::Internal(format!(
                "solver schedule violates {}",
                h.hytn.describe_hyperarc(bad)
            )));
        }
        ExpansionOutcome::Feasible(phi)
    } else {
        let tops: BTreeSet<String> = h
            .events()
            .filter(|&(_, _, idx)| !energy.value(idx).is_finite())
            .map(|(_, _, idx)| h.hytn.node_name(idx).to_owned())
            .collect();
        if tops.is_empty() {
            return Err(SolveError::Internal(
                "infeasible expansion without an event certificate".into(),
            ));
        }
        ExpansionOutcome::Infeasible(tops)
    };
    Ok((h, outcome, telemetry))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DcVerdict {
    Dc,
    NotDc,
    EpsDc(EpsilonRational),
    NotEpsDc(EpsilonRational),
}

impl DcVerdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, DcVerdict::Dc | DcVerdict::EpsDc(_))
    }
}

impl fmt::Display for DcVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DcVerdict::Dc => write!(f, "dynamically consistent"),
            DcVerdict::NotDc => write!(f, "not dynamically consistent"),
            DcVerdict::EpsDc(e) => write!(f, "{e}-dynamically consistent"),
            DcVerdict::NotEpsDc(e) => write!(f, "not {e}-dynamically consistent"),
        }
    }
}

/// Problem and game sizes plus solver telemetry for one check.
#[derive(Clone, Debug, Default)]
pub struct SolveStats {
    pub propositions: usize,
    pub scenarios: u64,
    pub nodes: usize,
    pub constraints: usize,
    pub expanded_nodes: usize,
    pub hyperarcs: usize,
    pub hytn_size: usize,
    pub game_nodes: usize,
    pub game_edges: usize,
    pub energy_cap: u64,
    pub lift_count: u64,
    pub epsilon: Option<EpsilonRational>,
    pub wall_time: Duration,
}

/// Verdict plus witness or refutation.
#[derive(Clone, Debug)]
pub struct DcReport {
    pub verdict: DcVerdict,
    pub strategy: Option<ExecutionStrategy>,
    pub certificate: Option<BTreeSet<String>>,
    pub stats: SolveStats,
}

impl DcReport {
    pub fn is_positive(&self) -> bool {
        self.verdict.is_positive()
    }
}

fn base_stats(g: &Cstn) -> SolveStats {
    SolveStats {
        propositions: g.propositions().len(),
        scenarios: g.scenario_count(),
        nodes: g.node_count(),
        constraints: g.constraints().len(),
        ..SolveStats::default()
    }
}

fn require_well_defined(g: &Cstn) -> Result<(), SolveError> {
    let errors: Vec<Violation> = g
        .validate_wd()
        .into_iter()
        .filter(|v| v.severity == Severity::Error)
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(SolveError::InvalidNetwork(errors))
    }
}

fn extract_strategy(g: &Cstn, h: &HEpsilon, phi: &HytnSchedule) -> ExecutionStrategy {
    let mut schedules = vec![BTreeMap::new(); h.scenario_count() as usize];
    for (node, scenario, idx) in h.events() {
        let name = h.hytn.node_name(idx);
        let t = phi[name];
        schedules[scenario as usize].insert(g.nodes()[node].id.clone(), t);
    }
    ExecutionStrategy::new(g.propositions().to_vec(), schedules)
        .expect("scenario count matches by construction")
}

fn run_check(
    g: &Cstn,
    eps: &EpsilonRational,
    cap: u64,
    as_dc: bool,
) -> Result<DcReport, SolveError> {
    let start = Instant::now();
    require_well_defined(g)?;
    let mut stats = base_stats(g);
    stats.epsilon = Some(eps.clone());

    let (h, outcome, telemetry) = solve_h_epsilon(g, eps, cap)?;
    stats.expanded_nodes = h.event_count();
    stats.hyperarcs = h.hytn.hyperarc_count();
    stats.hytn_size = h.hytn.size();
    stats.game_nodes = telemetry.game_nodes;
    stats.game_edges = telemetry.game_edges;
    stats.energy_cap = telemetry.lifts.cap;
    stats.lift_count = telemetry.lifts.lifts;

    let report = match outcome {
        ExpansionOutcome::Feasible(phi) => {
            let sigma = extract_strategy(g, &h, &phi);
            let verify = verify_strategy(g, &sigma, Some(eps))?;
            if !verify.all_ok() {
                let why: Vec<String> = [&verify.viable, &verify.dynamic]
                    .into_iter()
                    .chain(verify.eps_dynamic.as_ref())
                    .filter_map(|c| c.detail.clone())
                    .collect();
                return Err(SolveError::Internal(format!(
                    "extracted strategy failed verification: {}",
                    why.join("; ")
                )));
            }
            DcReport {
                verdict: if as_dc {
                    DcVerdict::Dc
                } else {
                    DcVerdict::EpsDc(eps.clone())
                },
                strategy: Some(sigma),
                certificate: None,
                stats,
            }
        }
        ExpansionOutcome::Infeasible(tops) => DcReport {
            verdict: if as_dc {
                DcVerdict::NotDc
            } else {
                DcVerdict::NotEpsDc(eps.clone())
            },
            strategy: None,
            certificate: Some(tops),
            stats,
        },
    };
    let mut report = report;
    report.stats.wall_time = start.elapsed();
    Ok(report)
}

/// Decides reaction-bounded dynamic consistency at the given `eps`.
pub fn check_edc(g: &Cstn, eps: &EpsilonRational) -> Result<DcReport, SolveError> {
    check_edc_with_cap(g, eps, DEFAULT_EXPANSION_NODE_CAP)
}

pub fn check_edc_with_cap(
    g: &Cstn,
    eps: &EpsilonRational,
    cap: u64,
) -> Result<DcReport, SolveError> {
    run_check(g, eps, cap, false)
}

/// The reaction bound at which plain dynamic consistency and its
/// reaction-bounded form coincide: one over scenarios times events.
pub fn dc_epsilon(g: &Cstn) -> Result<EpsilonRational, SolveError> {
    let d = g
        .scenario_count()
        .checked_mul(g.node_count() as u64)
        .and_then(|d| i64::try_from(d).ok())
        .ok_or_else(|| SolveError::Overflow("scenario-event product".into()))?;
    EpsilonRational::new(1, d).map_err(|e| SolveError::Input(e.to_string()))
}

/// Decides dynamic consistency. Positive verdicts carry a strategy verified
/// to be viable and dynamic, not merely reaction-bounded.
pub fn check_dc(g: &Cstn) -> Result<DcReport, SolveError> {
    check_dc_with_cap(g, DEFAULT_EXPANSION_NODE_CAP)
}

pub fn check_dc_with_cap(g: &Cstn, cap: u64) -> Result<DcReport, SolveError> {
    if g.node_count() == 0 {
        // No events: trivially consistent, one empty schedule per scenario.
        let strategy = ExecutionStrategy::new(
            g.propositions().to_vec(),
            vec![BTreeMap::new(); g.scenario_count() as usize],
        )
        .expect("counts match");
        return Ok(DcReport {
            verdict: DcVerdict::Dc,
            strategy: Some(strategy),
            certificate: None,
            stats: base_stats(g),
        });
    }
    let eps = dc_epsilon(g)?;
    run_check(g, &eps, cap, true)
}

/// The selection and rounding data derived from a feasible schedule of a
/// reaction-enriched expansion: fractional parts, their dense ranking, and
/// the standard-arc network obtained by keeping each hyperarc's best head.
pub struct RoundingContext {
    names: Vec<String>,
    floors: Vec<Rational64>,
    fractional: Vec<Rational64>,
    positions: Vec<usize>,
    distinct: Vec<Rational64>,
    grid: i64,
    selected: Stn,
}

impl RoundingContext {
    /// `phi` must be total on the network's nodes. Fractional ranks are
    /// 1-based; `grid` is the denominator of the target fractional lattice.
    pub fn build(
        h: &Hytn<Rational64>,
        phi: &HytnSchedule,
        grid: i64,
    ) -> Result<Self, SolveError> {
        if grid < 1 {
            return Err(SolveError::Input("rounding grid must be positive".into()));
        }
        let names: Vec<String> = h.node_names().to_vec();
        let mut times = Vec::with_capacity(names.len());
        for name in &names {
            let t = phi
                .get(name)
                .copied()
                .ok_or_else(|| SolveError::Input(format!("schedule missing node `{name}`")))?;
            times.push(t);
        }
        let floors: Vec<Rational64> = times.iter().map(|t| t.floor()).collect();
        let fractional: Vec<Rational64> =
            times.iter().zip(&floors).map(|(t, f)| t - f).collect();
        let mut distinct = fractional.clone();
        distinct.sort();
        distinct.dedup();
        let positions = fractional
            .iter()
            .map(|r| distinct.binary_search(r).expect("member of its own set") + 1)
            .collect();

        // Keep, per hyperarc, the head realizing the min of phi(head) - w.
        let mut selected = Stn::new();
        for name in &names {
            selected.add_node(name.clone()).expect("unique");
        }
        for arc in h.hyperarcs() {
            let (mut best, mut best_val) = (None, None);
            for (head, w) in arc.heads() {
                let val = phi[&names[head]] - w.as_rational();
                if best_val.map_or(true, |b| val < b) {
                    best_val = Some(val);
                    best = Some((head, w));
                }
            }
            let (head, w) = best.expect("heads nonempty");
            selected
                .add_arc(&names[arc.tail()], &names[head], w.as_rational())
                .expect("nodes present");
        }

        Ok(Self {
            names,
            floors,
            fractional,
            positions,
            distinct,
            grid,
            selected,
        })
    }

    pub fn grid(&self) -> i64 {
        self.grid
    }

    pub fn distinct_fractional_parts(&self) -> &[Rational64] {
        &self.distinct
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.positions[i])
    }

    pub fn fractional_part(&self, name: &str) -> Option<Rational64> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.fractional[i])
    }

    /// The standard-arc selection induced by the schedule.
    pub fn selected_stn(&self) -> &Stn {
        &self.selected
    }

    /// The rounded schedule: same integral parts, fractional parts replaced
    /// by `(rank - 1) / grid`.
    pub fn rounded(&self) -> HytnSchedule {
        self.names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let r = Rational64::new(self.positions[i] as i64 - 1, self.grid);
                (name.clone(), self.floors[i] + r)
            })
            .collect()
    }
}

/// Rounds a feasible schedule of the `eps_src` expansion onto the coarse
/// fractional lattice with denominator `scenarios * events`, preserving
/// integral parts and the relative order of fractional parts. The result is
/// feasible for the expansion at the coarse reaction bound, which is what
/// makes that bound sufficient for full dynamic consistency.
pub fn round_schedule(
    g: &Cstn,
    eps_src: &EpsilonRational,
    phi: &HytnSchedule,
) -> Result<HytnSchedule, SolveError> {
    if g.node_count() == 0 {
        return Ok(HytnSchedule::new());
    }
    let h_src = construct_h_epsilon(g, eps_src)?;
    if let Some(bad) = h_src
        .hytn
        .check_schedule(phi)
        .map_err(|e| SolveError::Input(e.to_string()))?
    {
        return Err(SolveError::Input(format!(
            "schedule is not feasible at {eps_src}: violates {}",
            h_src.hytn.describe_hyperarc(bad)
        )));
    }
    let coarse = dc_epsilon(g)?;
    let grid = coarse.denominator();
    let ctx = RoundingContext::build(&h_src.hytn, phi, grid)?;
    let rounded = ctx.rounded();

    let h_tgt = construct_h_epsilon(g, &coarse)?;
    if let Some(bad) = h_tgt
        .hytn
        .check_schedule(&rounded)
        .map_err(|e| SolveError::Internal(e.to_string()))?
    {
        return Err(SolveError::Internal(format!(
            "rounded schedule violates {}",
            h_tgt.hytn.describe_hyperarc(bad)
        )));
    }
    Ok(rounded)
}

/// A bracket on the largest reaction bound a network tolerates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EpsilonHatEstimate {
    /// The network is not dynamically consistent at all.
    NotDynamicallyConsistent,
    /// Consistent at `lo`; inconsistent at `hi` when present, unbounded in
    /// the probed range when absent.
    Bracket {
        lo: EpsilonRational,
        hi: Option<EpsilonRational>,
    },
}

impl fmt::Display for EpsilonHatEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonHatEstimate::NotDynamicallyConsistent => write!(f, "not DC"),
            EpsilonHatEstimate::Bracket { lo, hi: Some(hi) } => write!(f, "[{lo}, {hi})"),
            EpsilonHatEstimate::Bracket { lo, hi: None } => write!(f, "[{lo}, inf)"),
        }
    }
}

/// Brackets the critical reaction bound by bisection. The lower end starts
/// at the bound that is always tolerated by a dynamically consistent
/// network; the search keeps `lo` positive and `hi` negative and stops once
/// `hi - lo <= 1/resolution`.
pub fn estimate_epsilon_hat(
    g: &Cstn,
    resolution: u64,
) -> Result<EpsilonHatEstimate, SolveError> {
    if resolution == 0 {
        return Err(SolveError::Input("resolution must be positive".into()));
    }
    let dc = check_dc(g)?;
    if !dc.is_positive() {
        return Ok(EpsilonHatEstimate::NotDynamicallyConsistent);
    }
    if g.node_count() == 0 {
        return Ok(EpsilonHatEstimate::Bracket {
            lo: EpsilonRational::one(),
            hi: None,
        });
    }

    let one = EpsilonRational::one();
    if check_edc(g, &one)?.is_positive() {
        return Ok(EpsilonHatEstimate::Bracket { lo: one, hi: None });
    }

    let mut lo = dc_epsilon(g)?;
    let mut hi = one;
    let width = Rational64::new(1, i64::try_from(resolution).map_err(|_| {
        SolveError::Input("resolution out of range".into())
    })?);
    // Denominators double each step; stop refining if they outgrow i64.
    for _ in 0..128 {
        if hi.diff(&lo) <= width {
            break;
        }
        let mid = match lo.midpoint(&hi) {
            Ok(m) => m,
            Err(_) => break,
        };
        if check_edc(g, &mid)?.is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EpsilonHatEstimate::Bracket { lo, hi: Some(hi) })
}
