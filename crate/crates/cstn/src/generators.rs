//! Instance generators: the 3-CNF reduction, the shrinking-window family
//! with exponentially small reaction bounds, seeded random networks, and a
//! brute-force satisfiability oracle for cross-checking.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::One;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dc::ExecutionStrategy;
use crate::label::{Label, Literal};
use crate::network::{Cstn, CstnNode, LabeledConstraint};
use crate::rational::EpsilonRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("dimacs: {0}")]
    Dimacs(String),
    #[error("formula has {0} variables, the brute-force bound is 20")]
    SatBound(usize),
    #[error("{0}")]
    Invalid(String),
}

/// A literal of a CNF formula, 0-based variable index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CnfLit {
    pub var: usize,
    pub negated: bool,
}

/// A formula in 3-CNF: every clause holds exactly three literals (shorter
/// clauses are padded by repetition, which preserves semantics).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<[CnfLit; 3]>,
}

impl Cnf {
    pub fn new(num_vars: usize, clauses: Vec<Vec<CnfLit>>) -> Result<Self, GenError> {
        let mut out = Vec::with_capacity(clauses.len());
        for (i, clause) in clauses.into_iter().enumerate() {
            for lit in &clause {
                if lit.var >= num_vars {
                    return Err(GenError::Invalid(format!(
                        "clause {i} mentions variable {} of {num_vars}",
                        lit.var
                    )));
                }
            }
            let padded = match clause.len() {
                0 => return Err(GenError::Invalid(format!("clause {i} is empty"))),
                1 => [clause[0], clause[0], clause[0]],
                2 => [clause[0], clause[1], clause[1]],
                3 => [clause[0], clause[1], clause[2]],
                n => {
                    return Err(GenError::Invalid(format!(
                        "clause {i} has {n} literals, at most 3 are supported"
                    )))
                }
            };
            out.push(padded);
        }
        Ok(Self {
            num_vars,
            clauses: out,
        })
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }
}

/// Reads the standard DIMACS CNF format: `c` comment lines, one
/// `p cnf <vars> <clauses>` header, then zero-terminated clauses.
pub fn parse_dimacs(text: &str) -> Result<Cnf, GenError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<CnfLit>> = Vec::new();
    let mut current: Vec<CnfLit> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if header.is_some() {
                return Err(GenError::Dimacs("duplicate header".into()));
            }
            let mut toks = rest.split_whitespace();
            if toks.next() != Some("cnf") {
                return Err(GenError::Dimacs("expected `p cnf <vars> <clauses>`".into()));
            }
            let vars = toks
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| GenError::Dimacs("bad variable count".into()))?;
            let cls = toks
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| GenError::Dimacs("bad clause count".into()))?;
            header = Some((vars, cls));
            continue;
        }
        let (vars, _) =
            header.ok_or_else(|| GenError::Dimacs("clause before header".into()))?;
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| GenError::Dimacs(format!("bad literal `{tok}`")))?;
            if v == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                let var = v.unsigned_abs() as usize - 1;
                if var >= vars {
                    return Err(GenError::Dimacs(format!(
                        "literal `{tok}` out of range for {vars} variables"
                    )));
                }
                current.push(CnfLit {
                    var,
                    negated: v < 0,
                });
            }
        }
    }
    if !current.is_empty() {
        return Err(GenError::Dimacs("unterminated clause".into()));
    }
    let (vars, declared) = header.ok_or_else(|| GenError::Dimacs("missing header".into()))?;
    if clauses.len() != declared {
        return Err(GenError::Dimacs(format!(
            "header declares {declared} clauses, found {}",
            clauses.len()
        )));
    }
    Cnf::new(vars, clauses)
}

/// Exhaustive satisfiability check, with a witness re-check. Bounded to 20
/// variables.
pub fn sat_brute_force(f: &Cnf) -> Result<bool, GenError> {
    if f.num_vars > 20 {
        return Err(GenError::SatBound(f.num_vars));
    }
    'assignments: for bits in 0u32..1u32 << f.num_vars {
        for clause in &f.clauses {
            let satisfied = clause
                .iter()
                .any(|lit| (bits >> lit.var & 1 == 1) != lit.negated);
            if !satisfied {
                continue 'assignments;
            }
        }
        debug_assert!(eval_cnf(f, bits));
        return Ok(true);
    }
    Ok(false)
}

fn eval_cnf(f: &Cnf, bits: u32) -> bool {
    f.clauses.iter().all(|c| {
        c.iter()
            .any(|lit| (bits >> lit.var & 1 == 1) != lit.negated)
    })
}

fn var_name(i: usize) -> String {
    format!("x{}", i + 1)
}

fn lit_label(lit: CnfLit) -> Label {
    let l = if lit.negated {
        Literal::negative(var_name(lit.var))
    } else {
        Literal::positive(var_name(lit.var))
    };
    Label::new([l]).expect("single literal")
}

/// Builds the network whose dynamic consistency is the complement of the
/// formula's satisfiability. Events are the variables (each observing
/// itself) plus one event per clause; zero-weight constraints pin all
/// observations together, every observation precedes every clause event by
/// one, and each clause event precedes the next one cyclically under each of
/// its literals. Under a satisfying scenario those cyclic constraints close
/// a negative cycle.
///
/// Sizes: `n + m` events and `n^2 + n*m + 3m` constraints (kept as a list,
/// so padded clauses contribute their repeats).
pub fn gen_from_3cnf(f: &Cnf) -> Cstn {
    let n = f.num_vars;
    let m = f.clause_count();
    let props: Vec<String> = (0..n).map(var_name).collect();
    let mut nodes: Vec<CstnNode> = props
        .iter()
        .map(|p| CstnNode::observation(p.clone(), p.clone()))
        .collect();
    for j in 0..m {
        nodes.push(CstnNode::event(format!("C{j}")));
    }

    let mut constraints = Vec::with_capacity(n * n + n * m + 3 * m);
    for u in 0..n {
        for v in 0..n {
            constraints.push(LabeledConstraint::new(
                var_name(v),
                var_name(u),
                0,
                Label::empty(),
            ));
        }
    }
    for x in 0..n {
        for j in 0..m {
            constraints.push(LabeledConstraint::new(
                format!("C{j}"),
                var_name(x),
                -1,
                Label::empty(),
            ));
        }
    }
    for (j, clause) in f.clauses.iter().enumerate() {
        let next = (j + 1) % m;
        for &lit in clause {
            constraints.push(LabeledConstraint::new(
                format!("C{next}"),
                format!("C{j}"),
                -1,
                lit_label(lit),
            ));
        }
    }

    Cstn::new(props, nodes, constraints).expect("reduction output is structurally sound")
}

/// Rule choosing each window split `delta_i` strictly inside `(0, Delta_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeltaRule {
    /// `delta_i = Delta_i / 2`, which keeps the windows as large as possible.
    Half,
    /// `delta_i = fraction * Delta_i`; the fraction must lie in (0, 1).
    Fraction(EpsilonRational),
}

#[derive(Clone, Debug)]
pub struct GammaNParams {
    pub n: u32,
    pub delta_rule: DeltaRule,
}

impl GammaNParams {
    pub fn new(n: u32) -> Self {
        Self {
            n,
            delta_rule: DeltaRule::Half,
        }
    }
}

/// The `delta_i` / `Delta_i` sequences: `Delta_1 = 1`, then each window is
/// the smaller part of the previous split. With the `Half` rule the windows
/// are exactly `2^(1-i)`.
pub fn delta_sequence(params: &GammaNParams) -> Vec<(Rational64, Rational64)> {
    let frac = match &params.delta_rule {
        DeltaRule::Half => Rational64::new(1, 2),
        DeltaRule::Fraction(f) => f.as_ratio(),
    };
    assert!(
        frac > Rational64::new(0, 1) && frac < Rational64::one(),
        "split fraction must lie strictly inside (0, 1)"
    );
    let mut out = Vec::with_capacity(params.n as usize);
    let mut window = Rational64::one();
    for _ in 0..params.n {
        let split = window * frac;
        out.push((split, window));
        window = split.min(window - split);
    }
    out
}

fn gamma_names(n: u32) -> Vec<String> {
    let mut names = Vec::with_capacity(3 * n as usize);
    for i in 1..=n {
        names.push(format!("X{i}"));
        names.push(format!("Y{i}"));
        names.push(format!("Z{i}"));
    }
    names
}

/// A family with `3n` self-observing events whose tolerated reaction bound
/// shrinks as `2^(1-n)`: each layer forces the planner to answer the `X_i`
/// observation inside a window that halves (at best) per layer.
///
/// Layer arcs: `X_1` is pinned first and `Z_1 - X_1 <= 1` under `X_1 Y_1`;
/// each layer carries exact-distance pairs `[2]` under the negative
/// observations; consecutive layers are chained by exact-distance pairs `[5]`
/// selected by `Z_i`. Families are emitted as a set, so overlapping
/// definitions do not duplicate constraints.
pub fn gen_gamma_n(params: &GammaNParams) -> Cstn {
    assert!(params.n >= 1, "the family starts at n = 1");
    let n = params.n;
    let names = gamma_names(n);
    let nodes: Vec<CstnNode> = names
        .iter()
        .map(|v| CstnNode::observation(v.clone(), v.clone()))
        .collect();

    let pos = |p: &str| Label::new([Literal::positive(p)]).unwrap();
    let neg = |p: &str| Label::new([Literal::negative(p)]).unwrap();
    let x = |i: u32| format!("X{i}");
    let y = |i: u32| format!("Y{i}");
    let z = |i: u32| format!("Z{i}");

    let mut set: BTreeSet<LabeledConstraint> = BTreeSet::new();
    let mut ordered: Vec<LabeledConstraint> = Vec::new();
    let mut push = |c: LabeledConstraint, set: &mut BTreeSet<LabeledConstraint>| {
        if set.insert(c.clone()) {
            ordered.push(c);
        }
    };

    // Anchor: X1 is earliest; the first window.
    for v in &names {
        push(
            LabeledConstraint::new(v.clone(), x(1), 0, Label::empty()),
            &mut set,
        );
    }
    push(
        LabeledConstraint::new(x(1), z(1), 1, pos(&x(1)).and(&pos(&y(1))).unwrap()),
        &mut set,
    );

    // Per-layer exact distances under the negative outcomes.
    for i in 1..=n {
        push(LabeledConstraint::new(x(i), y(i), 2, neg(&x(i))), &mut set);
        push(LabeledConstraint::new(y(i), x(i), -2, neg(&x(i))), &mut set);
        push(LabeledConstraint::new(y(i), z(i), 2, neg(&y(i))), &mut set);
        push(LabeledConstraint::new(z(i), y(i), -2, neg(&y(i))), &mut set);
    }

    // Chaining between consecutive layers.
    for i in 1..n {
        let zi = pos(&z(i));
        let nzi = neg(&z(i));
        let xy_next = pos(&x(i + 1)).and(&pos(&y(i + 1))).unwrap();
        push(LabeledConstraint::new(x(i), x(i + 1), 5, zi.clone()), &mut set);
        push(LabeledConstraint::new(x(i + 1), x(i), -5, zi.clone()), &mut set);
        push(LabeledConstraint::new(y(i), x(i + 1), 5, nzi.clone()), &mut set);
        push(LabeledConstraint::new(x(i + 1), y(i), -5, nzi.clone()), &mut set);
        let zi_xy = zi.and(&xy_next).unwrap();
        push(LabeledConstraint::new(y(i), z(i + 1), 5, zi_xy.clone()), &mut set);
        push(LabeledConstraint::new(z(i + 1), y(i), -5, zi_xy), &mut set);
        let nzi_xy = nzi.and(&xy_next).unwrap();
        push(LabeledConstraint::new(z(i), z(i + 1), 5, nzi_xy.clone()), &mut set);
        push(LabeledConstraint::new(z(i + 1), z(i), -5, nzi_xy), &mut set);
    }

    // Final layer, already covered by the per-layer set for i = n.
    Cstn::new(names, nodes, ordered).expect("family output is structurally sound")
}

/// The reference strategy for the family: schedules each layer inside its
/// window when the observations come out true, and falls back to the rigid
/// offsets otherwise. Viable and dynamic for every `n`.
pub fn gen_gamma_n_strategy(params: &GammaNParams) -> ExecutionStrategy {
    let n = params.n;
    let g = gen_gamma_n(params);
    let seq = delta_sequence(params);
    let scenarios = g.scenarios();
    let mut schedules = Vec::with_capacity(scenarios.len());
    let ind = |b: bool| -> Rational64 {
        if b {
            Rational64::one()
        } else {
            Rational64::new(0, 1)
        }
    };
    for s in &scenarios {
        let val = |name: &str| s.value(name).expect("total assignment");
        let mut t: std::collections::BTreeMap<String, Rational64> = Default::default();
        let mut x_prev = Rational64::new(0, 1);
        let mut y_prev = Rational64::new(0, 1);
        let mut z_prev = Rational64::new(0, 1);
        for i in 1..=n {
            let (delta_i, _) = seq[i as usize - 1];
            let (xn, yn, zn) = (format!("X{i}"), format!("Y{i}"), format!("Z{i}"));
            let five = Rational64::from_integer(5);
            let two = Rational64::from_integer(2);
            let xi = if i == 1 {
                Rational64::new(0, 1)
            } else {
                five + x_prev * ind(val(&format!("Z{}", i - 1)))
                    + y_prev * ind(!val(&format!("Z{}", i - 1)))
            };
            let yi = {
                let base = if i == 1 { Rational64::new(0, 1) } else { xi };
                base + delta_i * ind(val(&xn)) + two * ind(!val(&xn))
            };
            let zi = if i == 1 {
                ind(val(&xn) && val(&yn))
                    + (two + yi) * ind(!(val(&xn) && val(&yn)))
            } else {
                (five + y_prev * ind(val(&format!("Z{}", i - 1)))
                    + z_prev * ind(!val(&format!("Z{}", i - 1))))
                    * ind(val(&xn) && val(&yn))
                    + (two + yi) * ind(!(val(&xn) && val(&yn)))
            };
            t.insert(xn, xi);
            t.insert(yn, yi);
            t.insert(zn, zi);
            x_prev = xi;
            y_prev = yi;
            z_prev = zi;
        }
        schedules.push(t);
    }
    ExecutionStrategy::new(g.propositions().to_vec(), schedules)
        .expect("one schedule per scenario")
}

/// Parameters for the seeded random generator.
#[derive(Clone, Debug)]
pub struct RandomCstnParams {
    pub nodes: usize,
    pub props: usize,
    /// Probability of adding a constraint between an ordered node pair.
    pub arc_density: f64,
    /// Weights are drawn from `[-weight_range/3, weight_range]`.
    pub weight_range: i64,
    pub seed: u64,
}

/// Deterministic under its seed, and always well defined: observation
/// events come first with empty labels, labeled nodes get their required
/// strictly-preceding observation constraints, and random constraint labels
/// are built by conjoining the endpoint labels.
pub fn gen_random_cstn(params: &RandomCstnParams) -> Cstn {
    assert!(
        params.props <= params.nodes,
        "each proposition needs an observation event"
    );
    assert!(params.props <= 16, "proposition count out of test range");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let props: Vec<String> = (0..params.props).map(|j| format!("p{j}")).collect();
    let mut nodes: Vec<CstnNode> = Vec::with_capacity(params.nodes);
    for i in 0..params.nodes {
        if i < params.props {
            nodes.push(CstnNode::observation(format!("N{i}"), props[i].clone()));
        } else {
            let mut node = CstnNode::event(format!("N{i}"));
            if !props.is_empty() && rng.gen_bool(0.4) {
                let count = 1 + usize::from(rng.gen_bool(0.3) && props.len() > 1);
                let mut lits = Vec::new();
                let mut used = BTreeSet::new();
                while lits.len() < count {
                    let j = rng.gen_range(0..props.len());
                    if used.insert(j) {
                        let negated = rng.gen_bool(0.5);
                        lits.push(Literal {
                            proposition: props[j].clone(),
                            negated,
                        });
                    }
                }
                node = node.with_label(Label::new(lits).expect("distinct propositions"));
            }
            nodes.push(node);
        }
    }

    let mut constraints = Vec::new();
    let horizon = params.weight_range.max(1) * 4;

    // Anchor every event after N0 and inside a horizon, under its own label.
    for node in nodes.iter().skip(1) {
        constraints.push(LabeledConstraint::new(
            node.id.clone(),
            "N0",
            0,
            node.label.clone(),
        ));
        constraints.push(LabeledConstraint::new(
            "N0",
            node.id.clone(),
            horizon,
            node.label.clone(),
        ));
    }

    // Required strict precedence for every labeled node.
    for (i, node) in nodes.iter().enumerate() {
        for lit in node.label.literals() {
            let obs = props
                .iter()
                .position(|p| *p == lit.proposition)
                .expect("labels use declared propositions");
            constraints.push(LabeledConstraint::new(
                format!("N{i}"),
                format!("N{obs}"),
                -1,
                node.label.clone(),
            ));
        }
    }

    // Random difference constraints with conjoined labels.
    let lo = -(params.weight_range.max(1) / 3).max(1);
    for u in 0..params.nodes {
        for v in 0..params.nodes {
            if u == v || !rng.gen_bool(params.arc_density) {
                continue;
            }
            let label = match nodes[u].label.and(&nodes[v].label) {
                Ok(l) => l,
                Err(_) => continue, // the endpoints never co-occur
            };
            let w = rng.gen_range(lo..=params.weight_range.max(1));
            constraints.push(LabeledConstraint::new(
                format!("N{u}"),
                format!("N{v}"),
                w,
                label,
            ));
        }
    }

    let g = Cstn::new(props, nodes, constraints).expect("generated network is sound");
    debug_assert!(g.is_well_defined());
    g
}

/// Renders a formula back to DIMACS, for fixtures and round-trips.
pub fn to_dimacs(f: &Cnf) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", f.num_vars, f.clause_count());
    for clause in &f.clauses {
        for lit in clause {
            let v = lit.var as i64 + 1;
            let _ = write!(out, "{} ", if lit.negated { -v } else { v });
        }
        let _ = writeln!(out, "0");
    }
    out
}
