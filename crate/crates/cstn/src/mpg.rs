//! Deciding hyper-network consistency as a two-player game on a weighted graph.
//!
//! The network maps to a game between Min, who walks the event nodes picking
//! which constraint to challenge, and Max, who answers each hyperarc by
//! picking the disjunct it honors. The network is consistent exactly when Max
//! can keep every reachable cycle nonnegative; that threshold is certified by
//! the least energy progress measure, computed here by worklist lifting.
//! Finite energies double as a feasible schedule.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use crate::hytn::Hytn;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MpgError {
    #[error("node {0} has no outgoing edge")]
    Sink(usize),
    #[error("edge endpoint {0} out of range")]
    BadEndpoint(usize),
    #[error("{needed} positional strategies exceed the enumeration bound {bound}")]
    StrategyBound { needed: u64, bound: u64 },
    #[error("energy cap overflows 64 bits")]
    CapOverflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Owner {
    Min,
    Max,
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Owner::Min => write!(f, "min"),
            Owner::Max => write!(f, "max"),
        }
    }
}

/// A game graph. Every node must have at least one outgoing edge; builders
/// that translate networks close sinks off before constructing this.
#[derive(Clone, Debug)]
pub struct Mpg {
    names: Vec<String>,
    owners: Vec<Owner>,
    out_index: Vec<u32>,
    out_edges: Vec<(u32, i64)>,
}

impl Mpg {
    pub fn new(
        names: Vec<String>,
        owners: Vec<Owner>,
        edges: Vec<(usize, usize, i64)>,
    ) -> Result<Self, MpgError> {
        assert_eq!(names.len(), owners.len());
        let n = names.len();
        let mut degree = vec![0u32; n];
        for &(from, to, _) in &edges {
            if from >= n {
                return Err(MpgError::BadEndpoint(from));
            }
            if to >= n {
                return Err(MpgError::BadEndpoint(to));
            }
            degree[from] += 1;
        }
        if let Some(u) = degree.iter().position(|&d| d == 0) {
            return Err(MpgError::Sink(u));
        }
        let mut out_index = vec![0u32; n + 1];
        for u in 0..n {
            out_index[u + 1] = out_index[u] + degree[u];
        }
        let mut cursor = out_index.clone();
        let mut out_edges = vec![(0u32, 0i64); edges.len()];
        for &(from, to, w) in &edges {
            out_edges[cursor[from] as usize] = (to as u32, w);
            cursor[from] += 1;
        }
        Ok(Self {
            names,
            owners,
            out_index,
            out_edges,
        })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_edges.len()
    }

    pub fn owner(&self, node: usize) -> Owner {
        self.owners[node]
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn edges_from(&self, node: usize) -> &[(u32, i64)] {
        let (a, b) = (self.out_index[node], self.out_index[node + 1]);
        &self.out_edges[a as usize..b as usize]
    }

    pub fn max_abs_weight(&self) -> i64 {
        self.out_edges.iter().map(|&(_, w)| w.abs()).max().unwrap_or(0)
    }

    /// Plain-text edge list, one `from owner to weight` line per edge.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for u in 0..self.node_count() {
            for &(v, w) in self.edges_from(u) {
                out.push_str(&format!(
                    "{} {} {} {}\n",
                    self.names[u], self.owners[u], self.names[v as usize], w
                ));
            }
        }
        out
    }
}

/// Natural-number-or-infinite energy value; `Infinite` marks losing nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Energy {
    Finite(u64),
    Infinite,
}

impl Energy {
    pub fn is_finite(self) -> bool {
        matches!(self, Energy::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Energy::Finite(v) => Some(v),
            Energy::Infinite => None,
        }
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Energy::Finite(v) => write!(f, "{v}"),
            Energy::Infinite => write!(f, "inf"),
        }
    }
}

/// The least fixpoint of the lifting operator, with its cap.
#[derive(Clone, Debug)]
pub struct EnergyFunction {
    values: Vec<Energy>,
    cap: u64,
}

impl EnergyFunction {
    pub fn value(&self, node: usize) -> Energy {
        self.values[node]
    }

    pub fn values(&self) -> &[Energy] {
        &self.values
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|e| e.is_finite())
    }
}

/// Counters from one energy-lifting run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LiftStats {
    /// Lift applications that strictly increased a node value.
    pub lifts: u64,
    /// Worklist pops, counting no-op recomputations too.
    pub pops: u64,
    /// The promotion threshold used: node count times max |weight|.
    pub cap: u64,
}

fn lift(e: Energy, w: i64, cap: u64) -> Energy {
    match e {
        Energy::Infinite => Energy::Infinite,
        Energy::Finite(v) => {
            let x = v as i128 - w as i128;
            if x <= 0 {
                Energy::Finite(0)
            } else if x > cap as i128 {
                Energy::Infinite
            } else {
                Energy::Finite(x as u64)
            }
        }
    }
}

fn target(g: &Mpg, energy: &[Energy], node: usize, cap: u64) -> Energy {
    let mut it = g
        .edges_from(node)
        .iter()
        .map(|&(v, w)| lift(energy[v as usize], w, cap));
    let first = it.next().expect("no sinks by construction");
    match g.owner(node) {
        Owner::Min => it.fold(first, Energy::max),
        Owner::Max => it.fold(first, Energy::min),
    }
}

/// Least fixpoint of: a Min node needs energy for its worst successor, a Max
/// node for its best, where following an edge of weight `w` from energy `e`
/// requires `max(0, e - w)`. Any value above `node count * max |weight|`
/// certifies an unbounded demand and is promoted to infinity.
///
/// The worklist is FIFO over nodes whose value is stale; the fixpoint is
/// unique, the discipline only fixes iteration counts for reproducibility.
pub fn solve_energy(g: &Mpg) -> (EnergyFunction, LiftStats) {
    let n = g.node_count();
    let cap = (n as u64)
        .checked_mul(g.max_abs_weight() as u64)
        .expect("energy cap fits in 64 bits");
    let mut energy = vec![Energy::Finite(0); n];

    // Reverse adjacency, for waking predecessors after a lift.
    let mut pred_deg = vec![0u32; n];
    for u in 0..n {
        for &(v, _) in g.edges_from(u) {
            pred_deg[v as usize] += 1;
        }
    }
    let mut pred_index = vec![0u32; n + 1];
    for u in 0..n {
        pred_index[u + 1] = pred_index[u] + pred_deg[u];
    }
    let mut cursor = pred_index.clone();
    let mut preds = vec![0u32; g.edge_count()];
    for u in 0..n {
        for &(v, _) in g.edges_from(u) {
            preds[cursor[v as usize] as usize] = u as u32;
            cursor[v as usize] += 1;
        }
    }

    let mut queue: VecDeque<u32> = (0..n as u32).collect();
    let mut in_queue = vec![true; n];
    let mut stats = LiftStats {
        cap,
        ..LiftStats::default()
    };

    while let Some(u) = queue.pop_front() {
        let u = u as usize;
        in_queue[u] = false;
        stats.pops += 1;
        let t = target(g, &energy, u, cap);
        if t > energy[u] {
            energy[u] = t;
            stats.lifts += 1;
            let (a, b) = (pred_index[u], pred_index[u + 1]);
            for &p in &preds[a as usize..b as usize] {
                if !in_queue[p as usize] {
                    in_queue[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }
    }

    (EnergyFunction { values: energy, cap }, stats)
}

/// One lifting round applied functionally; used to confirm fixpoints.
pub fn lifting_round(g: &Mpg, energy: &[Energy], cap: u64) -> Vec<Energy> {
    (0..g.node_count())
        .map(|u| target(g, energy, u, cap).max(energy[u]))
        .collect()
}

/// Independent oracle: enumerates positional Max strategies and, for each,
/// checks which nodes cannot reach a negative cycle once Max's choices are
/// fixed (Min keeps all its edges). A node is winning when some strategy
/// protects it.
pub fn brute_force_winners(g: &Mpg, max_strategies: u64) -> Result<Vec<bool>, MpgError> {
    let n = g.node_count();
    let max_nodes: Vec<usize> = (0..n).filter(|&u| g.owner(u) == Owner::Max).collect();

    let mut total: u64 = 1;
    for &u in &max_nodes {
        total = total.saturating_mul(g.edges_from(u).len() as u64);
        if total > max_strategies {
            return Err(MpgError::StrategyBound {
                needed: total,
                bound: max_strategies,
            });
        }
    }

    let mut wins = vec![false; n];
    let mut choice = vec![0usize; max_nodes.len()];
    loop {
        // Subgraph: all Min edges plus the chosen Max edges.
        let mut edges: Vec<(usize, usize, i64)> = Vec::new();
        for u in 0..n {
            match g.owner(u) {
                Owner::Min => {
                    for &(v, w) in g.edges_from(u) {
                        edges.push((u, v as usize, w));
                    }
                }
                Owner::Max => {}
            }
        }
        for (k, &u) in max_nodes.iter().enumerate() {
            let (v, w) = g.edges_from(u)[choice[k]];
            edges.push((u, v as usize, w));
        }

        let losing = nodes_reaching_negative_cycle(n, &edges);
        for u in 0..n {
            if !losing[u] {
                wins[u] = true;
            }
        }

        // Next strategy, mixed-radix.
        let mut k = 0;
        loop {
            if k == max_nodes.len() {
                return Ok(wins);
            }
            choice[k] += 1;
            if choice[k] < g.edges_from(max_nodes[k]).len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Nodes with a path to some negative cycle. Floyd-Warshall gives the nodes
/// lying on a negative cycle (negative diagonal); reverse reachability closes
/// the set.
fn nodes_reaching_negative_cycle(n: usize, edges: &[(usize, usize, i64)]) -> Vec<bool> {
    const INF: i64 = i64::MAX / 4;
    let mut dist = vec![vec![INF; n]; n];
    for &(u, v, w) in edges {
        if w < dist[u][v] {
            dist[u][v] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if dist[i][k] == INF {
                continue;
            }
            for j in 0..n {
                if dist[k][j] == INF {
                    continue;
                }
                let cand = dist[i][k] + dist[k][j];
                if cand < dist[i][j] {
                    dist[i][j] = cand;
                }
            }
        }
    }
    let mut losing: Vec<bool> = (0..n).map(|u| dist[u][u] < 0).collect();
    // Reverse closure: anything that can step into a losing node loses.
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v, _) in edges {
            if losing[v] && !losing[u] {
                losing[u] = true;
                changed = true;
            }
        }
    }
    losing
}

/// Translates a hyper network into the game: one Min node per event, one Max
/// node per hyperarc. Min moves from an event to any hyperarc tailed there
/// (weight 0); Max answers with the head it honors (the head's weight). An
/// event with no outgoing hyperarc gets a companion Max node and a 0-weight
/// two-cycle, so the adversary is never stuck.
///
/// The first `h.node_count()` game nodes are the events, in order.
pub fn hytn_to_mpg(h: &Hytn<i64>) -> Mpg {
    let n = h.node_count();
    let mut names: Vec<String> = h.node_names().to_vec();
    let mut owners = vec![Owner::Min; n];
    let mut edges: Vec<(usize, usize, i64)> = Vec::new();

    let mut has_out = vec![false; n];
    for (j, arc) in h.hyperarcs().iter().enumerate() {
        let game_node = names.len();
        names.push(format!("#{j}"));
        owners.push(Owner::Max);
        edges.push((arc.tail(), game_node, 0));
        has_out[arc.tail()] = true;
        for (head, w) in arc.heads() {
            edges.push((game_node, head, w));
        }
    }
    for u in 0..n {
        if !has_out[u] {
            let comp = names.len();
            names.push(format!("{}.sink", h.node_name(u)));
            owners.push(Owner::Max);
            edges.push((u, comp, 0));
            edges.push((comp, u, 0));
        }
    }

    Mpg::new(names, owners, edges).expect("translation leaves no sinks")
}

/// Outcome of a consistency check: a feasible schedule over the events, or
/// the set of events with unbounded energy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HytnVerdict {
    Consistent(BTreeMap<String, Rational64>),
    Inconsistent(BTreeSet<String>),
}

impl HytnVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, HytnVerdict::Consistent(_))
    }
}

/// Decides consistency of an integral hyper network. On success the finite
/// energies, read over the event nodes, are themselves a feasible schedule:
/// for each hyperarc the Max-optimal head `v` satisfies
/// `E(tail) >= E(arc) >= E(v) - w(v)`.
pub fn check_hytn_consistency(h: &Hytn<i64>) -> (HytnVerdict, LiftStats) {
    let g = hytn_to_mpg(h);
    let (energy, stats) = solve_energy(&g);
    let n = h.node_count();
    let verdict = if (0..n).all(|u| energy.value(u).is_finite()) {
        let phi: BTreeMap<String, Rational64> = (0..n)
            .map(|u| {
                let e = energy.value(u).finite().expect("checked finite");
                (
                    h.node_name(u).to_owned(),
                    Rational64::from_integer(e as i64),
                )
            })
            .collect();
        debug_assert_eq!(h.is_feasible_schedule(&phi), Ok(true));
        HytnVerdict::Consistent(phi)
    } else {
        let tops: BTreeSet<String> = (0..n)
            .filter(|&u| !energy.value(u).is_finite())
            .map(|u| h.node_name(u).to_owned())
            .collect();
        HytnVerdict::Inconsistent(tops)
    };
    (verdict, stats)
}
