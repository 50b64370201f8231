//! Hyper temporal networks: disjunctive difference constraints.
//!
//! A hyperarc has one tail and a nonempty weighted head set; a schedule
//! satisfies it when `phi(tail) >= min over heads of (phi(head) - weight)`.
//! A hyperarc with a single head is exactly a standard STN arc, so these
//! networks strictly generalize STNs.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

/// A total assignment of rational times to nodes.
pub type HytnSchedule = BTreeMap<String, Rational64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HytnError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("hyperarc from `{0}` has no heads")]
    EmptyHeads(String),
    #[error("hyperarc from `{0}` lists it as a head")]
    TailInHeads(String),
    #[error("hyperarc from `{tail}` lists head `{head}` twice")]
    DuplicateHead { tail: String, head: String },
    #[error("schedule is missing node `{0}`")]
    MissingTime(String),
    #[error("scaling weight {weight} by {factor} overflows or is not integral")]
    Scale { weight: String, factor: i64 },
}

/// Weight type shared by the rational construction and the integral solver.
pub trait HytnWeight: Copy + Ord + fmt::Debug + fmt::Display {
    fn as_rational(&self) -> Rational64;
}

impl HytnWeight for i64 {
    fn as_rational(&self) -> Rational64 {
        Rational64::from_integer(*self)
    }
}

impl HytnWeight for Rational64 {
    fn as_rational(&self) -> Rational64 {
        *self
    }
}

/// One disjunctive constraint: a tail and weighted heads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperarc<W> {
    pub(crate) tail: u32,
    pub(crate) heads: Vec<(u32, W)>,
}

impl<W: HytnWeight> Hyperarc<W> {
    pub fn tail(&self) -> usize {
        self.tail as usize
    }

    pub fn heads(&self) -> impl Iterator<Item = (usize, W)> + '_ {
        self.heads.iter().map(|&(h, w)| (h as usize, w))
    }

    pub fn head_count(&self) -> usize {
        self.heads.len()
    }

    /// Encoding size: heads plus the tail.
    pub fn size(&self) -> usize {
        self.heads.len() + 1
    }
}

#[derive(Clone, Debug, Default)]
pub struct Hytn<W> {
    names: Vec<String>,
    index: BTreeMap<String, u32>,
    arcs: Vec<Hyperarc<W>>,
}

impl<W: HytnWeight> Hytn<W> {
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            index: BTreeMap::new(),
            arcs: Vec::new(),
        }
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> Result<usize, HytnError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(HytnError::DuplicateNode(name));
        }
        let id = self.names.len();
        self.index.insert(name.clone(), id as u32);
        self.names.push(name);
        Ok(id)
    }

    pub fn add_hyperarc_by_id(
        &mut self,
        tail: usize,
        heads: Vec<(usize, W)>,
    ) -> Result<usize, HytnError> {
        let tail_name = self.names[tail].clone();
        if heads.is_empty() {
            return Err(HytnError::EmptyHeads(tail_name));
        }
        let mut seen = vec![false; self.names.len()];
        for &(h, _) in &heads {
            if h == tail {
                return Err(HytnError::TailInHeads(tail_name));
            }
            if seen[h] {
                return Err(HytnError::DuplicateHead {
                    tail: tail_name,
                    head: self.names[h].clone(),
                });
            }
            seen[h] = true;
        }
        let id = self.arcs.len();
        self.arcs.push(Hyperarc {
            tail: tail as u32,
            heads: heads.into_iter().map(|(h, w)| (h as u32, w)).collect(),
        });
        Ok(id)
    }

    pub fn add_hyperarc(
        &mut self,
        tail: &str,
        heads: &[(&str, W)],
    ) -> Result<usize, HytnError> {
        let t = self.node_id(tail)?;
        let hs = heads
            .iter()
            .map(|&(h, w)| Ok((self.node_id(h)?, w)))
            .collect::<Result<Vec<_>, HytnError>>()?;
        self.add_hyperarc_by_id(t, hs)
    }

    /// A standard arc `head - tail <= weight` as a single-head hyperarc.
    pub fn add_arc(&mut self, tail: &str, head: &str, weight: W) -> Result<usize, HytnError> {
        self.add_hyperarc(tail, &[(head, weight)])
    }

    fn node_id(&self, name: &str) -> Result<usize, HytnError> {
        self.index
            .get(name)
            .map(|&i| i as usize)
            .ok_or_else(|| HytnError::UnknownNode(name.to_owned()))
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn node_name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn node_names(&self) -> &[String] {
        &self.names
    }

    pub fn hyperarc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn hyperarcs(&self) -> &[Hyperarc<W>] {
        &self.arcs
    }

    /// Total encoding size: sum of hyperarc sizes.
    pub fn size(&self) -> usize {
        self.arcs.iter().map(|a| a.size()).sum()
    }

    pub fn max_abs_weight(&self) -> Rational64 {
        self.arcs
            .iter()
            .flat_map(|a| a.heads.iter())
            .map(|(_, w)| {
                let r = w.as_rational();
                if r < Rational64::from_integer(0) {
                    -r
                } else {
                    r
                }
            })
            .max()
            .unwrap_or_else(|| Rational64::from_integer(0))
    }

    /// Exact rational check of every hyperarc; returns the first violated
    /// one, if any. The schedule must cover every node.
    pub fn check_schedule(
        &self,
        phi: &BTreeMap<String, Rational64>,
    ) -> Result<Option<usize>, HytnError> {
        let mut times = Vec::with_capacity(self.names.len());
        for name in &self.names {
            times.push(
                phi.get(name)
                    .copied()
                    .ok_or_else(|| HytnError::MissingTime(name.clone()))?,
            );
        }
        for (i, arc) in self.arcs.iter().enumerate() {
            let t = times[arc.tail as usize];
            let bound = arc
                .heads
                .iter()
                .map(|&(h, w)| times[h as usize] - w.as_rational())
                .min()
                .expect("heads nonempty");
            if t < bound {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Whether the schedule satisfies every hyperarc.
    pub fn is_feasible_schedule(
        &self,
        phi: &BTreeMap<String, Rational64>,
    ) -> Result<bool, HytnError> {
        Ok(self.check_schedule(phi)?.is_none())
    }

    pub fn describe_hyperarc(&self, idx: usize) -> String {
        let arc = &self.arcs[idx];
        let heads: Vec<String> = arc
            .heads
            .iter()
            .map(|&(h, w)| format!("{}: {}", self.names[h as usize], w))
            .collect();
        format!("<{} -> {{{}}}>", self.names[arc.tail as usize], heads.join(", "))
    }
}

impl Hytn<Rational64> {
    /// Multiplies every weight by `factor`, requiring integral results.
    pub fn scale_to_integer(&self, factor: i64) -> Result<Hytn<i64>, HytnError> {
        let mut out = Hytn::new();
        for name in &self.names {
            out.add_node(name.clone()).expect("names already unique");
        }
        for arc in &self.arcs {
            let heads = arc
                .heads
                .iter()
                .map(|&(h, w)| {
                    let scaled = checked_scale(w, factor).ok_or(HytnError::Scale {
                        weight: w.to_string(),
                        factor,
                    })?;
                    Ok((h as usize, scaled))
                })
                .collect::<Result<Vec<_>, HytnError>>()?;
            out.add_hyperarc_by_id(arc.tail as usize, heads)?;
        }
        Ok(out)
    }
}

fn checked_scale(w: Rational64, factor: i64) -> Option<i64> {
    let num = w.numer().checked_mul(factor)?;
    if num % w.denom() != 0 {
        return None;
    }
    Some(num / w.denom())
}
