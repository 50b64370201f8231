//! Plain simple temporal networks: difference constraints without labels.
//!
//! An arc `(u, v, w)` constrains `phi(v) <= phi(u) + w`. Weights are kept
//! rational so restrictions, expansions and reaction-time arcs all fit the
//! same type.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StnError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("schedule is missing node `{0}`")]
    MissingTime(String),
}

/// A violated difference constraint, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcViolation {
    pub from: String,
    pub to: String,
    pub weight: Rational64,
    pub from_time: Rational64,
    pub to_time: Rational64,
}

impl fmt::Display for ArcViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} - {} <= {} violated: {} - {} = {}",
            self.to,
            self.from,
            self.weight,
            self.to_time,
            self.from_time,
            self.to_time - self.from_time
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct Stn {
    names: Vec<String>,
    index: BTreeMap<String, u32>,
    arcs: Vec<(u32, u32, Rational64)>,
}

impl Stn {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> Result<usize, StnError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(StnError::DuplicateNode(name));
        }
        let id = self.names.len();
        self.index.insert(name.clone(), id as u32);
        self.names.push(name);
        Ok(id)
    }

    pub fn add_arc(
        &mut self,
        from: &str,
        to: &str,
        weight: Rational64,
    ) -> Result<(), StnError> {
        let u = self.id(from)?;
        let v = self.id(to)?;
        self.arcs.push((u, v, weight));
        Ok(())
    }

    fn id(&self, name: &str) -> Result<u32, StnError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| StnError::UnknownNode(name.to_owned()))
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn node_names(&self) -> &[String] {
        &self.names
    }

    pub fn contains_node(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn arcs(&self) -> impl Iterator<Item = (&str, &str, Rational64)> {
        self.arcs
            .iter()
            .map(move |&(u, v, w)| (self.names[u as usize].as_str(), self.names[v as usize].as_str(), w))
    }

    /// Exact check of every arc against a schedule; returns the first
    /// violated constraint, if any.
    pub fn check_schedule(
        &self,
        phi: &BTreeMap<String, Rational64>,
    ) -> Result<Option<ArcViolation>, StnError> {
        let mut times = Vec::with_capacity(self.names.len());
        for name in &self.names {
            let t = phi
                .get(name)
                .copied()
                .ok_or_else(|| StnError::MissingTime(name.clone()))?;
            times.push(t);
        }
        for &(u, v, w) in &self.arcs {
            let (tu, tv) = (times[u as usize], times[v as usize]);
            if tv > tu + w {
                return Ok(Some(ArcViolation {
                    from: self.names[u as usize].clone(),
                    to: self.names[v as usize].clone(),
                    weight: w,
                    from_time: tu,
                    to_time: tv,
                }));
            }
        }
        Ok(None)
    }

    /// Bellman-Ford consistency: true iff the constraint graph has no
    /// negative cycle. Starts from a uniform potential, which is equivalent
    /// to a virtual source with zero-weight arcs to every node.
    pub fn is_consistent(&self) -> bool {
        let n = self.names.len();
        if n == 0 {
            return true;
        }
        let mut dist = vec![Rational64::zero(); n];
        for round in 0..=n {
            let mut changed = false;
            for &(u, v, w) in &self.arcs {
                let cand = dist[u as usize] + w;
                if cand < dist[v as usize] {
                    dist[v as usize] = cand;
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
            if round == n {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    #[test]
    fn detects_negative_cycle() {
        let mut stn = Stn::new();
        stn.add_node("u").unwrap();
        stn.add_node("v").unwrap();
        stn.add_arc("u", "v", r(-1)).unwrap();
        stn.add_arc("v", "u", r(0)).unwrap();
        assert!(!stn.is_consistent());
    }

    #[test]
    fn consistent_chain() {
        let mut stn = Stn::new();
        for n in ["a", "b", "c"] {
            stn.add_node(n).unwrap();
        }
        stn.add_arc("a", "b", r(3)).unwrap();
        stn.add_arc("b", "c", r(2)).unwrap();
        stn.add_arc("a", "c", r(5)).unwrap();
        assert!(stn.is_consistent());
    }

    #[test]
    fn negative_self_loop_is_inconsistent() {
        let mut stn = Stn::new();
        stn.add_node("u").unwrap();
        stn.add_arc("u", "u", r(-1)).unwrap();
        assert!(!stn.is_consistent());

        let mut ok = Stn::new();
        ok.add_node("u").unwrap();
        ok.add_arc("u", "u", r(0)).unwrap();
        assert!(ok.is_consistent());
    }

    #[test]
    fn schedule_check_reports_violation() {
        let mut stn = Stn::new();
        stn.add_node("u").unwrap();
        stn.add_node("v").unwrap();
        stn.add_arc("u", "v", r(-1)).unwrap();
        let phi: BTreeMap<String, Rational64> =
            [("u".to_owned(), r(0)), ("v".to_owned(), r(0))].into();
        let viol = stn.check_schedule(&phi).unwrap().unwrap();
        assert_eq!(viol.to.as_str(), "v");

        let good: BTreeMap<String, Rational64> =
            [("u".to_owned(), r(1)), ("v".to_owned(), r(0))].into();
        assert_eq!(stn.check_schedule(&good).unwrap(), None);
    }
}
