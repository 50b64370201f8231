//! Scenarios: total truth assignments over a network's proposition set.
//!
//! Scenarios are enumerated in a fixed lexicographic order over the
//! proposition list (false before true, first proposition most significant),
//! so scenario indices are stable and expanded-node names are reproducible.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::label::{Label, Literal};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown proposition `{0}`")]
pub struct UnknownProposition(pub String);

/// A total truth assignment over an ordered proposition list.
#[derive(Clone)]
pub struct Scenario {
    props: Arc<[String]>,
    index: u64,
    mask: u64,
}

impl Scenario {
    pub(crate) fn from_index(props: Arc<[String]>, index: u64) -> Self {
        let mask = mask_of_index(index, props.len());
        Self { props, index, mask }
    }

    /// Position in the enumeration order (0 ..= 2^|P| - 1).
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn propositions(&self) -> &[String] {
        &self.props
    }

    pub(crate) fn mask(&self) -> u64 {
        self.mask
    }

    pub fn value(&self, proposition: &str) -> Option<bool> {
        let j = self.props.iter().position(|p| p == proposition)?;
        Some(self.mask >> j & 1 == 1)
    }

    /// Truth value of a label under this scenario.
    pub fn eval(&self, label: &Label) -> Result<bool, UnknownProposition> {
        for lit in label.literals() {
            let v = self
                .value(&lit.proposition)
                .ok_or_else(|| UnknownProposition(lit.proposition.clone()))?;
            if v == lit.negated {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The label describing this scenario: one literal per proposition.
    pub fn label(&self) -> Label {
        let lits = self.props.iter().enumerate().map(|(j, p)| Literal {
            proposition: p.clone(),
            negated: self.mask >> j & 1 == 0,
        });
        Label::new(lits).expect("one literal per proposition cannot contradict")
    }
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && self.props == other.props
    }
}

impl Eq for Scenario {}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scenario({})", self.label())
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Converts an enumeration index to the internal mask where bit `j` carries
/// the value of proposition `j`. The first proposition varies slowest.
pub(crate) fn mask_of_index(index: u64, prop_count: usize) -> u64 {
    let mut mask = 0;
    for j in 0..prop_count {
        let bit = index >> (prop_count - 1 - j) & 1;
        mask |= bit << j;
    }
    mask
}

/// All scenarios over `props`, in enumeration order.
pub fn enumerate(props: &Arc<[String]>) -> Vec<Scenario> {
    let n = props.len();
    assert!(n <= 60, "proposition count out of supported range");
    (0..1u64 << n)
        .map(|i| Scenario::from_index(props.clone(), i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props(names: &[&str]) -> Arc<[String]> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn enumeration_order_false_first() {
        let ps = props(&["p", "q"]);
        let labels: Vec<String> = enumerate(&ps).iter().map(|s| s.to_string()).collect();
        assert_eq!(labels, vec!["-p -q", "-p q", "p -q", "p q"]);
    }

    #[test]
    fn empty_proposition_set_has_one_scenario() {
        let ps = props(&[]);
        let all = enumerate(&ps);
        assert_eq!(all.len(), 1);
        assert!(all[0].label().is_empty());
    }

    #[test]
    fn single_proposition() {
        let ps = props(&["x"]);
        let all = enumerate(&ps);
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].value("x"), Some(false));
        assert_eq!(all[1].value("x"), Some(true));
    }

    #[test]
    fn eval_examples() {
        let ps = props(&["p", "q"]);
        let all = enumerate(&ps);
        // p true, q false
        let s = &all[2];
        assert_eq!(s.eval(&Label::parse("p -q").unwrap()), Ok(true));
        assert_eq!(s.label().to_string(), "p -q");
        assert_eq!(s.eval(&Label::empty()), Ok(true));

        let lone = props(&["p"]);
        let s0 = &enumerate(&lone)[0];
        assert_eq!(s0.eval(&Label::parse("p").unwrap()), Ok(false));
        assert!(s0.eval(&Label::parse("r").unwrap()).is_err());
    }
}
