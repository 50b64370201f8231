//! Propositional labels: conjunctions of literals guarding events and constraints.
//!
//! A label is kept in canonical form — literals sorted by proposition name,
//! no proposition repeated — so consistency and subsumption checks are a
//! single linear merge and serialization is unique. Labels that mention a
//! proposition both positively and negatively are unsatisfiable and are
//! rejected at construction.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("label mentions `{0}` both positively and negatively")]
    Contradictory(String),
    #[error("invalid literal `{0}`")]
    InvalidLiteral(String),
}

/// A proposition or its negation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub proposition: String,
    pub negated: bool,
}

impl Literal {
    pub fn positive(p: impl Into<String>) -> Self {
        Self {
            proposition: p.into(),
            negated: false,
        }
    }

    pub fn negative(p: impl Into<String>) -> Self {
        Self {
            proposition: p.into(),
            negated: true,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{}", self.proposition)
        } else {
            write!(f, "{}", self.proposition)
        }
    }
}

/// A satisfiable conjunction of literals; the empty label is always true.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    literals: Vec<Literal>,
}

impl Label {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds the canonical form, deduplicating repeated literals and
    /// rejecting contradictory ones.
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self, LabelError> {
        let mut lits: Vec<Literal> = literals.into_iter().collect();
        lits.sort();
        lits.dedup();
        for pair in lits.windows(2) {
            if pair[0].proposition == pair[1].proposition {
                return Err(LabelError::Contradictory(pair[0].proposition.clone()));
            }
        }
        Ok(Self { literals: lits })
    }

    /// Parses the textual grammar: literals separated by whitespace, `-` for
    /// negation, empty string for the always-true label.
    pub fn parse(text: &str) -> Result<Self, LabelError> {
        let mut lits = Vec::new();
        for tok in text.split_whitespace() {
            let (negated, name) = match tok.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, tok),
            };
            if !is_valid_identifier(name) {
                return Err(LabelError::InvalidLiteral(tok.to_owned()));
            }
            lits.push(Literal {
                proposition: name.to_owned(),
                negated,
            });
        }
        Self::new(lits)
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn propositions(&self) -> impl Iterator<Item = &str> {
        self.literals.iter().map(|l| l.proposition.as_str())
    }

    pub fn mentions(&self, proposition: &str) -> bool {
        self.literals
            .binary_search_by(|l| l.proposition.as_str().cmp(proposition))
            .is_ok()
    }

    /// True when the conjunction of the two labels is satisfiable: no
    /// proposition occurs positively in one and negatively in the other.
    pub fn consistent_with(&self, other: &Label) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.literals.len() && j < other.literals.len() {
            let (a, b) = (&self.literals[i], &other.literals[j]);
            match a.proposition.cmp(&b.proposition) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if a.negated != b.negated {
                        return false;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        true
    }

    /// True when this label implies `other`: every literal of `other` occurs
    /// here. The empty label is subsumed by everything.
    pub fn subsumes(&self, other: &Label) -> bool {
        let mut i = 0;
        for lit in &other.literals {
            loop {
                match self.literals.get(i) {
                    Some(mine) if mine < lit => i += 1,
                    Some(mine) if mine == lit => break,
                    _ => return false,
                }
            }
        }
        true
    }

    /// Conjunction of two labels, failing if they contradict.
    pub fn and(&self, other: &Label) -> Result<Label, LabelError> {
        Label::new(self.literals.iter().chain(&other.literals).cloned())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{lit}")?;
        }
        Ok(())
    }
}

/// Identifier rule shared by propositions and node names: ASCII letter or
/// underscore first, then letters, digits or underscores. Keeps names free of
/// the characters the document grammar and expanded-node naming reserve.
pub fn is_valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Positive/negative bit masks for a label over an indexed proposition set.
/// A label holds under a scenario mask `s` iff all `pos` bits are set in `s`
/// and no `neg` bit is.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct LabelMask {
    pub pos: u64,
    pub neg: u64,
}

impl LabelMask {
    pub fn holds_under(self, scenario_mask: u64) -> bool {
        scenario_mask & self.pos == self.pos && scenario_mask & self.neg == 0
    }
}
