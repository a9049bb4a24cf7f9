//! Attribute lists and AND-gate access policies with wildcards.
//!
//! A policy `W = [W_1 .. W_n]` holds a literal or a wildcard at each
//! position. An attribute list `S` of the same length satisfies `W` when
//! `S_i = W_i` at every literal position; wildcard positions match
//! anything. Values compare equal after Unicode NFC normalization and
//! trimming.
//!
//! Policy text has one line per position:
//!
//! ```text
//! AA_UD:UD
//! AA_UD:PhD Student
//! Gender*
//! ```
//!
//! `authority:value` is a literal validated by `authority`, a bare `value`
//! is a literal with no authority, and `*` (optionally labelled, as in
//! `Gender*`) is a wildcard. Blank lines and lines starting with `#` are
//! ignored.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("attribute lists and policies need at least one position")]
    Empty,
    #[error("position {position} is empty")]
    EmptyValue { position: usize },
    #[error("position {position}: {reason}")]
    Invalid { position: usize, reason: String },
    #[error("attribute list has {attributes} positions but the policy has {policy}")]
    LengthMismatch { attributes: usize, policy: usize },
    #[error("literal at position {position} has no validating authority")]
    UnboundAuthority { position: usize },
}

/// NFC-normalized, trimmed form used for every comparison.
pub fn normalize(value: &str) -> String {
    value.nfc().collect::<String>().trim().to_string()
}

/// `S = [S_1 .. S_n]`, n ≥ 1, no empty position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct AttributeList(Vec<String>);

impl AttributeList {
    pub fn new<I, T>(values: I) -> Result<Self, PolicyError>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let values: Vec<String> = values.into_iter().map(|v| normalize(v.as_ref())).collect();
        if values.is_empty() {
            return Err(PolicyError::Empty);
        }
        if let Some(i) = values.iter().position(String::is_empty) {
            return Err(PolicyError::EmptyValue { position: i + 1 });
        }
        Ok(AttributeList(values))
    }

    /// Comma-separated values, e.g. `UD,PhD Student,Female`.
    pub fn parse_csv(text: &str) -> Result<Self, PolicyError> {
        Self::new(text.split(','))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[String] {
        &self.0
    }
}

impl TryFrom<Vec<String>> for AttributeList {
    type Error = PolicyError;
    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        AttributeList::new(v)
    }
}

impl From<AttributeList> for Vec<String> {
    fn from(l: AttributeList) -> Self {
        l.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Literal { authority: Option<String>, value: String },
    Wildcard { label: Option<String> },
}

impl Term {
    pub fn literal(authority: &str, value: &str) -> Term {
        Term::Literal {
            authority: Some(authority.to_string()),
            value: value.to_string(),
        }
    }

    pub fn unbound(value: &str) -> Term {
        Term::Literal {
            authority: None,
            value: value.to_string(),
        }
    }

    pub fn wildcard() -> Term {
        Term::Wildcard { label: None }
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, Term::Wildcard { .. })
    }

    fn normalized(self, position: usize) -> Result<Term, PolicyError> {
        let invalid = |reason: &str| PolicyError::Invalid {
            position,
            reason: reason.to_string(),
        };
        match self {
            Term::Literal { authority, value } => {
                let value = normalize(&value);
                if value.is_empty() {
                    return Err(PolicyError::EmptyValue { position });
                }
                let authority = authority.map(|a| normalize(&a));
                match &authority {
                    Some(a) if a.is_empty() || a.contains(':') || a.starts_with('#') => {
                        return Err(invalid("authority must be non-empty without ':' or a leading '#'"))
                    }
                    Some(_) => {}
                    None if value.contains(':') || value.ends_with('*') || value.starts_with('#') => {
                        return Err(invalid(
                            "a literal without authority cannot contain ':', end in '*' or start with '#'",
                        ))
                    }
                    None => {}
                }
                Ok(Term::Literal { authority, value })
            }
            Term::Wildcard { label } => {
                let label = label.map(|l| normalize(&l)).filter(|l| !l.is_empty());
                if label
                    .as_deref()
                    .is_some_and(|l| l.contains(':') || l.contains('*') || l.starts_with('#'))
                {
                    return Err(invalid("wildcard label cannot contain ':' or '*' or start with '#'"));
                }
                Ok(Term::Wildcard { label })
            }
        }
    }

    fn render(&self) -> String {
        match self {
            Term::Literal {
                authority: Some(a),
                value,
            } => format!("{a}:{value}"),
            Term::Literal { authority: None, value } => value.clone(),
            Term::Wildcard { label } => format!("{}*", label.as_deref().unwrap_or("")),
        }
    }
}

/// One token a user must hold: `value` at one-based `position`, as validated
/// by `authority`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RequiredToken {
    pub position: usize,
    pub authority: String,
    pub value: String,
}

/// `W = [W_1 .. W_n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Term>", into = "Vec<Term>")]
pub struct AccessPolicy {
    terms: Vec<Term>,
}

impl TryFrom<Vec<Term>> for AccessPolicy {
    type Error = PolicyError;
    fn try_from(terms: Vec<Term>) -> Result<Self, Self::Error> {
        AccessPolicy::new(terms)
    }
}

impl From<AccessPolicy> for Vec<Term> {
    fn from(p: AccessPolicy) -> Self {
        p.terms
    }
}

impl AccessPolicy {
    pub fn new(terms: Vec<Term>) -> Result<Self, PolicyError> {
        if terms.is_empty() {
            return Err(PolicyError::Empty);
        }
        let terms = terms
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.normalized(i + 1))
            .collect::<Result<_, _>>()?;
        Ok(AccessPolicy { terms })
    }

    pub fn parse(text: &str) -> Result<Self, PolicyError> {
        let terms = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|line| {
                if let Some((authority, value)) = line.split_once(':') {
                    Term::literal(authority, value)
                } else if let Some(label) = line.strip_suffix('*') {
                    Term::Wildcard {
                        label: Some(label.to_string()),
                    }
                } else {
                    Term::unbound(line)
                }
            })
            .collect();
        Self::new(terms)
    }

    pub fn render(&self) -> String {
        self.terms.iter().map(|t| t.render() + "\n").collect()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `I_W`: zero-based positions holding literals.
    pub fn index_set(&self) -> BTreeSet<usize> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_wildcard())
            .map(|(i, _)| i)
            .collect()
    }

    /// Whether `attributes` satisfies the policy. Lists of a different
    /// length are an error, never a plain `false`.
    pub fn satisfied_by(&self, attributes: &AttributeList) -> Result<bool, PolicyError> {
        if attributes.len() != self.len() {
            return Err(PolicyError::LengthMismatch {
                attributes: attributes.len(),
                policy: self.len(),
            });
        }
        Ok(self.terms.iter().zip(attributes.values()).all(|(t, s)| match t {
            Term::Literal { value, .. } => value == s,
            Term::Wildcard { .. } => true,
        }))
    }

    /// One `(authority, value)` entry per literal position; wildcards
    /// contribute nothing.
    pub fn required_tokens(&self) -> Result<BTreeSet<RequiredToken>, PolicyError> {
        self.terms
            .iter()
            .enumerate()
            .filter_map(|(i, t)| match t {
                Term::Literal {
                    authority: Some(a),
                    value,
                } => Some(Ok(RequiredToken {
                    position: i + 1,
                    authority: a.clone(),
                    value: value.clone(),
                })),
                Term::Literal { authority: None, .. } => Some(Err(PolicyError::UnboundAuthority { position: i + 1 })),
                Term::Wildcard { .. } => None,
            })
            .collect()
    }

    /// The authority bound to each position (`None` for wildcards and
    /// unbound literals).
    pub fn authorities(&self) -> Vec<Option<&str>> {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Literal { authority, .. } => authority.as_deref(),
                Term::Wildcard { .. } => None,
            })
            .collect()
    }
}

/// `S ⊨ W`.
pub fn satisfies(attributes: &AttributeList, policy: &AccessPolicy) -> Result<bool, PolicyError> {
    policy.satisfied_by(attributes)
}

#[cfg(test)]
mod tests;
