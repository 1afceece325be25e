//! Temporal formulas over activity atoms and condition atoms.
//!
//! The surface syntax is the ASCII notation used by pattern files:
//! `~` not, `&` and, `|` or, `=>` implies, `<>` eventually, `[]` always and
//! `c(name)` for the condition attached to an activity. Prefix operators bind
//! tightest, then `&`, then `|`, then `=>` (right associative).
//!
//! [`Formula::Next`] is internal to the prover's fixpoint expansion. It is never
//! produced by the parser and [`print_formula`] refuses to render it.

mod normal;
mod parser;
mod printer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use normal::{closure, nnf};
pub use parser::parse_formula;
pub use printer::print_formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("condition on `{param}` cannot be bound to the non-atomic formula `{bound}`")]
    CondSubstitution { param: String, bound: String },
    #[error("formula contains the internal next-step operator and has no surface syntax")]
    ContainsNext,
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An atomic activity, which doubles as an atomic proposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Atom(String);

impl Atom {
    pub fn new(name: impl Into<String>) -> Result<Self, FormulaError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(Atom(name))
        } else {
            Err(FormulaError::InvalidIdentifier(name))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Atom {
    type Error = FormulaError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Atom::new(value)
    }
}

impl From<Atom> for String {
    fn from(atom: Atom) -> Self {
        atom.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A proposition that can be true or false in a single state of a trace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prop {
    Atom(Atom),
    /// `c(subject)`: the condition evaluated at `subject` is satisfied.
    Cond(Atom),
}

impl Prop {
    pub fn subject(&self) -> &Atom {
        match self {
            Prop::Atom(a) | Prop::Cond(a) => a,
        }
    }

    pub fn to_formula(&self) -> Formula {
        match self {
            Prop::Atom(a) => Formula::Atom(a.clone()),
            Prop::Cond(a) => Formula::Cond(a.clone()),
        }
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prop::Atom(a) => write!(f, "{a}"),
            Prop::Cond(a) => write!(f, "c({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Cond(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
    /// Internal next-step operator.
    Next(Box<Formula>),
}

impl Formula {
    /// Atom constructor for identifiers known to be valid.
    ///
    /// Panics on an invalid identifier; use [`Atom::new`] for untrusted input.
    pub fn var(name: &str) -> Formula {
        Formula::Atom(Atom::new(name).expect("valid identifier"))
    }

    pub fn cond(subject: &str) -> Formula {
        Formula::Cond(Atom::new(subject).expect("valid identifier"))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::Always(Box::new(f))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    /// Conjunction of a non-empty list, associated to the left.
    pub fn conjunction(fs: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        fs.into_iter().reduce(Formula::and)
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::Cond(_) => vec![],
            Formula::Not(a) | Formula::Eventually(a) | Formula::Always(a) | Formula::Next(a) => {
                vec![a]
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => vec![a, b],
        }
    }

    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Cond(_) => true,
            Formula::Not(inner) => matches!(**inner, Formula::Atom(_) | Formula::Cond(_)),
            _ => false,
        }
    }

    pub fn contains_next(&self) -> bool {
        matches!(self, Formula::Next(_)) || self.children().into_iter().any(Formula::contains_next)
    }

    pub fn is_temporal(&self) -> bool {
        matches!(self, Formula::Eventually(_) | Formula::Always(_) | Formula::Next(_))
            || self.children().into_iter().any(Formula::is_temporal)
    }

    /// Every proposition occurring in the formula.
    pub fn props(&self) -> BTreeSet<Prop> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<Prop>) {
        match self {
            Formula::Atom(a) => {
                out.insert(Prop::Atom(a.clone()));
            }
            Formula::Cond(a) => {
                out.insert(Prop::Cond(a.clone()));
            }
            _ => self.children().into_iter().for_each(|c| c.collect_props(out)),
        }
    }

    /// Number of operator nodes (everything except atoms and conditions).
    pub fn operator_count(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Cond(_) => 0,
            _ => 1 + self.children().into_iter().map(Formula::operator_count).sum::<usize>(),
        }
    }

    /// Simultaneous substitution of atoms by formulas.
    ///
    /// A condition `c(p)` with `p` bound follows the binding only when `p` is
    /// bound to a single atom; any other binding is an error.
    pub fn substitute(&self, binding: &BTreeMap<Atom, Formula>) -> Result<Formula, FormulaError> {
        Ok(match self {
            Formula::Atom(a) => binding.get(a).cloned().unwrap_or_else(|| self.clone()),
            Formula::Cond(a) => match binding.get(a) {
                None => self.clone(),
                Some(Formula::Atom(target)) => Formula::Cond(target.clone()),
                Some(other) => {
                    return Err(FormulaError::CondSubstitution {
                        param: a.to_string(),
                        bound: other.to_string(),
                    })
                }
            },
            Formula::Not(a) => Formula::not(a.substitute(binding)?),
            Formula::And(a, b) => Formula::and(a.substitute(binding)?, b.substitute(binding)?),
            Formula::Or(a, b) => Formula::or(a.substitute(binding)?, b.substitute(binding)?),
            Formula::Implies(a, b) => Formula::implies(a.substitute(binding)?, b.substitute(binding)?),
            Formula::Eventually(a) => Formula::eventually(a.substitute(binding)?),
            Formula::Always(a) => Formula::always(a.substitute(binding)?),
            Formula::Next(a) => Formula::next(a.substitute(binding)?),
        })
    }
}

impl From<Atom> for Formula {
    fn from(atom: Atom) -> Self {
        Formula::Atom(atom)
    }
}

impl From<Prop> for Formula {
    fn from(prop: Prop) -> Self {
        prop.to_formula()
    }
}

/// Renders the ASCII syntax. `Next` shows up as `X` so internal formulas can
/// still be logged; use [`print_formula`] for user-facing output.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&printer::render(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// Free-standing form of [`Formula::substitute`].
pub fn substitute(f: &Formula, binding: &BTreeMap<Atom, Formula>) -> Result<Formula, FormulaError> {
    f.substitute(binding)
}
