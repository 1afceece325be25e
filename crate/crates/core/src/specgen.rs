//! Logical specification generation.
//!
//! Pattern occurrences of a workflow expression are visited in pre-order. Each
//! occurrence contributes one instantiated copy of its pattern's templates:
//! atomic arguments are passed through, and a nested pattern `r` is replaced by
//! `entry(r) | exit(r)` wherever its parameter occurs.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::{parse_formula, print_formula, Formula, FormulaError, Prop};
use crate::pattern::{instantiate_pattern, PatternError, PatternSet};
use crate::workflow::{ModelFile, WorkflowArg, WorkflowExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("pattern `{0}` is not defined")]
    UnknownPattern(String),
    #[error("{label}: occurrence {occurrence} of `{pattern}`: {source}")]
    Instantiate {
        label: String,
        pattern: String,
        occurrence: usize,
        #[source]
        source: PatternError,
    },
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: FormulaError,
    },
}

/// Where a generated formula came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub label: String,
    pub pattern: String,
    /// Pre-order index of the pattern occurrence within its expression.
    pub occurrence: usize,
    /// Index of the template within the pattern definition.
    pub template: usize,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}#{}/{}",
            self.label, self.pattern, self.occurrence, self.template
        )
    }
}

impl std::str::FromStr for Provenance {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (label, rest) = s.split_once('/').ok_or(())?;
        let (pattern, rest) = rest.split_once('#').ok_or(())?;
        let (occurrence, template) = rest.split_once('/').ok_or(())?;
        Ok(Provenance {
            label: label.to_string(),
            pattern: pattern.to_string(),
            occurrence: occurrence.parse().map_err(|_| ())?,
            template: template.parse().map_err(|_| ())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecEntry {
    pub formula: Formula,
    pub provenance: Option<Provenance>,
}

/// An ordered set of formulas; structurally equal formulas are kept once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogicalSpecification {
    entries: Vec<SpecEntry>,
}

impl LogicalSpecification {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_formulas(fs: impl IntoIterator<Item = Formula>) -> Self {
        let mut spec = Self::new();
        for f in fs {
            spec.push(f, None);
        }
        spec
    }

    /// Appends `formula` unless an equal formula is already present.
    pub fn push(&mut self, formula: Formula, provenance: Option<Provenance>) -> bool {
        if self.entries.iter().any(|e| e.formula == formula) {
            return false;
        }
        self.entries.push(SpecEntry { formula, provenance });
        true
    }

    pub fn entries(&self) -> &[SpecEntry] {
        &self.entries
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.entries.iter().map(|e| &e.formula)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All atoms and condition atoms mentioned by the formulas.
    pub fn atom_universe(&self) -> BTreeSet<Prop> {
        self.formulas().flat_map(Formula::props).collect()
    }

    /// Entries satisfying `keep`, in their original order.
    pub fn select(&self, keep: impl Fn(&SpecEntry) -> bool) -> LogicalSpecification {
        LogicalSpecification {
            entries: self.entries.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }
}

/// Runs the generation algorithm over a single workflow expression.
pub fn generate_for_expr(
    w: &WorkflowExpr,
    patterns: &PatternSet,
    label: &str,
) -> Result<LogicalSpecification, SpecError> {
    let mut spec = LogicalSpecification::new();
    for (occurrence, node) in w.occurrences().into_iter().enumerate() {
        let def = patterns
            .resolve(&node.pattern)
            .ok_or_else(|| SpecError::UnknownPattern(node.pattern.clone()))?;
        let args: Vec<Formula> = node
            .args
            .iter()
            .map(|arg| match arg {
                WorkflowArg::Atom(a) => Formula::Atom(a.clone()),
                WorkflowArg::Pattern(r) => Formula::or(
                    Formula::Atom(r.joined_entry().clone()),
                    Formula::Atom(r.joined_exit().clone()),
                ),
            })
            .collect();
        let instances = instantiate_pattern(def, &args).map_err(|source| SpecError::Instantiate {
            label: label.to_string(),
            pattern: def.name().to_string(),
            occurrence,
            source,
        })?;
        for (template, formula) in instances.into_iter().enumerate() {
            spec.push(
                formula,
                Some(Provenance {
                    label: label.to_string(),
                    pattern: def.name().to_string(),
                    occurrence,
                    template,
                }),
            );
        }
    }
    Ok(spec)
}

/// Generates one specification per workflow of `model`, in file order.
pub fn generate_for_model(
    model: &ModelFile,
    patterns: &PatternSet,
) -> Result<Vec<(String, LogicalSpecification)>, SpecError> {
    model
        .workflows
        .iter()
        .map(|(label, expr)| Ok((label.clone(), generate_for_expr(expr, patterns, label)?)))
        .collect()
}

/// Union of specifications in input order; the first provenance of a
/// duplicated formula wins.
pub fn sum_specs<'a>(specs: impl IntoIterator<Item = &'a LogicalSpecification>) -> LogicalSpecification {
    let mut out = LogicalSpecification::new();
    for spec in specs {
        for e in &spec.entries {
            out.push(e.formula.clone(), e.provenance.clone());
        }
    }
    out
}

/// One formula per line, followed by `# label/Pattern#occurrence/template`
/// when the provenance is known.
pub fn write_spec_file(spec: &LogicalSpecification) -> String {
    let mut out = String::new();
    for e in &spec.entries {
        out.push_str(&print_formula(&e.formula).expect("specifications are next-free"));
        if let Some(p) = &e.provenance {
            out.push_str(&format!("  # {p}"));
        }
        out.push('\n');
    }
    out
}

/// Reads a spec file: one formula per line, `#` starts a comment. A comment
/// that reads as a provenance tag is attached to its formula.
pub fn parse_spec_file(text: &str) -> Result<LogicalSpecification, SpecError> {
    let mut spec = LogicalSpecification::new();
    for (idx, line) in text.lines().enumerate() {
        let (body, comment) = match line.split_once('#') {
            Some((body, comment)) => (body, Some(comment.trim())),
            None => (line, None),
        };
        if body.trim().is_empty() {
            continue;
        }
        let formula = parse_formula(body).map_err(|source| SpecError::Line { line: idx + 1, source })?;
        let provenance = comment.and_then(|c| c.parse().ok());
        spec.push(formula, provenance);
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workflow::parse_workflow_expr;

    fn gen(text: &str, label: &str) -> LogicalSpecification {
        let set = PatternSet::standard();
        generate_for_expr(&parse_workflow_expr(text, &set).unwrap(), &set, label).unwrap()
    }

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn carriage_order_and_provenance() {
        let spec = gen("Seq(Seq(k,l),d)", "UC3");
        assert_eq!(spec.len(), 6);
        assert_eq!(spec.entries()[0].formula, f("(k | l) => <>d"));
        assert_eq!(spec.entries()[3].formula, f("k => <>l"));
        let text = write_spec_file(&spec);
        assert_eq!(text.lines().next().unwrap(), "k | l => <>d  # UC3/Sequence#0/0");
        assert_eq!(text.lines().nth(5).unwrap(), "[]~(k & l)  # UC3/Sequence#1/2");
        assert_eq!(parse_spec_file(&text).unwrap(), spec);
    }

    #[test]
    fn empty_spec_file() {
        assert_eq!(write_spec_file(&LogicalSpecification::new()), "");
        assert!(parse_spec_file("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn spec_file_errors_carry_lines() {
        let err = parse_spec_file("p\n(q & \n").unwrap_err();
        assert!(matches!(err, SpecError::Line { line: 2, .. }));
    }

    #[test]
    fn plain_comments_are_not_provenance() {
        let spec = parse_spec_file("p => <>q  # liveness of q\n").unwrap();
        assert_eq!(spec.entries()[0].provenance, None);
    }

    #[test]
    fn sum_identities() {
        let l3 = gen("Seq(Seq(k,l),d)", "UC3");
        assert_eq!(sum_specs([&l3, &l3]), l3);
        assert_eq!(sum_specs([&LogicalSpecification::new(), &l3]), l3);
        let l2 = gen("Seq(a,Branch(b,Concur(Seq(c,d),Seq(e,f),g,h),i,j))", "UC2");
        let total = sum_specs([&l2, &l3]);
        assert_eq!(total.len(), 30);
        assert_eq!(total.entries()[24].provenance.as_ref().unwrap().label, "UC3");
    }

    #[test]
    fn conditioned_parameter_rejects_pattern_argument() {
        let set = PatternSet::standard();
        let w = parse_workflow_expr("Loop(a, Seq(x, y), c, d)", &set).unwrap();
        let err = generate_for_expr(&w, &set, "W").unwrap_err();
        assert!(matches!(
            err,
            SpecError::Instantiate {
                source: PatternError::Formula(FormulaError::CondSubstitution { .. }),
                ..
            }
        ));
    }

    #[test]
    fn all_pattern_arguments_still_emit_one_copy() {
        let spec = gen("Seq(Seq(a,b),Seq(c,d))", "W");
        assert_eq!(spec.len(), 9);
        assert_eq!(spec.entries()[0].formula, f("(a | b) => <>(c | d)"));
    }

    #[test]
    fn loop_with_atomic_body() {
        let spec = gen("Seq(s, Loop(a, b, c, d))", "W");
        assert_eq!(spec.len(), 3 + 14);
        assert!(spec.formulas().any(|x| *x == f("b & c(b) => <>c & ~<>d")));
        assert!(spec
            .atom_universe()
            .contains(&Prop::Cond(crate::formula::Atom::new("b").unwrap())));
    }
}
