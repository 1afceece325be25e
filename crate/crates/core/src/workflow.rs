//! Workflow expressions and model files.
//!
//! A workflow expression nests pattern applications whose leaves are activity
//! atoms, e.g. `Seq(a, Branch(b, Concur(Seq(c,d), Seq(e,f), g, h), i, j))`.
//! A model file bundles display names for atoms with any number of labelled
//! workflows:
//!
//! ```text
//! # insurance claims
//! atom a = "Application"
//! workflow UC3: Seq(Seq(k, l), d)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::diag::{Diagnostic, DiagnosticKind};
use crate::formula::{is_identifier, Atom};
use crate::pattern::PatternSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkflowError {
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<WorkflowError>,
    },
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("pattern `{pattern}` expects {expected} argument(s), got {found}")]
    ArityMismatch {
        pattern: String,
        expected: usize,
        found: usize,
    },
    #[error("atom `{0}` occurs more than once in the expression")]
    DuplicateAtom(String),
    #[error("workflow label `{0}` is used twice")]
    DuplicateLabel(String),
    #[error("atom `{0}` has two display names")]
    DuplicateAlias(String),
    #[error("model contains no workflows")]
    EmptyModel,
}

impl WorkflowError {
    pub fn root(&self) -> &WorkflowError {
        match self {
            WorkflowError::AtLine { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            WorkflowError::AtLine { line, .. } => Some(*line),
            _ => None,
        }
    }

    fn at(self, line: usize) -> WorkflowError {
        WorkflowError::AtLine {
            line,
            source: Box::new(self),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WorkflowArg {
    Atom(Atom),
    Pattern(WorkflowExpr),
}

/// A pattern applied to atoms and nested patterns. `pattern` is always the
/// resolved pattern name, never an alias.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkflowExpr {
    pub pattern: String,
    pub args: Vec<WorkflowArg>,
}

impl WorkflowExpr {
    /// Atom reached by following first arguments down to a leaf.
    pub fn joined_entry(&self) -> &Atom {
        match self.args.first() {
            Some(WorkflowArg::Atom(a)) => a,
            Some(WorkflowArg::Pattern(inner)) => inner.joined_entry(),
            None => unreachable!("patterns have at least two arguments"),
        }
    }

    /// Atom reached by following last arguments down to a leaf.
    pub fn joined_exit(&self) -> &Atom {
        match self.args.last() {
            Some(WorkflowArg::Atom(a)) => a,
            Some(WorkflowArg::Pattern(inner)) => inner.joined_exit(),
            None => unreachable!("patterns have at least two arguments"),
        }
    }

    /// Atoms in textual order, duplicates included.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        for arg in &self.args {
            match arg {
                WorkflowArg::Atom(a) => out.push(a),
                WorkflowArg::Pattern(p) => p.collect_atoms(out),
            }
        }
    }

    /// Pattern occurrences in pre-order (outermost first, then left to right).
    pub fn occurrences(&self) -> Vec<&WorkflowExpr> {
        let mut out = Vec::new();
        self.collect_occurrences(&mut out);
        out
    }

    fn collect_occurrences<'a>(&'a self, out: &mut Vec<&'a WorkflowExpr>) {
        out.push(self);
        for arg in &self.args {
            if let WorkflowArg::Pattern(p) = arg {
                p.collect_occurrences(out);
            }
        }
    }

    /// Checks arity against `patterns` and atom uniqueness.
    pub fn check(&self, patterns: &PatternSet) -> Result<(), WorkflowError> {
        self.check_arity(patterns)?;
        let mut seen = BTreeSet::new();
        for atom in self.atoms() {
            if !seen.insert(atom) {
                return Err(WorkflowError::DuplicateAtom(atom.to_string()));
            }
        }
        Ok(())
    }

    fn check_arity(&self, patterns: &PatternSet) -> Result<(), WorkflowError> {
        let def = patterns
            .resolve(&self.pattern)
            .ok_or_else(|| WorkflowError::UnknownPattern(self.pattern.clone()))?;
        if def.arity() != self.args.len() {
            return Err(WorkflowError::ArityMismatch {
                pattern: self.pattern.clone(),
                expected: def.arity(),
                found: self.args.len(),
            });
        }
        for arg in &self.args {
            if let WorkflowArg::Pattern(p) = arg {
                p.check_arity(patterns)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for WorkflowExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pattern)?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match arg {
                WorkflowArg::Atom(a) => write!(f, "{a}")?,
                WorkflowArg::Pattern(p) => write!(f, "{p}")?,
            }
        }
        f.write_str(")")
    }
}

pub fn joined_entry(w: &WorkflowExpr) -> &Atom {
    w.joined_entry()
}

pub fn joined_exit(w: &WorkflowExpr) -> &Atom {
    w.joined_exit()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Open,
    Close,
    Comma,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, WorkflowError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '(' => out.push((i, Tok::Open)),
            ')' => out.push((i, Tok::Close)),
            ',' => out.push((i, Tok::Comma)),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = i + c.len_utf8();
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        end = j + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((i, Tok::Ident(text[i..end].to_string())));
            }
            other => {
                return Err(WorkflowError::Syntax {
                    position: i,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    patterns: &'a PatternSet,
}

impl ExprParser<'_> {
    fn error(&self, message: impl Into<String>) -> WorkflowError {
        WorkflowError::Syntax {
            position: self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o),
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), WorkflowError> {
        if self.tokens.get(self.pos).map(|(_, t)| t) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn call(&mut self) -> Result<WorkflowExpr, WorkflowError> {
        let name = match self.tokens.get(self.pos) {
            Some((_, Tok::Ident(name))) => name.clone(),
            _ => return Err(self.error("expected a pattern name")),
        };
        self.pos += 1;
        self.expect(Tok::Open, "`(` after pattern name")?;
        let def = self
            .patterns
            .resolve(&name)
            .ok_or_else(|| WorkflowError::UnknownPattern(name.clone()))?;
        let mut args = Vec::new();
        loop {
            args.push(self.argument()?);
            match self.tokens.get(self.pos).map(|(_, t)| t) {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::Close) => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.error("expected `,` or `)`")),
            }
        }
        if args.len() != def.arity() {
            return Err(WorkflowError::ArityMismatch {
                pattern: def.name().to_string(),
                expected: def.arity(),
                found: args.len(),
            });
        }
        Ok(WorkflowExpr {
            pattern: def.name().to_string(),
            args,
        })
    }

    fn argument(&mut self) -> Result<WorkflowArg, WorkflowError> {
        match (self.tokens.get(self.pos), self.tokens.get(self.pos + 1)) {
            (Some((_, Tok::Ident(_))), Some((_, Tok::Open))) => Ok(WorkflowArg::Pattern(self.call()?)),
            (Some((_, Tok::Ident(name))), _) => {
                let atom = Atom::new(name.clone()).map_err(|_| self.error("invalid atom"))?;
                self.pos += 1;
                Ok(WorkflowArg::Atom(atom))
            }
            _ => Err(self.error("expected an atom or a pattern")),
        }
    }
}

/// Parses and validates a workflow expression against `patterns`.
pub fn parse_workflow_expr(text: &str, patterns: &PatternSet) -> Result<WorkflowExpr, WorkflowError> {
    let mut parser = ExprParser {
        tokens: lex(text)?,
        pos: 0,
        end: text.len(),
        patterns,
    };
    if parser.tokens.is_empty() {
        return Err(parser.error("empty expression"));
    }
    let expr = parser.call()?;
    if parser.pos < parser.tokens.len() {
        return Err(parser.error("trailing input after expression"));
    }
    expr.check(patterns)?;
    Ok(expr)
}

/// Display names for atoms plus labelled workflows, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelFile {
    pub atom_aliases: BTreeMap<Atom, String>,
    pub workflows: Vec<(String, WorkflowExpr)>,
}

impl ModelFile {
    pub fn display_name<'a>(&'a self, atom: &'a Atom) -> &'a str {
        self.atom_aliases.get(atom).map_or(atom.name(), String::as_str)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (atom, name) in &self.atom_aliases {
            out.push_str(&format!("atom {atom} = {name:?}\n"));
        }
        for (label, expr) in &self.workflows {
            out.push_str(&format!("workflow {label}: {expr}\n"));
        }
        out
    }
}

fn paren_balance(text: &str) -> i64 {
    text.chars().fold(0, |n, c| match c {
        '(' => n + 1,
        ')' => n - 1,
        _ => n,
    })
}

fn parse_atom_line(rest: &str) -> Result<(Atom, String), WorkflowError> {
    let bad = || WorkflowError::Syntax {
        position: 0,
        message: "expected `atom <id> = \"<display name>\"`".into(),
    };
    let (id, name) = rest.split_once('=').ok_or_else(bad)?;
    let atom = Atom::new(id.trim()).map_err(|_| bad())?;
    let name = name.trim();
    let name = name
        .strip_prefix('"')
        .and_then(|n| n.strip_suffix('"'))
        .ok_or_else(bad)?;
    Ok((atom, name.to_string()))
}

/// Parses a model file; every workflow is validated against `patterns`.
pub fn parse_model_file(text: &str, patterns: &PatternSet) -> Result<ModelFile, WorkflowError> {
    let mut model = ModelFile::default();
    let mut labels = BTreeSet::new();
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let line_no = i + 1;
        let line = lines[i].split('#').next().unwrap_or("").trim();
        i += 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("atom ") {
            let (atom, name) = parse_atom_line(rest).map_err(|e| e.at(line_no))?;
            if model.atom_aliases.contains_key(&atom) {
                return Err(WorkflowError::DuplicateAlias(atom.to_string()).at(line_no));
            }
            model.atom_aliases.insert(atom, name);
        } else if let Some(rest) = line.strip_prefix("workflow ") {
            let (label, expr) = rest.split_once(':').ok_or_else(|| {
                WorkflowError::Syntax {
                    position: 0,
                    message: "expected `workflow <label>: <expression>`".into(),
                }
                .at(line_no)
            })?;
            let label = label.trim();
            if !is_identifier(label) {
                return Err(WorkflowError::Syntax {
                    position: 0,
                    message: format!("invalid workflow label `{label}`"),
                }
                .at(line_no));
            }
            let mut expr_text = expr.to_string();
            while paren_balance(&expr_text) > 0 && i < lines.len() {
                expr_text.push('\n');
                expr_text.push_str(lines[i].split('#').next().unwrap_or(""));
                i += 1;
            }
            let expr = parse_workflow_expr(&expr_text, patterns).map_err(|e| e.at(line_no))?;
            if !labels.insert(label.to_string()) {
                return Err(WorkflowError::DuplicateLabel(label.to_string()).at(line_no));
            }
            model.workflows.push((label.to_string(), expr));
        } else {
            return Err(WorkflowError::Syntax {
                position: 0,
                message: format!("unrecognised line `{line}`"),
            }
            .at(line_no));
        }
    }
    if model.workflows.is_empty() {
        return Err(WorkflowError::EmptyModel);
    }
    Ok(model)
}

/// Re-checks a model and reports findings; errors for broken structure,
/// warnings for atoms without a display name and unused display names.
pub fn validate_model(model: &ModelFile, patterns: &PatternSet) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut used = BTreeSet::new();
    let mut labels = BTreeSet::new();
    for (label, expr) in &model.workflows {
        if !labels.insert(label) {
            out.push(Diagnostic::error(
                DiagnosticKind::DuplicateLabel,
                label,
                "workflow label is used twice",
            ));
        }
        if let Err(e) = expr.check(patterns) {
            let kind = match e {
                WorkflowError::DuplicateAtom(_) => DiagnosticKind::DuplicateAtom,
                WorkflowError::ArityMismatch { .. } => DiagnosticKind::ArityMismatch,
                _ => DiagnosticKind::UnknownPattern,
            };
            out.push(Diagnostic::error(kind, label, e.to_string()));
        }
        for atom in expr.atoms() {
            if used.insert(atom) && !model.atom_aliases.contains_key(atom) {
                out.push(Diagnostic::warning(
                    DiagnosticKind::UnaliasedAtom,
                    label,
                    format!("atom `{atom}` has no display name"),
                ));
            }
        }
    }
    for atom in model.atom_aliases.keys() {
        if !used.contains(atom) {
            out.push(Diagnostic::warning(
                DiagnosticKind::UnusedAlias,
                atom.name(),
                "display name declared for an atom no workflow uses",
            ));
        }
    }
    out
}
