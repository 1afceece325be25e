//! Predefined workflow patterns and their formula templates.
//!
//! A pattern file is line based:
//!
//! ```text
//!                                      /* ver. 6.01.2014 */
//! Sequence(f1,f4):
//! f1 => <>f4 / ~f1 => ~<>f4 / []~(f1 & f4)
//! alias Seq = Sequence
//! ```
//!
//! A header `Name(p1,...,pn):` opens a pattern; every following line up to the
//! next header holds one or more templates separated by `/`. Comments are
//! either `/* ... */` (may span lines) or `#` to the end of the line.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::diag::{Diagnostic, DiagnosticKind};
use crate::formula::{parse_formula, print_formula, Atom, Formula, FormulaError, Prop};

/// The standard pattern set: Sequence, Concurrency, Branching and LoopWhile.
pub const STANDARD_PATTERNS: &str = include_str!("../patterns/standard.pat");

/// Short names available whenever their target pattern is loaded.
pub const BUILTIN_ALIASES: [(&str, &str); 4] = [
    ("Seq", "Sequence"),
    ("Concur", "Concurrency"),
    ("Branch", "Branching"),
    ("Loop", "LoopWhile"),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PatternError {
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<PatternError>,
    },
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("pattern `{0}` is defined twice")]
    DuplicatePattern(String),
    #[error("pattern `{pattern}` declares parameter `{param}` twice")]
    DuplicateParam { pattern: String, param: String },
    #[error("pattern `{pattern}` uses `{atom}`, which is not one of its parameters")]
    UndeclaredParam { pattern: String, atom: String },
    #[error("pattern `{0}` has no formulas")]
    EmptyPattern(String),
    #[error("pattern `{name}` has {arity} parameter(s); at least two are required")]
    ArityTooSmall { name: String, arity: usize },
    #[error("alias `{0}` is already defined")]
    DuplicateAlias(String),
    #[error("alias `{alias}` refers to unknown pattern `{target}`")]
    DanglingAlias { alias: String, target: String },
    #[error("pattern `{pattern}` expects {expected} argument(s), got {found}")]
    ArityMismatch {
        pattern: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of `{pattern}` must be an atom or a disjunction of two atoms, got `{arg}`")]
    ArgumentShape { pattern: String, index: usize, arg: String },
}

impl PatternError {
    /// The underlying error with any line wrapper removed.
    pub fn root(&self) -> &PatternError {
        match self {
            PatternError::AtLine { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            PatternError::AtLine { line, .. } => Some(*line),
            _ => None,
        }
    }

    fn at(self, line: usize) -> PatternError {
        PatternError::AtLine {
            line,
            source: Box::new(self),
        }
    }
}

/// A named pattern: ordered parameters (entry first, exit last) and its
/// formula templates in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternDefinition {
    name: String,
    params: Vec<Atom>,
    templates: Vec<Formula>,
}

impl PatternDefinition {
    pub fn new(name: impl Into<String>, params: Vec<Atom>, templates: Vec<Formula>) -> Result<Self, PatternError> {
        let name = name.into();
        if !crate::formula::is_identifier(&name) {
            return Err(PatternError::Syntax(format!("invalid pattern name `{name}`")));
        }
        if params.len() < 2 {
            return Err(PatternError::ArityTooSmall {
                name,
                arity: params.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for p in &params {
            if !seen.insert(p) {
                return Err(PatternError::DuplicateParam {
                    pattern: name,
                    param: p.to_string(),
                });
            }
        }
        if templates.is_empty() {
            return Err(PatternError::EmptyPattern(name));
        }
        for t in &templates {
            if t.contains_next() {
                return Err(FormulaError::ContainsNext.into());
            }
            if let Some(stray) = t.props().iter().find(|p| !seen.contains(p.subject())) {
                return Err(PatternError::UndeclaredParam {
                    pattern: name,
                    atom: stray.subject().to_string(),
                });
            }
        }
        Ok(PatternDefinition {
            name,
            params,
            templates,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[Atom] {
        &self.params
    }

    pub fn templates(&self) -> &[Formula] {
        &self.templates
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn entry(&self) -> &Atom {
        &self.params[0]
    }

    pub fn exit(&self) -> &Atom {
        &self.params[self.params.len() - 1]
    }

    /// Parameters that appear under `c(..)` in some template.
    pub fn conditioned_params(&self) -> BTreeSet<Atom> {
        self.templates
            .iter()
            .flat_map(Formula::props)
            .filter_map(|p| match p {
                Prop::Cond(a) => Some(a),
                Prop::Atom(_) => None,
            })
            .collect()
    }
}

/// A set of patterns plus aliases for their names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PatternSet {
    patterns: Vec<PatternDefinition>,
    aliases: BTreeMap<String, String>,
}

impl PatternSet {
    /// The four standard patterns with their built-in aliases.
    pub fn standard() -> PatternSet {
        parse_pattern_set(STANDARD_PATTERNS).expect("bundled pattern file parses")
    }

    pub fn from_definitions(defs: Vec<PatternDefinition>) -> Result<PatternSet, PatternError> {
        let mut set = PatternSet::default();
        for def in defs {
            set.insert(def)?;
        }
        set.add_builtin_aliases();
        Ok(set)
    }

    fn insert(&mut self, def: PatternDefinition) -> Result<(), PatternError> {
        if self.get(def.name()).is_some() {
            return Err(PatternError::DuplicatePattern(def.name));
        }
        self.patterns.push(def);
        Ok(())
    }

    fn add_builtin_aliases(&mut self) {
        for (alias, target) in BUILTIN_ALIASES {
            if self.get(target).is_some() && self.get(alias).is_none() {
                self.aliases
                    .entry(alias.to_string())
                    .or_insert_with(|| target.to_string());
            }
        }
    }

    /// Registers `alias` for an existing pattern.
    pub fn add_alias(&mut self, alias: &str, target: &str) -> Result<(), PatternError> {
        if !crate::formula::is_identifier(alias) {
            return Err(PatternError::Syntax(format!("invalid alias name `{alias}`")));
        }
        if self.get(target).is_none() {
            return Err(PatternError::DanglingAlias {
                alias: alias.to_string(),
                target: target.to_string(),
            });
        }
        if self.get(alias).is_some() {
            return Err(PatternError::DuplicateAlias(alias.to_string()));
        }
        match self.aliases.get(alias) {
            Some(existing) if existing == target => Ok(()),
            Some(_) => Err(PatternError::DuplicateAlias(alias.to_string())),
            None => {
                self.aliases.insert(alias.to_string(), target.to_string());
                Ok(())
            }
        }
    }

    /// Looks up a pattern by its exact name.
    pub fn get(&self, name: &str) -> Option<&PatternDefinition> {
        self.patterns.iter().find(|p| p.name == name)
    }

    /// Looks up a pattern by name or alias (case-sensitive).
    pub fn resolve(&self, name: &str) -> Option<&PatternDefinition> {
        self.get(name)
            .or_else(|| self.aliases.get(name).and_then(|target| self.get(target)))
    }

    pub fn patterns(&self) -> &[PatternDefinition] {
        &self.patterns
    }

    pub fn aliases(&self) -> &BTreeMap<String, String> {
        &self.aliases
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Serializes back to the pattern file format, one template per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for def in &self.patterns {
            let params: Vec<&str> = def.params.iter().map(Atom::name).collect();
            out.push_str(&format!("{}({}):\n", def.name, params.join(",")));
            for t in &def.templates {
                out.push_str(&print_formula(t).expect("templates never contain next"));
                out.push('\n');
            }
        }
        for (alias, target) in &self.aliases {
            let builtin = BUILTIN_ALIASES.iter().any(|(a, t)| a == alias && t == target);
            if !builtin {
                out.push_str(&format!("alias {alias} = {target}\n"));
            }
        }
        out
    }
}

/// Blanks out `/* */` and `#` comments, keeping line structure.
fn strip_comments(text: &str) -> Result<String, PatternError> {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    let mut line = 1;
    while let Some(c) = chars.next() {
        match c {
            '/' if chars.peek() == Some(&'*') => {
                let start = line;
                chars.next();
                let mut closed = false;
                while let Some(c) = chars.next() {
                    if c == '\n' {
                        line += 1;
                        out.push('\n');
                    } else if c == '*' && chars.peek() == Some(&'/') {
                        chars.next();
                        closed = true;
                        break;
                    }
                }
                if !closed {
                    return Err(PatternError::Syntax("unterminated `/*` comment".into()).at(start));
                }
                out.push(' ');
            }
            '#' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        out.push('\n');
                        break;
                    }
                }
            }
            '\n' => {
                line += 1;
                out.push('\n');
            }
            '\r' => {}
            c => out.push(c),
        }
    }
    Ok(out)
}

fn parse_header(line: &str) -> Result<(String, Vec<Atom>), PatternError> {
    let body = line
        .strip_suffix(':')
        .map(str::trim_end)
        .ok_or_else(|| PatternError::Syntax("pattern header must end with `:`".into()))?;
    let malformed = || PatternError::Syntax(format!("malformed pattern header `{line}`"));
    let open = body.find('(').ok_or_else(malformed)?;
    let inner = body[open + 1..].strip_suffix(')').ok_or_else(malformed)?;
    let name = body[..open].trim();
    if !crate::formula::is_identifier(name) {
        return Err(malformed());
    }
    let params = inner
        .split(',')
        .map(|p| Atom::new(p.trim()).map_err(|_| malformed()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((name.to_string(), params))
}

fn parse_alias(rest: &str) -> Result<(String, String), PatternError> {
    let (alias, target) = rest
        .split_once('=')
        .ok_or_else(|| PatternError::Syntax("expected `alias <Name> = <Pattern>`".into()))?;
    Ok((alias.trim().to_string(), target.trim().to_string()))
}

struct Pending {
    line: usize,
    name: String,
    params: Vec<Atom>,
    templates: Vec<Formula>,
}

/// Parses a pattern file.
pub fn parse_pattern_set(text: &str) -> Result<PatternSet, PatternError> {
    let stripped = strip_comments(text)?;
    let mut set = PatternSet::default();
    let mut current: Option<Pending> = None;
    let mut aliases = Vec::new();

    fn finish(pending: Option<Pending>, set: &mut PatternSet) -> Result<(), PatternError> {
        if let Some(p) = pending {
            let def = PatternDefinition::new(p.name, p.params, p.templates).map_err(|e| e.at(p.line))?;
            set.insert(def).map_err(|e| e.at(p.line))?;
        }
        Ok(())
    }

    for (idx, raw) in stripped.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("alias ").filter(|r| !r.contains("=>")) {
            aliases.push((line_no, parse_alias(rest).map_err(|e| e.at(line_no))?));
        } else if line.ends_with(':') {
            finish(current.take(), &mut set)?;
            let (name, params) = parse_header(line).map_err(|e| e.at(line_no))?;
            current = Some(Pending {
                line: line_no,
                name,
                params,
                templates: Vec::new(),
            });
        } else {
            let pending = current
                .as_mut()
                .ok_or_else(|| PatternError::Syntax("formula outside of any pattern".into()).at(line_no))?;
            for item in line.split('/') {
                let formula = parse_formula(item).map_err(|e| PatternError::from(e).at(line_no))?;
                pending.templates.push(formula);
            }
        }
    }
    finish(current.take(), &mut set)?;

    for (line_no, (alias, target)) in aliases {
        set.add_alias(&alias, &target).map_err(|e| e.at(line_no))?;
    }
    set.add_builtin_aliases();
    Ok(set)
}

/// Lints a pattern set. Never fails; findings come back as diagnostics.
pub fn validate_pattern_set(set: &PatternSet) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for def in &set.patterns {
        if def.arity() < 2 {
            out.push(Diagnostic::error(
                DiagnosticKind::ArityTooSmall,
                &def.name,
                format!("{} parameter(s); at least two are required", def.arity()),
            ));
        }
        let used: BTreeSet<Atom> = def
            .templates
            .iter()
            .flat_map(Formula::props)
            .map(|p| p.subject().clone())
            .collect();
        let last = def.arity().saturating_sub(1);
        for (i, param) in def.params.iter().enumerate() {
            if used.contains(param) {
                continue;
            }
            let (kind, role) = match i {
                0 => (DiagnosticKind::UnusedEntry, "entry parameter"),
                i if i == last => (DiagnosticKind::UnusedExit, "exit parameter"),
                _ => (DiagnosticKind::UnusedParam, "parameter"),
            };
            out.push(Diagnostic::warning(
                kind,
                &def.name,
                format!("{role} `{param}` does not occur in any template"),
            ));
        }
        let params: BTreeSet<&Atom> = def.params.iter().collect();
        for stray in used.iter().filter(|a| !params.contains(a)) {
            out.push(Diagnostic::error(
                DiagnosticKind::UndeclaredParam,
                &def.name,
                format!("`{stray}` is not a parameter"),
            ));
        }
        for cond in def.conditioned_params() {
            if &cond == def.entry() || &cond == def.exit() {
                out.push(Diagnostic::warning(
                    DiagnosticKind::CondOnBoundary,
                    &def.name,
                    format!("condition `c({cond})` is attached to an entry/exit parameter"),
                ));
            }
        }
    }
    for (alias, target) in &set.aliases {
        if set.get(target).is_none() {
            out.push(Diagnostic::error(
                DiagnosticKind::DanglingAlias,
                alias,
                format!("alias targets unknown pattern `{target}`"),
            ));
        }
    }
    out
}

fn is_allowed_argument(arg: &Formula) -> bool {
    match arg {
        Formula::Atom(_) => true,
        Formula::Or(a, b) => matches!(**a, Formula::Atom(_)) && matches!(**b, Formula::Atom(_)),
        _ => false,
    }
}

/// Instantiates the templates of `def` with `args` substituted for its
/// parameters. Each argument is an atom or `entry | exit` of a nested pattern.
pub fn instantiate_pattern(def: &PatternDefinition, args: &[Formula]) -> Result<Vec<Formula>, PatternError> {
    if args.len() != def.arity() {
        return Err(PatternError::ArityMismatch {
            pattern: def.name.clone(),
            expected: def.arity(),
            found: args.len(),
        });
    }
    if let Some((index, arg)) = args.iter().enumerate().find(|(_, a)| !is_allowed_argument(a)) {
        return Err(PatternError::ArgumentShape {
            pattern: def.name.clone(),
            index,
            arg: arg.to_string(),
        });
    }
    let binding: BTreeMap<Atom, Formula> = def.params.iter().cloned().zip(args.iter().cloned()).collect();
    def.templates
        .iter()
        .map(|t| t.substitute(&binding).map_err(PatternError::from))
        .collect()
}
