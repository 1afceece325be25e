use super::{Atom, Formula, FormulaError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
    Eventually,
    Always,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Not => "`~`".into(),
            Token::And => "`&`".into(),
            Token::Or => "`|`".into(),
            Token::Implies => "`=>`".into(),
            Token::Eventually => "`<>`".into(),
            Token::Always => "`[]`".into(),
        }
    }
}

fn syntax(position: usize, message: impl Into<String>) -> FormulaError {
    FormulaError::Syntax {
        position,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = bytes.get(i..i + 2);
        let (token, len) = match c {
            b'(' => (Token::LParen, 1),
            b')' => (Token::RParen, 1),
            b'~' => (Token::Not, 1),
            b'&' => (Token::And, 1),
            b'|' => (Token::Or, 1),
            b'=' if two == Some(b"=>") => (Token::Implies, 2),
            b'<' if two == Some(b"<>") => (Token::Eventually, 2),
            b'[' if two == Some(b"[]") => (Token::Always, 2),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let end = bytes[i..]
                    .iter()
                    .position(|b| !(b.is_ascii_alphanumeric() || *b == b'_'))
                    .map_or(bytes.len(), |n| i + n);
                (Token::Ident(text[i..end].to_string()), end - i)
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unknown token `{ch}`")));
            }
        };
        tokens.push((i, token));
        i += len;
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn implication(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Token::Implies) {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Token::Or) {
            self.bump();
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Token::And) {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek() {
            Some(Token::Not) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some(Token::Eventually) => {
                self.bump();
                Ok(Formula::eventually(self.unary()?))
            }
            Some(Token::Always) => {
                self.bump();
                Ok(Formula::always(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, FormulaError> {
        let at = self.offset();
        match self.bump() {
            Some(Token::LParen) => {
                let inner = self.implication()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(inner),
                    Some(other) => Err(syntax(
                        self.tokens[self.pos - 1].0,
                        format!("expected `)`, found {}", other.describe()),
                    )),
                    None => Err(syntax(at, "unbalanced parentheses: `(` is never closed")),
                }
            }
            Some(Token::Ident(name)) if name == "c" && self.peek() == Some(&Token::LParen) => {
                self.bump();
                let subject_at = self.offset();
                let subject = match self.bump() {
                    Some(Token::Ident(subject)) => subject,
                    _ => return Err(syntax(subject_at, "condition `c(...)` must be applied to an atom")),
                };
                if self.bump() != Some(Token::RParen) {
                    return Err(syntax(subject_at, "condition `c(...)` must be applied to an atom"));
                }
                Ok(Formula::Cond(Atom(subject)))
            }
            Some(Token::Ident(name)) => Ok(Formula::Atom(Atom(name))),
            Some(other) => Err(syntax(at, format!("unexpected {}", other.describe()))),
            None if self.tokens.is_empty() => Err(syntax(at, "empty input")),
            None => Err(syntax(at, "unexpected end of input")),
        }
    }
}

/// Parses a single formula in the ASCII syntax.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let formula = parser.implication()?;
    if let Some((offset, token)) = parser.tokens.get(parser.pos) {
        let message = if *token == Token::RParen {
            "unbalanced parentheses: unmatched `)`".to_string()
        } else {
            format!("unexpected {}", token.describe())
        };
        return Err(syntax(*offset, message));
    }
    Ok(formula)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Formula {
        Formula::var(n)
    }

    fn ev(f: Formula) -> Formula {
        Formula::eventually(f)
    }

    #[test]
    fn sequence_template() {
        assert_eq!(
            parse_formula("f1 => <>f4").unwrap(),
            Formula::implies(v("f1"), ev(v("f4")))
        );
        assert_eq!(
            parse_formula("~f1 => ~<>f4").unwrap(),
            Formula::implies(Formula::not(v("f1")), Formula::not(ev(v("f4"))))
        );
    }

    #[test]
    fn branching_template() {
        let expected = Formula::implies(
            v("f1"),
            Formula::or(
                Formula::and(ev(v("f2")), Formula::not(ev(v("f3")))),
                Formula::and(Formula::not(ev(v("f2"))), ev(v("f3"))),
            ),
        );
        assert_eq!(
            parse_formula("f1 => (<>f2 & ~<>f3) | (~<>f2 & <>f3)").unwrap(),
            expected
        );
    }

    #[test]
    fn loop_condition_template() {
        let expected = Formula::implies(
            Formula::and(v("f2"), Formula::cond("f2")),
            Formula::and(ev(v("f3")), Formula::not(ev(v("f4")))),
        );
        assert_eq!(parse_formula("f2 & c(f2) => <>f3 & ~<>f4").unwrap(), expected);
    }

    #[test]
    fn single_atom_and_atom_named_c() {
        assert_eq!(parse_formula("p").unwrap(), v("p"));
        assert_eq!(parse_formula("c").unwrap(), v("c"));
        assert_eq!(
            parse_formula("c & c(c)").unwrap(),
            Formula::and(v("c"), Formula::cond("c"))
        );
    }

    #[test]
    fn precedence_pinned() {
        assert_eq!(
            parse_formula("f1 => <>f2 & <>f3").unwrap(),
            parse_formula("f1 => ((<>f2) & (<>f3))").unwrap()
        );
        assert_eq!(
            parse_formula("a | b & c").unwrap(),
            parse_formula("a | (b & c)").unwrap()
        );
        assert_eq!(
            parse_formula("a => b => c").unwrap(),
            parse_formula("a => (b => c)").unwrap()
        );
        assert_eq!(
            parse_formula("a | b | c").unwrap(),
            parse_formula("(a | b) | c").unwrap()
        );
        assert_eq!(
            parse_formula("[]~(k & l)").unwrap(),
            Formula::always(Formula::not(Formula::and(v("k"), v("l"))))
        );
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(
            parse_formula("  []  ~ ( k&l )\n").unwrap(),
            parse_formula("[]~(k & l)").unwrap()
        );
    }

    #[test]
    fn errors() {
        let unbalanced = parse_formula("(p & q").unwrap_err();
        assert!(matches!(&unbalanced, FormulaError::Syntax { message, .. } if message.contains("unbalanced")));
        let extra = parse_formula("p & q)").unwrap_err();
        assert!(matches!(&extra, FormulaError::Syntax { position: 5, message } if message.contains("unbalanced")));
        assert!(matches!(parse_formula(""), Err(FormulaError::Syntax { message, .. }) if message == "empty input"));
        assert!(matches!(parse_formula("   "), Err(FormulaError::Syntax { .. })));
        assert!(matches!(
            parse_formula("p $ q"),
            Err(FormulaError::Syntax { position: 2, .. })
        ));
        assert!(matches!(parse_formula("p = q"), Err(FormulaError::Syntax { .. })));
        assert!(
            matches!(parse_formula("c(p & q)"), Err(FormulaError::Syntax { message, .. }) if message.contains("atom"))
        );
        assert!(matches!(parse_formula("c(~p)"), Err(FormulaError::Syntax { .. })));
        assert!(matches!(parse_formula("p q"), Err(FormulaError::Syntax { .. })));
        assert!(matches!(parse_formula("p / q"), Err(FormulaError::Syntax { .. })));
        assert!(
            matches!(parse_formula("p &"), Err(FormulaError::Syntax { message, .. }) if message.contains("end of input"))
        );
    }
}
