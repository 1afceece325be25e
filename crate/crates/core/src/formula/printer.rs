use super::{Formula, FormulaError};

// Binding strength; higher binds tighter.
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const UNARY: u8 = 4;

fn strength(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => IMPLIES,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        _ => UNARY,
    }
}

fn write(f: &Formula, min: u8, out: &mut String) {
    let wrap = strength(f) < min;
    if wrap {
        out.push('(');
    }
    match f {
        Formula::Atom(a) => out.push_str(a.name()),
        Formula::Cond(a) => {
            out.push_str("c(");
            out.push_str(a.name());
            out.push(')');
        }
        Formula::Not(a) => {
            out.push('~');
            write(a, UNARY, out);
        }
        Formula::Eventually(a) => {
            out.push_str("<>");
            write(a, UNARY, out);
        }
        Formula::Always(a) => {
            out.push_str("[]");
            write(a, UNARY, out);
        }
        Formula::Next(a) => {
            out.push('X');
            // keep `X` from fusing with an identifier
            if matches!(**a, Formula::Atom(_) | Formula::Cond(_)) {
                out.push(' ');
            }
            write(a, UNARY, out);
        }
        // `=>` is right associative, `&` and `|` left associative.
        Formula::Implies(a, b) => {
            write(a, IMPLIES + 1, out);
            out.push_str(" => ");
            write(b, IMPLIES, out);
        }
        Formula::Or(a, b) => {
            write(a, OR, out);
            out.push_str(" | ");
            write(b, OR + 1, out);
        }
        Formula::And(a, b) => {
            write(a, AND, out);
            out.push_str(" & ");
            write(b, AND + 1, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

pub(super) fn render(f: &Formula) -> String {
    let mut out = String::new();
    write(f, IMPLIES, &mut out);
    out
}

/// Prints a formula with the fewest parentheses the precedence rules allow.
pub fn print_formula(f: &Formula) -> Result<String, FormulaError> {
    if f.contains_next() {
        return Err(FormulaError::ContainsNext);
    }
    Ok(render(f))
}
