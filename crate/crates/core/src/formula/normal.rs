use std::collections::BTreeSet;

use super::Formula;

/// Negation normal form: `=>` eliminated and negations pushed onto atoms and
/// conditions, using `~<>f == []~f` and `~[]f == <>~f`.
pub fn nnf(f: &Formula) -> Formula {
    positive(f)
}

fn positive(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) | Formula::Cond(_) => f.clone(),
        Formula::Not(a) => negative(a),
        Formula::And(a, b) => Formula::and(positive(a), positive(b)),
        Formula::Or(a, b) => Formula::or(positive(a), positive(b)),
        Formula::Implies(a, b) => Formula::or(negative(a), positive(b)),
        Formula::Eventually(a) => Formula::eventually(positive(a)),
        Formula::Always(a) => Formula::always(positive(a)),
        Formula::Next(a) => Formula::next(positive(a)),
    }
}

fn negative(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) | Formula::Cond(_) => Formula::not(f.clone()),
        Formula::Not(a) => positive(a),
        Formula::And(a, b) => Formula::or(negative(a), negative(b)),
        Formula::Or(a, b) => Formula::and(negative(a), negative(b)),
        Formula::Implies(a, b) => Formula::and(positive(a), negative(b)),
        Formula::Eventually(a) => Formula::always(negative(a)),
        Formula::Always(a) => Formula::eventually(negative(a)),
        Formula::Next(a) => Formula::next(negative(a)),
    }
}

/// Subformula closure of NNF formulas, extended with the one-step unfoldings
/// `<>f -> {f, X<>f}` and `[]f -> {f, X[]f}`. Negated atoms count as literals.
pub fn closure<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<Formula> = fs.into_iter().cloned().collect();
    while let Some(f) = stack.pop() {
        if out.contains(&f) {
            continue;
        }
        match &f {
            Formula::Atom(_) | Formula::Cond(_) => {}
            Formula::Not(a) => {
                if !f.is_literal() {
                    stack.push((**a).clone());
                }
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                stack.push((**a).clone());
                stack.push((**b).clone());
            }
            Formula::Eventually(a) | Formula::Always(a) => {
                stack.push((**a).clone());
                stack.push(Formula::next(f.clone()));
            }
            Formula::Next(a) => stack.push((**a).clone()),
        }
        out.insert(f);
    }
    out
}
