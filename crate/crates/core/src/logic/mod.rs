//! Propositional formulas: syntax, parsing, printing and reasoning.

mod formula;
mod parser;
mod sat;

pub use formula::{Element, Formula, SyntacticProfile};
pub use parser::{parse_formula, ParseError};
pub use sat::Cnf;

/// True iff the conjunction of `kb` has a model.
pub fn is_consistent<'a, I>(kb: I) -> bool
where
    I: IntoIterator<Item = &'a Formula> + Clone,
{
    Cnf::from_formulas(kb).solve()
}

/// True iff every model of `kb` satisfies `target`.
pub fn entails<'a, I>(kb: I, target: &Formula) -> bool
where
    I: IntoIterator<Item = &'a Formula> + Clone,
{
    let mut atoms = target.atoms();
    for f in kb.clone() {
        f.collect_atoms(&mut atoms);
    }
    let mut cnf = Cnf::with_atoms(atoms);
    for f in kb {
        cnf.assert(f);
    }
    cnf.assert_not(target);
    !cnf.solve()
}

/// True iff `kb` entails every formula of `targets` (vacuously for none).
pub fn entails_all<'a, I>(kb: I, targets: &[Formula]) -> bool
where
    I: IntoIterator<Item = &'a Formula> + Clone,
{
    match targets.len() {
        0 => true,
        1 => entails(kb, &targets[0]),
        _ => entails(kb, &Formula::and(targets.to_vec())),
    }
}
