use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Propositional formula.
///
/// Conjunctions and disjunctions are n-ary and kept flat: a `And` never has
/// a direct `And` child, likewise for `Or`. The smart constructors enforce
/// this, so structural equality lines up with the printed form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Atom(String),
    False,
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn imp(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Imp(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Iff(Box::new(lhs), Box::new(rhs))
    }

    /// N-ary conjunction; nested conjunctions are spliced in, a single
    /// operand is returned as is.
    ///
    /// # Panics
    /// Panics on an empty operand list.
    pub fn and(parts: Vec<Formula>) -> Formula {
        Self::nary(parts, true)
    }

    /// N-ary disjunction, flattened like [`Formula::and`].
    ///
    /// # Panics
    /// Panics on an empty operand list.
    pub fn or(parts: Vec<Formula>) -> Formula {
        Self::nary(parts, false)
    }

    fn nary(parts: Vec<Formula>, conj: bool) -> Formula {
        assert!(!parts.is_empty(), "n-ary connective needs at least one operand");
        let mut flat = Vec::with_capacity(parts.len());
        for p in parts {
            match (p, conj) {
                (Formula::And(cs), true) | (Formula::Or(cs), false) => flat.extend(cs),
                (p, _) => flat.push(p),
            }
        }
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        if conj {
            Formula::And(flat)
        } else {
            Formula::Or(flat)
        }
    }

    /// Literal view: `Some((atom, positive))` for `A` and `~A`.
    pub fn as_literal(&self) -> Option<(&str, bool)> {
        match self {
            Formula::Atom(a) => Some((a, true)),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom(a) => Some((a, false)),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn literal(atom: &str, positive: bool) -> Formula {
        if positive {
            Formula::atom(atom)
        } else {
            Formula::not(Formula::atom(atom))
        }
    }

    /// Atom names occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::False => {}
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.collect_atoms(out)),
            Formula::Imp(l, r) | Formula::Iff(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// Truth value under an assignment of the atoms.
    pub fn eval(&self, val: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Formula::Atom(a) => val(a),
            Formula::False => false,
            Formula::Not(f) => !f.eval(val),
            Formula::And(cs) => cs.iter().all(|c| c.eval(val)),
            Formula::Or(cs) => cs.iter().any(|c| c.eval(val)),
            Formula::Imp(l, r) => !l.eval(val) || r.eval(val),
            Formula::Iff(l, r) => l.eval(val) == r.eval(val),
        }
    }

    /// Occurrence counts of atoms and connectives. An n-ary conjunction
    /// or disjunction contributes n-1 connective occurrences.
    pub fn profile(&self) -> SyntacticProfile {
        let mut counts = BTreeMap::new();
        self.count_into(&mut counts);
        SyntacticProfile { counts }
    }

    fn count_into(&self, counts: &mut BTreeMap<Element, usize>) {
        let mut bump = |e: Element, n: usize| *counts.entry(e).or_insert(0) += n;
        match self {
            Formula::Atom(a) => bump(Element::Atom(a.clone()), 1),
            Formula::False => bump(Element::Falsum, 1),
            Formula::Not(f) => {
                bump(Element::Not, 1);
                f.count_into(counts);
            }
            Formula::And(cs) | Formula::Or(cs) => {
                let e = if matches!(self, Formula::And(_)) { Element::And } else { Element::Or };
                bump(e, cs.len() - 1);
                cs.iter().for_each(|c| c.count_into(counts));
            }
            Formula::Imp(l, r) | Formula::Iff(l, r) => {
                let e = if matches!(self, Formula::Imp(..)) { Element::Imp } else { Element::Iff };
                bump(e, 1);
                l.count_into(counts);
                r.count_into(counts);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Imp(..) => 2,
            Formula::Or(_) => 3,
            Formula::And(_) => 4,
            Formula::Not(_) => 5,
            Formula::Atom(_) | Formula::False => 6,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Formula {
    /// Prints in the ASCII input grammar with the fewest parentheses the
    /// precedence rules allow; parsing the output yields an equal formula.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::False => write!(f, "false"),
            Formula::Not(c) => {
                write!(f, "~")?;
                c.fmt_child(f, 5)
            }
            Formula::And(cs) | Formula::Or(cs) => {
                let (sep, prec) = if matches!(self, Formula::And(_)) { (" & ", 5) } else { (" | ", 4) };
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    c.fmt_child(f, prec)?;
                }
                Ok(())
            }
            Formula::Imp(l, r) => {
                l.fmt_child(f, 3)?;
                write!(f, " -> ")?;
                r.fmt_child(f, 2)
            }
            Formula::Iff(l, r) => {
                l.fmt_child(f, 2)?;
                write!(f, " <-> ")?;
                r.fmt_child(f, 1)
            }
        }
    }
}

/// A syntactic element whose occurrences carry fault probability.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    Atom(String),
    Falsum,
    Not,
    And,
    Or,
    Imp,
    Iff,
}

impl Element {
    /// Parses an element token as used in probability files: connective
    /// keywords `NOT AND OR IMP IFF FALSE`, otherwise an atom name.
    pub fn from_token(tok: &str) -> Option<Element> {
        Some(match tok {
            "NOT" => Element::Not,
            "AND" => Element::And,
            "OR" => Element::Or,
            "IMP" => Element::Imp,
            "IFF" => Element::Iff,
            "FALSE" => Element::Falsum,
            t if super::parser::is_identifier(t) => Element::Atom(t.to_string()),
            _ => return None,
        })
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Atom(a) => write!(f, "{a}"),
            Element::Falsum => write!(f, "FALSE"),
            Element::Not => write!(f, "NOT"),
            Element::And => write!(f, "AND"),
            Element::Or => write!(f, "OR"),
            Element::Imp => write!(f, "IMP"),
            Element::Iff => write!(f, "IFF"),
        }
    }
}

/// Multiset of element occurrences within one formula.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntacticProfile {
    pub counts: BTreeMap<Element, usize>,
}

impl SyntacticProfile {
    pub fn count(&self, e: &Element) -> usize {
        self.counts.get(e).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}
