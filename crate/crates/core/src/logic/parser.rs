//! Recursive-descent parser for the ASCII formula grammar.
//!
//! Precedence from tightest to loosest: `~`, `&`, `|`, `->`, `<->`.
//! Both arrows associate to the right.

use thiserror::Error;

use super::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at column {column}: {message}")]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    False,
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::False => "`false`".into(),
            Tok::Not => "`~`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Imp => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn err(column: usize, message: impl Into<String>) -> ParseError {
    ParseError { column, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '~' => {
                out.push((Tok::Not, col));
                i += 1;
            }
            '&' => {
                out.push((Tok::And, col));
                i += 1;
            }
            '|' => {
                out.push((Tok::Or, col));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, col));
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Imp, col));
                i += 2;
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                out.push((Tok::Iff, col));
                i += 3;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if word == "false" {
                    out.push((Tok::False, col));
                } else {
                    out.push((Tok::Ident(word), col));
                }
            }
            other => return Err(err(col, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.imp()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.iff()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Imp) {
            let rhs = self.imp()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.and()?];
        while self.eat(&Tok::Or) {
            parts.push(self.and()?);
        }
        Ok(Formula::or(parts))
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::And) {
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Not) {
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let col = self.col();
        match self.toks.get(self.pos).cloned() {
            Some((Tok::Ident(name), _)) => {
                self.pos += 1;
                Ok(Formula::Atom(name))
            }
            Some((Tok::False, _)) => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some((Tok::LParen, _)) => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(err(self.col(), "expected `)`"));
                }
                Ok(inner)
            }
            Some((t, _)) => Err(err(col, format!("expected a formula, found {}", t.describe()))),
            None => Err(err(col, "unexpected end of input")),
        }
    }
}

/// Parses one formula in the ASCII grammar.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end_col: text.chars().count() + 1 };
    let f = p.iff()?;
    if let Some(t) = p.peek() {
        return Err(err(p.col(), format!("unexpected {}", t.describe())));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Formula {
        Formula::atom(n)
    }

    #[test]
    fn implication_of_atoms() {
        assert_eq!(parse_formula("A -> E").unwrap(), Formula::imp(a("A"), a("E")));
    }

    #[test]
    fn negation() {
        assert_eq!(parse_formula("~A").unwrap(), Formula::not(a("A")));
    }

    #[test]
    fn precedence_and_flattening() {
        let f = parse_formula("X | E -> F & Y & Z").unwrap();
        assert_eq!(f, Formula::imp(Formula::Or(vec![a("X"), a("E")]), Formula::And(vec![a("F"), a("Y"), a("Z")])));
    }

    #[test]
    fn arrows_are_right_associative() {
        assert_eq!(parse_formula("A -> B -> C").unwrap(), Formula::imp(a("A"), Formula::imp(a("B"), a("C"))));
        assert_eq!(parse_formula("A <-> B <-> C").unwrap(), Formula::iff(a("A"), Formula::iff(a("B"), a("C"))));
        assert_eq!(parse_formula("A <-> B -> C").unwrap(), Formula::iff(a("A"), Formula::imp(a("B"), a("C"))));
    }

    #[test]
    fn parenthesised_same_operator_is_flattened() {
        assert_eq!(parse_formula("(A & B) & C").unwrap(), parse_formula("A & B & C").unwrap());
    }

    #[test]
    fn falsum_and_identifiers() {
        assert_eq!(parse_formula("false").unwrap(), Formula::False);
        assert_eq!(parse_formula("falsey_1").unwrap(), a("falsey_1"));
        assert_eq!(parse_formula("~_x").unwrap(), Formula::not(a("_x")));
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse_formula("A & ").unwrap_err();
        assert_eq!(e.column, 5);
        let e = parse_formula("A $ B").unwrap_err();
        assert_eq!(e.column, 3);
        let e = parse_formula("(A | B").unwrap_err();
        assert!(e.message.contains("`)`"));
        let e = parse_formula("A B").unwrap_err();
        assert_eq!(e.column, 3);
        assert!(parse_formula("").is_err());
        assert!(parse_formula("A - B").is_err());
    }
}
