//! Diagnosis problem instances and their validity predicates.
//!
//! A [`Dpi`] bundles the knowledge base `O` under suspicion, trusted
//! background knowledge `B`, positive and negative test cases and the
//! requirements. Formulas of `O` are addressed by 1-based ids in input
//! order; diagnoses and conflict sets are sets of such ids.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{parse_formula, Cnf, Formula};

/// 1-based index of a formula in the knowledge base.
pub type FormulaId = usize;

/// Set of formula ids: a diagnosis, conflict set or tree node.
pub type IdSet = BTreeSet<FormulaId>;

/// Builds an [`IdSet`] from a slice, mostly for tests and fixtures.
pub fn ids(xs: &[FormulaId]) -> IdSet {
    xs.iter().copied().collect()
}

/// Renders an id set as `[5,7]`.
pub fn fmt_ids(s: &IdSet) -> String {
    let parts: Vec<String> = s.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(","))
}

/// Whether solutions are judged against the input DPI or the DPI grown by
/// the answered queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Static,
    Dynamic,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(Mode::Static),
            "dynamic" => Ok(Mode::Dynamic),
            other => Err(format!("unknown mode `{other}` (expected static or dynamic)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Requirement {
    Consistency,
}

/// A non-empty set of formulas, read as their conjunction when checked
/// for entailment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestCase(Vec<Formula>);

impl TestCase {
    pub fn new(formulas: Vec<Formula>) -> Result<TestCase, DpiError> {
        if formulas.is_empty() {
            return Err(DpiError::EmptyTestCase);
        }
        Ok(TestCase(formulas))
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.0
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpiError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("coherency is not defined for propositional logic")]
    Coherency,
    #[error("formula {id} of O also occurs in the background knowledge")]
    Overlap { id: FormulaId },
    #[error("test cases must contain at least one formula")]
    EmptyTestCase,
    #[error("formula id {0} is not in the knowledge base")]
    UnknownId(FormulaId),
}

/// A diagnosis problem instance `<O, B, P, N>_R`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dpi {
    kb: Vec<Formula>,
    background: Vec<Formula>,
    positive: Vec<TestCase>,
    negative: Vec<TestCase>,
    requirements: BTreeSet<Requirement>,
}

impl Dpi {
    /// Assembles a DPI, rejecting formulas shared between `O` and `B`.
    pub fn new(
        kb: Vec<Formula>,
        background: Vec<Formula>,
        positive: Vec<TestCase>,
        negative: Vec<TestCase>,
        requirements: BTreeSet<Requirement>,
    ) -> Result<Dpi, DpiError> {
        if let Some(pos) = kb.iter().position(|f| background.contains(f)) {
            return Err(DpiError::Overlap { id: pos + 1 });
        }
        Ok(Dpi { kb, background, positive, negative, requirements })
    }

    /// Number of formulas in `O`.
    pub fn len(&self) -> usize {
        self.kb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kb.is_empty()
    }

    /// All ids of `O`.
    pub fn all_ids(&self) -> IdSet {
        (1..=self.kb.len()).collect()
    }

    /// Formula with the given id.
    ///
    /// # Panics
    /// Panics if `id` is out of range.
    pub fn formula(&self, id: FormulaId) -> &Formula {
        &self.kb[id - 1]
    }

    pub fn kb(&self) -> &[Formula] {
        &self.kb
    }

    pub fn background(&self) -> &[Formula] {
        &self.background
    }

    pub fn positive(&self) -> &[TestCase] {
        &self.positive
    }

    pub fn negative(&self) -> &[TestCase] {
        &self.negative
    }

    pub fn requirements(&self) -> &BTreeSet<Requirement> {
        &self.requirements
    }

    /// Same instance with extra test cases appended, i.e. the current DPI
    /// of an interactive session.
    pub fn extended(&self, positive: &[TestCase], negative: &[TestCase]) -> Dpi {
        let mut d = self.clone();
        d.positive.extend_from_slice(positive);
        d.negative.extend_from_slice(negative);
        d
    }

    /// Formulas of all positive test cases, first occurrence kept.
    pub fn positive_union(&self) -> Vec<Formula> {
        let mut out: Vec<Formula> = Vec::new();
        for f in self.positive.iter().flat_map(|t| t.0.iter()) {
            if !out.contains(f) {
                out.push(f.clone());
            }
        }
        out
    }

    /// `O \ d` in id order.
    pub fn complement(&self, d: &IdSet) -> IdSet {
        (1..=self.kb.len()).filter(|i| !d.contains(i)).collect()
    }

    /// Validity of the `O`-subset `subset` together with `extra` formulas:
    /// `subset ∪ extra ∪ B ∪ U_P` meets the requirements and entails no
    /// negative test case in full.
    pub fn is_valid_with(&self, subset: &IdSet, extra: &[Formula]) -> bool {
        let fs: Vec<&Formula> = subset
            .iter()
            .map(|&i| self.formula(i))
            .chain(extra)
            .chain(&self.background)
            .chain(self.positive.iter().flat_map(|t| t.0.iter()))
            .collect();
        let mut atoms = BTreeSet::new();
        for f in fs.iter().copied().chain(self.negative.iter().flat_map(|t| t.0.iter())) {
            f.collect_atoms(&mut atoms);
        }
        let mut cnf = Cnf::with_atoms(atoms);
        for f in &fs {
            cnf.assert(f);
        }
        let consistent = cnf.solve();
        if self.requirements.contains(&Requirement::Consistency) && !consistent {
            return false;
        }
        if !consistent {
            // Anything follows; every negative test case is violated.
            return self.negative.is_empty();
        }
        self.negative.iter().all(|tn| {
            let mut c = cnf.clone();
            c.assert_not(&Formula::and(tn.0.clone()));
            c.solve()
        })
    }

    /// True iff `subset ∪ B ∪ U_P` entails every formula of `targets`.
    pub fn entails(&self, subset: &IdSet, targets: &[Formula]) -> bool {
        let kb: Vec<&Formula> = subset
            .iter()
            .map(|&i| self.formula(i))
            .chain(&self.background)
            .chain(self.positive.iter().flat_map(|t| t.0.iter()))
            .collect();
        crate::logic::entails_all(kb.iter().copied(), targets)
    }

    /// Validity of the `O`-subset `subset` w.r.t. this DPI.
    pub fn is_kb_valid(&self, subset: &IdSet) -> bool {
        self.is_valid_with(subset, &[])
    }

    /// True iff `B ∪ U_P` is valid, equivalently iff a diagnosis exists.
    pub fn is_admissible(&self) -> bool {
        self.is_kb_valid(&IdSet::new())
    }

    /// True iff `O \ d` is valid.
    pub fn is_diagnosis(&self, d: &IdSet) -> bool {
        self.is_kb_valid(&self.complement(d))
    }

    /// `(O \ d) ∪ U_P` for the static case, `(O \ d) ∪ U_{P ∪ P'}` for the
    /// dynamic case; structural duplicates are dropped.
    pub fn solution_kb(&self, d: &IdSet, new_positive: &[TestCase], mode: Mode) -> Result<Vec<Formula>, DpiError> {
        if let Some(&bad) = d.iter().find(|&&i| i == 0 || i > self.kb.len()) {
            return Err(DpiError::UnknownId(bad));
        }
        let mut out: Vec<Formula> = Vec::new();
        let mut push = |f: &Formula| {
            if !out.contains(f) {
                out.push(f.clone());
            }
        };
        for i in self.complement(d) {
            push(self.formula(i));
        }
        for f in self.positive.iter().flat_map(|t| t.0.iter()) {
            push(f);
        }
        if mode == Mode::Dynamic {
            for f in new_positive.iter().flat_map(|t| t.0.iter()) {
                push(f);
            }
        }
        Ok(out)
    }

    /// Renders the instance in the sectioned text format.
    pub fn to_text(&self) -> String {
        let mut s = String::from("[O]\n");
        for f in &self.kb {
            s.push_str(&format!("{f}\n"));
        }
        s.push_str("[B]\n");
        for f in &self.background {
            s.push_str(&format!("{f}\n"));
        }
        s.push_str("[P]\n");
        for t in &self.positive {
            s.push_str(&format!("{t}\n"));
        }
        s.push_str("[N]\n");
        for t in &self.negative {
            s.push_str(&format!("{t}\n"));
        }
        s.push_str("[R]\n");
        for _ in &self.requirements {
            s.push_str("consistency\n");
        }
        s
    }

    /// Parses the sectioned text format:
    ///
    /// ```text
    /// [O]
    /// A -> E
    /// [B]
    /// G -> ~A
    /// [P]
    /// [N]
    /// ~A
    /// [R]
    /// consistency
    /// ```
    ///
    /// `O` and `B` hold one formula per line, `P` and `N` one test case per
    /// line with `;` between its formulas. Blank lines and lines starting
    /// with `#` are ignored.
    pub fn parse(text: &str) -> Result<Dpi, DpiError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Section {
            None,
            O,
            B,
            P,
            N,
            R,
        }
        let mut section = Section::None;
        let (mut kb, mut bg, mut pos, mut neg) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut req = BTreeSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if trimmed.starts_with('[') {
                section = match trimmed {
                    "[O]" => Section::O,
                    "[B]" => Section::B,
                    "[P]" => Section::P,
                    "[N]" => Section::N,
                    "[R]" => Section::R,
                    other => {
                        return Err(DpiError::Format { line: line_no, message: format!("unknown section `{other}`") })
                    }
                };
                continue;
            }
            let offset = raw.len() - raw.trim_start().len();
            let parse_at = |s: &str, col0: usize| {
                parse_formula(s).map_err(|e| DpiError::Syntax {
                    line: line_no,
                    column: col0 + e.column,
                    message: e.message,
                })
            };
            match section {
                Section::None => {
                    return Err(DpiError::Format { line: line_no, message: "content before the first section".into() })
                }
                Section::O => kb.push(parse_at(trimmed, offset)?),
                Section::B => bg.push(parse_at(trimmed, offset)?),
                Section::P | Section::N => {
                    let mut fs = Vec::new();
                    let mut col0 = offset;
                    for part in trimmed.split(';') {
                        let lead = part.len() - part.trim_start().len();
                        if !part.trim().is_empty() {
                            fs.push(parse_at(part.trim(), col0 + lead)?);
                        }
                        col0 += part.len() + 1;
                    }
                    let tc = TestCase::new(fs)
                        .map_err(|_| DpiError::Format { line: line_no, message: "empty test case".into() })?;
                    if section == Section::P {
                        pos.push(tc);
                    } else {
                        neg.push(tc);
                    }
                }
                Section::R => match trimmed {
                    "consistency" => {
                        req.insert(Requirement::Consistency);
                    }
                    "coherency" => return Err(DpiError::Coherency),
                    other => {
                        return Err(DpiError::Format {
                            line: line_no,
                            message: format!("unknown requirement `{other}`"),
                        })
                    }
                },
            }
        }
        Dpi::new(kb, bg, pos, neg, req)
    }
}

impl FromStr for Dpi {
    type Err = DpiError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dpi::parse(s)
    }
}
