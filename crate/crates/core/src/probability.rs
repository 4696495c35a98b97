//! Fault probabilities for formulas and diagnoses.
//!
//! Element probabilities (atoms and connectives) induce a fault probability
//! per formula, which is scaled below 0.5 so that a set of faulty formulas
//! is always less likely than any of its subsets. Diagnosis probabilities
//! are products over the formulas of the KB, normalized over the diagnoses
//! at hand, and refined by the answers given so far.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dpi::{Dpi, FormulaId, IdSet, TestCase};
use crate::logic::{Element, Formula};

/// Formula fault probability used when no element probabilities are given.
pub const UNIFORM_PROB: f64 = 0.3;

/// Target for the largest adapted formula probability when no explicit
/// adaptation factor is supplied.
pub const DEFAULT_ADAPTED_MAX: f64 = 0.49;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no probability for element `{element}` occurring in formula {id}")]
    Missing { element: String, id: FormulaId },
    #[error("adapted probability {value:.4} of formula {id} is not below 0.5")]
    TooLarge { id: FormulaId, value: f64 },
    #[error("adaptation factor {0} must be positive")]
    BadFactor(f64),
}

/// Fault probability per syntactic element.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ElementProbs(pub BTreeMap<Element, f64>);

impl ElementProbs {
    /// Parses lines `element = probability`, where an element is an atom
    /// name or one of `NOT AND OR IMP IFF FALSE`. Blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str) -> Result<ElementProbs, ProbError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            let err = |message: String| ProbError::Parse { line, message };
            let (lhs, rhs) = s.split_once('=').ok_or_else(|| err("expected `element = probability`".into()))?;
            let el = Element::from_token(lhs.trim()).ok_or_else(|| err(format!("bad element `{}`", lhs.trim())))?;
            let p: f64 = rhs.trim().parse().map_err(|_| err(format!("bad probability `{}`", rhs.trim())))?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(err(format!("probability {p} outside (0, 1]")));
            }
            map.insert(el, p);
        }
        Ok(ElementProbs(map))
    }
}

/// Probability that formula `f` contains at least one faulty element.
pub fn raw_formula_prob(f: &Formula, elem: &ElementProbs, id: FormulaId) -> Result<f64, ProbError> {
    let mut keep = 1.0;
    for (e, n) in &f.profile().counts {
        let p = elem.0.get(e).ok_or_else(|| ProbError::Missing { element: e.to_string(), id })?;
        keep *= (1.0 - p).powi(*n as i32);
    }
    Ok(1.0 - keep)
}

/// Fault probability per formula of the KB, indexed by id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaProbs(Vec<f64>);

impl FormulaProbs {
    /// Wraps probabilities given in id order.
    ///
    /// # Panics
    /// Panics if a value is outside `(0, 0.5)`.
    pub fn new(values: Vec<f64>) -> FormulaProbs {
        assert!(values.iter().all(|&p| p > 0.0 && p < 0.5), "formula probabilities must lie in (0, 0.5)");
        FormulaProbs(values)
    }

    /// The same probability for each of `n` formulas.
    pub fn uniform(n: usize) -> FormulaProbs {
        FormulaProbs(vec![UNIFORM_PROB; n])
    }

    /// Raw probabilities from element probabilities, scaled by `c`, or by
    /// `0.49 / max` when `c` is `None`.
    pub fn from_elements(kb: &[Formula], elem: &ElementProbs, c: Option<f64>) -> Result<FormulaProbs, ProbError> {
        let raw =
            kb.iter().enumerate().map(|(i, f)| raw_formula_prob(f, elem, i + 1)).collect::<Result<Vec<_>, _>>()?;
        let c = match c {
            Some(c) if c > 0.0 => c,
            Some(c) => return Err(ProbError::BadFactor(c)),
            None => {
                let max = raw.iter().copied().fold(0.0, f64::max);
                if max > 0.0 {
                    DEFAULT_ADAPTED_MAX / max
                } else {
                    1.0
                }
            }
        };
        let adapted: Vec<f64> = raw.iter().map(|p| c * p).collect();
        if let Some((i, &v)) = adapted.iter().enumerate().find(|(_, &v)| v >= 0.5) {
            return Err(ProbError::TooLarge { id: i + 1, value: v });
        }
        Ok(FormulaProbs(adapted))
    }

    pub fn get(&self, id: FormulaId) -> f64 {
        self.0[id - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Probability that exactly the formulas of `node` are faulty.
    pub fn p_nodes(&self, node: &IdSet) -> f64 {
        self.0.iter().enumerate().map(|(i, &p)| if node.contains(&(i + 1)) { p } else { 1.0 - p }).product()
    }
}

/// An answered query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryAnswer {
    pub query: Vec<Formula>,
    pub answer: bool,
}

/// Probability per diagnosis, kept in the order the diagnoses were given.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisProbDist(Vec<(IdSet, f64)>);

impl DiagnosisProbDist {
    pub fn entries(&self) -> &[(IdSet, f64)] {
        &self.0
    }

    pub fn get(&self, d: &IdSet) -> Option<f64> {
        self.0.iter().find(|(x, _)| x == d).map(|(_, p)| *p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().map(|(_, p)| p).sum()
    }

    fn normalized(mut self) -> Self {
        let s = self.sum();
        if s > 0.0 {
            for (_, p) in &mut self.0 {
                *p /= s;
            }
        }
        self
    }

    /// Most probable diagnosis; ties go to the smaller diagnosis, then to
    /// the lexicographically smaller id list.
    pub fn mode(&self) -> Option<(&IdSet, f64)> {
        let mut best: Option<(&IdSet, f64)> = None;
        for (d, p) in &self.0 {
            best = match best {
                None => Some((d, *p)),
                Some((bd, bp)) => {
                    let tie = (p - bp).abs() <= 1e-12 * bp.max(*p);
                    let better = if tie { (d.len(), d) < (bd.len(), bd) } else { *p > bp };
                    if better {
                        Some((d, *p))
                    } else {
                        Some((bd, bp))
                    }
                }
            };
        }
        best
    }
}

impl fmt::Display for DiagnosisProbDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (d, p)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {:.4}", crate::dpi::fmt_ids(d), p)?;
        }
        Ok(())
    }
}

/// Normalized node probabilities of the given diagnoses.
pub fn prior_diag_probs(diagnoses: &[IdSet], p: &FormulaProbs) -> DiagnosisProbDist {
    DiagnosisProbDist(diagnoses.iter().map(|d| (d.clone(), p.p_nodes(d))).collect()).normalized()
}

/// Prior probabilities refined by replaying the answers in order. Each
/// diagnosis that predicts neither answer for a query has its weight
/// halved; the result is normalized.
pub fn posterior_diag_probs(leading: &[IdSet], p: &FormulaProbs, dpi: &Dpi, qa: &[QueryAnswer]) -> DiagnosisProbDist {
    let mut weights: Vec<(IdSet, f64)> = leading.iter().map(|d| (d.clone(), p.p_nodes(d))).collect();
    let mut pos: Vec<TestCase> = Vec::new();
    let mut neg: Vec<TestCase> = Vec::new();
    for step in qa {
        let current = dpi.extended(&pos, &neg);
        let tc = TestCase::new(step.query.clone()).expect("queries are non-empty");
        if step.answer {
            for (d, w) in &mut weights {
                if !current.entails(&current.complement(d), &step.query) {
                    *w *= 0.5;
                }
            }
            pos.push(tc);
        } else {
            for (d, w) in &mut weights {
                if current.is_valid_with(&current.complement(d), &step.query) {
                    *w *= 0.5;
                }
            }
            neg.push(tc);
        }
    }
    DiagnosisProbDist(weights).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpi::ids;
    use crate::logic::parse_formula;

    pub(crate) const TABLE2_PROBS: &str = "\
A = 0.25
B = 0.01
E = 0.03
F = 0.05
G = 0.4
X = 0.1
Y = 0.6
Z = 0.6
IMP = 0.01
NOT = 0.25
AND = 0.05
OR = 0.05
";

    fn table2() -> Dpi {
        Dpi::parse(
            "[O]\nA -> E\nX | E -> F & Y & Z\nF -> B\nB -> X\nY -> ~A\nB -> Z\nZ -> G\n\
             [B]\nG -> ~A\n[N]\n~A\n[R]\nconsistency\n",
        )
        .unwrap()
    }

    #[test]
    fn raw_and_adapted_rows() {
        let d = table2();
        let el = ElementProbs::parse(TABLE2_PROBS).unwrap();
        let raw = raw_formula_prob(d.formula(1), &el, 1).unwrap();
        assert!((raw - 0.28).abs() < 0.005, "{raw}");
        let fp = FormulaProbs::from_elements(d.kb(), &el, Some(0.49)).unwrap();
        assert!((fp.get(1) - 0.14).abs() < 0.005);
        assert!((fp.get(3) - 0.03).abs() < 0.005);
    }

    #[test]
    fn default_factor_caps_at_049() {
        let d = table2();
        let el = ElementProbs::parse(TABLE2_PROBS).unwrap();
        let fp = FormulaProbs::from_elements(d.kb(), &el, None).unwrap();
        let max = fp.values().iter().copied().fold(0.0, f64::max);
        assert!((max - 0.49).abs() < 1e-12);
    }

    #[test]
    fn missing_and_oversized() {
        let d = table2();
        let el = ElementProbs::parse("A = 0.2").unwrap();
        assert!(matches!(FormulaProbs::from_elements(d.kb(), &el, None), Err(ProbError::Missing { .. })));
        let el = ElementProbs::parse(TABLE2_PROBS).unwrap();
        assert!(matches!(FormulaProbs::from_elements(d.kb(), &el, Some(1.0)), Err(ProbError::TooLarge { id: 2, .. })));
        assert!(ElementProbs::parse("A 0.2").is_err());
        assert!(ElementProbs::parse("A = 1.5").is_err());
        assert!(ElementProbs::parse("A = 0").is_err());
        assert!(ElementProbs::parse("# c\n\nFALSE = 0.1 # x").is_ok());
    }

    #[test]
    fn node_probabilities() {
        let u = FormulaProbs::uniform(7);
        assert!((u.p_nodes(&IdSet::new()) - 0.7f64.powi(7)).abs() < 1e-12);
        assert!(u.p_nodes(&ids(&[1])) > u.p_nodes(&ids(&[1, 2])));
    }

    #[test]
    fn priors_and_mode() {
        let d = table2();
        let el = ElementProbs::parse(TABLE2_PROBS).unwrap();
        let fp = FormulaProbs::from_elements(d.kb(), &el, Some(0.49)).unwrap();
        let dist = prior_diag_probs(&[ids(&[1]), ids(&[2]), ids(&[5, 7])], &fp);
        assert!((dist.get(&ids(&[1])).unwrap() - 0.12).abs() < 0.01);
        assert!((dist.get(&ids(&[2])).unwrap() - 0.60).abs() < 0.01);
        assert!((dist.get(&ids(&[5, 7])).unwrap() - 0.28).abs() < 0.01);
        assert_eq!(dist.mode().unwrap().0, &ids(&[2]));
        let single = prior_diag_probs(&[ids(&[3])], &fp);
        assert!((single.get(&ids(&[3])).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mode_tie_breaks() {
        let dist = DiagnosisProbDist(vec![(ids(&[2]), 0.5), (ids(&[1]), 0.5)]);
        assert_eq!(dist.mode().unwrap().0, &ids(&[1]));
        let dist = DiagnosisProbDist(vec![(ids(&[1, 2]), 0.5), (ids(&[3]), 0.5)]);
        assert_eq!(dist.mode().unwrap().0, &ids(&[3]));
    }

    #[test]
    fn posterior_halves_dz_members() {
        let d = table2();
        let u = FormulaProbs::uniform(7);
        let leading = [ids(&[2]), ids(&[5, 7])];
        assert_eq!(posterior_diag_probs(&leading, &u, &d, &[]), prior_diag_probs(&leading, &u));
        // Neither diagnosis stays valid once E -> ~A is forbidden, so no halving.
        let qa = [QueryAnswer { query: vec![parse_formula("E -> ~A").unwrap()], answer: false }];
        let post = posterior_diag_probs(&leading, &u, &d, &qa);
        assert_eq!(post, prior_diag_probs(&leading, &u));
        let d = Dpi::parse("[O]\nA\nB\n[N]\nA & B\n").unwrap();
        let u = FormulaProbs::uniform(2);
        let leading = [ids(&[1]), ids(&[2])];
        let qa = [QueryAnswer { query: vec![parse_formula("A | C").unwrap()], answer: true }];
        let post = posterior_diag_probs(&leading, &u, &d, &qa);
        assert!((post.sum() - 1.0).abs() < 1e-12);
        assert!((post.get(&ids(&[1])).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((post.get(&ids(&[2])).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }
}
