//! Best-first hitting-set tree over minimal conflict sets.
//!
//! Nodes are the sets of edge labels on their path. Open nodes are kept in
//! descending order of node probability, first-in-first-out among equal
//! values, so under uniform formula probabilities the search is
//! breadth-first and minimal diagnoses come out by ascending cardinality.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conflict::{ConflictResult, QuickXplain};
use crate::dpi::{Dpi, IdSet};
use crate::probability::FormulaProbs;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HsError {
    #[error("the DPI is not admissible: background knowledge and positive test cases already violate a requirement or negative test case")]
    NotAdmissible,
    #[error("n_min must be at least 1 and not exceed n_max")]
    BadBounds,
}

/// Search limits: stop once at least `n_min` diagnoses are known and either
/// `n_max` is reached or `timeout` has elapsed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub n_min: usize,
    pub n_max: usize,
    pub timeout: Duration,
}

impl Limits {
    /// Run until the tree is exhausted.
    pub fn all() -> Limits {
        Limits { n_min: usize::MAX, n_max: usize::MAX, timeout: Duration::from_secs(u64::MAX / 4) }
    }

    pub fn new(n_min: usize, n_max: usize, timeout: Duration) -> Limits {
        Limits { n_min, n_max, timeout }
    }

    pub(crate) fn check(&self) -> Result<(), HsError> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(HsError::BadBounds);
        }
        Ok(())
    }

    /// Until-clause of the tree loops, given the number of diagnoses found.
    pub(crate) fn satisfied(&self, found: usize, started: Instant) -> bool {
        found >= self.n_min && (found >= self.n_max || started.elapsed() > self.timeout)
    }
}

/// Relative tolerance under which two node probabilities count as equal.
const TIE_EPS: f64 = 1e-9;

/// Priority queue ordered by descending probability, FIFO among ties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SortedQueue<T> {
    items: Vec<(T, f64)>,
}

impl<T> Default for SortedQueue<T> {
    fn default() -> Self {
        SortedQueue::new()
    }
}

impl<T> SortedQueue<T> {
    pub fn new() -> Self {
        SortedQueue { items: Vec::new() }
    }

    /// Inserts behind every entry at least as probable as `p`.
    pub fn insert(&mut self, item: T, p: f64) {
        let threshold = p * (1.0 - TIE_EPS);
        let pos = self.items.iter().position(|(_, q)| *q < threshold).unwrap_or(self.items.len());
        self.items.insert(pos, (item, p));
    }

    pub fn pop_front(&mut self) -> Option<T> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items.remove(0).0)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter().map(|(t, _)| t)
    }

    pub fn retain(&mut self, mut f: impl FnMut(&T) -> bool) {
        self.items.retain(|(t, _)| f(t));
    }

    pub fn drain(&mut self) -> Vec<T> {
        self.items.drain(..).map(|(t, _)| t).collect()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.items.into_iter().map(|(t, _)| t).collect()
    }
}

/// Diagnoses in the order they were found, plus every conflict computed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HsResult {
    pub diagnoses: Vec<IdSet>,
    pub conflicts: Vec<IdSet>,
}

enum Label {
    Valid,
    Closed,
    Conflict(IdSet),
}

/// Most probable minimal diagnoses of an admissible DPI.
pub fn hs(dpi: &Dpi, limits: Limits, p: &FormulaProbs) -> Result<HsResult, HsError> {
    limits.check()?;
    if !dpi.is_admissible() {
        return Err(HsError::NotAdmissible);
    }
    let started = Instant::now();
    let mut out = HsResult::default();
    let mut queue = SortedQueue::new();
    queue.insert(IdSet::new(), p.p_nodes(&IdSet::new()));
    while let Some(node) = queue.pop_front() {
        match label(dpi, &node, &mut out, &queue) {
            Label::Valid => out.diagnoses.push(node),
            Label::Closed => {}
            Label::Conflict(c) => {
                for e in c {
                    let mut succ = node.clone();
                    succ.insert(e);
                    let pn = p.p_nodes(&succ);
                    queue.insert(succ, pn);
                }
            }
        }
        if queue.is_empty() || limits.satisfied(out.diagnoses.len(), started) {
            break;
        }
    }
    Ok(out)
}

fn label(dpi: &Dpi, node: &IdSet, out: &mut HsResult, queue: &SortedQueue<IdSet>) -> Label {
    if out.diagnoses.iter().any(|d| d.is_subset(node)) {
        return Label::Closed;
    }
    if queue.iter().any(|n| n == node) {
        return Label::Closed;
    }
    if let Some(c) = out.conflicts.iter().find(|c| c.is_disjoint(node)) {
        return Label::Conflict(c.clone());
    }
    match QuickXplain::new(dpi).find(&dpi.complement(node)) {
        ConflictResult::NoConflict => Label::Valid,
        ConflictResult::Conflict(c) => {
            out.conflicts.push(c.clone());
            Label::Conflict(c)
        }
    }
}

/// Batch debugging: the single most probable diagnosis when `auto` is set,
/// otherwise [`hs`] with the given limits.
pub fn non_interactive_debug(dpi: &Dpi, limits: Limits, p: &FormulaProbs, auto: bool) -> Result<Vec<IdSet>, HsError> {
    let limits = if auto { Limits { n_min: 1, n_max: 1, ..limits } } else { limits };
    Ok(hs(dpi, limits, p)?.diagnoses)
}
