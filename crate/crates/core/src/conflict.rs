//! Minimal conflict sets by divide-and-conquer (QuickXplain).

use crate::dpi::{Dpi, FormulaId, IdSet};

/// Outcome of a conflict search over a candidate sub-KB.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConflictResult {
    /// The candidate is valid.
    NoConflict,
    /// A minimal conflict set; empty iff the DPI is not admissible.
    Conflict(IdSet),
}

impl ConflictResult {
    pub fn conflict(&self) -> Option<&IdSet> {
        match self {
            ConflictResult::NoConflict => None,
            ConflictResult::Conflict(c) => Some(c),
        }
    }

    pub fn into_conflict(self) -> Option<IdSet> {
        match self {
            ConflictResult::NoConflict => None,
            ConflictResult::Conflict(c) => Some(c),
        }
    }
}

/// Conflict search with an instrumented count of validity checks.
#[derive(Debug)]
pub struct QuickXplain<'a> {
    dpi: &'a Dpi,
    calls: usize,
}

impl<'a> QuickXplain<'a> {
    pub fn new(dpi: &'a Dpi) -> Self {
        QuickXplain { dpi, calls: 0 }
    }

    /// Validity checks made by the most recent [`QuickXplain::find`].
    pub fn calls(&self) -> usize {
        self.calls
    }

    fn valid(&mut self, ids: &IdSet) -> bool {
        self.calls += 1;
        self.dpi.is_kb_valid(ids)
    }

    /// Minimal conflict set within `candidate` w.r.t. `<candidate, B, P, N>`.
    ///
    /// The candidate is split at `floor(n/2)` in id order, so the result is
    /// the conflict drawn from the shortest sufficient id prefix.
    pub fn find(&mut self, candidate: &IdSet) -> ConflictResult {
        self.calls = 0;
        if self.valid(candidate) {
            return ConflictResult::NoConflict;
        }
        if candidate.is_empty() {
            return ConflictResult::Conflict(IdSet::new());
        }
        // With B ∪ U_P already invalid the recursion would return some
        // singleton instead of the empty conflict.
        if !self.valid(&IdSet::new()) {
            return ConflictResult::Conflict(IdSet::new());
        }
        let order: Vec<FormulaId> = candidate.iter().copied().collect();
        ConflictResult::Conflict(self.recurse(false, &IdSet::new(), &order))
    }

    /// `added` flags a non-empty set just moved into `background`.
    fn recurse(&mut self, added: bool, background: &IdSet, kb: &[FormulaId]) -> IdSet {
        if added && !self.valid(background) {
            return IdSet::new();
        }
        if kb.len() == 1 {
            return kb.iter().copied().collect();
        }
        let k = kb.len() / 2;
        let (o1, o2) = kb.split_at(k);
        let b1: IdSet = background.iter().chain(o1).copied().collect();
        let c2 = self.recurse(true, &b1, o2);
        let b2: IdSet = background.union(&c2).copied().collect();
        let c1 = self.recurse(!c2.is_empty(), &b2, o1);
        c1.union(&c2).copied().collect()
    }
}

/// Minimal conflict set within `candidate`; see [`QuickXplain::find`].
pub fn find_minimal_conflict(candidate: &IdSet, dpi: &Dpi) -> ConflictResult {
    QuickXplain::new(dpi).find(candidate)
}
