//! Static hitting-set tree: conflicts and diagnoses are those of the input
//! DPI; answered queries only filter which diagnoses may lead.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::conflict::{ConflictResult, QuickXplain};
use crate::dpi::IdSet;
use crate::hstree::SortedQueue;

use super::Context;

/// Tree state persisted between iterations of a static session.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StaticTree {
    pub queue: SortedQueue<IdSet>,
    /// Leading diagnoses `D✓`.
    pub leading: Vec<IdSet>,
    /// Diagnoses of the input DPI ruled out by answers, `D×`.
    pub invalid: Vec<IdSet>,
}

impl StaticTree {
    pub fn new(root_p: f64) -> StaticTree {
        let mut queue = SortedQueue::new();
        queue.insert(IdSet::new(), root_p);
        StaticTree { queue, leading: Vec::new(), invalid: Vec::new() }
    }
}

enum Label {
    Valid,
    Closed,
    Conflict(IdSet),
}

/// Extends the tree until enough leading diagnoses are known or the queue
/// runs dry. New diagnoses are appended to `tree.leading`.
pub fn static_hs(tree: &mut StaticTree, conflicts: &mut Vec<IdSet>, cx: &Context) {
    let started = Instant::now();
    let mut calc: Vec<IdSet> = Vec::new();
    while let Some(node) = tree.queue.pop_front() {
        match s_label(&node, tree, &calc, conflicts, cx) {
            Label::Valid => {
                if cx.current.is_diagnosis(&node) {
                    calc.push(node);
                } else {
                    tree.invalid.push(node);
                }
            }
            Label::Closed => {}
            Label::Conflict(c) => {
                for e in c {
                    let mut succ = node.clone();
                    succ.insert(e);
                    let pn = cx.probs.p_nodes(&succ);
                    tree.queue.insert(succ, pn);
                }
            }
        }
        if tree.queue.is_empty() || (!calc.is_empty() && cx.limits.satisfied(calc.len() + tree.leading.len(), started))
        {
            break;
        }
    }
    tree.leading.extend(calc);
}

fn s_label(node: &IdSet, tree: &StaticTree, calc: &[IdSet], conflicts: &mut Vec<IdSet>, cx: &Context) -> Label {
    if tree.invalid.iter().chain(&tree.leading).chain(calc).any(|d| d.is_subset(node)) {
        return Label::Closed;
    }
    if tree.queue.iter().any(|n| n == node) {
        return Label::Closed;
    }
    if let Some(c) = conflicts.iter().find(|c| c.is_disjoint(node)) {
        return Label::Conflict(c.clone());
    }
    match QuickXplain::new(cx.input).find(&cx.input.complement(node)) {
        ConflictResult::NoConflict => Label::Valid,
        ConflictResult::Conflict(c) => {
            conflicts.push(c.clone());
            Label::Conflict(c)
        }
    }
}
