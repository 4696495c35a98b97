//! Dynamic hitting-set tree: conflicts and diagnoses track the current DPI.
//! Before each extension the tree is repaired: nodes invalidated by the
//! latest answers are checked for redundancy, and a shrunken conflict
//! witnessing it prunes every redundant node, swapping in an equivalent
//! duplicate path where one exists.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::conflict::{ConflictResult, QuickXplain};
use crate::dpi::{FormulaId, IdSet};
use crate::hstree::SortedQueue;
use crate::probability::FormulaProbs;

use super::Context;

/// A tree node: the edge labels on its path and the conflict labelling each
/// ancestor, `cs[i]` being the label of the node left via `edges[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DynNode {
    pub edges: Vec<FormulaId>,
    pub cs: Vec<IdSet>,
}

impl DynNode {
    pub fn root() -> DynNode {
        DynNode { edges: Vec::new(), cs: Vec::new() }
    }

    /// The diagnosis candidate, i.e. the edge labels as a set.
    pub fn set(&self) -> IdSet {
        self.edges.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn child(&self, e: FormulaId, label: &IdSet) -> DynNode {
        let mut n = self.clone();
        n.edges.push(e);
        n.cs.push(label.clone());
        n
    }
}

/// Tree state persisted between iterations of a dynamic session.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DynTree {
    pub queue: SortedQueue<DynNode>,
    /// Nodes set-equal to a queued node, by ascending cardinality.
    pub dup: Vec<DynNode>,
    /// Leading diagnoses `D✓`.
    pub leading: Vec<DynNode>,
    /// Leading diagnoses invalidated by the latest answer, `D×`.
    pub invalid: Vec<DynNode>,
    /// Nodes closed as proper supersets of a diagnosis, `D⊃`.
    pub nonmin: Vec<DynNode>,
}

impl DynTree {
    pub fn new(root_p: f64) -> DynTree {
        let mut queue = SortedQueue::new();
        queue.insert(DynNode::root(), root_p);
        DynTree { queue, ..DynTree::default() }
    }
}

enum Label {
    Valid,
    NonMin,
    Closed,
    Conflict(IdSet),
}

/// Repairs the tree, then extends it until enough leading diagnoses are
/// known or the queue runs dry. Replaces `tree.leading`.
pub fn dynamic_hs(tree: &mut DynTree, conflicts: &mut Vec<IdSet>, cx: &Context) {
    update_tree(tree, conflicts, cx);
    let started = Instant::now();
    let known: BTreeSet<IdSet> = tree.leading.iter().map(DynNode::set).collect();
    let mut calc: Vec<DynNode> = Vec::new();
    let mut fresh = 0usize;
    while let Some(node) = tree.queue.pop_front() {
        let set = node.set();
        let label = if known.contains(&set) { Label::Valid } else { d_label(&set, tree, &mut calc, conflicts, cx) };
        match label {
            Label::Valid => {
                if !calc.iter().any(|d| d.set() == set) {
                    if !known.contains(&set) {
                        fresh += 1;
                    }
                    calc.push(node);
                }
            }
            Label::NonMin => tree.nonmin.push(node),
            Label::Closed => {}
            Label::Conflict(l) => {
                for &e in &l {
                    let succ = node.child(e, &l);
                    let s = succ.set();
                    if tree.queue.iter().any(|n| n.set() == s) {
                        insert_by_len(&mut tree.dup, succ);
                    } else {
                        let pn = cx.probs.p_nodes(&s);
                        tree.queue.insert(succ, pn);
                    }
                }
            }
        }
        if tree.queue.is_empty() || (fresh > 0 && cx.limits.satisfied(calc.len(), started)) {
            break;
        }
    }
    tree.leading = calc;
}

fn d_label(set: &IdSet, tree: &mut DynTree, calc: &mut [DynNode], conflicts: &mut Vec<IdSet>, cx: &Context) -> Label {
    for d in calc.iter() {
        let ds = d.set();
        if ds == *set {
            return Label::Closed;
        }
        if ds.is_subset(set) {
            return Label::NonMin;
        }
    }
    if let Some(c) = conflicts.iter().find(|c| c.is_disjoint(set)).cloned() {
        // Conflicts only shrink as test cases are added, so `c` is still a
        // conflict of the current DPI, possibly no longer a minimal one.
        let x = QuickXplain::new(cx.current).find(&c).into_conflict().unwrap_or_else(|| c.clone());
        if x != c {
            prune_tree(&x, tree, conflicts, cx);
            for nd in calc.iter_mut() {
                shrink_labels(&x, nd);
            }
        }
        return Label::Conflict(x);
    }
    match QuickXplain::new(cx.current).find(&cx.current.complement(set)) {
        ConflictResult::NoConflict => Label::Valid,
        ConflictResult::Conflict(l) => {
            conflicts.push(l.clone());
            Label::Conflict(l)
        }
    }
}

/// Redundancy checks for the invalidated nodes and re-queuing of every
/// node that may lead again.
pub fn update_tree(tree: &mut DynTree, conflicts: &mut Vec<IdSet>, cx: &Context) {
    let mut processed: BTreeSet<Vec<FormulaId>> = BTreeSet::new();
    while let Some(nd) = tree.invalid.iter().find(|n| !processed.contains(&n.edges)).cloned() {
        processed.insert(nd.edges.clone());
        if let Some(x) = redundancy_witness(&nd, cx) {
            prune_tree(&x, tree, conflicts, cx);
        }
    }
    // Stored conflicts that are no longer minimal are shrunk as well, so
    // every member of `conflicts` is a minimal conflict of the current DPI.
    let mut i = 0;
    while i < conflicts.len() {
        let c = conflicts[i].clone();
        match QuickXplain::new(cx.current).find(&c).into_conflict() {
            Some(x) if x != c => {
                prune_tree(&x, tree, conflicts, cx);
                i = 0;
            }
            _ => i += 1,
        }
    }
    for nd in std::mem::take(&mut tree.invalid) {
        let pn = cx.probs.p_nodes(&nd.set());
        tree.queue.insert(nd, pn);
    }
    let leading: Vec<IdSet> = tree.leading.iter().map(DynNode::set).collect();
    let (keep, requeue): (Vec<DynNode>, Vec<DynNode>) = std::mem::take(&mut tree.nonmin).into_iter().partition(|nd| {
        let s = nd.set();
        leading.iter().any(|d| d.is_subset(&s) && *d != s)
    });
    tree.nonmin = keep;
    for nd in requeue.into_iter().chain(tree.leading.iter().cloned()) {
        let pn = cx.probs.p_nodes(&nd.set());
        tree.queue.insert(nd, pn);
    }
}

/// Prunes every node collection with witness `x` and stores `x`.
fn prune_tree(x: &IdSet, tree: &mut DynTree, conflicts: &mut Vec<IdSet>, cx: &Context) {
    tree.dup = prune_qdup(x, std::mem::take(&mut tree.dup));
    tree.queue = prune_queue(x, std::mem::take(&mut tree.queue), &tree.dup, cx.probs);
    tree.invalid = prune_list(x, std::mem::take(&mut tree.invalid), &tree.dup);
    tree.nonmin = prune_list(x, std::mem::take(&mut tree.nonmin), &tree.dup);
    // Diagnoses are kept whatever their path, but their labels must agree
    // with the rest of the tree once they are invalidated.
    for nd in &mut tree.leading {
        shrink_labels(x, nd);
    }
    add_set_del_supsets(x, conflicts);
}

/// Quick check on the union of the node's conflicts, then the complete
/// per-position check.
fn redundancy_witness(nd: &DynNode, cx: &Context) -> Option<IdSet> {
    let set = nd.set();
    let union: IdSet = nd.cs.iter().flatten().filter(|e| !set.contains(e)).copied().collect();
    if let Some(x) = QuickXplain::new(cx.current).find(&union).into_conflict() {
        if nd.cs.iter().any(|c| x.is_subset(c) && x != *c) {
            return Some(x);
        }
    }
    nd.cs.iter().zip(&nd.edges).find_map(|(c, e)| {
        let mut rest = c.clone();
        rest.remove(e);
        QuickXplain::new(cx.current).find(&rest).into_conflict()
    })
}

/// Replaces each label `cs[i] ⊃ x` by `x`, or reports the last position
/// where `x` witnesses redundancy (1-based, 0 if none).
fn shrink_labels(x: &IdSet, nd: &mut DynNode) -> usize {
    let mut k = 0;
    for i in 0..nd.cs.len() {
        if x.is_subset(&nd.cs[i]) && *x != nd.cs[i] {
            if !x.contains(&nd.edges[i]) {
                k = i + 1;
            } else {
                nd.cs[i] = x.clone();
            }
        }
    }
    k
}

/// First node of `alts` that reaches the same set as the first `|alt|`
/// edges of `nd` and is at least `k` long, extended by the tail of `nd`.
fn replacement<'a>(nd: &DynNode, k: usize, alts: impl IntoIterator<Item = &'a DynNode>) -> Option<DynNode> {
    alts.into_iter().find_map(|alt| {
        let m = alt.len();
        if m < k || m > nd.len() {
            return None;
        }
        let prefix: IdSet = nd.edges[..m].iter().copied().collect();
        if prefix != alt.set() {
            return None;
        }
        let mut edges = alt.edges.clone();
        edges.extend_from_slice(&nd.edges[m..]);
        let mut cs = alt.cs.clone();
        cs.extend_from_slice(&nd.cs[m..]);
        Some(DynNode { edges, cs })
    })
}

fn prune_node(x: &IdSet, mut nd: DynNode, dup: &[DynNode]) -> Option<DynNode> {
    match shrink_labels(x, &mut nd) {
        0 => Some(nd),
        k => replacement(&nd, k, dup),
    }
}

/// Prunes an unordered node collection with witness `x`.
pub fn prune_list(x: &IdSet, nodes: Vec<DynNode>, dup: &[DynNode]) -> Vec<DynNode> {
    nodes.into_iter().filter_map(|nd| prune_node(x, nd, dup)).collect()
}

/// Prunes the queue with witness `x`, keeping it sorted.
pub fn prune_queue(x: &IdSet, queue: SortedQueue<DynNode>, dup: &[DynNode], p: &FormulaProbs) -> SortedQueue<DynNode> {
    let mut out = SortedQueue::new();
    for nd in queue.into_vec() {
        if let Some(n) = prune_node(x, nd, dup) {
            let pn = p.p_nodes(&n.set());
            out.insert(n, pn);
        }
    }
    out
}

/// Prunes the duplicate store with witness `x`; redundant duplicates may
/// only be replaced by duplicates already kept.
pub fn prune_qdup(x: &IdSet, dup: Vec<DynNode>) -> Vec<DynNode> {
    let mut out: Vec<DynNode> = Vec::new();
    for mut nd in dup {
        let k = shrink_labels(x, &mut nd);
        let kept = if k == 0 { Some(nd) } else { replacement(&nd, k, &out) };
        if let Some(n) = kept {
            insert_by_len(&mut out, n);
        }
    }
    out
}

/// Adds `x` in place of the first of its supersets and drops the others.
pub fn add_set_del_supsets(x: &IdSet, conflicts: &mut Vec<IdSet>) {
    match conflicts.iter().position(|c| x.is_subset(c)) {
        Some(i) => {
            conflicts[i] = x.clone();
            let mut j = 0;
            conflicts.retain(|c| {
                j += 1;
                j - 1 == i || !x.is_subset(c)
            });
        }
        None => conflicts.push(x.clone()),
    }
}

fn insert_by_len(list: &mut Vec<DynNode>, nd: DynNode) {
    let pos = list.iter().position(|n| n.len() > nd.len()).unwrap_or(list.len());
    list.insert(pos, nd);
}
