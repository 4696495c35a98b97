//! Queries that discriminate between leading diagnoses.
//!
//! A query is a set of formulas the user is asked to accept or reject as
//! consequences of the intended KB. Every leading diagnosis either predicts
//! acceptance (`dx`), predicts rejection (`dnx`), or neither (`dz`).
//! Candidate queries are built from common entailments of subsets of the
//! leading diagnoses, minimized without changing their q-partition, and
//! ranked by a selection measure.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dpi::{Dpi, IdSet};
use crate::logic::{Cnf, Formula};
use crate::probability::DiagnosisProbDist;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("at least two leading diagnoses are needed to build a query, got {0}")]
    TooFewDiagnoses(usize),
    #[error("the query pool is empty")]
    EmptyPool,
}

/// Split of the leading diagnoses induced by a query.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QPartition {
    pub dx: Vec<IdSet>,
    pub dnx: Vec<IdSet>,
    pub dz: Vec<IdSet>,
}

impl QPartition {
    /// Both answers eliminate at least one diagnosis.
    pub fn is_query_partition(&self) -> bool {
        !self.dx.is_empty() && !self.dnx.is_empty()
    }

    fn same_as(&self, other: &QPartition) -> bool {
        let set = |v: &[IdSet]| v.iter().cloned().collect::<BTreeSet<_>>();
        set(&self.dx) == set(&other.dx) && set(&self.dnx) == set(&other.dnx) && set(&self.dz) == set(&other.dz)
    }
}

/// A query with its q-partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub query: Vec<Formula>,
    pub partition: QPartition,
}

/// Query selection measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Expected entropy of the answer.
    Ent,
    /// Split-in-half: balance of `dx` against `dnx`, penalizing `dz`.
    Spl,
}

impl FromStr for Measure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ent" => Ok(Measure::Ent),
            "spl" => Ok(Measure::Spl),
            other => Err(format!("unknown measure `{other}` (expected ent or spl)")),
        }
    }
}

type Lit<'a> = (&'a str, bool);

/// Sort key of a literal: negative before positive when sorted descending,
/// then by atom name.
fn lit_key<'a>(l: Lit<'a>) -> (bool, &'a str) {
    (!l.1, l.0)
}

/// Implication form of the two-literal clause `a ∨ b` over distinct atoms.
fn clause_formula(a: Lit<'_>, b: Lit<'_>) -> (Formula, (bool, String), (bool, String)) {
    let (ante, cons): (Lit<'_>, Lit<'_>) = match (a.1, b.1) {
        (false, true) => ((a.0, true), b),
        (true, false) => ((b.0, true), a),
        (false, false) => {
            let (hi, lo) = if a.0 > b.0 { (a.0, b.0) } else { (b.0, a.0) };
            ((hi, true), (lo, false))
        }
        (true, true) => {
            let (hi, lo) = if a.0 > b.0 { (a.0, b.0) } else { (b.0, a.0) };
            ((hi, false), (lo, true))
        }
    };
    let f = Formula::imp(Formula::literal(ante.0, ante.1), Formula::literal(cons.0, cons.1));
    let ka = lit_key(ante);
    let kc = lit_key(cons);
    (f, (ka.0, ka.1.to_string()), (kc.0, kc.1.to_string()))
}

/// Clause of an implication between literals, as an unordered literal pair.
fn implication_clause(f: &Formula) -> Option<BTreeSet<(String, bool)>> {
    let Formula::Imp(l, r) = f else { return None };
    let (la, lp) = l.as_literal()?;
    let (ra, rp) = r.as_literal()?;
    if la == ra {
        return None;
    }
    Some([(la.to_string(), !lp), (ra.to_string(), rp)].into_iter().collect())
}

/// Entailments of `O*_d = (O \ d) ∪ B ∪ U_P` of three kinds, in this
/// order: unit literals (by atom, positive first); implications between
/// literals that occur as such in `O \ d` (by id, in their own form); other
/// two-literal clauses over distinct atoms written as implications
/// (descending by antecedent then consequent, negative literals first).
/// Only atoms of `O ∪ B ∪ U_P` are used. Members of `B` and `U_P` are left
/// out.
pub fn get_entailments(d: &IdSet, dpi: &Dpi) -> Vec<Formula> {
    let rest = dpi.complement(d);
    let context: Vec<Formula> = dpi.background().iter().cloned().chain(dpi.positive_union()).collect();
    let kb: Vec<&Formula> = rest.iter().map(|&i| dpi.formula(i)).chain(&context).collect();

    let mut sig = BTreeSet::new();
    for f in dpi.kb().iter().chain(&context) {
        f.collect_atoms(&mut sig);
    }
    let mut cnf = Cnf::with_atoms(sig.iter().cloned());
    for f in &kb {
        cnf.assert(f);
    }
    let entailed = |lits: &[Lit<'_>]| {
        let negated: Vec<(&str, bool)> = lits.iter().map(|&(a, p)| (a, !p)).collect();
        !cnf.solve_under(&negated)
    };

    let mut out: Vec<Formula> = Vec::new();
    for a in &sig {
        for pos in [true, false] {
            if entailed(&[(a, pos)]) {
                out.push(Formula::literal(a, pos));
            }
        }
    }

    let mut covered: BTreeSet<BTreeSet<(String, bool)>> = BTreeSet::new();
    for &i in &rest {
        let f = dpi.formula(i);
        if let Some(cl) = implication_clause(f) {
            if cl.iter().all(|(a, _)| sig.contains(a)) && covered.insert(cl) {
                out.push(f.clone());
            }
        }
    }

    let atoms: Vec<&String> = sig.iter().collect();
    let mut others = Vec::new();
    for (i, a) in atoms.iter().enumerate() {
        for b in &atoms[i + 1..] {
            for (pa, pb) in [(true, true), (true, false), (false, true), (false, false)] {
                let cl: BTreeSet<(String, bool)> = [((*a).clone(), pa), ((*b).clone(), pb)].into_iter().collect();
                if covered.contains(&cl) || !entailed(&[(a, pa), (b, pb)]) {
                    continue;
                }
                others.push(clause_formula((a, pa), (b, pb)));
            }
        }
    }
    others.sort_by(|x, y| (&y.1, &y.2).cmp(&(&x.1, &x.2)));
    out.extend(others.into_iter().map(|(f, _, _)| f));

    let mut seen = BTreeSet::new();
    out.retain(|f| !context.contains(f) && seen.insert(f.clone()));
    out
}

/// q-partition of `q` over `leading` w.r.t. the (current) DPI.
pub fn q_partition(q: &[Formula], leading: &[IdSet], dpi: &Dpi) -> QPartition {
    let mut pt = QPartition::default();
    for d in leading {
        let rest = dpi.complement(d);
        if dpi.entails(&rest, q) {
            pt.dx.push(d.clone());
        } else if !dpi.is_valid_with(&rest, q) {
            pt.dnx.push(d.clone());
        } else {
            pt.dz.push(d.clone());
        }
    }
    pt
}

/// Leading diagnoses sorted by descending probability, then ascending
/// cardinality, then id list.
pub fn order_leading(leading: &[IdSet], dist: &DiagnosisProbDist) -> Vec<IdSet> {
    let mut v: Vec<(IdSet, f64)> = leading.iter().map(|d| (d.clone(), dist.get(d).unwrap_or(0.0))).collect();
    v.sort_by(|(a, pa), (b, pb)| {
        pb.partial_cmp(pa).unwrap_or(Ordering::Equal).then_with(|| (a.len(), a).cmp(&(b.len(), b)))
    });
    v.into_iter().map(|(d, _)| d).collect()
}

/// Index subsets of `0..n` with `0 < |S| < n`, by size then lexicographically.
fn seeds(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1..n).flat_map(move |k| Combinations::new(n, k))
}

struct Combinations {
    n: usize,
    idx: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations { n, idx: (k <= n).then(|| (0..k).collect()) }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.idx.clone()?;
        let k = cur.len();
        let mut nxt = cur.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.idx = None;
                break;
            }
            i -= 1;
            if nxt[i] < self.n - k + i {
                nxt[i] += 1;
                for j in i + 1..k {
                    nxt[j] = nxt[j - 1] + 1;
                }
                self.idx = Some(nxt);
                break;
            }
        }
        Some(cur)
    }
}

/// Up to `q` queries with pairwise distinct q-partitions over `leading`,
/// taken in the given order. Seeds are visited by ascending size; each
/// seed's common entailments form a candidate which is kept if it is a
/// query with a new q-partition, then minimized. When no candidate
/// survives, the trivial queries `U_D \ D_i` are used instead.
pub fn generate_query_pool(dpi: &Dpi, leading: &[IdSet], q: usize) -> Result<Vec<PoolEntry>, QueryError> {
    if leading.len() < 2 {
        return Err(QueryError::TooFewDiagnoses(leading.len()));
    }
    let q = q.max(1);
    let ents: Vec<Vec<Formula>> = leading.iter().map(|d| get_entailments(d, dpi)).collect();
    let mut pool: Vec<PoolEntry> = Vec::new();
    let mut barren: Vec<Vec<usize>> = Vec::new();

    for seed in seeds(leading.len()) {
        if barren.iter().any(|b| b.iter().all(|i| seed.contains(i))) {
            continue;
        }
        let common: Vec<Formula> =
            ents[seed[0]].iter().filter(|f| seed[1..].iter().all(|&j| ents[j].contains(f))).cloned().collect();
        if common.is_empty() {
            barren.push(seed);
            continue;
        }
        let mut pt = QPartition::default();
        for (i, d) in leading.iter().enumerate() {
            if seed.contains(&i) {
                pt.dx.push(d.clone());
                continue;
            }
            let rest = dpi.complement(d);
            if dpi.entails(&rest, &common) {
                pt.dx.push(d.clone());
            } else if !dpi.is_valid_with(&rest, &common) {
                pt.dnx.push(d.clone());
            } else {
                pt.dz.push(d.clone());
            }
        }
        if pt.dnx.is_empty() || pool.iter().any(|e| e.partition.same_as(&pt)) {
            continue;
        }
        let query = min_q(&common, &pt, dpi);
        pool.push(PoolEntry { query, partition: pt });
        if pool.len() >= q {
            return Ok(pool);
        }
    }

    if pool.is_empty() {
        let all: IdSet = leading.iter().flatten().copied().collect();
        for d in leading {
            let query: Vec<Formula> = all.difference(d).map(|&i| dpi.formula(i).clone()).collect();
            if query.is_empty() {
                continue;
            }
            let pt = q_partition(&query, leading, dpi);
            if pt.is_query_partition() && !pool.iter().any(|e| e.partition.same_as(&pt)) {
                pool.push(PoolEntry { query, partition: pt });
            }
        }
    }
    Ok(pool)
}

/// True iff `qb` induces the same q-partition as the query it was taken
/// from: every `dnx` member is still violated, no `dz` member entails it.
pub fn is_q_part_const(qb: &[Formula], pt: &QPartition, dpi: &Dpi) -> bool {
    pt.dnx.iter().all(|d| !dpi.is_valid_with(&dpi.complement(d), qb))
        && pt.dz.iter().all(|d| !dpi.entails(&dpi.complement(d), qb))
}

/// Subset-minimal part of `q` with the same q-partition `pt`.
pub fn min_q(q: &[Formula], pt: &QPartition, dpi: &Dpi) -> Vec<Formula> {
    fn rec(added: bool, qb: &[Formula], q: &[Formula], pt: &QPartition, dpi: &Dpi) -> Vec<Formula> {
        if added && is_q_part_const(qb, pt, dpi) {
            return Vec::new();
        }
        if q.len() == 1 {
            return q.to_vec();
        }
        let k = q.len() / 2;
        let (q1, q2) = q.split_at(k);
        let b1: Vec<Formula> = qb.iter().chain(q1).cloned().collect();
        let m2 = rec(true, &b1, q2, pt, dpi);
        let b2: Vec<Formula> = qb.iter().chain(&m2).cloned().collect();
        let m1 = rec(!m2.is_empty(), &b2, q1, pt, dpi);
        m1.into_iter().chain(m2).collect()
    }
    if q.is_empty() {
        return Vec::new();
    }
    rec(false, &[], q, pt, dpi)
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Score of a pool entry under `measure`; lower is better.
pub fn score(entry: &PoolEntry, measure: Measure, dist: &DiagnosisProbDist) -> f64 {
    let pt = &entry.partition;
    match measure {
        Measure::Ent => {
            let mass = |v: &[IdSet]| v.iter().map(|d| dist.get(d).unwrap_or(0.0)).sum::<f64>();
            let (px, pnx, pz) = (mass(&pt.dx), mass(&pt.dnx), mass(&pt.dz));
            let pt_true = px + 0.5 * pz;
            let pt_false = pnx + 0.5 * pz;
            xlog2x(pt_true) + xlog2x(pt_false) + pz
        }
        Measure::Spl => (pt.dx.len() as f64 - pt.dnx.len() as f64).abs() + pt.dz.len() as f64,
    }
}

/// Pool indices from best to worst; equal scores keep pool order.
pub fn rank_pool(pool: &[PoolEntry], measure: Measure, dist: &DiagnosisProbDist) -> Vec<usize> {
    let scores: Vec<f64> = pool.iter().map(|e| score(e, measure, dist)).collect();
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.sort_by(|&a, &b| {
        let (sa, sb) = (scores[a], scores[b]);
        if (sa - sb).abs() <= 1e-12 {
            Ordering::Equal
        } else {
            sa.partial_cmp(&sb).unwrap_or(Ordering::Equal)
        }
    });
    idx
}

/// Best entry of a non-empty pool.
pub fn select_best_query<'a>(
    pool: &'a [PoolEntry],
    measure: Measure,
    dist: &DiagnosisProbDist,
) -> Result<&'a PoolEntry, QueryError> {
    rank_pool(pool, measure, dist).first().map(|&i| &pool[i]).ok_or(QueryError::EmptyPool)
}
