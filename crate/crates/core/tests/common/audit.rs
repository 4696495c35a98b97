//! Property audits of the engine against the brute-force oracles. Each
//! returns a description of the first violation found.

use std::collections::BTreeSet;

use kbdebug::conflict::{find_minimal_conflict, ConflictResult};
use kbdebug::dpi::{fmt_ids, Dpi, IdSet, Mode};
use kbdebug::hstree::{hs, Limits};
use kbdebug::interactive::{scripted_answer, Params, Session};
use kbdebug::logic::Formula;
use kbdebug::probability::FormulaProbs;
use kbdebug::query::{generate_query_pool, q_partition, Measure, QPartition};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{brute_diagnoses, brute_min_conflicts, brute_min_diagnoses, brute_min_hitting_sets, tt_entails, tt_valid};

type Audit = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Audit {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Conflicts found on the whole KB and on a random sub-KB are minimal.
pub fn qx_minimality(dpi: &Dpi, rng: &mut impl Rng) -> Audit {
    let all = brute_min_conflicts(dpi);
    match find_minimal_conflict(&dpi.all_ids(), dpi) {
        ConflictResult::Conflict(c) => {
            ensure(all.contains(&c), || format!("{} is not a minimal conflict", fmt_ids(&c)))?
        }
        ConflictResult::NoConflict => return Err("faulty KB reported valid".into()),
    }
    let cand: IdSet = dpi.all_ids().into_iter().filter(|_| rng.gen_bool(0.6)).collect();
    match find_minimal_conflict(&cand, dpi) {
        ConflictResult::NoConflict => ensure(tt_valid(dpi, &cand, &[]), || "invalid sub-KB reported valid".into()),
        ConflictResult::Conflict(c) => ensure(c.is_subset(&cand) && all.contains(&c), || {
            format!("{} is not a minimal conflict within {}", fmt_ids(&c), fmt_ids(&cand))
        }),
    }
}

/// Full hitting-set enumeration equals both brute-force characterizations.
pub fn hs_duality(dpi: &Dpi) -> Audit {
    let found: BTreeSet<IdSet> = hs(dpi, Limits::all(), &FormulaProbs::uniform(dpi.len()))
        .map_err(|e| e.to_string())?
        .diagnoses
        .into_iter()
        .collect();
    let direct = brute_min_diagnoses(dpi);
    let dual = brute_min_hitting_sets(&brute_min_conflicts(dpi), dpi.len());
    ensure(found == direct && direct == dual, || format!("hs {found:?}, brute {direct:?}, hitting sets {dual:?}"))
}

fn part_const(dpi: &Dpi, q: &[Formula], pt: &QPartition) -> bool {
    pt.dnx.iter().all(|d| !tt_valid(dpi, &dpi.complement(d), q))
        && pt.dz.iter().all(|d| !tt_entails(dpi, &dpi.complement(d), q))
}

/// Pooled queries over all minimal diagnoses induce genuine q-partitions
/// and are subset-minimal for them.
pub fn pool_properties(dpi: &Dpi) -> Audit {
    let leading: Vec<IdSet> = brute_min_diagnoses(dpi).into_iter().collect();
    if leading.len() < 2 {
        return Ok(());
    }
    let pool = generate_query_pool(dpi, &leading, 4).map_err(|e| e.to_string())?;
    ensure(!pool.is_empty(), || "empty pool".into())?;
    for e in &pool {
        let pt = &e.partition;
        ensure(pt.is_query_partition(), || format!("{:?} has an empty side", e.query))?;
        let mut seen: Vec<&IdSet> = pt.dx.iter().chain(&pt.dnx).chain(&pt.dz).collect();
        seen.sort();
        let mut want: Vec<&IdSet> = leading.iter().collect();
        want.sort();
        ensure(seen == want, || format!("{:?} does not partition the leading set", e.query))?;
        for d in &leading {
            let rest = dpi.complement(d);
            let side = if tt_entails(dpi, &rest, &e.query) {
                &pt.dx
            } else if !tt_valid(dpi, &rest, &e.query) {
                &pt.dnx
            } else {
                &pt.dz
            };
            ensure(side.contains(d), || format!("{} misplaced for {:?}", fmt_ids(d), e.query))?;
        }
        ensure(q_partition(&e.query, &leading, dpi) == *pt, || "q_partition disagrees with the pool".into())?;
        ensure(part_const(dpi, &e.query, pt), || "query does not preserve its partition".into())?;
        for i in 0..e.query.len() {
            let mut smaller = e.query.clone();
            smaller.remove(i);
            ensure(smaller.is_empty() || !part_const(dpi, &smaller, pt), || {
                format!("{:?} is not minimal: {:?} suffices", e.query, smaller)
            })?;
        }
    }
    Ok(())
}

/// Outcome of an audited scripted session.
pub struct RunReport {
    pub queries: usize,
}

/// Runs a scripted session with `sigma = 0` and checks every step.
pub fn scripted_run(dpi: &Dpi, params: Params, probs: FormulaProbs, rng: &mut impl Rng) -> Result<RunReport, String> {
    let minimal: Vec<IdSet> = brute_min_diagnoses(dpi).into_iter().collect();
    let truth = minimal.choose(rng).expect("faulty admissible DPI has a diagnosis").clone();
    let params = Params { sigma: 0.0, ..params };
    let mode = params.mode;
    let mut s = Session::start(dpi.clone(), probs, params).map_err(|e| e.to_string())?;
    let mut queries = 0;
    loop {
        let current = s.current_dpi();
        let sum = s.distribution().sum();
        ensure((sum - 1.0).abs() < 1e-9, || format!("posterior sums to {sum}"))?;
        let cur_min = brute_min_diagnoses(&current);
        for d in s.leading() {
            match mode {
                Mode::Static => {
                    ensure(minimal.contains(&d) && tt_valid(&current, &current.complement(&d), &[]), || {
                        format!("static leading {} is not a minimal diagnosis satisfying the answers", fmt_ids(&d))
                    })?
                }
                Mode::Dynamic => ensure(cur_min.contains(&d), || {
                    format!("dynamic leading {} is not a minimal diagnosis of the current DPI", fmt_ids(&d))
                })?,
            }
        }
        let (conflict_dpi, label) = match mode {
            Mode::Static => (dpi, "input"),
            Mode::Dynamic => (&current, "current"),
        };
        let cs = brute_min_conflicts(conflict_dpi);
        for c in s.conflicts() {
            ensure(cs.contains(c), || format!("{} is not a minimal conflict of the {label} DPI", fmt_ids(c)))?;
        }
        if let Some(sol) = s.solution() {
            ensure(sol.diagnosis == truth, || {
                format!("ended with {} instead of {}", fmt_ids(&sol.diagnosis), fmt_ids(&truth))
            })?;
            ensure(tt_valid(&current, &IdSet::new(), &sol.kb), || "solution KB is not valid".into())?;
            return Ok(RunReport { queries });
        }
        let entry = s.pending().ok_or("neither done nor pending")?.clone();
        ensure(entry.partition.is_query_partition(), || "pending query has an empty side".into())?;
        let answer = scripted_answer(&truth, &entry.query, &s).map_err(|e| e.to_string())?;
        let rest = current.complement(&truth);
        ensure(answer == tt_entails(&current, &rest, &entry.query), || "oracle disagrees with truth tables".into())?;
        let before = brute_diagnoses(&current).len();
        s.answer(answer).map_err(|e| e.to_string())?;
        queries += 1;
        let next = s.current_dpi();
        ensure(tt_valid(&next, &IdSet::new(), &[]), || "answer made the DPI non-admissible".into())?;
        let after = brute_diagnoses(&next).len();
        ensure(after < before, || format!("diagnoses did not shrink: {before} -> {after}"))?;
        ensure(queries <= 64, || "session does not terminate".into())?;
    }
}

/// Random fault probabilities in `(0, 0.5)`.
pub fn random_probs(rng: &mut impl Rng, n: usize) -> FormulaProbs {
    FormulaProbs::new((0..n).map(|_| rng.gen_range(0.01..0.49)).collect())
}

/// Random session parameters around the defaults.
pub fn random_params(rng: &mut impl Rng, mode: Mode) -> Params {
    let n_min = rng.gen_range(2..=4);
    Params {
        mode,
        n_min,
        n_max: n_min + rng.gen_range(0..=2),
        pool_size: rng.gen_range(1..=4),
        measure: if rng.gen_bool(0.5) { Measure::Ent } else { Measure::Spl },
        ..Params::default()
    }
}
