//! Interactive debugging sessions.
//!
//! A [`Session`] alternates between computing leading diagnoses (with a
//! static or a dynamic hitting-set tree), ranking them by posterior
//! probability and asking a query that splits them. Answers become new
//! test cases. The session stops once the most probable leading diagnosis
//! reaches `1 - sigma` and then holds the repaired KB.

mod dynamic_hs;
mod static_hs;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dynamic_hs::{
    add_set_del_supsets, dynamic_hs, prune_list, prune_qdup, prune_queue, update_tree, DynNode, DynTree,
};
pub use static_hs::{static_hs, StaticTree};

use crate::dpi::{fmt_ids, Dpi, IdSet, Mode, TestCase};
use crate::hstree::Limits;
use crate::logic::Formula;
use crate::probability::{posterior_diag_probs, DiagnosisProbDist, FormulaProbs, QueryAnswer};
use crate::query::{generate_query_pool, order_leading, rank_pool, Measure, PoolEntry, QueryError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InteractiveError {
    #[error("the DPI is not admissible: background knowledge and positive test cases already violate a requirement or negative test case")]
    NotAdmissible,
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("{got} formula probabilities given for a KB of {expected} formulas")]
    ProbLength { expected: usize, got: usize },
    #[error("no query is pending")]
    NoPendingQuery,
    #[error("the answered query is not the pending one")]
    NotPending,
    #[error("no diagnosis is consistent with the answers given")]
    NoDiagnosis,
    #[error("every query has been skipped and no further query exists")]
    PoolExhausted,
    #[error("the designated true diagnosis {0} is no diagnosis of the current DPI")]
    TrueDiagnosisInvalidated(String),
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// Session parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub mode: Mode,
    /// Stop once the best leading diagnosis has probability `>= 1 - sigma`.
    pub sigma: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub timeout: Duration,
    /// Number of queries generated per pool.
    pub pool_size: usize,
    pub measure: Measure,
}

impl Default for Params {
    fn default() -> Params {
        Params {
            mode: Mode::Dynamic,
            sigma: 0.0,
            n_min: 2,
            n_max: 2,
            timeout: Duration::from_millis(1000),
            pool_size: 1,
            measure: Measure::Ent,
        }
    }
}

impl Params {
    pub fn check(&self) -> Result<(), InteractiveError> {
        if self.n_min < 2 {
            return Err(InteractiveError::BadParams(format!("n_min must be at least 2, got {}", self.n_min)));
        }
        if self.n_max < self.n_min {
            return Err(InteractiveError::BadParams(format!(
                "n_max ({}) must not be below n_min ({})",
                self.n_max, self.n_min
            )));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(InteractiveError::BadParams(format!("sigma must lie in [0, 1], got {}", self.sigma)));
        }
        if self.pool_size == 0 {
            return Err(InteractiveError::BadParams("pool size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn limits(&self) -> Limits {
        Limits::new(self.n_min, self.n_max, self.timeout)
    }
}

/// What the tree searches need besides their own state.
pub struct Context<'a> {
    /// The DPI the session started from.
    pub input: &'a Dpi,
    /// The input extended by all answered queries.
    pub current: &'a Dpi,
    pub probs: &'a FormulaProbs,
    pub limits: Limits,
}

/// Persisted hitting-set tree of either kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Tree {
    Static(StaticTree),
    Dynamic(DynTree),
}

/// The query awaiting an answer together with the ranked pool it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pending {
    pub entry: PoolEntry,
    pool: Vec<PoolEntry>,
    ranking: Vec<usize>,
    cursor: usize,
    pool_size: usize,
    offered: Vec<Vec<Formula>>,
}

/// Final outcome of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub diagnosis: IdSet,
    pub probability: f64,
    /// The repaired KB: `O \ diagnosis` plus the positive test cases that
    /// belong to the solution in the session's mode.
    pub kb: Vec<Formula>,
}

/// Reply of a user to a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reply {
    True,
    False,
    Skip,
}

/// Source of answers for [`Session::run`].
pub trait Oracle {
    fn reply(&mut self, session: &Session, query: &[Formula]) -> Result<Reply, InteractiveError>;
}

impl<F> Oracle for F
where
    F: FnMut(&Session, &[Formula]) -> Reply,
{
    fn reply(&mut self, session: &Session, query: &[Formula]) -> Result<Reply, InteractiveError> {
        Ok(self(session, query))
    }
}

/// Simulated user who knows the faulty formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptedOracle {
    pub true_diagnosis: IdSet,
}

impl ScriptedOracle {
    pub fn new(true_diagnosis: IdSet) -> ScriptedOracle {
        ScriptedOracle { true_diagnosis }
    }
}

impl Oracle for ScriptedOracle {
    fn reply(&mut self, session: &Session, query: &[Formula]) -> Result<Reply, InteractiveError> {
        Ok(if scripted_answer(&self.true_diagnosis, query, session)? { Reply::True } else { Reply::False })
    }
}

/// True iff `(O \ d_t) ∪ B ∪ U_{P ∪ P'}` entails the query.
pub fn scripted_answer(true_diagnosis: &IdSet, query: &[Formula], session: &Session) -> Result<bool, InteractiveError> {
    let current = session.current_dpi();
    let rest = current.complement(true_diagnosis);
    if !current.is_kb_valid(&rest) {
        return Err(InteractiveError::TrueDiagnosisInvalidated(fmt_ids(true_diagnosis)));
    }
    Ok(current.entails(&rest, query))
}

/// State of one interactive debugging session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    dpi: Dpi,
    probs: FormulaProbs,
    params: Params,
    new_positive: Vec<TestCase>,
    new_negative: Vec<TestCase>,
    tree: Tree,
    conflicts: Vec<IdSet>,
    qa: Vec<QueryAnswer>,
    dist: DiagnosisProbDist,
    pending: Option<Pending>,
    solution: Option<Solution>,
}

impl Session {
    /// Validates the inputs; nothing is computed until [`Session::advance`].
    pub fn new(dpi: Dpi, probs: FormulaProbs, params: Params) -> Result<Session, InteractiveError> {
        params.check()?;
        if probs.len() != dpi.len() {
            return Err(InteractiveError::ProbLength { expected: dpi.len(), got: probs.len() });
        }
        if !dpi.is_admissible() {
            return Err(InteractiveError::NotAdmissible);
        }
        let root_p = probs.p_nodes(&IdSet::new());
        let tree = match params.mode {
            Mode::Static => Tree::Static(StaticTree::new(root_p)),
            Mode::Dynamic => Tree::Dynamic(DynTree::new(root_p)),
        };
        Ok(Session {
            dpi,
            probs,
            params,
            new_positive: Vec::new(),
            new_negative: Vec::new(),
            tree,
            conflicts: Vec::new(),
            qa: Vec::new(),
            dist: DiagnosisProbDist::default(),
            pending: None,
            solution: None,
        })
    }

    /// [`Session::new`] followed by the first [`Session::advance`].
    pub fn start(dpi: Dpi, probs: FormulaProbs, params: Params) -> Result<Session, InteractiveError> {
        let mut s = Session::new(dpi, probs, params)?;
        s.advance()?;
        Ok(s)
    }

    pub fn dpi(&self) -> &Dpi {
        &self.dpi
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn probs(&self) -> &FormulaProbs {
        &self.probs
    }

    /// The input DPI extended by all answered queries.
    pub fn current_dpi(&self) -> Dpi {
        self.dpi.extended(&self.new_positive, &self.new_negative)
    }

    pub fn new_positive(&self) -> &[TestCase] {
        &self.new_positive
    }

    pub fn new_negative(&self) -> &[TestCase] {
        &self.new_negative
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    /// Conflicts computed so far, `C_calc`.
    pub fn conflicts(&self) -> &[IdSet] {
        &self.conflicts
    }

    /// Leading diagnoses, `D✓`.
    pub fn leading(&self) -> Vec<IdSet> {
        match &self.tree {
            Tree::Static(t) => t.leading.clone(),
            Tree::Dynamic(t) => t.leading.iter().map(DynNode::set).collect(),
        }
    }

    /// Diagnoses invalidated and not yet reprocessed, `D×`.
    pub fn invalid(&self) -> Vec<IdSet> {
        match &self.tree {
            Tree::Static(t) => t.invalid.clone(),
            Tree::Dynamic(t) => t.invalid.iter().map(DynNode::set).collect(),
        }
    }

    /// Posterior over the leading diagnoses.
    pub fn distribution(&self) -> &DiagnosisProbDist {
        &self.dist
    }

    /// Answered queries in order.
    pub fn history(&self) -> &[QueryAnswer] {
        &self.qa
    }

    pub fn pending(&self) -> Option<&PoolEntry> {
        self.pending.as_ref().map(|p| &p.entry)
    }

    pub fn solution(&self) -> Option<&Solution> {
        self.solution.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.solution.is_some()
    }

    /// Computes leading diagnoses and either stops or prepares a query.
    /// Does nothing while a query is pending or after the session ended.
    pub fn advance(&mut self) -> Result<(), InteractiveError> {
        if self.pending.is_some() || self.solution.is_some() {
            return Ok(());
        }
        let current = self.current_dpi();
        let cx = Context { input: &self.dpi, current: &current, probs: &self.probs, limits: self.params.limits() };
        match &mut self.tree {
            Tree::Static(t) => static_hs(t, &mut self.conflicts, &cx),
            Tree::Dynamic(t) => dynamic_hs(t, &mut self.conflicts, &cx),
        }
        let leading = self.leading();
        self.dist = posterior_diag_probs(&leading, &self.probs, &self.dpi, &self.qa);
        let Some((best, p)) = self.dist.mode().map(|(d, p)| (d.clone(), p)) else {
            return Err(InteractiveError::NoDiagnosis);
        };
        if p >= 1.0 - self.params.sigma || leading.len() < 2 {
            let kb =
                self.dpi.solution_kb(&best, &self.new_positive, self.params.mode).expect("diagnosis ids are in range");
            self.solution = Some(Solution { diagnosis: best, probability: p, kb });
            return Ok(());
        }
        let ordered = order_leading(&leading, &self.dist);
        let size = self.params.pool_size;
        let pool = generate_query_pool(&current, &ordered, size)?;
        let ranking = rank_pool(&pool, self.params.measure, &self.dist);
        let first = *ranking.first().ok_or(QueryError::EmptyPool)?;
        let entry = pool[first].clone();
        self.pending =
            Some(Pending { offered: vec![entry.query.clone()], entry, pool, ranking, cursor: 0, pool_size: size });
        Ok(())
    }

    /// Books an answer to the pending query: the diagnoses it rules out
    /// leave the leading set and the query becomes a test case.
    pub fn record_answer(&mut self, query: &[Formula], answer: bool) -> Result<(), InteractiveError> {
        let pending = self.pending.as_ref().ok_or(InteractiveError::NoPendingQuery)?;
        if pending.entry.query != query {
            return Err(InteractiveError::NotPending);
        }
        let pt = &pending.entry.partition;
        let out: Vec<IdSet> = if answer { pt.dnx.clone() } else { pt.dx.clone() };
        match &mut self.tree {
            Tree::Static(t) => {
                t.leading.retain(|d| !out.contains(d));
                t.invalid.extend(out);
            }
            Tree::Dynamic(t) => {
                let (gone, keep) = std::mem::take(&mut t.leading).into_iter().partition(|n| out.contains(&n.set()));
                t.leading = keep;
                t.invalid.extend::<Vec<DynNode>>(gone);
            }
        }
        let tc = TestCase::new(query.to_vec()).expect("pooled queries are non-empty");
        if answer {
            self.new_positive.push(tc);
        } else {
            self.new_negative.push(tc);
        }
        self.qa.push(QueryAnswer { query: query.to_vec(), answer });
        self.pending = None;
        Ok(())
    }

    /// Answers the pending query and moves on to the next one.
    pub fn answer(&mut self, answer: bool) -> Result<(), InteractiveError> {
        let query = self.pending.as_ref().ok_or(InteractiveError::NoPendingQuery)?.entry.query.clone();
        self.record_answer(&query, answer)?;
        self.advance()
    }

    /// Replaces the pending query by the next-best one; once the pool is
    /// used up it is regenerated with twice the size.
    pub fn skip(&mut self) -> Result<(), InteractiveError> {
        let current = self.current_dpi();
        let ordered = order_leading(&self.leading(), &self.dist);
        let measure = self.params.measure;
        let dist = &self.dist;
        let pending = self.pending.as_mut().ok_or(InteractiveError::NoPendingQuery)?;
        loop {
            let next = (pending.cursor + 1..pending.ranking.len())
                .find(|&i| !pending.offered.contains(&pending.pool[pending.ranking[i]].query));
            if let Some(i) = next {
                pending.cursor = i;
                pending.entry = pending.pool[pending.ranking[i]].clone();
                pending.offered.push(pending.entry.query.clone());
                return Ok(());
            }
            if pending.pool.len() < pending.pool_size {
                return Err(InteractiveError::PoolExhausted);
            }
            pending.pool_size = pending.pool_size.saturating_mul(2);
            pending.pool = generate_query_pool(&current, &ordered, pending.pool_size)?;
            pending.ranking = rank_pool(&pending.pool, measure, dist);
            pending.cursor = 0;
            let first = pending.ranking.first().copied();
            if let Some(i) = first.filter(|&i| !pending.offered.contains(&pending.pool[i].query)) {
                pending.entry = pending.pool[i].clone();
                pending.offered.push(pending.entry.query.clone());
                return Ok(());
            }
        }
    }

    /// Drives the session to its end with answers from `oracle`.
    pub fn run(&mut self, oracle: &mut dyn Oracle) -> Result<&Solution, InteractiveError> {
        self.advance()?;
        while self.solution.is_none() {
            let query = self.pending.as_ref().ok_or(InteractiveError::NoPendingQuery)?.entry.query.clone();
            match oracle.reply(self, &query)? {
                Reply::True => self.answer(true)?,
                Reply::False => self.answer(false)?,
                Reply::Skip => self.skip()?,
            }
        }
        Ok(self.solution.as_ref().expect("loop ends with a solution"))
    }
}

/// Runs a whole session against `oracle` and returns it finished.
pub fn run_session(
    dpi: Dpi,
    probs: FormulaProbs,
    params: Params,
    oracle: &mut dyn Oracle,
) -> Result<Session, InteractiveError> {
    let mut s = Session::new(dpi, probs, params)?;
    s.run(oracle)?;
    Ok(s)
}
