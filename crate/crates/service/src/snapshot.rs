//! Read-only JSON view of a session.

use kbdebug::dpi::IdSet;
use kbdebug::interactive::Session;
use kbdebug::logic::Formula;
use serde::{Deserialize, Serialize};

use crate::input::ParamsSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    AwaitingAnswer,
    Computing,
    Done,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryView {
    pub formulas: Vec<String>,
    /// Sizes of the q-partition sides.
    pub dx: usize,
    pub dnx: usize,
    pub dz: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisView {
    pub ids: Vec<usize>,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnswerView {
    pub query: Vec<String>,
    pub answer: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionView {
    pub diagnosis: Vec<usize>,
    pub probability: f64,
    pub kb: Vec<String>,
    /// Test-case formulas in the solution that are not in `O`.
    pub added: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub id: String,
    /// Milliseconds since the Unix epoch.
    pub created_ms: u64,
    pub status: Status,
    pub params: ParamsSpec,
    pub query: Option<QueryView>,
    /// Leading diagnoses, most probable first.
    pub diagnoses: Vec<DiagnosisView>,
    pub history: Vec<AnswerView>,
    pub solution: Option<SolutionView>,
    pub error: Option<String>,
}

fn render(fs: &[Formula]) -> Vec<String> {
    fs.iter().map(ToString::to_string).collect()
}

fn id_vec(s: &IdSet) -> Vec<usize> {
    s.iter().copied().collect()
}

impl SessionSnapshot {
    /// Snapshot of `session`; the status is derived from its state.
    pub fn of(id: &str, created_ms: u64, session: &Session) -> SessionSnapshot {
        let mut diagnoses: Vec<DiagnosisView> = session
            .distribution()
            .entries()
            .iter()
            .map(|(d, p)| DiagnosisView { ids: id_vec(d), probability: *p })
            .collect();
        diagnoses.sort_by(|a, b| b.probability.total_cmp(&a.probability));
        let query = session.pending().map(|e| QueryView {
            formulas: render(&e.query),
            dx: e.partition.dx.len(),
            dnx: e.partition.dnx.len(),
            dz: e.partition.dz.len(),
        });
        let solution = session.solution().map(|s| SolutionView {
            diagnosis: id_vec(&s.diagnosis),
            probability: s.probability,
            kb: render(&s.kb),
            added: render(&s.kb.iter().filter(|f| !session.dpi().kb().contains(f)).cloned().collect::<Vec<_>>()),
        });
        let status = if solution.is_some() {
            Status::Done
        } else if query.is_some() {
            Status::AwaitingAnswer
        } else {
            Status::Computing
        };
        SessionSnapshot {
            id: id.to_string(),
            created_ms,
            status,
            params: ParamsSpec::from_params(session.params()),
            query,
            diagnoses,
            history: session
                .history()
                .iter()
                .map(|qa| AnswerView { query: render(&qa.query), answer: qa.answer })
                .collect(),
            solution,
            error: None,
        }
    }
}
