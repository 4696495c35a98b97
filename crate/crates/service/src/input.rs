//! Loading DPIs, fault probabilities and session parameters from text.

use std::time::Duration;

use kbdebug::dpi::{Dpi, DpiError, Mode};
use kbdebug::interactive::{InteractiveError, Params};
use kbdebug::probability::{ElementProbs, FormulaProbs, ProbError};
use kbdebug::query::Measure;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("DPI: {0}")]
    Dpi(#[from] DpiError),
    #[error("probabilities: {0}")]
    Probs(#[from] ProbError),
    #[error("the DPI is not admissible: B and P already violate a requirement or a negative test case")]
    NotAdmissible,
    #[error("invalid parameters: {0}")]
    Params(String),
}

impl InputError {
    /// Line and column of a syntax error, when known.
    pub fn position(&self) -> Option<(usize, Option<usize>)> {
        match self {
            InputError::Dpi(DpiError::Syntax { line, column, .. }) => Some((*line, Some(*column))),
            InputError::Dpi(DpiError::Format { line, .. }) | InputError::Probs(ProbError::Parse { line, .. }) => {
                Some((*line, None))
            }
            _ => None,
        }
    }
}

/// Where formula fault probabilities come from.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbSource {
    Uniform,
    /// Element probability file contents and an optional adaptation factor.
    Elements {
        text: String,
        c: Option<f64>,
    },
}

/// Parses the DPI, checks admissibility and derives formula probabilities.
pub fn load(dpi_text: &str, probs: &ProbSource) -> Result<(Dpi, FormulaProbs), InputError> {
    let dpi = Dpi::parse(dpi_text)?;
    if !dpi.is_admissible() {
        return Err(InputError::NotAdmissible);
    }
    let p = match probs {
        ProbSource::Uniform => FormulaProbs::uniform(dpi.len()),
        ProbSource::Elements { text, c } => FormulaProbs::from_elements(dpi.kb(), &ElementProbs::parse(text)?, *c)?,
    };
    Ok((dpi, p))
}

/// Session parameters as they travel over the wire; absent fields take
/// the defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSpec {
    pub mode: Option<Mode>,
    pub sigma: Option<f64>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub timeout_ms: Option<u64>,
    pub pool_size: Option<usize>,
    pub measure: Option<Measure>,
}

impl ParamsSpec {
    /// `n_max` follows `n_min` unless given.
    pub fn resolve(&self) -> Result<Params, InputError> {
        let d = Params::default();
        let n_min = self.n_min.unwrap_or(d.n_min);
        let params = Params {
            mode: self.mode.unwrap_or(d.mode),
            sigma: self.sigma.unwrap_or(d.sigma),
            n_min,
            n_max: self.n_max.unwrap_or(n_min.max(d.n_max)),
            timeout: self.timeout_ms.map(Duration::from_millis).unwrap_or(d.timeout),
            pool_size: self.pool_size.unwrap_or(d.pool_size),
            measure: self.measure.unwrap_or(d.measure),
        };
        params.check().map_err(|e| match e {
            InteractiveError::BadParams(m) => InputError::Params(m),
            other => InputError::Params(other.to_string()),
        })?;
        Ok(params)
    }

    pub fn from_params(p: &Params) -> ParamsSpec {
        ParamsSpec {
            mode: Some(p.mode),
            sigma: Some(p.sigma),
            n_min: Some(p.n_min),
            n_max: Some(p.n_max),
            timeout_ms: Some(p.timeout.as_millis() as u64),
            pool_size: Some(p.pool_size),
            measure: Some(p.measure),
        }
    }
}

/// Parses `5,7` or `5 7` into formula ids.
pub fn parse_ids(s: &str) -> Result<Vec<usize>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| format!("bad formula id `{t}`")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE2: &str = "[O]\nA -> E\nX | E -> F & Y & Z\nF -> B\nB -> X\nY -> ~A\nB -> Z\nZ -> G\n\
                          [B]\nG -> ~A\n[N]\n~A\n[R]\nconsistency\n";

    #[test]
    fn defaults_and_overrides() {
        let p = ParamsSpec::default().resolve().unwrap();
        assert_eq!(p, Params::default());
        let p = ParamsSpec { n_min: Some(5), ..Default::default() }.resolve().unwrap();
        assert_eq!((p.n_min, p.n_max), (5, 5));
        assert!(matches!(ParamsSpec { sigma: Some(1.5), ..Default::default() }.resolve(), Err(InputError::Params(_))));
        assert!(matches!(ParamsSpec { n_min: Some(1), ..Default::default() }.resolve(), Err(InputError::Params(_))));
    }

    #[test]
    fn loading_reports_positions_and_admissibility() {
        assert!(load(TABLE2, &ProbSource::Uniform).is_ok());
        let e = load("[O]\nA -> \n", &ProbSource::Uniform).unwrap_err();
        assert_eq!(e.position().map(|p| p.0), Some(2));
        let e = load("[O]\nB\n[B]\nA\n[N]\nA\n", &ProbSource::Uniform).unwrap_err();
        assert_eq!(e, InputError::NotAdmissible);
    }

    #[test]
    fn ids_accept_commas_and_spaces() {
        assert_eq!(parse_ids("5,7"), Ok(vec![5, 7]));
        assert_eq!(parse_ids(" 1 2,3 "), Ok(vec![1, 2, 3]));
        assert!(parse_ids("1,x").is_err());
    }
}
