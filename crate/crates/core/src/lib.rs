//! Interactive debugging of propositional knowledge bases.
//!
//! A faulty knowledge base is described by a [`dpi::Dpi`]: the formulas
//! under suspicion, background knowledge that is taken as correct, and
//! positive and negative test cases. The crate computes minimal conflict
//! sets ([`conflict`]), minimal diagnoses via a best-first hitting-set tree
//! ([`hstree`]), fault probabilities ([`probability`]), discriminating
//! queries ([`query`]) and runs the interactive session loop with either a
//! static or a dynamic tree ([`interactive`]).

pub mod conflict;
pub mod dpi;
pub mod hstree;
pub mod interactive;
pub mod logic;
pub mod probability;
pub mod query;
