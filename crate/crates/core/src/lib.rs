//! Complementarity, coherence and correlation quantifiers for finite-dimensional
//! quantum states, plus the exact and variational relations that tie them together.

pub mod cli;
pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod measures;
pub mod qstate;
pub mod relations;

pub use error::{CcrError, Result};
