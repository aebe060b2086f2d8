//! Outcome assertions: satisfaction, substitution, and implication.

pub mod cells;
pub mod implies;
pub mod oracle;
pub mod satisfy;

pub use implies::{implies, Discharge, Implication, ImplyLimits};
pub use satisfy::{holds_surely, satisfiable, satisfies};
