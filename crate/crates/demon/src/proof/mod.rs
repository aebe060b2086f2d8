//! Proof scripts and the derivation checker.

pub mod check;
pub mod report;
pub mod script;

pub use check::{
    check_derivation, check_triple_semantic, witness_battery, CheckerConfig, Triple,
    WitnessVerdict,
};
pub use report::{CheckReport, DischargeKind, NodeVerdict, Verdict};
pub use script::{parse_script, Derivation, RuleTag, Script, ScriptError};
