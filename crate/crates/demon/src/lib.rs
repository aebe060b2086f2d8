//! Exact verification toolkit for imperative programs that mix
//! probabilistic choice with demonic (adversarial) nondeterminism.
//!
//! The semantic value of a program from a given state is a convex set of
//! discrete probability distributions over final states, represented by
//! finitely many generator distributions and computed with exact rational
//! arithmetic throughout. On top of that sit outcome assertions (predicates
//! on distributions), an exact satisfaction and implication engine, and a
//! proof checker for derivations in an outcome logic with almost-sure
//! termination rules.

pub mod convex;
pub mod dist;
pub mod eval;
pub mod lp;
pub mod semantics;
pub mod simulate;
pub mod staticcheck;
pub mod syntax;
pub mod value;

pub mod assertions;
pub mod proof;
