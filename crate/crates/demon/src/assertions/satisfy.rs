//! Exact satisfaction of outcome assertions by distributions.
//!
//! `mu |= phi` is decided by a mass-split feasibility LP. Every node of
//! the assertion receives a nonnegative sub-mass vector over `mu`'s
//! support: the root is pinned to `mu` itself, a probabilistic split
//! divides its mass between the children with the stated totals, an
//! adversarial split divides it freely, a conjunction hands the full mass
//! to both children independently, and `[P]` forces mass to zero off `P`
//! (and on the divergence outcome). The assertion holds iff the system is
//! feasible.
//!
//! `F` anywhere makes an assertion unsatisfiable: every connective
//! existentially demands a witness distribution for each operand, even
//! for an operand whose branch carries zero mass. That reading also fixes
//! the zero-mass convention: a zero-mass branch discharges its operand
//! exactly when the operand is satisfiable, which holds structurally iff
//! it is `F`-free (`[P]` with an unsatisfiable atom is deliberately still
//! treated as satisfiable here).

use num_traits::{One, Zero};

use crate::dist::Dist;
use crate::eval::{eval_bool, EvalError};
use crate::lp;
use crate::syntax::ast::Assertion;
use crate::value::{Outcome, Rat};

/// Structural satisfiability: an assertion has a model iff it is `F`-free.
pub fn satisfiable(phi: &Assertion) -> bool {
    !phi.contains_bot()
}

/// Decide `mu |= phi` exactly. Fails only if an atom evaluation fails
/// (type error or unbound variable).
pub fn satisfies(mu: &Dist, phi: &Assertion) -> Result<bool, EvalError> {
    if phi.contains_bot() {
        return Ok(false);
    }
    let support: Vec<Outcome> = mu.support().map(|(o, _)| o.clone()).collect();
    let mut builder = Builder {
        support: &support,
        num_vars: 0,
        rows: Vec::new(),
    };
    // Root block pinned to mu.
    let root = builder.fresh_block();
    for (j, o) in support.iter().enumerate() {
        builder
            .rows
            .push((vec![(root + j, Rat::one())], mu.weight(o)));
    }
    builder.constrain(phi, root)?;
    Ok(lp::feasible(builder.num_vars, &builder.rows).is_some())
}

struct Builder<'a> {
    support: &'a [Outcome],
    num_vars: usize,
    rows: Vec<lp::Row>,
}

impl Builder<'_> {
    fn fresh_block(&mut self) -> usize {
        let start = self.num_vars;
        self.num_vars += self.support.len();
        start
    }

    fn constrain(&mut self, phi: &Assertion, block: usize) -> Result<(), EvalError> {
        let n = self.support.len();
        match phi {
            Assertion::Top => {}
            Assertion::Bot => unreachable!("checked by contains_bot"),
            Assertion::And(a, b) => {
                // Independent witnesses over the same incoming mass.
                self.constrain(a, block)?;
                self.constrain(b, block)?;
            }
            Assertion::Almost(p) => {
                for j in 0..n {
                    let keep = match &self.support[j] {
                        Outcome::Bottom => false,
                        Outcome::Proper(s) => eval_bool(p, s)?,
                    };
                    if !keep {
                        self.rows.push((vec![(block + j, Rat::one())], Rat::zero()));
                    }
                }
            }
            Assertion::OPlus(p, a, b) => {
                let (left, right) = self.split(block);
                // Left total = p * parent total, pointwise split as usual.
                let mut terms: Vec<(usize, Rat)> = Vec::with_capacity(2 * n);
                for j in 0..n {
                    terms.push((left + j, Rat::one()));
                    terms.push((block + j, -p.clone()));
                }
                self.rows.push((terms, Rat::zero()));
                self.constrain(a, left)?;
                self.constrain(b, right)?;
            }
            Assertion::Amp(a, b) => {
                let (left, right) = self.split(block);
                self.constrain(a, left)?;
                self.constrain(b, right)?;
            }
        }
        Ok(())
    }

    /// Two fresh child blocks summing pointwise to the parent block.
    fn split(&mut self, block: usize) -> (usize, usize) {
        let n = self.support.len();
        let left = self.fresh_block();
        let right = self.fresh_block();
        for j in 0..n {
            self.rows.push((
                vec![
                    (left + j, Rat::one()),
                    (right + j, Rat::one()),
                    (block + j, -Rat::one()),
                ],
                Rat::zero(),
            ));
        }
        (left, right)
    }
}

/// Structural check that an assertion forces almost-sure termination,
/// i.e. that it implies `[true]`: every leaf reachable through the
/// connectives is an `[P]` atom. `T` does not qualify (it admits
/// divergence mass); `F` does, vacuously.
pub fn holds_surely(phi: &Assertion) -> bool {
    match phi {
        Assertion::Almost(_) => true,
        Assertion::Top => false,
        Assertion::Bot => true,
        Assertion::And(a, b) | Assertion::OPlus(_, a, b) | Assertion::Amp(a, b) => {
            holds_surely(a) && holds_surely(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse_assertion;
    use crate::value::{rat, rat_int, State, Value, VarTable};
    use std::sync::Arc;

    fn xstate(n: i64) -> State {
        thread_local! {
            static TABLE: Arc<VarTable> = VarTable::new(vec!["x".into()], vec![None]);
        }
        TABLE.with(|t| State::new(Arc::clone(t), vec![Value::Num(rat_int(n))]))
    }

    fn dist(pairs: &[(i64, (i64, i64))]) -> Dist {
        Dist::from_pairs(
            pairs
                .iter()
                .map(|&(x, (n, d))| (Outcome::Proper(xstate(x)), rat(n, d))),
        )
        .unwrap()
    }

    fn sat(d: &Dist, src: &str) -> bool {
        satisfies(d, &parse_assertion(src).unwrap()).unwrap()
    }

    #[test]
    fn oplus_split_with_exact_weights() {
        let d = dist(&[(1, (1, 3)), (2, (2, 3))]);
        assert!(sat(&d, "[x=1] (+ 1/3) [x=2]"));
        assert!(!sat(&d, "[x=1] (+ 1/2) [x=2]"));
        assert!(sat(&d, "[x=2] (+ 2/3) [x=1]"));
    }

    #[test]
    fn amp_split_with_free_weight() {
        let d = dist(&[(1, (1, 2)), (2, (1, 2))]);
        assert!(sat(&d, "[x=1] & [x=2]"));
        assert!(!sat(&d, "[x=1]"));
        assert!(sat(&d, "[x=1] & [x=2] & [x=7]"));
    }

    #[test]
    fn almost_rejects_divergence_mass() {
        let d = Dist::from_pairs(vec![
            (Outcome::Proper(xstate(1)), rat(1, 2)),
            (Outcome::Bottom, rat(1, 2)),
        ])
        .unwrap();
        assert!(!sat(&d, "[true]"));
        assert!(sat(&d, "T"));
        assert!(sat(&d, "[x=1] (+ 1/2) T"));
        assert!(!sat(&d, "[x=1] (+ 3/4) T"));
        // Part of the proper mass may also be pushed into the T branch.
        assert!(sat(&d, "[x=1] (+ 1/3) T"));
    }

    #[test]
    fn bot_is_never_satisfied() {
        let d = dist(&[(1, (1, 1))]);
        assert!(!sat(&d, "F"));
        assert!(!sat(&d, "[x=1] (+ 1) F"));
        assert!(!sat(&d, "T /\\ F"));
        assert!(sat(&d, "[x=1] (+ 1) T"));
        assert!(!satisfiable(&parse_assertion("[x=1] & F").unwrap()));
        assert!(satisfiable(&parse_assertion("[x=1] & T").unwrap()));
    }

    #[test]
    fn and_demands_independent_witnesses() {
        let d = dist(&[(1, (1, 2)), (2, (1, 2))]);
        assert!(sat(&d, "([x=1] & [x=2]) /\\ ([x=1] (+ 1/2) [x=2])"));
        assert!(!sat(&d, "[x=1] /\\ ([x=1] (+ 1/2) [x=2])"));
    }

    #[test]
    fn holds_surely_shapes() {
        let yes = ["[x=0]", "[x=0] (+ 1/2) ([x=1] & [x=2])"];
        for src in yes {
            assert!(holds_surely(&parse_assertion(src).unwrap()), "{src}");
        }
        let no = ["T", "[x=0] (+ 1/2) T"];
        for src in no {
            assert!(!holds_surely(&parse_assertion(src).unwrap()), "{src}");
        }
    }
}
