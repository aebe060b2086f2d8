//! Reference decision procedure for assertion satisfaction, independent of
//! the LP encoding in [`super::satisfy`].
//!
//! Splits are searched exhaustively over a rational grid: at each binary
//! connective, every support point sends a fraction `j/B` of its incoming
//! mass to the left child, for j in 0..=B. A probabilistic connective
//! additionally requires the left totals to hit `p * total` exactly, with
//! partial-sum pruning.
//!
//! Two exact shortcuts keep the search tractable without changing its
//! answer. First, a positive point whose state no leaf of the subtree
//! accepts makes the subtree unsatisfiable for that mass, whatever the
//! split. Second, in a subtree with no probabilistic connective the
//! converse also holds -- free splits can route every point wholly to an
//! accepting side, and conjunction just intersects acceptability -- so
//! such subtrees are decided per point, which is exactly what the grid
//! search concludes through the all-or-nothing assignments.
//!
//! The `F` convention is shared with the LP: an assertion containing `F`
//! holds for no distribution.

use num_traits::Zero;

use crate::dist::Dist;
use crate::eval::{eval_bool, EvalError};
use crate::syntax::ast::Assertion;
use crate::value::{rat_int, Outcome, Rat};

/// Decide `mu |= phi` by grid search with per-point split denominators
/// bounded by `bound`.
pub fn grid_satisfies(mu: &Dist, phi: &Assertion, bound: u32) -> Result<bool, EvalError> {
    if phi.contains_bot() {
        return Ok(false);
    }
    let mass: Vec<(Outcome, Rat)> = mu
        .support()
        .map(|(o, w)| (o.clone(), w.clone()))
        .collect();
    rec(&mass, phi, bound)
}

/// Rough node count of the search, used by test batteries to keep their
/// case mix affordable. Mirrors the shortcut structure above.
pub fn search_cost(phi: &Assertion, support: usize) -> u64 {
    match phi {
        Assertion::Top | Assertion::Bot | Assertion::Almost(_) => 1,
        Assertion::And(a, b) => search_cost(a, support).saturating_add(search_cost(b, support)),
        Assertion::OPlus(_, a, b) | Assertion::Amp(a, b) => {
            if mixing_free(phi) {
                support as u64
            } else {
                let grid = 33u64.saturating_pow(support.min(5) as u32);
                grid.saturating_mul(
                    search_cost(a, support).saturating_add(search_cost(b, support)),
                )
            }
        }
    }
}

/// Whether a (F-free) subtree accepts mass on this outcome at all.
fn acceptable(phi: &Assertion, o: &Outcome) -> Result<bool, EvalError> {
    Ok(match phi {
        Assertion::Top => true,
        Assertion::Bot => false,
        Assertion::Almost(p) => match o {
            Outcome::Bottom => false,
            Outcome::Proper(s) => eval_bool(p, s)?,
        },
        Assertion::And(a, b) => acceptable(a, o)? && acceptable(b, o)?,
        Assertion::OPlus(p, a, b) => {
            if p.is_zero() {
                acceptable(b, o)?
            } else if p == &rat_int(1) {
                acceptable(a, o)?
            } else {
                acceptable(a, o)? || acceptable(b, o)?
            }
        }
        Assertion::Amp(a, b) => acceptable(a, o)? || acceptable(b, o)?,
    })
}

fn mixing_free(phi: &Assertion) -> bool {
    match phi {
        Assertion::Top | Assertion::Bot | Assertion::Almost(_) => true,
        Assertion::And(a, b) | Assertion::Amp(a, b) => mixing_free(a) && mixing_free(b),
        Assertion::OPlus(..) => false,
    }
}

fn total(mass: &[(Outcome, Rat)]) -> Rat {
    mass.iter().fold(Rat::zero(), |acc, (_, w)| acc + w)
}

fn rec(mass: &[(Outcome, Rat)], phi: &Assertion, bound: u32) -> Result<bool, EvalError> {
    // Zero incoming mass discharges any (F-free) subtree.
    if mass.iter().all(|(_, w)| w.is_zero()) {
        return Ok(true);
    }
    // Necessary per-point condition.
    for (o, w) in mass {
        if !w.is_zero() && !acceptable(phi, o)? {
            return Ok(false);
        }
    }
    // Sufficient as well when no probabilistic split constrains totals.
    if mixing_free(phi) {
        return Ok(true);
    }
    match phi {
        Assertion::Top | Assertion::Bot | Assertion::Almost(_) => unreachable!("mixing-free"),
        Assertion::And(a, b) => Ok(rec(mass, a, bound)? && rec(mass, b, bound)?),
        Assertion::OPlus(p, a, b) => {
            let target = p * total(mass);
            search(
                mass,
                0,
                &Rat::zero(),
                Some(&target),
                a,
                b,
                bound,
                &mut Vec::new(),
            )
        }
        Assertion::Amp(a, b) => search(
            mass,
            0,
            &Rat::zero(),
            None,
            a,
            b,
            bound,
            &mut Vec::new(),
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    mass: &[(Outcome, Rat)],
    idx: usize,
    left_sum: &Rat,
    target: Option<&Rat>,
    a: &Assertion,
    b: &Assertion,
    bound: u32,
    left_parts: &mut Vec<Rat>,
) -> Result<bool, EvalError> {
    if idx == mass.len() {
        if let Some(t) = target {
            if left_sum != t {
                return Ok(false);
            }
        }
        let left: Vec<(Outcome, Rat)> = mass
            .iter()
            .zip(left_parts.iter())
            .map(|((o, _), l)| (o.clone(), l.clone()))
            .collect();
        let right: Vec<(Outcome, Rat)> = mass
            .iter()
            .zip(left_parts.iter())
            .map(|((o, w), l)| (o.clone(), w - l))
            .collect();
        return Ok(rec(&left, a, bound)? && rec(&right, b, bound)?);
    }
    let w = &mass[idx].1;
    if w.is_zero() {
        left_parts.push(Rat::zero());
        let r = search(mass, idx + 1, left_sum, target, a, b, bound, left_parts)?;
        left_parts.pop();
        return Ok(r);
    }
    // Prune on the remaining capacity when a target total must be hit.
    if let Some(t) = target {
        let remaining = total(&mass[idx..]);
        if left_sum > t || &(left_sum + &remaining) < t {
            return Ok(false);
        }
    }
    let denom = rat_int(i64::from(bound));
    // All-or-nothing assignments first; witnesses are usually extreme.
    let order = [0, bound].into_iter().chain(1..bound);
    for j in order {
        let frac = rat_int(i64::from(j)) / &denom;
        let part = &frac * w;
        let next_sum = left_sum + &part;
        if let Some(t) = target {
            if &next_sum > t {
                continue;
            }
        }
        left_parts.push(part);
        let r = search(mass, idx + 1, &next_sum, target, a, b, bound, left_parts)?;
        left_parts.pop();
        if r {
            return Ok(true);
        }
    }
    Ok(false)
}
