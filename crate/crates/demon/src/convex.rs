//! Finitely generated convex sets of distributions: the semantic domain.
//!
//! A [`ConvexSet`] stores generator distributions and denotes the
//! up-closure of their convex hull. The up-closure itself is never
//! materialized; it lives in the `<=` inequalities of [`ConvexSet::member`],
//! which decides hull membership by exact LP feasibility. All operations
//! prune redundant generators, so equality of denotations is decided by
//! mutual generator membership ([`ConvexSet::hull_eq`]).

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::dist::Dist;
use crate::lp;
use crate::value::{Outcome, Rat, State};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConvexError {
    #[error("probability {0} outside [0,1]")]
    ProbOutOfRange(Rat),
    #[error("generator count {have} exceeds the cap of {cap}")]
    GeneratorCap { have: usize, cap: usize },
}

/// Resource limits for generator-producing operations.
#[derive(Debug, Clone)]
pub struct Caps {
    pub max_generators: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_generators: 10_000,
        }
    }
}

/// Nonempty list of generator distributions, kept sorted and deduplicated.
#[derive(Clone, PartialEq, Eq)]
pub struct ConvexSet {
    gens: Vec<Dist>,
}

impl ConvexSet {
    /// `unit(x)`: the up-closed hull of a single point mass.
    pub fn unit(at: impl Into<Outcome>) -> ConvexSet {
        ConvexSet {
            gens: vec![Dist::dirac(at)],
        }
    }

    /// Build from generators; they are sorted, deduplicated, and pruned.
    pub fn from_generators(gens: Vec<Dist>) -> ConvexSet {
        assert!(!gens.is_empty(), "a convex set needs at least one generator");
        let mut set = ConvexSet { gens };
        set.canonicalize();
        set.prune();
        set
    }

    fn canonicalize(&mut self) {
        self.gens.sort();
        self.gens.dedup();
    }

    pub fn generators(&self) -> &[Dist] {
        &self.gens
    }

    pub fn generator_count(&self) -> usize {
        self.gens.len()
    }

    /// Largest divergence mass over the generators; by convexity this
    /// bounds the divergence mass of every member of the set.
    pub fn residual_bound(&self) -> Rat {
        self.gens
            .iter()
            .map(Dist::bottom_mass)
            .max()
            .expect("nonempty")
    }

    /// Decide `nu \in upclosure(conv(generators))`.
    ///
    /// Feasibility of: lambda >= 0, sum lambda = 1, and for every proper
    /// state sigma in any generator's support,
    /// `sum_i lambda_i g_i(sigma) <= nu(sigma)`. Mass on states outside
    /// all generator supports (and divergence mass) is covered by the
    /// up-closure order, which only lets mass move from divergence up to
    /// proper states.
    pub fn member(&self, nu: &Dist) -> bool {
        let k = self.gens.len();
        // Union of proper supports.
        let mut states: Vec<&State> = Vec::new();
        for g in &self.gens {
            for (s, _) in g.proper_support() {
                if !states.contains(&s) {
                    states.push(s);
                }
            }
        }
        // Variables: lambda_0..lambda_{k-1}, then one slack per state.
        let mut rows: Vec<lp::Row> = Vec::new();
        rows.push((
            (0..k).map(|i| (i, Rat::one())).collect(),
            Rat::one(),
        ));
        for (j, s) in states.iter().enumerate() {
            let mut terms: Vec<(usize, Rat)> = Vec::new();
            for (i, g) in self.gens.iter().enumerate() {
                let w = g.weight_of_state(s);
                if !w.is_zero() {
                    terms.push((i, w));
                }
            }
            terms.push((k + j, Rat::one()));
            rows.push((terms, nu.weight_of_state(s)));
        }
        lp::feasible(k + states.len(), &rows).is_some()
    }

    /// Remove every generator contained in the up-closed hull of the rest.
    /// Hull-equal to the input and idempotent.
    ///
    /// Two passes: a forward pass keeps a candidate only if it is outside
    /// the hull of those kept so far (so membership LPs stay small when
    /// the pruned set is much smaller than the input), then a backward
    /// pass re-checks the survivors against each other.
    pub fn prune(&mut self) {
        if self.gens.len() <= 1 {
            return;
        }
        let mut candidates = std::mem::take(&mut self.gens);
        // Cheap prefilter: a generator pointwise above another is in its
        // up-set already, no LP needed.
        let mut i = 0;
        while i < candidates.len() {
            let dominated = candidates
                .iter()
                .enumerate()
                .any(|(j, g)| j != i && g.leq(&candidates[i]) && g != &candidates[i]);
            if dominated {
                candidates.remove(i);
            } else {
                i += 1;
            }
        }
        let mut kept = ConvexSet {
            gens: Vec::with_capacity(16),
        };
        for g in candidates {
            if kept.gens.is_empty() || !kept.member(&g) {
                kept.gens.push(g);
            }
        }
        // Survivors may still cover earlier survivors.
        let mut i = 0;
        while kept.gens.len() > 1 && i < kept.gens.len() {
            let candidate = kept.gens.remove(i);
            if kept.member(&candidate) {
                // Redundant; drop it and stay at the same index.
            } else {
                kept.gens.insert(i, candidate);
                i += 1;
            }
        }
        kept.gens.sort();
        self.gens = kept.gens;
    }

    /// `S (+)_p T`: pairwise convex combinations of generators.
    pub fn oplus(&self, p: &Rat, other: &ConvexSet, caps: &Caps) -> Result<ConvexSet, ConvexError> {
        if p < &Rat::zero() || p > &Rat::one() {
            return Err(ConvexError::ProbOutOfRange(p.clone()));
        }
        if p.is_one() {
            return Ok(self.clone());
        }
        if p.is_zero() {
            return Ok(other.clone());
        }
        let have = self.gens.len() * other.gens.len();
        if have > caps.max_generators {
            return Err(ConvexError::GeneratorCap {
                have,
                cap: caps.max_generators,
            });
        }
        let q = Rat::one() - p;
        let mut gens = Vec::with_capacity(have);
        for g in &self.gens {
            for h in &other.gens {
                let d = Dist::convex_combine(&[p.clone(), q.clone()], &[g.clone(), h.clone()])
                    .expect("weights sum to one");
                gens.push(d);
            }
        }
        Ok(ConvexSet::from_generators(gens))
    }

    /// `S & T`: all mixtures under every bias, i.e. the hull of the
    /// generator union.
    pub fn amp(&self, other: &ConvexSet, caps: &Caps) -> Result<ConvexSet, ConvexError> {
        let have = self.gens.len() + other.gens.len();
        if have > caps.max_generators {
            return Err(ConvexError::GeneratorCap {
                have,
                cap: caps.max_generators,
            });
        }
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        Ok(ConvexSet::from_generators(gens))
    }

    /// Kleisli extension: apply `f` to every proper state in each
    /// generator's support, choose one generator of the image per state,
    /// and mix by the source weights; divergence mass stays on divergence.
    pub fn kleisli<E: From<ConvexError>>(
        &self,
        caps: &Caps,
        mut f: impl FnMut(&State) -> Result<ConvexSet, E>,
    ) -> Result<ConvexSet, E> {
        let mut out: Vec<Dist> = Vec::new();
        for g in &self.gens {
            let states: Vec<State> = g.proper_support().map(|(s, _)| s.clone()).collect();
            let images: Vec<ConvexSet> = states
                .iter()
                .map(|s| f(s))
                .collect::<Result<Vec<_>, E>>()?;
            let mut weights: Vec<Rat> = states.iter().map(|s| g.weight_of_state(s)).collect();
            let bottom = g.bottom_mass();
            if !bottom.is_zero() {
                weights.push(bottom.clone());
            }
            let combos = images
                .iter()
                .map(|im| im.generator_count())
                .try_fold(1usize, usize::checked_mul)
                .unwrap_or(usize::MAX);
            if out.len().saturating_add(combos) > caps.max_generators {
                return Err(E::from(ConvexError::GeneratorCap {
                    have: out.len().saturating_add(combos),
                    cap: caps.max_generators,
                }));
            }
            let mut choice = vec![0usize; images.len()];
            loop {
                let mut parts: Vec<Dist> = choice
                    .iter()
                    .zip(&images)
                    .map(|(&c, im)| im.generators()[c].clone())
                    .collect();
                if !bottom.is_zero() {
                    parts.push(Dist::dirac(Outcome::Bottom));
                }
                out.push(
                    Dist::convex_combine(&weights, &parts).expect("source weights sum to one"),
                );
                // Advance the mixed-radix choice vector.
                let mut k = 0;
                loop {
                    if k == images.len() {
                        break;
                    }
                    choice[k] += 1;
                    if choice[k] < images[k].generator_count() {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
                if k == images.len() {
                    break;
                }
            }
        }
        Ok(ConvexSet::from_generators(out))
    }

    /// Hull equality: every generator of each side is a member of the other.
    pub fn hull_eq(&self, other: &ConvexSet) -> bool {
        self.gens.iter().all(|g| other.member(g)) && other.gens.iter().all(|g| self.member(g))
    }

    /// The refinement order on semantic sets, equivalent to reverse hull
    /// inclusion: `self <= other` iff `other` is contained in `self`'s hull.
    pub fn smyth_leq(&self, other: &ConvexSet) -> bool {
        other.gens.iter().all(|g| self.member(g))
    }

    /// Canonical text dump (sorted generators), used in golden tests.
    pub fn dump(&self) -> String {
        let mut lines = Vec::with_capacity(self.gens.len());
        for g in &self.gens {
            let parts: Vec<String> = g.support().map(|(o, w)| format!("{o} -> {w}")).collect();
            lines.push(format!("gen: {}", parts.join("; ")));
        }
        lines.join("\n")
    }
}

impl fmt::Debug for ConvexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvexSet[")?;
        for (i, g) in self.gens.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g:?}")?;
        }
        write!(f, "]")
    }
}

/// Check `f†(S (+)_p T) = f†(S) (+)_p f†(T)` up to hull equality.
pub fn oplus_distributes(
    f: &mut dyn FnMut(&State) -> Result<ConvexSet, ConvexError>,
    s: &ConvexSet,
    t: &ConvexSet,
    p: &Rat,
    caps: &Caps,
) -> Result<bool, ConvexError> {
    let lhs = s.oplus(p, t, caps)?.kleisli(caps, &mut *f)?;
    let left = s.kleisli(caps, &mut *f)?;
    let right = t.kleisli(caps, &mut *f)?;
    let rhs = left.oplus(p, &right, caps)?;
    Ok(lhs.hull_eq(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::{rat, rat_int, Value, VarTable};
    use std::sync::Arc;

    fn table() -> Arc<VarTable> {
        thread_local! {
            static TABLE: Arc<VarTable> = VarTable::new(vec!["x".into()], vec![None]);
        }
        TABLE.with(Arc::clone)
    }

    fn st(n: i64) -> State {
        State::new(table(), vec![Value::Num(rat_int(n))])
    }

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn unit_and_membership() {
        let s = ConvexSet::unit(st(1));
        assert!(s.member(&Dist::dirac(st(1))));
        assert!(!s.member(&Dist::dirac(st(2))));
        // unit(bottom) denotes every distribution.
        let all = ConvexSet::unit(Outcome::Bottom);
        assert!(all.member(&Dist::dirac(st(7))));
        let mixed = Dist::from_pairs(vec![
            (Outcome::Proper(st(1)), rat(1, 3)),
            (Outcome::Bottom, rat(2, 3)),
        ])
        .unwrap();
        assert!(all.member(&mixed));
    }

    #[test]
    fn oplus_of_units_is_the_mixture() {
        let s = ConvexSet::unit(st(1));
        let t = ConvexSet::unit(st(2));
        let m = s.oplus(&rat(1, 2), &t, &caps()).unwrap();
        assert_eq!(m.generator_count(), 1);
        let g = &m.generators()[0];
        assert_eq!(g.weight_of_state(&st(1)), rat(1, 2));
        assert_eq!(g.weight_of_state(&st(2)), rat(1, 2));
        // Degenerate weights collapse to one side.
        assert!(s.oplus(&rat_int(1), &t, &caps()).unwrap().hull_eq(&s));
        assert!(s.oplus(&rat_int(0), &t, &caps()).unwrap().hull_eq(&t));
        assert!(s.oplus(&rat(3, 2), &t, &caps()).is_err());
    }

    #[test]
    fn amp_keeps_both_generators() {
        let s = ConvexSet::unit(st(1));
        let t = ConvexSet::unit(st(2));
        let a = s.amp(&t, &caps()).unwrap();
        assert_eq!(a.generator_count(), 2);
        assert!(a.hull_eq(&t.amp(&s, &caps()).unwrap()));
        assert!(s.amp(&s, &caps()).unwrap().hull_eq(&s));
        // The mixture at any bias is inside the hull.
        let mid = Dist::convex_combine(
            &[rat(1, 3), rat(2, 3)],
            &[Dist::dirac(st(1)), Dist::dirac(st(2))],
        )
        .unwrap();
        assert!(a.member(&mid));
    }

    #[test]
    fn prune_removes_interior_and_dominated() {
        let g1 = Dist::dirac(st(1));
        let g2 = Dist::dirac(st(2));
        let mid = Dist::convex_combine(&[rat(1, 2), rat(1, 2)], &[g1.clone(), g2.clone()]).unwrap();
        let set = ConvexSet::from_generators(vec![g1.clone(), g2.clone(), mid]);
        assert_eq!(set.generator_count(), 2);

        // A dominated distribution (less divergence mass) is redundant.
        let low = Dist::from_pairs(vec![
            (Outcome::Proper(st(1)), rat(1, 2)),
            (Outcome::Bottom, rat(1, 2)),
        ])
        .unwrap();
        let set = ConvexSet::from_generators(vec![low.clone(), g1.clone()]);
        assert_eq!(set.generators(), &[low]);

        let dup = ConvexSet::from_generators(vec![g1.clone(), g1.clone()]);
        assert_eq!(dup.generator_count(), 1);
    }

    #[test]
    fn kleisli_identity_laws() {
        let s = ConvexSet::from_generators(vec![
            Dist::dirac(st(1)),
            Dist::convex_combine(
                &[rat(1, 2), rat(1, 2)],
                &[Dist::dirac(st(2)), Dist::dirac(st(3))],
            )
            .unwrap(),
        ]);
        // eta† = id.
        let back = s
            .kleisli::<ConvexError>(&caps(), |sigma| Ok(ConvexSet::unit(sigma.clone())))
            .unwrap();
        assert!(back.hull_eq(&s));
        // f† . eta = f.
        let f = |sigma: &State| -> Result<ConvexSet, ConvexError> {
            Ok(ConvexSet::unit(st(
                sigma.get(0).as_num().unwrap().to_integer().try_into().unwrap_or(0i64),
            ))
            .amp(&ConvexSet::unit(st(9)), &caps())
            .unwrap())
        };
        let via_unit = ConvexSet::unit(st(4)).kleisli(&caps(), f).unwrap();
        assert!(via_unit.hull_eq(&f(&st(4)).unwrap()));
    }

    #[test]
    fn kleisli_respects_cap() {
        let caps = Caps { max_generators: 3 };
        let s = ConvexSet::from_generators(vec![Dist::convex_combine(
            &[rat(1, 2), rat(1, 2)],
            &[Dist::dirac(st(1)), Dist::dirac(st(2))],
        )
        .unwrap()]);
        let fanout = |_: &State| -> Result<ConvexSet, ConvexError> {
            Ok(ConvexSet::from_generators(vec![
                Dist::dirac(st(5)),
                Dist::dirac(st(6)),
            ]))
        };
        let err = s.kleisli(&caps, fanout).unwrap_err();
        assert!(matches!(err, ConvexError::GeneratorCap { .. }));
    }
}
