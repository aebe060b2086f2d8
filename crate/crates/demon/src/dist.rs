//! Finite-support discrete probability distributions over proper states
//! plus a distinguished divergence outcome, with exact rational weights.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::value::{Outcome, Rat, State};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistError {
    #[error("total mass is {0}, expected exactly 1")]
    MassNotOne(Rat),
    #[error("negative weight {0}")]
    NegativeWeight(Rat),
    #[error("weights and distributions differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("combination weights sum to {0}, expected exactly 1")]
    WeightSumNotOne(Rat),
}

/// A proper distribution: positive weights over its support, total mass
/// exactly 1. The map is ordered, so iteration and printing are canonical
/// (divergence first, then states lexicographically by variable values).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dist {
    map: BTreeMap<Outcome, Rat>,
}

impl Dist {
    /// Point mass at a proper state or at the divergence outcome.
    pub fn dirac(at: impl Into<Outcome>) -> Dist {
        let mut map = BTreeMap::new();
        map.insert(at.into(), Rat::one());
        Dist { map }
    }

    /// Build from outcome/weight pairs. Zero weights are dropped; negative
    /// weights and a total other than 1 are rejected.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Outcome, Rat)>) -> Result<Dist, DistError> {
        let mut map: BTreeMap<Outcome, Rat> = BTreeMap::new();
        for (o, w) in pairs {
            if w.is_negative() {
                return Err(DistError::NegativeWeight(w));
            }
            if w.is_zero() {
                continue;
            }
            *map.entry(o).or_insert_with(Rat::zero) += w;
        }
        let mass: Rat = map.values().fold(Rat::zero(), |acc, w| acc + w);
        if !mass.is_one() {
            return Err(DistError::MassNotOne(mass));
        }
        Ok(Dist { map })
    }

    /// Pointwise convex combination `sum_i weights[i] * dists[i]`.
    ///
    /// Weights must be nonnegative and sum to exactly 1; zero-weight
    /// entries contribute nothing.
    pub fn convex_combine(weights: &[Rat], dists: &[Dist]) -> Result<Dist, DistError> {
        if weights.len() != dists.len() {
            return Err(DistError::LengthMismatch(weights.len(), dists.len()));
        }
        let total: Rat = weights.iter().fold(Rat::zero(), |acc, w| acc + w);
        if !total.is_one() {
            return Err(DistError::WeightSumNotOne(total));
        }
        let mut map: BTreeMap<Outcome, Rat> = BTreeMap::new();
        for (w, d) in weights.iter().zip(dists) {
            if w.is_negative() {
                return Err(DistError::NegativeWeight(w.clone()));
            }
            if w.is_zero() {
                continue;
            }
            for (o, p) in &d.map {
                *map.entry(o.clone()).or_insert_with(Rat::zero) += w * p;
            }
        }
        Ok(Dist { map })
    }

    /// Weight of one outcome (zero off the support).
    pub fn weight(&self, o: &Outcome) -> Rat {
        self.map.get(o).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn weight_of_state(&self, s: &State) -> Rat {
        self.weight(&Outcome::Proper(s.clone()))
    }

    /// Mass assigned to divergence.
    pub fn bottom_mass(&self) -> Rat {
        self.weight(&Outcome::Bottom)
    }

    pub fn support(&self) -> impl Iterator<Item = (&Outcome, &Rat)> {
        self.map.iter()
    }

    /// Proper states in the support.
    pub fn proper_support(&self) -> impl Iterator<Item = (&State, &Rat)> {
        self.map.iter().filter_map(|(o, w)| match o {
            Outcome::Bottom => None,
            Outcome::Proper(s) => Some((s, w)),
        })
    }

    pub fn support_size(&self) -> usize {
        self.map.len()
    }

    /// The pointwise order on proper states: `self <= other` iff `other`
    /// dominates `self` on every proper state (equivalently, `other` moves
    /// divergence mass up to proper states).
    pub fn leq(&self, other: &Dist) -> bool {
        // Both have mass 1, so it suffices to check self's proper support.
        self.proper_support()
            .all(|(s, w)| *w <= other.weight_of_state(s))
    }

    /// Strip the divergence outcome: the proper sub-mass map and the
    /// residual divergence mass. Renormalization is the caller's business.
    pub fn terminating_part(&self) -> (BTreeMap<State, Rat>, Rat) {
        let mut out = BTreeMap::new();
        for (s, w) in self.proper_support() {
            out.insert(s.clone(), w.clone());
        }
        (out, self.bottom_mass())
    }

    /// Total mass on proper states satisfying the predicate.
    pub fn mass_where(&self, mut pred: impl FnMut(&State) -> bool) -> Rat {
        let mut acc = Rat::zero();
        for (s, w) in self.proper_support() {
            if pred(s) {
                acc += w;
            }
        }
        acc
    }
}

impl fmt::Display for Dist {
    /// Canonical dump: one `outcome -> weight` line per support point.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (o, w)) in self.map.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{o} -> {w}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .map
            .iter()
            .map(|(o, w)| format!("{o} -> {w}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
