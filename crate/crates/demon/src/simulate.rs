//! Operational Monte-Carlo execution under an explicit scheduler, as a
//! cross-check of the denotational semantics.
//!
//! Samples run in fixed-size batches with per-batch derived seeds, so the
//! outcome is a pure function of (seed, samples, batch size) regardless
//! of thread scheduling. The generator is pinned to ChaCha12 and echoed
//! in the report.

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::eval::{eval_bool, eval_exp, eval_prob, EvalError};
use crate::syntax::ast::Cmd;
use crate::value::{Rat, State};

pub const RNG_NAME: &str = "ChaCha12";
pub const BATCH_SIZE: u64 = 4096;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("probability expression evaluates to {0}, outside [0,1]")]
    ProbOutOfRange(Rat),
    #[error("probability denominator too large for exact sampling")]
    DenominatorOverflow,
    #[error("assignment to variable `{0}` not in the program's variable set")]
    UnknownVariable(String),
    #[error("scheduler bias {0} outside [0,1]")]
    BadBias(Rat),
}

/// How one nondeterministic choice site is resolved. The scheduler sees
/// the site's stable index, the current state, and a running hash of the
/// choices made so far.
#[derive(Debug, Clone)]
pub enum Choice {
    /// Take the left (true) or right (false) branch outright.
    Take(bool),
    /// Flip a coin with this bias for the left branch.
    Bias(Rat),
}

pub trait Scheduler: Sync {
    fn resolve(&self, site: usize, state: &State, history: u64) -> Choice;
    fn name(&self) -> &'static str;
}

/// Always the left branch: the committed deterministic adversary. For
/// set-choice sugar this picks the first listed value, so corpus programs
/// list the adversarially worst option first.
pub struct LeftScheduler;

impl Scheduler for LeftScheduler {
    fn resolve(&self, _: usize, _: &State, _: u64) -> Choice {
        Choice::Take(true)
    }
    fn name(&self) -> &'static str {
        "left"
    }
}

/// Always the right branch.
pub struct RightScheduler;

impl Scheduler for RightScheduler {
    fn resolve(&self, _: usize, _: &State, _: u64) -> Choice {
        Choice::Take(false)
    }
    fn name(&self) -> &'static str {
        "right"
    }
}

/// A fair coin at every choice site.
pub struct UniformScheduler;

impl Scheduler for UniformScheduler {
    fn resolve(&self, _: usize, _: &State, _: u64) -> Choice {
        Choice::Bias(crate::value::rat(1, 2))
    }
    fn name(&self) -> &'static str {
        "uniform"
    }
}

/// Outcome histogram of a simulation run.
#[derive(Debug, Clone)]
pub struct SimReport {
    pub histogram: BTreeMap<State, u64>,
    pub nonterminated: u64,
    pub samples: u64,
    pub seed: u64,
    pub rng: &'static str,
    pub scheduler: &'static str,
    pub batch_size: u64,
}

impl SimReport {
    /// Empirical frequency of states matching a predicate, among all
    /// samples (nonterminated runs count toward the denominator).
    pub fn frequency(&self, mut pred: impl FnMut(&State) -> bool) -> f64 {
        let hits: u64 = self
            .histogram
            .iter()
            .filter(|(s, _)| pred(s))
            .map(|(_, n)| *n)
            .sum();
        hits as f64 / self.samples as f64
    }
}

/// Run `cmd` operationally `samples` times from `state`.
pub fn mc_simulate(
    cmd: &Cmd,
    state: &State,
    sched: &dyn Scheduler,
    samples: u64,
    seed: u64,
    max_steps: u64,
) -> Result<SimReport, SimError> {
    let batches: Vec<(u64, u64)> = {
        let mut v = Vec::new();
        let mut done = 0;
        let mut idx = 0;
        while done < samples {
            let count = (samples - done).min(BATCH_SIZE);
            v.push((idx, count));
            done += count;
            idx += 1;
        }
        v
    };
    let results: Vec<Result<(BTreeMap<State, u64>, u64), SimError>> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = batches
                .iter()
                .map(|&(idx, count)| {
                    scope.spawn(move || run_batch(cmd, state, sched, idx, count, seed, max_steps))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
    let mut histogram: BTreeMap<State, u64> = BTreeMap::new();
    let mut nonterminated = 0;
    for r in results {
        let (h, n) = r?;
        for (s, c) in h {
            *histogram.entry(s).or_insert(0) += c;
        }
        nonterminated += n;
    }
    Ok(SimReport {
        histogram,
        nonterminated,
        samples,
        seed,
        rng: RNG_NAME,
        scheduler: sched.name(),
        batch_size: BATCH_SIZE,
    })
}

fn run_batch(
    cmd: &Cmd,
    state: &State,
    sched: &dyn Scheduler,
    batch_idx: u64,
    count: u64,
    seed: u64,
    max_steps: u64,
) -> Result<(BTreeMap<State, u64>, u64), SimError> {
    let mut rng =
        ChaCha12Rng::seed_from_u64(seed ^ (batch_idx.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    let mut histogram = BTreeMap::new();
    let mut nonterminated = 0;
    for _ in 0..count {
        let mut run = Run {
            rng: &mut rng,
            sched,
            steps: 0,
            max_steps,
            site: 0,
            history: 0xcbf2_9ce4_8422_2325,
        };
        match run.exec(cmd, state.clone())? {
            Some(final_state) => *histogram.entry(final_state).or_insert(0) += 1,
            None => nonterminated += 1,
        }
    }
    Ok((histogram, nonterminated))
}

struct Run<'a> {
    rng: &'a mut ChaCha12Rng,
    sched: &'a dyn Scheduler,
    steps: u64,
    max_steps: u64,
    site: usize,
    history: u64,
}

impl Run<'_> {
    fn note(&mut self, bit: bool) {
        self.history ^= (self.site as u64) << 1 | bit as u64;
        self.history = self.history.wrapping_mul(0x0000_0100_0000_01B3);
    }

    fn bernoulli(&mut self, p: &Rat) -> Result<bool, SimError> {
        if p.is_negative() || p > &crate::value::rat_int(1) {
            return Err(SimError::ProbOutOfRange(p.clone()));
        }
        let num = p.numer().to_u128().ok_or(SimError::DenominatorOverflow)?;
        let den = p.denom().to_u128().ok_or(SimError::DenominatorOverflow)?;
        if den == 1 {
            return Ok(num == 1);
        }
        Ok(self.rng.random_range(0..den) < num)
    }

    /// One sampled execution; `None` when the step budget runs out.
    fn exec(&mut self, cmd: &Cmd, state: State) -> Result<Option<State>, SimError> {
        if self.steps >= self.max_steps {
            return Ok(None);
        }
        self.steps += 1;
        match cmd {
            Cmd::Skip => Ok(Some(state)),
            Cmd::Assign(x, e) => {
                let idx = state
                    .table()
                    .lookup(x)
                    .ok_or_else(|| SimError::UnknownVariable(x.clone()))?;
                let v = eval_exp(e, &state)?;
                Ok(Some(state.update(idx, v)))
            }
            Cmd::Seq(a, b) => match self.exec(a, state)? {
                Some(mid) => self.exec(b, mid),
                None => Ok(None),
            },
            Cmd::NdChoice(a, b) => {
                let site = self.site;
                self.site += 1;
                let take_left = match self.sched.resolve(site, &state, self.history) {
                    Choice::Take(left) => left,
                    Choice::Bias(p) => {
                        if p.is_negative() || p > crate::value::rat_int(1) {
                            return Err(SimError::BadBias(p));
                        }
                        self.bernoulli(&p)?
                    }
                };
                self.note(take_left);
                if take_left {
                    self.exec(a, state)
                } else {
                    self.exec(b, state)
                }
            }
            Cmd::ProbChoice(e, a, b) => {
                let p = eval_prob(e, &state)?.ok_or_else(|| {
                    SimError::ProbOutOfRange(match eval_exp(e, &state) {
                        Ok(crate::value::Value::Num(r)) => r,
                        _ => Rat::zero(),
                    })
                })?;
                if self.bernoulli(&p)? {
                    self.exec(a, state)
                } else {
                    self.exec(b, state)
                }
            }
            Cmd::If(guard, a, b) => {
                if eval_bool(guard, &state)? {
                    self.exec(a, state)
                } else {
                    self.exec(b, state)
                }
            }
            Cmd::While(guard, body) => {
                let mut current = state;
                loop {
                    if self.steps >= self.max_steps {
                        return Ok(None);
                    }
                    self.steps += 1;
                    if !eval_bool(guard, &current)? {
                        return Ok(Some(current));
                    }
                    match self.exec(body, current)? {
                        Some(next) => current = next,
                        None => return Ok(None),
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse_program;
    use crate::value::Value;
    use std::sync::Arc;

    fn start(prog: &crate::syntax::ast::Program) -> State {
        let vals: Vec<Value> = (0..prog.table.len())
            .map(|i| match prog.table.domain(i) {
                Some(dom) => dom[0].clone(),
                None => Value::Num(crate::value::rat_int(0)),
            })
            .collect();
        State::new(Arc::clone(&prog.table), vals)
    }

    #[test]
    fn skip_keeps_the_state() {
        let prog = parse_program("var x in {0..1}; skip").unwrap();
        let sigma = start(&prog);
        let r = mc_simulate(&prog.cmd, &sigma, &UniformScheduler, 100, 7, 1000).unwrap();
        assert_eq!(r.histogram.get(&sigma), Some(&100));
        assert_eq!(r.nonterminated, 0);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let prog = parse_program(
            "var x in {true,false}; var y in {true,false}; x := flip(1/2); y <- {true,false}",
        )
        .unwrap();
        let sigma = start(&prog);
        let a = mc_simulate(&prog.cmd, &sigma, &UniformScheduler, 10_000, 42, 1000).unwrap();
        let b = mc_simulate(&prog.cmd, &sigma, &UniformScheduler, 10_000, 42, 1000).unwrap();
        assert_eq!(a.histogram, b.histogram);
        let c = mc_simulate(&prog.cmd, &sigma, &UniformScheduler, 10_000, 43, 1000).unwrap();
        assert_ne!(a.histogram, c.histogram);
    }

    #[test]
    fn flip_frequency_near_half() {
        let prog = parse_program("var x in {true,false}; x := flip(1/2)").unwrap();
        let sigma = start(&prog);
        let r = mc_simulate(&prog.cmd, &sigma, &LeftScheduler, 20_000, 11, 100).unwrap();
        let freq = r.frequency(|s| s.get_named("x") == Some(&Value::Bool(true)));
        // 4 sigma around 1/2 at n = 20000.
        assert!((freq - 0.5).abs() < 4.0 * 0.5 / (20_000f64).sqrt(), "{freq}");
    }

    #[test]
    fn nontermination_is_counted() {
        let prog = parse_program("while true do skip").unwrap();
        let sigma = start(&prog);
        let r = mc_simulate(&prog.cmd, &sigma, &LeftScheduler, 50, 3, 200).unwrap();
        assert_eq!(r.nonterminated, 50);
    }

    #[test]
    fn left_scheduler_commits_to_first_option() {
        let prog = parse_program("var x in {1,2,3}; x <- {2, 3}").unwrap();
        let sigma = start(&prog);
        let r = mc_simulate(&prog.cmd, &sigma, &LeftScheduler, 64, 5, 100).unwrap();
        assert_eq!(r.histogram.len(), 1);
        let (only, n) = r.histogram.iter().next().unwrap();
        assert_eq!(*n, 64);
        assert_eq!(only.get_named("x"), Some(&Value::Num(crate::value::rat_int(2))));
    }
}
