//! The case-study corpus: programs, proof scripts, and expected results,
//! reproduced as executable checks. Exact expectations are compared as
//! rationals; empirical ones carry an explicit sigma bound. Each
//! expectation records where its value comes from in the `source` note.

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::One;

use demon::assertions::satisfies;
use demon::dist::Dist;
use demon::eval::{eval_bool, eval_exp};
use demon::proof::{
    check_derivation, check_triple_semantic, parse_script, CheckerConfig, Triple, Verdict,
    WitnessVerdict,
};
use demon::semantics::{denote, loop_iterate, min_termination_prob};
use demon::syntax::ast::{Cmd, Exp, Program};
use demon::syntax::parse_atom;
use demon::value::{enumerate_states, rat_int, Rat, State, Value};

use crate::{start_state, GlobalFlags};

#[derive(Debug, Clone, Copy)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub program: &'static str,
    pub script: Option<&'static str>,
    /// Start-state bindings for denotation checks, if not domain defaults.
    pub start: Option<&'static str>,
    pub checks: &'static [Check],
}

/// One expectation. `source` documents the origin of the expected value
/// (analytic result, hand derivation, or cross-check).
#[derive(Debug, Clone, Copy)]
pub enum Check {
    ScriptAccepted {
        source: &'static str,
    },
    ScriptRejectedAt {
        path: &'static str,
        source: &'static str,
    },
    /// Every generator of the (exact) denotation puts exactly this mass
    /// on the event.
    EventMassEveryGen {
        event: &'static str,
        mass: &'static str,
        source: &'static str,
    },
    /// Every generator of the denotation satisfies the assertion.
    EveryGeneratorSatisfies {
        assertion: &'static str,
        source: &'static str,
    },
    TripleAccepted {
        pre: &'static str,
        post: &'static str,
        source: &'static str,
    },
    /// The semantic check rejects, and some counterexample generator puts
    /// mass exactly 1 on the event.
    TripleRejectedWithEventMassOne {
        pre: &'static str,
        post: &'static str,
        event: &'static str,
        source: &'static str,
    },
    /// The divergence bound of iterate `n` of the first loop equals this.
    IterateResidual {
        iterate: usize,
        residual: &'static str,
        source: &'static str,
    },
    /// Value-iteration bound: optionally an exact value at a state, and
    /// a floor for the minimum over all states.
    Minterm {
        iters: usize,
        state: Option<&'static str>,
        exact: Option<&'static str>,
        at_least: Option<&'static str>,
        source: &'static str,
    },
    /// Empirical event frequency within `sigmas * sqrt(p(1-p)/n)` of `prob`.
    Simulate {
        sched: &'static str,
        samples: u64,
        seed: u64,
        max_steps: u64,
        event: &'static str,
        prob_num: u32,
        prob_den: u32,
        sigmas: f64,
        source: &'static str,
    },
    /// Exhaustive check of the clause-resampling premise: from every
    /// state whose selected clause is unsatisfied, the Hamming distance
    /// to the pinned assignment drops with probability at least 1/8.
    SatResamplePremise {
        source: &'static str,
    },
}

pub const ENTRIES: &[CorpusEntry] = &[
    CorpusEntry {
        name: "coin-adversary-first",
        program: "coin_adversary_first.dmn",
        script: Some("coin_adversary_first.proof"),
        start: None,
        checks: &[
            Check::ScriptAccepted {
                source: "hand derivation: split on the adversary's pick, then the fair flip",
            },
            Check::TripleAccepted {
                pre: "[true]",
                post: "[x=y] (+ 1/2) [x!=y]",
                source: "the flip lands after the pick, so matching is exactly a coin toss",
            },
            Check::EveryGeneratorSatisfies {
                assertion: "[x=y] (+ 1/2) [x!=y]",
                source: "per-distribution satisfaction holds for each adversary corner, even \
                         though the corners differ as distributions",
            },
            Check::Simulate {
                sched: "uniform",
                samples: 100_000,
                seed: 11,
                max_steps: 1_000,
                event: "x = y",
                prob_num: 1,
                prob_den: 2,
                sigmas: 4.0,
                source: "operational cross-check of the denotational mass",
            },
        ],
    },
    CorpusEntry {
        name: "coin-flip-first",
        program: "coin_flip_first.dmn",
        script: Some("coin_flip_first.proof"),
        start: None,
        checks: &[
            Check::ScriptAccepted {
                source: "hand derivation: only the probability-free claim survives",
            },
            Check::TripleRejectedWithEventMassOne {
                pre: "[true]",
                post: "[x=y] (+ 1/2) [x!=y]",
                event: "x = y",
                source: "the adversary that copies the flip forces matching with mass 1",
            },
            Check::Simulate {
                sched: "uniform",
                samples: 100_000,
                seed: 12,
                max_steps: 1_000,
                event: "x = y",
                prob_num: 1,
                prob_den: 2,
                sigmas: 4.0,
                source: "a bias-1/2 scheduler happens to match with probability 1/2",
            },
        ],
    },
    CorpusEntry {
        name: "nondet-misuse",
        program: "nondet_misuse.dmn",
        script: Some("nondet_misuse.proof"),
        start: None,
        checks: &[Check::ScriptRejectedAt {
            path: "root.0",
            source: "the nondeterminism rule demands a basic precondition; the probabilistic \
                     one must be split first",
        }],
    },
    CorpusEntry {
        name: "nondet-corrected",
        program: "nondet_misuse.dmn",
        script: Some("nondet_corrected.proof"),
        start: None,
        checks: &[Check::ScriptAccepted {
            source: "probabilistic split first, then the nondeterminism rule per branch",
        }],
    },
    CorpusEntry {
        name: "monty-hall-stick",
        program: "monty_game.dmn",
        script: Some("monty_game.proof"),
        start: None,
        checks: &[
            Check::ScriptAccepted {
                source: "hand derivation mirroring the case split on the prize door",
            },
            Check::EventMassEveryGen {
                event: "pick = car",
                mass: "1/3",
                source: "sticking wins exactly when the first pick was right",
            },
        ],
    },
    CorpusEntry {
        name: "monty-hall-switch",
        program: "monty_switch.dmn",
        script: Some("monty_switch.proof"),
        start: None,
        checks: &[
            Check::ScriptAccepted {
                source: "appending the switch step to the game derivation",
            },
            Check::EventMassEveryGen {
                event: "pick = car",
                mass: "2/3",
                source: "switching wins exactly when the first pick was wrong",
            },
            Check::Simulate {
                sched: "uniform",
                samples: 100_000,
                seed: 13,
                max_steps: 1_000,
                event: "pick = car",
                prob_num: 2,
                prob_den: 3,
                sigmas: 3.0,
                source: "operational cross-check of the exact win mass",
            },
        ],
    },
    CorpusEntry {
        name: "von-neumann",
        program: "von_neumann.dmn",
        script: Some("von_neumann.proof"),
        start: Some("x=false, y=false, p=1/4"),
        checks: &[
            Check::ScriptAccepted {
                source: "two-variant argument with worst-case exit probability 3/8",
            },
            // Divergence decays by the worst-case continue probability
            // 1 - 3/8 = 5/8 per executed round; iterate n+1 accounts for
            // n rounds.
            Check::IterateResidual {
                iterate: 1,
                residual: "1",
                source: "no rounds resolved yet",
            },
            Check::IterateResidual {
                iterate: 2,
                residual: "5/8",
                source: "one worst-case round: the adversary pins the bias at 1/4",
            },
            Check::IterateResidual {
                iterate: 3,
                residual: "25/64",
                source: "two worst-case rounds",
            },
            Check::IterateResidual {
                iterate: 5,
                residual: "625/4096",
                source: "four worst-case rounds",
            },
            Check::IterateResidual {
                iterate: 6,
                residual: "3125/32768",
                source: "five worst-case rounds",
            },
            Check::Simulate {
                sched: "worst",
                samples: 100_000,
                seed: 14,
                max_steps: 10_000,
                event: "x = true",
                prob_num: 1,
                prob_den: 2,
                sigmas: 4.0,
                source: "the simulated coin is fair under every scheduler",
            },
        ],
    },
    CorpusEntry {
        name: "resetting-walk",
        program: "resetting_walk.dmn",
        script: Some("resetting_walk.proof"),
        start: Some("x=5"),
        checks: &[
            Check::ScriptAccepted {
                source: "rank x in 1..5 drops with probability 1/2 each round",
            },
            Check::Minterm {
                iters: 5,
                state: Some("x=5"),
                exact: Some("1/32"),
                at_least: None,
                source: "five forced decrements in a row",
            },
            Check::Minterm {
                iters: 1200,
                state: None,
                exact: None,
                at_least: Some("999999/1000000"),
                source: "value iteration converges to 1; 1200 rounds overshoot the 1e-6 gap",
            },
        ],
    },
    CorpusEntry {
        name: "fair-walk",
        program: "fair_walk.dmn",
        script: Some("fair_walk.proof"),
        start: Some("x=20"),
        checks: &[Check::ScriptAccepted {
            source: "expected rank decreases: down 1 with probability 1/2, up at most 1",
        }],
    },
    CorpusEntry {
        name: "geometric",
        program: "geometric.dmn",
        script: Some("geometric.proof"),
        start: Some("x=false"),
        checks: &[
            Check::ScriptAccepted {
                source: "zero-one argument with per-round exit probability 1/2",
            },
            Check::Minterm {
                iters: 40,
                state: Some("x=false"),
                exact: Some("1099511627775/1099511627776"),
                at_least: None,
                source: "1 - 2^-40 after forty rounds",
            },
        ],
    },
    CorpusEntry {
        name: "sat-sampler",
        program: "sat_sampler.dmn",
        script: Some("sat_sampler.proof"),
        start: None,
        checks: &[
            Check::ScriptAccepted {
                source: "rank = Hamming distance to the pinned assignment, threshold 1/8",
            },
            Check::SatResamplePremise {
                source: "resampling the three variables of an unsatisfied clause matches the \
                         pinned assignment with probability exactly 1/8",
            },
        ],
    },
];

pub fn corpus_dir() -> PathBuf {
    if let Ok(dir) = std::env::var("DEMON_CORPUS") {
        return PathBuf::from(dir);
    }
    // Relative to the workspace when run via cargo; falls back to ./corpus.
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let bundled = manifest.join("../../corpus");
    if bundled.is_dir() {
        bundled
    } else {
        PathBuf::from("corpus")
    }
}

pub struct EntryOutcome {
    pub name: &'static str,
    pub lines: Vec<String>,
    pub failures: Vec<String>,
}

/// Run the corpus (optionally filtered); prints one line per check in a
/// fixed order and returns overall success.
pub fn run_corpus(filter: Option<&str>, flags: &GlobalFlags) -> Result<bool, String> {
    let dir = corpus_dir();
    let selected: Vec<&CorpusEntry> = ENTRIES
        .iter()
        .filter(|e| filter.is_none_or(|f| e.name.contains(f)))
        .collect();
    if selected.is_empty() {
        return Err("no corpus entries match the filter".into());
    }
    // Entries are independent; run them in parallel, report in order.
    let outcomes: Vec<EntryOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|entry| scope.spawn(|| run_entry(entry, &dir, flags)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut ok = true;
    for outcome in &outcomes {
        for line in &outcome.lines {
            println!("{line}");
        }
        if !outcome.failures.is_empty() {
            ok = false;
            for f in &outcome.failures {
                println!("{}: FAIL {f}", outcome.name);
            }
        }
    }
    println!(
        "{}: {} entries, {} failures",
        if ok { "PASS" } else { "FAIL" },
        outcomes.len(),
        outcomes.iter().map(|o| o.failures.len()).sum::<usize>()
    );
    Ok(ok)
}

pub fn run_entry(entry: &CorpusEntry, dir: &Path, flags: &GlobalFlags) -> EntryOutcome {
    let mut outcome = EntryOutcome {
        name: entry.name,
        lines: Vec::new(),
        failures: Vec::new(),
    };
    match run_entry_inner(entry, dir, flags, &mut outcome) {
        Ok(()) => {}
        Err(e) => outcome.failures.push(e),
    }
    outcome
}

fn run_entry_inner(
    entry: &CorpusEntry,
    dir: &Path,
    flags: &GlobalFlags,
    outcome: &mut EntryOutcome,
) -> Result<(), String> {
    let program = crate::load_program(&dir.join(entry.program))?;
    let engine = flags.engine();
    let sigma = start_state(&program, entry.start)?;
    for check in entry.checks {
        let label = check_label(check);
        match run_check(entry, check, &program, &sigma, dir, flags) {
            Ok(()) => outcome.lines.push(format!("{}: ok {label}", entry.name)),
            Err(e) => outcome.failures.push(format!("{label}: {e}")),
        }
    }
    let _ = engine;
    Ok(())
}

fn check_label(check: &Check) -> &'static str {
    match check {
        Check::ScriptAccepted { .. } => "script accepted",
        Check::ScriptRejectedAt { .. } => "script rejected at the expected node",
        Check::EventMassEveryGen { .. } => "exact event mass in every generator",
        Check::EveryGeneratorSatisfies { .. } => "every generator satisfies the assertion",
        Check::TripleAccepted { .. } => "semantic triple accepted",
        Check::TripleRejectedWithEventMassOne { .. } => "semantic triple rejected with witness",
        Check::IterateResidual { .. } => "loop iterate residual",
        Check::Minterm { .. } => "termination bound",
        Check::Simulate { .. } => "simulation frequency",
        Check::SatResamplePremise { .. } => "resampling premise",
    }
}

fn parse_rat_str(s: &str) -> Rat {
    match s.split_once('/') {
        Some((a, b)) => Rat::new(
            a.trim().parse::<BigInt>().expect("corpus rational"),
            b.trim().parse::<BigInt>().expect("corpus rational"),
        ),
        None => Rat::from(s.trim().parse::<BigInt>().expect("corpus rational")),
    }
}

fn find_while(cmd: &Cmd) -> Option<(&Exp, &Cmd)> {
    match cmd {
        Cmd::While(guard, body) => Some((guard, body)),
        Cmd::Seq(a, b) | Cmd::NdChoice(a, b) => find_while(a).or_else(|| find_while(b)),
        Cmd::ProbChoice(_, a, b) | Cmd::If(_, a, b) => find_while(a).or_else(|| find_while(b)),
        Cmd::Skip | Cmd::Assign(..) => None,
    }
}

fn run_check(
    entry: &CorpusEntry,
    check: &Check,
    program: &Program,
    sigma: &State,
    dir: &Path,
    flags: &GlobalFlags,
) -> Result<(), String> {
    let engine = flags.engine();
    match check {
        Check::ScriptAccepted { .. } | Check::ScriptRejectedAt { .. } => {
            let path = entry
                .script
                .ok_or("entry has no script")
                .map(|s| dir.join(s))?;
            let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            let script = parse_script(&text).map_err(|e| e.to_string())?;
            let cfg = CheckerConfig {
                engine,
                strict: flags.strict,
                ..CheckerConfig::default()
            };
            let report = check_derivation(&script, program, &cfg);
            match check {
                Check::ScriptAccepted { .. } => {
                    if report.verdict != Verdict::Accepted {
                        return Err(format!("expected acceptance, got:\n{report}"));
                    }
                }
                Check::ScriptRejectedAt { path: at, .. } => {
                    if report.verdict != Verdict::Rejected {
                        return Err(format!("expected rejection, got:\n{report}"));
                    }
                    let rejected = report.rejected_paths();
                    if rejected != vec![*at] {
                        return Err(format!(
                            "expected rejection exactly at {at}, got {rejected:?}"
                        ));
                    }
                }
                _ => unreachable!(),
            }
            Ok(())
        }
        Check::EventMassEveryGen { event, mass, .. } => {
            let atom = parse_atom(event).map_err(|e| e.to_string())?;
            let want = parse_rat_str(mass);
            let r = denote(&program.cmd, sigma, &engine).map_err(|e| e.to_string())?;
            if !r.exact {
                return Err("denotation is not exact".into());
            }
            for g in r.value.generators() {
                let got = mass_of(g, &atom)?;
                if got != want {
                    return Err(format!("generator has mass {got}, expected {want}:\n{g}"));
                }
            }
            Ok(())
        }
        Check::EveryGeneratorSatisfies { assertion, .. } => {
            let phi = demon::syntax::parse_assertion(assertion).map_err(|e| e.to_string())?;
            let r = denote(&program.cmd, sigma, &engine).map_err(|e| e.to_string())?;
            for g in r.value.generators() {
                if !satisfies(g, &phi).map_err(|e| e.to_string())? {
                    return Err(format!("generator fails `{phi}`:\n{g}"));
                }
            }
            Ok(())
        }
        Check::TripleAccepted { pre, post, .. } => {
            let triple = Triple {
                pre: demon::syntax::parse_assertion(pre).map_err(|e| e.to_string())?,
                cmd: program.cmd.clone(),
                post: demon::syntax::parse_assertion(post).map_err(|e| e.to_string())?,
            };
            let verdicts = check_triple_semantic(&triple, &[Dist::dirac(sigma.clone())], &engine)
                .map_err(|e| e.to_string())?;
            match &verdicts[0] {
                WitnessVerdict::Accepted => Ok(()),
                other => Err(format!("expected acceptance, got {other:?}")),
            }
        }
        Check::TripleRejectedWithEventMassOne {
            pre, post, event, ..
        } => {
            let atom = parse_atom(event).map_err(|e| e.to_string())?;
            let triple = Triple {
                pre: demon::syntax::parse_assertion(pre).map_err(|e| e.to_string())?,
                cmd: program.cmd.clone(),
                post: demon::syntax::parse_assertion(post).map_err(|e| e.to_string())?,
            };
            let verdicts = check_triple_semantic(&triple, &[Dist::dirac(sigma.clone())], &engine)
                .map_err(|e| e.to_string())?;
            let WitnessVerdict::Rejected { counterexamples } = &verdicts[0] else {
                return Err(format!("expected rejection, got {:?}", verdicts[0]));
            };
            let one = rat_int(1);
            for g in counterexamples {
                if mass_of(g, &atom)? == one {
                    return Ok(());
                }
            }
            Err(format!(
                "no counterexample puts mass 1 on `{event}`; got {counterexamples:?}"
            ))
        }
        Check::IterateResidual {
            iterate, residual, ..
        } => {
            let (guard, body) =
                find_while(&program.cmd).ok_or("program has no loop to iterate")?;
            let set = loop_iterate(body, guard, *iterate, sigma, &engine)
                .map_err(|e| e.to_string())?;
            let got = set.residual_bound();
            let want = parse_rat_str(residual);
            if got != want {
                return Err(format!(
                    "iterate {iterate} has residual {got}, expected {want}"
                ));
            }
            Ok(())
        }
        Check::Minterm {
            iters,
            state,
            exact,
            at_least,
            ..
        } => {
            let (guard, body) = find_while(&program.cmd).ok_or("program has no loop")?;
            let states = enumerate_states(&program.table, 1 << 20)
                .ok_or("declared domains required")?;
            let bounds = min_termination_prob(body, guard, &states, *iters, &engine)
                .map_err(|e| e.to_string())?;
            if let (Some(binding), Some(exact)) = (state, exact) {
                let at = start_state(program, Some(binding))?;
                let got = &bounds[&at];
                let want = parse_rat_str(exact);
                if got != &want {
                    return Err(format!(
                        "bound at {binding} after {iters} iterations is {got}, expected {want}"
                    ));
                }
            }
            if let Some(floor) = at_least {
                let want = parse_rat_str(floor);
                let (worst_state, worst) =
                    bounds.iter().min_by(|a, b| a.1.cmp(b.1)).expect("nonempty");
                if worst < &want {
                    return Err(format!(
                        "minimum bound after {iters} iterations is {worst} at {{{worst_state}}}, \
                         expected at least {want}"
                    ));
                }
            }
            Ok(())
        }
        Check::Simulate {
            sched,
            samples,
            seed,
            max_steps,
            event,
            prob_num,
            prob_den,
            sigmas,
            ..
        } => {
            let atom = parse_atom(event).map_err(|e| e.to_string())?;
            let scheduler = crate::scheduler_by_name(sched)?;
            let report = demon::simulate::mc_simulate(
                &program.cmd,
                sigma,
                scheduler.as_ref(),
                *samples,
                *seed,
                *max_steps,
            )
            .map_err(|e| e.to_string())?;
            if report.nonterminated > 0 {
                return Err(format!("{} runs hit the step cap", report.nonterminated));
            }
            let freq = report.frequency(|s| eval_bool(&atom, s).unwrap_or(false));
            let p = *prob_num as f64 / *prob_den as f64;
            let tolerance = sigmas * (p * (1.0 - p) / *samples as f64).sqrt();
            if (freq - p).abs() > tolerance {
                return Err(format!(
                    "frequency of `{event}` is {freq:.5}, outside {p:.5} +- {tolerance:.5}"
                ));
            }
            Ok(())
        }
        Check::SatResamplePremise { .. } => sat_resample_premise(dir, flags).map(|_| ()),
    }
}

fn mass_of(g: &Dist, atom: &Exp) -> Result<Rat, String> {
    let mut acc = Rat::from(BigInt::from(0));
    for (s, w) in g.proper_support() {
        if eval_bool(atom, s).map_err(|e| e.to_string())? {
            acc += w;
        }
    }
    Ok(acc)
}

/// From every state whose selected clause is unsatisfied (hence the
/// formula is unsatisfied), resampling that clause strictly decreases
/// the Hamming distance to the pinned assignment with probability at
/// least 1/8. Returns how many states were checked.
pub fn sat_resample_premise(dir: &Path, flags: &GlobalFlags) -> Result<usize, String> {
    let program = crate::load_program(&dir.join("sat_resample.dmn"))?;
    let engine = flags.engine();
    let states =
        enumerate_states(&program.table, 1 << 20).ok_or("declared domains required")?;
    // evalclause(s) over the pinned clause lists.
    let clause_unsat = parse_atom(
        "!((csigns[s][1] xnor vars[cvars[s][1]]) || (csigns[s][2] xnor vars[cvars[s][2]]) \
         || (csigns[s][3] xnor vars[cvars[s][3]]))",
    )
    .map_err(|e| e.to_string())?;
    let dist_exp = parse_atom(
        "[vars[1] != xhat[1]] + [vars[2] != xhat[2]] + [vars[3] != xhat[3]] + [vars[4] != xhat[4]]",
    )
    .map_err(|e| e.to_string())?;
    let mut checked = 0usize;
    for s in &states {
        if !eval_bool(&clause_unsat, s).map_err(|e| e.to_string())? {
            continue;
        }
        let k = match eval_exp(&dist_exp, s).map_err(|e| e.to_string())? {
            Value::Num(k) => k,
            other => return Err(format!("distance evaluates to a {}", other.type_name())),
        };
        if !(k >= Rat::one()) {
            return Err(format!("unsatisfied clause but distance {k} at {{{s}}}"));
        }
        let post = demon::syntax::parse_assertion(&format!(
            "[[vars[1] != xhat[1]] + [vars[2] != xhat[2]] + [vars[3] != xhat[3]] + \
             [vars[4] != xhat[4]] < {k}] (+ 1/8) [true]"
        ))
        .map_err(|e| e.to_string())?;
        let triple = Triple {
            pre: demon::syntax::parse_assertion("[true]").unwrap(),
            cmd: program.cmd.clone(),
            post,
        };
        let verdicts = check_triple_semantic(&triple, &[Dist::dirac(s.clone())], &engine)
            .map_err(|e| e.to_string())?;
        if !verdicts[0].is_accepted() {
            return Err(format!(
                "premise fails from {{{s}}}: {:?}",
                verdicts[0]
            ));
        }
        checked += 1;
    }
    if checked == 0 {
        return Err("no states with an unsatisfied selected clause".into());
    }
    Ok(checked)
}
