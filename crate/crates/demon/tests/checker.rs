//! End-to-end checks of the derivation checker on small scripts.

use demon::proof::{
    check_derivation, check_triple_semantic, parse_script, CheckerConfig, NodeVerdict, Triple,
    Verdict, WitnessVerdict,
};
use demon::semantics::EngineConfig;
use demon::syntax::{parse_assertion, parse_program};
use demon::value::{rat_int, State, Value};
use std::sync::Arc;

fn start_state(prog: &demon::syntax::Program) -> State {
    let vals: Vec<Value> = (0..prog.table.len())
        .map(|i| match prog.table.domain(i) {
            Some(dom) => dom[0].clone(),
            None => Value::Num(rat_int(0)),
        })
        .collect();
    State::new(Arc::clone(&prog.table), vals)
}

const COIN_ADVERSARY_FIRST: &str = "
var x in {true,false};
var y in {true,false};
y <- {true, false};
x := flip(1/2)
";

const COIN_SCRIPT: &str = "
pre:  [true]
post: [x=y] (+ 1/2) [x!=y]
rule Seq {
  mid: [y=true] & [y=false]
  rule NDSelect {}
  rule Consequence {
    pre:  [y=true] & [y=false]
    post: ([x=y] (+ 1/2) [x!=y]) & ([x!=y] (+ 1/2) [x=y])
    rule NDSplit {
      rule Prob {
        p: 1/2
        rule Consequence {
          pre:  [true=y]
          post: [x=y]
          rule Assign {}
        }
        rule Consequence {
          pre:  [false!=y]
          post: [x!=y]
          rule Assign {}
        }
      }
      rule Prob {
        p: 1/2
        rule Consequence {
          pre:  [true!=y]
          post: [x!=y]
          rule Assign {}
        }
        rule Consequence {
          pre:  [false=y]
          post: [x=y]
          rule Assign {}
        }
      }
    }
  }
}
";

#[test]
fn coin_game_script_is_accepted() {
    let prog = parse_program(COIN_ADVERSARY_FIRST).unwrap();
    let script = parse_script(COIN_SCRIPT).unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Accepted, "{report}");
}

#[test]
fn coin_game_triple_holds_semantically_but_not_reversed() {
    let prog = parse_program(COIN_ADVERSARY_FIRST).unwrap();
    let sigma = start_state(&prog);
    let engine = EngineConfig::default();
    let triple = Triple {
        pre: parse_assertion("[true]").unwrap(),
        cmd: prog.cmd.clone(),
        post: parse_assertion("[x=y] (+ 1/2) [x!=y]").unwrap(),
    };
    let verdicts =
        check_triple_semantic(&triple, &[demon::dist::Dist::dirac(sigma)], &engine).unwrap();
    assert!(matches!(verdicts[0], WitnessVerdict::Accepted));

    // Reversed order: the adversary picks after the flip and can copy it.
    let reversed = parse_program(
        "var x in {true,false};\nvar y in {true,false};\nx := flip(1/2);\ny <- {true, false}",
    )
    .unwrap();
    let sigma = start_state(&reversed);
    let triple = Triple {
        pre: parse_assertion("[true]").unwrap(),
        cmd: reversed.cmd.clone(),
        post: parse_assertion("[x=y] (+ 1/2) [x!=y]").unwrap(),
    };
    let verdicts =
        check_triple_semantic(&triple, &[demon::dist::Dist::dirac(sigma)], &engine).unwrap();
    let WitnessVerdict::Rejected { counterexamples } = &verdicts[0] else {
        panic!("expected rejection, got {:?}", verdicts[0]);
    };
    // Among the counterexamples is the copying adversary, with all mass on
    // x = y.
    assert!(counterexamples.iter().any(|g| {
        g.mass_where(|s| s.get_named("x") == s.get_named("y")) == rat_int(1)
    }));
}

const MISUSE_PROGRAM: &str = "
var x in {true,false};
var y in {true,false};
y <- {true, false}
";

const MISUSE_SCRIPT: &str = "
pre:  [x=true] (+ 1/2) [x=false]
post: [x=y] (+ 1/2) [x!=y]
rule Consequence {
  pre:  [x=true] (+ 1/2) [x=false]
  post: ([x=y] (+ 1/2) [x!=y]) & ([x!=y] (+ 1/2) [x=y])
  rule Nondet {
    rule Consequence {
      pre:  [x=y]
      post: [x=y]
      rule Skip {}
    }
    rule Consequence {
      pre:  [x=y]
      post: [x=y]
      rule Skip {}
    }
  }
}
";

const CORRECTED_SCRIPT: &str = "
pre:  [x=true] (+ 1/2) [x=false]
post: [x=y] & [x!=y]
rule Consequence {
  pre:  [x=true] (+ 1/2) [x=false]
  post: ([x=y] & [x!=y]) (+ 1/2) ([x!=y] & [x=y])
  rule ProbSplit {
    rule Nondet {
      rule Assign {}
      rule Consequence {
        pre:  [x!=false]
        post: [x!=y]
        rule Assign {}
      }
    }
    rule Nondet {
      rule Consequence {
        pre:  [x!=true]
        post: [x!=y]
        rule Assign {}
      }
      rule Assign {}
    }
  }
}
";

#[test]
fn nondet_misuse_is_rejected_at_the_nondet_node() {
    let prog = parse_program(MISUSE_PROGRAM).unwrap();
    let script = parse_script(MISUSE_SCRIPT).unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Rejected);
    let rejected = report.rejected_paths();
    assert_eq!(rejected, vec!["root.0"], "{report}");
    let node = report
        .nodes
        .iter()
        .find(|n| n.path == "root.0")
        .unwrap();
    assert_eq!(node.rule, demon::proof::RuleTag::Nondet);
    let NodeVerdict::Rejected(msg) = &node.verdict else {
        panic!()
    };
    assert!(msg.contains("single [P]"), "{msg}");
}

#[test]
fn corrected_derivation_is_accepted() {
    let prog = parse_program(MISUSE_PROGRAM).unwrap();
    let script = parse_script(CORRECTED_SCRIPT).unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Accepted, "{report}");
}

#[test]
fn skip_axiom_and_annotation_mismatch() {
    let prog = parse_program("skip").unwrap();
    let ok = parse_script("pre: T\npost: T\nrule Skip {}\n").unwrap();
    let report = check_derivation(&ok, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Accepted);

    let bad = parse_script("pre: T\npost: [true]\nrule Skip {}\n").unwrap();
    let report = check_derivation(&bad, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Rejected);
}

const WALK_PROGRAM: &str = "
var x in {0..5};
while x > 0 do { x := x - 1 +[1/2] x <- {5, 4, 3, 2, 1} }
";

const WALK_SCRIPT: &str = "
pre:  [0 <= x && x <= 5]
post: [x = 0]
rule Consequence {
  pre:  [0 <= x && x <= 5]
  post: [0 <= x && x <= 5 && !(x > 0)]
  rule BoundedRank {
    inv:  0 <= x && x <= 5
    rank: x
    lo: 1
    hi: 5
    p: 1/2
  }
}
";

#[test]
fn resetting_walk_bounded_rank_is_accepted() {
    let prog = parse_program(WALK_PROGRAM).unwrap();
    let script = parse_script(WALK_SCRIPT).unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Accepted, "{report}");
}

#[test]
fn broken_rank_probability_is_rejected() {
    // Claiming decrease probability 3/4 where the true one is 1/2.
    let prog = parse_program(WALK_PROGRAM).unwrap();
    let script = parse_script(&WALK_SCRIPT.replace("p: 1/2", "p: 3/4")).unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Rejected, "{report}");
}

const FAIR_WALK_PROGRAM: &str = "
var x in {0..20};
while x > 0 do { x := x - 1 +[1/2] ((if x < 20 then x := x + 1 else skip) & skip) }
";

const FAIR_WALK_SCRIPT: &str = "
pre:  [x >= 0]
post: [x = 0]
rule Consequence {
  pre:  [x >= 0]
  post: [x >= 0 && !(x > 0)]
  rule ProgressingRank {
    inv:  x >= 0
    rank: x
    p: 1/2
    d: 1
  }
}
";

#[test]
fn fair_walk_progressing_rank_is_accepted() {
    let prog = parse_program(FAIR_WALK_PROGRAM).unwrap();
    let script = parse_script(FAIR_WALK_SCRIPT).unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Accepted, "{report}");
}

#[test]
fn oversized_decrease_is_rejected() {
    let prog = parse_program(FAIR_WALK_PROGRAM).unwrap();
    let script = parse_script(&FAIR_WALK_SCRIPT.replace("d: 1", "d: 2")).unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Rejected, "{report}");
}

#[test]
fn tabulated_schedule_matches_constants() {
    let prog = parse_program(FAIR_WALK_PROGRAM).unwrap();
    let rows: String = (1..=20)
        .map(|k| format!("    row: {k}, 1/2, 1\n"))
        .collect();
    let tabulated = FAIR_WALK_SCRIPT.replace("    p: 1/2\n    d: 1\n", &rows);
    let script = parse_script(&tabulated).unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Accepted, "{report}");
}

#[test]
fn constancy_respects_modified_variables() {
    let prog = parse_program("var x in {0..1}; var y in {0..1}; x := 1").unwrap();
    let good = parse_script(
        "pre: [x=0] /\\ [y=0]\npost: [x=1] /\\ [y=0]\nrule Constancy {\n  frame: y=0\n  rule Consequence {\n    pre: [1=1]\n    post: [x=1]\n    rule Assign {}\n  }\n}\n",
    )
    .unwrap();
    let report = check_derivation(&good, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Accepted, "{report}");

    // Framing the modified variable flips the verdict.
    let bad = parse_script(
        "pre: [y=0] /\\ [x=0]\npost: [y=0] /\\ [x=0]\nrule Constancy {\n  frame: x=0\n  rule Skip {}\n}\n",
    )
    .unwrap();
    let prog2 = parse_program("var x in {0..1}; var y in {0..1}; x := 1").unwrap();
    let report = check_derivation(&bad, &prog2, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Rejected, "{report}");
}

const VON_NEUMANN_PROGRAM: &str = "
var x in {true,false};
var y in {true,false};
var p in {1/4, 1/2, 3/4};
x := false;
y := false;
while x = y do {
  p <- {1/4, 3/4, 1/2};
  x := flip(p);
  y := flip(p)
}
";

const VON_NEUMANN_SCRIPT: &str = "
pre:  [true]
post: [x=true] (+ 1/2) [x=false]
rule Seq {
  mid: [x = false]
  rule Consequence {
    pre:  [false = false]
    post: [x = false]
    rule Assign {}
  }
  rule Seq {
    mid: [x = y]
    rule Assign {}
    rule Consequence {
      pre:  (([x=true] (+ 1/2) [x=false]) /\\ [x != y]) & [x = y]
      post: ([x=true] (+ 1/2) [x=false]) /\\ [x != y]
      rule BoundedVariant {
        p: 3/8
        variant: ([x=true] (+ 1/2) [x=false]) /\\ [x != y]
        variant: [x = y]
      }
    }
  }
}
";

#[test]
fn von_neumann_bounded_variant_is_accepted() {
    let prog = parse_program(VON_NEUMANN_PROGRAM).unwrap();
    let script = parse_script(VON_NEUMANN_SCRIPT).unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Accepted, "{report}");
}

#[test]
fn von_neumann_with_overstated_probability_is_rejected() {
    // The worst-case termination probability per round is 3/8; claiming
    // 1/2 must fail the variant premise.
    let prog = parse_program(VON_NEUMANN_PROGRAM).unwrap();
    let script = parse_script(&VON_NEUMANN_SCRIPT.replace("p: 3/8", "p: 1/2")).unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Rejected, "{report}");
}

const GEOMETRIC_PROGRAM: &str = "
var x in {true,false};
while !x do x := flip(1/2)
";

const GEOMETRIC_ZERO_ONE: &str = "
pre:  [!x]
post: [x]
rule ZeroOne {
  inv:  [!x]
  exit: [x]
  p: 1/2
}
";

#[test]
fn zero_one_accepts_the_geometric_loop() {
    let prog = parse_program(GEOMETRIC_PROGRAM).unwrap();
    let script = parse_script(GEOMETRIC_ZERO_ONE).unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Accepted, "{report}");
}

#[test]
fn zero_one_rejects_certain_divergence() {
    let prog = parse_program("var x in {true,false}; while true do skip").unwrap();
    let script = parse_script(
        "pre: [true]\npost: [false]\nrule ZeroOne {\n  inv: [true]\n  exit: [false]\n  p: 1/100\n}\n",
    )
    .unwrap();
    let report = check_derivation(&script, &prog, &CheckerConfig::default());
    assert_eq!(report.verdict, Verdict::Rejected, "{report}");
    let msg = format!("{report}");
    assert!(msg.contains("termination premise"), "{msg}");
}
