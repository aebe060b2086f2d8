//! The derivation checker and the semantic triple checker.
//!
//! `check_derivation` walks a proof script against the program, checking
//! each rule application structurally and discharging side conditions
//! through the implication engine, exhaustive semantic evaluation, or
//! value iteration. `check_triple_semantic` checks a triple directly
//! against the denotational semantics from explicit witness
//! distributions.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::report::{CheckReport, DischargeKind, NodeReport, NodeVerdict, Obligation};
use super::script::{Derivation, RawField, RuleTag, Script};
use crate::assertions::{implies, satisfies, Discharge, Implication, ImplyLimits};
use crate::convex::ConvexSet;
use crate::dist::Dist;
use crate::eval::{eval_bool, eval_exp};
use crate::semantics::{denote, min_termination_prob, EngineConfig, SemanticsError};
use crate::staticcheck::{free_vars, modified_vars_with};
use crate::syntax::ast::{Assertion, Atom, BinOp, Cmd, Exp, Program, UnOp};
use crate::syntax::parser::{parse_assertion, parse_atom, parse_exp};
use crate::value::{enumerate_states, rat_int, Outcome, Rat, State, Value, VarTable};

#[derive(Debug, Clone)]
pub struct CheckerConfig {
    pub engine: EngineConfig,
    pub limits: ImplyLimits,
    /// Reject on side conditions the implication engine cannot decide,
    /// instead of reporting them as open obligations.
    pub strict: bool,
    /// Value-iteration rounds for loop termination premises.
    pub minterm_iters: usize,
    /// Cap on state enumeration during semantic discharge.
    pub state_cap: usize,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        CheckerConfig {
            engine: EngineConfig::default(),
            limits: ImplyLimits::default(),
            strict: false,
            minterm_iters: 2000,
            state_cap: 1 << 16,
        }
    }
}

/// Check a proof script against a program.
pub fn check_derivation(script: &Script, program: &Program, cfg: &CheckerConfig) -> CheckReport {
    let mut checker = Checker {
        cfg,
        table: Arc::clone(&program.table),
        nodes: Vec::new(),
        certified_loops: HashSet::new(),
    };
    checker.check_node(
        &script.root,
        &program.cmd,
        &script.pre,
        &script.post,
        "root".to_string(),
    );
    CheckReport::from_nodes(checker.nodes)
}

struct Checker<'a> {
    cfg: &'a CheckerConfig,
    table: Arc<VarTable>,
    nodes: Vec<NodeReport>,
    /// While-nodes (by address) certified terminating by an accepted
    /// loop-rule application; used by the Constancy side condition.
    certified_loops: HashSet<usize>,
}

enum Flow {
    Ok,
    Fail(String),
}

macro_rules! fail {
    ($($arg:tt)*) => {
        return Flow::Fail(format!($($arg)*))
    };
}

/// Unwrap a `Result<_, String>` into the surrounding `Flow`-returning fn.
macro_rules! try_flow {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(msg) => return Flow::Fail(msg),
        }
    };
}

impl Checker<'_> {
    fn check_node(
        &mut self,
        node: &Derivation,
        cmd: &Cmd,
        pre: &Assertion,
        post: &Assertion,
        path: String,
    ) {
        let report_idx = self.nodes.len();
        self.nodes.push(NodeReport {
            path: path.clone(),
            rule: node.rule,
            verdict: NodeVerdict::Accepted,
            obligations: Vec::new(),
        });
        let mut obligations = Vec::new();
        let flow = self.apply_rule(node, cmd, pre, post, &path, &mut obligations);
        let open = obligations
            .iter()
            .any(|o: &Obligation| o.how == DischargeKind::Unknown);
        let verdict = match flow {
            Flow::Fail(msg) => NodeVerdict::Rejected(msg),
            Flow::Ok if open => NodeVerdict::ObligationOpen,
            Flow::Ok => NodeVerdict::Accepted,
        };
        self.nodes[report_idx].verdict = verdict;
        self.nodes[report_idx].obligations = obligations;
    }

    /// Check conclusion annotations, the rule schema, and side conditions;
    /// recurses into child derivations.
    fn apply_rule(
        &mut self,
        node: &Derivation,
        cmd: &Cmd,
        pre: &Assertion,
        post: &Assertion,
        path: &str,
        obligations: &mut Vec<Obligation>,
    ) -> Flow {
        // Optional conclusion annotations (except on Consequence, where
        // pre/post are the payload).
        if node.rule != RuleTag::Consequence {
            if let Some(f) = node.field("pre") {
                let claimed = try_flow!(field_assertion(f));
                if &claimed != pre {
                    fail!(
                        "annotated precondition `{claimed}` differs from the derived one `{pre}`"
                    );
                }
            }
            if let Some(f) = node.field("post") {
                let claimed = try_flow!(field_assertion(f));
                if &claimed != post {
                    fail!(
                        "annotated postcondition `{claimed}` differs from the derived one `{post}`"
                    );
                }
            }
        }
        match node.rule {
            RuleTag::Skip => {
                let Cmd::Skip = cmd else {
                    fail!("Skip rule applied to `{cmd}`");
                };
                try_flow!(expect_children(node, 0));
                if pre != post {
                    fail!("Skip requires equal pre- and postconditions; got `{pre}` and `{post}`");
                }
                Flow::Ok
            }
            RuleTag::Assign => {
                let Cmd::Assign(x, e) = cmd else {
                    fail!("Assign rule applied to `{cmd}`");
                };
                try_flow!(expect_children(node, 0));
                let expected = post.substitute(x, e);
                if pre != &expected {
                    fail!(
                        "Assign requires the precondition `{expected}` (the postcondition with \
                         `{e}` substituted for `{x}`); got `{pre}`"
                    );
                }
                Flow::Ok
            }
            RuleTag::Seq => {
                let Cmd::Seq(c1, c2) = cmd else {
                    fail!("Seq rule applied to `{cmd}`");
                };
                try_flow!(expect_children(node, 2));
                let mid = try_flow!(field_assertion(try_flow!(required(node, "mid"))));
                self.check_node(&node.children[0], c1, pre, &mid, format!("{path}.0"));
                self.check_node(&node.children[1], c2, &mid, post, format!("{path}.1"));
                Flow::Ok
            }
            RuleTag::Prob => {
                let Cmd::ProbChoice(e, c1, c2) = cmd else {
                    fail!("Prob rule applied to `{cmd}`");
                };
                try_flow!(expect_children(node, 2));
                let p = try_flow!(field_rat(try_flow!(required(node, "p"))));
                let Assertion::OPlus(q, psi1, psi2) = post else {
                    fail!("Prob requires a `(+ {p})` postcondition; got `{post}`");
                };
                if q != &p {
                    fail!("postcondition weight {q} differs from the rule's p = {p}");
                }
                try_flow!(self.prob_expression_obligation(e, &p, pre, obligations));
                self.check_node(&node.children[0], c1, pre, psi1, format!("{path}.0"));
                self.check_node(&node.children[1], c2, pre, psi2, format!("{path}.1"));
                Flow::Ok
            }
            RuleTag::Nondet => {
                let Cmd::NdChoice(c1, c2) = cmd else {
                    fail!("Nondet rule applied to `{cmd}`");
                };
                try_flow!(expect_children(node, 2));
                let Assertion::Almost(_) = pre else {
                    fail!(
                        "the precondition of Nondet must be a single [P] assertion; `{pre}` \
                         carries outcome structure, which is unsound here"
                    );
                };
                let Assertion::Amp(psi1, psi2) = post else {
                    fail!("Nondet requires an `&` postcondition; got `{post}`");
                };
                self.check_node(&node.children[0], c1, pre, psi1, format!("{path}.0"));
                self.check_node(&node.children[1], c2, pre, psi2, format!("{path}.1"));
                Flow::Ok
            }
            RuleTag::If1 | RuleTag::If2 => {
                let Cmd::If(guard, c1, c2) = cmd else {
                    fail!("a conditional rule applied to `{cmd}`");
                };
                try_flow!(expect_children(node, 1));
                let (branch, branch_guard) = if node.rule == RuleTag::If1 {
                    (c1, guard.clone())
                } else {
                    (c2, Exp::not(guard.clone()))
                };
                try_flow!(self.implication_obligation(
                    "precondition selects the branch",
                    pre,
                    &Assertion::Almost(branch_guard),
                    obligations,
                ));
                self.check_node(&node.children[0], branch, pre, post, format!("{path}.0"));
                Flow::Ok
            }
            RuleTag::ProbSplit => {
                try_flow!(expect_children(node, 2));
                let Assertion::OPlus(p, phi1, phi2) = pre else {
                    fail!("ProbSplit requires a `(+ p)` precondition; got `{pre}`");
                };
                let Assertion::OPlus(q, psi1, psi2) = post else {
                    fail!("ProbSplit requires a `(+ p)` postcondition; got `{post}`");
                };
                if p != q {
                    fail!("ProbSplit weights differ: {p} vs {q}");
                }
                self.check_node(&node.children[0], cmd, phi1, psi1, format!("{path}.0"));
                self.check_node(&node.children[1], cmd, phi2, psi2, format!("{path}.1"));
                Flow::Ok
            }
            RuleTag::NdSplit => {
                try_flow!(expect_children(node, 2));
                let Assertion::Amp(phi1, phi2) = pre else {
                    fail!("NDSplit requires an `&` precondition; got `{pre}`");
                };
                let Assertion::Amp(psi1, psi2) = post else {
                    fail!("NDSplit requires an `&` postcondition; got `{post}`");
                };
                self.check_node(&node.children[0], cmd, phi1, psi1, format!("{path}.0"));
                self.check_node(&node.children[1], cmd, phi2, psi2, format!("{path}.1"));
                Flow::Ok
            }
            RuleTag::Consequence => {
                try_flow!(expect_children(node, 1));
                let inner_pre = try_flow!(field_assertion(try_flow!(required(node, "pre"))));
                let inner_post = try_flow!(field_assertion(try_flow!(required(node, "post"))));
                try_flow!(self.implication_obligation(
                    "precondition strengthening",
                    pre,
                    &inner_pre,
                    obligations,
                ));
                try_flow!(self.implication_obligation(
                    "postcondition weakening",
                    &inner_post,
                    post,
                    obligations,
                ));
                self.check_node(
                    &node.children[0],
                    cmd,
                    &inner_pre,
                    &inner_post,
                    format!("{path}.0"),
                );
                Flow::Ok
            }
            RuleTag::Constancy => {
                try_flow!(expect_children(node, 1));
                let frame = try_flow!(field_atom(try_flow!(required(node, "frame"))));
                let Assertion::And(phi, pre_frame) = pre else {
                    fail!(
                        "Constancy requires the precondition shaped `phi /\\ [{frame}]`; got `{pre}`"
                    );
                };
                let Assertion::And(psi, post_frame) = post else {
                    fail!(
                        "Constancy requires the postcondition shaped `psi /\\ [{frame}]`; got `{post}`"
                    );
                };
                let expected = Assertion::Almost(frame.clone());
                if pre_frame.as_ref() != &expected || post_frame.as_ref() != &expected {
                    fail!("the framed assertion must be `[{frame}]` on both sides");
                }
                // The child runs first so loop certificates are available.
                self.check_node(&node.children[0], cmd, phi, psi, format!("{path}.0"));
                let child_ok = self
                    .nodes
                    .iter()
                    .filter(|n| n.path.starts_with(&format!("{path}.0")))
                    .all(|n| !matches!(n.verdict, NodeVerdict::Rejected(_)));
                let certified = self.certified_loops.clone();
                let mods = modified_vars_with(cmd, &self.table, &|w| {
                    certified.contains(&(w as *const Cmd as usize))
                });
                let frame_vars = free_vars(&frame);
                let clash: Vec<&String> = mods.intersection(&frame_vars).collect();
                if !clash.is_empty() {
                    let names: Vec<&str> = clash.iter().map(|s| s.as_str()).collect();
                    fail!(
                        "the framed assertion reads {{{}}}, which the program may modify{}",
                        names.join(", "),
                        if cmd.contains_while() && !child_ok {
                            " (a loop without an accepted termination certificate widens to \
                             every program variable)"
                        } else if cmd.contains_while() {
                            " (loops without termination certificates widen to every program \
                             variable)"
                        } else {
                            ""
                        }
                    );
                }
                obligations.push(Obligation {
                    description: format!("mod(C) does not meet fv({frame})"),
                    how: DischargeKind::Structural,
                });
                Flow::Ok
            }
            RuleTag::IfJoinProb => {
                let Cmd::If(guard, c1, c2) = cmd else {
                    fail!("IfJoinProb applied to `{cmd}`");
                };
                try_flow!(expect_children(node, 2));
                let Assertion::OPlus(p, phi1, phi2) = pre else {
                    fail!("IfJoinProb requires a `(+ p)` precondition; got `{pre}`");
                };
                let Assertion::OPlus(q, psi1, psi2) = post else {
                    fail!("IfJoinProb requires a `(+ p)` postcondition; got `{post}`");
                };
                if p != q {
                    fail!("IfJoinProb weights differ: {p} vs {q}");
                }
                try_flow!(self.implication_obligation(
                    "left precondition selects the true branch",
                    phi1,
                    &Assertion::Almost(guard.clone()),
                    obligations,
                ));
                try_flow!(self.implication_obligation(
                    "right precondition selects the false branch",
                    phi2,
                    &Assertion::Almost(Exp::not(guard.clone())),
                    obligations,
                ));
                self.check_node(&node.children[0], c1, phi1, psi1, format!("{path}.0"));
                self.check_node(&node.children[1], c2, phi2, psi2, format!("{path}.1"));
                Flow::Ok
            }
            RuleTag::IfJoinNd => {
                let Cmd::If(guard, c1, c2) = cmd else {
                    fail!("IfJoinND applied to `{cmd}`");
                };
                try_flow!(expect_children(node, 2));
                let Assertion::Amp(phi1, phi2) = pre else {
                    fail!("IfJoinND requires an `&` precondition; got `{pre}`");
                };
                let Assertion::Amp(psi1, psi2) = post else {
                    fail!("IfJoinND requires an `&` postcondition; got `{post}`");
                };
                try_flow!(self.implication_obligation(
                    "left precondition selects the true branch",
                    phi1,
                    &Assertion::Almost(guard.clone()),
                    obligations,
                ));
                try_flow!(self.implication_obligation(
                    "right precondition selects the false branch",
                    phi2,
                    &Assertion::Almost(Exp::not(guard.clone())),
                    obligations,
                ));
                self.check_node(&node.children[0], c1, phi1, psi1, format!("{path}.0"));
                self.check_node(&node.children[1], c2, phi2, psi2, format!("{path}.1"));
                Flow::Ok
            }
            RuleTag::IfHoare => {
                let Cmd::If(guard, c1, c2) = cmd else {
                    fail!("IfHoare applied to `{cmd}`");
                };
                try_flow!(expect_children(node, 2));
                let Assertion::Almost(p) = pre else {
                    fail!("IfHoare requires a `[P]` precondition; got `{pre}`");
                };
                let pre_true =
                    Assertion::Almost(Exp::binary(BinOp::And, p.clone(), guard.clone()));
                let pre_false = Assertion::Almost(Exp::binary(
                    BinOp::And,
                    p.clone(),
                    Exp::not(guard.clone()),
                ));
                self.check_node(&node.children[0], c1, &pre_true, post, format!("{path}.0"));
                self.check_node(&node.children[1], c2, &pre_false, post, format!("{path}.1"));
                Flow::Ok
            }
            RuleTag::Flip => {
                // Matches the expansion of `x := flip(e)`.
                let Cmd::ProbChoice(e, c1, c2) = cmd else {
                    fail!("Flip applied to `{cmd}`, which is not a coin-flip expansion");
                };
                let (Cmd::Assign(x1, Exp::Bool(true)), Cmd::Assign(x2, Exp::Bool(false))) =
                    (c1.as_ref(), c2.as_ref())
                else {
                    fail!("Flip applied to `{cmd}`, which is not a coin-flip expansion");
                };
                if x1 != x2 {
                    fail!("Flip branches assign different variables");
                }
                try_flow!(expect_children(node, 0));
                let p = try_flow!(field_rat(try_flow!(required(node, "p"))));
                let mut vars = std::collections::BTreeSet::new();
                pre.free_vars(&mut vars);
                if vars.contains(x1) {
                    fail!("Flip requires `{x1}` not to occur in the precondition `{pre}`");
                }
                try_flow!(self.prob_expression_obligation(e, &p, pre, obligations));
                let expected = Assertion::and(
                    pre.clone(),
                    Assertion::oplus(
                        p,
                        Assertion::Almost(Exp::binary(
                            BinOp::Eq,
                            Exp::Var(x1.clone()),
                            Exp::Bool(true),
                        )),
                        Assertion::Almost(Exp::binary(
                            BinOp::Eq,
                            Exp::Var(x1.clone()),
                            Exp::Bool(false),
                        )),
                    ),
                );
                if post != &expected {
                    fail!("Flip concludes `{expected}`; got `{post}`");
                }
                Flow::Ok
            }
            RuleTag::NdSelect => {
                // Matches the expansion of `x <- {v1, .., vn}`.
                try_flow!(expect_children(node, 0));
                let options = try_flow!(collect_select(cmd));
                if pre != &Assertion::Almost(Exp::Bool(true)) {
                    fail!("NDSelect requires the precondition `[true]`; got `{pre}`");
                }
                let (x, vals) = options;
                let parts: Vec<Assertion> = vals
                    .iter()
                    .map(|v| {
                        Assertion::Almost(Exp::binary(
                            BinOp::Eq,
                            Exp::Var(x.clone()),
                            Exp::lit(v),
                        ))
                    })
                    .collect();
                let expected = amp_chain_left(&parts);
                if post != &expected {
                    fail!("NDSelect concludes `{expected}`; got `{post}`");
                }
                Flow::Ok
            }
            RuleTag::ZeroOne => self.check_zero_one(node, cmd, pre, post, path, obligations),
            RuleTag::BoundedVariant => {
                self.check_bounded_variant(node, cmd, pre, post, path, obligations)
            }
            RuleTag::BoundedRank => self.check_bounded_rank(node, cmd, pre, post, obligations),
            RuleTag::ProgressingRank => {
                self.check_progressing_rank(node, cmd, pre, post, obligations)
            }
        }
    }

    // ---- loop rules ----

    fn check_zero_one(
        &mut self,
        node: &Derivation,
        cmd: &Cmd,
        pre: &Assertion,
        post: &Assertion,
        path: &str,
        obligations: &mut Vec<Obligation>,
    ) -> Flow {
        let Cmd::While(guard, body) = cmd else {
            fail!("ZeroOne applied to `{cmd}`");
        };
        let inv = try_flow!(field_assertion(try_flow!(required(node, "inv"))));
        let exit = try_flow!(field_assertion(try_flow!(required(node, "exit"))));
        let p = try_flow!(field_rat(try_flow!(required(node, "p"))));
        if !p.is_positive() {
            fail!("ZeroOne needs p > 0; got {p}");
        }
        if pre != &inv {
            fail!("ZeroOne concludes from the invariant `{inv}`; the precondition is `{pre}`");
        }
        if post != &exit {
            fail!("ZeroOne concludes the exit assertion `{exit}`; the postcondition is `{post}`");
        }
        try_flow!(self.implication_obligation(
            "invariant implies the guard",
            &inv,
            &Assertion::Almost(guard.clone()),
            obligations,
        ));
        try_flow!(self.implication_obligation(
            "exit assertion implies the negated guard",
            &exit,
            &Assertion::Almost(Exp::not(guard.clone())),
            obligations,
        ));
        // Invariance premise: {inv} body {inv & exit}.
        let premise_post = Assertion::amp(inv.clone(), exit.clone());
        if let Some(child) = node.children.first() {
            if node.children.len() != 1 {
                fail!("ZeroOne takes at most one sub-derivation (the invariance premise)");
            }
            self.check_node(child, body, &inv, &premise_post, format!("{path}.0"));
        } else {
            try_flow!(self.semantic_premise(
                "invariance premise",
                &inv,
                body,
                &premise_post,
                obligations,
            ));
        }
        // Termination premise via value iteration over the declared space.
        try_flow!(self.minterm_obligation(guard, body, &p, obligations));
        self.certified_loops.insert(cmd as *const Cmd as usize);
        Flow::Ok
    }

    fn check_bounded_variant(
        &mut self,
        node: &Derivation,
        cmd: &Cmd,
        pre: &Assertion,
        post: &Assertion,
        path: &str,
        obligations: &mut Vec<Obligation>,
    ) -> Flow {
        let Cmd::While(guard, body) = cmd else {
            fail!("BoundedVariant applied to `{cmd}`");
        };
        let p = try_flow!(field_rat(try_flow!(required(node, "p"))));
        if !p.is_positive() {
            fail!("BoundedVariant needs p > 0; got {p}");
        }
        let variants: Vec<Assertion> = {
            let mut v = Vec::new();
            for f in node.fields_named("variant") {
                v.push(try_flow!(field_assertion(f)));
            }
            v
        };
        if variants.len() < 2 {
            fail!(
                "BoundedVariant needs the variants phi_0..phi_N with N >= 1; got {}",
                variants.len()
            );
        }
        let top = variants.len() - 1;
        if post != &variants[0] {
            fail!(
                "BoundedVariant concludes `{}`; the postcondition is `{post}`",
                variants[0]
            );
        }
        let expected_pre = amp_chain_left(&variants);
        if pre != &expected_pre {
            fail!(
                "BoundedVariant concludes from `{expected_pre}`; the precondition is `{pre}`"
            );
        }
        try_flow!(self.implication_obligation(
            "variant 0 implies the negated guard",
            &variants[0],
            &Assertion::Almost(Exp::not(guard.clone())),
            obligations,
        ));
        for (n, phi) in variants.iter().enumerate().skip(1) {
            try_flow!(self.implication_obligation(
                &format!("variant {n} implies the guard"),
                phi,
                &Assertion::Almost(guard.clone()),
                obligations,
            ));
        }
        if !node.children.is_empty() && node.children.len() != top {
            fail!(
                "BoundedVariant takes either no sub-derivations or one per premise (got {}, \
                 need {top})",
                node.children.len()
            );
        }
        for n in 1..=top {
            let lower = amp_chain_left(&variants[..n]);
            let all = amp_chain_left(&variants);
            let premise_post = Assertion::oplus(p.clone(), lower, all);
            if let Some(child) = node.children.get(n - 1) {
                self.check_node(
                    child,
                    body,
                    &variants[n],
                    &premise_post,
                    format!("{path}.{}", n - 1),
                );
            } else {
                try_flow!(self.semantic_premise(
                    &format!("variant premise n = {n}"),
                    &variants[n],
                    body,
                    &premise_post,
                    obligations,
                ));
            }
        }
        self.certified_loops.insert(cmd as *const Cmd as usize);
        Flow::Ok
    }

    fn check_bounded_rank(
        &mut self,
        node: &Derivation,
        cmd: &Cmd,
        pre: &Assertion,
        post: &Assertion,
        obligations: &mut Vec<Obligation>,
    ) -> Flow {
        let Cmd::While(guard, body) = cmd else {
            fail!("BoundedRank applied to `{cmd}`");
        };
        try_flow!(expect_children(node, 0));
        let inv = try_flow!(field_atom(try_flow!(required(node, "inv"))));
        let rank = try_flow!(field_exp(try_flow!(required(node, "rank"))));
        let lo = try_flow!(field_int(try_flow!(required(node, "lo"))));
        let hi = try_flow!(field_int(try_flow!(required(node, "hi"))));
        let p = try_flow!(field_rat(try_flow!(required(node, "p"))));
        if !p.is_positive() {
            fail!("BoundedRank needs p > 0; got {p}");
        }
        if lo > hi {
            fail!("BoundedRank needs lo <= hi; got {lo} > {hi}");
        }
        if pre != &Assertion::Almost(inv.clone()) {
            fail!("BoundedRank concludes from `[{inv}]`; the precondition is `{pre}`");
        }
        let expected_post = Assertion::Almost(Exp::binary(
            BinOp::And,
            inv.clone(),
            Exp::not(guard.clone()),
        ));
        if post != &expected_post {
            fail!("BoundedRank concludes `{expected_post}`; the postcondition is `{post}`");
        }
        // Rank bounds on guard-true invariant states.
        let inv_and_guard = Exp::binary(BinOp::And, inv.clone(), guard.clone());
        let bounds = Exp::binary(
            BinOp::And,
            Exp::binary(BinOp::Le, Exp::Num(Rat::from(lo.clone())), rank.clone()),
            Exp::binary(BinOp::Le, rank.clone(), Exp::Num(Rat::from(hi.clone()))),
        );
        try_flow!(self.implication_obligation(
            "rank bounded while the loop runs",
            &Assertion::Almost(inv_and_guard.clone()),
            &Assertion::Almost(bounds),
            obligations,
        ));
        // One premise per rank value.
        let mut n = lo.clone();
        while n <= hi {
            let pre_atom = Exp::binary(
                BinOp::And,
                inv_and_guard.clone(),
                Exp::binary(BinOp::Eq, rank.clone(), Exp::Num(Rat::from(n.clone()))),
            );
            let premise_post = Assertion::oplus(
                p.clone(),
                Assertion::Almost(Exp::binary(
                    BinOp::And,
                    inv.clone(),
                    Exp::binary(BinOp::Lt, rank.clone(), Exp::Num(Rat::from(n.clone()))),
                )),
                Assertion::Almost(inv.clone()),
            );
            try_flow!(self.semantic_premise(
                &format!("rank premise at rank = {n}"),
                &Assertion::Almost(pre_atom),
                body,
                &premise_post,
                obligations,
            ));
            n += 1;
        }
        self.certified_loops.insert(cmd as *const Cmd as usize);
        Flow::Ok
    }

    fn check_progressing_rank(
        &mut self,
        node: &Derivation,
        cmd: &Cmd,
        pre: &Assertion,
        post: &Assertion,
        obligations: &mut Vec<Obligation>,
    ) -> Flow {
        let Cmd::While(guard, body) = cmd else {
            fail!("ProgressingRank applied to `{cmd}`");
        };
        try_flow!(expect_children(node, 0));
        let inv = try_flow!(field_atom(try_flow!(required(node, "inv"))));
        let rank = try_flow!(field_exp(try_flow!(required(node, "rank"))));
        // Constant p/d, or a tabulated antitone schedule `row: k, p, d`.
        let mut schedule: Vec<(Rat, Rat, Rat)> = Vec::new();
        for f in node.fields_named("row") {
            schedule.push(try_flow!(field_rat_triple(f)));
        }
        let constant = if schedule.is_empty() {
            let p = try_flow!(field_rat(try_flow!(required(node, "p"))));
            let d = try_flow!(field_rat(try_flow!(required(node, "d"))));
            Some((p, d))
        } else {
            schedule.sort_by(|a, b| a.0.cmp(&b.0));
            for w in schedule.windows(2) {
                if w[1].1 > w[0].1 || w[1].2 > w[0].2 {
                    fail!(
                        "ProgressingRank schedule must be antitone: p and d may not increase \
                         with the rank"
                    );
                }
            }
            None
        };
        let check_pd = |p: &Rat, d: &Rat| -> Result<(), String> {
            if !p.is_positive() || p > &rat_int(1) {
                return Err(format!("ProgressingRank needs 0 < p <= 1; got {p}"));
            }
            if !d.is_positive() {
                return Err(format!("ProgressingRank needs d > 0; got {d}"));
            }
            Ok(())
        };
        if let Some((p, d)) = &constant {
            try_flow!(check_pd(p, d));
        }
        for (_, p, d) in &schedule {
            try_flow!(check_pd(p, d));
        }
        if pre != &Assertion::Almost(inv.clone()) {
            fail!("ProgressingRank concludes from `[{inv}]`; the precondition is `{pre}`");
        }
        let expected_post = Assertion::Almost(Exp::binary(
            BinOp::And,
            inv.clone(),
            Exp::not(guard.clone()),
        ));
        if post != &expected_post {
            fail!("ProgressingRank concludes `{expected_post}`; the postcondition is `{post}`");
        }
        // Realized rank values over the declared space.
        let states = try_flow!(self.declared_states());
        let inv_and_guard = Exp::binary(BinOp::And, inv.clone(), guard.clone());
        let mut ranks: Vec<Rat> = Vec::new();
        for s in &states {
            let live = try_flow!(eval_bool(&inv_and_guard, s).map_err(|e| e.to_string()));
            if !live {
                continue;
            }
            match try_flow!(eval_exp(&rank, s).map_err(|e| e.to_string())) {
                Value::Num(k) => {
                    if k.is_negative() {
                        fail!("rank is negative ({k}) at state {{{s}}}");
                    }
                    if !ranks.contains(&k) {
                        ranks.push(k);
                    }
                }
                other => fail!(
                    "rank evaluates to a {} at state {{{s}}}",
                    other.type_name()
                ),
            }
        }
        ranks.sort();
        for k in &ranks {
            let (p, d) = match &constant {
                Some((p, d)) => (p.clone(), d.clone()),
                None => match schedule.iter().find(|(rk, _, _)| rk == k) {
                    Some((_, p, d)) => (p.clone(), d.clone()),
                    None => fail!("no schedule row for realized rank {k}"),
                },
            };
            let pre_atom = Exp::binary(
                BinOp::And,
                inv_and_guard.clone(),
                Exp::binary(BinOp::Eq, rank.clone(), Exp::Num(k.clone())),
            );
            let left = Assertion::Almost(Exp::binary(
                BinOp::And,
                inv.clone(),
                Exp::binary(BinOp::Le, rank.clone(), Exp::Num(k - &d)),
            ));
            // At p = 1 the right branch carries weight zero; any
            // satisfiable stand-in works, and [P] keeps it uniform.
            let right = if p.is_one() {
                Assertion::Almost(inv.clone())
            } else {
                let slack = &p / (Rat::one() - &p) * &d;
                Assertion::Almost(Exp::binary(
                    BinOp::And,
                    inv.clone(),
                    Exp::binary(BinOp::Le, rank.clone(), Exp::Num(k + &slack)),
                ))
            };
            let premise_post = Assertion::oplus(p.clone(), left, right);
            try_flow!(self.semantic_premise(
                &format!("progress premise at rank = {k}"),
                &Assertion::Almost(pre_atom),
                body,
                &premise_post,
                obligations,
            ));
        }
        self.certified_loops.insert(cmd as *const Cmd as usize);
        Flow::Ok
    }

    // ---- side-condition discharge ----

    /// `pre => [e = p]`, with a fast path for closed expressions.
    fn prob_expression_obligation(
        &mut self,
        e: &Exp,
        p: &Rat,
        pre: &Assertion,
        obligations: &mut Vec<Obligation>,
    ) -> Result<(), String> {
        let mut vars = std::collections::BTreeSet::new();
        e.free_vars(&mut vars);
        if vars.is_empty() {
            let vals: Vec<Value> = (0..self.table.len())
                .map(|i| match self.table.domain(i) {
                    Some(dom) => dom[0].clone(),
                    None => Value::Num(rat_int(0)),
                })
                .collect();
            let dummy = State::new(Arc::clone(&self.table), vals);
            match eval_exp(e, &dummy).map_err(|err| err.to_string())? {
                Value::Num(v) if &v == p => {
                    obligations.push(Obligation {
                        description: format!("probability expression `{e}` equals {p}"),
                        how: DischargeKind::Structural,
                    });
                    return Ok(());
                }
                Value::Num(v) => {
                    return Err(format!(
                        "probability expression `{e}` evaluates to {v}, not the stated {p}"
                    ))
                }
                other => {
                    return Err(format!(
                        "probability expression `{e}` evaluates to a {}",
                        other.type_name()
                    ))
                }
            }
        }
        self.implication_obligation(
            &format!("probability expression pins p = {p}"),
            pre,
            &Assertion::Almost(Exp::binary(BinOp::Eq, e.clone(), Exp::Num(p.clone()))),
            obligations,
        )
    }

    fn implication_obligation(
        &mut self,
        label: &str,
        phi: &Assertion,
        psi: &Assertion,
        obligations: &mut Vec<Obligation>,
    ) -> Result<(), String> {
        match implies(phi, psi, &self.table, &self.cfg.limits) {
            Implication::Proved(d) => {
                obligations.push(Obligation {
                    description: format!("{label}: `{phi}` implies `{psi}`"),
                    how: match d {
                        Discharge::Rewrite => DischargeKind::Rewrite,
                        Discharge::Polytope => DischargeKind::Polytope,
                    },
                });
                Ok(())
            }
            Implication::Refuted(w) => Err(format!(
                "{label}: `{phi}` does not imply `{psi}`; counterexample distribution:\n{w}"
            )),
            Implication::Unknown(reason) => {
                if self.cfg.strict {
                    Err(format!("{label}: implication undecided ({reason})"))
                } else {
                    obligations.push(Obligation {
                        description: format!(
                            "{label}: `{phi}` implies `{psi}` (undecided: {reason})"
                        ),
                        how: DischargeKind::Unknown,
                    });
                    Ok(())
                }
            }
        }
    }

    /// Discharge `{pre} body {post}` by exhaustive evaluation from every
    /// declared state satisfying the pre-atom. Complete for atomic
    /// preconditions: satisfaction is preserved by convex combination and
    /// by moving divergence mass upward, so the Dirac states cover all
    /// mixtures.
    fn semantic_premise(
        &mut self,
        label: &str,
        pre: &Assertion,
        body: &Cmd,
        post: &Assertion,
        obligations: &mut Vec<Obligation>,
    ) -> Result<(), String> {
        let Assertion::Almost(atom) = pre else {
            if self.cfg.strict {
                return Err(format!(
                    "{label}: premise has outcome structure in the precondition; provide a \
                     sub-derivation"
                ));
            }
            obligations.push(Obligation {
                description: format!(
                    "{label}: `{{{pre}}} ... {{{post}}}` (outcome precondition; provide a \
                     sub-derivation)"
                ),
                how: DischargeKind::Unknown,
            });
            return Ok(());
        };
        let states = self.declared_states()?;
        let mut checked = 0usize;
        for s in &states {
            if !eval_bool(atom, s).map_err(|e| e.to_string())? {
                continue;
            }
            checked += 1;
            let run = run_triple(body, &Dist::dirac(s.clone()), post, &self.cfg.engine)
                .map_err(|e| e.to_string())?;
            if let Some(counterexample) = run.failing.first() {
                if run.exact {
                    return Err(format!(
                        "{label}: from state {{{s}}} a resulting distribution violates \
                         `{post}`:\n{counterexample}"
                    ));
                }
                return Err(format!(
                    "{label}: from state {{{s}}} the loop approximation (residual {}) leaves \
                     `{post}` undecided; raise the budget",
                    run.residual
                ));
            }
            for succ in &run.reached {
                if !self.state_in_domains(succ) {
                    return Err(format!(
                        "{label}: execution from {{{s}}} reaches {{{succ}}}, which escapes the \
                         declared state space"
                    ));
                }
            }
        }
        obligations.push(Obligation {
            description: format!("{label}: checked from {checked} states"),
            how: DischargeKind::Semantic,
        });
        Ok(())
    }

    fn minterm_obligation(
        &mut self,
        guard: &Exp,
        body: &Cmd,
        p: &Rat,
        obligations: &mut Vec<Obligation>,
    ) -> Result<(), String> {
        if !self.table.fully_declared() {
            if self.cfg.strict {
                return Err(
                    "termination premise needs declared finite domains for value iteration"
                        .to_string(),
                );
            }
            obligations.push(Obligation {
                description: "termination premise: no declared domains, left open".to_string(),
                how: DischargeKind::Unknown,
            });
            return Ok(());
        }
        let states = self.declared_states()?;
        let bounds = min_termination_prob(body, guard, &states, self.cfg.minterm_iters, &self.cfg.engine)
            .map_err(|e| e.to_string())?;
        let (worst_state, worst) = bounds
            .iter()
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(s, b)| (s.clone(), b.clone()))
            .expect("nonempty state space");
        if &worst < p {
            return Err(format!(
                "termination premise not established: after {} rounds of value iteration the \
                 bound at {{{worst_state}}} is {worst} < {p}",
                self.cfg.minterm_iters
            ));
        }
        obligations.push(Obligation {
            description: format!(
                "termination probability at least {p} (value iteration, {} rounds)",
                self.cfg.minterm_iters
            ),
            how: DischargeKind::ValueIteration,
        });
        Ok(())
    }

    fn declared_states(&self) -> Result<Vec<State>, String> {
        if !self.table.fully_declared() {
            return Err("every variable needs a declared finite domain here".to_string());
        }
        enumerate_states(&self.table, self.cfg.state_cap)
            .ok_or_else(|| format!("state space exceeds the cap of {}", self.cfg.state_cap))
    }

    fn state_in_domains(&self, s: &State) -> bool {
        (0..self.table.len()).all(|i| match self.table.domain(i) {
            Some(dom) => dom.contains(s.get(i)),
            None => true,
        })
    }
}

// ---- semantic triple checking ----

/// A triple to check semantically.
#[derive(Debug, Clone)]
pub struct Triple {
    pub pre: Assertion,
    pub cmd: Cmd,
    pub post: Assertion,
}

#[derive(Debug, Clone)]
pub enum WitnessVerdict {
    Accepted,
    /// Divergence mass remains and some generator fails the post, so
    /// deeper unrolling could still decide either way.
    Approximate { residual: Rat },
    Rejected { counterexamples: Vec<Dist> },
    PreconditionFailed,
}

impl WitnessVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, WitnessVerdict::Accepted)
    }
}

struct TripleRun {
    failing: Vec<Dist>,
    residual: Rat,
    exact: bool,
    reached: Vec<State>,
}

fn run_triple(
    cmd: &Cmd,
    mu: &Dist,
    post: &Assertion,
    engine: &EngineConfig,
) -> Result<TripleRun, SemanticsError> {
    let start = ConvexSet::from_generators(vec![mu.clone()]);
    let mut exact = true;
    let result = start.kleisli(&engine.caps, |sigma| {
        let r = denote(cmd, sigma, engine)?;
        exact &= r.exact;
        Ok::<ConvexSet, SemanticsError>(r.value)
    })?;
    let mut failing = Vec::new();
    let mut reached = Vec::new();
    for g in result.generators() {
        for (s, _) in g.proper_support() {
            if !reached.contains(s) {
                reached.push(s.clone());
            }
        }
        if !satisfies(g, post)? {
            failing.push(g.clone());
        }
    }
    Ok(TripleRun {
        failing,
        residual: result.residual_bound(),
        exact,
        reached,
    })
}

/// Check a triple against the denotational semantics, one verdict per
/// witness distribution. Generator checking is sound for the whole
/// up-closed hull because satisfaction is closed under convex combination
/// and the pointwise order.
pub fn check_triple_semantic(
    triple: &Triple,
    witnesses: &[Dist],
    engine: &EngineConfig,
) -> Result<Vec<WitnessVerdict>, SemanticsError> {
    let mut out = Vec::with_capacity(witnesses.len());
    for mu in witnesses {
        if !satisfies(mu, &triple.pre)? {
            out.push(WitnessVerdict::PreconditionFailed);
            continue;
        }
        let run = run_triple(&triple.cmd, mu, &triple.post, engine)?;
        out.push(if run.failing.is_empty() {
            WitnessVerdict::Accepted
        } else if run.exact || run.residual.is_zero() {
            WitnessVerdict::Rejected {
                counterexamples: run.failing,
            }
        } else {
            WitnessVerdict::Approximate {
                residual: run.residual,
            }
        });
    }
    Ok(out)
}

/// The standard witness battery: a Dirac distribution per declared state
/// (up to `max_states`), plus `mixtures` random small mixtures drawn from
/// a seeded generator.
pub fn witness_battery(
    table: &Arc<VarTable>,
    seed: u64,
    mixtures: usize,
    max_states: usize,
) -> Vec<Dist> {
    let Some(states) = enumerate_states(table, max_states) else {
        return Vec::new();
    };
    let mut out: Vec<Dist> = states.iter().cloned().map(Dist::dirac).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..mixtures {
        let k = rng.random_range(2..=4.min(states.len().max(2)));
        let mut picks: Vec<State> = Vec::new();
        for _ in 0..k {
            picks.push(states[rng.random_range(0..states.len())].clone());
        }
        // Random composition of 8 into k parts.
        let mut cuts: Vec<u32> = (0..k - 1).map(|_| rng.random_range(0..=8)).collect();
        cuts.sort_unstable();
        cuts.insert(0, 0);
        cuts.push(8);
        let pairs: Vec<(Outcome, Rat)> = picks
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                (
                    Outcome::Proper(s),
                    Rat::new(BigInt::from(cuts[i + 1] - cuts[i]), BigInt::from(8)),
                )
            })
            .collect();
        if let Ok(d) = Dist::from_pairs(pairs) {
            out.push(d);
        }
    }
    out
}

// ---- field parsing helpers ----

fn required<'a>(node: &'a Derivation, key: &str) -> Result<&'a RawField, String> {
    node.field(key)
        .ok_or_else(|| format!("rule {} is missing the field `{key}`", node.rule))
}

fn expect_children(node: &Derivation, n: usize) -> Result<(), String> {
    if node.children.len() == n {
        Ok(())
    } else {
        Err(format!(
            "rule {} takes {n} sub-derivation(s); found {}",
            node.rule,
            node.children.len()
        ))
    }
}

fn field_assertion(f: &RawField) -> Result<Assertion, String> {
    parse_assertion(&f.value).map_err(|e| format!("line {}: field `{}`: {e}", f.line, f.key))
}

fn field_atom(f: &RawField) -> Result<Atom, String> {
    parse_atom(&f.value).map_err(|e| format!("line {}: field `{}`: {e}", f.line, f.key))
}

fn field_exp(f: &RawField) -> Result<Exp, String> {
    parse_exp(&f.value).map_err(|e| format!("line {}: field `{}`: {e}", f.line, f.key))
}

fn field_rat(f: &RawField) -> Result<Rat, String> {
    parse_rat(&f.value).ok_or_else(|| {
        format!(
            "line {}: field `{}`: expected a rational, found `{}`",
            f.line, f.key, f.value
        )
    })
}

fn field_int(f: &RawField) -> Result<BigInt, String> {
    f.value.trim().parse().map_err(|_| {
        format!(
            "line {}: field `{}`: expected an integer, found `{}`",
            f.line, f.key, f.value
        )
    })
}

fn field_rat_triple(f: &RawField) -> Result<(Rat, Rat, Rat), String> {
    let parts: Vec<&str> = f.value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!(
            "line {}: field `row` takes `k, p, d`; found `{}`",
            f.line, f.value
        ));
    }
    match (parse_rat(parts[0]), parse_rat(parts[1]), parse_rat(parts[2])) {
        (Some(k), Some(p), Some(d)) => Ok((k, p, d)),
        _ => Err(format!("line {}: field `row`: malformed rationals", f.line)),
    }
}

fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (neg, s) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let r = match s.split_once('/') {
        Some((a, b)) => {
            let num: BigInt = a.trim().parse().ok()?;
            let den: BigInt = b.trim().parse().ok()?;
            if den.is_zero() {
                return None;
            }
            Rat::new(num, den)
        }
        None => Rat::from(s.parse::<BigInt>().ok()?),
    };
    Some(if neg { -r } else { r })
}

/// Left-associated `&` chain, matching the parse of `a & b & c`.
fn amp_chain_left(parts: &[Assertion]) -> Assertion {
    let mut iter = parts.iter();
    let mut acc = iter.next().expect("nonempty").clone();
    for p in iter {
        acc = Assertion::amp(acc, p.clone());
    }
    acc
}

/// Match a left-associated chain of literal assignments to one variable,
/// as produced by `x <- {v1, .., vn}`.
fn collect_select(cmd: &Cmd) -> Result<(String, Vec<Value>), String> {
    fn literal(e: &Exp) -> Option<Value> {
        match e {
            Exp::Bool(b) => Some(Value::Bool(*b)),
            Exp::Num(r) => Some(Value::Num(r.clone())),
            Exp::Unary(UnOp::Neg, inner) => match literal(inner) {
                Some(Value::Num(r)) => Some(Value::Num(-r)),
                _ => None,
            },
            Exp::List(items) => items
                .iter()
                .map(literal)
                .collect::<Option<Vec<_>>>()
                .map(Value::List),
            _ => None,
        }
    }
    fn go(cmd: &Cmd, out: &mut Vec<(String, Value)>) -> Result<(), String> {
        match cmd {
            Cmd::NdChoice(a, b) => {
                go(a, out)?;
                go(b, out)
            }
            Cmd::Assign(x, e) => match literal(e) {
                Some(v) => {
                    out.push((x.clone(), v));
                    Ok(())
                }
                None => Err(format!(
                    "NDSelect expects literal assignments; `{cmd}` is not one"
                )),
            },
            other => Err(format!(
                "NDSelect applies to a chain of `&`-assignments; found `{other}`"
            )),
        }
    }
    let mut pairs = Vec::new();
    go(cmd, &mut pairs)?;
    let x = pairs[0].0.clone();
    if pairs.iter().any(|(y, _)| y != &x) {
        return Err("NDSelect expects every branch to assign the same variable".to_string());
    }
    Ok((x, pairs.into_iter().map(|(_, v)| v).collect()))
}
