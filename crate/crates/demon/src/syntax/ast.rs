//! Abstract syntax for the guarded imperative language and for outcome
//! assertions. Choice sugar (`flip`, set choice, array assignment) is
//! expanded by the parser, so these trees contain only core forms.

use std::sync::Arc;

use crate::value::{Rat, Value, VarTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Xnor,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Xnor => "xnor",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Neg,
    Not,
    /// `[e]`: 1 if `e` holds, else 0.
    Iverson,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Exp {
    Bool(bool),
    Num(Rat),
    Var(String),
    List(Vec<Exp>),
    Unary(UnOp, Box<Exp>),
    Binary(BinOp, Box<Exp>, Box<Exp>),
    /// `e1[e2]`; an out-of-range index evaluates to 0.
    Index(Box<Exp>, Box<Exp>),
    /// `e1[e2 -> e3]`; out-of-range updates zero-fill the gap.
    Update(Box<Exp>, Box<Exp>, Box<Exp>),
}

impl Exp {
    pub fn var(name: &str) -> Exp {
        Exp::Var(name.to_string())
    }

    pub fn num_int(n: i64) -> Exp {
        Exp::Num(crate::value::rat_int(n))
    }

    pub fn lit(v: &Value) -> Exp {
        match v {
            Value::Bool(b) => Exp::Bool(*b),
            Value::Num(r) => Exp::Num(r.clone()),
            Value::List(items) => Exp::List(items.iter().map(Exp::lit).collect()),
        }
    }

    pub fn binary(op: BinOp, lhs: Exp, rhs: Exp) -> Exp {
        Exp::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn not(e: Exp) -> Exp {
        Exp::Unary(UnOp::Not, Box::new(e))
    }

    /// Collect the variables read by this expression.
    pub fn free_vars(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Exp::Bool(_) | Exp::Num(_) => {}
            Exp::Var(x) => {
                out.insert(x.clone());
            }
            Exp::List(items) => {
                for e in items {
                    e.free_vars(out);
                }
            }
            Exp::Unary(_, e) => e.free_vars(out),
            Exp::Binary(_, a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Exp::Index(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Exp::Update(a, b, c) => {
                a.free_vars(out);
                b.free_vars(out);
                c.free_vars(out);
            }
        }
    }

    /// Capture-free substitution of `e` for the variable `x`.
    pub fn substitute(&self, x: &str, e: &Exp) -> Exp {
        match self {
            Exp::Bool(_) | Exp::Num(_) => self.clone(),
            Exp::Var(y) => {
                if y == x {
                    e.clone()
                } else {
                    self.clone()
                }
            }
            Exp::List(items) => Exp::List(items.iter().map(|i| i.substitute(x, e)).collect()),
            Exp::Unary(op, a) => Exp::Unary(*op, Box::new(a.substitute(x, e))),
            Exp::Binary(op, a, b) => Exp::binary(*op, a.substitute(x, e), b.substitute(x, e)),
            Exp::Index(a, b) => Exp::Index(
                Box::new(a.substitute(x, e)),
                Box::new(b.substitute(x, e)),
            ),
            Exp::Update(a, b, c) => Exp::Update(
                Box::new(a.substitute(x, e)),
                Box::new(b.substitute(x, e)),
                Box::new(c.substitute(x, e)),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cmd {
    Skip,
    Assign(String, Exp),
    Seq(Box<Cmd>, Box<Cmd>),
    /// Nondeterministic choice `C1 & C2`, resolved by the scheduler.
    NdChoice(Box<Cmd>, Box<Cmd>),
    /// Probabilistic choice `C1 +[e] C2`; `e` must evaluate to p in [0,1].
    ProbChoice(Exp, Box<Cmd>, Box<Cmd>),
    If(Exp, Box<Cmd>, Box<Cmd>),
    While(Exp, Box<Cmd>),
}

impl Cmd {
    pub fn seq(a: Cmd, b: Cmd) -> Cmd {
        Cmd::Seq(Box::new(a), Box::new(b))
    }

    pub fn assign(x: &str, e: Exp) -> Cmd {
        Cmd::Assign(x.to_string(), e)
    }

    /// Variables assigned anywhere in the command, ignoring termination.
    /// See [`crate::staticcheck::modified_vars`] for the frame-rule variant
    /// that widens nonterminating commands to the full variable set.
    pub fn assigned_vars(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Cmd::Skip => {}
            Cmd::Assign(x, _) => {
                out.insert(x.clone());
            }
            Cmd::Seq(a, b) | Cmd::NdChoice(a, b) => {
                a.assigned_vars(out);
                b.assigned_vars(out);
            }
            Cmd::ProbChoice(_, a, b) | Cmd::If(_, a, b) => {
                a.assigned_vars(out);
                b.assigned_vars(out);
            }
            Cmd::While(_, body) => body.assigned_vars(out),
        }
    }

    pub fn contains_while(&self) -> bool {
        match self {
            Cmd::Skip | Cmd::Assign(..) => false,
            Cmd::Seq(a, b) | Cmd::NdChoice(a, b) => a.contains_while() || b.contains_while(),
            Cmd::ProbChoice(_, a, b) | Cmd::If(_, a, b) => {
                a.contains_while() || b.contains_while()
            }
            Cmd::While(..) => true,
        }
    }
}

/// An atom is a boolean-valued expression over a single state.
pub type Atom = Exp;

/// Outcome assertions over distributions of states.
///
/// There is deliberately no disjunction or existential at this level; the
/// algebraic laws used by the implication engine depend on their absence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assertion {
    Top,
    Bot,
    And(Box<Assertion>, Box<Assertion>),
    /// `phi (+ p) psi`: a split with exact weights p and 1-p.
    OPlus(Rat, Box<Assertion>, Box<Assertion>),
    /// `phi & psi`: a split with some adversarially chosen weight.
    Amp(Box<Assertion>, Box<Assertion>),
    /// `[P]`: the whole support satisfies P (so no divergence mass).
    Almost(Atom),
}

impl Assertion {
    pub fn almost(p: Atom) -> Assertion {
        Assertion::Almost(p)
    }

    pub fn and(a: Assertion, b: Assertion) -> Assertion {
        Assertion::And(Box::new(a), Box::new(b))
    }

    pub fn oplus(p: Rat, a: Assertion, b: Assertion) -> Assertion {
        assert!(
            !p.lt(&crate::value::rat_int(0)) && !p.gt(&crate::value::rat_int(1)),
            "outcome probability out of [0,1]"
        );
        Assertion::OPlus(p, Box::new(a), Box::new(b))
    }

    pub fn amp(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Amp(Box::new(a), Box::new(b))
    }

    /// Right-nested `&` over a nonempty list.
    pub fn amp_all(mut parts: Vec<Assertion>) -> Assertion {
        assert!(!parts.is_empty());
        let mut acc = parts.pop().unwrap();
        while let Some(p) = parts.pop() {
            acc = Assertion::amp(p, acc);
        }
        acc
    }

    pub fn contains_bot(&self) -> bool {
        match self {
            Assertion::Bot => true,
            Assertion::Top | Assertion::Almost(_) => false,
            Assertion::And(a, b) | Assertion::OPlus(_, a, b) | Assertion::Amp(a, b) => {
                a.contains_bot() || b.contains_bot()
            }
        }
    }

    /// Atoms occurring in the assertion, in syntactic order.
    pub fn atoms(&self, out: &mut Vec<Atom>) {
        match self {
            Assertion::Top | Assertion::Bot => {}
            Assertion::Almost(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            Assertion::And(a, b) | Assertion::OPlus(_, a, b) | Assertion::Amp(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
        }
    }

    pub fn free_vars(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Assertion::Top | Assertion::Bot => {}
            Assertion::Almost(p) => p.free_vars(out),
            Assertion::And(a, b) | Assertion::OPlus(_, a, b) | Assertion::Amp(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    /// Syntactic substitution inside atoms; the outcome structure is kept.
    pub fn substitute(&self, x: &str, e: &Exp) -> Assertion {
        match self {
            Assertion::Top => Assertion::Top,
            Assertion::Bot => Assertion::Bot,
            Assertion::Almost(p) => Assertion::Almost(p.substitute(x, e)),
            Assertion::And(a, b) => {
                Assertion::and(a.substitute(x, e), b.substitute(x, e))
            }
            Assertion::OPlus(p, a, b) => {
                Assertion::oplus(p.clone(), a.substitute(x, e), b.substitute(x, e))
            }
            Assertion::Amp(a, b) => {
                Assertion::amp(a.substitute(x, e), b.substitute(x, e))
            }
        }
    }
}

/// A parsed program: the desugared command, its variable table, and any
/// lint warnings emitted during parsing.
#[derive(Debug)]
pub struct Program {
    pub cmd: Cmd,
    pub table: Arc<VarTable>,
    pub warnings: Vec<String>,
}
