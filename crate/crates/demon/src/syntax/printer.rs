//! Display impls producing concrete syntax that re-parses to the same
//! tree (for parser-canonical trees: nonnegative integer literals, sugar
//! already expanded).

use std::fmt;

use super::ast::{Assertion, BinOp, Cmd, Exp, UnOp};

// Expression precedence levels, loosest first.
const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_CMP: u8 = 3;
const P_ADD: u8 = 4;
const P_MUL: u8 = 5;
const P_UNARY: u8 = 6;
const P_POSTFIX: u8 = 7;

fn exp_level(e: &Exp) -> u8 {
    match e {
        Exp::Binary(op, ..) => match op {
            BinOp::Or => P_OR,
            BinOp::And => P_AND,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Xnor => {
                P_CMP
            }
            BinOp::Add | BinOp::Sub => P_ADD,
            BinOp::Mul | BinOp::Div => P_MUL,
        },
        Exp::Unary(UnOp::Iverson, _) => P_POSTFIX,
        Exp::Unary(..) => P_UNARY,
        Exp::Index(..) | Exp::Update(..) => P_POSTFIX,
        Exp::Bool(_) | Exp::Num(_) | Exp::Var(_) | Exp::List(_) => P_POSTFIX,
    }
}

fn write_exp(f: &mut fmt::Formatter<'_>, e: &Exp, min_level: u8) -> fmt::Result {
    let level = exp_level(e);
    let parens = level < min_level;
    if parens {
        write!(f, "(")?;
    }
    match e {
        Exp::Bool(b) => write!(f, "{b}")?,
        Exp::Num(r) => write!(f, "{r}")?,
        Exp::Var(x) => write!(f, "{x}")?,
        Exp::List(items) => {
            write!(f, "<<")?;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_exp(f, item, 0)?;
            }
            write!(f, ">>")?;
        }
        Exp::Unary(UnOp::Iverson, inner) => {
            write!(f, "[")?;
            write_exp(f, inner, 0)?;
            write!(f, "]")?;
        }
        Exp::Unary(UnOp::Not, inner) => {
            write!(f, "!")?;
            write_exp(f, inner, P_UNARY)?;
        }
        Exp::Unary(UnOp::Neg, inner) => {
            write!(f, "-")?;
            write_exp(f, inner, P_UNARY)?;
        }
        Exp::Binary(op, a, b) => {
            let (la, lb) = match op {
                // Comparisons are non-associative.
                BinOp::Eq
                | BinOp::Ne
                | BinOp::Lt
                | BinOp::Le
                | BinOp::Gt
                | BinOp::Ge
                | BinOp::Xnor => (level + 1, level + 1),
                _ => (level, level + 1),
            };
            write_exp(f, a, la)?;
            write!(f, " {} ", op.symbol())?;
            write_exp(f, b, lb)?;
        }
        Exp::Index(a, idx) => {
            write_exp(f, a, P_POSTFIX)?;
            write!(f, "[")?;
            write_exp(f, idx, 0)?;
            write!(f, "]")?;
        }
        Exp::Update(a, idx, val) => {
            write_exp(f, a, P_POSTFIX)?;
            write!(f, "[")?;
            write_exp(f, idx, 0)?;
            write!(f, " -> ")?;
            write_exp(f, val, 0)?;
            write!(f, "]")?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_exp(f, self, 0)
    }
}

// Command levels: seq < nd < prob < atom.
const C_SEQ: u8 = 0;
const C_ND: u8 = 1;
const C_PROB: u8 = 2;
const C_ATOM: u8 = 3;

fn cmd_level(c: &Cmd) -> u8 {
    match c {
        Cmd::Seq(..) => C_SEQ,
        Cmd::NdChoice(..) => C_ND,
        Cmd::ProbChoice(..) => C_PROB,
        _ => C_ATOM,
    }
}

fn write_cmd(f: &mut fmt::Formatter<'_>, c: &Cmd, min_level: u8) -> fmt::Result {
    let level = cmd_level(c);
    let braces = level < min_level;
    if braces {
        write!(f, "{{ ")?;
    }
    match c {
        Cmd::Skip => write!(f, "skip")?,
        Cmd::Assign(x, e) => write!(f, "{x} := {e}")?,
        Cmd::Seq(a, b) => {
            write_cmd(f, a, C_ND)?;
            write!(f, "; ")?;
            write_cmd(f, b, C_SEQ)?;
        }
        Cmd::NdChoice(a, b) => {
            write_cmd(f, a, C_ND)?;
            write!(f, " & ")?;
            write_cmd(f, b, C_PROB)?;
        }
        Cmd::ProbChoice(p, a, b) => {
            write_cmd(f, a, C_ATOM)?;
            write!(f, " +[")?;
            write_exp(f, p, 0)?;
            write!(f, "] ")?;
            write_cmd(f, b, C_PROB)?;
        }
        Cmd::If(guard, t, e) => {
            write!(f, "if {guard} then {{ ")?;
            write_cmd(f, t, C_SEQ)?;
            write!(f, " }} else {{ ")?;
            write_cmd(f, e, C_SEQ)?;
            write!(f, " }}")?;
        }
        Cmd::While(guard, body) => {
            write!(f, "while {guard} do {{ ")?;
            write_cmd(f, body, C_SEQ)?;
            write!(f, " }}")?;
        }
    }
    if braces {
        write!(f, " }}")?;
    }
    Ok(())
}

impl fmt::Display for Cmd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_cmd(f, self, 0)
    }
}

// Assertion levels: amp < oplus < and < prim.
const A_AMP: u8 = 0;
const A_OPLUS: u8 = 1;
const A_AND: u8 = 2;
const A_PRIM: u8 = 3;

fn assertion_level(a: &Assertion) -> u8 {
    match a {
        Assertion::Amp(..) => A_AMP,
        Assertion::OPlus(..) => A_OPLUS,
        Assertion::And(..) => A_AND,
        _ => A_PRIM,
    }
}

fn write_assertion(f: &mut fmt::Formatter<'_>, a: &Assertion, min_level: u8) -> fmt::Result {
    let level = assertion_level(a);
    let parens = level < min_level;
    if parens {
        write!(f, "(")?;
    }
    match a {
        Assertion::Top => write!(f, "T")?,
        Assertion::Bot => write!(f, "F")?,
        Assertion::Almost(p) => {
            write!(f, "[")?;
            write_exp(f, p, 0)?;
            write!(f, "]")?;
        }
        Assertion::And(x, y) => {
            write_assertion(f, x, A_AND)?;
            write!(f, " /\\ ")?;
            write_assertion(f, y, A_AND + 1)?;
        }
        Assertion::OPlus(p, x, y) => {
            write_assertion(f, x, A_OPLUS + 1)?;
            write!(f, " (+ {p}) ")?;
            write_assertion(f, y, A_OPLUS)?;
        }
        Assertion::Amp(x, y) => {
            write_assertion(f, x, A_AMP)?;
            write!(f, " & ")?;
            write_assertion(f, y, A_AMP + 1)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_assertion(f, self, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse_assertion, parse_program};

    #[test]
    fn print_parse_round_trip_examples() {
        let sources = [
            "skip",
            "x := 1 +[1/2] x := 2",
            "x := 1 & x := 2 & x := 3",
            "while x > 0 do { x := x - 1; y := y + x }",
            "if x = 1 then { skip } else { x := <<1, 2>>[x] }",
            "x := xs[1 -> true][2]",
            "b := [x > 0] + 1",
        ];
        for src in sources {
            let prog = parse_program(src).unwrap();
            let printed = prog.cmd.to_string();
            let reparsed = parse_program(&printed).unwrap();
            assert_eq!(prog.cmd, reparsed.cmd, "source: {src}, printed: {printed}");
        }
    }

    #[test]
    fn assertion_round_trip_examples() {
        let sources = [
            "T",
            "[x=1] (+ 1/3) [x=2]",
            "([a=1] /\\ ([b=2] & [b=3])) (+ 1/3) ([a=2] (+ 1/2) [a=3])",
            "[x=1] & [x=2] & [x=3]",
        ];
        for src in sources {
            let a = parse_assertion(src).unwrap();
            let printed = a.to_string();
            let reparsed = parse_assertion(&printed).unwrap();
            assert_eq!(a, reparsed, "source: {src}, printed: {printed}");
        }
    }
}
