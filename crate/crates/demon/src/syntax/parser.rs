//! Recursive-descent parser for programs, expressions, and outcome
//! assertions.
//!
//! Concrete syntax, in brief (see `docs/language.md` for the full
//! reference):
//!
//! ```text
//! var x in {true, false};
//! var n in {0..5};
//! x := flip(1/2);
//! n <- {1, 2, 3};
//! while n > 0 do { n := n - 1 +[1/2] skip }
//! ```
//!
//! Sugar is expanded here: `x := flip(e)` becomes a probabilistic choice
//! between the two boolean assignments, `x <- {v1, .., vn}` becomes a
//! chain of `&`-choices over the literal assignments, and `x[i] := e`
//! becomes a whole-list update.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use thiserror::Error;

use super::ast::{Assertion, Atom, BinOp, Cmd, Exp, Program, UnOp};
use super::lexer::{tokenize, LexError, Pos, Token, TokenKind};
use crate::value::{Rat, Value, VarTable};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("at {pos}: expected {expected}, found {found}")]
    Unexpected {
        pos: Pos,
        expected: String,
        found: String,
    },
    #[error("at {pos}: duplicate declaration of variable `{name}`")]
    DuplicateVar { pos: Pos, name: String },
    #[error("at {pos}: {msg}")]
    Invalid { pos: Pos, msg: String },
}

pub type PResult<T> = Result<T, ParseError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    warnings: Vec<String>,
}

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            tokens: tokenize(src)?,
            pos: 0,
            warnings: Vec::new(),
        })
    }

    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_pos(&self) -> Pos {
        self.tokens[self.pos].pos
    }

    fn bump(&mut self) -> TokenKind {
        let t = self.tokens[self.pos].kind.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<()> {
        if self.peek() == &kind {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&kind.describe()))
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::Unexpected {
            pos: self.peek_pos(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            TokenKind::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn int(&mut self) -> PResult<BigInt> {
        match self.peek() {
            TokenKind::Int(s) => {
                let n: BigInt = s.parse().expect("lexer produced valid integer");
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("integer")),
        }
    }

    /// A literal rational: `int`, `int/int`, or either preceded by `-`.
    fn rational(&mut self) -> PResult<Rat> {
        let neg = self.eat(&TokenKind::Minus);
        let num = self.int()?;
        let den = if self.eat(&TokenKind::Slash) {
            let pos = self.peek_pos();
            let d = self.int()?;
            if d == BigInt::from(0) {
                return Err(ParseError::Invalid {
                    pos,
                    msg: "zero denominator in rational literal".into(),
                });
            }
            d
        } else {
            BigInt::from(1)
        };
        let r = Rat::new(num, den);
        Ok(if neg { -r } else { r })
    }

    /// A literal value, as used in domains and set choices.
    fn value_literal(&mut self) -> PResult<Value> {
        match self.peek().clone() {
            TokenKind::Ident(s) if s == "true" => {
                self.bump();
                Ok(Value::Bool(true))
            }
            TokenKind::Ident(s) if s == "false" => {
                self.bump();
                Ok(Value::Bool(false))
            }
            TokenKind::LList => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(&TokenKind::RList) {
                    loop {
                        items.push(self.value_literal()?);
                        if self.eat(&TokenKind::Comma) {
                            continue;
                        }
                        self.expect(TokenKind::RList)?;
                        break;
                    }
                }
                Ok(Value::List(items))
            }
            TokenKind::Int(_) | TokenKind::Minus => Ok(Value::Num(self.rational()?)),
            _ => Err(self.unexpected("value literal")),
        }
    }

    /// `{v1, v2, ...}` or `{lo..hi}`; nonempty.
    fn value_set(&mut self) -> PResult<Vec<Value>> {
        self.expect(TokenKind::LBrace)?;
        let first = self.value_literal()?;
        if self.eat(&TokenKind::DotDot) {
            let lo = match &first {
                Value::Num(r) if r.is_integer() => r.to_integer(),
                _ => {
                    return Err(ParseError::Invalid {
                        pos: self.peek_pos(),
                        msg: "range bounds must be integers".into(),
                    })
                }
            };
            let hi_rat = self.rational()?;
            if !hi_rat.is_integer() || hi_rat.to_integer() < lo {
                return Err(ParseError::Invalid {
                    pos: self.peek_pos(),
                    msg: "invalid integer range".into(),
                });
            }
            self.expect(TokenKind::RBrace)?;
            let hi = hi_rat.to_integer();
            let mut vals = Vec::new();
            let mut i = lo;
            while i <= hi {
                vals.push(Value::Num(Rat::from(i.clone())));
                i += 1;
            }
            return Ok(vals);
        }
        let mut vals = vec![first];
        while self.eat(&TokenKind::Comma) {
            vals.push(self.value_literal()?);
        }
        self.expect(TokenKind::RBrace)?;
        Ok(vals)
    }

    // ---- expressions ----

    fn exp(&mut self) -> PResult<Exp> {
        self.exp_or()
    }

    fn exp_or(&mut self) -> PResult<Exp> {
        let mut lhs = self.exp_and()?;
        while self.eat(&TokenKind::OrOr) {
            let rhs = self.exp_and()?;
            lhs = Exp::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn exp_and(&mut self) -> PResult<Exp> {
        let mut lhs = self.exp_cmp()?;
        while self.eat(&TokenKind::AndAnd) {
            let rhs = self.exp_cmp()?;
            lhs = Exp::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn exp_cmp(&mut self) -> PResult<Exp> {
        let lhs = self.exp_add()?;
        let op = match self.peek() {
            TokenKind::Eq => BinOp::Eq,
            TokenKind::Ne => BinOp::Ne,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::Ident(s) if s == "xnor" => BinOp::Xnor,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.exp_add()?;
        Ok(Exp::binary(op, lhs, rhs))
    }

    fn exp_add(&mut self) -> PResult<Exp> {
        let mut lhs = self.exp_mul()?;
        loop {
            let op = match self.peek() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.exp_mul()?;
            lhs = Exp::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn exp_mul(&mut self) -> PResult<Exp> {
        let mut lhs = self.exp_unary()?;
        loop {
            let op = match self.peek() {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.exp_unary()?;
            if op == BinOp::Div {
                if let Exp::Num(r) = &rhs {
                    if r.numer() == &BigInt::from(0) {
                        self.warnings
                            .push("division by literal zero evaluates to 0".into());
                    }
                }
            }
            lhs = Exp::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn exp_unary(&mut self) -> PResult<Exp> {
        if self.eat(&TokenKind::Bang) {
            return Ok(Exp::Unary(UnOp::Not, Box::new(self.exp_unary()?)));
        }
        if self.eat(&TokenKind::Minus) {
            return Ok(Exp::Unary(UnOp::Neg, Box::new(self.exp_unary()?)));
        }
        self.exp_postfix()
    }

    fn exp_postfix(&mut self) -> PResult<Exp> {
        let mut e = self.exp_primary()?;
        while self.eat(&TokenKind::LBracket) {
            let idx = self.exp()?;
            if self.eat(&TokenKind::Arrow) {
                let val = self.exp()?;
                self.expect(TokenKind::RBracket)?;
                e = Exp::Update(Box::new(e), Box::new(idx), Box::new(val));
            } else {
                self.expect(TokenKind::RBracket)?;
                e = Exp::Index(Box::new(e), Box::new(idx));
            }
        }
        Ok(e)
    }

    fn exp_primary(&mut self) -> PResult<Exp> {
        match self.peek().clone() {
            TokenKind::Int(_) => {
                let n = self.int()?;
                Ok(Exp::Num(Rat::from(n)))
            }
            TokenKind::Ident(s) if s == "true" => {
                self.bump();
                Ok(Exp::Bool(true))
            }
            TokenKind::Ident(s) if s == "false" => {
                self.bump();
                Ok(Exp::Bool(false))
            }
            TokenKind::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Exp::Var(s))
            }
            TokenKind::LParen => {
                self.bump();
                let e = self.exp()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            TokenKind::LBracket => {
                self.bump();
                let e = self.exp()?;
                self.expect(TokenKind::RBracket)?;
                Ok(Exp::Unary(UnOp::Iverson, Box::new(e)))
            }
            TokenKind::LList => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(&TokenKind::RList) {
                    loop {
                        items.push(self.exp()?);
                        if self.eat(&TokenKind::Comma) {
                            continue;
                        }
                        self.expect(TokenKind::RList)?;
                        break;
                    }
                }
                Ok(Exp::List(items))
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    // ---- commands ----

    fn cmd_seq(&mut self) -> PResult<Cmd> {
        let first = self.cmd_nd()?;
        if self.eat(&TokenKind::Semi) {
            if self.seq_continues() {
                let rest = self.cmd_seq()?;
                return Ok(Cmd::seq(first, rest));
            }
        }
        Ok(first)
    }

    /// A command follows iff the next token can begin one (permits a
    /// trailing semicolon before `}` or end of input).
    fn seq_continues(&self) -> bool {
        match self.peek() {
            TokenKind::Ident(s) => !is_keyword(s) || matches!(s.as_str(), "skip" | "if" | "while"),
            TokenKind::LBrace | TokenKind::LParen => true,
            _ => false,
        }
    }

    fn cmd_nd(&mut self) -> PResult<Cmd> {
        let mut lhs = self.cmd_prob()?;
        while self.eat(&TokenKind::Amp) {
            let rhs = self.cmd_prob()?;
            lhs = Cmd::NdChoice(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmd_prob(&mut self) -> PResult<Cmd> {
        let lhs = self.cmd_atom()?;
        match self.peek() {
            TokenKind::PlusLBracket => {
                self.bump();
                let p = self.exp()?;
                self.expect(TokenKind::RBracket)?;
                let rhs = self.cmd_prob()?;
                Ok(Cmd::ProbChoice(p, Box::new(lhs), Box::new(rhs)))
            }
            TokenKind::OPlusOpen => {
                self.bump();
                let p = self.exp()?;
                self.expect(TokenKind::RParen)?;
                let rhs = self.cmd_prob()?;
                Ok(Cmd::ProbChoice(p, Box::new(lhs), Box::new(rhs)))
            }
            _ => Ok(lhs),
        }
    }

    fn cmd_atom(&mut self) -> PResult<Cmd> {
        if self.eat_kw("skip") {
            return Ok(Cmd::Skip);
        }
        if self.eat_kw("if") {
            let guard = self.exp()?;
            self.expect_kw("then")?;
            let then_branch = self.cmd_block()?;
            self.expect_kw("else")?;
            let else_branch = self.cmd_block()?;
            return Ok(Cmd::If(guard, Box::new(then_branch), Box::new(else_branch)));
        }
        if self.eat_kw("while") {
            let guard = self.exp()?;
            self.expect_kw("do")?;
            let body = self.cmd_block()?;
            return Ok(Cmd::While(guard, Box::new(body)));
        }
        if self.eat(&TokenKind::LBrace) {
            let c = self.cmd_seq()?;
            self.expect(TokenKind::RBrace)?;
            return Ok(c);
        }
        if self.eat(&TokenKind::LParen) {
            let c = self.cmd_seq()?;
            self.expect(TokenKind::RParen)?;
            return Ok(c);
        }
        // Assignment forms.
        let name = self.ident()?;
        match self.peek() {
            TokenKind::Assign => {
                self.bump();
                if self.is_kw("flip") {
                    self.bump();
                    self.expect(TokenKind::LParen)?;
                    let p = self.exp()?;
                    self.expect(TokenKind::RParen)?;
                    return Ok(desugar_flip(&name, p));
                }
                let e = self.exp()?;
                Ok(Cmd::Assign(name, e))
            }
            TokenKind::LeftArrow => {
                self.bump();
                let vals = self.value_set()?;
                Ok(desugar_set_choice(&name, &vals))
            }
            TokenKind::LBracket => {
                // Array-style update sugar: x[i] := e, x[i] := flip(e).
                self.bump();
                let idx = self.exp()?;
                self.expect(TokenKind::RBracket)?;
                self.expect(TokenKind::Assign)?;
                if self.is_kw("flip") {
                    self.bump();
                    self.expect(TokenKind::LParen)?;
                    let p = self.exp()?;
                    self.expect(TokenKind::RParen)?;
                    let set = |b: bool| {
                        Cmd::Assign(
                            name.clone(),
                            Exp::Update(
                                Box::new(Exp::Var(name.clone())),
                                Box::new(idx.clone()),
                                Box::new(Exp::Bool(b)),
                            ),
                        )
                    };
                    return Ok(Cmd::ProbChoice(p, Box::new(set(true)), Box::new(set(false))));
                }
                let val = self.exp()?;
                Ok(Cmd::Assign(
                    name.clone(),
                    Exp::Update(Box::new(Exp::Var(name)), Box::new(idx), Box::new(val)),
                ))
            }
            _ => Err(self.unexpected("`:=`, `<-`, or `[`")),
        }
    }

    /// Body of `if`/`while`: a braced sequence or a single command atom.
    fn cmd_block(&mut self) -> PResult<Cmd> {
        if self.eat(&TokenKind::LBrace) {
            let c = self.cmd_seq()?;
            self.expect(TokenKind::RBrace)?;
            Ok(c)
        } else {
            self.cmd_atom()
        }
    }

    // ---- assertions ----

    fn assertion(&mut self) -> PResult<Assertion> {
        let mut lhs = self.assertion_oplus()?;
        while self.eat(&TokenKind::Amp) {
            let rhs = self.assertion_oplus()?;
            lhs = Assertion::amp(lhs, rhs);
        }
        Ok(lhs)
    }

    fn assertion_oplus(&mut self) -> PResult<Assertion> {
        let lhs = self.assertion_and()?;
        if self.peek() == &TokenKind::OPlusOpen {
            self.bump();
            let pos = self.peek_pos();
            let p = self.rational()?;
            if p < Rat::from(BigInt::from(0)) || p > Rat::from(BigInt::from(1)) {
                return Err(ParseError::Invalid {
                    pos,
                    msg: format!("outcome probability {p} outside [0,1]"),
                });
            }
            self.expect(TokenKind::RParen)?;
            let rhs = self.assertion_oplus()?;
            return Ok(Assertion::OPlus(p, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn assertion_and(&mut self) -> PResult<Assertion> {
        let mut lhs = self.assertion_prim()?;
        while self.eat(&TokenKind::SlashBackslash) {
            let rhs = self.assertion_prim()?;
            lhs = Assertion::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn assertion_prim(&mut self) -> PResult<Assertion> {
        match self.peek().clone() {
            TokenKind::Ident(s) if s == "T" => {
                self.bump();
                Ok(Assertion::Top)
            }
            TokenKind::Ident(s) if s == "F" => {
                self.bump();
                Ok(Assertion::Bot)
            }
            TokenKind::LBracket => {
                self.bump();
                let atom = self.exp()?;
                self.expect(TokenKind::RBracket)?;
                Ok(Assertion::Almost(atom))
            }
            TokenKind::LParen => {
                self.bump();
                let a = self.assertion()?;
                self.expect(TokenKind::RParen)?;
                Ok(a)
            }
            _ => Err(self.unexpected("assertion")),
        }
    }

    // ---- programs ----

    fn program(&mut self) -> PResult<Program> {
        let mut names: Vec<String> = Vec::new();
        let mut domains: Vec<Option<Vec<Value>>> = Vec::new();
        while self.is_kw("var") {
            let pos = self.peek_pos();
            self.bump();
            let name = self.ident()?;
            self.expect_kw("in")?;
            let vals = self.value_set()?;
            self.expect(TokenKind::Semi)?;
            if names.contains(&name) {
                return Err(ParseError::DuplicateVar { pos, name });
            }
            names.push(name);
            domains.push(Some(vals));
        }
        let cmd = self.cmd_seq()?;
        self.expect(TokenKind::Eof)?;

        // Undeclared variables that are assigned or read are part of the
        // program's variable set, without a domain.
        let mut used = BTreeSet::new();
        collect_vars(&cmd, &mut used);
        for v in used {
            if !names.contains(&v) {
                names.push(v);
                domains.push(None);
            }
        }
        Ok(Program {
            cmd,
            table: VarTable::new(names, domains),
            warnings: std::mem::take(&mut self.warnings),
        })
    }
}

fn collect_vars(cmd: &Cmd, out: &mut BTreeSet<String>) {
    match cmd {
        Cmd::Skip => {}
        Cmd::Assign(x, e) => {
            out.insert(x.clone());
            e.free_vars(out);
        }
        Cmd::Seq(a, b) | Cmd::NdChoice(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Cmd::ProbChoice(e, a, b) | Cmd::If(e, a, b) => {
            e.free_vars(out);
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Cmd::While(e, body) => {
            e.free_vars(out);
            collect_vars(body, out);
        }
    }
}

/// `x := flip(e)` expands to `(x := true) +[e] (x := false)`.
fn desugar_flip(x: &str, p: Exp) -> Cmd {
    Cmd::ProbChoice(
        p,
        Box::new(Cmd::assign(x, Exp::Bool(true))),
        Box::new(Cmd::assign(x, Exp::Bool(false))),
    )
}

/// `x <- {v1, .., vn}` expands to `(x := v1) & .. & (x := vn)`.
fn desugar_set_choice(x: &str, vals: &[Value]) -> Cmd {
    let mut iter = vals.iter();
    let first = iter.next().expect("value set is nonempty");
    let mut acc = Cmd::assign(x, Exp::lit(first));
    for v in iter {
        acc = Cmd::NdChoice(Box::new(acc), Box::new(Cmd::assign(x, Exp::lit(v))));
    }
    acc
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "var" | "in" | "skip" | "if" | "then" | "else" | "while" | "do" | "flip" | "true"
            | "false" | "xnor"
    )
}

/// Parse a whole program file: optional `var` declarations, then one command.
pub fn parse_program(src: &str) -> PResult<Program> {
    Parser::new(src)?.program()
}

/// Parse a single expression (used by the CLI and in tests).
pub fn parse_exp(src: &str) -> PResult<Exp> {
    let mut p = Parser::new(src)?;
    let e = p.exp()?;
    p.expect(TokenKind::Eof)?;
    Ok(e)
}

/// Parse an outcome assertion, e.g. `[x=1] (+ 1/3) [x=2]`.
pub fn parse_assertion(src: &str) -> PResult<Assertion> {
    let mut p = Parser::new(src)?;
    let a = p.assertion()?;
    p.expect(TokenKind::Eof)?;
    Ok(a)
}

/// Parse an atom (a boolean expression over one state).
pub fn parse_atom(src: &str) -> PResult<Atom> {
    parse_exp(src)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rat;

    #[test]
    fn flip_desugars_to_prob_choice() {
        let prog = parse_program("x := flip(1/2)").unwrap();
        assert_eq!(
            prog.cmd,
            Cmd::ProbChoice(
                Exp::binary(BinOp::Div, Exp::num_int(1), Exp::num_int(2)),
                Box::new(Cmd::assign("x", Exp::Bool(true))),
                Box::new(Cmd::assign("x", Exp::Bool(false))),
            )
        );
    }

    #[test]
    fn skip_parses() {
        assert_eq!(parse_program("skip").unwrap().cmd, Cmd::Skip);
    }

    #[test]
    fn set_choice_desugars_to_nd_chain() {
        let prog = parse_program("y <- {true, false}").unwrap();
        assert_eq!(
            prog.cmd,
            Cmd::NdChoice(
                Box::new(Cmd::assign("y", Exp::Bool(true))),
                Box::new(Cmd::assign("y", Exp::Bool(false))),
            )
        );
    }

    #[test]
    fn declarations_and_ranges() {
        let prog = parse_program("var x in {0..2};\nx := 1").unwrap();
        let dom = prog.table.domain(prog.table.lookup("x").unwrap()).unwrap();
        assert_eq!(dom.len(), 3);
        assert!(matches!(
            parse_program("var x in {0}; var x in {1}; skip"),
            Err(ParseError::DuplicateVar { .. })
        ));
    }

    #[test]
    fn assertion_syntax() {
        let a = parse_assertion("[x=1] (+ 1/3) [x=2]").unwrap();
        assert_eq!(
            a,
            Assertion::oplus(
                rat(1, 3),
                Assertion::Almost(Exp::binary(BinOp::Eq, Exp::var("x"), Exp::num_int(1))),
                Assertion::Almost(Exp::binary(BinOp::Eq, Exp::var("x"), Exp::num_int(2))),
            )
        );
        assert!(parse_assertion("[x=1] (+ 3/2) [x=2]").is_err());
        let b = parse_assertion("T & F /\\ [x=1]").unwrap();
        assert_eq!(
            b,
            Assertion::amp(
                Assertion::Top,
                Assertion::and(
                    Assertion::Bot,
                    Assertion::Almost(Exp::binary(BinOp::Eq, Exp::var("x"), Exp::num_int(1)))
                )
            )
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_program("x := ").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("expected"), "{msg}");
        assert!(msg.contains("1:"), "{msg}");
    }

    #[test]
    fn division_by_literal_zero_lints() {
        let prog = parse_program("x := 1/0").unwrap();
        assert_eq!(prog.warnings.len(), 1);
    }

    #[test]
    fn array_assignment_sugar() {
        let prog = parse_program("xs[2] := true").unwrap();
        assert_eq!(
            prog.cmd,
            Cmd::Assign(
                "xs".into(),
                Exp::Update(
                    Box::new(Exp::var("xs")),
                    Box::new(Exp::num_int(2)),
                    Box::new(Exp::Bool(true))
                )
            )
        );
    }
}
