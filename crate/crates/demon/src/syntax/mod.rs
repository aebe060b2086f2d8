//! Concrete and abstract syntax: lexer, parsers, and printers for
//! programs, expressions, and outcome assertions.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use ast::{Assertion, Atom, BinOp, Cmd, Exp, Program, UnOp};
pub use parser::{parse_assertion, parse_atom, parse_exp, parse_program, ParseError};
