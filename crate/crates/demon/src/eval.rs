//! Total evaluation of expressions against a state.
//!
//! Arithmetic is exact rational arithmetic. List indexing is 1-based and
//! total: any out-of-range access evaluates to the number 0, and
//! out-of-range updates zero-fill the gap. Division by zero evaluates
//! to 0 (the parser lints the syntactically obvious case). Operations on
//! operands of the wrong type are reported as type errors.

use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::syntax::ast::{BinOp, Exp, UnOp};
use crate::value::{rat_int, Rat, State, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("type mismatch: {op} expects {expected}, got {got}")]
    TypeMismatch {
        op: &'static str,
        expected: &'static str,
        got: &'static str,
    },
}

pub type EvalResult<T> = Result<T, EvalError>;

pub fn eval_exp(e: &Exp, state: &State) -> EvalResult<Value> {
    match e {
        Exp::Bool(b) => Ok(Value::Bool(*b)),
        Exp::Num(r) => Ok(Value::Num(r.clone())),
        Exp::Var(x) => state
            .get_named(x)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVar(x.clone())),
        Exp::List(items) => {
            let vals = items
                .iter()
                .map(|i| eval_exp(i, state))
                .collect::<EvalResult<Vec<_>>>()?;
            Ok(Value::List(vals))
        }
        Exp::Unary(op, inner) => {
            let v = eval_exp(inner, state)?;
            match op {
                UnOp::Neg => match v {
                    Value::Num(r) => Ok(Value::Num(-r)),
                    other => Err(type_err("-", "number", &other)),
                },
                UnOp::Not => match v {
                    Value::Bool(b) => Ok(Value::Bool(!b)),
                    other => Err(type_err("!", "bool", &other)),
                },
                UnOp::Iverson => match v {
                    Value::Bool(b) => Ok(Value::Num(rat_int(if b { 1 } else { 0 }))),
                    other => Err(type_err("[_]", "bool", &other)),
                },
            }
        }
        Exp::Binary(op, a, b) => {
            let va = eval_exp(a, state)?;
            let vb = eval_exp(b, state)?;
            eval_binary(*op, va, vb)
        }
        Exp::Index(list, idx) => {
            let vl = eval_exp(list, state)?;
            let vi = eval_exp(idx, state)?;
            Ok(index_value(&vl, &vi))
        }
        Exp::Update(list, idx, val) => {
            let vl = eval_exp(list, state)?;
            let vi = eval_exp(idx, state)?;
            let vv = eval_exp(val, state)?;
            Ok(update_value(vl, &vi, vv))
        }
    }
}

fn type_err(op: &'static str, expected: &'static str, got: &Value) -> EvalError {
    EvalError::TypeMismatch {
        op,
        expected,
        got: got.type_name(),
    }
}

fn eval_binary(op: BinOp, a: Value, b: Value) -> EvalResult<Value> {
    use BinOp::*;
    match op {
        Add | Sub | Mul | Div => {
            let (x, y) = match (&a, &b) {
                (Value::Num(x), Value::Num(y)) => (x, y),
                (Value::Num(_), other) | (other, _) => {
                    return Err(type_err(op.symbol(), "number", other))
                }
            };
            let r = match op {
                Add => x + y,
                Sub => x - y,
                Mul => x * y,
                Div => {
                    if y.is_zero() {
                        Rat::zero()
                    } else {
                        x / y
                    }
                }
                _ => unreachable!(),
            };
            Ok(Value::Num(r))
        }
        And | Or | Xnor => {
            let (x, y) = match (&a, &b) {
                (Value::Bool(x), Value::Bool(y)) => (*x, *y),
                (Value::Bool(_), other) | (other, _) => {
                    return Err(type_err(op.symbol(), "bool", other))
                }
            };
            Ok(Value::Bool(match op {
                And => x && y,
                Or => x || y,
                Xnor => x == y,
                _ => unreachable!(),
            }))
        }
        Eq | Ne => {
            if std::mem::discriminant(&a) != std::mem::discriminant(&b) {
                return Err(EvalError::TypeMismatch {
                    op: op.symbol(),
                    expected: a.type_name(),
                    got: b.type_name(),
                });
            }
            let eq = a == b;
            Ok(Value::Bool(if op == Eq { eq } else { !eq }))
        }
        Lt | Le | Gt | Ge => {
            let (x, y) = match (&a, &b) {
                (Value::Num(x), Value::Num(y)) => (x, y),
                (Value::Num(_), other) | (other, _) => {
                    return Err(type_err(op.symbol(), "number", other))
                }
            };
            Ok(Value::Bool(match op {
                Lt => x < y,
                Le => x <= y,
                Gt => x > y,
                Ge => x >= y,
                _ => unreachable!(),
            }))
        }
    }
}

/// 1-based list access; anything out of range evaluates to 0.
fn index_value(list: &Value, idx: &Value) -> Value {
    let zero = Value::Num(rat_int(0));
    let (Value::List(items), Value::Num(k)) = (list, idx) else {
        return zero;
    };
    if !k.is_integer() || k.is_negative() || k.is_zero() {
        return zero;
    }
    match k.to_integer().to_usize() {
        Some(k) if k >= 1 && k <= items.len() => items[k - 1].clone(),
        _ => zero,
    }
}

/// 1-based list update; indices past the end zero-fill, invalid ones
/// evaluate to 0.
fn update_value(list: Value, idx: &Value, val: Value) -> Value {
    let zero = Value::Num(rat_int(0));
    let (Value::List(mut items), Value::Num(k)) = (list, idx) else {
        return zero;
    };
    if !k.is_integer() || k.is_negative() || k.is_zero() {
        return zero;
    }
    let Some(k) = k.to_integer().to_usize() else {
        return zero;
    };
    if k == 0 {
        return zero;
    }
    while items.len() < k {
        items.push(Value::Num(rat_int(0)));
    }
    items[k - 1] = val;
    Value::List(items)
}

/// Evaluate a boolean-valued expression (an atom or a guard).
pub fn eval_bool(e: &Exp, state: &State) -> EvalResult<bool> {
    match eval_exp(e, state)? {
        Value::Bool(b) => Ok(b),
        other => Err(type_err("guard", "bool", &other)),
    }
}

/// Evaluate a probability expression; `None` when outside [0,1].
pub fn eval_prob(e: &Exp, state: &State) -> EvalResult<Option<Rat>> {
    match eval_exp(e, state)? {
        Value::Num(r) => {
            if r >= Rat::zero() && r <= rat_int(1) {
                Ok(Some(r))
            } else {
                Ok(None)
            }
        }
        other => Err(type_err("probability", "number", &other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse_exp;
    use crate::value::VarTable;
    use std::sync::Arc;

    fn state_with(x: Value) -> State {
        let t = VarTable::new(vec!["x".into()], vec![None]);
        State::new(Arc::clone(&t), vec![x])
    }

    fn eval_str(src: &str, st: &State) -> Value {
        eval_exp(&parse_exp(src).unwrap(), st).unwrap()
    }

    #[test]
    fn list_access_is_total() {
        let st = state_with(Value::Num(rat_int(0)));
        assert_eq!(eval_str("<<5, 7>>[2]", &st), Value::Num(rat_int(7)));
        assert_eq!(eval_str("<<5>>[3]", &st), Value::Num(rat_int(0)));
        assert_eq!(eval_str("<<5>>[0]", &st), Value::Num(rat_int(0)));
        assert_eq!(
            eval_str("<<1>>[3 -> true]", &st),
            Value::List(vec![
                Value::Num(rat_int(1)),
                Value::Num(rat_int(0)),
                Value::Bool(true)
            ])
        );
    }

    #[test]
    fn iverson_bracket() {
        let st = state_with(Value::Num(rat_int(3)));
        assert_eq!(eval_str("[x > 0]", &st), Value::Num(rat_int(1)));
        assert_eq!(eval_str("[x > 5]", &st), Value::Num(rat_int(0)));
    }

    #[test]
    fn division_by_zero_is_zero() {
        let st = state_with(Value::Num(rat_int(3)));
        assert_eq!(eval_str("x / 0", &st), Value::Num(rat_int(0)));
        assert_eq!(eval_str("x / (x - 3)", &st), Value::Num(rat_int(0)));
    }

    #[test]
    fn type_errors_are_reported() {
        let st = state_with(Value::Bool(true));
        let e = parse_exp("x + 1").unwrap();
        assert!(matches!(
            eval_exp(&e, &st),
            Err(EvalError::TypeMismatch { .. })
        ));
        let e = parse_exp("x = 1").unwrap();
        assert!(eval_exp(&e, &st).is_err());
    }

    #[test]
    fn eval_is_deterministic() {
        let st = state_with(Value::Num(crate::value::rat(7, 3)));
        let e = parse_exp("x * 3 - 1").unwrap();
        assert_eq!(eval_exp(&e, &st).unwrap(), eval_exp(&e, &st).unwrap());
        assert_eq!(eval_str("x * 3 - 1", &st), Value::Num(rat_int(6)));
    }
}
