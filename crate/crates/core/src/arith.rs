//! Integer arithmetic for `is/2` and the comparison builtins.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use thiserror::Error;

use crate::term::{Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("instantiation error: unbound variable in arithmetic expression")]
    Instantiation,
    #[error("type error: `{0}` is not an evaluable function")]
    NotEvaluable(String),
    #[error("evaluation error: division by zero")]
    ZeroDivisor,
}

/// Evaluates `t` under `s`. Supports `+ - * // mod` and unary minus.
pub fn eval_arith(t: &Term, s: &Substitution) -> Result<BigInt, ArithError> {
    match s.walk(t) {
        Term::Int(n) => Ok(n.clone()),
        Term::Var(_) => Err(ArithError::Instantiation),
        Term::Atom(a) => Err(ArithError::NotEvaluable(format!("{a}/0"))),
        Term::Compound(f, args) => match (&**f, args.as_slice()) {
            ("-", [x]) => Ok(-eval_arith(x, s)?),
            ("+", [x]) => eval_arith(x, s),
            (op @ ("+" | "-" | "*" | "//" | "mod"), [x, y]) => {
                let a = eval_arith(x, s)?;
                let b = eval_arith(y, s)?;
                match op {
                    "+" => Ok(a + b),
                    "-" => Ok(a - b),
                    "*" => Ok(a * b),
                    "//" if b.is_zero() => Err(ArithError::ZeroDivisor),
                    // Truncates toward zero.
                    "//" => Ok(a / b),
                    "mod" if b.is_zero() => Err(ArithError::ZeroDivisor),
                    // Result takes the sign of the divisor.
                    _ => Ok(a.mod_floor(&b)),
                }
            }
            (name, args) => Err(ArithError::NotEvaluable(format!("{name}/{}", args.len()))),
        },
    }
}

/// Functors evaluated by `is/2` rather than called.
pub fn is_arith_functor(name: &str, arity: usize) -> bool {
    matches!(
        (name, arity),
        ("+", 2) | ("-", 2) | ("*", 2) | ("//", 2) | ("mod", 2) | ("-", 1)
    )
}
