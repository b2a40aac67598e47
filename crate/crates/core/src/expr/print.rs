use std::fmt;

use super::{Exponent, Expr};
use crate::numfmt::fmt_sig;

/// Printing adapter that renders numbers with a fixed count of significant
/// digits. The output is valid DSL text but only round-trips exactly when
/// every literal is representable in that many digits.
pub struct Sig<'a> {
    pub(super) expr: &'a Expr,
    pub(super) digits: usize,
}

impl fmt::Display for Sig<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, Some(self.digits))
    }
}

const ADD: u8 = 1;
const MUL: u8 = 2;
const UNARY: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => ADD,
        Expr::Mul(..) | Expr::Div(..) => MUL,
        Expr::Num(v) if v.is_sign_negative() => UNARY,
        Expr::Pow(..) => POW,
        Expr::Num(_) | Expr::Const(_) | Expr::Var(_) | Expr::Sqrt(_) => ATOM,
    }
}

pub(super) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, digits: Option<usize>) -> fmt::Result {
    let operand = |f: &mut fmt::Formatter<'_>, child: &Expr, parens: bool| -> fmt::Result {
        if parens {
            f.write_str("(")?;
            write_expr(f, child, digits)?;
            f.write_str(")")
        } else {
            write_expr(f, child, digits)
        }
    };
    let binary = |f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr, prec: u8| -> fmt::Result {
        operand(f, a, precedence(a) < prec)?;
        f.write_str(op)?;
        operand(f, b, precedence(b) <= prec)
    };
    match e {
        Expr::Num(v) => match digits {
            Some(d) => f.write_str(&fmt_sig(*v, d)),
            None => write!(f, "{v}"),
        },
        Expr::Const(name) | Expr::Var(name) => f.write_str(name),
        Expr::Add(a, b) => binary(f, a, " + ", b, ADD),
        Expr::Sub(a, b) => binary(f, a, " - ", b, ADD),
        Expr::Mul(a, b) => binary(f, a, "*", b, MUL),
        Expr::Div(a, b) => binary(f, a, "/", b, MUL),
        Expr::Pow(a, k) => {
            operand(f, a, precedence(a) < ATOM)?;
            f.write_str("^")?;
            write_exponent(f, *k)
        }
        Expr::Sqrt(a) => {
            f.write_str("sqrt(")?;
            write_expr(f, a, digits)?;
            f.write_str(")")
        }
    }
}

fn write_exponent(f: &mut fmt::Formatter<'_>, k: Exponent) -> fmt::Result {
    if k.is_integer() && *k.numer() >= 0 {
        write!(f, "{}", k.numer())
    } else if k.is_integer() {
        write!(f, "({})", k.numer())
    } else {
        write!(f, "({}/{})", k.numer(), k.denom())
    }
}
