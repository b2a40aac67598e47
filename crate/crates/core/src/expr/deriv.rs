use num_rational::Ratio;

use super::Expr;

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(x) if *x == v)
}

// Simplifying constructors: numeric folding plus the 0/1 identities.

fn add(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        b
    } else if is_num(&b, 0.0) {
        a
    } else {
        Expr::add(a, b)
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 0.0) {
        a
    } else if is_num(&a, 0.0) {
        Expr::neg(b)
    } else {
        Expr::sub(a, b)
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) || is_num(&b, 0.0) {
        return Expr::Num(0.0);
    }
    if is_num(&a, 1.0) {
        return b;
    }
    if is_num(&b, 1.0) {
        return a;
    }
    match (a, b) {
        // keep a single leading coefficient
        (Expr::Num(x), Expr::Mul(l, r)) if matches!(*l, Expr::Num(_)) => {
            let Expr::Num(y) = *l else { unreachable!() };
            mul(Expr::Num(x * y), *r)
        }
        // a * (1/b) -> a/b
        (a, Expr::Div(n, d)) if is_num(&n, 1.0) => div(a, *d),
        (a, b) => Expr::mul(a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        Expr::Num(0.0)
    } else if is_num(&b, 1.0) {
        a
    } else {
        Expr::div(a, b)
    }
}

fn pow(base: Expr, k: Ratio<i64>) -> Expr {
    if k == Ratio::from_integer(0) {
        Expr::Num(1.0)
    } else if k == Ratio::from_integer(1) {
        base
    } else {
        Expr::pow(base, k)
    }
}

pub(super) fn derivative(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Num(_) | Expr::Const(_) => Expr::Num(0.0),
        Expr::Var(v) => Expr::Num(if v == var { 1.0 } else { 0.0 }),
        Expr::Add(a, b) => add(derivative(a, var), derivative(b, var)),
        Expr::Sub(a, b) => sub(derivative(a, var), derivative(b, var)),
        Expr::Mul(a, b) => add(mul(derivative(a, var), (**b).clone()), mul((**a).clone(), derivative(b, var))),
        Expr::Div(a, b) => {
            let da = derivative(a, var);
            let db = derivative(b, var);
            if is_num(&db, 0.0) {
                div(da, (**b).clone())
            } else {
                div(sub(mul(da, (**b).clone()), mul((**a).clone(), db)), pow((**b).clone(), Ratio::from_integer(2)))
            }
        }
        Expr::Pow(a, k) => {
            let da = derivative(a, var);
            if is_num(&da, 0.0) {
                return Expr::Num(0.0);
            }
            let coeff = *k.numer() as f64 / *k.denom() as f64;
            mul(mul(Expr::Num(coeff), pow((**a).clone(), k - 1)), da)
        }
        Expr::Sqrt(a) => {
            let da = derivative(a, var);
            if is_num(&da, 0.0) {
                return Expr::Num(0.0);
            }
            div(da, mul(Expr::Num(2.0), Expr::sqrt((**a).clone())))
        }
    }
}
