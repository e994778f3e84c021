use super::{BinOp, Expr, Func, Symbol};

fn n(c: f64) -> Expr {
    Expr::Num(c)
}

/// Unsimplified partial derivative of `e` with respect to `s`.
pub(super) fn diff(e: &Expr, s: &Symbol) -> Expr {
    if !e.contains(s) {
        return n(0.0);
    }
    match e {
        Expr::Num(_) => n(0.0),
        Expr::Var(v) => n(if Symbol::Var(*v) == *s { 1.0 } else { 0.0 }),
        Expr::Param(p) => n(if Symbol::Param(p.clone()) == *s {
            1.0
        } else {
            0.0
        }),
        Expr::Neg(u) => Expr::neg(diff(u, s)),
        Expr::Bin(op, l, r) => {
            let (u, v) = (l.as_ref(), r.as_ref());
            match op {
                BinOp::Add => Expr::add(diff(u, s), diff(v, s)),
                BinOp::Sub => Expr::sub(diff(u, s), diff(v, s)),
                BinOp::Mul => Expr::add(
                    Expr::mul(diff(u, s), v.clone()),
                    Expr::mul(u.clone(), diff(v, s)),
                ),
                BinOp::Div => {
                    if !v.contains(s) {
                        Expr::div(diff(u, s), v.clone())
                    } else {
                        Expr::div(
                            Expr::sub(
                                Expr::mul(diff(u, s), v.clone()),
                                Expr::mul(u.clone(), diff(v, s)),
                            ),
                            Expr::pow(v.clone(), n(2.0)),
                        )
                    }
                }
                BinOp::Pow => {
                    if !v.contains(s) {
                        // v * u^(v-1) * u'
                        Expr::mul(
                            Expr::mul(
                                v.clone(),
                                Expr::pow(u.clone(), Expr::sub(v.clone(), n(1.0))),
                            ),
                            diff(u, s),
                        )
                    } else if !u.contains(s) {
                        // u^v * log(u) * v'
                        Expr::mul(
                            Expr::mul(e.clone(), Expr::call(Func::Log, u.clone())),
                            diff(v, s),
                        )
                    } else {
                        // u^v * (v' log u + v u'/u)
                        Expr::mul(
                            e.clone(),
                            Expr::add(
                                Expr::mul(diff(v, s), Expr::call(Func::Log, u.clone())),
                                Expr::div(Expr::mul(v.clone(), diff(u, s)), u.clone()),
                            ),
                        )
                    }
                }
            }
        }
        Expr::Call(f, arg) => {
            let u = arg.as_ref().clone();
            let outer = match f {
                Func::Sin => Expr::call(Func::Cos, u),
                Func::Cos => Expr::neg(Expr::call(Func::Sin, u)),
                Func::Tan => Expr::pow(Expr::call(Func::Sec, u), n(2.0)),
                Func::Sec => Expr::mul(Expr::call(Func::Sec, u.clone()), Expr::call(Func::Tan, u)),
                Func::Exp => Expr::call(Func::Exp, u),
                Func::Log => Expr::div(n(1.0), u),
                Func::Sqrt => Expr::div(n(1.0), Expr::mul(n(2.0), Expr::call(Func::Sqrt, u))),
                Func::Sinh => Expr::call(Func::Cosh, u),
                Func::Cosh => Expr::call(Func::Sinh, u),
                Func::Tanh => Expr::sub(n(1.0), Expr::pow(Expr::call(Func::Tanh, u), n(2.0))),
                Func::Asinh => Expr::div(
                    n(1.0),
                    Expr::call(Func::Sqrt, Expr::add(Expr::pow(u, n(2.0)), n(1.0))),
                ),
                Func::Atan => Expr::div(n(1.0), Expr::add(n(1.0), Expr::pow(u, n(2.0)))),
                // Non-smooth at 0; sign(0) = 0 by convention.
                Func::Abs => Expr::call(Func::Sign, u),
                Func::Sign => n(0.0),
            };
            Expr::mul(outer, diff(arg, s))
        }
    }
}
