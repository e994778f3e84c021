use super::{BinOp, Expr, ParamBindings};

const MAX_PASSES: usize = 100;

/// Applies the rewrite rules bottom-up until nothing changes, so the result
/// is a fixed point and a second call returns it unchanged.
pub(super) fn simplify(e: &Expr) -> Expr {
    let mut cur = e.clone();
    for _ in 0..MAX_PASSES {
        let next = pass(&cur);
        if next == cur {
            return next;
        }
        cur = next;
    }
    cur
}

fn pass(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => e.clone(),
        Expr::Neg(a) => rewrite_neg(pass(a)),
        Expr::Call(f, a) => fold_constant(Expr::call(*f, pass(a))),
        Expr::Bin(op, l, r) => {
            let (l, r) = (pass(l), pass(r));
            match op {
                BinOp::Add => rewrite_add(l, r),
                BinOp::Sub => rewrite_sub(l, r),
                BinOp::Mul => rewrite_mul(l, r),
                BinOp::Div => rewrite_div(l, r),
                BinOp::Pow => rewrite_pow(l, r),
            }
        }
    }
}

fn is(e: &Expr, c: f64) -> bool {
    matches!(e, Expr::Num(v) if *v == c)
}

/// Folds a node whose children are all literals, keeping the node when the
/// value is not a finite real.
fn fold_constant(e: Expr) -> Expr {
    let literal_children = match &e {
        Expr::Call(_, a) | Expr::Neg(a) => a.as_num().is_some(),
        Expr::Bin(_, l, r) => l.as_num().is_some() && r.as_num().is_some(),
        _ => false,
    };
    if !literal_children {
        return e;
    }
    match e.eval(0.0, 0.0, 0.0, &ParamBindings::new()) {
        Ok(v) => Expr::Num(v),
        Err(_) => e,
    }
}

fn rewrite_neg(a: Expr) -> Expr {
    match a {
        Expr::Num(c) => Expr::Num(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn rewrite_add(l: Expr, r: Expr) -> Expr {
    if is(&l, 0.0) {
        return r;
    }
    if is(&r, 0.0) {
        return l;
    }
    match (l, r) {
        (l @ Expr::Num(_), r @ Expr::Num(_)) => fold_constant(Expr::add(l, r)),
        (l, Expr::Neg(q)) => Expr::sub(l, *q),
        (l, Expr::Num(c)) if c < 0.0 => Expr::sub(l, Expr::Num(-c)),
        (Expr::Neg(p), r) => Expr::sub(r, *p),
        (Expr::Bin(BinOp::Add, p, c1), Expr::Num(c2)) if c1.as_num().is_some() => {
            Expr::add(*p, Expr::Num(c1.as_num().unwrap() + c2))
        }
        (Expr::Bin(BinOp::Sub, p, c1), Expr::Num(c2)) if c1.as_num().is_some() => {
            Expr::add(*p, Expr::Num(c2 - c1.as_num().unwrap()))
        }
        (l, r) => Expr::add(l, r),
    }
}

fn rewrite_sub(l: Expr, r: Expr) -> Expr {
    if is(&r, 0.0) {
        return l;
    }
    if is(&l, 0.0) {
        return rewrite_neg(r);
    }
    if l == r {
        return Expr::Num(0.0);
    }
    match (l, r) {
        (l @ Expr::Num(_), r @ Expr::Num(_)) => fold_constant(Expr::sub(l, r)),
        (l, Expr::Neg(q)) => Expr::add(l, *q),
        (l, Expr::Num(c)) if c < 0.0 => Expr::add(l, Expr::Num(-c)),
        (Expr::Bin(BinOp::Add, p, c1), Expr::Num(c2)) if c1.as_num().is_some() => {
            Expr::add(*p, Expr::Num(c1.as_num().unwrap() - c2))
        }
        (Expr::Bin(BinOp::Sub, p, c1), Expr::Num(c2)) if c1.as_num().is_some() => {
            Expr::sub(*p, Expr::Num(c1.as_num().unwrap() + c2))
        }
        (l, r) => Expr::sub(l, r),
    }
}

fn rewrite_mul(l: Expr, r: Expr) -> Expr {
    if is(&l, 0.0) || is(&r, 0.0) {
        return Expr::Num(0.0);
    }
    if is(&l, 1.0) {
        return r;
    }
    if is(&r, 1.0) {
        return l;
    }
    if is(&l, -1.0) {
        return rewrite_neg(r);
    }
    if is(&r, -1.0) {
        return rewrite_neg(l);
    }
    match (l, r) {
        (l @ Expr::Num(_), r @ Expr::Num(_)) => fold_constant(Expr::mul(l, r)),
        (Expr::Neg(p), r) => Expr::neg(Expr::mul(*p, r)),
        (l, Expr::Neg(q)) => Expr::neg(Expr::mul(l, *q)),
        (Expr::Num(c), r) if c < 0.0 => Expr::neg(Expr::mul(Expr::Num(-c), r)),
        (l, Expr::Num(c)) => Expr::mul(Expr::Num(c), l),
        (Expr::Num(c1), Expr::Bin(BinOp::Mul, p, q)) if p.as_num().is_some() => {
            Expr::mul(Expr::Num(c1 * p.as_num().unwrap()), *q)
        }
        (l, r) => Expr::mul(l, r),
    }
}

fn rewrite_div(l: Expr, r: Expr) -> Expr {
    if is(&l, 0.0) && !is(&r, 0.0) {
        return Expr::Num(0.0);
    }
    if is(&r, 1.0) {
        return l;
    }
    if is(&r, -1.0) {
        return rewrite_neg(l);
    }
    if l == r && !is(&r, 0.0) {
        return Expr::Num(1.0);
    }
    match (l, r) {
        (l @ Expr::Num(_), r @ Expr::Num(_)) => fold_constant(Expr::div(l, r)),
        (Expr::Neg(p), r) => Expr::neg(Expr::div(*p, r)),
        (l, Expr::Neg(q)) => Expr::neg(Expr::div(l, *q)),
        (Expr::Bin(BinOp::Mul, p, q), r) if *p == r => *q,
        (Expr::Bin(BinOp::Mul, p, q), r) if *q == r => *p,
        (Expr::Bin(BinOp::Mul, p, q), Expr::Num(c2)) if p.as_num().is_some() && c2 != 0.0 => {
            Expr::mul(Expr::Num(p.as_num().unwrap() / c2), *q)
        }
        (l, r) => Expr::div(l, r),
    }
}

fn rewrite_pow(l: Expr, r: Expr) -> Expr {
    if is(&r, 1.0) {
        return l;
    }
    if is(&r, 0.0) || is(&l, 1.0) {
        return Expr::Num(1.0);
    }
    fold_constant(Expr::pow(l, r))
}
