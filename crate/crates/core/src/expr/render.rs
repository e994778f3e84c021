use super::{BinOp, Expr};

// Binding strength used to decide where parentheses are required so that
// parsing the rendered text reproduces the same tree.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn strength(e: &Expr) -> u8 {
    match e {
        Expr::Num(c) if c.is_sign_negative() => UNARY,
        Expr::Num(_) | Expr::Var(_) | Expr::Param(_) | Expr::Call(..) => ATOM,
        Expr::Neg(_) => UNARY,
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => SUM,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => PRODUCT,
        Expr::Bin(BinOp::Pow, ..) => POWER,
    }
}

pub(super) fn render(e: &Expr) -> String {
    let mut out = String::new();
    write(e, &mut out);
    out
}

fn write_at_least(e: &Expr, min: u8, out: &mut String) {
    if strength(e) < min {
        out.push('(');
        write(e, out);
        out.push(')');
    } else {
        write(e, out);
    }
}

fn write(e: &Expr, out: &mut String) {
    match e {
        Expr::Num(c) => out.push_str(&format!("{c}")),
        Expr::Var(v) => out.push_str(v.name()),
        Expr::Param(p) => out.push_str(p),
        Expr::Neg(inner) => {
            out.push('-');
            write_at_least(inner, UNARY, out);
        }
        Expr::Call(f, arg) => {
            out.push_str(f.name());
            out.push('(');
            write(arg, out);
            out.push(')');
        }
        Expr::Bin(op, l, r) => {
            let (lmin, rmin) = match op {
                BinOp::Add | BinOp::Sub => (SUM, SUM + 1),
                BinOp::Mul | BinOp::Div => (PRODUCT, PRODUCT + 1),
                BinOp::Pow => (ATOM, UNARY),
            };
            write_at_least(l, lmin, out);
            match op {
                BinOp::Add | BinOp::Sub => {
                    out.push(' ');
                    out.push(op.symbol());
                    out.push(' ');
                }
                _ => out.push(op.symbol()),
            }
            write_at_least(r, rmin, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    #[test]
    fn renders_minimal_parentheses() {
        for (src, expected) in [
            ("yp^2/2 - y", "yp^2/2 - y"),
            ("(x+y)*yp", "(x + y)*yp"),
            ("x - (y - yp)", "x - (y - yp)"),
            ("(-x)^2", "(-x)^2"),
            ("-x^2", "-x^2"),
            ("x^(y^2)", "x^y^2"),
            ("(x^y)^2", "(x^y)^2"),
            ("x*-2", "x*-2"),
            ("(-2)^x", "(-2)^x"),
        ] {
            assert_eq!(parse(src).unwrap().to_string(), expected, "source {src}");
        }
    }
}
