use std::fmt;

use super::{BinOp, Expr};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

/// Display adapter that emits text accepted by [`super::parse_expression`].
pub struct Printer<'a> {
    expr: &'a Expr,
    coords: &'a [String],
}

impl<'a> Printer<'a> {
    pub fn new(expr: &'a Expr, coords: &'a [String]) -> Self {
        Printer { expr, coords }
    }
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
        Expr::Neg(_) => PREC_NEG,
        Expr::Pow(..) => PREC_POW,
        Expr::Const(_) | Expr::Var(_) | Expr::Func(..) => PREC_ATOM,
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        write!(f, "{c}")
    } else {
        write!(f, "{c:?}")
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, coords: &[String], min: u8) -> fmt::Result {
    let paren = precedence(e) < min;
    if paren {
        f.write_str("(")?;
    }
    match e {
        Expr::Const(c) => {
            if c.is_sign_negative() {
                f.write_str("(-")?;
                write_number(f, -c)?;
                f.write_str(")")?;
            } else {
                write_number(f, *c)?;
            }
        }
        Expr::Var(i) => match coords.get(*i) {
            Some(name) => f.write_str(name)?,
            None => write!(f, "x{i}")?,
        },
        Expr::Neg(a) => {
            f.write_str("-")?;
            write_expr(f, a, coords, PREC_NEG)?;
        }
        Expr::Func(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, coords, 0)?;
            f.write_str(")")?;
        }
        Expr::Binary(op, a, b) => {
            let (lhs_min, rhs_min) = match op {
                BinOp::Add | BinOp::Sub => (PREC_ADD, PREC_ADD + 1),
                BinOp::Mul | BinOp::Div => (PREC_MUL, PREC_MUL + 1),
            };
            write_expr(f, a, coords, lhs_min)?;
            write!(f, "{}", op.symbol())?;
            write_expr(f, b, coords, rhs_min)?;
        }
        Expr::Pow(a, n) => {
            write_expr(f, a, coords, PREC_ATOM)?;
            write!(f, "^{n}")?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, self.coords, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_expression;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn prints_minimal_parentheses() {
        let c = names(&["x", "y"]);
        for (src, want) in [
            ("x + y*2", "x+y*2"),
            ("(x + y)*2", "(x+y)*2"),
            ("x - (y - 1)", "x-(y-1)"),
            ("x / (y * 2)", "x/(y*2)"),
            ("-x^2", "-x^2"),
            ("(-x)^2", "(-x)^2"),
            ("sin(x)^2", "sin(x)^2"),
            ("x^-2", "x^-2"),
            ("(x^2)^3", "(x^2)^3"),
        ] {
            let e = parse_expression(src, &c).unwrap();
            assert_eq!(e.display(&c).to_string(), want, "{src}");
        }
    }

    #[test]
    fn printed_text_reparses_to_same_tree() {
        let c = names(&["r", "th"]);
        for src in [
            "r^2 * sin(th)^2",
            "1/(1+r^2)",
            "exp(-r)*cosh(th) - sqrt(r)/tan(th)",
            "r^0.5",
            "-(-r)",
            "2.5e-7*r",
        ] {
            let e = parse_expression(src, &c).unwrap();
            let text = e.display(&c).to_string();
            assert_eq!(parse_expression(&text, &c).unwrap(), e, "{src} -> {text}");
        }
    }
}
