use super::{BinOp, DomainError, Expr, Func};

impl Expr {
    /// Evaluates at `point`, indexed by coordinate position.
    pub fn eval(&self, point: &[f64]) -> Result<f64, DomainError> {
        let fail = |e: &Expr, reason| DomainError {
            subexpr: e.display(&[]).to_string(),
            point: point.to_vec(),
            reason,
        };
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *point
                .get(*i)
                .ok_or_else(|| fail(self, "coordinate index outside the point"))?,
            Expr::Neg(a) => -a.eval(point)?,
            Expr::Binary(op, a, b) => {
                let (x, y) = (a.eval(point)?, b.eval(point)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(fail(self, "division by zero"));
                        }
                        x / y
                    }
                }
            }
            Expr::Pow(a, n) => {
                let x = a.eval(point)?;
                if x == 0.0 && *n < 0 {
                    return Err(fail(self, "negative power of zero"));
                }
                x.powi(*n)
            }
            Expr::Func(f, a) => {
                let x = a.eval(point)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(fail(self, "logarithm of a non-positive value"));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(fail(self, "square root of a negative value"));
                        }
                        x.sqrt()
                    }
                }
            }
        };
        if !value.is_finite() {
            return Err(fail(self, "non-finite result"));
        }
        Ok(value)
    }

    /// Evaluates and renders any domain error with coordinate names.
    pub fn eval_named(&self, point: &[f64], coords: &[String]) -> Result<f64, DomainError> {
        self.eval(point).map_err(|mut err| {
            // re-render the offending subexpression with real names
            if let Some(sub) = find_failing(self, point) {
                err.subexpr = sub.display(coords).to_string();
            }
            err
        })
    }
}

fn find_failing<'a>(e: &'a Expr, point: &[f64]) -> Option<&'a Expr> {
    let children: Vec<&Expr> = match e {
        Expr::Const(_) | Expr::Var(_) => vec![],
        Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => vec![a.as_ref()],
        Expr::Binary(_, a, b) => vec![a.as_ref(), b.as_ref()],
    };
    for c in children {
        if c.eval(point).is_err() {
            return find_failing(c, point);
        }
    }
    if e.eval(point).is_err() {
        Some(e)
    } else {
        None
    }
}
