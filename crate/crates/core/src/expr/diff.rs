use std::collections::HashMap;

use super::{BinOp, Expr, Func};

impl Expr {
    /// Exact partial derivative with respect to coordinate `v`.
    pub fn diff(&self, v: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(i) => {
                if *i == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Neg(a) => Expr::neg(a.diff(v)),
            Expr::Binary(op, a, b) => {
                let (da, db) = (a.diff(v), b.diff(v));
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => Expr::add(Expr::mul(da, b.clone()), Expr::mul(a, db)),
                    BinOp::Div => {
                        if db.is_zero() {
                            Expr::div(da, b)
                        } else {
                            Expr::div(
                                Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db)),
                                Expr::powi(b, 2),
                            )
                        }
                    }
                }
            }
            Expr::Pow(a, n) => {
                let da = a.diff(v);
                if da.is_zero() || *n == 0 {
                    return Expr::zero();
                }
                let outer = Expr::mul(
                    Expr::Const(*n as f64),
                    Expr::powi(a.as_ref().clone(), n - 1),
                );
                Expr::mul(outer, da)
            }
            Expr::Func(f, a) => {
                let da = a.diff(v);
                if da.is_zero() {
                    return Expr::zero();
                }
                let a = a.as_ref().clone();
                let outer = match f {
                    Func::Sin => Expr::func(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::func(Func::Sin, a)),
                    Func::Tan => Expr::powi(Expr::func(Func::Cos, a), -2),
                    Func::Sinh => Expr::func(Func::Cosh, a),
                    Func::Cosh => Expr::func(Func::Sinh, a),
                    Func::Exp => Expr::func(Func::Exp, a),
                    Func::Log => return Expr::div(da, a),
                    Func::Sqrt => {
                        return Expr::div(da, Expr::mul(Expr::Const(2.0), Expr::func(Func::Sqrt, a)))
                    }
                };
                Expr::mul(outer, da)
            }
        }
    }
}

/// All multi-indices over `n` variables with total degree `<= order`,
/// in graded order: degree 0 first, then degree 1, and so on. Within one
/// degree the order is lexicographically descending.
///
/// Because of the grading, the multi-indices of degree `<= k` form a
/// prefix of the list for any `k <= order`.
pub fn multi_indices(n: usize, order: usize) -> Vec<Vec<u8>> {
    fn fill(n: usize, pos: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if pos + 1 == n {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k as u8);
            fill(n, pos + 1, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    for d in 0..=order {
        fill(n, 0, d, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// Every mixed partial derivative of one expression up to a fixed order,
/// built by repeated symbolic differentiation and stored in the order of
/// [`multi_indices`].
#[derive(Debug, Clone)]
pub struct DerivativeTable {
    order: usize,
    entries: Vec<Expr>,
}

impl DerivativeTable {
    pub fn new(expr: &Expr, n: usize, order: usize) -> Self {
        let indices = multi_indices(n, order);
        let lookup: HashMap<&[u8], usize> = indices
            .iter()
            .enumerate()
            .map(|(k, a)| (a.as_slice(), k))
            .collect();
        let mut entries: Vec<Expr> = Vec::with_capacity(indices.len());
        for alpha in &indices {
            let Some(v) = alpha.iter().position(|&a| a > 0) else {
                entries.push(expr.clone());
                continue;
            };
            let mut parent = alpha.clone();
            parent[v] -= 1;
            let parent_expr = &entries[lookup[parent.as_slice()]];
            let d = if parent_expr.constant().is_some() {
                Expr::zero()
            } else {
                parent_expr.diff(v)
            };
            entries.push(d);
        }
        DerivativeTable { order, entries }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Derivatives in [`multi_indices`] order.
    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_expression;
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn power_rule() {
        let c = names(&["r"]);
        let d = parse_expression("r^2", &c).unwrap().diff(0);
        assert_eq!(d.display(&c).to_string(), "2*r");
    }

    #[test]
    fn chain_rule() {
        let c = names(&["th"]);
        let d = parse_expression("sin(th)^2", &c).unwrap().diff(0);
        assert_eq!(d.display(&c).to_string(), "2*sin(th)*cos(th)");
    }

    #[test]
    fn independent_variable_gives_zero_constant() {
        let c = names(&["r", "th"]);
        let d = parse_expression("sin(th)", &c).unwrap().diff(0);
        assert_eq!(d, Expr::Const(0.0));
    }

    #[test]
    fn multi_index_grading() {
        let m = multi_indices(3, 2);
        assert_eq!(m.len(), 10);
        assert_eq!(m[0], vec![0, 0, 0]);
        assert!(m[1..4].iter().all(|a| a.iter().map(|&x| x as usize).sum::<usize>() == 1));
        assert_eq!(multi_indices(4, 4).len(), 70);
        assert_eq!(multi_indices(2, 0), vec![vec![0, 0]]);
    }

    #[test]
    fn table_matches_repeated_diff() {
        let c = names(&["x", "y"]);
        let e = parse_expression("x^3*sin(y)", &c).unwrap();
        let table = DerivativeTable::new(&e, 2, 3);
        let idx = multi_indices(2, 3);
        let k = idx.iter().position(|a| *a == vec![2, 1]).unwrap();
        let direct = e.diff(0).diff(0).diff(1);
        let p = [0.7, 0.3];
        assert_eq!(
            table.entries()[k].eval(&p).unwrap(),
            direct.eval(&p).unwrap()
        );
    }
}
