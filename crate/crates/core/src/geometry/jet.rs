//! Truncated multivariate Taylor polynomials.
//!
//! A [`Jet`] of order `k` at a point stores every partial derivative of a
//! function up to total degree `k`, as Taylor coefficients
//! `c_a = (d^a f)(p) / a!`. Products follow the Leibniz rule exactly, so
//! curvature quantities assembled from metric jets carry exact derivatives
//! (no step sizes, no truncation error). The seed jets come from
//! [`crate::expr::DerivativeTable`], i.e. from symbolic differentiation.

use crate::expr::{multi_indices, DerivativeTable, DomainError};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    order: usize,
    c: Vec<f64>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Function value at the expansion point.
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }
}

/// Index tables shared by all jets over `n` variables up to `order`.
#[derive(Debug, Clone)]
pub struct JetAlgebra {
    n: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    /// `counts[k]` = number of monomials of degree `<= k`.
    counts: Vec<usize>,
    /// `(lhs, rhs, product)` sorted by product index.
    mul_table: Vec<(u32, u32, u32)>,
    /// Per variable: `(dst, src, factor)` sorted by dst.
    deriv_tables: Vec<Vec<(u32, u32, f64)>>,
}

impl JetAlgebra {
    pub fn new(n: usize, order: usize) -> Self {
        let monomials = multi_indices(n, order);
        let degree = |a: &[u8]| a.iter().map(|&x| x as usize).sum::<usize>();
        let counts = (0..=order)
            .map(|k| monomials.iter().filter(|a| degree(a) <= k).count())
            .collect();
        let lookup: std::collections::HashMap<&[u8], u32> = monomials
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_slice(), i as u32))
            .collect();

        let mut mul_table = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degree(a) + degree(b) > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                mul_table.push((i as u32, j as u32, lookup[sum.as_slice()]));
            }
        }
        mul_table.sort_by_key(|&(i, j, k)| (k, i, j));

        let mut deriv_tables = Vec::with_capacity(n);
        for v in 0..n {
            let mut t = Vec::new();
            for (dst, a) in monomials.iter().enumerate() {
                if degree(a) + 1 > order {
                    continue;
                }
                let mut up = a.clone();
                up[v] += 1;
                t.push((dst as u32, lookup[up.as_slice()], up[v] as f64));
            }
            deriv_tables.push(t);
        }

        JetAlgebra {
            n,
            order,
            monomials,
            counts,
            mul_table,
            deriv_tables,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monomials
    }

    pub fn constant(&self, x: f64, order: usize) -> Jet {
        let mut c = vec![0.0; self.counts[order]];
        c[0] = x;
        Jet { order, c }
    }

    pub fn zero(&self, order: usize) -> Jet {
        self.constant(0.0, order)
    }

    /// Seeds a jet from symbolic derivatives evaluated at `point`.
    pub fn from_table(&self, table: &DerivativeTable, point: &[f64]) -> Result<Jet, DomainError> {
        let order = table.order().min(self.order);
        let len = self.counts[order];
        let mut c = Vec::with_capacity(len);
        for (expr, alpha) in table.entries()[..len].iter().zip(&self.monomials) {
            let factorial: f64 = alpha
                .iter()
                .map(|&k| (1..=k as u32).product::<u32>() as f64)
                .product();
            c.push(expr.eval(point)? / factorial);
        }
        Ok(Jet { order, c })
    }

    pub fn truncate(&self, a: &Jet, order: usize) -> Jet {
        let order = order.min(a.order);
        Jet {
            order,
            c: a.c[..self.counts[order]].to_vec(),
        }
    }

    pub fn add(&self, a: &Jet, b: &Jet) -> Jet {
        let order = a.order.min(b.order);
        let len = self.counts[order];
        Jet {
            order,
            c: a.c[..len].iter().zip(&b.c[..len]).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, a: &Jet, b: &Jet) -> Jet {
        let order = a.order.min(b.order);
        let len = self.counts[order];
        Jet {
            order,
            c: a.c[..len].iter().zip(&b.c[..len]).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, a: &Jet, s: f64) -> Jet {
        Jet {
            order: a.order,
            c: a.c.iter().map(|x| x * s).collect(),
        }
    }

    /// `acc += a * b`, truncated to the lowest order involved.
    pub fn mul_add(&self, acc: &mut Jet, a: &Jet, b: &Jet) {
        let order = acc.order.min(a.order).min(b.order);
        if order < acc.order {
            acc.c.truncate(self.counts[order]);
            acc.order = order;
        }
        let len = self.counts[order] as u32;
        for &(i, j, k) in &self.mul_table {
            if k >= len {
                break;
            }
            acc.c[k as usize] += a.c[i as usize] * b.c[j as usize];
        }
    }

    pub fn mul(&self, a: &Jet, b: &Jet) -> Jet {
        let mut acc = self.zero(a.order.min(b.order));
        self.mul_add(&mut acc, a, b);
        acc
    }

    /// Partial derivative along variable `v`; loses one order.
    pub fn deriv(&self, a: &Jet, v: usize) -> Jet {
        assert!(a.order > 0, "cannot differentiate an order-0 jet");
        let order = a.order - 1;
        let len = self.counts[order];
        let mut c = vec![0.0; len];
        for &(dst, src, factor) in &self.deriv_tables[v] {
            if dst as usize >= len {
                break;
            }
            c[dst as usize] = factor * a.c[src as usize];
        }
        Jet { order, c }
    }

    /// Value of the mixed partial `d^alpha f` at the expansion point.
    pub fn partial(&self, a: &Jet, alpha: &[u8]) -> Option<f64> {
        let k = self.monomials.iter().position(|m| m.as_slice() == alpha)?;
        let factorial: f64 = alpha
            .iter()
            .map(|&k| (1..=k as u32).product::<u32>() as f64)
            .product();
        a.c.get(k).map(|c| c * factorial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn jet_of(alg: &JetAlgebra, src: &str, c: &[String], p: &[f64]) -> Jet {
        let e = parse_expression(src, c).unwrap();
        alg.from_table(&DerivativeTable::new(&e, c.len(), alg.order()), p)
            .unwrap()
    }

    #[test]
    fn product_of_jets_matches_jet_of_product() {
        let c = names(&["x", "y"]);
        let alg = JetAlgebra::new(2, 4);
        let p = [0.4, -1.1];
        let a = jet_of(&alg, "sin(x)*y^2", &c, &p);
        let b = jet_of(&alg, "exp(x-y)", &c, &p);
        let ab = jet_of(&alg, "sin(x)*y^2*exp(x-y)", &c, &p);
        let prod = alg.mul(&a, &b);
        for (u, v) in prod.coeffs().iter().zip(ab.coeffs()) {
            assert!((u - v).abs() < 1e-12 * (1.0 + v.abs()), "{u} vs {v}");
        }
    }

    #[test]
    fn derivative_of_jet_matches_symbolic() {
        let c = names(&["x", "y"]);
        let alg = JetAlgebra::new(2, 3);
        let p = [0.3, 0.9];
        let a = jet_of(&alg, "x^3*cos(y)", &c, &p);
        let da = alg.deriv(&a, 1);
        let expect = jet_of(&alg, "-x^3*sin(y)", &c, &p);
        assert_eq!(da.order(), 2);
        for (u, v) in da.coeffs().iter().zip(expect.coeffs()) {
            assert!((u - v).abs() < 1e-14);
        }
        assert!((alg.partial(&a, &[2, 1]).unwrap() - (-6.0 * 0.3 * 0.9f64.sin())).abs() < 1e-14);
    }

    #[test]
    fn mixed_orders_truncate() {
        let alg = JetAlgebra::new(1, 3);
        let a = alg.constant(2.0, 3);
        let b = alg.constant(5.0, 1);
        let s = alg.add(&a, &b);
        assert_eq!(s.order(), 1);
        assert_eq!(s.value(), 7.0);
        assert_eq!(alg.mul(&a, &b).order(), 1);
    }
}
