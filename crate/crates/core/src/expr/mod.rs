//! Closed-form expression language over chart coordinates.
//!
//! Metric components and tensor fields are written as [`Expr`] trees. The
//! language is deliberately small: real constants, coordinates, the
//! elementary functions in [`Func`], the four arithmetic operators and
//! integer powers. Non-integer powers are rewritten at parse time as
//! `exp(g*log(f))`.
//!
//! Derivatives are taken symbolically by [`Expr::diff`], so every metric
//! derivative that enters the curvature pipeline is exact up to floating
//! point evaluation.
//!
//! # Grammar
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' exponent)?
//! exponent := '-' exponent | power
//! atom     := number | ident | func '(' expr ')' | '(' expr ')'
//! number   := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]   (also '.5')
//! func     := sin | cos | tan | sinh | cosh | exp | log | sqrt
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so
//! `-x^2` is `-(x^2)` and `2^3^2` is `2^(3^2)`.

mod diff;
mod eval;
mod parse;
mod print;

use std::fmt;
use std::sync::Arc;

pub use diff::{multi_indices, DerivativeTable};
pub use parse::parse_expression;
pub use print::Printer;

/// Elementary unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// Binary arithmetic operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree. Variables are coordinate indices into the enclosing
/// chart; names live with the chart and are supplied when printing.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Arc<Expr>),
    Func(Func, Arc<Expr>),
    Binary(BinOp, Arc<Expr>, Arc<Expr>),
    /// Integer power with the exponent stored exactly.
    Pow(Arc<Expr>, i32),
}

/// Failure while evaluating an expression at a point.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("domain error in `{subexpr}` at point {point:?}: {reason}")]
pub struct DomainError {
    pub subexpr: String,
    pub point: Vec<f64>,
    pub reason: &'static str,
}

/// Failure while parsing expression text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn constant(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.constant() == Some(1.0)
    }

    // Smart constructors: constant folding and 0/1 identities only.
    // Named like the operator traits on purpose; they take ownership of both sides.

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => Arc::unwrap_or_clone(inner),
            a => Expr::Neg(Arc::new(a)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.constant(), b.constant()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            (Some(0.0), _) => b,
            (_, Some(0.0)) => a,
            _ => Expr::Binary(BinOp::Add, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.constant(), b.constant()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            (Some(0.0), _) => Expr::neg(b),
            (_, Some(0.0)) => a,
            _ => Expr::Binary(BinOp::Sub, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.constant(), b.constant()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            (Some(0.0), _) | (_, Some(0.0)) => Expr::zero(),
            (Some(1.0), _) => b,
            (_, Some(1.0)) => a,
            (Some(-1.0), _) => Expr::neg(b),
            (_, Some(-1.0)) => Expr::neg(a),
            _ => Expr::Binary(BinOp::Mul, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.constant(), b.constant()) {
            (Some(x), Some(y)) if y != 0.0 => Expr::Const(x / y),
            (Some(0.0), _) => Expr::zero(),
            (_, Some(1.0)) => a,
            _ => Expr::Binary(BinOp::Div, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn powi(a: Expr, n: i32) -> Expr {
        match (n, a.constant()) {
            (0, _) => Expr::one(),
            (1, _) => a,
            (_, Some(c)) if n > 0 => Expr::Const(c.powi(n)),
            _ => Expr::Pow(Arc::new(a), n),
        }
    }

    pub fn func(f: Func, a: Expr) -> Expr {
        Expr::Func(f, Arc::new(a))
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => a.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Renders with the given coordinate names.
    pub fn display<'a>(&'a self, coords: &'a [String]) -> Printer<'a> {
        Printer::new(self, coords)
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
