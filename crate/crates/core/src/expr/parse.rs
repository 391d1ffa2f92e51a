use std::sync::Arc;

use super::{BinOp, Expr, Func, ParseError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lexeme = &text[start..i];
                let value = lexeme.parse::<f64>().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{lexeme}`"),
                })?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    coords: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message: format!("expected {wanted}, found {}", self.peek().describe()),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Arc::new(lhs), Arc::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Arc::new(lhs), Arc::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::Neg(Arc::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exponent = self.exponent()?;
        Ok(match integer_literal(&exponent) {
            Some(n) => Expr::Pow(Arc::new(base), n),
            // f^g  ->  exp(g * log(f))
            None => Expr::Func(
                Func::Exp,
                Arc::new(Expr::Binary(
                    BinOp::Mul,
                    Arc::new(exponent),
                    Arc::new(Expr::Func(Func::Log, Arc::new(base))),
                )),
            ),
        })
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.exponent()?;
            return Ok(Expr::Neg(Arc::new(inner)));
        }
        self.power()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Const(x))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("')'"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return Err(self.unexpected(&format!("'(' after `{name}`")));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() != Tok::RParen {
                        return Err(self.unexpected("')'"));
                    }
                    self.bump();
                    return Ok(Expr::Func(func, Arc::new(arg)));
                }
                match self.coords.iter().position(|c| *c == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(ParseError::UnknownIdentifier { name, offset }),
                }
            }
            _ => Err(self.unexpected("a number, identifier or '('")),
        }
    }
}

/// Exponent subtrees that denote an exact integer: `3`, `-2`, `(-(4))`.
fn integer_literal(e: &Expr) -> Option<i32> {
    match e {
        Expr::Const(c) if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 => Some(*c as i32),
        Expr::Neg(inner) => integer_literal(inner).map(|n| -n),
        _ => None,
    }
}

/// Parses `text` against the declared coordinate names.
pub fn parse_expression(text: &str, coords: &[String]) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        coords,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_sphere_component() {
        let e = parse_expression("r^2 * sin(th)^2", &names(&["r", "th"])).unwrap();
        let expected = Expr::Binary(
            BinOp::Mul,
            Arc::new(Expr::Pow(Arc::new(Expr::Var(0)), 2)),
            Arc::new(Expr::Pow(
                Arc::new(Expr::Func(Func::Sin, Arc::new(Expr::Var(1)))),
                2,
            )),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn parses_constant() {
        assert_eq!(parse_expression("1", &[]).unwrap(), Expr::Const(1.0));
        assert_eq!(parse_expression("2.5e-3", &[]).unwrap(), Expr::Const(2.5e-3));
        assert_eq!(parse_expression(".5", &[]).unwrap(), Expr::Const(0.5));
    }

    #[test]
    fn reports_syntax_error_offset() {
        let err = parse_expression("x + * y", &names(&["x", "y"])).unwrap_err();
        assert_eq!(err.offset(), 4);
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn reports_unknown_identifier() {
        let err = parse_expression("x + z", &names(&["x", "y"])).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                name: "z".into(),
                offset: 4
            }
        );
    }

    #[test]
    fn caret_binds_tighter_than_unary_minus() {
        let e = parse_expression("-x^2", &names(&["x"])).unwrap();
        assert_eq!(e, Expr::Neg(Arc::new(Expr::Pow(Arc::new(Expr::Var(0)), 2))));
    }

    #[test]
    fn caret_is_right_associative() {
        let e = parse_expression("2^3^2", &[]).unwrap();
        let inner = Expr::Pow(Arc::new(Expr::Const(3.0)), 2);
        // 3^2 is not a literal, so the outer power goes through exp/log
        assert!(matches!(e, Expr::Func(Func::Exp, _)));
        let Expr::Func(_, arg) = e else { unreachable!() };
        let Expr::Binary(BinOp::Mul, g, _) = &*arg else {
            panic!("expected exp(g*log f)")
        };
        assert_eq!(**g, inner);
    }

    #[test]
    fn negative_integer_exponent() {
        let e = parse_expression("x^-2", &names(&["x"])).unwrap();
        assert_eq!(e, Expr::Pow(Arc::new(Expr::Var(0)), -2));
        let e = parse_expression("x^(-3)", &names(&["x"])).unwrap();
        assert_eq!(e, Expr::Pow(Arc::new(Expr::Var(0)), -3));
    }

    #[test]
    fn fractional_exponent_rewritten() {
        let e = parse_expression("x^0.5", &names(&["x"])).unwrap();
        assert!(matches!(e, Expr::Func(Func::Exp, _)));
    }

    #[test]
    fn rejects_trailing_tokens_and_unbalanced() {
        assert!(parse_expression("(x", &names(&["x"])).is_err());
        assert!(parse_expression("x)", &names(&["x"])).is_err());
        assert!(parse_expression("sin x", &names(&["x"])).is_err());
        assert!(parse_expression("", &[]).is_err());
        assert!(parse_expression("x # y", &names(&["x", "y"])).is_err());
    }

    #[test]
    fn function_name_is_not_a_coordinate() {
        let err = parse_expression("sin", &names(&["x"])).unwrap_err();
        assert_eq!(err.offset(), 3);
    }
}
