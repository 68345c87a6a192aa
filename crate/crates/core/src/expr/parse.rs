use num_traits::Zero;

use super::{Expr, Func};
use crate::error::{Error, Result};
use crate::numbers::{parse_rational, QSqrt2};

/// Parses the expression DSL:
///
/// ```text
/// expr   := term (('+'|'-') term)*
/// term   := factor ('*' factor)*
/// factor := ['-'] atom ['^' posint]
/// atom   := rational | 'sqrt2' | 'x' | fn '(' expr ')' | '(' expr ')'
/// ```
///
/// A leading `-` directly before a rational literal (with no exponent) folds
/// into a negative constant.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.eat(b'*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        let negated = self.eat(b'-');
        let literal = self.peek().is_some_and(|c| c.is_ascii_digit());
        let atom = self.atom()?;
        let mut e = atom;
        let mut powered = false;
        if self.eat(b'^') {
            e = Expr::Pow(Box::new(e), self.posint()?);
            powered = true;
        }
        if !negated {
            return Ok(e);
        }
        Ok(match e {
            Expr::Const(c) if literal && !powered => Expr::Const(-c),
            other => Expr::Neg(Box::new(other)),
        })
    }

    fn posint(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match s.parse::<u32>() {
            Ok(k) if k > 0 => Ok(k),
            _ => {
                self.pos = start;
                Err(self.err("expected positive integer exponent"))
            }
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.rational(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match name {
                    "x" => return Ok(Expr::Var(0)),
                    "sqrt2" => return Ok(Expr::Const(QSqrt2::sqrt2())),
                    _ => {}
                }
                if let Some(idx) = name.strip_prefix("x_") {
                    if let Ok(i) = idx.parse::<usize>() {
                        if i > 0 && !idx.starts_with('0') {
                            return Ok(Expr::Var(i));
                        }
                    }
                }
                let Some(func) = Func::from_name(name) else {
                    self.pos = start;
                    return Err(Error::UnknownFunction(name.to_string()));
                };
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn rational(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos > s
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'/' {
            self.pos += 1;
            if !digits(self) {
                return Err(self.err("expected denominator"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let r = parse_rational(text).map_err(|_| Error::Syntax {
            pos: start,
            msg: format!("invalid rational `{text}`"),
        })?;
        debug_assert!(!r.denom().is_zero());
        Ok(Expr::Const(QSqrt2::from_rational(r)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numbers::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn parses_examples() {
        let e = parse_expr("2*x*deltaQ(H1(x))").unwrap();
        assert_eq!(
            e,
            Expr::Mul(
                Box::new(Expr::Mul(Box::new(Expr::int(2)), Box::new(Expr::x()))),
                Box::new(Expr::delta_q(Expr::h1(Expr::x())))
            )
        );
        assert_eq!(parse_expr("abs(x)").unwrap(), Expr::abs(Expr::x()));
        assert_eq!(parse_expr("-3/4").unwrap(), Expr::rational(rat(-3, 4)));
        assert_eq!(parse_expr("-2^2").unwrap(), -(Expr::int(2).pow(2)));
        assert_eq!(parse_expr("gamma(x)").unwrap(), Expr::gamma(Expr::x()));
        assert_eq!(parse_expr("x_2").unwrap(), Expr::Var(2));
        let _ = int(0);
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse_expr("foo(x)"), Err(Error::UnknownFunction(n)) if n == "foo"));
        assert!(matches!(parse_expr("x+"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_expr("x^0"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expr("1/0"), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse_expr("(x"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expr("x)"), Err(Error::Syntax { pos: 1, .. })));
    }

    /// Generates trees in the canonical fragment: constants are non-negative
    /// rationals, negative rationals or `sqrt2`, and `Neg` never wraps a
    /// bare constant.
    pub(crate) fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            Just(Expr::x()),
            Just(Expr::Const(QSqrt2::sqrt2())),
            (-20i64..20, 1i64..9).prop_map(|(n, d)| Expr::rational(rat(n, d))),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            let funcs = prop_oneof![
                Just(Func::Abs),
                Just(Func::Exp),
                Just(Func::Sqrt),
                Just(Func::DeltaQ),
                Just(Func::H1),
                Just(Func::W),
                Just(Func::BarGamma),
                Just(Func::Axiom("gamma".into())),
            ];
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                inner.clone().prop_map(|a| match a {
                    c @ Expr::Const(_) => c,
                    other => -other,
                }),
                (inner.clone(), 1u32..4).prop_map(|(a, k)| a.pow(k)),
                (funcs, inner).prop_map(|(f, a)| Expr::call(f, a)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let text = e.to_string();
            let back = parse_expr(&text).unwrap();
            prop_assert_eq!(&back, &e, "text {}", text);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
