//! Formula parser. Grammar, loosest to tightest binding:
//!
//! ```text
//! expr   := term   { ('+' | '-') term }
//! term   := unary  { ('*' | '/') unary }
//! unary  := '-' unary | power
//! power  := atom [ '^' unary ]            (exponent folds to an integer)
//! atom   := number | name | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Names: `t`, `pi`, `e`, `i`; functions: `exp`, `sin`, `cos`. Numbers are
//! decimal literals read exactly (`0.125` is the rational 1/8). `^` binds
//! tighter than unary minus, so `-t^2` means `-(t^2)`. Multiplication is
//! always explicit.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::pow::Pow as _;

use super::{Expr, ExprError, GaussianRational};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(BigRational),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(input: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer { bytes: input.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            let start = lx.pos;
            let Some(&b) = lx.bytes.get(lx.pos) else {
                out.push((Tok::End, start));
                return Ok(out);
            };
            let tok = match b {
                b'+' => {
                    lx.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b'0'..=b'9' | b'.' => lx.number(start)?,
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => lx.name(),
                other => {
                    return Err(ExprError::Parse {
                        pos: start,
                        msg: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn skip_ws(&mut self) {
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn take_digits(&mut self) -> &'a [u8] {
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        &self.bytes[start..self.pos]
    }

    fn number(&mut self, start: usize) -> Result<Tok, ExprError> {
        let int_part = self.take_digits();
        let frac_part = if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac = self.take_digits();
            if frac.is_empty() {
                return Err(ExprError::Parse {
                    pos: self.pos,
                    msg: "expected digits after decimal point".into(),
                });
            }
            frac
        } else {
            &[]
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ExprError::Parse { pos: start, msg: "malformed number".into() });
        }
        let digits: String = int_part
            .iter()
            .chain(frac_part.iter())
            .map(|&b| b as char)
            .collect();
        let numer: BigInt = digits.parse().expect("digit string parses as an integer");
        let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
        Ok(Tok::Number(BigRational::new(numer, denom)))
    }

    fn name(&mut self) -> Tok {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos += 1;
        }
        Tok::Name(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn pos(&self) -> usize {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].0.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    acc = acc / self.unary()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            Ok(-self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exp_pos = self.pos();
        let exponent = self.unary()?;
        let k = exponent
            .constant_value()
            .filter(|c| c.is_real() && c.re.is_integer())
            .and_then(|c| num_traits::ToPrimitive::to_i32(c.re.numer()))
            .ok_or_else(|| ExprError::Parse {
                pos: exp_pos,
                msg: "exponent must be an integer constant".into(),
            })?;
        Ok(base.pow(k))
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Number(r) => Ok(Expr::from_rat(GaussianRational::from_real(r))),
            Tok::LParen => {
                let inner = self.expr()?;
                if self.bump() != Tok::RParen {
                    return Err(ExprError::Parse {
                        pos,
                        msg: "unmatched `(`".into(),
                    });
                }
                Ok(inner)
            }
            Tok::Name(name) => match name.as_str() {
                "t" => Ok(Expr::t()),
                "pi" => Ok(Expr::Pi),
                "e" => Ok(Expr::Euler),
                "i" => Ok(Expr::i()),
                "exp" | "sin" | "cos" => {
                    if self.bump() != Tok::LParen {
                        return Err(ExprError::Parse {
                            pos,
                            msg: format!("`{name}` must be followed by a parenthesized argument"),
                        });
                    }
                    let arg = self.expr()?;
                    if self.bump() != Tok::RParen {
                        return Err(ExprError::Parse {
                            pos,
                            msg: format!("unterminated argument of `{name}`"),
                        });
                    }
                    Ok(match name.as_str() {
                        "exp" => arg.exp(),
                        "sin" => arg.sin(),
                        _ => arg.cos(),
                    })
                }
                other => Err(ExprError::Parse {
                    pos,
                    msg: format!("unknown name `{other}`"),
                }),
            },
            Tok::End => Err(ExprError::Parse {
                pos,
                msg: "expected an operand".into(),
            }),
            _ => Err(ExprError::Parse {
                pos,
                msg: "expected an operand".into(),
            }),
        }
    }
}

/// Parses a formula in `t`. Errors carry the byte offset of the offending
/// token.
pub fn parse(input: &str) -> Result<Expr, ExprError> {
    let toks = Lexer::tokens(input)?;
    let mut p = Parser { toks, idx: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ExprError::Parse {
            pos: p.pos(),
            msg: "unexpected trailing input".into(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn ev(s: &str, t: f64) -> Complex64 {
        parse(s).unwrap().evaluate_real(t).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1+2*3", 0.0).re, 7.0);
        assert_eq!(ev("2^3^2", 0.0).re, 512.0);
        assert_eq!(ev("8/4/2", 0.0).re, 1.0);
        assert_eq!(ev("8-4-2", 0.0).re, 2.0);
        assert_eq!(ev("-2^2", 0.0).re, -4.0);
        assert_eq!(ev("(-2)^2", 0.0).re, 4.0);
        assert_eq!(ev("2*t^3", 2.0).re, 16.0);
    }

    #[test]
    fn decimals_are_exact_rationals() {
        let e = parse("0.125").unwrap();
        assert_eq!(e, Expr::ratio(1, 8));
        assert_eq!(parse("2.50").unwrap(), Expr::ratio(5, 2));
    }

    #[test]
    fn names_and_functions() {
        assert!((ev("exp(1)", 0.0).re - std::f64::consts::E).abs() < 1e-15);
        assert!((ev("sin(pi/2)", 0.0).re - 1.0).abs() < 1e-15);
        assert!((ev("e", 0.0).re - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(ev("i^2", 0.0).re, -1.0);
        assert_eq!(ev("t", 3.5).re, 3.5);
    }

    #[test]
    fn error_offsets() {
        match parse("1/(").unwrap_err() {
            ExprError::Parse { pos, .. } => assert_eq!(pos, 3),
            other => panic!("unexpected error {other:?}"),
        }
        match parse("2*q").unwrap_err() {
            ExprError::Parse { pos, msg } => {
                assert_eq!(pos, 2);
                assert!(msg.contains('q'));
            }
            other => panic!("unexpected error {other:?}"),
        }
        match parse("t^t").unwrap_err() {
            ExprError::Parse { pos, msg } => {
                assert_eq!(pos, 2);
                assert!(msg.contains("integer"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(parse("").is_err());
        assert!(parse("1 2").is_err());
        assert!(parse("sin t").is_err());
    }

    #[test]
    fn negative_and_folded_exponents() {
        assert_eq!(ev("t^-2", 2.0).re, 0.25);
        assert_eq!(ev("t^(3-1)", 3.0).re, 9.0);
        assert!(parse("t^(1/2)").is_err());
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse(" 1 / ( 2*t + 3 ) ").unwrap(), parse("1/(2*t+3)").unwrap());
    }
}
