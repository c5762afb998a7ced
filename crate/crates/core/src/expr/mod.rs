//! Exact symbolic expressions in one variable `t`.
//!
//! The tree is deliberately small: rational constants (with `i`), the
//! constants `pi` and `e`, the variable `t`, field arithmetic, integer powers,
//! and `exp`/`sin`/`cos`. That is enough to state every coefficient formula
//! this crate manipulates while keeping zero-testing decidable for the
//! rational subset via [`RationalFunction`].

mod parse;
mod rational;

pub use parse::parse;
pub use rational::{GaussianRational, Poly, RationalFunction};

use num_complex::Complex64;
use rand::Rng as _;
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("not a rational function of t: contains `{0}`")]
    NotRational(&'static str),
    #[error("division by an expression that is identically zero")]
    DivisionByZero,
    #[error("division by zero while evaluating")]
    EvalDivisionByZero,
    #[error("evaluation produced a non-finite value")]
    NonFinite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(GaussianRational),
    /// The variable `t`.
    Var,
    Pi,
    /// Euler's number, written `e`.
    Euler,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power of a subexpression.
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn t() -> Self {
        Expr::Var
    }

    pub fn int(n: i64) -> Self {
        Expr::Const(GaussianRational::from_int(n))
    }

    /// Exact fraction `p/q`. Panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Expr::Const(GaussianRational::ratio(p, q))
    }

    pub fn i() -> Self {
        Expr::Const(GaussianRational::i())
    }

    pub fn from_rat(c: GaussianRational) -> Self {
        Expr::Const(c)
    }

    fn as_const(&self) -> Option<&GaussianRational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    fn is_zero_const(&self) -> bool {
        self.as_const().is_some_and(GaussianRational::is_zero)
    }

    fn is_one_const(&self) -> bool {
        self.as_const() == Some(&GaussianRational::one())
    }

    pub fn pow(self, k: i32) -> Self {
        match (&self, k) {
            (_, 0) => Expr::int(1),
            (_, 1) => self,
            (Expr::Const(c), _) => match c.powi(k) {
                Some(v) => Expr::Const(v),
                None => Expr::Pow(Box::new(self), k),
            },
            _ => Expr::Pow(Box::new(self), k),
        }
    }

    pub fn exp(self) -> Self {
        if self.is_zero_const() {
            Expr::int(1)
        } else {
            Expr::Exp(Box::new(self))
        }
    }

    pub fn sin(self) -> Self {
        if self.is_zero_const() {
            Expr::int(0)
        } else {
            Expr::Sin(Box::new(self))
        }
    }

    pub fn cos(self) -> Self {
        if self.is_zero_const() {
            Expr::int(1)
        } else {
            Expr::Cos(Box::new(self))
        }
    }

    /// Structural constant folding: `Some(c)` when the expression contains no
    /// variable and no transcendental node, evaluated exactly.
    pub fn constant_value(&self) -> Option<GaussianRational> {
        match self {
            Expr::Const(c) => Some(c.clone()),
            Expr::Var | Expr::Pi | Expr::Euler => None,
            Expr::Neg(a) => Some(a.constant_value()?.neg()),
            Expr::Add(a, b) => Some(a.constant_value()?.add(&b.constant_value()?)),
            Expr::Sub(a, b) => Some(a.constant_value()?.sub(&b.constant_value()?)),
            Expr::Mul(a, b) => Some(a.constant_value()?.mul(&b.constant_value()?)),
            Expr::Div(a, b) => a.constant_value()?.div(&b.constant_value()?),
            Expr::Pow(a, k) => a.constant_value()?.powi(*k),
            Expr::Exp(_) | Expr::Sin(_) | Expr::Cos(_) => None,
        }
    }

    /// Exact derivative with respect to `t`.
    pub fn diff(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Pi | Expr::Euler => Expr::int(0),
            Expr::Var => Expr::int(1),
            Expr::Neg(a) => -a.diff(),
            Expr::Add(a, b) => a.diff() + b.diff(),
            Expr::Sub(a, b) => a.diff() - b.diff(),
            Expr::Mul(a, b) => a.diff() * (**b).clone() + (**a).clone() * b.diff(),
            Expr::Div(a, b) => {
                (a.diff() * (**b).clone() - (**a).clone() * b.diff()) / (**b).clone().pow(2)
            }
            Expr::Pow(a, k) => Expr::int(*k as i64) * (**a).clone().pow(k - 1) * a.diff(),
            Expr::Exp(a) => (**a).clone().exp() * a.diff(),
            Expr::Sin(a) => (**a).clone().cos() * a.diff(),
            Expr::Cos(a) => -((**a).clone().sin()) * a.diff(),
        }
    }

    /// Evaluates at a complex `t`. Division by zero and overflow surface as
    /// errors rather than silent infinities.
    pub fn evaluate(&self, t: Complex64) -> Result<Complex64, ExprError> {
        let fin = |v: Complex64| {
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(ExprError::NonFinite)
            }
        };
        match self {
            Expr::Const(c) => fin(c.to_complex64()),
            Expr::Var => Ok(t),
            Expr::Pi => Ok(Complex64::new(std::f64::consts::PI, 0.0)),
            Expr::Euler => Ok(Complex64::new(std::f64::consts::E, 0.0)),
            Expr::Neg(a) => Ok(-a.evaluate(t)?),
            Expr::Add(a, b) => fin(a.evaluate(t)? + b.evaluate(t)?),
            Expr::Sub(a, b) => fin(a.evaluate(t)? - b.evaluate(t)?),
            Expr::Mul(a, b) => fin(a.evaluate(t)? * b.evaluate(t)?),
            Expr::Div(a, b) => {
                let den = b.evaluate(t)?;
                if den.norm() == 0.0 {
                    return Err(ExprError::EvalDivisionByZero);
                }
                fin(a.evaluate(t)? / den)
            }
            Expr::Pow(a, k) => {
                let base = a.evaluate(t)?;
                if *k < 0 && base.norm() == 0.0 {
                    return Err(ExprError::EvalDivisionByZero);
                }
                fin(base.powi(*k))
            }
            Expr::Exp(a) => fin(a.evaluate(t)?.exp()),
            Expr::Sin(a) => fin(a.evaluate(t)?.sin()),
            Expr::Cos(a) => fin(a.evaluate(t)?.cos()),
        }
    }

    /// Evaluates at a real `t`.
    pub fn evaluate_real(&self, t: f64) -> Result<Complex64, ExprError> {
        self.evaluate(Complex64::new(t, 0.0))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.neg()),
            Expr::Neg(a) => *a,
            other => Expr::Neg(Box::new(other)),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Expr::Const(a.add(b));
        }
        if self.is_zero_const() {
            return rhs;
        }
        if rhs.is_zero_const() {
            return self;
        }
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Expr::Const(a.sub(b));
        }
        if rhs.is_zero_const() {
            return self;
        }
        if self.is_zero_const() {
            return -rhs;
        }
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Expr::Const(a.mul(b));
        }
        if self.is_zero_const() || rhs.is_zero_const() {
            return Expr::int(0);
        }
        if self.is_one_const() {
            return rhs;
        }
        if rhs.is_one_const() {
            return self;
        }
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        if rhs.is_one_const() {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            if let Some(q) = a.div(b) {
                return Expr::Const(q);
            }
        }
        if self.is_zero_const() && !rhs.is_zero_const() {
            return Expr::int(0);
        }
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

// Precedence levels for printing: Add/Sub 1, Mul/Div 2, unary minus 3, `^` 4,
// atoms 5. A child is parenthesized when its level is below the context's
// minimum, which makes every printed string reparse to an equal value.
fn write_prec(f: &mut std::fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> std::fmt::Result {
    let prec = match e {
        Expr::Const(c) => c.display_parts().1,
        Expr::Var | Expr::Pi | Expr::Euler | Expr::Exp(_) | Expr::Sin(_) | Expr::Cos(_) => 5,
        Expr::Pow(..) => 4,
        Expr::Neg(_) => 3,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Add(..) | Expr::Sub(..) => 1,
    };
    if prec < min_prec {
        write!(f, "(")?;
        write_prec(f, e, 0)?;
        return write!(f, ")");
    }
    match e {
        Expr::Const(c) => write!(f, "{}", c.display_parts().0),
        Expr::Var => write!(f, "t"),
        Expr::Pi => write!(f, "pi"),
        Expr::Euler => write!(f, "e"),
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_prec(f, a, 3)
        }
        Expr::Add(a, b) => {
            write_prec(f, a, 1)?;
            write!(f, "+")?;
            write_prec(f, b, 1)
        }
        Expr::Sub(a, b) => {
            write_prec(f, a, 1)?;
            write!(f, "-")?;
            write_prec(f, b, 2)
        }
        Expr::Mul(a, b) => {
            write_prec(f, a, 2)?;
            write!(f, "*")?;
            write_prec(f, b, 2)
        }
        Expr::Div(a, b) => {
            write_prec(f, a, 2)?;
            write!(f, "/")?;
            write_prec(f, b, 3)
        }
        Expr::Pow(a, k) => {
            write_prec(f, a, 5)?;
            if *k < 0 {
                write!(f, "^({k})")
            } else {
                write!(f, "^{k}")
            }
        }
        Expr::Exp(a) => {
            write!(f, "exp(")?;
            write_prec(f, a, 0)?;
            write!(f, ")")
        }
        Expr::Sin(a) => {
            write!(f, "sin(")?;
            write_prec(f, a, 0)?;
            write!(f, ")")
        }
        Expr::Cos(a) => {
            write!(f, "cos(")?;
            write_prec(f, a, 0)?;
            write!(f, ")")
        }
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write_prec(f, self, 0)
    }
}

/// Outcome of deciding whether an expression is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroVerdict {
    /// Rational normal form reduced to the zero function.
    ExactlyZero,
    /// Rational normal form is a nonzero canonical quotient.
    ExactlyNonzero(RationalFunction),
    /// Not rational; vanished at every probe point relative to term size.
    SampledZero { max_ratio: f64 },
    /// Not rational; a probe point saw a value well above rounding noise.
    SampledNonzero { max_ratio: f64 },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroVerdict::ExactlyZero | ZeroVerdict::SampledZero { .. })
    }
}

/// Cancellation guard for the sampled path: the residual at each probe point
/// is compared against the largest additive term entering it, so a sum of
/// large terms that cancels to rounding noise still counts as zero.
const SAMPLED_ZERO_TOL: f64 = 1e-12;
const SAMPLE_COUNT: usize = 32;
const SAMPLE_SEED: u64 = 0x7a3f_19c4_55aa_0e01;

fn additive_terms<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            additive_terms(a, out);
            additive_terms(b, out);
        }
        Expr::Neg(a) => additive_terms(a, out),
        other => out.push(other),
    }
}

/// Largest observed value of `|e(t)| / max(1, largest additive term at t)`
/// over a deterministic set of random probe points in `[-10, 10]`. The
/// division guards against calling a sum of huge, cancelling terms nonzero
/// just because the rounding noise is large in absolute terms. Probe points
/// where the expression or one of its terms blows up (poles) are redrawn;
/// an expression with no admissible probe points is an error.
pub fn sampled_residual_ratio(e: &Expr) -> Result<f64, ExprError> {
    let mut terms = Vec::new();
    additive_terms(e, &mut terms);
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut max_ratio: f64 = 0.0;
    let mut accepted = 0;
    let mut draws = 0;
    while accepted < SAMPLE_COUNT {
        draws += 1;
        if draws > 1000 {
            return Err(ExprError::NonFinite);
        }
        let t = Complex64::new(rng.random_range(-10.0..10.0), 0.0);
        let Ok(value) = e.evaluate(t) else { continue };
        let mut scale: f64 = 1.0;
        let mut near_pole = false;
        for term in &terms {
            match term.evaluate(t) {
                Ok(v) if v.norm() <= 1e14 => scale = scale.max(v.norm()),
                _ => {
                    near_pole = true;
                    break;
                }
            }
        }
        if near_pole {
            continue;
        }
        accepted += 1;
        max_ratio = max_ratio.max(value.norm() / scale);
    }
    Ok(max_ratio)
}

/// Decides `e == 0` as a function of `t`: exactly via the rational normal
/// form when possible, otherwise by deterministic random sampling on
/// `[-10, 10]` with a relative tolerance of `1e-12`.
pub fn is_identically_zero(e: &Expr) -> Result<ZeroVerdict, ExprError> {
    match e.rational_normal_form() {
        Ok(r) => {
            if r.is_zero() {
                Ok(ZeroVerdict::ExactlyZero)
            } else {
                Ok(ZeroVerdict::ExactlyNonzero(r))
            }
        }
        Err(ExprError::NotRational(_)) => {
            let max_ratio = sampled_residual_ratio(e)?;
            if max_ratio < SAMPLED_ZERO_TOL {
                Ok(ZeroVerdict::SampledZero { max_ratio })
            } else {
                Ok(ZeroVerdict::SampledNonzero { max_ratio })
            }
        }
        Err(other) => Err(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_examples() {
        let e = parse("1/(2*t+3)").unwrap();
        assert_eq!(e.to_string(), "1/(2*t+3)");
        let e = parse("-(t+1)^2").unwrap();
        assert_eq!(e.to_string(), "-(t+1)^2");
        assert_eq!(parse("t^-2").unwrap().to_string(), "t^(-2)");
    }

    #[test]
    fn diff_product_and_chain_rule() {
        let e = parse("t^2*exp(3*t)").unwrap();
        let d = e.diff();
        // d/dt = (2t + 3t^2) e^{3t}; check numerically at t=0.7.
        let t = Complex64::new(0.7, 0.0);
        let expect = (2.0 * 0.7 + 3.0 * 0.49) * (3.0 * 0.7f64).exp();
        let got = d.evaluate(t).unwrap();
        assert!((got.re - expect).abs() < 1e-12 * expect.abs());
        assert!(got.im.abs() < 1e-15);
    }

    #[test]
    fn diff_rational_exact() {
        let e = parse("1/(2*t+3)").unwrap();
        let d = e.diff().rational_normal_form().unwrap();
        let expect = parse("-2/(2*t+3)^2").unwrap().rational_normal_form().unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn evaluate_pole_errors() {
        let e = parse("1/t").unwrap();
        assert_eq!(e.evaluate(Complex64::new(0.0, 0.0)), Err(ExprError::EvalDivisionByZero));
        assert!(e.evaluate(Complex64::new(2.0, 0.0)).is_ok());
    }

    #[test]
    fn evaluate_overflow_errors() {
        let e = parse("exp(exp(exp(t)))").unwrap();
        assert_eq!(e.evaluate(Complex64::new(10.0, 0.0)), Err(ExprError::NonFinite));
    }

    #[test]
    fn zero_verdict_exact_paths() {
        let z = parse("(t+1)^2 - t^2 - 2*t - 1").unwrap();
        assert_eq!(is_identically_zero(&z).unwrap(), ZeroVerdict::ExactlyZero);
        let nz = parse("t^2+1").unwrap();
        assert!(matches!(is_identically_zero(&nz).unwrap(), ZeroVerdict::ExactlyNonzero(_)));
    }

    #[test]
    fn zero_verdict_sampled_paths() {
        let z = parse("sin(t)^2 + cos(t)^2 - 1").unwrap();
        assert!(matches!(is_identically_zero(&z).unwrap(), ZeroVerdict::SampledZero { .. }));
        let nz = parse("sin(t) - t").unwrap();
        assert!(matches!(is_identically_zero(&nz).unwrap(), ZeroVerdict::SampledNonzero { .. }));
    }

    #[test]
    fn zero_verdict_handles_poles_in_terms() {
        // exp picks the sampled path; 1/(t-1) has a pole inside the window.
        let z = parse("exp(t)/(t-1) - exp(t)/(t-1)").unwrap();
        assert!(is_identically_zero(&z).unwrap().is_zero());
    }

    #[test]
    fn constant_folding_in_ops() {
        assert_eq!(Expr::int(2) + Expr::int(3), Expr::int(5));
        assert_eq!(Expr::int(2) * Expr::t() * Expr::int(0), Expr::int(0));
        assert_eq!(Expr::t().pow(0), Expr::int(1));
        assert_eq!(Expr::i() * Expr::i(), Expr::int(-1));
        assert_eq!(Expr::int(1) / Expr::int(2), Expr::ratio(1, 2));
    }
}
