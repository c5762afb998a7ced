//! Exact arithmetic layer: Gaussian-rational scalars, dense polynomials in `t`,
//! and reduced rational functions used as the canonical form for zero tests.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Expr, ExprError};

/// Complex number with exact rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn zero() -> Self {
        Self { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        Self { re: BigRational::one(), im: BigRational::zero() }
    }

    pub fn i() -> Self {
        Self { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn from_int(n: i64) -> Self {
        Self { re: BigRational::from_integer(BigInt::from(n)), im: BigRational::zero() }
    }

    /// Exact fraction `p/q`. Panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Self { re: BigRational::new(BigInt::from(p), BigInt::from(q)), im: BigRational::zero() }
    }

    pub fn from_real(re: BigRational) -> Self {
        Self { re, im: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn neg(&self) -> Self {
        Self { re: -self.re.clone(), im: -self.im.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { re: &self.re + &other.re, im: &self.im + &other.im }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { re: &self.re - &other.re, im: &self.im - &other.im }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = &self.re * &self.re + &self.im * &self.im;
        Some(Self { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|inv| self.mul(&inv))
    }

    /// Exact integer power; `None` when inverting zero.
    pub fn powi(&self, k: i32) -> Option<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Some(acc)
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl GaussianRational {
    /// Canonical string plus the precedence level the string parses at, so the
    /// expression printer can insert parentheses only where required.
    pub(crate) fn display_parts(&self) -> (String, u8) {
        let s = if self.im.is_zero() {
            fmt_rational(&self.re)
        } else if self.re.is_zero() {
            if self.im.is_one() {
                "i".to_string()
            } else if (-self.im.clone()).is_one() {
                "-i".to_string()
            } else {
                format!("{}*i", fmt_rational(&self.im))
            }
        } else {
            let im_abs = self.im.abs();
            let im_part = if im_abs.is_one() { "i".to_string() } else { format!("{}*i", fmt_rational(&im_abs)) };
            let sign = if self.im.is_negative() { '-' } else { '+' };
            format!("{}{}{}", fmt_rational(&self.re), sign, im_part)
        };
        // Precedence of the loosest operator the string reparses through: an
        // interior sign makes it a sum, `*` or `/` a product (even with a
        // leading minus, since `-1/2` reparses as `(-1)/2`), a bare leading
        // minus a negation, anything else an atom.
        let prec = if s.contains('+') || s[1..].contains('-') {
            1
        } else if s.contains('*') || s.contains('/') {
            2
        } else if s.starts_with('-') {
            3
        } else {
            5
        };
        (s, prec)
    }
}

/// Dense polynomial in `t` over the Gaussian rationals.
/// Invariant: no trailing zero coefficients; the zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<GaussianRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn var() -> Self {
        Self::from_coeffs(vec![GaussianRational::zero(), GaussianRational::one()])
    }

    pub fn from_coeffs(coeffs: Vec<GaussianRational>) -> Self {
        let mut p = Self { coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(GaussianRational::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> GaussianRational {
        self.coeffs.get(k).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn leading(&self) -> Option<&GaussianRational> {
        self.coeffs.last()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == GaussianRational::one()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k).add(&other.coeff(k))).collect();
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k).sub(&other.coeff(k))).collect();
        Self::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(GaussianRational::neg).collect())
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![GaussianRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Self::from_coeffs(coeffs)
    }

    /// Euclidean division. Panics if `divisor` is zero; callers guard.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let d_deg = divisor.degree().expect("polynomial division by zero");
        let d_lead_inv = divisor.leading().unwrap().inv().unwrap();
        let mut rem = self.clone();
        let mut quot = vec![GaussianRational::zero(); self.coeffs.len().saturating_sub(d_deg)];
        while let Some(r_deg) = rem.degree() {
            if r_deg < d_deg {
                break;
            }
            let factor = rem.leading().unwrap().mul(&d_lead_inv);
            let shift = r_deg - d_deg;
            quot[shift] = factor.clone();
            let mut sub_coeffs = vec![GaussianRational::zero(); shift];
            sub_coeffs.extend(divisor.coeffs.iter().map(|c| c.mul(&factor)));
            rem = rem.sub(&Self::from_coeffs(sub_coeffs));
        }
        (Self::from_coeffs(quot), rem)
    }

    /// Scales so the leading coefficient is one. Zero stays zero.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(lead) => self.scale(&lead.inv().unwrap()),
        }
    }

    /// Monic greatest common divisor by the Euclidean algorithm.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let mut a = a.monic();
        let mut b = b.monic();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.mul(&GaussianRational::from_int(k as i64)))
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c.to_complex64();
        }
        acc
    }

    pub fn to_expr(&self) -> Expr {
        if self.is_zero() {
            return Expr::int(0);
        }
        let mut acc = Expr::int(0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = match k {
                0 => Expr::from_rat(c.clone()),
                _ => Expr::from_rat(c.clone()) * Expr::t().pow(k as i32),
            };
            acc = acc + term;
        }
        acc
    }
}

/// Rational function of `t` in reduced form.
/// Invariants: denominator monic and coprime to the numerator; the zero
/// function is `0/1`. Structural equality therefore decides function equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self { num: Poly::zero(), den: Poly::one() });
        }
        let g = Poly::gcd(&num, &den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let lead_inv = den.leading().unwrap().inv().unwrap();
        Ok(Self { num: num.scale(&lead_inv), den: den.scale(&lead_inv) })
    }

    pub fn from_poly(p: Poly) -> Self {
        Self { num: p, den: Poly::one() }
    }

    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `Some(c)` when the function is the constant `c`.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        if self.den.is_one() && self.num.degree().map_or(true, |d| d == 0) {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        Self::new(num, den).expect("denominator product of nonzero polynomials is nonzero")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.num);
        let den = self.den.mul(&other.den);
        Self::new(num, den).expect("denominator product of nonzero polynomials is nonzero")
    }

    pub fn div(&self, other: &Self) -> Result<Self, ExprError> {
        if other.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Self::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn powi(&self, k: i32) -> Result<Self, ExprError> {
        if k < 0 && self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let base = if k < 0 {
            Self::new(self.den.clone(), self.num.clone())?
        } else {
            self.clone()
        };
        let mut acc = Self::from_poly(Poly::one());
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> Self {
        let num = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        let den = self.den.mul(&self.den);
        Self::new(num, den).expect("denominator square of a nonzero polynomial is nonzero")
    }

    pub fn eval(&self, t: Complex64) -> Result<Complex64, ExprError> {
        let d = self.den.eval(t);
        if d.norm() == 0.0 {
            return Err(ExprError::EvalDivisionByZero);
        }
        let v = self.num.eval(t) / d;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite)
        }
    }

    pub fn to_expr(&self) -> Expr {
        if self.den.is_one() {
            self.num.to_expr()
        } else {
            self.num.to_expr() / self.den.to_expr()
        }
    }
}

impl std::fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl Expr {
    /// Rewrites the expression as a reduced rational function of `t`.
    ///
    /// Fails with [`ExprError::NotRational`] on transcendental nodes (`exp`,
    /// `sin`, `cos`, `pi`, `e`) and with [`ExprError::DivisionByZero`] when a
    /// divisor is identically zero.
    pub fn rational_normal_form(&self) -> Result<RationalFunction, ExprError> {
        match self {
            Expr::Const(c) => Ok(RationalFunction::from_poly(Poly::constant(c.clone()))),
            Expr::Var => Ok(RationalFunction::from_poly(Poly::var())),
            Expr::Pi => Err(ExprError::NotRational("pi")),
            Expr::Euler => Err(ExprError::NotRational("e")),
            Expr::Neg(a) => Ok(a.rational_normal_form()?.neg()),
            Expr::Add(a, b) => Ok(a.rational_normal_form()?.add(&b.rational_normal_form()?)),
            Expr::Sub(a, b) => Ok(a.rational_normal_form()?.sub(&b.rational_normal_form()?)),
            Expr::Mul(a, b) => Ok(a.rational_normal_form()?.mul(&b.rational_normal_form()?)),
            Expr::Div(a, b) => a.rational_normal_form()?.div(&b.rational_normal_form()?),
            Expr::Pow(a, k) => a.rational_normal_form()?.powi(*k),
            Expr::Exp(_) => Err(ExprError::NotRational("exp")),
            Expr::Sin(_) => Err(ExprError::NotRational("sin")),
            Expr::Cos(_) => Err(ExprError::NotRational("cos")),
        }
    }
}
