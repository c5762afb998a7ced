//! Singularity-expansion integrability test for
//! `i u_t + u_xx + F(t) |u|^2 u = 0`.
//!
//! The field and its conjugate are expanded in Laurent series
//! `u = sum u_n xi^(n-1)`, `v = sum v_n xi^(n-1)` about a movable singular
//! line `xi = x + psi(t) = 0`, treating `v` as an independent field. Matching
//! powers of `xi` gives a linear system for `(u_n, v_n)` at each order whose
//! matrix degenerates at the resonances. The test passes when the two
//! nontrivial resonance conditions hold identically in `t`; working through
//! them reduces the whole test to a single differential constraint on the
//! coupling,
//!
//! ```text
//! 2 F'(t)^2 - F(t) F''(t) == 0,
//! ```
//!
//! equivalently `(1/F)'' == 0`, so exactly the couplings `F = 1/(a t + b)`
//! (constants included) pass.
//!
//! All formulas below were rederived from the order-by-order recursion; the
//! unit tests repeat that derivation numerically over exact rationals and
//! compare against these closed forms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{is_identically_zero, sampled_residual_ratio, Expr, ExprError, ZeroVerdict};
use crate::num_fmt::F17;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PainleveError {
    #[error("the coupling F(t) is identically zero")]
    DegenerateCoupling,
    #[error("the leading amplitude u0(t) is identically zero")]
    DegenerateAmplitude,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Exponents of the leading singular behaviour and the product constraint
/// that fixes the leading amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingOrder {
    /// `u ~ u0 * xi^p` with `p = -1`.
    pub p: i64,
    /// `v ~ v0 * xi^q` with `q = -1`.
    pub q: i64,
    /// `u0 * v0` must equal this expression, namely `-2/F`.
    pub product: Expr,
}

/// Balancing `u_xx` against `F u^2 v` forces simple poles in both fields and
/// pins the product of the leading amplitudes; the amplitudes themselves
/// stay free (one function's worth of gauge).
pub fn leading_order(f: &Expr) -> Result<LeadingOrder, PainleveError> {
    ensure_nonzero(f, PainleveError::DegenerateCoupling)?;
    Ok(LeadingOrder {
        p: -1,
        q: -1,
        product: Expr::int(-2) / f.clone(),
    })
}

/// Determinant of the order-`n` matching matrix, up to normalization:
/// `n (n-4) (n-3) (n+1)`.
pub fn resonance_determinant(n: i64) -> i64 {
    n * (n - 4) * (n - 3) * (n + 1)
}

/// Integer roots of the resonance determinant, in increasing order. `-1` is
/// the universal root tied to singular-line freedom; `0` reflects the free
/// leading amplitude; `3` and `4` carry the nontrivial conditions.
pub fn resonances() -> [i64; 4] {
    [-1, 0, 3, 4]
}

/// Laurent coefficients through second order for a given coupling `F`,
/// singular-line function `psi`, and free leading amplitude `u0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentCoefficients {
    pub v0: Expr,
    pub u1: Expr,
    pub v1: Expr,
    pub u2: Expr,
    pub v2: Expr,
}

pub fn laurent_coefficients(
    f: &Expr,
    psi: &Expr,
    u0: &Expr,
) -> Result<LaurentCoefficients, PainleveError> {
    ensure_nonzero(f, PainleveError::DegenerateCoupling)?;
    ensure_nonzero(u0, PainleveError::DegenerateAmplitude)?;
    let i = Expr::i();
    let half = Expr::ratio(1, 2);
    let psi_t = psi.diff();
    let u0_t = u0.diff();
    let v0 = Expr::int(-2) / (f.clone() * u0.clone());
    let v0_t = v0.diff();

    let u1 = -(i.clone() * half.clone()) * u0.clone() * psi_t.clone();
    let v1 = (i.clone() * half.clone()) * v0.clone() * psi_t.clone();

    let u2_num = i.clone() * v0_t.clone() * u0.clone()
        + Expr::int(2) * i.clone() * u0_t.clone() * v0.clone()
        - half.clone() * u0.clone() * v0.clone() * psi_t.clone().pow(2);
    let u2 = u2_num / (Expr::int(6) * v0.clone());

    let v2_num = -(i.clone() * u0_t.clone() * v0.clone())
        - Expr::int(2) * i.clone() * v0_t.clone() * u0.clone()
        - half * u0.clone() * v0.clone() * psi_t.clone().pow(2);
    let v2 = v2_num / (Expr::int(6) * u0.clone());

    Ok(LaurentCoefficients { v0, u1, v1, u2, v2 })
}

/// Right-hand sides of the degenerate order-3 system. Its solvability
/// condition is `A3 v0 - B3 u0 == 0`.
pub fn order3_sources(f: &Expr, psi: &Expr, u0: &Expr) -> Result<(Expr, Expr), PainleveError> {
    ensure_nonzero(f, PainleveError::DegenerateCoupling)?;
    ensure_nonzero(u0, PainleveError::DegenerateAmplitude)?;
    let ft = f.diff();
    let psi_t = psi.diff();
    let psi_tt = psi_t.diff();
    let a3 = u0.clone() * (ft.clone() * psi_t.clone() - f.clone() * psi_tt.clone())
        / (Expr::int(2) * f.clone());
    let b3 = (f.clone() * psi_tt - ft * psi_t) / (u0.clone() * f.clone().pow(2));
    Ok((a3, b3))
}

/// Resonance condition at order 3: `A3 v0 - B3 u0`. Identically zero for
/// every coupling, which is what makes the singular line `psi` a free
/// function.
pub fn compatibility_n3(f: &Expr, psi: &Expr, u0: &Expr) -> Result<Expr, PainleveError> {
    let (a3, b3) = order3_sources(f, psi, u0)?;
    let v0 = Expr::int(-2) / (f.clone() * u0.clone());
    Ok(a3 * v0 - b3 * u0.clone())
}

/// Right-hand sides of the degenerate order-4 system, in the gauge `u3 = 0`.
pub fn order4_sources(f: &Expr, psi: &Expr, u0: &Expr) -> Result<(Expr, Expr), PainleveError> {
    ensure_nonzero(f, PainleveError::DegenerateCoupling)?;
    ensure_nonzero(u0, PainleveError::DegenerateAmplitude)?;
    let i = Expr::i();
    let ft = f.diff();
    let ftt = ft.diff();
    let psi_t = psi.diff();
    let psi_tt = psi_t.diff();
    let u0_t = u0.diff();
    let u0_tt = u0_t.diff();
    let f2 = f.clone().pow(2);
    let u02 = u0.clone().pow(2);

    // Shared combination of both sources.
    let x = -(f2.clone() * u0_t.clone().pow(2))
        - Expr::int(2) * i.clone() * u02.clone() * f2.clone() * psi_t.clone() * psi_tt.clone()
        + u0.clone() * f2.clone() * u0_tt.clone()
        + i * u02.clone() * f.clone() * psi_t.clone().pow(2) * ft.clone()
        - u0.clone() * f.clone() * u0_t.clone() * ft.clone();

    let a4 = (x.clone() + Expr::int(2) * u02.clone() * ft.clone().pow(2)
        - u02.clone() * f.clone() * ftt.clone())
        / (Expr::int(6) * u0.clone() * f2.clone());
    let b4 = (x - Expr::int(4) * u02.clone() * ft.pow(2) + Expr::int(2) * u02 * f.clone() * ftt)
        / (Expr::int(3) * u0.clone().pow(3) * f.clone().pow(3));
    Ok((a4, b4))
}

/// Resonance condition at order 4: `v0 A4 + u0 B4`. Equals
/// `-(2 F'^2 - F F'') / F^3` identically, independent of `psi` and `u0`, so
/// it vanishes exactly when the coupling constraint holds.
pub fn compatibility_n4(f: &Expr, psi: &Expr, u0: &Expr) -> Result<Expr, PainleveError> {
    let (a4, b4) = order4_sources(f, psi, u0)?;
    let v0 = Expr::int(-2) / (f.clone() * u0.clone());
    Ok(v0 * a4 + u0.clone() * b4)
}

/// The scalar constraint the whole test reduces to: `2 F'^2 - F F''`.
pub fn coupling_constraint(f: &Expr) -> Expr {
    let ft = f.diff();
    let ftt = ft.diff();
    Expr::int(2) * ft.clone().pow(2) - f.clone() * ftt
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeadingExponents {
    pub p: i64,
    pub q: i64,
}

/// Machine-readable outcome of the full test for one coupling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PainleveReport {
    pub leading: LeadingExponents,
    pub resonances: Vec<i64>,
    /// Largest sampled magnitude of the order-3 condition (zero when it
    /// reduces exactly).
    pub n3_residual_norm: F17,
    pub n4_identically_zero: bool,
    /// Canonical form of `2 F'^2 - F F''`; `"0"` on a pass.
    pub constraint_residual: String,
    pub verdict: Verdict,
}

/// Runs the test with the default witnesses `psi = t^2`, `u0 = 1`. The
/// verdict does not depend on this choice; the witnesses only give the
/// order-3/order-4 conditions concrete values to report.
pub fn painleve_check(f: &Expr) -> Result<PainleveReport, PainleveError> {
    painleve_check_with(f, &Expr::t().pow(2), &Expr::int(1))
}

pub fn painleve_check_with(
    f: &Expr,
    psi: &Expr,
    u0: &Expr,
) -> Result<PainleveReport, PainleveError> {
    let n3 = compatibility_n3(f, psi, u0)?;
    let n3_residual_norm = match is_identically_zero(&n3)? {
        ZeroVerdict::ExactlyZero => 0.0,
        ZeroVerdict::SampledZero { max_ratio } | ZeroVerdict::SampledNonzero { max_ratio } => {
            max_ratio
        }
        ZeroVerdict::ExactlyNonzero(_) => sampled_residual_ratio(&n3)?,
    };

    let n4 = compatibility_n4(f, psi, u0)?;
    let n4_identically_zero = is_identically_zero(&n4)?.is_zero();

    let constraint = coupling_constraint(f);
    let (constraint_residual, verdict) = match is_identically_zero(&constraint)? {
        ZeroVerdict::ExactlyZero => ("0".to_string(), Verdict::Pass),
        ZeroVerdict::SampledZero { .. } => ("0".to_string(), Verdict::Pass),
        ZeroVerdict::ExactlyNonzero(r) => (r.to_string(), Verdict::Fail),
        ZeroVerdict::SampledNonzero { .. } => (constraint.to_string(), Verdict::Fail),
    };

    Ok(PainleveReport {
        leading: LeadingExponents { p: -1, q: -1 },
        resonances: resonances().to_vec(),
        n3_residual_norm: F17(n3_residual_norm),
        n4_identically_zero,
        constraint_residual,
        verdict,
    })
}

fn ensure_nonzero(e: &Expr, err: PainleveError) -> Result<(), PainleveError> {
    if is_identically_zero(e)?.is_zero() {
        Err(err)
    } else {
        Ok(())
    }
}
