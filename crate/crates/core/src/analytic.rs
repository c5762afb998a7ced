//! Closed-form solutions with exact partial derivatives.
//!
//! Every solution type carries hand-differentiated `u_t`, `u_x`, `u_xx`, so
//! equation residuals can be evaluated to machine precision without finite
//! differencing. The nonlinear solitary waves solve
//! `i u_t + u_xx + F(t) |u|^2 u = 0` for their respective couplings; the
//! plane wave and Gaussian packet solve the free equation `i u_t + u_xx = 0`
//! and serve as oracles for the symmetry-group constants.

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::{Expr, ExprError};

/// Open time interval on which a wave may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInterval {
    pub lo: f64,
    pub hi: f64,
}

impl TimeInterval {
    pub const ALL: TimeInterval = TimeInterval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        TimeInterval { lo, hi }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo < t && t < self.hi
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn intersect(&self, other: &TimeInterval) -> TimeInterval {
        TimeInterval {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }
}

impl std::fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("time {t} is outside the wave's domain {domain}")]
    OutsideTimeDomain { t: f64, domain: TimeInterval },
    #[error("the transform is singular at time {t}")]
    SingularTime { t: f64 },
    #[error("a mapped time interval would cross the singular time {t}")]
    IntervalCrossesSingularity { t: f64 },
    #[error("preimage point x = {x} leaves the trusted central region of the sampled grid")]
    OutsideGridSupport { x: f64 },
    #[error("field is stored at time {field_time} but the transform needs it at {required}")]
    TimeMismatch { field_time: f64, required: f64 },
    #[error("coupling evaluation failed: {0}")]
    Coupling(#[from] ExprError),
}

/// A complex field `u(t, x)` evaluable pointwise.
pub trait Wave {
    fn eval(&self, t: f64, x: f64) -> Result<Complex64, WaveError>;
    fn time_domain(&self) -> TimeInterval;
}

/// A wave with exact closed-form partial derivatives.
pub trait AnalyticWave: Wave {
    fn u_t(&self, t: f64, x: f64) -> Result<Complex64, WaveError>;
    fn u_x(&self, t: f64, x: f64) -> Result<Complex64, WaveError>;
    fn u_xx(&self, t: f64, x: f64) -> Result<Complex64, WaveError>;
}

impl<W: Wave + ?Sized> Wave for &W {
    fn eval(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        (**self).eval(t, x)
    }
    fn time_domain(&self) -> TimeInterval {
        (**self).time_domain()
    }
}

impl<W: AnalyticWave + ?Sized> AnalyticWave for &W {
    fn u_t(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        (**self).u_t(t, x)
    }
    fn u_x(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        (**self).u_x(t, x)
    }
    fn u_xx(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        (**self).u_xx(t, x)
    }
}

/// A wave restricted to a narrower time interval, used for instance to pick
/// one branch of a solution before a transform whose interval map would
/// otherwise cross a singular time.
#[derive(Debug, Clone)]
pub struct Restricted<W> {
    pub inner: W,
    pub domain: TimeInterval,
}

impl<W: Wave> Wave for Restricted<W> {
    fn eval(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        if !self.domain.contains(t) {
            return Err(WaveError::OutsideTimeDomain { t, domain: self.time_domain() });
        }
        self.inner.eval(t, x)
    }

    fn time_domain(&self) -> TimeInterval {
        self.inner.time_domain().intersect(&self.domain)
    }
}

/// A wave defined by a closure, handy for ad-hoc oracle fields in tests.
#[derive(Clone)]
pub struct FnWave<F> {
    pub f: F,
    pub domain: TimeInterval,
}

impl<F: Fn(f64, f64) -> Complex64> Wave for FnWave<F> {
    fn eval(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        if !self.domain.contains(t) {
            return Err(WaveError::OutsideTimeDomain { t, domain: self.domain });
        }
        Ok((self.f)(t, x))
    }

    fn time_domain(&self) -> TimeInterval {
        self.domain
    }
}

fn sech(y: f64) -> f64 {
    1.0 / y.cosh()
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Which side of the `t = 0` singularity the decaying soliton is evaluated
/// on. Only the positive branch solves the `F = 1/t` equation: for `t < 0`
/// that coupling is negative (defocusing) and the sech family is not a
/// solution there. The negative branch continues the same closed form
/// through the principal square root, which is occasionally useful for
/// plotting and for exercising domain bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeBranch {
    Positive,
    Negative,
}

/// The closed-form solitary waves.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticSolution {
    /// `sqrt(2) e^{it} sech(x - x0)`, constant coupling `F = 1`.
    Standing { x0: f64 },
    /// `sqrt(2) a e^{i(vt - kx)} sech(a(x + 2kt))` with `a = sqrt(k^2 + v)`,
    /// constant coupling `F = 1`. The crest travels along `x = -2kt`.
    Travelling { k: f64, v: f64 },
    /// `sqrt(2) t^{-1/2} e^{i(x^2/(4t) - 1/t)} sech(-x/t - x0)` for the
    /// coupling `F = 1/t`, on one side of `t = 0` (see [`TimeBranch`]).
    TimeDependent { x0: f64, branch: TimeBranch },
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("invalid soliton parameters: k^2 + v = {0} must be positive")]
pub struct InvalidSolitonWidth(pub f64);

pub fn standing_soliton(x0: f64) -> AnalyticSolution {
    AnalyticSolution::Standing { x0 }
}

pub fn travelling_soliton(k: f64, v: f64) -> Result<AnalyticSolution, InvalidSolitonWidth> {
    let a2 = k * k + v;
    if a2 > 0.0 && a2.is_finite() {
        Ok(AnalyticSolution::Travelling { k, v })
    } else {
        Err(InvalidSolitonWidth(a2))
    }
}

/// Decaying soliton on the positive-time branch.
pub fn td_soliton(x0: f64) -> AnalyticSolution {
    AnalyticSolution::TimeDependent { x0, branch: TimeBranch::Positive }
}

pub fn td_soliton_on(x0: f64, branch: TimeBranch) -> AnalyticSolution {
    AnalyticSolution::TimeDependent { x0, branch }
}

impl AnalyticSolution {
    /// The coupling `F(t)` this solution solves the equation for.
    pub fn coupling(&self) -> Expr {
        match self {
            AnalyticSolution::Standing { .. } | AnalyticSolution::Travelling { .. } => Expr::int(1),
            AnalyticSolution::TimeDependent { .. } => Expr::int(1) / Expr::t(),
        }
    }

    fn check_domain(&self, t: f64) -> Result<(), WaveError> {
        let domain = self.time_domain();
        if domain.contains(t) {
            Ok(())
        } else {
            Err(WaveError::OutsideTimeDomain { t, domain })
        }
    }

    /// Logarithmic derivatives: `u_t = L_t u`, `u_x = L_x u`, and
    /// `u_xx = Q u`. Working with ratios keeps every factor bounded where
    /// the envelope decays.
    fn log_derivatives(&self, t: f64, x: f64) -> (Complex64, Complex64, Complex64) {
        let i = Complex64::I;
        match *self {
            AnalyticSolution::Standing { x0 } => {
                let y = x - x0;
                let th = y.tanh();
                let s2 = sech(y) * sech(y);
                let lt = i;
                let lx = Complex64::from(-th);
                let q = Complex64::from(1.0 - 2.0 * s2);
                (lt, lx, q)
            }
            AnalyticSolution::Travelling { k, v } => {
                let a = (k * k + v).sqrt();
                let y = a * (x + 2.0 * k * t);
                let th = y.tanh();
                let s2 = sech(y) * sech(y);
                let lt = i * v - 2.0 * a * k * th;
                let lx = -i * k - a * th;
                let q = lx * lx - a * a * s2;
                (lt, lx, q)
            }
            AnalyticSolution::TimeDependent { x0, .. } => {
                let w = -x / t - x0;
                let th = w.tanh();
                let s2 = sech(w) * sech(w);
                let phi_t = -x * x / (4.0 * t * t) + 1.0 / (t * t);
                let w_t = x / (t * t);
                let lt = Complex64::new(-1.0 / (2.0 * t) - th * w_t, phi_t);
                let lx = Complex64::new(th / t, x / (2.0 * t));
                let q = lx * lx + i / (2.0 * t) - s2 / (t * t);
                (lt, lx, q)
            }
        }
    }
}

impl Wave for AnalyticSolution {
    fn eval(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        self.check_domain(t)?;
        let i = Complex64::I;
        Ok(match *self {
            AnalyticSolution::Standing { x0 } => SQRT2 * sech(x - x0) * (i * t).exp(),
            AnalyticSolution::Travelling { k, v } => {
                let a = (k * k + v).sqrt();
                let phase = (i * (v * t - k * x)).exp();
                SQRT2 * a * sech(a * (x + 2.0 * k * t)) * phase
            }
            AnalyticSolution::TimeDependent { x0, .. } => {
                // Principal square root; real on the positive branch.
                let amp = SQRT2 / Complex64::from(t).sqrt();
                let phi = x * x / (4.0 * t) - 1.0 / t;
                amp * sech(-x / t - x0) * (i * phi).exp()
            }
        })
    }

    fn time_domain(&self) -> TimeInterval {
        match self {
            AnalyticSolution::Standing { .. } | AnalyticSolution::Travelling { .. } => {
                TimeInterval::ALL
            }
            AnalyticSolution::TimeDependent { branch, .. } => match branch {
                TimeBranch::Positive => TimeInterval::new(0.0, f64::INFINITY),
                TimeBranch::Negative => TimeInterval::new(f64::NEG_INFINITY, 0.0),
            },
        }
    }
}

impl AnalyticWave for AnalyticSolution {
    fn u_t(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        Ok(self.log_derivatives(t, x).0 * self.eval(t, x)?)
    }

    fn u_x(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        Ok(self.log_derivatives(t, x).1 * self.eval(t, x)?)
    }

    fn u_xx(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        Ok(self.log_derivatives(t, x).2 * self.eval(t, x)?)
    }
}

/// `e^{i(kx - k^2 t)}`, a solution of the free equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub k: f64,
}

impl Wave for PlaneWave {
    fn eval(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        let k = self.k;
        Ok((Complex64::I * (k * x - k * k * t)).exp())
    }

    fn time_domain(&self) -> TimeInterval {
        TimeInterval::ALL
    }
}

impl AnalyticWave for PlaneWave {
    fn u_t(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        Ok(-Complex64::I * self.k * self.k * self.eval(t, x)?)
    }
    fn u_x(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        Ok(Complex64::I * self.k * self.eval(t, x)?)
    }
    fn u_xx(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        Ok(-self.k * self.k * self.eval(t, x)?)
    }
}

/// Spreading Gaussian packet with carrier speed `c`:
/// `amp * B^{-1/2} exp(-(x - ct - x0)^2 / B) exp(i(cx/2 - c^2 t/4))` with
/// `B = sigma2 + 4it`. Solves the free equation exactly for any parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub sigma2: f64,
    pub c: f64,
    pub x0: f64,
    pub amp: Complex64,
}

impl GaussianPacket {
    pub fn centered(sigma2: f64) -> Self {
        GaussianPacket { sigma2, c: 0.0, x0: 0.0, amp: Complex64::ONE }
    }

    fn pieces(&self, t: f64, x: f64) -> (Complex64, Complex64, Complex64) {
        let b = Complex64::new(self.sigma2, 4.0 * t);
        let xi = Complex64::from(x - self.c * t - self.x0);
        let carrier = Complex64::I * (0.5 * self.c * x - 0.25 * self.c * self.c * t);
        let value = self.amp / b.sqrt() * (-xi * xi / b + carrier).exp();
        (b, xi, value)
    }
}

impl Wave for GaussianPacket {
    fn eval(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        Ok(self.pieces(t, x).2)
    }

    fn time_domain(&self) -> TimeInterval {
        TimeInterval::ALL
    }
}

impl AnalyticWave for GaussianPacket {
    fn u_t(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        let (b, xi, u) = self.pieces(t, x);
        let i = Complex64::I;
        let lt = -2.0 * i / b + 2.0 * self.c * xi / b + 4.0 * i * xi * xi / (b * b)
            - i * self.c * self.c / 4.0;
        Ok(lt * u)
    }

    fn u_x(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        let (b, xi, u) = self.pieces(t, x);
        let lx = -2.0 * xi / b + Complex64::I * self.c / 2.0;
        Ok(lx * u)
    }

    fn u_xx(&self, t: f64, x: f64) -> Result<Complex64, WaveError> {
        let (b, xi, u) = self.pieces(t, x);
        let lx = -2.0 * xi / b + Complex64::I * self.c / 2.0;
        Ok((lx * lx - 2.0 / b) * u)
    }
}

/// Equation residual `i u_t + u_xx + F(t) |u|^2 u` from exact partials.
pub fn pde_residual<W: AnalyticWave + ?Sized>(
    wave: &W,
    f: &Expr,
    t: f64,
    x: f64,
) -> Result<Complex64, WaveError> {
    let u = wave.eval(t, x)?;
    let ut = wave.u_t(t, x)?;
    let uxx = wave.u_xx(t, x)?;
    let coupling = f.evaluate_real(t)?;
    Ok(Complex64::I * ut + uxx + coupling * u.norm_sqr() * u)
}

/// Largest residual magnitude over a set of probe points.
pub fn max_pde_residual<W: AnalyticWave + ?Sized>(
    wave: &W,
    f: &Expr,
    points: &[(f64, f64)],
) -> Result<f64, WaveError> {
    let mut worst: f64 = 0.0;
    for &(t, x) in points {
        worst = worst.max(pde_residual(wave, f, t, x)?.norm());
    }
    Ok(worst)
}

/// A real profile on the line with two derivatives, the shape function of a
/// self-similar amplitude.
pub trait LineProfile {
    fn g(&self, y: f64) -> f64;
    fn dg(&self, y: f64) -> f64;
    fn d2g(&self, y: f64) -> f64;
}

/// `g(y) = sqrt(2) sech(y - x0)`, the profile solving `g'' - g + g^3 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SechLine {
    pub x0: f64,
}

impl LineProfile for SechLine {
    fn g(&self, y: f64) -> f64 {
        SQRT2 * sech(y - self.x0)
    }
    fn dg(&self, y: f64) -> f64 {
        let z = y - self.x0;
        -SQRT2 * sech(z) * z.tanh()
    }
    fn d2g(&self, y: f64) -> f64 {
        let s = sech(y - self.x0);
        SQRT2 * (s - 2.0 * s * s * s)
    }
}

/// `g(y) = exp(-y^2)`: smooth but not a solution of the profile equation,
/// used as a control in tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLine;

impl LineProfile for GaussianLine {
    fn g(&self, y: f64) -> f64 {
        (-y * y).exp()
    }
    fn dg(&self, y: f64) -> f64 {
        -2.0 * y * (-y * y).exp()
    }
    fn d2g(&self, y: f64) -> f64 {
        (4.0 * y * y - 2.0) * (-y * y).exp()
    }
}

/// Residual of the profile equation `g'' - g + g^3` at `y`.
pub fn ode_residual<P: LineProfile + ?Sized>(profile: &P, y: f64) -> f64 {
    profile.d2g(y) - profile.g(y) + profile.g(y).powi(3)
}

/// Real amplitude of self-similar form `f(t, x) = t^{-1/2} g(-x/t)` on
/// `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilar<P> {
    pub profile: P,
}

impl<P: LineProfile> SelfSimilar<P> {
    pub fn f(&self, t: f64, x: f64) -> f64 {
        t.powf(-0.5) * self.profile.g(-x / t)
    }

    pub fn f_t(&self, t: f64, x: f64) -> f64 {
        let y = -x / t;
        t.powf(-1.5) * (-0.5 * self.profile.g(y) + self.profile.dg(y) * x / t)
    }

    pub fn f_x(&self, t: f64, x: f64) -> f64 {
        -t.powf(-1.5) * self.profile.dg(-x / t)
    }

    pub fn f_xx(&self, t: f64, x: f64) -> f64 {
        t.powf(-2.5) * self.profile.d2g(-x / t)
    }
}

/// Residuals of the two reduced equations an amplitude of the form
/// `f(t, x) = t^{-1/2} g(-x/t)` must satisfy for
/// `u = f * exp(i(x^2/(4t) - 1/t))` to solve the `F = 1/t` equation:
///
/// ```text
/// r1 = f_xx - f/t^2 + f^3/t      (profile equation, transported)
/// r2 = f_t + (x/t) f_x + f/(2t)  (transport equation)
/// ```
///
/// `r2` vanishes identically for any profile by the chain rule; `r1` vanishes
/// exactly when the profile solves `g'' - g + g^3 = 0`.
pub fn reduction_residuals<P: LineProfile>(
    amp: &SelfSimilar<P>,
    t: f64,
    x: f64,
) -> (f64, f64) {
    let f = amp.f(t, x);
    let r1 = amp.f_xx(t, x) - f / (t * t) + f * f * f / t;
    let r2 = amp.f_t(t, x) + (x / t) * amp.f_x(t, x) + f / (2.0 * t);
    (r1, r2)
}
