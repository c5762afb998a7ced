//! Split-step pseudospectral integrator for
//!
//! ```text
//! i u_t + u_xx + F(t) |u|^2 u = 0
//! ```
//!
//! on a periodic interval.  Each step of size tau is a Strang sandwich: half
//! a linear step, a full nonlinear step, half a linear step.  Both substeps
//! are solved exactly: the linear flow multiplies each Fourier mode by
//! exp(-i k^2 tau/2), and the nonlinear flow leaves |u| pointwise invariant
//! while advancing the phase by |u|^2 times the integral of F over the step.
//! The integral is closed-form logarithmic when F is the reciprocal of a
//! linear polynomial and two-point Gauss-Legendre otherwise, so the only
//! discretization error is the operator splitting itself, which is second
//! order in tau.
//!
//! Couplings with a pole near the evolution window are rejected up front
//! rather than stepped over; see [`EvolveConfig::pole_guard`].

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::analytic::{Wave, WaveError};
use crate::expr::{Expr, ExprError, GaussianRational, Poly};

mod spectral;

pub use spectral::TrigInterp;

pub(crate) use spectral::Spectral;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("field samples are not finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("coupling pole at t = {t} lies within the guard distance {guard} of the evolution window")]
    PoleWithinGuard { t: f64, guard: f64 },
    #[error("coupling is singular or non-real near t = {t}")]
    CouplingSingular { t: f64 },
    #[error(transparent)]
    Coupling(#[from] ExprError),
    #[error(transparent)]
    Wave(#[from] WaveError),
}

/// A uniform periodic grid on [x_min, x_max).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<GridSpec, SolverError> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(SolverError::Grid(format!(
                "needs finite x_max > x_min, got [{x_min}, {x_max})"
            )));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(SolverError::Grid(format!(
                "n must be a power of two at least 16, got {n}"
            )));
        }
        Ok(GridSpec { x_min, x_max, n })
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn h(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.n).map(|j| self.x_min + j as f64 * h).collect()
    }

    /// Angular wavenumbers in FFT bin order; bin n/2 carries the unpaired
    /// Nyquist mode -n/2.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let k0 = 2.0 * std::f64::consts::PI / self.length();
        (0..self.n)
            .map(|j| {
                let m = if j < self.n / 2 {
                    j as f64
                } else {
                    j as f64 - self.n as f64
                };
                k0 * m
            })
            .collect()
    }
}

/// A sampled complex wave function at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    samples: Vec<Complex64>,
    time: f64,
}

impl ComplexField {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>, time: f64) -> Result<Self, SolverError> {
        if samples.len() != grid.n {
            return Err(SolverError::Grid(format!(
                "expected {} samples, got {}",
                grid.n,
                samples.len()
            )));
        }
        if !time.is_finite() {
            return Err(SolverError::Config(format!("time {time} is not finite")));
        }
        let field = ComplexField {
            grid,
            samples,
            time,
        };
        field.ensure_finite()?;
        Ok(field)
    }

    /// Samples a pointwise wave on the grid.
    pub fn from_wave<W: Wave>(grid: GridSpec, wave: &W, time: f64) -> Result<Self, SolverError> {
        let mut samples = Vec::with_capacity(grid.n);
        for x in grid.points() {
            samples.push(wave.eval(time, x)?);
        }
        ComplexField::new(grid, samples, time)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    fn ensure_finite(&self) -> Result<(), SolverError> {
        for v in &self.samples {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(SolverError::NonFinite { t: self.time });
            }
        }
        Ok(())
    }

    /// Largest pointwise gap to another field on the same grid.
    ///
    /// Panics if the grids differ; comparing fields from different
    /// discretizations is a programming error, not a runtime condition.
    pub fn max_abs_diff(&self, other: &ComplexField) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Grid-weighted L2 gap to another field on the same grid.
    pub fn l2_diff(&self, other: &ComplexField) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let sum: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (self.grid.h() * sum).sqrt()
    }
}

/// Discrete mass h * sum |u_j|^2, conserved by the equation for real F.
pub fn mass(u: &ComplexField) -> f64 {
    u.grid.h() * u.samples.iter().map(|v| v.norm_sqr()).sum::<f64>()
}

/// Spectral second space derivative of a sampled field.
pub fn spectral_second_derivative(u: &ComplexField) -> Vec<Complex64> {
    Spectral::new(u.grid.n).second_derivative(&u.grid, &u.samples)
}

/// Discrete energy h * sum(|u_x|^2 - (F/2)|u|^4) with a spectral derivative.
/// Conserved only for constant F; for F = F(t) it drifts with rate
/// -(F'(t)/2) * integral of |u|^4.
pub fn energy(u: &ComplexField, f_at_t: f64) -> f64 {
    let mut spectral = Spectral::new(u.grid.n);
    let ux = spectral.first_derivative(&u.grid, &u.samples);
    let sum: f64 = u
        .samples
        .iter()
        .zip(&ux)
        .map(|(v, d)| d.norm_sqr() - 0.5 * f_at_t * v.norm_sqr() * v.norm_sqr())
        .sum();
    u.grid.h() * sum
}

/// Evolution window, step size, and coupling for [`evolve`].
#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub t0: f64,
    pub t1: f64,
    /// Step magnitude; the sign of t1 - t0 picks the direction.
    pub dt: f64,
    pub coupling: Expr,
    /// Minimum allowed distance from any pole of the coupling to the closed
    /// evolution window.  Windows that get closer are rejected up front.
    pub pole_guard: f64,
}

pub const DEFAULT_POLE_GUARD: f64 = 1e-2;

impl EvolveConfig {
    pub fn new(t0: f64, t1: f64, dt: f64, coupling: Expr) -> EvolveConfig {
        EvolveConfig {
            t0,
            t1,
            dt,
            coupling,
            pole_guard: DEFAULT_POLE_GUARD,
        }
    }

    fn validate(&self) -> Result<(), SolverError> {
        if !(self.t0.is_finite() && self.t1.is_finite()) {
            return Err(SolverError::Config(format!(
                "evolution window [{}, {}] must be finite",
                self.t0, self.t1
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SolverError::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.pole_guard.is_finite() && self.pole_guard >= 0.0) {
            return Err(SolverError::Config(format!(
                "pole guard must be nonnegative, got {}",
                self.pole_guard
            )));
        }
        Ok(())
    }
}

/// How the per-step integral of the coupling is computed.
enum CouplingPlan {
    Constant(f64),
    /// F = c / (t + d), integrated exactly as c*ln|(b+d)/(a+d)|.
    ReciprocalLinear { c: f64, d: f64 },
    /// Anything else: two-point Gauss-Legendre per step, plus the real poles
    /// of a rational denominator (or sampled screening otherwise) for the
    /// guard check.
    Quadrature { real_poles: Option<Vec<f64>> },
}

fn real_of(g: &GaussianRational) -> Result<f64, SolverError> {
    if !g.im.is_zero() {
        return Err(SolverError::Config(
            "coupling must be real-valued".to_string(),
        ));
    }
    g.re.to_f64()
        .ok_or_else(|| SolverError::Config("coupling coefficient overflows f64".to_string()))
}

impl CouplingPlan {
    fn new(coupling: &Expr) -> Result<CouplingPlan, SolverError> {
        match coupling.rational_normal_form() {
            Ok(rf) => {
                let num_deg = rf.num().degree();
                let den_deg = rf.den().degree().unwrap_or(0);
                if num_deg.is_none() {
                    return Ok(CouplingPlan::Constant(0.0));
                }
                if num_deg == Some(0) && den_deg == 0 {
                    return Ok(CouplingPlan::Constant(real_of(&rf.num().coeff(0))?));
                }
                if num_deg == Some(0) && den_deg == 1 {
                    // Denominator is monic: t + d.
                    let c = real_of(&rf.num().coeff(0))?;
                    let d = real_of(&rf.den().coeff(0))?;
                    return Ok(CouplingPlan::ReciprocalLinear { c, d });
                }
                let poles = if den_deg >= 1 {
                    real_roots(rf.den())
                } else {
                    Vec::new()
                };
                Ok(CouplingPlan::Quadrature {
                    real_poles: Some(poles),
                })
            }
            Err(ExprError::NotRational(_)) => Ok(CouplingPlan::Quadrature { real_poles: None }),
            Err(e) => Err(e.into()),
        }
    }

    fn guard(&self, cfg: &EvolveConfig) -> Result<(), SolverError> {
        let lo = cfg.t0.min(cfg.t1) - cfg.pole_guard;
        let hi = cfg.t0.max(cfg.t1) + cfg.pole_guard;
        match self {
            CouplingPlan::Constant(_) => Ok(()),
            CouplingPlan::ReciprocalLinear { d, .. } => {
                let pole = -d;
                if lo <= pole && pole <= hi {
                    return Err(SolverError::PoleWithinGuard {
                        t: pole,
                        guard: cfg.pole_guard,
                    });
                }
                Ok(())
            }
            CouplingPlan::Quadrature { real_poles } => match real_poles {
                Some(poles) => {
                    for &pole in poles {
                        if lo <= pole && pole <= hi {
                            return Err(SolverError::PoleWithinGuard {
                                t: pole,
                                guard: cfg.pole_guard,
                            });
                        }
                    }
                    Ok(())
                }
                None => {
                    // No algebraic pole list; screen the guarded window by
                    // sampling.  Evaluation failures and blowups flag the
                    // sample point; a sign flip between large-magnitude
                    // neighbours flags a pole the samples straddled (a
                    // smooth zero crossing has small values on both sides).
                    let m = 256;
                    let mut prev: Option<(f64, f64)> = None;
                    for j in 0..=m {
                        let t = lo + (hi - lo) * j as f64 / m as f64;
                        let v = match cfg.coupling.evaluate_real(t) {
                            Ok(v) if v.re.abs() < 1e10
                                && v.im.abs() <= 1e-9 * (1.0 + v.re.abs()) =>
                            {
                                v.re
                            }
                            _ => return Err(SolverError::CouplingSingular { t }),
                        };
                        if let Some((tp, vp)) = prev {
                            if vp * v < 0.0 && vp.abs().min(v.abs()) > 10.0 {
                                return Err(SolverError::CouplingSingular {
                                    t: 0.5 * (tp + t),
                                });
                            }
                        }
                        prev = Some((t, v));
                    }
                    Ok(())
                }
            },
        }
    }

    /// Integral of F over [a, b] (signed; b may be below a).
    fn integral(&self, coupling: &Expr, a: f64, b: f64) -> Result<f64, SolverError> {
        match self {
            CouplingPlan::Constant(c) => Ok(c * (b - a)),
            CouplingPlan::ReciprocalLinear { c, d } => Ok(c * ((b + d) / (a + d)).abs().ln()),
            CouplingPlan::Quadrature { .. } => {
                let mid = 0.5 * (a + b);
                let r = 0.5 * (b - a);
                let off = r / 3.0f64.sqrt();
                let mut acc = 0.0;
                for s in [mid - off, mid + off] {
                    let v = coupling.evaluate_real(s)?;
                    if v.im.abs() > 1e-9 * (1.0 + v.re.abs()) {
                        return Err(SolverError::Config(
                            "coupling must be real-valued".to_string(),
                        ));
                    }
                    acc += v.re;
                }
                Ok(acc * r)
            }
        }
    }
}

/// Real roots of a polynomial with f64-meaningful coefficients, via
/// Durand-Kerner iteration on all complex roots followed by a realness
/// filter.  Accuracy near 1e-10 is ample for the coarse pole guard.
fn real_roots(p: &Poly) -> Vec<f64> {
    let deg = match p.degree() {
        Some(d) if d >= 1 => d,
        _ => return Vec::new(),
    };
    let coeffs: Vec<Complex64> = p.coeffs().iter().map(|c| c.to_complex64()).collect();
    let lead = coeffs[deg];
    let radius = 1.0
        + coeffs[..deg]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let eval = |z: Complex64| p.eval(z) / lead;
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();
    for _ in 0..200 {
        let mut shift = 0.0f64;
        for k in 0..deg {
            let zk = roots[k];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, &zj) in roots.iter().enumerate() {
                if j != k {
                    denom *= zk - zj;
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = eval(zk) / denom;
            roots[k] = zk - step;
            shift = shift.max(step.norm());
        }
        if shift < 1e-13 * (1.0 + radius) {
            break;
        }
    }
    roots
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect()
}

/// Exact phase rotation of the nonlinear flow: each sample turns by its own
/// |u|^2 times the coupling integral, leaving |u| untouched.
fn apply_nonlinear(samples: &mut [Complex64], integral: f64) {
    for u in samples.iter_mut() {
        *u *= Complex64::from_polar(1.0, integral * u.norm_sqr());
    }
}

/// Linear half-step multipliers exp(-i k^2 tau) with the inverse-FFT
/// normalization folded in.
fn linear_factors(k2: &[f64], tau: f64) -> Vec<Complex64> {
    let scale = 1.0 / k2.len() as f64;
    k2.iter()
        .map(|&kk| Complex64::from_polar(scale, -kk * tau))
        .collect()
}

struct Stepper<'a> {
    spectral: Spectral,
    k2: Vec<f64>,
    half: Vec<Complex64>,
    half_tau: f64,
    plan: &'a CouplingPlan,
    coupling: &'a Expr,
}

impl<'a> Stepper<'a> {
    fn new(grid: &GridSpec, plan: &'a CouplingPlan, coupling: &'a Expr) -> Stepper<'a> {
        let k2: Vec<f64> = grid.wavenumbers().iter().map(|k| k * k).collect();
        Stepper {
            spectral: Spectral::new(grid.n),
            half: Vec::new(),
            half_tau: f64::NAN,
            k2,
            plan,
            coupling,
        }
    }

    fn strang_step(
        &mut self,
        samples: &mut [Complex64],
        s: f64,
        tau: f64,
    ) -> Result<(), SolverError> {
        if self.half_tau != tau {
            self.half = linear_factors(&self.k2, 0.5 * tau);
            self.half_tau = tau;
        }
        self.linear_half(samples);
        let integral = self.plan.integral(self.coupling, s, s + tau)?;
        apply_nonlinear(samples, integral);
        self.linear_half(samples);
        Ok(())
    }

    fn linear_half(&mut self, samples: &mut [Complex64]) {
        self.spectral.forward(samples);
        for (v, f) in samples.iter_mut().zip(&self.half) {
            *v *= f;
        }
        self.spectral.inverse_raw(samples);
    }
}

/// Integrates u0 from cfg.t0 to cfg.t1 and returns the final field.
pub fn evolve(u0: &ComplexField, cfg: &EvolveConfig) -> Result<ComplexField, SolverError> {
    evolve_observed(u0, cfg, |_| {})
}

/// Like [`evolve`], invoking the observer after every completed step.
pub fn evolve_observed<Obs: FnMut(&ComplexField)>(
    u0: &ComplexField,
    cfg: &EvolveConfig,
    mut observe: Obs,
) -> Result<ComplexField, SolverError> {
    cfg.validate()?;
    if (u0.time - cfg.t0).abs() > 1e-9 * (1.0 + cfg.t0.abs()) {
        return Err(SolverError::Config(format!(
            "initial field is stamped t = {} but the window starts at {}",
            u0.time, cfg.t0
        )));
    }
    let plan = CouplingPlan::new(&cfg.coupling)?;
    plan.guard(cfg)?;

    let mut field = u0.clone();
    field.ensure_finite()?;
    let span = cfg.t1 - cfg.t0;
    if span == 0.0 {
        return Ok(field);
    }

    // Uniform steps when the span divides evenly (tau then includes the
    // direction sign); otherwise full steps plus one short final step.
    let total = span.abs();
    let rounded = (total / cfg.dt).round();
    let (n_steps, tau, tail) =
        if rounded >= 1.0 && (total - rounded * cfg.dt).abs() <= 1e-9 * total.max(cfg.dt) {
            (rounded as u64, span / rounded, 0.0)
        } else {
            let k = (total / cfg.dt).floor() as u64;
            let tau = cfg.dt.copysign(span);
            (k, tau, span - k as f64 * tau)
        };

    let mut stepper = Stepper::new(&field.grid, &plan, &cfg.coupling);
    for step in 0..n_steps {
        let s = cfg.t0 + step as f64 * tau;
        stepper.strang_step(&mut field.samples, s, tau)?;
        field.time = if step + 1 == n_steps && tail == 0.0 {
            cfg.t1
        } else {
            cfg.t0 + (step + 1) as f64 * tau
        };
        field.ensure_finite()?;
        observe(&field);
    }
    if tail != 0.0 {
        let s = cfg.t0 + n_steps as f64 * tau;
        stepper.strang_step(&mut field.samples, s, tail)?;
        field.time = cfg.t1;
        field.ensure_finite()?;
        observe(&field);
    }
    Ok(field)
}

/// One row of a step-size study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub linf: f64,
    pub l2: f64,
}

/// Errors of [`evolve`] against a closed-form reference across step sizes,
/// with the temporal order fitted by least squares on the log-log points.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub temporal_order: f64,
}

pub fn convergence_study<W: Wave>(
    reference: &W,
    coupling: &Expr,
    grid: GridSpec,
    t0: f64,
    t1: f64,
    dts: &[f64],
) -> Result<ConvergenceStudy, SolverError> {
    if dts.len() < 2 {
        return Err(SolverError::Config(
            "a convergence study needs at least two step sizes".to_string(),
        ));
    }
    let u0 = ComplexField::from_wave(grid, reference, t0)?;
    let exact = ComplexField::from_wave(grid, reference, t1)?;
    let mut rows = Vec::with_capacity(dts.len());
    for &dt in dts {
        let cfg = EvolveConfig::new(t0, t1, dt, coupling.clone());
        let end = evolve(&u0, &cfg)?;
        rows.push(ConvergenceRow {
            dt,
            linf: end.max_abs_diff(&exact),
            l2: end.l2_diff(&exact),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.dt.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.linf.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    Ok(ConvergenceStudy {
        rows,
        temporal_order: num / den,
    })
}

/// Pointwise residual of i u_t + u_xx + F(t)|u|^2 u on a grid, with the
/// space derivative spectral and the time derivative a five-point stencil
/// of exact wave evaluations.
pub fn sampled_residual<W: Wave>(
    wave: &W,
    coupling: &Expr,
    grid: GridSpec,
    t: f64,
) -> Result<Vec<Complex64>, SolverError> {
    let dt = 1e-3;
    let f_val = coupling.evaluate_real(t)?;
    if f_val.im.abs() > 1e-9 * (1.0 + f_val.re.abs()) {
        return Err(SolverError::Config(
            "coupling must be real-valued".to_string(),
        ));
    }
    let f_t = f_val.re;
    let sample = |at: f64| -> Result<Vec<Complex64>, SolverError> {
        Ok(ComplexField::from_wave(grid, wave, at)?.samples().to_vec())
    };
    let um2 = sample(t - 2.0 * dt)?;
    let um1 = sample(t - dt)?;
    let u0 = sample(t)?;
    let up1 = sample(t + dt)?;
    let up2 = sample(t + 2.0 * dt)?;
    let mut spectral = Spectral::new(grid.n);
    let uxx = spectral.second_derivative(&grid, &u0);
    let mut out = Vec::with_capacity(grid.n);
    for j in 0..grid.n {
        let ut = (-up2[j] + 8.0 * up1[j] - 8.0 * um1[j] + um2[j]) / (12.0 * dt);
        let cubic = f_t * u0[j].norm_sqr() * u0[j];
        out.push(Complex64::i() * ut + uxx[j] + cubic);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{standing_soliton, td_soliton, travelling_soliton};
    use crate::expr::parse;

    fn coupling(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> GridSpec {
        GridSpec::new(lo, hi, n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0.0, 1.0, 64).is_ok());
        assert!(matches!(
            GridSpec::new(1.0, 0.0, 64),
            Err(SolverError::Grid(_))
        ));
        assert!(matches!(
            GridSpec::new(0.0, 1.0, 48),
            Err(SolverError::Grid(_))
        ));
        assert!(matches!(
            GridSpec::new(0.0, 1.0, 8),
            Err(SolverError::Grid(_))
        ));
        let g = grid(-1.0, 3.0, 16);
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.points()[1], -0.75);
        let ks = g.wavenumbers();
        assert_eq!(ks[0], 0.0);
        assert!((ks[1] - std::f64::consts::PI / 2.0).abs() < 1e-15);
        assert!((ks[8] + 8.0 * std::f64::consts::PI / 2.0).abs() < 1e-14);
        assert!((ks[15] + std::f64::consts::PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn field_construction_checks() {
        let g = grid(0.0, 1.0, 16);
        assert!(matches!(
            ComplexField::new(g, vec![Complex64::new(0.0, 0.0); 8], 0.0),
            Err(SolverError::Grid(_))
        ));
        let mut bad = vec![Complex64::new(0.0, 0.0); 16];
        bad[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            ComplexField::new(g, bad, 0.0),
            Err(SolverError::NonFinite { .. })
        ));
        let f = ComplexField::from_wave(g, &standing_soliton(0.0), 0.25).unwrap();
        assert_eq!(f.time(), 0.25);
        assert_eq!(f.samples().len(), 16);
    }

    #[test]
    fn mass_of_simple_fields() {
        let g = grid(0.0, 1.0, 64);
        let zero = ComplexField::new(g, vec![Complex64::new(0.0, 0.0); 64], 0.0).unwrap();
        assert_eq!(mass(&zero), 0.0);
        let ones = ComplexField::new(g, vec![Complex64::new(1.0, 0.0); 64], 0.0).unwrap();
        assert!((mass(&ones) - 1.0).abs() < 1e-15);
        assert_eq!(energy(&zero, 1.0), 0.0);
    }

    #[test]
    fn zero_field_stays_zero() {
        let g = grid(-10.0, 10.0, 64);
        let zero = ComplexField::new(g, vec![Complex64::new(0.0, 0.0); 64], 0.0).unwrap();
        let out = evolve(&zero, &EvolveConfig::new(0.0, 0.5, 1e-2, coupling("1"))).unwrap();
        assert_eq!(out.time(), 0.5);
        assert!(out.samples().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn single_mode_is_exact_without_coupling() {
        let g = grid(0.0, 2.0 * std::f64::consts::PI, 64);
        let k = 3.0;
        let samples: Vec<Complex64> = g
            .points()
            .iter()
            .map(|&x| Complex64::from_polar(1.0, k * x))
            .collect();
        let u0 = ComplexField::new(g, samples, 0.0).unwrap();
        let out = evolve(&u0, &EvolveConfig::new(0.0, 1.0, 1e-2, coupling("0"))).unwrap();
        let mut worst = 0.0f64;
        for (&x, v) in g.points().iter().zip(out.samples()) {
            let exact = Complex64::from_polar(1.0, k * x - k * k * 1.0);
            worst = worst.max((v - exact).norm());
        }
        assert!(worst <= 1e-12, "single mode error {worst}");
    }

    #[test]
    fn nonlinear_rotation_preserves_modulus() {
        let mut samples: Vec<Complex64> = (0..32)
            .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 0.71).cos()))
            .collect();
        let before: Vec<f64> = samples.iter().map(|v| v.norm()).collect();
        apply_nonlinear(&mut samples, 0.37);
        for (v, b) in samples.iter().zip(before) {
            assert!((v.norm() - b).abs() <= 1e-15 * (1.0 + b));
        }
    }

    #[test]
    fn standing_soliton_mass_is_conserved_every_step() {
        let g = grid(-8.0 * std::f64::consts::PI, 8.0 * std::f64::consts::PI, 256);
        let u0 = ComplexField::from_wave(g, &standing_soliton(0.0), 0.0).unwrap();
        let m0 = mass(&u0);
        let mut worst = 0.0f64;
        evolve_observed(
            &u0,
            &EvolveConfig::new(0.0, 1.0, 1e-3, coupling("1")),
            |f| {
                worst = worst.max((mass(f) - m0).abs() / m0);
            },
        )
        .unwrap();
        assert!(worst < 1e-10, "relative mass drift {worst}");
    }

    #[test]
    fn travelling_soliton_matches_closed_form() {
        let g = grid(-10.0 * std::f64::consts::PI, 10.0 * std::f64::consts::PI, 512);
        let wave = travelling_soliton(1.0, 1.0).unwrap();
        let u0 = ComplexField::from_wave(g, &wave, 0.0).unwrap();
        let out = evolve(&u0, &EvolveConfig::new(0.0, 0.25, 1e-3, coupling("1"))).unwrap();
        let exact = ComplexField::from_wave(g, &wave, 0.25).unwrap();
        let err = out.max_abs_diff(&exact);
        assert!(err < 1e-5, "travelling soliton error {err}");
    }

    #[test]
    fn strang_is_time_reversible() {
        let g = grid(-10.0 * std::f64::consts::PI, 10.0 * std::f64::consts::PI, 512);
        let wave = travelling_soliton(1.0, 1.0).unwrap();
        let u0 = ComplexField::from_wave(g, &wave, 0.0).unwrap();
        let fwd = evolve(&u0, &EvolveConfig::new(0.0, 0.5, 1e-3, coupling("1"))).unwrap();
        let back = evolve(&fwd, &EvolveConfig::new(0.5, 0.0, 1e-3, coupling("1"))).unwrap();
        let err = back.max_abs_diff(&u0);
        assert!(err < 1e-9, "round trip error {err}");
    }

    #[test]
    fn energy_is_conserved_for_constant_coupling() {
        let g = grid(-8.0 * std::f64::consts::PI, 8.0 * std::f64::consts::PI, 256);
        let u0 = ComplexField::from_wave(g, &standing_soliton(0.0), 0.0).unwrap();
        let e0 = energy(&u0, 1.0);
        // For the standing profile the continuum value is -4/3.
        assert!((e0 + 4.0 / 3.0).abs() < 1e-8, "initial energy {e0}");
        let out = evolve(&u0, &EvolveConfig::new(0.0, 1.0, 1e-3, coupling("1"))).unwrap();
        let e1 = energy(&out, 1.0);
        assert!(
            (e1 - e0).abs() / e0.abs() < 1e-8,
            "energy drift {} -> {}",
            e0,
            e1
        );
    }

    #[test]
    fn energy_growth_matches_coupling_decay_rate() {
        // With F = 1/t the energy obeys dE/dt = -(F'/2) * integral |u|^4
        //                                     = (1/2t^2) * integral |u|^4 > 0.
        let g = grid(-12.0 * std::f64::consts::PI, 12.0 * std::f64::consts::PI, 512);
        let f_expr = coupling("1/t");
        let mut field = ComplexField::from_wave(g, &td_soliton(0.0), 1.0).unwrap();
        let times = [1.0, 1.2, 1.4, 1.6, 1.8, 2.0];
        let mut energies = vec![energy(&field, 1.0)];
        for w in times.windows(2) {
            field = evolve(&field, &EvolveConfig::new(w[0], w[1], 1e-3, f_expr.clone())).unwrap();
            energies.push(energy(&field, 1.0 / w[1]));
        }
        for pair in energies.windows(2) {
            assert!(pair[1] > pair[0], "energy not increasing: {energies:?}");
        }
        // Compare a centered slope estimate at t = 1.6 with the predicted
        // rate there computed from the numeric field.
        let predicted = {
            let mid = evolve(
                &ComplexField::from_wave(g, &td_soliton(0.0), 1.0).unwrap(),
                &EvolveConfig::new(1.0, 1.6, 1e-3, f_expr.clone()),
            )
            .unwrap();
            let q: f64 = mid
                .samples()
                .iter()
                .map(|v| v.norm_sqr() * v.norm_sqr())
                .sum::<f64>()
                * mid.grid().h();
            q / (2.0 * 1.6 * 1.6)
        };
        let numeric = (energies[4] - energies[2]) / 0.4;
        let gap = (numeric - predicted).abs() / predicted;
        assert!(gap < 0.05, "slope {numeric} vs predicted {predicted}");
    }

    #[test]
    fn pole_guard_blocks_windows_near_poles() {
        let g = grid(-10.0, 10.0, 64);
        let u0 = ComplexField::from_wave(g, &standing_soliton(0.0), -0.5).unwrap();
        let err = evolve(&u0, &EvolveConfig::new(-0.5, 0.5, 1e-3, coupling("1/t"))).unwrap_err();
        assert!(matches!(err, SolverError::PoleWithinGuard { .. }));

        // Pole at -1.5; a window ending 0.005 away is inside the default
        // guard, but an explicit smaller guard admits it.
        let u0 = ComplexField::from_wave(g, &standing_soliton(0.0), -1.495).unwrap();
        let cfg = EvolveConfig::new(-1.495, -1.0, 1e-3, coupling("1/(2*t+3)"));
        assert!(matches!(
            evolve(&u0, &cfg),
            Err(SolverError::PoleWithinGuard { guard, .. }) if guard == DEFAULT_POLE_GUARD
        ));
        let mut relaxed = cfg;
        relaxed.pole_guard = 1e-4;
        assert!(evolve(&u0, &relaxed).is_ok());
    }

    #[test]
    fn rational_pole_guard_uses_real_roots_only() {
        let g = grid(-10.0, 10.0, 64);
        let u0 = ComplexField::from_wave(g, &standing_soliton(0.0), 0.0).unwrap();
        // Poles at +-i: no real pole, runs fine.
        assert!(evolve(&u0, &EvolveConfig::new(0.0, 0.5, 1e-2, coupling("1/(t^2+1)"))).is_ok());
        // Poles at +-1: the window [0, 2] crosses one.
        let err =
            evolve(&u0, &EvolveConfig::new(0.0, 2.0, 1e-2, coupling("1/(t^2-1)"))).unwrap_err();
        assert!(matches!(err, SolverError::PoleWithinGuard { t, .. } if (t - 1.0).abs() < 1e-6));
    }

    #[test]
    fn transcendental_coupling_runs_and_conserves_mass() {
        let g = grid(-8.0 * std::f64::consts::PI, 8.0 * std::f64::consts::PI, 128);
        let u0 = ComplexField::from_wave(g, &standing_soliton(0.0), 0.0).unwrap();
        let m0 = mass(&u0);
        let out = evolve(&u0, &EvolveConfig::new(0.0, 1.0, 1e-3, coupling("sin(t)"))).unwrap();
        assert!((mass(&out) - m0).abs() / m0 < 1e-10);
        // 1/sin(t) is singular inside [0, 1]'s guard window at t = 0.
        let err = evolve(
            &u0,
            &EvolveConfig::new(0.0, 1.0, 1e-3, coupling("1/(t+sin(t))")),
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::CouplingSingular { .. }));
    }

    #[test]
    fn coupling_integrals_match_closed_forms() {
        let plan = CouplingPlan::new(&coupling("1/(2*t+3)")).unwrap();
        assert!(matches!(
            plan,
            CouplingPlan::ReciprocalLinear { c, d } if (c - 0.5).abs() < 1e-15 && (d - 1.5).abs() < 1e-15
        ));
        let got = plan.integral(&coupling("1/(2*t+3)"), 0.2, 0.21).unwrap();
        let want = 0.5 * ((0.21f64 + 1.5) / (0.2 + 1.5)).ln();
        assert!((got - want).abs() < 1e-16);

        let f = coupling("1/(t^2+1)");
        let plan = CouplingPlan::new(&f).unwrap();
        let got = plan.integral(&f, 0.3, 0.31).unwrap();
        let want = 0.31f64.atan() - 0.3f64.atan();
        assert!((got - want).abs() < 1e-12, "gauss error {}", (got - want).abs());

        let plan = CouplingPlan::new(&coupling("5")).unwrap();
        assert!(matches!(plan, CouplingPlan::Constant(c) if c == 5.0));
        let complex = CouplingPlan::new(&coupling("i*t/t"));
        assert!(matches!(complex, Err(SolverError::Config(_))));
    }

    #[test]
    fn convergence_study_reports_second_order() {
        let g = grid(-10.0 * std::f64::consts::PI, 10.0 * std::f64::consts::PI, 512);
        let wave = travelling_soliton(1.0, 1.0).unwrap();
        let study = convergence_study(
            &wave,
            &coupling("1"),
            g,
            0.0,
            0.2,
            &[4e-3, 2e-3, 1e-3],
        )
        .unwrap();
        assert!(
            (study.temporal_order - 2.0).abs() < 0.2,
            "fitted order {}",
            study.temporal_order
        );
        assert!(study.rows[0].linf > study.rows[2].linf);
        assert!(study.rows.iter().all(|r| r.l2 > 0.0));
    }

    #[test]
    fn trig_interp_is_exact_for_band_limited_fields() {
        let g = grid(-2.0, 6.0, 32);
        let k0 = 2.0 * std::f64::consts::PI / g.length();
        let f = |x: f64| {
            Complex64::from_polar(0.7, -5.0 * k0 * (x + 2.0))
                + Complex64::from_polar(1.3, 2.0 * k0 * (x + 2.0))
                + Complex64::from_polar(0.4, 7.0 * k0 * (x + 2.0))
        };
        let samples: Vec<Complex64> = g.points().iter().map(|&x| f(x)).collect();
        let field = ComplexField::new(g, samples.clone(), 0.0).unwrap();
        let interp = TrigInterp::new(&field);
        for (&x, &s) in g.points().iter().zip(&samples) {
            assert!((interp.eval(x) - s).norm() < 1e-13);
        }
        for j in 0..17 {
            let x = -2.0 + 8.0 * (j as f64 + 0.31) / 17.0;
            assert!((interp.eval(x) - f(x)).norm() < 1e-12, "off-grid at {x}");
        }
    }

    #[test]
    fn trig_interp_is_spectrally_accurate_on_solitons() {
        let g = grid(-10.0 * std::f64::consts::PI, 10.0 * std::f64::consts::PI, 512);
        let wave = travelling_soliton(1.0, 1.0).unwrap();
        let field = ComplexField::from_wave(g, &wave, 0.0).unwrap();
        let interp = TrigInterp::new(&field);
        let h = g.h();
        for j in [-40i64, -7, 0, 11, 52] {
            let x = j as f64 * h + 0.37 * h;
            let exact = wave.eval(0.0, x).unwrap();
            assert!((interp.eval(x) - exact).norm() < 1e-7, "at {x}");
        }
    }

    #[test]
    fn configuration_errors_are_reported() {
        let g = grid(-10.0, 10.0, 64);
        let u0 = ComplexField::from_wave(g, &standing_soliton(0.0), 0.0).unwrap();
        let miss = EvolveConfig::new(0.5, 1.0, 1e-3, coupling("1"));
        assert!(matches!(evolve(&u0, &miss), Err(SolverError::Config(_))));
        let bad_dt = EvolveConfig::new(0.0, 1.0, 0.0, coupling("1"));
        assert!(matches!(evolve(&u0, &bad_dt), Err(SolverError::Config(_))));
        let degenerate = EvolveConfig::new(0.0, 1.0, 1e-3, coupling("1/(t-t)"));
        assert!(matches!(
            evolve(&u0, &degenerate),
            Err(SolverError::Coupling(ExprError::DivisionByZero))
        ));
    }

    #[test]
    fn uneven_spans_end_exactly_at_t1() {
        let g = grid(-8.0 * std::f64::consts::PI, 8.0 * std::f64::consts::PI, 128);
        let u0 = ComplexField::from_wave(g, &standing_soliton(0.0), 0.0).unwrap();
        let m0 = mass(&u0);
        let mut step_times = Vec::new();
        let out = evolve_observed(
            &u0,
            &EvolveConfig::new(0.0, 0.35, 0.1, coupling("1")),
            |f| step_times.push(f.time()),
        )
        .unwrap();
        assert_eq!(out.time(), 0.35);
        assert_eq!(step_times.len(), 4);
        assert_eq!(step_times.last().copied(), Some(0.35));
        assert!((mass(&out) - m0).abs() / m0 < 1e-10);
    }

    #[test]
    fn sampled_residual_is_small_for_exact_solutions() {
        let g = grid(-10.0 * std::f64::consts::PI, 10.0 * std::f64::consts::PI, 512);
        let wave = travelling_soliton(1.0, 1.0).unwrap();
        let res = sampled_residual(&wave, &coupling("1"), g, 0.3).unwrap();
        let worst = res.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "residual floor {worst}");
    }

    #[test]
    fn real_roots_finds_the_real_spectrum() {
        // (t^2+1)(t-2) has one real root.
        let f = coupling("(t^2+1)*(t-2)");
        let rf = f.rational_normal_form().unwrap();
        let roots = real_roots(rf.num());
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 2.0).abs() < 1e-8);
    }
}
