//! Core library for studying the one-dimensional cubic Schrodinger equation
//! whose nonlinear coupling varies in time,
//!
//! ```text
//! i u_t + u_xx + F(t) |u|^2 u = 0,
//! ```
//!
//! combining three views of the same equation that check one another:
//!
//! * [`painleve`]: the singularity-expansion integrability test, carried out
//!   with exact rational arithmetic. It reports whether a given coupling
//!   `F(t)` passes, which happens exactly when `1/F` is an affine function
//!   of `t`.
//! * [`analytic`]: closed-form solitary waves with hand-derived partial
//!   derivatives, so residuals can be measured without finite differencing.
//! * [`transform`]: the symmetry group of the free equation (dilatation,
//!   expansion, time translation, boost) acting on solutions, and the change
//!   of variables linking the constant-coupling equation to the `1/t` one.
//! * [`solver`]: a split-step pseudospectral integrator used to cross-check
//!   everything numerically.
//!
//! [`expr`] supplies the exact symbolic layer the rest builds on.

pub mod analytic;
pub mod expr;
pub mod num_fmt;
pub mod painleve;
pub mod solver;
pub mod transform;

pub use analytic::{AnalyticSolution, AnalyticWave, TimeInterval, Wave, WaveError};
pub use expr::{Expr, ExprError, GaussianRational, Poly, RationalFunction, ZeroVerdict};
pub use num_fmt::F17;
pub use painleve::{painleve_check, PainleveError, PainleveReport, Verdict};
pub use solver::{
    convergence_study, mass, energy, evolve, evolve_observed, sampled_residual,
    spectral_second_derivative, ComplexField, ConvergenceRow,
    ConvergenceStudy, EvolveConfig, GridSpec, SolverError, TrigInterp,
};
pub use transform::{
    apply_to_field, pseudoconformal_field, FieldMap, CENTRAL_SUPPORT_FRACTION,
    MapDirection, Primitive, Pseudoconformal, TransformError, TransformSpec, Transformed,
};
