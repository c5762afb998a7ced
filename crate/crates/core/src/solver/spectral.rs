//! FFT plumbing shared by the integrator and the diagnostics.
//!
//! Workspaces are owned per instance, so separate runs never share state.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{ComplexField, GridSpec};

pub(crate) struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    pub fn new(n: usize) -> Spectral {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Spectral {
            n,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.fwd.process_with_scratch(buf, &mut self.scratch);
    }

    /// Unnormalized inverse; callers fold the 1/n into their multipliers or
    /// use [`Spectral::inverse_scaled`].
    pub fn inverse_raw(&mut self, buf: &mut [Complex64]) {
        self.inv.process_with_scratch(buf, &mut self.scratch);
    }

    pub fn inverse_scaled(&mut self, buf: &mut [Complex64]) {
        self.inverse_raw(buf);
        let s = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }

    /// Spectral first derivative, with the unpaired Nyquist mode dropped.
    pub fn first_derivative(&mut self, grid: &GridSpec, samples: &[Complex64]) -> Vec<Complex64> {
        let mut buf = samples.to_vec();
        self.forward(&mut buf);
        let ks = grid.wavenumbers();
        for (j, v) in buf.iter_mut().enumerate() {
            if j == self.n / 2 {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v *= Complex64::new(0.0, ks[j]);
            }
        }
        self.inverse_scaled(&mut buf);
        buf
    }

    /// Spectral second derivative; k^2 is symmetric so every mode keeps its
    /// pair and the Nyquist mode stays.
    pub fn second_derivative(&mut self, grid: &GridSpec, samples: &[Complex64]) -> Vec<Complex64> {
        let mut buf = samples.to_vec();
        self.forward(&mut buf);
        let ks = grid.wavenumbers();
        for (j, v) in buf.iter_mut().enumerate() {
            *v *= -ks[j] * ks[j];
        }
        self.inverse_scaled(&mut buf);
        buf
    }
}

/// Trigonometric interpolation of a periodic sampled field.
///
/// Construction runs one FFT; evaluation sums all modes at the requested
/// point, so it reproduces the samples at grid nodes up to roundoff and is
/// spectrally accurate in between for smooth data.  It evaluates anywhere,
/// wrapping periodically; trust boundaries are the caller's concern.
pub struct TrigInterp {
    x_min: f64,
    length: f64,
    coeffs: Vec<Complex64>,
}

impl TrigInterp {
    pub fn new(field: &ComplexField) -> TrigInterp {
        let n = field.grid().n;
        let mut coeffs = field.samples().to_vec();
        Spectral::new(n).forward(&mut coeffs);
        let s = 1.0 / n as f64;
        for c in coeffs.iter_mut() {
            *c *= s;
        }
        TrigInterp {
            x_min: field.grid().x_min,
            length: field.grid().length(),
            coeffs,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.coeffs.len();
        let base = 2.0 * std::f64::consts::PI * (x - self.x_min) / self.length;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            let m = if j < n.div_ceil(2) {
                j as f64
            } else {
                j as f64 - n as f64
            };
            acc += c * Complex64::from_polar(1.0, m * base);
        }
        acc
    }
}
