//! Complex fields on a uniform square grid and spectral derivatives.

use crate::error::{domain, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Samples on `[-L/2, L/2)^2`, row-major: `values[iy * n + ix]` at
/// `x = -L/2 + ix h`, `y = -L/2 + iy h`, `h = L / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexField2D {
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub values: Vec<Complex64>,
}

/// Real field on the same layout.
pub type RealField = Vec<f64>;

impl ComplexField2D {
    pub fn zeros(l: f64, n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 4 {
            return domain(format!("grid size {n} must be a power of two >= 4"));
        }
        if !(l > 0.0 && l.is_finite()) {
            return domain(format!("extent {l} must be positive"));
        }
        Ok(ComplexField2D { l, n, values: vec![Complex64::new(0.0, 0.0); n * n] })
    }

    pub fn from_fn(l: f64, n: usize, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut u = Self::zeros(l, n)?;
        for iy in 0..n {
            for ix in 0..n {
                let (x, y) = u.coord(ix, iy);
                u.values[iy * n + ix] = f(x, y);
            }
        }
        Ok(u)
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    #[inline]
    pub fn coord(&self, ix: usize, iy: usize) -> (f64, f64) {
        let h = self.h();
        (-0.5 * self.l + ix as f64 * h, -0.5 * self.l + iy as f64 * h)
    }

    pub fn density(&self) -> RealField {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `int |u|^2` by the grid rule.
    pub fn mass(&self) -> f64 {
        let h = self.h();
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * h * h
    }

    /// `Re int conj(a) b`.
    pub fn dot(&self, other: &Self) -> f64 {
        let h = self.h();
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum::<f64>()
            * h
            * h
    }

    pub fn norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn normalize(&mut self) -> f64 {
        let m = self.norm();
        if m > 0.0 {
            let s = 1.0 / m;
            for z in &mut self.values {
                *z *= s;
            }
        }
        m
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.n == other.n && self.l == other.l
    }

    /// `a + t b`.
    pub fn axpy(&self, t: f64, b: &Self) -> Self {
        let values = self.values.iter().zip(&b.values).map(|(x, y)| x + y * t).collect();
        ComplexField2D { l: self.l, n: self.n, values }
    }

    /// Largest edge value of `|u|^2` relative to the maximum.
    pub fn edge_ratio(&self) -> f64 {
        edge_ratio(&self.density(), self.n)
    }
}

pub fn edge_ratio(rho: &[f64], n: usize) -> f64 {
    let max = rho.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let mut edge: f64 = 0.0;
    for i in 0..n {
        edge = edge
            .max(rho[i])
            .max(rho[(n - 1) * n + i])
            .max(rho[i * n])
            .max(rho[i * n + n - 1]);
    }
    edge / max
}

/// Blocked out-of-place transpose of an `n x n` array.
pub(crate) fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for by in (0..n).step_by(B) {
        for bx in (0..n).step_by(B) {
            for y in by..(by + B).min(n) {
                for x in bx..(bx + B).min(n) {
                    dst[x * n + y] = src[y * n + x];
                }
            }
        }
    }
}

/// Planned 2-D FFTs of one size.
pub struct Fft2 {
    pub n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({})", self.n)
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn run(&self, data: &mut [Complex64], forward: bool) {
        let n = self.n;
        let plan = if forward { &self.fwd } else { &self.inv };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let mut tmp = vec![Complex64::new(0.0, 0.0); n * n];
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, &mut tmp, n);
        plan.process_with_scratch(&mut tmp, &mut scratch);
        transpose(&tmp, data, n);
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    /// Inverse transform including the `1/n^2` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, false);
        let s = 1.0 / (self.n * self.n) as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }
}

/// Angular wavenumbers for an `n`-point periodic grid of length `l`, with the
/// Nyquist entry zeroed (used for first derivatives).
pub fn wavenumbers(n: usize, l: f64, zero_nyquist: bool) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let m = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
            if zero_nyquist && i == n / 2 { 0.0 } else { 2.0 * PI * m / l }
        })
        .collect()
}

/// Periodic spectral derivatives on one grid size.
#[derive(Debug)]
pub struct Spectral {
    pub n: usize,
    pub l: f64,
    pub fft: Fft2,
    pub k: Vec<f64>,
}

impl Spectral {
    pub fn new(n: usize, l: f64) -> Self {
        Spectral { n, l, fft: Fft2::new(n), k: wavenumbers(n, l, true) }
    }

    /// `(d/dx u, d/dy u)`.
    pub fn gradient(&self, u: &[Complex64]) -> [Vec<Complex64>; 2] {
        let n = self.n;
        let mut hat = u.to_vec();
        self.fft.forward(&mut hat);
        let mut dx = hat.clone();
        let mut dy = hat;
        for iy in 0..n {
            for ix in 0..n {
                let i = iy * n + ix;
                dx[i] *= Complex64::new(0.0, self.k[ix]);
                dy[i] *= Complex64::new(0.0, self.k[iy]);
            }
        }
        self.fft.inverse(&mut dx);
        self.fft.inverse(&mut dy);
        [dx, dy]
    }

    /// Divergence of a vector of complex fields.
    pub fn divergence(&self, v: &[Vec<Complex64>; 2]) -> Vec<Complex64> {
        let n = self.n;
        let mut ax = v[0].clone();
        let mut ay = v[1].clone();
        self.fft.forward(&mut ax);
        self.fft.forward(&mut ay);
        for iy in 0..n {
            for ix in 0..n {
                let i = iy * n + ix;
                ax[i] = ax[i] * Complex64::new(0.0, self.k[ix]) + ay[i] * Complex64::new(0.0, self.k[iy]);
            }
        }
        self.fft.inverse(&mut ax);
        ax
    }

    /// Applies a radial multiplier `m(|k|^2)` in Fourier space.
    pub fn multiplier(&self, u: &[Complex64], m: impl Fn(f64) -> f64) -> Vec<Complex64> {
        let n = self.n;
        let kf = wavenumbers(n, self.l, false);
        let mut hat = u.to_vec();
        self.fft.forward(&mut hat);
        for iy in 0..n {
            for ix in 0..n {
                hat[iy * n + ix] *= m(kf[ix] * kf[ix] + kf[iy] * kf[iy]);
            }
        }
        self.fft.inverse(&mut hat);
        hat
    }
}
