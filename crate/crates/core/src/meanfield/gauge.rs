//! Self-generated gauge potential `A[rho] = (x^perp / |x|^2) * rho`.
//!
//! The convolution is free-space, not periodic. The kernel `grad^perp log|x|`
//! is built from the Fourier transform of the logarithm truncated at the
//! largest distance between two grid points (Vico, Greengard and Ferrando):
//! that transform is smooth, so sampling it on a fourfold grid and going back
//! to real space yields a kernel that is exact for band-limited sources. The
//! kernel is then applied by a zero-padded FFT on a twofold grid.

use super::grid::{edge_ratio, transpose, Fft2, RealField};
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use crate::error::{domain, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Two real components on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeField2D {
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub ax: RealField,
    pub ay: RealField,
}

/// `w_R(|x|)`: the logarithm smeared over the disk of radius `R`.
pub fn smeared_potential_wr(r_abs: f64, r: f64) -> f64 {
    let ax = r_abs.abs();
    if r == 0.0 || ax > r {
        ax.ln()
    } else {
        r.ln() + 0.5 * (ax * ax / (r * r) - 1.0)
    }
}

/// `grad w_R(x) = x / max(R, |x|)^2`.
pub fn smeared_gradient(x: [f64; 2], r: f64) -> [f64; 2] {
    let d2 = (x[0] * x[0] + x[1] * x[1]).max(r * r);
    [x[0] / d2, x[1] / d2]
}

/// `2 J1(z) / z`.
fn jinc(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        let z2 = z * z;
        1.0 - z2 / 8.0 + z2 * z2 / 192.0
    } else {
        2.0 * libm::j1(z) / z
    }
}

/// Fourier transform of `log|x| 1_{|x| < lt}` at wavenumber `k`.
fn truncated_log_hat(k: f64, lt: f64) -> f64 {
    let z = k * lt;
    let l2 = lt * lt;
    if z < 1e-2 {
        // series of J1(z)/z and (J0(z) - 1)/z^2
        let z2 = z * z;
        let j1z = 0.5 - z2 / 16.0 + z2 * z2 / 384.0;
        let j0m = -0.25 + z2 / 64.0 - z2 * z2 / 2304.0;
        TAU * l2 * (lt.ln() * j1z + j0m)
    } else {
        TAU * (lt * lt.ln() * libm::j1(z) / k + (libm::j0(z) - 1.0) / (k * k))
    }
}

/// Precomputed kernels for one grid and smearing radius.
pub struct GaugeSolver {
    pub n: usize,
    pub l: f64,
    pub r: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Transforms of each kernel component on the padded grid, times `h^2`,
    /// stored transposed (`[kx][ky]`).
    kx: Vec<Complex64>,
    ky: Vec<Complex64>,
    /// Relative edge density above which sources count as touching the margin.
    pub edge_tol: f64,
}

impl std::fmt::Debug for GaugeSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GaugeSolver(n = {}, L = {}, R = {})", self.n, self.l, self.r)
    }
}

impl GaugeSolver {
    /// Kernels for `grad^perp w_R`; `r = 0` gives the point kernel.
    pub fn new(n: usize, l: f64, r: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 4 {
            return domain(format!("grid size {n} must be a power of two"));
        }
        let lt = 2f64.sqrt() * l + r;
        if lt + r >= 2.0 * l {
            return domain(format!("smearing radius {r} too large for box {l}"));
        }
        let h = l / n as f64;
        let m = 4 * n;
        let big = Fft2::new(m);
        let k = super::grid::wavenumbers(m, m as f64 * h, false);
        let ghat: Vec<f64> = {
            let mut out = vec![0.0; m * m];
            for iy in 0..m {
                for ix in 0..m {
                    let kk = (k[ix] * k[ix] + k[iy] * k[iy]).sqrt();
                    out[iy * m + ix] = truncated_log_hat(kk, lt) * jinc(kk * r);
                }
            }
            out
        };
        let nyq = m / 2;
        let p = 2 * n;
        let fft = Fft2::new(p);
        let mut comps = Vec::with_capacity(2);
        for comp in 0..2 {
            // K_x = -d_y G, K_y = d_x G
            let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
            for iy in 0..m {
                for ix in 0..m {
                    if ix == nyq || iy == nyq {
                        continue;
                    }
                    let g = ghat[iy * m + ix];
                    buf[iy * m + ix] = if comp == 0 {
                        Complex64::new(0.0, -k[iy] * g)
                    } else {
                        Complex64::new(0.0, k[ix] * g)
                    };
                }
            }
            big.inverse(&mut buf);
            // the 1/h^2 of the inverse transform cancels the h^2 cell weight
            // offsets -n..n-1 into the padded grid, dropping -n to keep the kernel odd
            let mut pad = vec![Complex64::new(0.0, 0.0); p * p];
            for oy in -(n as isize) + 1..n as isize {
                for ox in -(n as isize) + 1..n as isize {
                    let src = (oy.rem_euclid(m as isize) as usize) * m + ox.rem_euclid(m as isize) as usize;
                    let dst = (oy.rem_euclid(p as isize) as usize) * p + ox.rem_euclid(p as isize) as usize;
                    pad[dst] = Complex64::new(buf[src].re, 0.0);
                }
            }
            fft.forward(&mut pad);
            let mut t = vec![Complex64::new(0.0, 0.0); p * p];
            transpose(&pad, &mut t, p);
            comps.push(t);
        }
        let ky = comps.pop().unwrap();
        let kx = comps.pop().unwrap();
        let mut planner = FftPlanner::new();
        Ok(GaugeSolver {
            n,
            l,
            r,
            fwd: planner.plan_fft_forward(p),
            inv: planner.plan_fft_inverse(p),
            kx,
            ky,
            edge_tol: 1e-6,
        })
    }

    pub fn check_margin(&self, rho: &[f64]) -> Result<()> {
        let ratio = edge_ratio(rho, self.n);
        if ratio > self.edge_tol {
            return Err(Error::Padding { ratio });
        }
        Ok(())
    }

    /// Transform of `a + i b` zero-padded to the `2n` grid, in `[kx][ky]`
    /// layout. Rows of the padding are all zero and are skipped.
    fn forward_padded(&self, a: &[f64], b: Option<&[f64]>) -> Vec<Complex64> {
        let (n, p) = (self.n, 2 * self.n);
        let mut rows = vec![Complex64::new(0.0, 0.0); n * p];
        for iy in 0..n {
            for ix in 0..n {
                let im = b.map_or(0.0, |b| b[iy * n + ix]);
                rows[iy * p + ix] = Complex64::new(a[iy * n + ix], im);
            }
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fwd.get_inplace_scratch_len()];
        self.fwd.process_with_scratch(&mut rows, &mut scratch);
        let mut t = vec![Complex64::new(0.0, 0.0); p * p];
        for iy in 0..n {
            for kx in 0..p {
                t[kx * p + iy] = rows[iy * p + kx];
            }
        }
        self.fwd.process_with_scratch(&mut t, &mut scratch);
        t
    }

    /// Inverse of a `[kx][ky]` spectrum, returning the first `n x n` block
    /// in `[y][x]` layout, normalized.
    fn inverse_block(&self, mut t: Vec<Complex64>) -> Vec<Complex64> {
        let (n, p) = (self.n, 2 * self.n);
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inv.get_inplace_scratch_len()];
        self.inv.process_with_scratch(&mut t, &mut scratch);
        let mut rows = vec![Complex64::new(0.0, 0.0); n * p];
        for kx in 0..p {
            for iy in 0..n {
                rows[iy * p + kx] = t[kx * p + iy];
            }
        }
        self.inv.process_with_scratch(&mut rows, &mut scratch);
        let s = 1.0 / (p * p) as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for iy in 0..n {
            for ix in 0..n {
                out[iy * n + ix] = rows[iy * p + ix] * s;
            }
        }
        out
    }

    /// `A = K * rho` without the margin check.
    pub fn apply(&self, rho: &[f64]) -> [RealField; 2] {
        let mut hat = self.forward_padded(rho, None);
        // both kernels are real in space, so K_x + i K_y gives A_x + i A_y
        for (i, z) in hat.iter_mut().enumerate() {
            *z *= self.kx[i] + Complex64::new(0.0, 1.0) * self.ky[i];
        }
        let out = self.inverse_block(hat);
        [out.iter().map(|z| z.re).collect(), out.iter().map(|z| z.im).collect()]
    }

    /// `sum_c K_c * w_c`, the adjoint pairing used in the gradient.
    pub fn apply_dot(&self, w: &[RealField; 2]) -> RealField {
        let p = 2 * self.n;
        // one transform of w_x + i w_y, split by conjugate symmetry
        let z = self.forward_padded(&w[0], Some(&w[1]));
        let mut hat = vec![Complex64::new(0.0, 0.0); p * p];
        for kx in 0..p {
            let mx = (p - kx) % p;
            for ky in 0..p {
                let my = (p - ky) % p;
                let a = z[kx * p + ky];
                let b = z[mx * p + my].conj();
                let w0 = (a + b) * 0.5;
                let w1 = (a - b) * Complex64::new(0.0, -0.5);
                let i = kx * p + ky;
                hat[i] = w0 * self.kx[i] + w1 * self.ky[i];
            }
        }
        self.inverse_block(hat).iter().map(|z| z.re).collect()
    }

    /// Gauge field of a density, rejecting densities that reach the box edge.
    pub fn vector_potential(&self, rho: &[f64]) -> Result<GaugeField2D> {
        if rho.len() != self.n * self.n {
            return domain("density does not match the solver grid");
        }
        if rho.iter().any(|v| !v.is_finite()) {
            return domain("density must be finite");
        }
        self.check_margin(rho)?;
        let [ax, ay] = self.apply(rho);
        Ok(GaugeField2D { l: self.l, n: self.n, ax, ay })
    }
}

/// One-shot `A[rho]` on a fresh solver.
pub fn vector_potential(rho: &[f64], n: usize, l: f64) -> Result<GaugeField2D> {
    GaugeSolver::new(n, l, 0.0)?.vector_potential(rho)
}

/// Central-difference coefficients of order 8 for the first derivative.
const FD8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

fn fd_dx(f: &[f64], n: usize, h: f64, ix: usize, iy: usize) -> f64 {
    FD8.iter()
        .enumerate()
        .map(|(k, c)| c * (f[iy * n + ix + k + 1] - f[iy * n + ix - k - 1]))
        .sum::<f64>()
        / h
}

fn fd_dy(f: &[f64], n: usize, h: f64, ix: usize, iy: usize) -> f64 {
    FD8.iter()
        .enumerate()
        .map(|(k, c)| c * (f[(iy + k + 1) * n + ix] - f[(iy - k - 1) * n + ix]))
        .sum::<f64>()
        / h
}

/// `(curl A, div A)` by eighth-order differences; entries within `margin`
/// cells of the edge (at least 4) are left at zero.
pub fn curl_div_fd(a: &GaugeField2D, margin: usize) -> (RealField, RealField) {
    let n = a.n;
    let h = a.l / n as f64;
    let m = margin.max(4);
    let mut curl = vec![0.0; n * n];
    let mut div = vec![0.0; n * n];
    for iy in m..n - m {
        for ix in m..n - m {
            curl[iy * n + ix] = fd_dx(&a.ay, n, h, ix, iy) - fd_dy(&a.ax, n, h, ix, iy);
            div[iy * n + ix] = fd_dx(&a.ax, n, h, ix, iy) + fd_dy(&a.ay, n, h, ix, iy);
        }
    }
    (curl, div)
}

/// `2 pi` times the density, for comparison with the curl.
pub fn curl_target(rho: &[f64]) -> RealField {
    rho.iter().map(|v| 2.0 * PI * v).collect()
}
