//! Deterministic quadrature of two-particle expectations under
//! `|u(x1)|^2 |u(x2)|^2 f(|x1 - x2|)^2`, written independently of the
//! sampler and the estimators.
#![allow(dead_code)]

use gauss_quad::legendre::GaussLegendre;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy)]
pub struct PairSetup {
    pub alpha: f64,
    pub r: f64,
    pub b: f64,
    pub g: f64,
    /// Support radius of the truncated Gaussian, width `r1 / 3`.
    pub r1: f64,
    /// Harmonic trap coefficient.
    pub trap: f64,
}

/// Per-particle means of `K, V, W, Sdiag, S3body, J, total`, and `E[F^2]`
/// under the product measure.
#[derive(Debug, Clone, Copy)]
pub struct PairOracle {
    pub terms: [f64; 7],
    pub norm_ratio: f64,
}

fn rule(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(std::num::NonZeroUsize::new(n).unwrap());
    let (h, m) = (0.5 * (b - a), 0.5 * (a + b));
    gl.as_node_weight_pairs().iter().map(|&(x, w)| (m + h * x, h * w)).collect()
}

impl PairSetup {
    fn sigma(&self) -> f64 {
        self.r1 / 3.0
    }

    /// Unnormalized `u` and `grad u / u`.
    fn u(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let r12 = self.r1 * self.r1;
        if r2 >= r12 {
            return (0.0, [0.0, 0.0]);
        }
        let s2 = self.sigma() * self.sigma();
        let c = 1.0 - r2 / r12;
        let val = (-0.5 * r2 / s2).exp() * c * c * c;
        let k = -1.0 / s2 - 6.0 / (r12 - r2);
        (val, [k * x[0], k * x[1]])
    }

    fn lambdas(&self) -> (f64, f64) {
        let q = (self.r / self.b).powf(2.0 * self.alpha);
        let d = 2.0 * (1.0 + q) + self.g * (1.0 - q);
        let l1 = (2.0 + self.g) * self.b.powf(-self.alpha) / d;
        let l2 = (2.0 - self.g) * self.b.powf(-self.alpha) * self.r.powf(2.0 * self.alpha) / d;
        (l1, l2)
    }

    fn f(&self, rho: f64) -> f64 {
        let (l1, l2) = self.lambdas();
        let a = self.alpha;
        if rho >= self.b {
            1.0
        } else if rho < self.r {
            l1 * self.r.powf(a) + l2 * self.r.powf(-a)
        } else {
            l1 * rho.powf(a) + l2 * rho.powf(-a)
        }
    }

    /// Radial factor of the Jastrow drift `k(y) = y/|y|^2 * kr(|y|)`.
    fn kr(&self, rho: f64) -> f64 {
        if rho >= self.b || rho < self.r {
            return 0.0;
        }
        let (l1, l2) = self.lambdas();
        let (p, m) = (l1 * rho.powf(self.alpha), l2 * rho.powf(-self.alpha));
        (p - m) / (p + m)
    }

    pub fn oracle(&self, n_rad: usize, n_ang: usize) -> PairOracle {
        let mut ys: Vec<(f64, f64)> = Vec::new();
        for (a, b) in [(0.0, self.r), (self.r, self.b), (self.b, 2.0 * self.r1)] {
            ys.extend(rule(n_rad, a, b));
        }
        let xs = rule(2 * n_rad, 0.0, self.r1);
        let dth = TAU / n_ang as f64;
        let ang: Vec<(f64, f64)> = (0..n_ang).map(|k| ((k as f64 + 0.5) * dth).sin_cos()).collect();
        let mut z_prod = 0.0;
        let mut z = 0.0;
        let mut acc = [0.0; 7];
        for &(rho, wr) in &ys {
            let f2 = self.f(rho).powi(2);
            let kr = self.kr(rho);
            let rm = rho.max(self.r);
            let a2 = rho * rho / (rm * rm * rm * rm);
            let k2 = kr * kr / (rho * rho).max(1e-300);
            let w_ind = if rho < self.r { self.g * self.alpha / (self.r * self.r) } else { 0.0 };
            for &(sy, cy) in &ang {
                let y = [rho * cy, rho * sy];
                let wy = wr * rho * dth;
                let kvec = if rho > 0.0 { [kr * y[0] / (rho * rho), kr * y[1] / (rho * rho)] } else { [0.0, 0.0] };
                for &(rx, wx) in &xs {
                    for &(sx, cx) in &ang {
                        let c = [rx * cx, rx * sx];
                        let x1 = [c[0] + 0.5 * y[0], c[1] + 0.5 * y[1]];
                        let x2 = [c[0] - 0.5 * y[0], c[1] - 0.5 * y[1]];
                        let (u1, p1) = self.u(x1);
                        let (u2, p2) = self.u(x2);
                        let d = u1 * u1 * u2 * u2;
                        if d == 0.0 {
                            continue;
                        }
                        let w = wy * wx * rx * dth * d;
                        z_prod += w;
                        let wf = w * f2;
                        z += wf;
                        let kin = 0.5 * (p1[0] * p1[0] + p1[1] * p1[1] + p2[0] * p2[0] + p2[1] * p2[1]);
                        let pot = 0.5 * self.trap * (x1[0] * x1[0] + x1[1] * x1[1] + x2[0] * x2[0] + x2[1] * x2[1]);
                        let j = self.alpha * ((p1[0] - p2[0]) * kvec[0] + (p1[1] - p2[1]) * kvec[1]);
                        let sd = self.alpha * self.alpha * (a2 + k2);
                        acc[0] += wf * kin;
                        acc[1] += wf * pot;
                        acc[2] += wf * w_ind;
                        acc[3] += wf * sd;
                        acc[5] += wf * j;
                    }
                }
            }
        }
        let mut terms = [0.0; 7];
        for k in 0..6 {
            terms[k] = acc[k] / z;
        }
        terms[6] = terms[..6].iter().sum();
        PairOracle { terms, norm_ratio: z / z_prod }
    }
}
