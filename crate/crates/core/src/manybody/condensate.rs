//! The one-body condensate `u`.

use crate::error::{domain, Result};
use crate::meanfield::grid::ComplexField2D;
use crate::potential::Potential;
use crate::quad::Rule;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

/// Below this `|u|^2` a point counts as a zero of `u`.
pub const DENSITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub enum CondensateKind {
    /// `exp(-r^2 / 2 sigma^2) (1 - r^2/R1^2)^3` on the disk of radius `R1`.
    TruncatedGaussian { sigma: f64 },
    /// Bicubic interpolation of real and imaginary parts of a grid field.
    GridInterpolated { field: Arc<ComplexField2D> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondensateSpec {
    pub kind: CondensateKind,
    pub support_radius: f64,
}

impl CondensateSpec {
    /// Truncated Gaussian with the default width `R1 / 3`.
    pub fn gaussian(support_radius: f64) -> Self {
        CondensateSpec {
            kind: CondensateKind::TruncatedGaussian { sigma: support_radius / 3.0 },
            support_radius,
        }
    }
}

/// Integral norms of `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensateNorms {
    pub mass: f64,
    /// `int |grad u|^2`
    pub dirichlet: f64,
    /// `int |u|^4`
    pub l4_4: f64,
    /// `(int |u|^8)^(1/2)`
    pub l8_4: f64,
    pub sup: f64,
    pub sup_grad: f64,
}

/// Compiled, normalized condensate.
#[derive(Debug, Clone)]
pub struct Condensate {
    pub spec: CondensateSpec,
    scale: f64,
    rep: Rep,
}

#[derive(Debug, Clone)]
enum Rep {
    Gauss { inv_s2: f64, r1sq: f64 },
    Grid { field: Arc<ComplexField2D>, sup_density: f64 },
}

fn keys(t: f64) -> ([f64; 4], [f64; 4]) {
    // Catmull-Rom weights and their derivatives for offsets -1, 0, 1, 2.
    let t2 = t * t;
    let t3 = t2 * t;
    let w = [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ];
    let d = [
        0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
        0.5 * (9.0 * t2 - 10.0 * t),
        0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
        0.5 * (3.0 * t2 - 2.0 * t),
    ];
    (w, d)
}

impl Condensate {
    pub fn new(spec: CondensateSpec) -> Result<Self> {
        let r1 = spec.support_radius;
        if !(r1 > 0.0 && r1.is_finite()) {
            return domain("support radius must be positive");
        }
        let rep = match &spec.kind {
            CondensateKind::TruncatedGaussian { sigma } => {
                if !(*sigma > 0.0) {
                    return domain("gaussian width must be positive");
                }
                Rep::Gauss { inv_s2: 1.0 / (sigma * sigma), r1sq: r1 * r1 }
            }
            CondensateKind::GridInterpolated { field } => {
                let sup_density = field.values.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
                Rep::Grid { field: field.clone(), sup_density }
            }
        };
        let mut c = Condensate { spec, scale: 1.0, rep };
        let m = c.norms().mass;
        if !(m > 0.0) {
            return domain("condensate has zero mass inside its support");
        }
        c.scale = 1.0 / m.sqrt();
        Ok(c)
    }

    pub fn support_radius(&self) -> f64 {
        self.spec.support_radius
    }

    #[inline]
    fn gauss_profile(&self, r2: f64) -> f64 {
        match self.rep {
            Rep::Gauss { inv_s2, r1sq } => {
                if r2 >= r1sq {
                    0.0
                } else {
                    let c = 1.0 - r2 / r1sq;
                    (-0.5 * r2 * inv_s2).exp() * c * c * c
                }
            }
            _ => unreachable!(),
        }
    }

    /// Value and gradient of the interpolant at `(x, y)`.
    fn grid_eval(&self, field: &ComplexField2D, x: f64, y: f64) -> (Complex64, [Complex64; 2]) {
        let zero = Complex64::new(0.0, 0.0);
        let n = field.n as isize;
        let h = field.h();
        let fx = (x + 0.5 * field.l) / h;
        let fy = (y + 0.5 * field.l) / h;
        let ix = fx.floor() as isize;
        let iy = fy.floor() as isize;
        if ix < 1 || iy < 1 || ix + 2 >= n || iy + 2 >= n {
            return (zero, [zero, zero]);
        }
        let (wx, dx) = keys(fx - ix as f64);
        let (wy, dy) = keys(fy - iy as f64);
        let mut v = zero;
        let mut gx = zero;
        let mut gy = zero;
        for (b, (wyb, dyb)) in wy.iter().zip(&dy).enumerate() {
            let row = ((iy - 1 + b as isize) * n) as usize;
            for (a, (wxa, dxa)) in wx.iter().zip(&dx).enumerate() {
                let z = field.values[row + (ix - 1 + a as isize) as usize];
                v += z * (wxa * wyb);
                gx += z * (dxa * wyb);
                gy += z * (wxa * dyb);
            }
        }
        (v, [gx / h, gy / h])
    }

    /// `u(x)`.
    pub fn value(&self, x: [f64; 2]) -> Complex64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let r1 = self.spec.support_radius;
        if r2 >= r1 * r1 {
            return Complex64::new(0.0, 0.0);
        }
        match &self.rep {
            Rep::Gauss { .. } => Complex64::new(self.scale * self.gauss_profile(r2), 0.0),
            Rep::Grid { field, .. } => self.grid_eval(field, x[0], x[1]).0 * self.scale,
        }
    }

    /// `|u(x)|^2`, zero below [`DENSITY_FLOOR`].
    #[inline]
    pub fn density(&self, x: [f64; 2]) -> f64 {
        let d = self.value(x).norm_sqr();
        if d < DENSITY_FLOOR { 0.0 } else { d }
    }

    /// `log |u(x)|^2`, `-inf` on zeros.
    #[inline]
    pub fn log_density(&self, x: [f64; 2]) -> f64 {
        let d = self.density(x);
        if d == 0.0 { f64::NEG_INFINITY } else { d.ln() }
    }

    /// `grad u / u = p + i q`; `None` where `u` vanishes.
    pub fn grad_log(&self, x: [f64; 2]) -> Option<([f64; 2], [f64; 2])> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let r1 = self.spec.support_radius;
        if r2 >= r1 * r1 {
            return None;
        }
        match &self.rep {
            Rep::Gauss { inv_s2, r1sq } => {
                let c = -inv_s2 - 6.0 / (r1sq - r2);
                Some(([c * x[0], c * x[1]], [0.0, 0.0]))
            }
            Rep::Grid { field, .. } => {
                let (v, g) = self.grid_eval(field, x[0], x[1]);
                if v.norm_sqr() * self.scale * self.scale < DENSITY_FLOOR {
                    return None;
                }
                let a = g[0] / v;
                let b = g[1] / v;
                Some(([a.re, b.re], [a.im, b.im]))
            }
        }
    }

    /// Radial samples of `|u|` and `|u'|` for the analytic kind.
    fn radial_quadrature(&self) -> Option<Vec<(f64, f64, f64, f64)>> {
        if let Rep::Gauss { inv_s2, r1sq } = self.rep {
            let r1 = r1sq.sqrt();
            let rule = Rule::legendre(96);
            Some(
                rule.on(0.0, r1)
                    .map(|(r, w)| {
                        let u = self.scale * self.gauss_profile(r * r);
                        let du = u * r * (-inv_s2 - 6.0 / (r1sq - r * r));
                        (r, TAU * r * w, u, du)
                    })
                    .collect(),
            )
        } else {
            None
        }
    }

    pub fn norms(&self) -> CondensateNorms {
        match &self.rep {
            Rep::Gauss { .. } => {
                let q = self.radial_quadrature().unwrap();
                let mut n = CondensateNorms {
                    mass: 0.0,
                    dirichlet: 0.0,
                    l4_4: 0.0,
                    l8_4: 0.0,
                    sup: self.scale,
                    sup_grad: 0.0,
                };
                let mut l8 = 0.0;
                for &(_, w, u, du) in &q {
                    n.mass += w * u * u;
                    n.dirichlet += w * du * du;
                    n.l4_4 += w * u.powi(4);
                    l8 += w * u.powi(8);
                }
                n.l8_4 = l8.sqrt();
                // |u'| on a fine radial scan
                let r1 = self.spec.support_radius;
                let m = 4000;
                for i in 0..=m {
                    let r = r1 * i as f64 / m as f64;
                    if let Some((p, _)) = self.grad_log([r, 0.0]) {
                        let u = self.value([r, 0.0]).re;
                        n.sup_grad = n.sup_grad.max((p[0] * u).abs());
                    }
                }
                n
            }
            Rep::Grid { field, .. } => {
                let h = field.h();
                let r1 = self.spec.support_radius;
                let mut n = CondensateNorms {
                    mass: 0.0,
                    dirichlet: 0.0,
                    l4_4: 0.0,
                    l8_4: 0.0,
                    sup: 0.0,
                    sup_grad: 0.0,
                };
                let mut l8 = 0.0;
                for iy in 0..field.n {
                    for ix in 0..field.n {
                        let (x, y) = field.coord(ix, iy);
                        if x * x + y * y >= r1 * r1 {
                            continue;
                        }
                        let (v, g) = self.grid_eval(field, x, y);
                        let s = self.scale;
                        let d = v.norm_sqr() * s * s;
                        let gd = (g[0].norm_sqr() + g[1].norm_sqr()) * s * s;
                        n.mass += d;
                        n.dirichlet += gd;
                        n.l4_4 += d * d;
                        l8 += d.powi(4);
                        n.sup = n.sup.max(d.sqrt());
                        n.sup_grad = n.sup_grad.max(gd.sqrt());
                    }
                }
                let h2 = h * h;
                n.mass *= h2;
                n.dirichlet *= h2;
                n.l4_4 *= h2;
                n.l8_4 = (l8 * h2).sqrt();
                n
            }
        }
    }

    /// `int V |u|^2`.
    pub fn potential_energy(&self, v: &Potential) -> f64 {
        match &self.rep {
            Rep::Gauss { .. } => {
                let q = self.radial_quadrature().unwrap();
                let rule = Rule::legendre(32);
                let mut acc = 0.0;
                for &(r, w, u, _) in &q {
                    // angular average of V on the circle of radius r
                    let avg = rule.integrate(0.0, TAU, |t| v.eval(r * t.cos(), r * t.sin())) / TAU;
                    acc += w * u * u * avg;
                }
                acc
            }
            Rep::Grid { field, .. } => {
                let h = field.h();
                let r1 = self.spec.support_radius;
                let mut acc = 0.0;
                for iy in 0..field.n {
                    for ix in 0..field.n {
                        let (x, y) = field.coord(ix, iy);
                        if x * x + y * y < r1 * r1 {
                            acc += v.eval(x, y) * self.density([x, y]);
                        }
                    }
                }
                acc * h * h
            }
        }
    }

    /// One independent draw from `|u|^2`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let r1 = self.spec.support_radius;
        match &self.rep {
            Rep::Gauss { inv_s2, r1sq } => {
                // Gaussian proposal exp(-r^2/sigma^2), accept with (1 - r^2/R1^2)^6.
                let sd = (0.5 / inv_s2).sqrt();
                loop {
                    let x: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
                    let y: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
                    let r2 = x * x + y * y;
                    if r2 >= *r1sq {
                        continue;
                    }
                    let c = 1.0 - r2 / r1sq;
                    let acc = c.powi(6);
                    if rng.random::<f64>() < acc {
                        return [x, y];
                    }
                }
            }
            Rep::Grid { sup_density, .. } => {
                let bound = 2.0 * sup_density * self.scale * self.scale;
                loop {
                    let r = r1 * rng.random::<f64>().sqrt();
                    let t = TAU * rng.random::<f64>();
                    let p = [r * t.cos(), r * t.sin()];
                    if rng.random::<f64>() * bound < self.density(p) {
                        return p;
                    }
                }
            }
        }
    }

    /// `int_cell |u|^2` on the square `[x0, x0+h] x [y0, y0+h]`.
    pub fn cell_mass(&self, x0: f64, y0: f64, h: f64, rule: &Rule) -> f64 {
        let mut acc = 0.0;
        for (y, wy) in rule.on(y0, y0 + h) {
            for (x, wx) in rule.on(x0, x0 + h) {
                acc += wx * wy * self.density([x, y]);
            }
        }
        acc
    }
}
