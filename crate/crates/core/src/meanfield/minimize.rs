//! Gradient descent on the unit sphere `int |u|^2 = 1`.

use super::energy::{CSSEnergy, CSSFunctional};
use super::grid::{ComplexField2D, Spectral};
use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};

/// A smooth functional restricted to normalized fields.
pub trait SphereObjective {
    fn value(&self, u: &ComplexField2D) -> Result<f64>;
    /// Value and `g` with `d value = 2 Re <g, du>`.
    fn value_gradient(&self, u: &ComplexField2D) -> Result<(f64, ComplexField2D)>;
    fn spectral(&self) -> &Spectral;
}

impl SphereObjective for CSSFunctional {
    fn value(&self, u: &ComplexField2D) -> Result<f64> {
        Ok(self.energy(u)?.total)
    }

    fn value_gradient(&self, u: &ComplexField2D) -> Result<(f64, ComplexField2D)> {
        let (e, g) = self.energy_gradient(u)?;
        Ok((e.total, g))
    }

    fn spectral(&self) -> &Spectral {
        CSSFunctional::spectral(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DescentOptions {
    /// Stop when the tangential gradient norm drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Precondition with `c / (c - Laplacian)`.
    #[serde(default = "yes")]
    pub precondition: bool,
    #[serde(default = "default_step")]
    pub initial_step: f64,
    /// Report divergence once a single cell holds this much mass while the
    /// value keeps dropping.
    #[serde(default)]
    pub collapse_mass: Option<f64>,
}

fn yes() -> bool {
    true
}

fn default_step() -> f64 {
    0.1
}

impl DescentOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        DescentOptions { tol, max_iter, precondition: true, initial_step: default_step(), collapse_mass: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentResult {
    pub u: ComplexField2D,
    pub value: f64,
    pub iterations: usize,
    /// `||g - lambda u||` at the returned field.
    pub residual: f64,
    pub lambda: f64,
    pub converged: bool,
    /// Values after each accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;

fn precondition(sp: &Spectral, v: &ComplexField2D, c: f64) -> ComplexField2D {
    let values = sp.multiplier(&v.values, |k2| c / (c + k2));
    ComplexField2D { l: v.l, n: v.n, values }
}

fn peak_cell_mass(u: &ComplexField2D) -> f64 {
    let h2 = u.h() * u.h();
    u.values.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max) * h2
}

/// Projected descent with Barzilai-Borwein steps and Armijo backtracking;
/// the field is renormalized after every step.
pub fn sphere_descent<O: SphereObjective + ?Sized>(
    obj: &O,
    init: &ComplexField2D,
    opts: &DescentOptions,
) -> Result<DescentResult> {
    if !(opts.tol > 0.0) {
        return domain("tolerance must be positive");
    }
    if init.mass() == 0.0 {
        return domain("initial field is zero");
    }
    let mut u = init.clone().normalized();
    let (mut v, mut g) = obj.value_gradient(&u)?;
    let mut trace = vec![v];
    let mut prev: Option<(ComplexField2D, ComplexField2D)> = None;
    let mut tau = opts.initial_step;
    let mut iterations = 0;
    loop {
        let lambda = u.dot(&g);
        let r = g.axpy(-lambda, &u);
        let res = r.norm();
        if res < opts.tol || iterations >= opts.max_iter {
            return Ok(DescentResult {
                u,
                value: v,
                iterations,
                residual: res,
                lambda,
                converged: res < opts.tol,
                trace,
            });
        }
        let mut d = if opts.precondition {
            let c = 1.0f64.max(lambda.abs());
            let pr = precondition(obj.spectral(), &r, c);
            let pu = precondition(obj.spectral(), &u, c);
            let mu = u.dot(&pr) / u.dot(&pu);
            pr.axpy(-mu, &pu)
        } else {
            r.clone()
        };
        let mut slope = 2.0 * r.dot(&d);
        if !(slope > 0.0) {
            d = r.clone();
            slope = 2.0 * res * res;
        }
        if let Some((pu, pd)) = &prev {
            let s = u.axpy(-1.0, pu);
            let y = d.axpy(-1.0, pd);
            let sy = s.dot(&y);
            if sy > 0.0 {
                tau = (s.dot(&s) / sy).clamp(1e-10, 1e4);
            } else {
                tau = (2.0 * tau).min(1e4);
            }
        }
        let mut accepted = None;
        for _ in 0..60 {
            let trial = u.axpy(-tau, &d).normalized();
            match obj.value(&trial) {
                Ok(vt) if vt.is_finite() && vt <= v - ARMIJO * tau * slope => {
                    accepted = Some((trial, vt));
                    break;
                }
                Ok(_) | Err(Error::Padding { .. }) => tau *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((un, _)) = accepted else {
            // no further decrease at machine precision
            return Ok(DescentResult { u, value: v, iterations, residual: res, lambda, converged: false, trace });
        };
        prev = Some((u, d));
        u = un;
        let (vn, gn) = obj.value_gradient(&u)?;
        v = vn;
        g = gn;
        trace.push(v);
        iterations += 1;
        if let Some(cm) = opts.collapse_mass {
            if peak_cell_mass(&u) > cm && v < trace[0] {
                return Err(Error::Divergence { iterations, energy: v });
            }
        }
    }
}

/// Result of [`minimize_css`].
#[derive(Debug, Clone, PartialEq)]
pub struct CSSMinimum {
    pub u: ComplexField2D,
    pub energy: CSSEnergy,
    pub iterations: usize,
    pub residual: f64,
    pub lambda: f64,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Minimizes the CSS energy from `init`; a collapse onto the grid scale is
/// reported as [`Error::Divergence`].
pub fn minimize_css(
    func: &CSSFunctional,
    init: &ComplexField2D,
    tol: f64,
    max_iter: usize,
) -> Result<CSSMinimum> {
    let mut opts = DescentOptions::new(tol, max_iter);
    opts.collapse_mass = Some(0.05);
    minimize_css_with(func, init, &opts)
}

pub fn minimize_css_with(
    func: &CSSFunctional,
    init: &ComplexField2D,
    opts: &DescentOptions,
) -> Result<CSSMinimum> {
    let out = sphere_descent(func, init, opts)?;
    let energy = func.energy(&out.u)?;
    Ok(CSSMinimum {
        u: out.u,
        energy,
        iterations: out.iterations,
        residual: out.residual,
        lambda: out.lambda,
        converged: out.converged,
        trace: out.trace,
    })
}
