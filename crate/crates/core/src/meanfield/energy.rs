//! The CSS functional `int |(-i grad + beta A[|u|^2]) u|^2 + int V|u|^2 + gamma int |u|^4`,
//! its exact discrete gradient and the Euler-Lagrange residual.

use super::gauge::GaugeSolver;
use super::grid::{edge_ratio, ComplexField2D, RealField, Spectral};
use crate::error::{domain, Error, Result};
use crate::potential::Potential;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CSSParams {
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "V")]
    pub v: Potential,
}

impl CSSParams {
    pub fn new(beta: f64, gamma: f64, v: Potential) -> Self {
        CSSParams { beta, gamma, v }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || !self.gamma.is_finite() {
            return domain("beta and gamma must be finite");
        }
        let ok = match self.v {
            Potential::Zero => true,
            Potential::Harmonic { coef } => coef >= 0.0 && coef.is_finite(),
            Potential::Power { coef, p } => coef >= 0.0 && coef.is_finite() && p > 0.0,
        };
        if !ok {
            return domain("potential must be non-negative");
        }
        Ok(())
    }
}

/// Per-term values. The kinetic pieces expand
/// `|(-i grad + beta A) u|^2 = |grad u|^2 + 2 beta A.j + beta^2 |A|^2 |u|^2`
/// with the current `j = Im(conj(u) grad u)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CSSEnergy {
    pub kinetic: f64,
    pub paramagnetic: f64,
    pub diamagnetic: f64,
    pub potential: f64,
    /// `int |u|^4`.
    pub quartic_integral: f64,
    /// `gamma int |u|^4`.
    pub quartic: f64,
    pub total: f64,
    pub mass: f64,
}

impl CSSEnergy {
    /// The magnetic kinetic energy `E_{beta,0,0}`.
    pub fn magnetic(&self) -> f64 {
        self.kinetic + self.paramagnetic + self.diamagnetic
    }
}

/// Residual of the Euler-Lagrange equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ELResidual {
    pub residual: ComplexField2D,
    pub lambda: f64,
    /// `L^2` norm of the residual.
    pub norm: f64,
    pub energy: CSSEnergy,
}

impl ELResidual {
    /// Residual norm over the central half `[-L/4, L/4)^2` of the box.
    pub fn interior_norm(&self) -> f64 {
        let r = &self.residual;
        let n = r.n;
        let h2 = r.h() * r.h();
        let mut acc = 0.0;
        for iy in n / 4..3 * n / 4 {
            for ix in n / 4..3 * n / 4 {
                acc += r.values[iy * n + ix].norm_sqr();
            }
        }
        (acc * h2).sqrt()
    }
}

/// Intermediate fields shared by the energy and the gradient.
struct State {
    du: [Vec<Complex64>; 2],
    rho: RealField,
    a: [RealField; 2],
    j: [RealField; 2],
    energy: CSSEnergy,
}

/// Precomputed transforms and potential for one grid.
#[derive(Debug)]
pub struct CSSFunctional {
    pub params: CSSParams,
    pub n: usize,
    pub l: f64,
    spectral: Spectral,
    gauge: Option<GaugeSolver>,
    vgrid: RealField,
    /// Largest edge-to-peak density ratio accepted when `beta != 0`; `None`
    /// disables the check.
    pub edge_tol: Option<f64>,
}

impl CSSFunctional {
    pub fn new(params: CSSParams, l: f64, n: usize) -> Result<Self> {
        params.validate()?;
        let proto = ComplexField2D::zeros(l, n)?;
        let mut vgrid = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                let (x, y) = proto.coord(ix, iy);
                vgrid[iy * n + ix] = params.v.eval(x, y);
            }
        }
        let gauge = if params.beta != 0.0 { Some(GaugeSolver::new(n, l, 0.0)?) } else { None };
        Ok(CSSFunctional { params, n, l, spectral: Spectral::new(n, l), gauge, vgrid, edge_tol: Some(1e-6) })
    }

    /// Same grid, other couplings; reuses the gauge kernels when possible.
    pub fn with_params(self, params: CSSParams) -> Result<Self> {
        params.validate()?;
        if params.v != self.params.v || (params.beta != 0.0 && self.gauge.is_none()) {
            let mut f = Self::new(params, self.l, self.n)?;
            f.edge_tol = self.edge_tol;
            return Ok(f);
        }
        Ok(CSSFunctional { params, ..self })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn potential_grid(&self) -> &[f64] {
        &self.vgrid
    }

    fn check(&self, u: &ComplexField2D) -> Result<()> {
        if u.n != self.n || u.l != self.l {
            return domain("field does not match the functional grid");
        }
        if u.values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return domain("field has non-finite values");
        }
        Ok(())
    }

    fn state(&self, u: &ComplexField2D) -> Result<State> {
        self.check(u)?;
        let n = self.n;
        let h2 = u.h() * u.h();
        let beta = self.params.beta;
        let du = self.spectral.gradient(&u.values);
        let rho = u.density();
        let a = match &self.gauge {
            Some(g) if beta != 0.0 => {
                if let Some(tol) = self.edge_tol {
                    let ratio = edge_ratio(&rho, n);
                    if ratio > tol {
                        return Err(Error::Padding { ratio });
                    }
                }
                g.apply(&rho)
            }
            _ => [vec![0.0; n * n], vec![0.0; n * n]],
        };
        let mut j = [vec![0.0; n * n], vec![0.0; n * n]];
        let mut e = CSSEnergy::default();
        for i in 0..n * n {
            let z = u.values[i];
            for c in 0..2 {
                j[c][i] = (z.conj() * du[c][i]).im;
            }
            e.kinetic += du[0][i].norm_sqr() + du[1][i].norm_sqr();
            e.paramagnetic += a[0][i] * j[0][i] + a[1][i] * j[1][i];
            e.diamagnetic += (a[0][i] * a[0][i] + a[1][i] * a[1][i]) * rho[i];
            e.potential += self.vgrid[i] * rho[i];
            e.quartic_integral += rho[i] * rho[i];
            e.mass += rho[i];
        }
        e.kinetic *= h2;
        e.paramagnetic *= 2.0 * beta * h2;
        e.diamagnetic *= beta * beta * h2;
        e.potential *= h2;
        e.quartic_integral *= h2;
        e.quartic = self.params.gamma * e.quartic_integral;
        e.mass *= h2;
        e.total = e.kinetic + e.paramagnetic + e.diamagnetic + e.potential + e.quartic;
        Ok(State { du, rho, a, j, energy: e })
    }

    pub fn energy(&self, u: &ComplexField2D) -> Result<CSSEnergy> {
        Ok(self.state(u)?.energy)
    }

    /// The energy and its gradient `g` with `dE = 2 Re <g, du>`.
    pub fn energy_gradient(&self, u: &ComplexField2D) -> Result<(CSSEnergy, ComplexField2D)> {
        let st = self.state(u)?;
        let n = self.n;
        let beta = self.params.beta;
        let gamma = self.params.gamma;
        let sp = &self.spectral;
        // -sum_c D_c D_c u, with the same Nyquist-free first derivative
        let mut lap = u.values.clone();
        sp.fft.forward(&mut lap);
        for iy in 0..n {
            for ix in 0..n {
                lap[iy * n + ix] *= sp.k[ix] * sp.k[ix] + sp.k[iy] * sp.k[iy];
            }
        }
        sp.fft.inverse(&mut lap);
        let mut g = lap;
        for i in 0..n * n {
            g[i] += (self.vgrid[i] + 2.0 * gamma * st.rho[i]) * u.values[i];
        }
        if beta != 0.0 {
            let gauge = self.gauge.as_ref().expect("gauge kernels exist when beta != 0");
            let au: [Vec<Complex64>; 2] = [
                (0..n * n).map(|i| u.values[i] * st.a[0][i]).collect(),
                (0..n * n).map(|i| u.values[i] * st.a[1][i]).collect(),
            ];
            let div_au = sp.divergence(&au);
            let w: [RealField; 2] = [
                (0..n * n).map(|i| beta * st.a[0][i] * st.rho[i] + st.j[0][i]).collect(),
                (0..n * n).map(|i| beta * st.a[1][i] * st.rho[i] + st.j[1][i]).collect(),
            ];
            let kw = gauge.apply_dot(&w);
            let mi = Complex64::new(0.0, -beta);
            for i in 0..n * n {
                let a_du = st.du[0][i] * st.a[0][i] + st.du[1][i] * st.a[1][i];
                let a2 = st.a[0][i] * st.a[0][i] + st.a[1][i] * st.a[1][i];
                g[i] += mi * (a_du + div_au[i]);
                g[i] += (beta * beta * a2 - 2.0 * beta * kw[i]) * u.values[i];
            }
        }
        Ok((st.energy, ComplexField2D { l: u.l, n, values: g }))
    }

    /// `r = g - lambda u` with `lambda = Re<u, g> / ||u||^2`.
    pub fn el_residual(&self, u: &ComplexField2D) -> Result<ELResidual> {
        let (energy, g) = self.energy_gradient(u)?;
        let m = u.mass();
        if m == 0.0 {
            return domain("zero field has no residual");
        }
        let lambda = u.dot(&g) / m;
        let residual = g.axpy(-lambda, u);
        let norm = residual.norm();
        Ok(ELResidual { residual, lambda, norm, energy })
    }

    /// `2E - int(|grad u|^2 + V|u|^2 - beta^2 |A|^2 |u|^2)` for normalized `u`.
    pub fn lambda_from_energy(e: &CSSEnergy) -> f64 {
        2.0 * e.total - (e.kinetic + e.potential - e.diamagnetic)
    }
}

/// One-shot energy on a fresh functional.
pub fn css_energy(u: &ComplexField2D, p: &CSSParams) -> Result<CSSEnergy> {
    CSSFunctional::new(*p, u.l, u.n)?.energy(u)
}

/// One-shot residual on a fresh functional.
pub fn el_residual(u: &ComplexField2D, p: &CSSParams) -> Result<ELResidual> {
    CSSFunctional::new(*p, u.l, u.n)?.el_residual(u)
}
