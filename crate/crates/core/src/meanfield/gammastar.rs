//! Upper bounds on the critical coupling `gamma*(beta) = inf E_{beta,0,0}[u] / int |u|^4`.

use super::energy::{CSSFunctional, CSSParams};
use super::grid::{ComplexField2D, Spectral};
use super::minimize::{sphere_descent, DescentOptions, SphereObjective};
use super::nll::{nll_state_tapered, PolynomialPair};
use crate::error::{domain, Result};
use crate::potential::Potential;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// `E_{beta,0,0}[u] / int |u|^4` on the sphere.
#[derive(Debug)]
pub struct RatioObjective {
    pub func: CSSFunctional,
}

impl RatioObjective {
    pub fn new(beta: f64, l: f64, n: usize) -> Result<Self> {
        let mut func = CSSFunctional::new(CSSParams::new(beta, 0.0, Potential::Zero), l, n)?;
        // states touching the seam see a free-space gauge field of separated
        // pieces and undercut the true ratio
        func.edge_tol = Some(1e-5);
        Ok(RatioObjective { func })
    }
}

impl SphereObjective for RatioObjective {
    fn value(&self, u: &ComplexField2D) -> Result<f64> {
        let e = self.func.energy(u)?;
        Ok(e.magnetic() / e.quartic_integral)
    }

    fn value_gradient(&self, u: &ComplexField2D) -> Result<(f64, ComplexField2D)> {
        let (e, g) = self.func.energy_gradient(u)?;
        let d = e.quartic_integral;
        let ratio = e.magnetic() / d;
        let values = g
            .values
            .iter()
            .zip(&u.values)
            .map(|(gi, ui)| (gi - ui * (2.0 * ratio * ui.norm_sqr())) / d)
            .collect();
        Ok((ratio, ComplexField2D { l: u.l, n: u.n, values }))
    }

    fn spectral(&self) -> &Spectral {
        self.func.spectral()
    }
}

/// Box and resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
}

/// Smooth random field: a Gaussian envelope of width `width`, slightly
/// off-centre, modulated in amplitude and phase by a few low Fourier modes.
pub fn random_smooth_field<R: Rng + ?Sized>(grid: GridSpec, width: f64, rng: &mut R) -> Result<ComplexField2D> {
    let modes: Vec<([f64; 2], f64, f64, f64)> = (0..6)
        .map(|_| {
            let k = [rng.random_range(-1.5..1.5) / width, rng.random_range(-1.5..1.5) / width];
            (k, TAU * rng.random::<f64>(), rng.random_range(-0.3..0.3), rng.random_range(-1.0..1.0))
        })
        .collect();
    let c = [rng.random_range(-0.3..0.3) * width, rng.random_range(-0.3..0.3) * width];
    let u = ComplexField2D::from_fn(grid.l, grid.n, |x, y| {
        let (dx, dy) = (x - c[0], y - c[1]);
        let env = (-(dx * dx + dy * dy) / (2.0 * width * width)).exp();
        let mut amp = 1.0;
        let mut phase = 0.0;
        for (k, ph, a, p) in &modes {
            let s = (k[0] * dx + k[1] * dy + ph).sin();
            amp += a * s;
            phase += p * s;
        }
        Complex64::from_polar(env * amp.max(0.05), phase)
    })?;
    Ok(u.normalized())
}

/// One restart of the ratio minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub label: String,
    pub ratio: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Set when the restart failed; `ratio` is then NaN.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaStarEstimate {
    pub beta: f64,
    /// Smallest ratio found; an upper bound on `gamma*`.
    pub estimate: f64,
    /// Largest minus smallest final ratio over completed restarts.
    pub spread: f64,
    pub restarts: Vec<RestartOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct GammaStarOptions {
    pub grid: GridSpec,
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
}

impl GammaStarOptions {
    pub fn new(grid: GridSpec, restarts: usize, seed: u64) -> Self {
        GammaStarOptions { grid, restarts, seed, tol: 1e-6, max_iter: 400 }
    }
}

/// Multistart minimization of the ratio: `restarts` random fields, plus the
/// edge-tapered NLL states `P = z^d, Q = 1` and one random pair when
/// `beta = 2d`. Failed restarts are kept with their error.
pub fn gamma_star_estimate(beta: f64, opts: &GammaStarOptions) -> Result<GammaStarEstimate> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return domain("beta must be non-negative");
    }
    let obj = RatioObjective::new(beta, opts.grid.l, opts.grid.n)?;
    let mut seeds: Vec<(String, ComplexField2D)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for k in 0..opts.restarts {
        let width = opts.grid.l * rng.random_range(0.04..0.07);
        seeds.push((format!("random-{k}"), random_smooth_field(opts.grid, width, &mut rng)?));
    }
    let half = 0.5 * beta;
    if beta > 0.0 && half.fract() == 0.0 {
        let d = half as usize;
        let mut pairs = vec![("nll-monomial".to_string(), PolynomialPair::monomial(d))];
        pairs.push(("nll-random".to_string(), PolynomialPair::random(d, &mut rng)));
        for (label, pq) in pairs {
            let st = nll_state_tapered(&pq, opts.grid.l, opts.grid.n, 0.7)?;
            seeds.push((label, st.u.normalized()));
        }
    }
    let dopts = DescentOptions::new(opts.tol, opts.max_iter);
    let restarts: Vec<RestartOutcome> = seeds
        .par_iter()
        .map(|(label, u0)| match sphere_descent(&obj, u0, &dopts) {
            Ok(r) => RestartOutcome {
                label: label.clone(),
                ratio: r.value,
                iterations: r.iterations,
                residual: r.residual,
                error: None,
            },
            Err(e) => RestartOutcome {
                label: label.clone(),
                ratio: f64::NAN,
                iterations: 0,
                residual: f64::NAN,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let ok: Vec<f64> = restarts.iter().filter(|r| r.error.is_none()).map(|r| r.ratio).collect();
    if ok.is_empty() {
        return domain("no restart completed");
    }
    let lo = ok.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ok.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(GammaStarEstimate { beta, estimate: lo, spread: hi - lo, restarts })
}
