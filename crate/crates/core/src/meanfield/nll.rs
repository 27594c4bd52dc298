//! Exact zero-energy states `u_{P,Q}` of the nonlinear Landau level.

use super::grid::ComplexField2D;
use crate::error::{Error, Result};
use crate::quad::Rule;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Two polynomials, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "UPPERCASE")]
pub struct PolynomialPair {
    pub p: Vec<Complex64>,
    pub q: Vec<Complex64>,
}

fn trim(c: &[Complex64]) -> Vec<Complex64> {
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut v = c.to_vec();
    while v.len() > 1 && v.last().unwrap().norm() <= 1e-14 * scale {
        v.pop();
    }
    if v.is_empty() {
        v.push(Complex64::new(0.0, 0.0));
    }
    v
}

fn degree(c: &[Complex64]) -> usize {
    trim(c).len() - 1
}

fn is_zero(c: &[Complex64]) -> bool {
    c.iter().all(|z| z.norm() == 0.0)
}

/// `(p(z), p'(z))` by Horner.
#[inline]
pub fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        d = d * z + v;
        v = v * z + a;
    }
    (v, d)
}

fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    if c.len() <= 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect()
}

fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            a.get(i).copied().unwrap_or_default() - b.get(i).copied().unwrap_or_default()
        })
        .collect()
}

/// Roots of a polynomial of degree at least one (Durand-Kerner).
pub fn roots(c: &[Complex64]) -> Vec<Complex64> {
    let c = trim(c);
    let d = c.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    let lead = c[d];
    let monic: Vec<Complex64> = c.iter().map(|z| z / lead).collect();
    let radius = 1.0 + monic[..d].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32) * (0.5 * radius)).collect();
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..d {
            let (num, _) = horner(&monic, z[i]);
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let step = num / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    z
}

impl PolynomialPair {
    pub fn new(p: Vec<Complex64>, q: Vec<Complex64>) -> Result<Self> {
        let pair = PolynomialPair { p, q };
        pair.validate()?;
        Ok(pair)
    }

    /// `P = z^d`, `Q = 1`.
    pub fn monomial(d: usize) -> Self {
        let mut p = vec![Complex64::new(0.0, 0.0); d + 1];
        p[d] = Complex64::new(1.0, 0.0);
        PolynomialPair { p, q: vec![Complex64::new(1.0, 0.0)] }
    }

    /// Random pair of degree `d`: `P` has `d` roots in the unit disk and `Q`
    /// has `d - 1` roots in the disk of radius 1.5, all at least 0.8 apart,
    /// with unimodular leading coefficients of random phase. Draws whose
    /// [`min_scale`](Self::min_scale) is below 0.7 are rejected so that the
    /// soliton stays resolvable on moderate grids.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        assert!(d >= 1);
        loop {
            let pair = Self::draw(d, rng);
            if pair.min_scale() >= 0.7 {
                return pair;
            }
        }
    }

    fn draw<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let mut pts: Vec<Complex64> = Vec::with_capacity(2 * d);
        let draw = |radius: f64, pts: &mut Vec<Complex64>, rng: &mut R| loop {
            let z = Complex64::from_polar(radius * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
            if pts.iter().all(|w| (z - w).norm() >= 0.8) {
                pts.push(z);
                return z;
            }
        };
        let lead = |rng: &mut R| Complex64::from_polar(1.0, TAU * rng.random::<f64>());
        let mut p = vec![lead(rng)];
        for _ in 0..d {
            let z = draw(1.0, &mut pts, rng);
            p = mul(&p, &[-z, Complex64::new(1.0, 0.0)]);
        }
        let mut q = vec![lead(rng)];
        for _ in 1..d {
            let z = draw(1.5, &mut pts, rng);
            q = mul(&q, &[-z, Complex64::new(1.0, 0.0)]);
        }
        PolynomialPair { p, q }
    }

    /// Smallest local length scale `|Q(z)/P'(z)|` over roots of `P`, and
    /// `|P(w)/Q'(w)|` over roots of `Q`.
    pub fn min_scale(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (a, b) in [(&self.p, &self.q), (&self.q, &self.p)] {
            for z in roots(a) {
                let (_, da) = horner(a, z);
                let (vb, _) = horner(b, z);
                best = best.min(vb.norm() / da.norm());
            }
        }
        best
    }

    pub fn degree(&self) -> usize {
        degree(&self.p).max(degree(&self.q))
    }

    pub fn beta(&self) -> f64 {
        2.0 * self.degree() as f64
    }

    /// `P' Q - P Q'`.
    pub fn wronskian(&self) -> Vec<Complex64> {
        trim(&sub(&mul(&derivative(&self.p), &self.q), &mul(&self.p, &derivative(&self.q))))
    }

    /// Smallest `|Q(z)| / sum |q_k| |z|^k` over roots `z` of the higher-degree
    /// polynomial; zero for a common root.
    pub fn separation(&self) -> f64 {
        let (a, b) = if degree(&self.p) >= degree(&self.q) { (&self.p, &self.q) } else { (&self.q, &self.p) };
        let mut best = f64::INFINITY;
        for z in roots(a) {
            let (v, _) = horner(b, z);
            let scale: f64 = b.iter().enumerate().map(|(k, c)| c.norm() * z.norm().powi(k as i32)).sum();
            best = best.min(if scale > 0.0 { v.norm() / scale } else { 0.0 });
        }
        best
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |c: &[Complex64]| c.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if self.p.is_empty() || self.q.is_empty() || !finite(&self.p) || !finite(&self.q) {
            return Err(Error::Polynomial("coefficients must be finite and non-empty".into()));
        }
        if is_zero(&self.p) || is_zero(&self.q) {
            return Err(Error::Polynomial("P and Q must be nonzero".into()));
        }
        let w = self.wronskian();
        let scale = self.p.iter().chain(&self.q).map(|z| z.norm()).fold(0.0, f64::max);
        if w.iter().all(|z| z.norm() <= 1e-12 * scale * scale) {
            return Err(Error::Polynomial("P and Q are linearly dependent".into()));
        }
        if self.separation() < 1e-8 {
            return Err(Error::Polynomial("P and Q share a root".into()));
        }
        Ok(())
    }

    /// `u_{P,Q}(z)`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let c = (2.0 / (PI * self.beta())).sqrt();
        let (p, dp) = horner(&self.p, z);
        let (q, dq) = horner(&self.q, z);
        (dp * q - p * dq).conj() * (c / (p.norm_sqr() + q.norm_sqr()))
    }
}

/// A sampled NLL state.
#[derive(Debug, Clone, PartialEq)]
pub struct NllState {
    pub u: ComplexField2D,
    pub beta: f64,
    pub degree: usize,
    /// Grid value of `int |u|^2`.
    pub mass: f64,
    /// Mass outside the disk inscribed in the box.
    pub tail: f64,
}

/// Mass of `|u_{P,Q}|^2` outside radius `r0`.
pub fn tail_mass(pq: &PolynomialPair, r0: f64) -> f64 {
    let rule = Rule::legendre(48);
    let nt = 128;
    let mut acc = 0.0;
    // r = r0 / t, r dr = r0^2 / t^3 dt
    for (t, w) in rule.on(0.0, 1.0) {
        let r = r0 / t;
        let mut ang = 0.0;
        for k in 0..nt {
            let z = Complex64::from_polar(r, TAU * k as f64 / nt as f64);
            ang += pq.eval(z).norm_sqr();
        }
        acc += w * ang * TAU / nt as f64 * r0 * r0 / (t * t * t);
    }
    acc
}

/// Smooth step: 1 for `t <= 0`, 0 for `t >= 1`, infinitely differentiable.
fn smooth_step(t: f64) -> f64 {
    let psi = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let (a, b) = (psi(1.0 - t), psi(t));
    if a + b == 0.0 { 1.0 } else { a / (a + b) }
}

/// Product window equal to one on `|x|, |y| <= inner L/2` and vanishing at
/// the box edge, so that the periodic extension of a slowly decaying field
/// with a phase winding has no seam.
pub fn edge_window(l: f64, inner: f64, x: f64, y: f64) -> f64 {
    let a = 0.5 * inner * l;
    let b = 0.5 * l;
    let w = |s: f64| smooth_step((s.abs() - a) / (b - a));
    w(x) * w(y)
}

/// Samples `u_{P,Q}` on the grid; `beta = 2 deg`. Fails when the grid mass
/// misses one by more than the tail outside the box allows.
pub fn nll_state(pq: &PolynomialPair, l: f64, n: usize) -> Result<NllState> {
    sample(pq, l, n, None)
}

/// As [`nll_state`], multiplied by [`edge_window`] with the given inner fraction.
pub fn nll_state_tapered(pq: &PolynomialPair, l: f64, n: usize, inner: f64) -> Result<NllState> {
    if !(inner > 0.0 && inner < 1.0) {
        return Err(Error::Domain(format!("taper fraction {inner} must lie in (0, 1)")));
    }
    sample(pq, l, n, Some(inner))
}

fn sample(pq: &PolynomialPair, l: f64, n: usize, inner: Option<f64>) -> Result<NllState> {
    pq.validate()?;
    let u = ComplexField2D::from_fn(l, n, |x, y| {
        let w = inner.map_or(1.0, |f| edge_window(l, f, x, y));
        pq.eval(Complex64::new(x, y)) * w
    })?;
    let mass = u.mass();
    let tail = tail_mass(pq, 0.5 * l * inner.unwrap_or(1.0));
    if (1.0 - mass).abs() > tail + 1e-7 || mass > 1.0 + 1e-7 {
        return Err(Error::Domain(format!(
            "grid mass {mass:.9} inconsistent with tail {tail:.3e}; refine the grid"
        )));
    }
    Ok(NllState { u, beta: pq.beta(), degree: pq.degree(), mass, tail })
}
