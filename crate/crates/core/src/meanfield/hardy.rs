//! Numerical check of `int |A^R[|u|^2]|^2 |u|^2 <= 3/2 ||u||_2^4 int |grad |u||^2`.

use super::gauge::GaugeSolver;
use super::grid::{ComplexField2D, Spectral};
use crate::error::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `int |grad |u||^2` with `grad |u| = Re(conj(u) grad u) / |u|` away from zeros.
pub fn modulus_dirichlet(u: &ComplexField2D, sp: &Spectral) -> f64 {
    let du = sp.gradient(&u.values);
    let h2 = u.h() * u.h();
    let mut acc = 0.0;
    for (i, z) in u.values.iter().enumerate() {
        let r = z.norm_sqr();
        if r > 1e-300 {
            let gx = (z.conj() * du[0][i]).re;
            let gy = (z.conj() * du[1][i]).re;
            acc += (gx * gx + gy * gy) / r;
        }
    }
    acc * h2
}

/// Evaluates both sides with a prepared solver (smearing radius `solver.r`).
pub fn hardy_check_with(u: &ComplexField2D, solver: &GaugeSolver, sp: &Spectral) -> Result<HardyCheck> {
    let rho = u.density();
    let a = solver.vector_potential(&rho)?;
    let h2 = u.h() * u.h();
    let lhs = rho
        .iter()
        .enumerate()
        .map(|(i, r)| (a.ax[i] * a.ax[i] + a.ay[i] * a.ay[i]) * r)
        .sum::<f64>()
        * h2;
    let m = u.mass();
    let rhs = 1.5 * m * m * modulus_dirichlet(u, sp);
    Ok(HardyCheck { lhs, rhs, ok: lhs <= rhs * (1.0 + 1e-8) })
}

pub fn hardy_check(u: &ComplexField2D, r: f64) -> Result<HardyCheck> {
    let solver = GaugeSolver::new(u.n, u.l, r)?;
    let sp = Spectral::new(u.n, u.l);
    hardy_check_with(u, &solver, &sp)
}
