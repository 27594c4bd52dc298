//! Single-shot subcommands. Each writes its outputs under `out` and returns
//! the invariant checks of the run.

use crate::config::{CssConfig, GammaStarConfig, NllConfig, TwoBodyConfig, VmcRunConfig};
use crate::fieldio::write_field;
use crate::report::{write_json, Check};
use anyhow::{Context, Result};
use anyonlab_core::manybody::{estimate_energy, ChainConfig, Condensate, EnergyBreakdown, VmcConfig};
use anyonlab_core::meanfield::{
    css_energy, el_residual, gamma_star_estimate, hardy_check, minimize_css, nll_state, nll_state_tapered,
    random_smooth_field, CSSEnergy, CSSFunctional, CSSParams, GammaStarEstimate, GammaStarOptions, GridSpec,
    HardyCheck, PolynomialPair,
};
use anyonlab_core::twobody::{coupling_g, scattering_energy_refined, AnyonPairParams};
use anyonlab_core::{Error, Potential};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TwoBodyReport {
    pub closed: f64,
    pub numeric: f64,
    pub mesh_error: f64,
    pub lo: f64,
    pub hi: f64,
    pub bracket_ok: bool,
    #[serde(rename = "G")]
    pub g_ratio: f64,
}

pub fn twobody(cfg: &TwoBodyConfig, out: &Path) -> Result<(TwoBodyReport, Vec<Check>)> {
    cfg.check()?;
    let p = AnyonPairParams::new(cfg.alpha, cfg.r, cfg.b, cfg.g)?;
    let num = scattering_energy_refined(&p, cfg.n_outer)?;
    let rep = TwoBodyReport {
        closed: num.closed,
        numeric: num.energy,
        mesh_error: num.mesh_error,
        lo: num.lo,
        hi: num.hi,
        bracket_ok: num.bracket_ok,
        g_ratio: coupling_g(p.s(), p.g)?,
    };
    write_json(&out.join("twobody.json"), &rep)?;
    let checks = vec![Check::new("two-body bracket", rep.bracket_ok, format!("{} in [{}, {}]", rep.numeric, rep.lo, rep.hi))];
    Ok((rep, checks))
}

pub fn vmc(cfg: &VmcRunConfig, seed: Option<u64>, out: &Path) -> Result<(EnergyBreakdown, Vec<Check>)> {
    cfg.check()?;
    let p = AnyonPairParams::new(cfg.alpha, cfg.r, cfg.b, cfg.g)?;
    let u = Condensate::new(cfg.condensate.spec())?;
    let vc = VmcConfig {
        chain: ChainConfig::new(seed.unwrap_or(cfg.seed), cfg.sampler.burn_in, cfg.sampler.sweeps),
        chains: cfg.sampler.chains,
        rao_blackwell: cfg.sampler.rao_blackwell,
        rel_err_ceiling: cfg.rel_err_ceiling,
    };
    let br = estimate_energy(&u, &p, cfg.n, &cfg.potential, &vc)?;
    write_json(&out.join("vmc.json"), &br)?;
    let finite = br.components().iter().all(|(_, e)| e.mean.is_finite() && e.stderr >= 0.0);
    let checks = vec![
        Check::new("finite estimates", finite, String::new()),
        Check::new("relative errors under ceiling", br.flagged.is_empty(), br.flagged.join(",")),
    ];
    Ok((br, checks))
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CssReport {
    pub energy: Option<CSSEnergy>,
    pub iterations: usize,
    pub residual: f64,
    pub lambda: f64,
    pub converged: bool,
    pub hardy: Option<HardyCheck>,
    pub diverged: Option<String>,
}

pub fn css(cfg: &CssConfig, seed: Option<u64>, out: &Path) -> Result<(CssReport, Vec<Check>)> {
    cfg.check()?;
    let params = CSSParams::new(cfg.beta, cfg.gamma, cfg.v);
    let func = CSSFunctional::new(params, cfg.l, cfg.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(cfg.seed));
    let width = cfg.start_width.unwrap_or(cfg.l / 32.0);
    let init = random_smooth_field(GridSpec { l: cfg.l, n: cfg.n }, width, &mut rng)?;
    let rep = match minimize_css(&func, &init, cfg.tol, cfg.max_iter) {
        Ok(m) => {
            write_field(&out.join("css.bin"), &m.u)?;
            CssReport {
                energy: Some(m.energy),
                iterations: m.iterations,
                residual: m.residual,
                lambda: m.lambda,
                converged: m.converged,
                hardy: Some(hardy_check(&m.u, 0.0)?),
                diverged: None,
            }
        }
        Err(e @ Error::Divergence { .. }) => CssReport {
            energy: None,
            iterations: 0,
            residual: f64::NAN,
            lambda: f64::NAN,
            converged: false,
            hardy: None,
            diverged: Some(e.to_string()),
        },
        Err(e) => return Err(e.into()),
    };
    write_json(&out.join("css-report.json"), &rep)?;
    let mut checks = vec![
        Check::new("no divergence", rep.diverged.is_none(), rep.diverged.clone().unwrap_or_default()),
        Check::new("converged", rep.converged, format!("residual {:.3e} after {} iterations", rep.residual, rep.iterations)),
    ];
    if let Some(h) = rep.hardy {
        checks.push(Check::new("Hardy inequality", h.ok, format!("{:.4e} <= {:.4e}", h.lhs, h.rhs)));
    }
    Ok((rep, checks))
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NllReport {
    pub beta: f64,
    pub degree: usize,
    pub mass: f64,
    pub tail: f64,
    pub energy: f64,
    pub quartic: f64,
    pub identity_rel_err: f64,
    pub residual: f64,
    pub hardy: HardyCheck,
}

fn coefficients(c: &[[f64; 2]]) -> Vec<Complex64> {
    c.iter().map(|z| Complex64::new(z[0], z[1])).collect()
}

pub fn nll(cfg: &NllConfig, out: &Path) -> Result<(NllReport, Vec<Check>)> {
    cfg.check()?;
    let pq = PolynomialPair::new(coefficients(&cfg.p), coefficients(&cfg.q))?;
    let st = match cfg.taper {
        Some(inner) => nll_state_tapered(&pq, cfg.l, cfg.n, inner)?,
        None => nll_state(&pq, cfg.l, cfg.n)?,
    };
    let e: CSSEnergy = css_energy(&st.u, &CSSParams::new(st.beta, 0.0, Potential::Zero))?;
    let rel = (e.magnetic() - 2.0 * PI * st.beta * e.quartic_integral).abs() / e.magnetic();
    let res = el_residual(&st.u.clone().normalized(), &CSSParams::new(st.beta, -2.0 * PI * st.beta, Potential::Zero))?;
    let rep = NllReport {
        beta: st.beta,
        degree: st.degree,
        mass: st.mass,
        tail: st.tail,
        energy: e.magnetic(),
        quartic: e.quartic_integral,
        identity_rel_err: rel,
        residual: res.interior_norm(),
        hardy: hardy_check(&st.u, 0.0)?,
    };
    write_field(&out.join("nll.bin"), &st.u)?;
    write_json(&out.join("nll-report.json"), &rep)?;
    let checks = vec![
        Check::new("NLL identity", rel <= cfg.tol, format!("{rel:.3e}")),
        Check::new("Hardy inequality", rep.hardy.ok, String::new()),
    ];
    Ok((rep, checks))
}

pub fn gammastar(cfg: &GammaStarConfig, seed: Option<u64>, out: &Path) -> Result<(Vec<GammaStarEstimate>, Vec<Check>)> {
    cfg.check()?;
    let mut opts = GammaStarOptions::new(GridSpec { l: cfg.l, n: cfg.n }, cfg.restarts, seed.unwrap_or(cfg.seed));
    if let Some(t) = cfg.tol {
        opts.tol = t;
    }
    if let Some(m) = cfg.max_iter {
        opts.max_iter = m;
    }
    let mut ests = Vec::new();
    for &beta in &cfg.betas {
        ests.push(gamma_star_estimate(beta, &opts).with_context(|| format!("beta = {beta}"))?);
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join("gammastar.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["beta", "estimate", "spread"])?;
    for e in &ests {
        w.write_record([e.beta.to_string(), e.estimate.to_string(), e.spread.to_string()])?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    write_json(&out.join("gammastar.json"), &ests)?;
    let checks = ests
        .iter()
        .map(|e| {
            let bound = 2.0 * PI * e.beta;
            Check::new(format!("gamma*({}) not below 2 pi beta", e.beta), e.estimate >= bound * (1.0 - 1e-3), format!("{:.5}", e.estimate))
        })
        .collect();
    Ok((ests, checks))
}
