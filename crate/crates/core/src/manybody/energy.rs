//! Per-configuration energy weights and their Monte Carlo averages.

use super::condensate::Condensate;
use super::sampler::{ChainConfig, ChainStats, MetropolisChain, PairFactor};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quad::{polar_rule, Rule};
use crate::stats::{self, Estimate};
use crate::twobody::{AnyonPairParams, Jastrow};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The six energy pieces of one configuration, per particle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    pub k: f64,
    pub v: f64,
    pub w: f64,
    pub sdiag: f64,
    pub s3body: f64,
    pub j: f64,
}

impl Terms {
    pub fn total(&self) -> f64 {
        self.k + self.v + self.w + self.sdiag + self.s3body + self.j
    }

    pub fn as_array(&self) -> [f64; 7] {
        [self.k, self.v, self.w, self.sdiag, self.s3body, self.j, self.total()]
    }
}

pub const TERM_NAMES: [&str; 7] = ["K", "V", "W", "Sdiag", "S3body", "J", "total"];

/// `x^perp / max(R, |x|)^2` with `(x, y)^perp = (-y, x)`.
#[inline]
pub fn smeared_perp(d: [f64; 2], r: f64) -> [f64; 2] {
    let r2 = (d[0] * d[0] + d[1] * d[1]).max(r * r);
    [-d[1] / r2, d[0] / r2]
}

/// The Jastrow drift `x/|x|^2 * ratio` on the annulus.
#[inline]
pub fn k_vector(d: [f64; 2], jas: &Jastrow) -> [f64; 2] {
    let r2 = d[0] * d[0] + d[1] * d[1];
    let p = &jas.params;
    if r2 >= p.b * p.b || r2 < p.r * p.r || jas.trivial() {
        return [0.0, 0.0];
    }
    let c = jas.k_ratio(r2.sqrt()) / r2;
    [c * d[0], c * d[1]]
}

/// Replaces the near-field part of the pair sums in `Sdiag` and `W` by its
/// conditional average over the partner position.
#[derive(Debug, Clone)]
pub struct RaoBlackwell {
    /// Offsets `y` with `|y| < b` and weights including the Jacobian.
    rule: Vec<([f64; 2], f64)>,
    /// Pair weight `s(y) f(y)^2` for `Sdiag` and the indicator for `W`.
    sdiag_w: Vec<f64>,
    w_w: Vec<f64>,
    one_minus_f2: Vec<f64>,
}

impl RaoBlackwell {
    pub fn new(jas: &Jastrow, n_radial: usize, n_theta: usize) -> Self {
        let p = &jas.params;
        let radial = Rule::legendre(n_radial);
        let rule = polar_rule(&radial, &[0.0, p.r, p.b], n_theta);
        let mut sdiag_w = Vec::with_capacity(rule.len());
        let mut w_w = Vec::with_capacity(rule.len());
        let mut one_minus_f2 = Vec::with_capacity(rule.len());
        for &(y, _) in &rule {
            let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
            let f2 = jas.f(r).powi(2);
            let a = smeared_perp(y, p.r);
            let kv = k_vector(y, jas);
            sdiag_w.push((a[0] * a[0] + a[1] * a[1] + kv[0] * kv[0] + kv[1] * kv[1]) * f2);
            w_w.push(if r < p.r { f2 } else { 0.0 });
            one_minus_f2.push(1.0 - f2);
        }
        RaoBlackwell { rule, sdiag_w, w_w, one_minus_f2 }
    }

    /// `(int s f^2 |u(x-y)|^2, int 1_{<R} f^2 |u(x-y)|^2) / Z(x)` with
    /// `Z(x) = 1 - int (1-f^2) |u(x-y)|^2`.
    fn averages(&self, x: [f64; 2], u: &Condensate) -> (f64, f64) {
        let mut s = 0.0;
        let mut w = 0.0;
        let mut z = 1.0;
        for (i, &(y, wt)) in self.rule.iter().enumerate() {
            let d = u.density([x[0] - y[0], x[1] - y[1]]) * wt;
            s += self.sdiag_w[i] * d;
            w += self.w_w[i] * d;
            z -= self.one_minus_f2[i] * d;
        }
        (s / z, w / z)
    }
}

/// Energy weights of one configuration.
pub fn sample_terms(
    x: &[[f64; 2]],
    u: &Condensate,
    jas: &Jastrow,
    v: &Potential,
    rb: Option<&RaoBlackwell>,
) -> Terms {
    let n = x.len();
    let nf = n as f64;
    let p = &jas.params;
    let (alpha, r, b, g) = (p.alpha, p.r, p.b, p.g);
    let mut sa = vec![[0.0f64; 2]; n];
    let mut sk = vec![[0.0f64; 2]; n];
    let mut sa2 = vec![0.0f64; n];
    let mut sk2 = vec![0.0f64; n];
    let mut near = 0usize;
    // far-field (|y| >= b) part of sa2 when Rao-Blackwellizing
    let mut far_a2 = vec![0.0f64; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = [x[i][0] - x[j][0], x[i][1] - x[j][1]];
            let a = smeared_perp(d, r);
            let kv = k_vector(d, jas);
            let a2 = a[0] * a[0] + a[1] * a[1];
            let k2 = kv[0] * kv[0] + kv[1] * kv[1];
            for c in 0..2 {
                sa[i][c] += a[c];
                sa[j][c] -= a[c];
                sk[i][c] += kv[c];
                sk[j][c] -= kv[c];
            }
            sa2[i] += a2;
            sa2[j] += a2;
            sk2[i] += k2;
            sk2[j] += k2;
            let d2 = d[0] * d[0] + d[1] * d[1];
            if d2 < r * r {
                near += 1;
            }
            if d2 >= b * b {
                far_a2[i] += a2;
                far_a2[j] += a2;
            }
        }
    }
    let mut t = Terms::default();
    for i in 0..n {
        if let Some((pp, qq)) = u.grad_log(x[i]) {
            t.k += pp[0] * pp[0] + pp[1] * pp[1] + qq[0] * qq[0] + qq[1] * qq[1];
            t.j += pp[0] * sk[i][0] + pp[1] * sk[i][1] + qq[0] * sa[i][0] + qq[1] * sa[i][1];
        }
        t.v += v.eval(x[i][0], x[i][1]);
        let sq = |w: [f64; 2]| w[0] * w[0] + w[1] * w[1];
        t.s3body += sq(sa[i]) - sa2[i] + sq(sk[i]) - sk2[i];
    }
    t.k /= nf;
    t.v /= nf;
    t.j *= 2.0 * alpha / nf;
    t.s3body *= alpha * alpha / nf;
    let a2n = alpha * alpha / nf;
    match rb {
        None => {
            t.sdiag = a2n * (sa2.iter().sum::<f64>() + sk2.iter().sum::<f64>());
            t.w = if r > 0.0 { g * alpha / (nf * r * r) * 2.0 * near as f64 } else { 0.0 };
        }
        Some(rb) => {
            let mut sd = far_a2.iter().sum::<f64>();
            let mut w = 0.0;
            for &xi in x {
                let (s, wi) = rb.averages(xi, u);
                sd += (nf - 1.0) * s;
                w += (nf - 1.0) * wi;
            }
            t.sdiag = a2n * sd;
            t.w = if r > 0.0 { g * alpha / (nf * r * r) * w } else { 0.0 };
        }
    }
    t
}

/// Monte Carlo settings for [`estimate_energy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct VmcConfig {
    pub chain: ChainConfig,
    pub chains: usize,
    #[serde(default)]
    pub rao_blackwell: bool,
    /// Flag components whose relative error exceeds this.
    #[serde(default)]
    pub rel_err_ceiling: Option<f64>,
}

/// Estimated energy pieces with blocked errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub k: Estimate,
    pub v: Estimate,
    pub w: Estimate,
    pub sdiag: Estimate,
    pub s3body: Estimate,
    pub j: Estimate,
    pub total: Estimate,
    pub chains: Vec<ChainStats>,
    /// Components over the relative-error ceiling.
    pub flagged: Vec<String>,
}

impl EnergyBreakdown {
    pub fn components(&self) -> [(&'static str, Estimate); 7] {
        [
            ("K", self.k),
            ("V", self.v),
            ("W", self.w),
            ("Sdiag", self.sdiag),
            ("S3body", self.s3body),
            ("J", self.j),
            ("total", self.total),
        ]
    }
}

fn chain_series(
    u: &Condensate,
    jas: &Jastrow,
    n: usize,
    v: &Potential,
    cfg: ChainConfig,
    rb: Option<&RaoBlackwell>,
) -> Result<([Vec<f64>; 7], ChainStats)> {
    let mut chain = MetropolisChain::new(u, PairFactor::Jastrow(*jas), n, cfg)?;
    let mut series: [Vec<f64>; 7] = Default::default();
    for s in series.iter_mut() {
        s.reserve(cfg.sweeps);
    }
    let stats = chain.run(|x| {
        let t = sample_terms(x, u, jas, v, rb).as_array();
        for (s, val) in series.iter_mut().zip(t) {
            s.push(val);
        }
    })?;
    Ok((series, stats))
}

/// Runs `cfg.chains` independent chains (streams `0..chains` of one seed)
/// and averages each energy weight.
pub fn estimate_energy(
    u: &Condensate,
    params: &AnyonPairParams,
    n: usize,
    v: &Potential,
    cfg: &VmcConfig,
) -> Result<EnergyBreakdown> {
    let jas = Jastrow::new(params)?;
    if cfg.chains == 0 {
        return Err(Error::Sampler("need at least one chain".into()));
    }
    let rb = if cfg.rao_blackwell && !jas.trivial() && params.r > 0.0 {
        Some(RaoBlackwell::new(&jas, 12, 48))
    } else {
        None
    };
    let runs: Vec<Result<([Vec<f64>; 7], ChainStats)>> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| {
            let mut cc = cfg.chain;
            cc.stream = cfg.chain.stream + c as u64;
            chain_series(u, &jas, n, v, cc, rb.as_ref())
        })
        .collect();
    let mut per_term: [Vec<Estimate>; 7] = Default::default();
    let mut chains = Vec::new();
    for run in runs {
        let (series, mut st) = run?;
        let mut block = 1;
        for (k, s) in series.iter().enumerate() {
            let e = stats::blocked(s);
            block = block.max(e.block_len);
            per_term[k].push(e);
        }
        st.block_len = block;
        chains.push(st);
    }
    let c: Vec<Estimate> = per_term.iter().map(|v| stats::combine(v)).collect();
    let mut out = EnergyBreakdown {
        k: c[0],
        v: c[1],
        w: c[2],
        sdiag: c[3],
        s3body: c[4],
        j: c[5],
        total: c[6],
        chains,
        flagged: Vec::new(),
    };
    if let Some(ceiling) = cfg.rel_err_ceiling {
        out.flagged = out
            .components()
            .iter()
            .filter(|(_, e)| e.stderr > 0.0 && e.rel_err() > ceiling)
            .map(|(name, _)| name.to_string())
            .collect();
    }
    Ok(out)
}
