//! Single-particle random-walk Metropolis on `|F Phi|^2`.

use super::condensate::Condensate;
use crate::error::{Error, Result};
use crate::twobody::{AnyonPairParams, Jastrow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// The pair correlation used by the sampler.
#[derive(Debug, Clone, Copy)]
pub enum PairFactor {
    /// `f = 1`: the pure product state.
    Identity,
    Jastrow(Jastrow),
}

impl PairFactor {
    pub fn jastrow(p: &AnyonPairParams) -> Result<Self> {
        Ok(PairFactor::Jastrow(Jastrow::new(p)?))
    }

    #[inline]
    pub fn f(&self, r: f64) -> f64 {
        match self {
            PairFactor::Identity => 1.0,
            PairFactor::Jastrow(j) => j.f(r),
        }
    }

    /// Cutoff beyond which `f = 1`.
    pub fn range(&self) -> f64 {
        match self {
            PairFactor::Identity => 0.0,
            PairFactor::Jastrow(j) if j.trivial() => 0.0,
            PairFactor::Jastrow(j) => j.params.b,
        }
    }

    #[inline]
    fn log_f2(&self, d: [f64; 2]) -> f64 {
        let r2 = d[0] * d[0] + d[1] * d[1];
        match self {
            PairFactor::Identity => 0.0,
            PairFactor::Jastrow(j) => {
                if r2 >= j.params.b * j.params.b || j.trivial() {
                    0.0
                } else {
                    2.0 * j.f(r2.sqrt()).ln()
                }
            }
        }
    }
}

#[inline]
fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// `log |F Phi|^2 = 2 sum log|u(x_i)| + 2 sum_{i<j} log f(|x_i - x_j|)`;
/// `-inf` on any zero.
pub fn log_weight(x: &[[f64; 2]], u: &Condensate, pair: &PairFactor) -> f64 {
    let mut acc = 0.0;
    for &p in x {
        acc += u.log_density(p);
    }
    if acc == f64::NEG_INFINITY {
        return acc;
    }
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            acc += pair.log_f2(sub(x[i], x[j]));
        }
    }
    acc
}

/// Sampler settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ChainConfig {
    pub seed: u64,
    /// Stream index, so that chains sharing a seed stay independent.
    #[serde(default)]
    pub stream: u64,
    pub burn_in: usize,
    pub sweeps: usize,
    /// Initial proposal width; defaults to a fifth of the support radius.
    #[serde(default)]
    pub step: Option<f64>,
    /// Extra tuning rounds allowed after burn-in before giving up.
    #[serde(default = "default_tune_budget")]
    pub tune_budget: usize,
}

fn default_tune_budget() -> usize {
    50
}

impl ChainConfig {
    pub fn new(seed: u64, burn_in: usize, sweeps: usize) -> Self {
        ChainConfig { seed, stream: 0, burn_in, sweeps, step: None, tune_budget: default_tune_budget() }
    }
}

/// Bookkeeping of a finished chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    pub samples: usize,
    pub acceptance: f64,
    pub burn_in: usize,
    pub block_len: usize,
    pub seed: u64,
    pub stream: u64,
    pub step: f64,
}

pub const ACCEPT_LO: f64 = 0.3;
pub const ACCEPT_HI: f64 = 0.5;

/// Markov chain over `N` positions.
#[derive(Debug, Clone)]
pub struct MetropolisChain<'a> {
    u: &'a Condensate,
    pair: PairFactor,
    x: Vec<[f64; 2]>,
    logu: Vec<f64>,
    rng: ChaCha8Rng,
    pub step: f64,
    accepted: u64,
    proposed: u64,
    cfg: ChainConfig,
}

impl<'a> MetropolisChain<'a> {
    /// Starts from independent draws of `|u|^2`.
    pub fn new(u: &'a Condensate, pair: PairFactor, n: usize, cfg: ChainConfig) -> Result<Self> {
        if n < 2 {
            return Err(Error::Sampler(format!("need N >= 2, got {n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(cfg.stream);
        let mut x = Vec::with_capacity(n);
        for _ in 0..1000 {
            x.clear();
            for _ in 0..n {
                x.push(u.sample(&mut rng));
            }
            if log_weight(&x, u, &pair).is_finite() {
                return Self::from_parts(u, pair, x, rng, cfg);
            }
        }
        Err(Error::Sampler("could not draw a start with nonzero weight".into()))
    }

    /// Starts from a given configuration; errors if its weight vanishes.
    pub fn with_start(
        u: &'a Condensate,
        pair: PairFactor,
        start: Vec<[f64; 2]>,
        cfg: ChainConfig,
    ) -> Result<Self> {
        if start.len() < 2 || start.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::Sampler("start needs N >= 2 finite positions".into()));
        }
        if !log_weight(&start, u, &pair).is_finite() {
            return Err(Error::Sampler("start configuration has zero weight".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(cfg.stream);
        Self::from_parts(u, pair, start, rng, cfg)
    }

    fn from_parts(
        u: &'a Condensate,
        pair: PairFactor,
        x: Vec<[f64; 2]>,
        rng: ChaCha8Rng,
        cfg: ChainConfig,
    ) -> Result<Self> {
        let logu = x.iter().map(|&p| u.log_density(p)).collect();
        let step = cfg.step.unwrap_or(0.2 * u.support_radius());
        Ok(MetropolisChain { u, pair, x, logu, rng, step, accepted: 0, proposed: 0, cfg })
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.x
    }

    pub fn acceptance(&self) -> f64 {
        if self.proposed == 0 { 0.0 } else { self.accepted as f64 / self.proposed as f64 }
    }

    fn reset_counts(&mut self) {
        self.accepted = 0;
        self.proposed = 0;
    }

    /// One proposal per particle, in order.
    pub fn sweep(&mut self) {
        let n = self.x.len();
        for i in 0..n {
            let dx: f64 = self.rng.sample(StandardNormal);
            let dy: f64 = self.rng.sample(StandardNormal);
            let old = self.x[i];
            let new = [old[0] + self.step * dx, old[1] + self.step * dy];
            self.proposed += 1;
            let lu = self.u.log_density(new);
            if lu == f64::NEG_INFINITY {
                // consume the uniform anyway so streams stay aligned
                let _: f64 = self.rng.random();
                continue;
            }
            let mut delta = lu - self.logu[i];
            if self.pair.range() > 0.0 {
                for j in 0..n {
                    if j != i {
                        delta += self.pair.log_f2(sub(new, self.x[j]))
                            - self.pair.log_f2(sub(old, self.x[j]));
                    }
                }
            }
            let r: f64 = self.rng.random();
            if delta >= 0.0 || r.ln() < delta {
                self.x[i] = new;
                self.logu[i] = lu;
                self.accepted += 1;
            }
        }
    }

    /// Burn-in with step tuning; fails if the acceptance cannot be brought
    /// into `[ACCEPT_LO, ACCEPT_HI]`.
    pub fn burn_in(&mut self) -> Result<()> {
        let window = 50usize;
        let rounds = (self.cfg.burn_in / window).max(2);
        let max_step = 2.0 * self.u.support_radius();
        let mut last = 0.0;
        for round in 0..rounds + self.cfg.tune_budget {
            self.reset_counts();
            for _ in 0..window {
                self.sweep();
            }
            last = self.acceptance();
            let ok = (ACCEPT_LO..=ACCEPT_HI).contains(&last);
            if round + 1 >= rounds && ok {
                self.reset_counts();
                return Ok(());
            }
            self.step = (self.step * (2.0 * (last - 0.4)).exp()).min(max_step);
        }
        Err(Error::Sampler(format!(
            "acceptance {last:.3} outside [{ACCEPT_LO}, {ACCEPT_HI}] after tuning"
        )))
    }

    /// Runs `sweeps` sweeps after burn-in, calling `visit` after each.
    pub fn run(&mut self, mut visit: impl FnMut(&[[f64; 2]])) -> Result<ChainStats> {
        self.burn_in()?;
        for _ in 0..self.cfg.sweeps {
            self.sweep();
            visit(&self.x);
        }
        Ok(ChainStats {
            samples: self.cfg.sweeps,
            acceptance: self.acceptance(),
            burn_in: self.cfg.burn_in,
            block_len: 1,
            seed: self.cfg.seed,
            stream: self.cfg.stream,
            step: self.step,
        })
    }
}

/// Convenience wrapper that collects all sampled configurations.
pub fn metropolis_chain(
    u: &Condensate,
    params: &AnyonPairParams,
    n: usize,
    cfg: ChainConfig,
) -> Result<(Vec<Vec<[f64; 2]>>, ChainStats)> {
    let pair = PairFactor::jastrow(params)?;
    let mut chain = MetropolisChain::new(u, pair, n, cfg)?;
    let mut out = Vec::with_capacity(cfg.sweeps);
    let stats = chain.run(|x| out.push(x.to_vec()))?;
    Ok((out, stats))
}
