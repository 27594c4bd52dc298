//! Variational Monte Carlo for the Jastrow trial state `F Phi`.

pub mod condensate;
pub mod density;
pub mod energy;
pub mod sampler;

pub use condensate::{Condensate, CondensateKind, CondensateNorms, CondensateSpec};
pub use density::{estimate_density, DensityAccumulator, DensityEstimate, DensityGrid};
pub use energy::{estimate_energy, sample_terms, EnergyBreakdown, Terms, VmcConfig};
pub use sampler::{log_weight, metropolis_chain, ChainConfig, ChainStats, MetropolisChain, PairFactor};

use crate::error::Result;
use crate::stats::Estimate;
use crate::twobody::{AnyonPairParams, Jastrow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Planar configuration of `N` particles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleConfig {
    pub positions: Vec<[f64; 2]>,
}

/// `||F Phi||^2 / ||Phi||^2` together with the scale `N b^2 beta (1+g^2) ||u||_4^4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRatio {
    pub ratio: Estimate,
    pub scale: f64,
}

/// `E[F^2]` under independent draws from `|u|^2`.
pub fn estimate_norm_ratio(
    u: &Condensate,
    params: &AnyonPairParams,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<NormRatio> {
    let jas = Jastrow::new(params)?;
    let beta = params.alpha * (n as f64 - 1.0);
    let scale = n as f64 * params.b * params.b * beta * (1.0 + params.g * params.g) * u.norms().l4_4;
    if jas.trivial() {
        return Ok(NormRatio { ratio: Estimate::exact(1.0), scale });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![[0.0; 2]; n];
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        for p in x.iter_mut() {
            *p = u.sample(&mut rng);
        }
        let f2 = product_f2(&x, &jas);
        s += f2;
        s2 += f2 * f2;
    }
    let m = s / samples as f64;
    let var = (s2 / samples as f64 - m * m).max(0.0);
    let ratio = Estimate {
        mean: m,
        stderr: (var / samples as f64).sqrt(),
        tau: 0.5,
        block_len: 1,
        samples,
    };
    Ok(NormRatio { ratio, scale })
}

/// `F^2 = prod_{i<j} f^2(|x_i - x_j|)`.
pub fn product_f2(x: &[[f64; 2]], jas: &Jastrow) -> f64 {
    let mut acc = 1.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = [x[i][0] - x[j][0], x[i][1] - x[j][1]];
            acc *= jas.f((d[0] * d[0] + d[1] * d[1]).sqrt()).powi(2);
        }
    }
    acc
}

/// `F^2 >= 1 - sum_{i<j} (1 - f_ij^2)`.
pub fn product_inequality_holds(x: &[[f64; 2]], jas: &Jastrow) -> bool {
    let mut deficit = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = [x[i][0] - x[j][0], x[i][1] - x[j][1]];
            deficit += 1.0 - jas.f((d[0] * d[0] + d[1] * d[1]).sqrt()).powi(2);
        }
    }
    product_f2(x, jas) >= 1.0 - deficit - 1e-12
}

/// Cyclic sum of `(x-y)_R^-perp . (x-z)_R^-perp` over the three vertices.
pub fn three_body_kernel(x: [f64; 2], y: [f64; 2], z: [f64; 2], r: f64) -> f64 {
    let term = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        let u = energy::smeared_perp([a[0] - b[0], a[1] - b[1]], r);
        let v = energy::smeared_perp([a[0] - c[0], a[1] - c[1]], r);
        u[0] * v[0] + u[1] * v[1]
    };
    term(x, y, z) + term(y, z, x) + term(z, x, y)
}
