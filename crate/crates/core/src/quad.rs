//! Gauss-Legendre rules mapped onto intervals.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

/// Nodes and weights on `[-1, 1]`, ascending.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn legendre(n: usize) -> Self {
        let n = NonZeroUsize::new(n.max(1)).unwrap();
        let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Rule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (m + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over the panels delimited by `breaks`.
    pub fn composite(&self, breaks: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.nodes.len() * breaks.len());
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                out.extend(self.on(w[0], w[1]));
            }
        }
        out
    }
}

/// Polar product rule on the annulus `r0 <= |y| <= r1`; weights include `r`.
pub fn polar_rule(radial: &Rule, breaks: &[f64], n_theta: usize) -> Vec<([f64; 2], f64)> {
    let rs = radial.composite(breaks);
    let dth = std::f64::consts::TAU / n_theta as f64;
    let mut out = Vec::with_capacity(rs.len() * n_theta);
    for k in 0..n_theta {
        let th = (k as f64 + 0.5) * dth;
        let (s, c) = th.sin_cos();
        for &(r, w) in &rs {
            out.push(([r * c, r * s], w * r * dth));
        }
    }
    out
}
