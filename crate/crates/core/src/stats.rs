//! Autocorrelation-aware error bars for Markov chain averages.

use serde::{Deserialize, Serialize};

/// Mean with a blocked standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    /// Integrated autocorrelation time in samples.
    pub tau: f64,
    pub block_len: usize,
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { mean: value, stderr: 0.0, tau: 0.5, block_len: 1, samples: 0 }
    }

    pub fn rel_err(&self) -> f64 {
        if self.mean == 0.0 {
            if self.stderr == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            self.stderr / self.mean.abs()
        }
    }

    /// Whether `value` lies within `k` standard errors plus `slack`.
    pub fn agrees(&self, value: f64, k: f64, slack: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr + slack
    }
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Integrated autocorrelation time, summing the normalized ACF over a window
/// that doubles until it exceeds six times the running estimate.
pub fn tau_int(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return 0.5;
    }
    let m = mean(x);
    let c0 = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
    if c0 <= 0.0 || !c0.is_finite() {
        return 0.5;
    }
    let acf = |t: usize| -> f64 {
        let s: f64 = (0..n - t).map(|i| (x[i] - m) * (x[i + t] - m)).sum();
        s / ((n - t) as f64 * c0)
    };
    let max_w = (n / 4).max(1);
    let mut tau = 0.5;
    let mut done = 0usize;
    let mut w = 1usize;
    loop {
        let upto = w.min(max_w);
        for t in done + 1..=upto {
            tau += acf(t);
        }
        done = upto;
        if (w as f64) >= 6.0 * tau || w >= max_w {
            break;
        }
        w *= 2;
    }
    tau.max(0.5)
}

/// Mean and blocked standard error; blocks span `ceil(10 tau)` samples and
/// there are at least 20 of them.
pub fn blocked(x: &[f64]) -> Estimate {
    let n = x.len();
    let m = mean(x);
    if n < 2 {
        return Estimate { mean: m, stderr: f64::INFINITY, tau: 0.5, block_len: 1, samples: n };
    }
    let tau = tau_int(x);
    let block = ((10.0 * tau).ceil() as usize).clamp(1, (n / 20).max(1));
    let nb = n / block;
    let means: Vec<f64> = (0..nb)
        .map(|k| mean(&x[k * block..(k + 1) * block]))
        .collect();
    let bm = mean(&means);
    let var = means.iter().map(|v| (v - bm) * (v - bm)).sum::<f64>() / (nb - 1).max(1) as f64;
    Estimate { mean: m, stderr: (var / nb as f64).sqrt(), tau, block_len: block, samples: n }
}

/// Equal-weight combination of independent chains.
pub fn combine(parts: &[Estimate]) -> Estimate {
    let k = parts.len().max(1) as f64;
    let mean = parts.iter().map(|e| e.mean).sum::<f64>() / k;
    let se = parts.iter().map(|e| e.stderr * e.stderr).sum::<f64>().sqrt() / k;
    let tau = parts.iter().map(|e| e.tau).fold(0.5, f64::max);
    let block_len = parts.iter().map(|e| e.block_len).max().unwrap_or(1);
    let samples = parts.iter().map(|e| e.samples).sum();
    Estimate { mean, stderr: se, tau, block_len, samples }
}
