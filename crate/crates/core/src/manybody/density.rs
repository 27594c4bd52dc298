//! One-body density estimates and their L1 distance to `|u|^2`.
//!
//! Two estimators are accumulated side by side. The histogram bins every
//! particle position. The conditional estimator deposits, for every particle,
//! its exact conditional density `|u|^2 prod_j f^2(. - x_j) / Z` given the
//! other positions; it has no binning noise from the particle itself and is
//! exact when `f = 1`.

use super::condensate::Condensate;
use super::sampler::PairFactor;
use crate::quad::{polar_rule, Rule};
use serde::{Deserialize, Serialize};

/// Square grid `[-half_width, half_width]^2` split into `cells^2` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DensityGrid {
    pub half_width: f64,
    pub cells: usize,
}

impl DensityGrid {
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    #[inline]
    fn cell(&self, p: [f64; 2]) -> Option<usize> {
        let h = self.h();
        let ix = ((p[0] + self.half_width) / h).floor();
        let iy = ((p[1] + self.half_width) / h).floor();
        let n = self.cells as f64;
        if ix < 0.0 || iy < 0.0 || ix >= n || iy >= n {
            return None;
        }
        Some(iy as usize * self.cells + ix as usize)
    }
}

/// Streaming accumulator fed with sampled configurations.
#[derive(Debug, Clone)]
pub struct DensityAccumulator<'a> {
    u: &'a Condensate,
    pair: PairFactor,
    pub grid: DensityGrid,
    exact: Vec<f64>,
    disk: Vec<([f64; 2], f64)>,
    batches: usize,
    batch_len: usize,
    // per batch: histogram counts, base weight sum, correction deposits
    hist: Vec<Vec<f64>>,
    base: Vec<f64>,
    corr: Vec<Vec<f64>>,
    particles: Vec<usize>,
    seen: usize,
}

/// Result of [`estimate_density`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub grid: DensityGrid,
    pub samples: usize,
    pub histogram: Vec<f64>,
    pub conditional: Vec<f64>,
    pub exact: Vec<f64>,
    pub l1_histogram: f64,
    pub l1_histogram_stderr: f64,
    pub l1_conditional: f64,
    pub l1_conditional_stderr: f64,
    /// `|L1(h) - L1(2h)|` for the conditional estimator.
    pub binning_error: f64,
    pub warnings: Vec<String>,
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn coarsen(v: &[f64], cells: usize) -> Vec<f64> {
    let m = cells / 2;
    let mut out = vec![0.0; m * m];
    for iy in 0..cells {
        for ix in 0..cells {
            out[(iy / 2) * m + ix / 2] += v[iy * cells + ix];
        }
    }
    out
}

/// L1 distance and a linearized standard error from batch estimates.
fn l1_with_error(batches: &[Vec<f64>], full: &[f64], exact: &[f64]) -> (f64, f64) {
    let d = l1(full, exact);
    let nb = batches.len();
    if nb < 2 {
        return (d, f64::INFINITY);
    }
    let sign: Vec<f64> = full.iter().zip(exact).map(|(a, b)| (a - b).signum()).collect();
    let z: Vec<f64> = batches
        .iter()
        .map(|bv| bv.iter().zip(exact).zip(&sign).map(|((a, b), s)| s * (a - b)).sum())
        .collect();
    let m = z.iter().sum::<f64>() / nb as f64;
    let var = z.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (nb - 1) as f64;
    (d, (var / nb as f64).sqrt())
}

impl<'a> DensityAccumulator<'a> {
    /// `expected_samples` fixes the batch layout used for error bars.
    pub fn new(u: &'a Condensate, pair: PairFactor, grid: DensityGrid, expected_samples: usize) -> Self {
        let h = grid.h();
        let rule = Rule::legendre(6);
        let mut exact = vec![0.0; grid.cells * grid.cells];
        for iy in 0..grid.cells {
            for ix in 0..grid.cells {
                let x0 = -grid.half_width + ix as f64 * h;
                let y0 = -grid.half_width + iy as f64 * h;
                exact[iy * grid.cells + ix] = u.cell_mass(x0, y0, h, &rule);
            }
        }
        let b = pair.range();
        let disk = if b > 0.0 {
            let r = match pair {
                PairFactor::Jastrow(j) => j.params.r,
                PairFactor::Identity => 0.0,
            };
            polar_rule(&Rule::legendre(8), &[0.0, r, b], 24)
        } else {
            Vec::new()
        };
        let batches = 32;
        let batch_len = expected_samples.div_ceil(batches).max(1);
        let cells = grid.cells * grid.cells;
        DensityAccumulator {
            u,
            pair,
            grid,
            exact,
            disk,
            batches,
            batch_len,
            hist: vec![vec![0.0; cells]; batches],
            base: vec![0.0; batches],
            corr: vec![vec![0.0; cells]; batches],
            particles: vec![0; batches],
            seen: 0,
        }
    }

    /// `prod_{k != skip} f^2(p - x_k)` over the neighbors of a disk.
    fn f2_except(&self, p: [f64; 2], x: &[[f64; 2]], nbrs: &[usize], skip: usize) -> f64 {
        let mut acc = 1.0;
        for &k in nbrs {
            if k != skip {
                let d = [p[0] - x[k][0], p[1] - x[k][1]];
                acc *= self.pair.f((d[0] * d[0] + d[1] * d[1]).sqrt()).powi(2);
            }
        }
        acc
    }

    pub fn push(&mut self, x: &[[f64; 2]]) {
        let bi = (self.seen / self.batch_len).min(self.batches - 1);
        self.seen += 1;
        let n = x.len();
        self.particles[bi] += n;
        for &p in x {
            if let Some(c) = self.grid.cell(p) {
                self.hist[bi][c] += 1.0;
            }
        }
        let b = self.pair.range();
        if b == 0.0 {
            // f = 1: every conditional density is |u|^2 with Z = 1.
            self.base[bi] += n as f64;
            return;
        }
        // Disks within 2b of each other interact.
        let nbrs: Vec<Vec<usize>> = (0..n)
            .map(|j| {
                (0..n)
                    .filter(|&k| {
                        let d = [x[j][0] - x[k][0], x[j][1] - x[k][1]];
                        d[0] * d[0] + d[1] * d[1] < 4.0 * b * b
                    })
                    .collect()
            })
            .collect();
        let b2 = b * b;
        // For disk j: points, density, cover weight.
        struct DiskPts {
            cell: Vec<Option<usize>>,
            dens: Vec<f64>,
            cover: Vec<usize>,
            base: Vec<f64>,
        }
        let mut disks = Vec::with_capacity(n);
        for j in 0..n {
            let mut cell = Vec::with_capacity(self.disk.len());
            let mut dens = Vec::with_capacity(self.disk.len());
            let mut covers = Vec::with_capacity(self.disk.len());
            let mut base = Vec::with_capacity(self.disk.len());
            for &(y, w) in &self.disk {
                let p = [x[j][0] + y[0], x[j][1] + y[1]];
                let cover = nbrs[j]
                    .iter()
                    .filter(|&&k| {
                        let d = [p[0] - x[k][0], p[1] - x[k][1]];
                        d[0] * d[0] + d[1] * d[1] < b2
                    })
                    .count()
                    .max(1);
                let d = w * self.u.density(p);
                cell.push(self.grid.cell(p));
                dens.push(d);
                covers.push(cover);
                base.push(d / cover as f64);
            }
            disks.push(DiskPts { cell, dens, cover: covers, base });
        }
        // Correction integrals: generic particle i (not a neighbour of j) sees
        // prod over all neighbours of j; neighbours drop their own factor.
        let mut generic = vec![0.0; n];
        let mut generic_vals: Vec<Vec<f64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut vals = Vec::with_capacity(self.disk.len());
            let mut s = 0.0;
            for (q, &(y, _)) in self.disk.iter().enumerate() {
                let p = [x[j][0] + y[0], x[j][1] + y[1]];
                let v = (self.f2_except(p, x, &nbrs[j], usize::MAX) - 1.0) * disks[j].base[q];
                vals.push(v);
                s += v;
            }
            generic[j] = s;
            generic_vals.push(vals);
        }
        let is_nbr = |i: usize, j: usize| nbrs[j].contains(&i);
        let mut special: Vec<Vec<(usize, f64, Vec<f64>)>> = vec![Vec::new(); n];
        for j in 0..n {
            for &i in &nbrs[j] {
                let mut vals = Vec::with_capacity(self.disk.len());
                let mut s = 0.0;
                for (q, &(y, _)) in self.disk.iter().enumerate() {
                    let p = [x[j][0] + y[0], x[j][1] + y[1]];
                    let v = if i == j {
                        0.0
                    } else {
                        // particle i does not own a disk: drop it from the cover count
                        let d = [p[0] - x[i][0], p[1] - x[i][1]];
                        let own = (d[0] * d[0] + d[1] * d[1] < b2) as usize;
                        let cover = (disks[j].cover[q] - own).max(1);
                        (self.f2_except(p, x, &nbrs[j], i) - 1.0) * disks[j].dens[q] / cover as f64
                    };
                    vals.push(v);
                    s += v;
                }
                special[j].push((i, s, vals));
            }
        }
        let total_generic: f64 = generic.iter().sum();
        let mut inv_z = vec![0.0; n];
        for i in 0..n {
            let mut z = 1.0 + total_generic;
            for j in 0..n {
                if is_nbr(i, j) {
                    z -= generic[j];
                    if let Some((_, s, _)) = special[j].iter().find(|e| e.0 == i) {
                        z += s;
                    }
                }
            }
            inv_z[i] = 1.0 / z;
        }
        self.base[bi] += inv_z.iter().sum::<f64>();
        let corr = &mut self.corr[bi];
        for j in 0..n {
            let w_generic: f64 = (0..n).filter(|&i| !is_nbr(i, j)).map(|i| inv_z[i]).sum();
            if w_generic != 0.0 {
                for (q, c) in disks[j].cell.iter().enumerate() {
                    if let Some(c) = c {
                        corr[*c] += w_generic * generic_vals[j][q];
                    }
                }
            }
            for (i, _, vals) in &special[j] {
                if *i == j {
                    continue;
                }
                for (q, c) in disks[j].cell.iter().enumerate() {
                    if let Some(c) = c {
                        corr[*c] += inv_z[*i] * vals[q];
                    }
                }
            }
        }
    }

    pub fn finish(self, predicted_bound: Option<f64>) -> DensityEstimate {
        let cells = self.grid.cells * self.grid.cells;
        let used: Vec<usize> = (0..self.batches).filter(|&b| self.particles[b] > 0).collect();
        let total_particles: usize = self.particles.iter().sum();
        let norm = |v: &[f64], np: usize| -> Vec<f64> { v.iter().map(|c| c / np as f64).collect() };
        let sum_rows = |rows: &Vec<Vec<f64>>| -> Vec<f64> {
            let mut out = vec![0.0; cells];
            for r in rows {
                for (o, v) in out.iter_mut().zip(r) {
                    *o += v;
                }
            }
            out
        };
        let cond_batch = |b: usize| -> Vec<f64> {
            let np = self.particles[b] as f64;
            (0..cells)
                .map(|c| (self.exact[c] * self.base[b] + self.corr[b][c]) / np)
                .collect()
        };
        let histogram = norm(&sum_rows(&self.hist), total_particles.max(1));
        let base_total: f64 = self.base.iter().sum();
        let corr_total = sum_rows(&self.corr);
        let conditional: Vec<f64> = (0..cells)
            .map(|c| (self.exact[c] * base_total + corr_total[c]) / total_particles.max(1) as f64)
            .collect();
        let hist_batches: Vec<Vec<f64>> =
            used.iter().map(|&b| norm(&self.hist[b], self.particles[b])).collect();
        let cond_batches: Vec<Vec<f64>> = used.iter().map(|&b| cond_batch(b)).collect();
        let (l1_histogram, l1_histogram_stderr) = l1_with_error(&hist_batches, &histogram, &self.exact);
        let (l1_conditional, l1_conditional_stderr) =
            l1_with_error(&cond_batches, &conditional, &self.exact);
        let mut binning_error = 0.0;
        if self.grid.cells % 2 == 0 {
            let l2 = l1(&coarsen(&conditional, self.grid.cells), &coarsen(&self.exact, self.grid.cells));
            binning_error = (l1_conditional - l2).abs();
        }
        let mut warnings = Vec::new();
        let outside = 1.0 - self.exact.iter().sum::<f64>();
        if outside > 1e-8 {
            warnings.push(format!("grid misses mass {outside:.3e} of |u|^2"));
        }
        if let Some(bound) = predicted_bound {
            if binning_error > bound {
                warnings.push(format!(
                    "binning error {binning_error:.3e} exceeds predicted bound {bound:.3e}"
                ));
            }
        }
        DensityEstimate {
            grid: self.grid,
            samples: self.seen,
            histogram,
            conditional,
            exact: self.exact,
            l1_histogram,
            l1_histogram_stderr,
            l1_conditional,
            l1_conditional_stderr,
            binning_error,
            warnings,
        }
    }
}

/// Density estimate from a finished sample stream.
pub fn estimate_density<'a, I>(
    samples: I,
    u: &Condensate,
    pair: PairFactor,
    grid: DensityGrid,
    predicted_bound: Option<f64>,
) -> DensityEstimate
where
    I: IntoIterator<Item = &'a Vec<[f64; 2]>>,
    I::IntoIter: ExactSizeIterator,
{
    let it = samples.into_iter();
    let mut acc = DensityAccumulator::new(u, pair, grid, it.len());
    for x in it {
        acc.push(x);
    }
    acc.finish(predicted_bound)
}
