mod common;

use anyonlab_core::manybody::*;
use anyonlab_core::twobody::{AnyonPairParams, Jastrow};
use anyonlab_core::Potential;
use common::PairSetup;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(r1: f64) -> Condensate {
    Condensate::new(CondensateSpec::gaussian(r1)).unwrap()
}

fn log_phi(x: &[[f64; 2]], u: &Condensate) -> f64 {
    x.iter().map(|&p| u.log_density(p)).sum()
}

#[test]
fn condensate_is_normalized() {
    let u = gaussian(1.5);
    assert!((u.norms().mass - 1.0).abs() < 1e-12);
    // sigma = R1/3 so the Gaussian tail beyond R1 matters; check against a polar sum
    let mut m = 0.0;
    let n = 4000;
    for i in 0..n {
        let r = 1.5 * (i as f64 + 0.5) / n as f64;
        m += u.density([r, 0.0]) * std::f64::consts::TAU * r * 1.5 / n as f64;
    }
    assert!((m - 1.0).abs() < 1e-6);
}

#[test]
fn log_weight_far_pairs_and_trivial_statistics() {
    let u = gaussian(1.0);
    let p = AnyonPairParams::new(0.1, 0.01, 0.05, 1.0).unwrap();
    let pair = PairFactor::jastrow(&p).unwrap();
    let x = vec![[0.0, 0.0], [0.3, 0.0], [0.0, -0.4]];
    assert!((log_weight(&x, &u, &pair) - log_phi(&x, &u)).abs() < 1e-14);
    let p0 = AnyonPairParams::new(0.0, 0.01, 0.05, 1.0).unwrap();
    let pair0 = PairFactor::jastrow(&p0).unwrap();
    let close = vec![[0.0, 0.0], [0.001, 0.0]];
    assert_eq!(log_weight(&close, &u, &pair0), log_phi(&close, &u));
}

#[test]
fn log_weight_at_the_disk_edge() {
    let u = gaussian(1.0);
    let (alpha, r, b) = (0.2f64, 0.01f64, 0.1f64);
    let p = AnyonPairParams::new(alpha, r, b, 0.0).unwrap();
    let pair = PairFactor::jastrow(&p).unwrap();
    let x = vec![[0.1, 0.1], [0.1 + r, 0.1]];
    let q = (r / b).powf(2.0 * alpha);
    let want = log_phi(&x, &u) + 2.0 * (2.0 * q.sqrt() / (1.0 + q)).ln();
    assert!((log_weight(&x, &u, &pair) - want).abs() < 1e-12);
}

#[test]
fn log_weight_vanishes_outside_the_support() {
    let u = gaussian(1.0);
    let pair = PairFactor::Identity;
    assert_eq!(log_weight(&[[0.0, 0.0], [2.0, 0.0]], &u, &pair), f64::NEG_INFINITY);
    let cfg = ChainConfig::new(1, 100, 10);
    assert!(MetropolisChain::with_start(&u, pair, vec![[0.0, 0.0], [2.0, 0.0]], cfg).is_err());
}

#[test]
fn sampler_marginal_matches_the_condensate() {
    // alpha = 0: particles are independent draws of |u|^2
    let u = gaussian(1.0);
    let p = AnyonPairParams::new(0.0, 0.01, 0.1, 0.0).unwrap();
    let (samples, stats) = metropolis_chain(&u, &p, 2, ChainConfig::new(5, 2000, 200_000)).unwrap();
    assert!(stats.acceptance > 0.25 && stats.acceptance < 0.55);
    let bins = 8;
    let h = 2.0 / bins as f64;
    let mut counts = vec![0.0; bins * bins];
    let mut total = 0.0;
    // thin to make the draws nearly independent
    for x in samples.iter().step_by(25) {
        let p = x[0];
        let ix = ((p[0] + 1.0) / h).floor() as usize;
        let iy = ((p[1] + 1.0) / h).floor() as usize;
        counts[iy.min(bins - 1) * bins + ix.min(bins - 1)] += 1.0;
        total += 1.0;
    }
    let rule = anyonlab_core::quad::Rule::legendre(8);
    let mut chi2 = 0.0;
    let mut df = 0;
    for iy in 0..bins {
        for ix in 0..bins {
            let e = total * u.cell_mass(-1.0 + ix as f64 * h, -1.0 + iy as f64 * h, h, &rule);
            if e >= 5.0 {
                let o = counts[iy * bins + ix];
                chi2 += (o - e) * (o - e) / e;
                df += 1;
            }
        }
    }
    let df = (df - 1) as f64;
    // p = 0.01 quantile by Wilson-Hilferty
    let z = 2.326;
    let crit = df * (1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt()).powi(3);
    assert!(chi2 < crit, "chi2 {chi2} df {df} crit {crit}");
}

#[test]
fn chains_are_reproducible() {
    let u = gaussian(1.0);
    let p = AnyonPairParams::new(0.05, 0.02, 0.15, 1.0).unwrap();
    let cfg = VmcConfig {
        chain: ChainConfig::new(42, 500, 3000),
        chains: 3,
        rao_blackwell: true,
        rel_err_ceiling: None,
    };
    let v = Potential::Harmonic { coef: 1.0 };
    let a = estimate_energy(&u, &p, 5, &v, &cfg).unwrap();
    let b = estimate_energy(&u, &p, 5, &v, &cfg).unwrap();
    assert_eq!(a, b);
    let mut other = cfg;
    other.chain.seed = 43;
    assert_ne!(estimate_energy(&u, &p, 5, &v, &other).unwrap().total, a.total);
}

#[test]
fn kinetic_only_without_statistics() {
    let u = gaussian(1.0);
    let p = AnyonPairParams::new(0.0, 0.01, 0.1, 3.0).unwrap();
    let cfg = VmcConfig {
        chain: ChainConfig::new(7, 1000, 40_000),
        chains: 2,
        rao_blackwell: false,
        rel_err_ceiling: None,
    };
    let e = estimate_energy(&u, &p, 4, &Potential::Zero, &cfg).unwrap();
    let want = u.norms().dirichlet;
    assert!(e.total.agrees(want, 3.0, 0.0), "{:?} vs {want}", e.total);
    for t in [e.v, e.w, e.sdiag, e.s3body, e.j] {
        assert_eq!(t.mean, 0.0);
    }
}

fn pair_case() -> (PairSetup, AnyonPairParams) {
    let s = PairSetup { alpha: 0.2, r: 0.1, b: 0.35, g: 1.0, r1: 1.0, trap: 1.0 };
    (s, AnyonPairParams::new(s.alpha, s.r, s.b, s.g).unwrap())
}

#[test]
fn two_particles_match_quadrature() {
    let (setup, p) = pair_case();
    let oracle = setup.oracle(24, 48);
    let u = gaussian(setup.r1);
    let cfg = VmcConfig {
        chain: ChainConfig::new(11, 2000, 100_000),
        chains: 4,
        rao_blackwell: false,
        rel_err_ceiling: None,
    };
    let e = estimate_energy(&u, &p, 2, &Potential::Harmonic { coef: 1.0 }, &cfg).unwrap();
    for ((name, est), want) in e.components().iter().zip(oracle.terms) {
        assert!(est.agrees(want, 3.0, 1e-12), "{name}: {est:?} vs {want}");
    }
    assert_eq!(e.s3body.mean, 0.0);
    // the conditional average is exact for a single partner
    let rb = estimate_energy(&u, &p, 2, &Potential::Harmonic { coef: 1.0 }, &VmcConfig { rao_blackwell: true, ..cfg }).unwrap();
    assert!(rb.sdiag.agrees(oracle.terms[3], 3.0, 0.0), "{:?} vs {}", rb.sdiag, oracle.terms[3]);
    assert!(rb.w.agrees(oracle.terms[2], 3.0, 0.0), "{:?} vs {}", rb.w, oracle.terms[2]);
}

#[test]
fn rao_blackwell_agrees_with_plain_estimator() {
    let u = gaussian(1.0);
    // with several partners the average is approximate, with a bias of order N b^2
    let p = AnyonPairParams::new(0.05, 0.02, 0.1, 2.0).unwrap();
    let v = Potential::Harmonic { coef: 1.0 };
    let mk = |rb| VmcConfig { chain: ChainConfig::new(3, 1000, 40_000), chains: 2, rao_blackwell: rb, rel_err_ceiling: None };
    let plain = estimate_energy(&u, &p, 6, &v, &mk(false)).unwrap();
    let rb = estimate_energy(&u, &p, 6, &v, &mk(true)).unwrap();
    for (a, b) in [(plain.sdiag, rb.sdiag), (plain.w, rb.w)] {
        let joint = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        assert!((a.mean - b.mean).abs() <= 3.0 * joint, "{a:?} vs {b:?}");
    }
    assert!(rb.sdiag.stderr < plain.sdiag.stderr);
}

#[test]
fn relative_error_ceiling_flags_components() {
    let u = gaussian(1.0);
    let p = AnyonPairParams::new(0.05, 0.03, 0.2, 2.0).unwrap();
    let cfg = VmcConfig {
        chain: ChainConfig::new(3, 200, 500),
        chains: 1,
        rao_blackwell: false,
        rel_err_ceiling: Some(1e-6),
    };
    let e = estimate_energy(&u, &p, 4, &Potential::Harmonic { coef: 1.0 }, &cfg).unwrap();
    assert!(e.flagged.contains(&"K".to_string()));
}

#[test]
fn norm_ratio_cases() {
    let u = gaussian(1.0);
    let p0 = AnyonPairParams::new(0.0, 0.01, 0.1, 0.0).unwrap();
    assert_eq!(estimate_norm_ratio(&u, &p0, 10, 10, 1).unwrap().ratio.mean, 1.0);
    let (setup, p) = pair_case();
    let want = setup.oracle(24, 48).norm_ratio;
    let got = estimate_norm_ratio(&gaussian(1.0), &p, 2, 400_000, 9).unwrap();
    assert!(got.ratio.agrees(want, 3.0, 0.0), "{:?} vs {want}", got.ratio);
    // N = 16, beta = 1, g = 0, b = 0.05
    let p = AnyonPairParams::new(1.0 / 15.0, 1e-3, 0.05, 0.0).unwrap();
    let nr = estimate_norm_ratio(&u, &p, 16, 100_000, 2).unwrap();
    assert!(nr.ratio.mean <= 1.0);
    assert!(1.0 - nr.ratio.mean <= 10.0 * nr.scale, "{:?} scale {}", nr.ratio, nr.scale);
}

#[test]
fn density_is_exact_without_correlations() {
    let u = gaussian(1.0);
    let p = AnyonPairParams::new(0.0, 0.01, 0.1, 0.0).unwrap();
    let (samples, _) = metropolis_chain(&u, &p, 3, ChainConfig::new(8, 500, 20_000)).unwrap();
    let grid = DensityGrid { half_width: 1.0, cells: 16 };
    let d = estimate_density(&samples, &u, PairFactor::jastrow(&p).unwrap(), grid, None);
    assert!(d.l1_conditional < 1e-12);
    assert!(d.l1_histogram < 5.0 * d.l1_histogram_stderr + 0.05);
}

#[test]
fn two_particle_density_matches_quadrature() {
    let (setup, p) = pair_case();
    let u = gaussian(1.0);
    let jas = Jastrow::new(&p).unwrap();
    let z = setup.oracle(24, 48).norm_ratio;
    let grid = DensityGrid { half_width: 1.0, cells: 16 };
    let h = grid.h();
    let cell = anyonlab_core::quad::Rule::legendre(4);
    let radial = anyonlab_core::quad::Rule::legendre(16);
    let disk = anyonlab_core::quad::polar_rule(&radial, &[0.0, p.r, p.b], 48);
    // marginal = |u(x)|^2 (1 + int (f^2 - 1)(y) |u(x - y)|^2 dy) / Z
    let mut exact_l1 = 0.0;
    for iy in 0..grid.cells {
        for ix in 0..grid.cells {
            let (x0, y0) = (-1.0 + ix as f64 * h, -1.0 + iy as f64 * h);
            let mut m = 0.0;
            let mut plain = 0.0;
            for (y, wy) in cell.on(y0, y0 + h) {
                for (x, wx) in cell.on(x0, x0 + h) {
                    let mut inner = 1.0;
                    for &(d, w) in &disk {
                        let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                        inner += w * (jas.f(r).powi(2) - 1.0) * u.density([x - d[0], y - d[1]]);
                    }
                    let rho = u.density([x, y]);
                    m += wx * wy * rho * inner / z;
                    plain += wx * wy * rho;
                }
            }
            exact_l1 += (m - plain).abs();
        }
    }
    let (samples, _) = metropolis_chain(&u, &p, 2, ChainConfig::new(21, 2000, 200_000)).unwrap();
    let d = estimate_density(&samples, &u, PairFactor::jastrow(&p).unwrap(), grid, None);
    assert!(
        (d.l1_conditional - exact_l1).abs() <= 3.0 * d.l1_conditional_stderr + 0.02 * exact_l1,
        "{} +- {} vs {exact_l1}",
        d.l1_conditional,
        d.l1_conditional_stderr
    );
}

#[test]
fn inequalities_hold_on_sampled_configurations() {
    let u = gaussian(1.0);
    let p = AnyonPairParams::new(0.1, 0.05, 0.3, 1.5).unwrap();
    let jas = Jastrow::new(&p).unwrap();
    let (samples, _) = metropolis_chain(&u, &p, 8, ChainConfig::new(4, 500, 5000)).unwrap();
    let v = Potential::Harmonic { coef: 1.0 };
    for x in &samples {
        assert!(product_inequality_holds(x, &jas));
        let t = sample_terms(x, &u, &jas, &v, None);
        assert!(t.w >= 0.0 && t.sdiag >= 0.0);
    }
}

#[test]
fn three_body_kernel_is_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100_000 {
        let mut pt = || [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let (x, y, z) = (pt(), pt(), pt());
        let r = rng.random_range(0.0..0.5);
        assert!(three_body_kernel(x, y, z, r) >= -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn log_weight_is_exchange_symmetric(
        pts in prop::collection::vec((-0.9..0.9f64, -0.9..0.9f64), 2..8),
        seed in any::<u64>(),
    ) {
        let u = gaussian(1.5);
        let p = AnyonPairParams::new(0.1, 0.05, 0.6, 1.0).unwrap();
        let pair = PairFactor::jastrow(&p).unwrap();
        let x: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a, b]).collect();
        let mut y = x.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..y.len()).rev() {
            y.swap(i, rng.random_range(0..=i));
        }
        let (a, b) = (log_weight(&x, &u, &pair), log_weight(&y, &u, &pair));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn product_inequality_on_random_configurations(
        pts in prop::collection::vec((-0.3..0.3f64, -0.3..0.3f64), 2..10),
        alpha in 0.0..0.24f64,
        g in 0.0..10.0f64,
    ) {
        let p = AnyonPairParams::new(alpha, 0.02, 0.2, g).unwrap();
        let jas = Jastrow::new(&p).unwrap();
        let x: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a, b]).collect();
        prop_assert!(product_inequality_holds(&x, &jas));
    }
}
