//! Seeded random fixtures shared by the verification suites.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::Result;
use crate::geometry::DomainProfile;
use crate::germs::{ExpSum, ExpTerm};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exponential sum with `1..=max_terms` terms, exponents in `[lo, hi]` pairwise at least
/// `min_sep` apart and coefficients in the unit square.
pub fn random_exp_sum<R: Rng>(rng: &mut R, max_terms: usize, lo: f64, hi: f64, min_sep: f64) -> Result<ExpSum> {
    let n = rng.gen_range(1..=max_terms.max(1));
    let mut betas: Vec<f64> = Vec::with_capacity(n);
    let mut attempts = 0;
    while betas.len() < n && attempts < 10_000 {
        attempts += 1;
        let b = rng.gen_range(lo..=hi);
        if betas.iter().all(|x| (x - b).abs() >= min_sep) {
            betas.push(b);
        }
    }
    betas.sort_by(f64::total_cmp);
    let terms = betas
        .into_iter()
        .map(|b| ExpTerm::new(b, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    ExpSum::new(terms)
}

/// Logarithmic domain `H_{-1,k}` with `k` drawn from `{1, 2}`.
pub fn random_log_domain<R: Rng>(rng: &mut R) -> Result<DomainProfile> {
    let k = if rng.gen_bool(0.5) { 1.0 } else { 2.0 };
    DomainProfile::logarithmic(-1.0, k)
}

/// Point of the open disk of radius `r` with `N(p) >= floor`.
pub fn random_p<R: Rng>(rng: &mut R, r: f64, floor: f64) -> Complex64 {
    loop {
        let p = Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
        if p.norm() < r && crate::geometry::n_distance(p) >= floor {
            return p;
        }
    }
}

/// Point of `shift + H` at depth `depth` beyond the boundary, with `|Im w| <= y_max`.
pub fn random_w_in<R: Rng>(rng: &mut R, h: &DomainProfile, shift: f64, y_max: f64, depth: (f64, f64)) -> Complex64 {
    let y = rng.gen_range(-y_max..=y_max);
    let d = rng.gen_range(depth.0..=depth.1);
    let rho = h.rho(y.abs());
    let x = if rho.is_finite() { rho + shift - d } else { shift - d };
    Complex64::new(x, y)
}

/// Samples `(theta, w01, p)` for the forward estimate: `theta` in `(0, pi/4)`, `w01` in the
/// closed cone `C_-(0, pi/2 - theta)` with `|w01| <= 1`, and `p` outside the closed cone of
/// half-opening `theta` with `0.1 <= |p| < r`.
pub fn forward_bound_samples<R: Rng>(rng: &mut R, n: usize, r: f64) -> Vec<(f64, Complex64, Complex64)> {
    (0..n)
        .map(|_| {
            let theta = rng.gen_range(0.05..FRAC_PI_4 - 0.05);
            let open = FRAC_PI_2 - theta;
            let w01 = Complex64::from_polar(rng.gen_range(0.0..1.0), PI + rng.gen_range(-open..=open));
            let margin = 1e-3;
            let ang = rng.gen_range(theta + margin..2.0 * PI - theta - margin);
            let p = Complex64::from_polar(rng.gen_range(0.1..r), ang);
            (theta, w01, p)
        })
        .collect()
}
