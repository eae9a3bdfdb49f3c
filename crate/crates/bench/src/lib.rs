//! Shared inputs for the benchmarks.

use explap::fixtures::{random_exp_sum, rng};
use explap::{Complex64, DomainProfile, ExpSum, LaplaceConfig};

/// Seeded exponential sum with up to `terms` exponents in `[0, 5]`.
pub fn germ(terms: usize) -> ExpSum {
    random_exp_sum(&mut rng(7), terms, 0.0, 5.0, 0.5).expect("fixture")
}

pub fn log_domain(k: f64) -> DomainProfile {
    DomainProfile::logarithmic(-1.0, k).expect("domain")
}

pub fn config(k: f64, tol: f64) -> LaplaceConfig {
    LaplaceConfig::at_vertex(log_domain(k), tol).expect("config")
}

/// Points of `-1 + H_{-1,k}` on the real axis and slightly above it.
pub fn w_grid(n: usize) -> Vec<Complex64> {
    (0..n).map(|i| Complex64::new(-4.0 - 0.5 * i as f64, if i % 2 == 0 { 0.0 } else { 0.5 })).collect()
}
