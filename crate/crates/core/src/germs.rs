//! Germs at -infinity: exponential sums, the Cauchy kernel and user functions.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{fmt_c, Error, Result};
use crate::geometry::DomainProfile;

pub const DEFAULT_MIN_GAP: f64 = 1e-9;

/// A bounded holomorphic function on a neighborhood of -infinity.
pub trait Germ: Send + Sync {
    fn eval(&self, w: Complex64) -> Complex64;

    /// Upper bound of `|g(w)|` over the points of the declared domain with `Re w <= x`.
    fn modulus_bound(&self, x: f64) -> f64;

    /// Rate `e` with `modulus_bound(x) <= modulus_bound(x0) e^{e (x - x0)}` for `x <= x0`.
    fn decay_rate(&self) -> f64 {
        0.0
    }

    /// Certified sup norm over `h`.
    fn sup_bound(&self, h: &DomainProfile) -> Result<f64> {
        match h.sup_real() {
            Some(a) => Ok(self.modulus_bound(a)),
            None => Err(Error::UnboundedGerm("domain unbounded to the right".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub beta: f64,
    pub coeff: Complex64,
}

impl ExpTerm {
    pub fn new(beta: f64, coeff: Complex64) -> Self {
        ExpTerm { beta, coeff }
    }
}

/// `sum a_beta e^{beta w}` with strictly increasing `beta >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum {
    terms: Vec<ExpTerm>,
    min_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNorm {
    pub certified: f64,
    pub empirical: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

impl ExpSum {
    pub fn new(terms: Vec<ExpTerm>) -> Result<Self> {
        Self::with_min_gap(terms, DEFAULT_MIN_GAP)
    }

    pub fn with_min_gap(terms: Vec<ExpTerm>, min_gap: f64) -> Result<Self> {
        if !(min_gap >= 0.0) {
            return Err(Error::InvalidInput(format!("min_gap must be non-negative, got {min_gap}")));
        }
        for t in &terms {
            if !t.beta.is_finite() || t.beta < 0.0 {
                return Err(Error::InvalidInput(format!("exponent must be finite and >= 0, got {}", t.beta)));
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient at beta={}", t.beta)));
            }
        }
        for pair in terms.windows(2) {
            if pair[1].beta - pair[0].beta < min_gap.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidInput(format!(
                    "exponents must increase by at least {min_gap}: {} then {}",
                    pair[0].beta, pair[1].beta
                )));
            }
        }
        Ok(ExpSum { terms, min_gap })
    }

    pub fn zero() -> Self {
        ExpSum { terms: Vec::new(), min_gap: DEFAULT_MIN_GAP }
    }

    /// Builds from `(beta, coeff)` pairs, sorting and merging equal exponents.
    pub fn from_pairs<I: IntoIterator<Item = (f64, Complex64)>>(pairs: I) -> Result<Self> {
        let mut terms: Vec<ExpTerm> = pairs.into_iter().map(|(b, c)| ExpTerm::new(b, c)).collect();
        terms.sort_by(|x, y| x.beta.total_cmp(&y.beta));
        let mut merged: Vec<ExpTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.beta == t.beta => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        ExpSum::new(merged)
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn betas(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(|t| t.beta)
    }

    /// Coefficient at `beta`, zero off the support.
    pub fn coeff_at(&self, beta: f64) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.beta == beta)
            .map_or(Complex64::new(0.0, 0.0), |t| t.coeff)
    }

    /// Distance from `t` to the nearest exponent.
    pub fn support_distance(&self, t: f64) -> f64 {
        self.betas().map(|b| (b - t).abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.terms.iter().map(|t| t.coeff * (w * t.beta).exp()).sum()
    }

    pub fn scale(&self, c: Complex64) -> ExpSum {
        ExpSum {
            terms: self.terms.iter().map(|t| ExpTerm::new(t.beta, t.coeff * c)).collect(),
            min_gap: self.min_gap,
        }
    }

    pub fn add(&self, other: &ExpSum) -> Result<ExpSum> {
        ExpSum::from_pairs(self.terms.iter().chain(other.terms.iter()).map(|t| (t.beta, t.coeff)))
    }

    /// `e^{a w} g(w)`.
    pub fn shift(&self, a: f64) -> Result<ExpSum> {
        ExpSum::with_min_gap(
            self.terms.iter().map(|t| ExpTerm::new(t.beta + a, t.coeff)).collect(),
            self.min_gap,
        )
    }

    /// `sum a_beta e^{(beta - p) w0} / (p - beta)`, the transform based at `w0`.
    pub fn laplace_closed_form(&self, w0: Complex64, p: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let d = p - t.beta;
            if d.norm() < self.min_gap.max(f64::MIN_POSITIVE) {
                return Err(Error::PoleProximity(fmt_c(p), d.norm()));
            }
            acc += t.coeff * ((t.beta - p) * w0).exp() / d;
        }
        Ok(acc)
    }

    /// Termwise magnitude `sum |a_beta e^{(beta - p) w0} / (p - beta)|`.
    pub fn laplace_scale(&self, w0: Complex64, p: Complex64) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.coeff * ((t.beta - p) * w0).exp() / (p - t.beta)).norm())
            .sum()
    }

    /// `c_norm sum_{beta <= t} a_beta (t - beta)^{n-1} / (n-1)!`.
    pub fn phi_closed_form(&self, n: usize, t: f64, c_norm: Complex64) -> Result<Complex64> {
        if n == 0 {
            return Err(Error::InvalidInput("jump index n must be >= 1".into()));
        }
        let f = factorial(n - 1);
        let s: Complex64 = self
            .terms
            .iter()
            .filter(|term| term.beta <= t)
            .map(|term| term.coeff * (t - term.beta).powi(n as i32 - 1) / f)
            .sum();
        Ok(s * c_norm)
    }

    /// `d`-th derivative of the jump `phi_n` at `t`, away from the support.
    pub fn phi_derivative(&self, n: usize, d: usize, t: f64, c_norm: Complex64) -> Result<Complex64> {
        if d >= n {
            return Ok(Complex64::new(0.0, 0.0));
        }
        self.phi_closed_form(n - d, t, c_norm)
    }

    /// Certified bound `sum |a_beta| e^{beta a}` with `a = sup Re H`, plus a sampled
    /// maximum of `|g|` along the boundary.
    pub fn sup_norm_bound(&self, h: &DomainProfile) -> Result<SupNorm> {
        let certified = self.sup_bound(h)?;
        let mut empirical: f64 = 0.0;
        let n = 10_000;
        for i in 0..n {
            let y = -60.0 + 120.0 * (i as f64) / ((n - 1) as f64);
            let w = Complex64::new(h.rho(y.abs()), y);
            empirical = empirical.max(self.eval(w).norm());
        }
        Ok(SupNorm { certified, empirical })
    }
}

impl Germ for ExpSum {
    fn eval(&self, w: Complex64) -> Complex64 {
        ExpSum::eval(self, w)
    }

    fn modulus_bound(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm() * (t.beta * x).exp()).sum()
    }

    fn decay_rate(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.coeff != Complex64::new(0.0, 0.0))
            .map_or(0.0, |t| t.beta)
    }
}

/// `w -> 1 / (z - w)` for `z` outside the domain.
#[derive(Debug, Clone)]
pub struct CauchyKernel {
    pub z: Complex64,
    bound: f64,
}

impl CauchyKernel {
    pub fn new(z: Complex64, h: &DomainProfile) -> Result<Self> {
        if h.contains(z) {
            return Err(Error::InvalidInput(format!("pole {} lies inside the domain", fmt_c(z))));
        }
        // distance from z to the boundary, sampled densely around z
        let mut dist = f64::INFINITY;
        let n = 20_000;
        let span = 4.0 * (1.0 + z.norm());
        for i in 0..=n {
            let y = z.im - span + 2.0 * span * (i as f64) / (n as f64);
            let b = Complex64::new(h.rho(y.abs()), y);
            dist = dist.min((b - z).norm());
        }
        if !(dist > 0.0) {
            return Err(Error::InvalidInput(format!("pole {} touches the domain", fmt_c(z))));
        }
        Ok(CauchyKernel { z, bound: 1.0 / dist })
    }
}

impl Germ for CauchyKernel {
    fn eval(&self, w: Complex64) -> Complex64 {
        (self.z - w).inv()
    }

    fn modulus_bound(&self, x: f64) -> f64 {
        if x < self.z.re {
            self.bound.min(1.0 / (self.z.re - x))
        } else {
            self.bound
        }
    }
}

/// `p -> e^{-z p} log p` with the cut along the positive reals (`arg p` in `(0, 2 pi)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogKernel {
    pub z: Complex64,
}

impl LogKernel {
    pub fn new(z: Complex64) -> Self {
        LogKernel { z }
    }

    pub fn eval(&self, p: Complex64) -> Result<Complex64> {
        if p.im == 0.0 && p.re >= 0.0 {
            return Err(Error::TooCloseToAxis(fmt_c(p), 0.0));
        }
        Ok((-self.z * p).exp() * log_cut_positive(p))
    }
}

/// Logarithm with `arg` in `(0, 2 pi)`.
pub fn log_cut_positive(p: Complex64) -> Complex64 {
    let mut arg = p.arg();
    if arg < 0.0 {
        arg += 2.0 * std::f64::consts::PI;
    }
    Complex64::new(p.norm().ln(), arg)
}

type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// User germ with a declared sup norm, validated by sampling only.
#[derive(Clone)]
pub struct GermFn {
    f: ComplexFn,
    pub domain: DomainProfile,
    pub declared_bound: f64,
    decay: f64,
}

impl GermFn {
    pub fn new(
        f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        domain: DomainProfile,
        declared_bound: f64,
    ) -> Result<Self> {
        if !(declared_bound >= 0.0) || !declared_bound.is_finite() {
            return Err(Error::InvalidInput(format!("declared bound must be finite and >= 0, got {declared_bound}")));
        }
        Ok(GermFn { f: Arc::new(f), domain, declared_bound, decay: 0.0 })
    }

    /// Declares `|g(w)| <= declared_bound e^{rate (Re w - sup Re H)}`.
    pub fn with_decay_rate(mut self, rate: f64) -> Self {
        self.decay = rate.max(0.0);
        self
    }

    /// Largest sampled ratio `|g(w)| / declared_bound` along the boundary and a few shifts left.
    pub fn check_bound(&self, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let y = -40.0 + 80.0 * (i as f64) / ((samples.max(2) - 1) as f64);
            for shift in [0.0, 1.0, 5.0] {
                let w = Complex64::new(self.domain.rho(y.abs()) - shift, y);
                if w.re.is_finite() {
                    worst = worst.max((self.f)(w).norm() / self.declared_bound.max(f64::MIN_POSITIVE));
                }
            }
        }
        worst
    }
}

impl fmt::Debug for GermFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GermFn")
            .field("domain", &self.domain)
            .field("declared_bound", &self.declared_bound)
            .finish()
    }
}

impl Germ for GermFn {
    fn eval(&self, w: Complex64) -> Complex64 {
        (self.f)(w)
    }

    fn modulus_bound(&self, x: f64) -> f64 {
        match self.domain.sup_real() {
            Some(a) if self.decay > 0.0 && x < a => self.declared_bound * (self.decay * (x - a)).exp(),
            _ => self.declared_bound,
        }
    }

    fn decay_rate(&self) -> f64 {
        self.decay
    }

    fn sup_bound(&self, _h: &DomainProfile) -> Result<f64> {
        Ok(self.declared_bound)
    }
}
