//! Partial sums and remainders by contour integration, coefficient extraction, the
//! diagonal integration by parts (DIPP) and evanescent partial sums.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::RwLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{fmt_c, Error, Result};
use crate::geometry::DomainProfile;
use crate::germs::{ExpSum, Germ};
use crate::quadrature::{integrate, integrate_param, integrate_segment_fixed, Contour, PathPiece, QuadOptions, QuadResult};
use crate::transform::{curve_integral, Half, LaplaceConfig, LaplaceImage, LogCurve, Memo, Representative};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn two_pi_i() -> Complex64 {
    2.0 * PI * I
}

/// Rectangle through `beta1 < beta2` on the real axis, run counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentLoop {
    pub beta1: f64,
    pub beta2: f64,
    pub half_height: f64,
}

impl SegmentLoop {
    pub fn new(beta1: f64, beta2: f64, half_height: f64) -> Result<Self> {
        if !(beta1 < beta2) || !beta1.is_finite() || !beta2.is_finite() {
            return Err(Error::InvalidInput(format!("need beta1 < beta2, got {beta1}, {beta2}")));
        }
        if !(half_height > 0.0 && half_height.is_finite()) {
            return Err(Error::InvalidInput(format!("half height must be positive, got {half_height}")));
        }
        Ok(SegmentLoop { beta1, beta2, half_height })
    }

    /// Loop whose crossing points are at least `r` away from the support: half height `min(r/2, 0.5)`.
    pub fn with_gap(beta1: f64, beta2: f64, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("gap must be positive, got {r}")));
        }
        Self::new(beta1, beta2, (0.5 * r).min(0.5))
    }

    /// Horizontal sides, run counterclockwise.
    fn horizontal(&self) -> Contour {
        let h = self.half_height;
        Contour {
            pieces: vec![
                PathPiece::segment(Complex64::new(self.beta1, -h), Complex64::new(self.beta2, -h)),
                PathPiece::segment(Complex64::new(self.beta2, h), Complex64::new(self.beta1, h)),
            ],
        }
    }

    /// Vertical sides `(from, to)`, crossing the axis at `beta2` upward and `beta1` downward.
    fn vertical(&self) -> [(Complex64, Complex64); 2] {
        let h = self.half_height;
        [
            (Complex64::new(self.beta2, -h), Complex64::new(self.beta2, h)),
            (Complex64::new(self.beta1, h), Complex64::new(self.beta1, -h)),
        ]
    }

    /// Both crossing points at distance `>= gap` from the support of `g`.
    pub fn check_support(&self, g: &ExpSum, gap: f64) -> Result<()> {
        for b in [self.beta1, self.beta2] {
            let d = g.support_distance(b);
            if d < gap {
                return Err(Error::Precondition(format!("crossing point {b} is {d:.3e} from the support")));
            }
        }
        Ok(())
    }
}

fn require_in_shifted(cfg: &LaplaceConfig, w: Complex64) -> Result<()> {
    if !cfg.domain.shifted(-1.0).contains(w) {
        return Err(Error::OutsideDomain(format!("{} is not in -1 + H", fmt_c(w))));
    }
    Ok(())
}

fn loop_options(cfg: &LaplaceConfig) -> QuadOptions {
    QuadOptions { abs_tol: 2.0 * PI * cfg.tol, rel_tol: 0.0, max_panels: 4000, max_panel_len: 0.5 }
}

/// `S_[beta1, beta2] g(w)` at several points, sharing the transform values between them.
pub fn partial_sums(g: &ExpSum, lp: &SegmentLoop, cfg: &LaplaceConfig, ws: &[Complex64]) -> Result<Vec<QuadResult>> {
    lp.check_support(g, g.min_gap())?;
    for &w in ws {
        require_in_shifted(cfg, w)?;
    }
    let image = LaplaceImage { g, cfg };
    let memo = Memo::new(&image);
    let horizontal = lp.horizontal();
    let opts = loop_options(cfg);
    let share = QuadOptions { abs_tol: 0.25 * opts.abs_tol, ..opts };
    ws.iter()
        .map(|&w| {
            let mut failure = None;
            let mut f = |p: Complex64| match memo.eval(p) {
                Ok(v) => v * (p * w).exp(),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(f64::NAN, f64::NAN)
                }
            };
            let mut res = integrate(&mut f, &horizontal, &QuadOptions { abs_tol: 0.5 * opts.abs_tol, ..opts })?;
            for (from, to) in lp.vertical() {
                res += integrate_segment_fixed(&mut f, from, to, share.abs_tol);
            }
            if let Some(e) = failure {
                return Err(e);
            }
            res.scale(two_pi_i().inv()).require(cfg.tol)
        })
        .collect()
}

/// `S_[beta1, beta2] g(w) = (1/2i pi) int L g(p) e^{pw} dp` around the loop.
pub fn partial_sum(g: &ExpSum, lp: &SegmentLoop, cfg: &LaplaceConfig, w: Complex64) -> Result<QuadResult> {
    Ok(partial_sums(g, lp, cfg, &[w])?.remove(0))
}

/// `S_[beta3, inf) g(w)` along the border of `C_+(0, theta) ∩ {Re p >= beta3}`.
pub fn remainder_sum(g: &ExpSum, beta3: f64, theta: f64, cfg: &LaplaceConfig, w: Complex64) -> Result<QuadResult> {
    if !(beta3 > 0.0) {
        return Err(Error::InvalidInput(format!("cut must be positive, got {beta3}")));
    }
    if !(theta > 0.0 && theta < PI / 2.0) {
        return Err(Error::AngleOutOfRange(theta));
    }
    let d = g.support_distance(beta3);
    if d < g.min_gap() {
        return Err(Error::Precondition(format!("cut {beta3} is {d:.3e} from the support")));
    }
    require_in_shifted(cfg, w)?;
    let image = LaplaceImage { g, cfg };
    let u = Complex64::from_polar(1.0, theta);
    let q_up = Complex64::new(beta3, beta3 * theta.tan());
    let q_down = q_up.conj();
    let opts = loop_options(cfg);
    let share = QuadOptions { abs_tol: opts.abs_tol / 3.0, ..opts };
    let mut failure = None;
    let mut f = |p: Complex64| match image.eval(p) {
        Ok(v) => v * (p * w).exp(),
        Err(e) => {
            failure.get_or_insert(e);
            Complex64::new(f64::NAN, f64::NAN)
        }
    };
    let mut total = QuadResult::zero();
    // inward along the upper edge, down the cut, outward along the lower edge
    for (q, dir, sign) in [(q_up, u, -1.0), (q_down, u.conj(), 1.0)] {
        let (c, r) = image.ray_growth(q, dir)?;
        let rate = -(r + (dir * w).re);
        if !(rate > 0.0) {
            return Err(Error::NoAdmissibleRay(format!("w = {} is outside the convergence cone", fmt_c(w))));
        }
        let piece = PathPiece::Ray { origin: q, direction: dir, decay_rate: rate, decay_const: c * (q * w).re.exp() };
        let res = integrate(&mut f, &Contour::new(vec![piece])?, &share)?;
        total += res.scale(Complex64::new(sign, 0.0));
    }
    total += integrate_segment_fixed(&mut f, q_up, q_down, share.abs_tol);
    if let Some(e) = failure {
        return Err(e);
    }
    total.scale(two_pi_i().inv()).require(cfg.tol)
}

/// Least-squares coefficient of `e^{beta w}` in `S_[beta - r/2, beta + r/2] g` over the probes.
pub fn extract_coefficient(g: &ExpSum, beta: f64, r: f64, cfg: &LaplaceConfig, w_probe: &[Complex64]) -> Result<Complex64> {
    if let Some(t) = g.terms().iter().find(|t| t.beta != beta && (t.beta - beta).abs() < r) {
        return Err(Error::Precondition(format!("exponent {} lies within {r} of {beta}", t.beta)));
    }
    if w_probe.is_empty() {
        return Err(Error::IllConditioned("no probe points".into()));
    }
    let lp = SegmentLoop::with_gap(beta - 0.5 * r, beta + 0.5 * r, 0.5 * r)?;
    let sums = partial_sums(g, &lp, cfg, w_probe)?;
    let basis: Vec<Complex64> = w_probe.iter().map(|w| (w * beta).exp()).collect();
    let gram: f64 = basis.iter().map(|e| e.norm_sqr()).sum();
    if !(gram > 1e-200) || !gram.is_finite() {
        return Err(Error::IllConditioned(format!("probe basis has norm {gram:e}")));
    }
    let dot: Complex64 = basis.iter().zip(&sums).map(|(e, s)| e.conj() * s.value).sum();
    Ok(dot / gram)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    pub index: usize,
    pub max_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub rows: Vec<LimitRow>,
    /// Differences never increase along the sequence.
    pub decreasing: bool,
    pub converged: bool,
}

/// Distance between the partial sums of each member of `seq` and those of `limit` on `grid`.
pub fn limit_series_check(
    seq: &[ExpSum],
    limit: &ExpSum,
    lp: &SegmentLoop,
    cfg: &LaplaceConfig,
    grid: &[Complex64],
    tol: f64,
) -> Result<LimitReport> {
    let target = partial_sums(limit, lp, cfg, grid)?;
    let mut rows = Vec::with_capacity(seq.len());
    for (index, g) in seq.iter().enumerate() {
        let s = partial_sums(g, lp, cfg, grid)?;
        let max_diff = s.iter().zip(&target).map(|(a, b)| (a.value - b.value).norm()).fold(0.0, f64::max);
        rows.push(LimitRow { index, max_diff });
    }
    let decreasing = rows.windows(2).all(|w| w[1].max_diff <= w[0].max_diff * (1.0 + 1e-9));
    let converged = rows.last().is_some_and(|r| r.max_diff <= tol);
    Ok(LimitReport { rows, decreasing, converged })
}

/// `(-1)^n L(g / w^n)(p)`, the `n`-th primitive of the transform based on `curve`.
pub fn iterated_primitive(g: &dyn Germ, n: usize, p: Complex64, curve: LogCurve, tol: f64) -> Result<Complex64> {
    if p.im == 0.0 {
        return Err(Error::TooCloseToAxis(fmt_c(p), 0.0));
    }
    let half = if p.im < 0.0 { Half::Upper } else { Half::Lower };
    let v = curve_integral(g, curve, half, p, n, tol)?.value;
    Ok(if n.is_multiple_of(2) { v } else { -v })
}

fn check_curve(curve: &LogCurve) -> Result<()> {
    if curve.base() > -1.0 {
        return Err(Error::Precondition(format!("curve crosses the axis at {} > -1", curve.base())));
    }
    Ok(())
}

/// Jump `phi_n(t) = (I^n L g)^-(t) - (I^n L g)^+(t)` across the axis, from the two halves of `curve`.
pub fn phi_n(g: &dyn Germ, n: usize, t: f64, curve: LogCurve, tol: f64) -> Result<Complex64> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("jump index must be >= 3, got {n}")));
    }
    check_curve(&curve)?;
    if curve.k * t > (n - 2) as f64 {
        return Err(Error::Precondition(format!("k t = {} exceeds n - 2 = {}", curve.k * t, n - 2)));
    }
    let p = Complex64::new(t, 0.0);
    let up = curve_integral(g, curve, Half::Upper, p, n, 0.5 * tol)?.value;
    let down = curve_integral(g, curve, Half::Lower, p, n, 0.5 * tol)?.value;
    let d = up - down;
    Ok(if n.is_multiple_of(2) { d } else { -d })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub c_norm: Complex64,
    /// `|c_norm|` is within 0.1% of `2 pi`.
    pub within: bool,
}

/// Ratio of `phi_n` for `coeff e^{w}` to `coeff (t-1)^{n-1}/(n-1)!`.
pub fn calibrate_phi_at(curve: LogCurve, tol: f64, n: usize, t: f64, coeff: Complex64) -> Result<Calibration> {
    if !(t > 1.0) {
        return Err(Error::InvalidInput(format!("calibration point must exceed 1, got {t}")));
    }
    let g = ExpSum::from_pairs([(1.0, coeff)])?;
    let phi = phi_n(&g, n, t, curve, tol)?;
    let reference = coeff * (t - 1.0).powi(n as i32 - 1) / factorial(n - 1);
    let c_norm = phi / reference;
    let within = (c_norm.norm() / (2.0 * PI) - 1.0).abs() <= 1e-3;
    Ok(Calibration { c_norm, within })
}

/// Curve used for calibration: base `-1`, slope `1/2`.
pub fn calibration_curve() -> LogCurve {
    LogCurve { a: 1.0, k: 0.5 }
}

/// Calibration on `e^{w}` with `n = 4`, `t = 2`.
pub fn calibrate_phi_constant(tol: f64) -> Result<Calibration> {
    calibrate_phi_at(calibration_curve(), tol, 4, 2.0, Complex64::new(1.0, 0.0))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Source of the jumps `phi_n` and their derivatives.
pub trait Jump {
    fn phi(&self, n: usize, t: f64) -> Result<Complex64>;

    fn phi_derivative(&self, n: usize, d: usize, t: f64) -> Result<Complex64>;

    /// Points of `(a, b)` where `phi_n` is not smooth.
    fn breakpoints(&self, _a: f64, _b: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// Exact piecewise polynomial jumps of an exponential sum.
pub struct ExpSumJump<'a> {
    pub g: &'a ExpSum,
    pub c_norm: Complex64,
}

impl Jump for ExpSumJump<'_> {
    fn phi(&self, n: usize, t: f64) -> Result<Complex64> {
        self.g.phi_closed_form(n, t, self.c_norm)
    }

    fn phi_derivative(&self, n: usize, d: usize, t: f64) -> Result<Complex64> {
        self.g.phi_derivative(n, d, t, self.c_norm)
    }

    fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        self.g.betas().filter(|x| *x > a && *x < b).collect()
    }
}

/// Jumps computed by quadrature along a logarithmic curve.
pub struct CurveJump<'a> {
    pub g: &'a dyn Germ,
    pub curve: LogCurve,
    pub tol: f64,
}

impl Jump for CurveJump<'_> {
    fn phi(&self, n: usize, t: f64) -> Result<Complex64> {
        phi_n(self.g, n, t, self.curve, self.tol)
    }

    fn phi_derivative(&self, n: usize, d: usize, t: f64) -> Result<Complex64> {
        if d == 0 {
            return self.phi(n, t);
        }
        if d < n && n - d >= 3 && self.curve.k * t <= (n - d - 2) as f64 {
            return self.phi(n - d, t);
        }
        self.phi_derivative_by_differences(n, d, t)
    }
}

impl CurveJump<'_> {
    /// Central differences of order `d` with step `1e-3 (1 + |t|)`, Richardson extrapolated.
    pub fn phi_derivative_by_differences(&self, n: usize, d: usize, t: f64) -> Result<Complex64> {
        let fd = |h: f64| -> Result<Complex64> {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut binom = 1.0;
            for j in 0..=d {
                let x = t + (0.5 * d as f64 - j as f64) * h;
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += self.phi(n, x)? * (s * binom);
                binom = binom * (d - j) as f64 / (j + 1) as f64;
            }
            Ok(acc / h.powi(d as i32))
        };
        let h = 1e-3 * (1.0 + t.abs());
        let (f1, f2) = (fd(h)?, fd(0.5 * h)?);
        Ok((4.0 * f2 - f1) / 3.0)
    }
}

/// Cutting points, convergence constant and jump cache of the diagonal integration by parts.
#[derive(Debug)]
pub struct DippState {
    pub k: f64,
    pub eps: f64,
    /// `t_0 = -eps, t_n = (n - 0.5)/k`.
    pub t_points: Vec<f64>,
    pub c_norm: Complex64,
    pub n_max: usize,
    /// `a + log 2` in the convergence condition `a~ + k log|w| + Re w < 0`.
    pub a_tilde: f64,
    /// Largest exponent of the support; series terms are only tested for decay beyond it.
    pub support_end: f64,
    /// Relative size under which three consecutive terms stop the series.
    pub tol: f64,
    phi_cache: RwLock<HashMap<(usize, usize, u64), Complex64>>,
}

impl DippState {
    pub fn new(k: f64, a_tilde: f64, c_norm: Complex64, n_max: usize) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidInput(format!("slope must be positive, got {k}")));
        }
        if n_max < 1 {
            return Err(Error::InvalidInput("n_max must be >= 1".into()));
        }
        let eps = 0.5 / k;
        let t_points = (0..=n_max + 1).map(|n| if n == 0 { -eps } else { (n as f64 - 0.5) / k }).collect();
        Ok(DippState {
            k,
            eps,
            t_points,
            c_norm,
            n_max,
            a_tilde,
            support_end: 0.0,
            tol: 1e-13,
            phi_cache: RwLock::new(HashMap::new()),
        })
    }

    /// State for `g` on a logarithmic domain; `k` is nudged by `1e-4` relative until no cutting
    /// point meets the support.
    pub fn for_germ(g: &ExpSum, domain: &DomainProfile, c_norm: Complex64, n_max: usize) -> Result<Self> {
        let k0 = domain
            .slope()
            .filter(|k| *k > 0.0)
            .ok_or_else(|| Error::InvalidDomain("the diagonal integration by parts needs a logarithmic domain".into()))?;
        let top = domain.sup_real().ok_or_else(|| Error::InvalidDomain("unbounded domain".into()))?;
        if top > -1.0 {
            return Err(Error::InvalidDomain(format!("domain reaches Re w = {top} > -1")));
        }
        let a_tilde = -top + LN_2;
        let gap = g.min_gap();
        let mut k = k0;
        for _ in 0..100 {
            let mut s = Self::new(k, a_tilde, c_norm, n_max)?;
            if s.t_points[1..].iter().all(|t| g.support_distance(*t) >= gap) {
                s.support_end = g.betas().fold(0.0, f64::max);
                return Ok(s);
            }
            k *= 1.0 + 1e-4;
        }
        Err(Error::Precondition("cutting points keep meeting the support".into()))
    }

    pub fn t(&self, n: usize) -> f64 {
        self.t_points[n]
    }

    /// `a~ + k log|w| + Re w`.
    pub fn convergence_margin(&self, w: Complex64) -> f64 {
        self.a_tilde + self.k * w.norm().ln() + w.re
    }

    /// Geometric ratio bound `e^{(a~ + k log|w| + Re w)/k}` for consecutive terms.
    pub fn ratio_bound(&self, w: Complex64) -> f64 {
        (self.convergence_margin(w) / self.k).exp()
    }

    fn check_w(&self, w: Complex64) -> Result<()> {
        let m = self.convergence_margin(w);
        if !(m < 0.0) {
            return Err(Error::OutsideDomain(format!("{} has a~ + k log|w| + Re w = {m:.3}", fmt_c(w))));
        }
        Ok(())
    }

    fn phi(&self, jump: &dyn Jump, n: usize, d: usize, t: f64) -> Result<Complex64> {
        let key = (n, d, t.to_bits());
        if let Some(v) = self.phi_cache.read().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = if d == 0 { jump.phi(n, t)? } else { jump.phi_derivative(n, d, t)? };
        self.phi_cache.write().expect("cache lock").insert(key, v);
        Ok(v)
    }

    /// Drops cached jumps, needed before reusing the state with another germ.
    pub fn clear_cache(&self) {
        self.phi_cache.write().expect("cache lock").clear();
    }

    /// `(-1)^{n+3} int_{t_n}^{t_{n+1}} phi_{n+3}(t) w^{n+3} e^{wt} dt`.
    pub fn strip_term(&self, jump: &dyn Jump, n: usize, w: Complex64) -> Result<Complex64> {
        let (a, b) = (self.t(n), self.t(n + 1));
        let mut cuts = vec![a];
        cuts.extend(jump.breakpoints(a, b));
        cuts.push(b);
        let opts = QuadOptions { abs_tol: f64::MIN_POSITIVE, rel_tol: 1e-14, max_panels: 200, max_panel_len: b - a };
        let mut total = Complex64::new(0.0, 0.0);
        for seg in cuts.windows(2) {
            let mut failure = None;
            let r = integrate_param(
                |t| match self.phi(jump, n + 3, 0, t) {
                    Ok(v) => v * (w * t).exp(),
                    Err(e) => {
                        failure.get_or_insert(e);
                        Complex64::new(f64::NAN, f64::NAN)
                    }
                },
                seg[0],
                seg[1],
                &opts,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            total += r.value;
        }
        let s = if (n + 3).is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(total * w.powi(n as i32 + 3) * s)
    }

    /// `BT^1_n(w) = (-1)^{n+3} phi_{n+3}(t_n) w^{n+2} e^{w t_n}`, `n >= 1`.
    pub fn boundary_term(&self, jump: &dyn Jump, n: usize, w: Complex64) -> Result<Complex64> {
        let t = self.t(n);
        let s = if (n + 3).is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(self.phi(jump, n + 3, 0, t)? * w.powi(n as i32 + 2) * (w * t).exp() * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DippTerm {
    pub n: usize,
    pub t_n: f64,
    pub strip: [f64; 2],
    pub boundary: [f64; 2],
    /// Modulus of the strip term plus the boundary term.
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DippResult {
    pub value: Complex64,
    pub terms: Vec<DippTerm>,
    /// Geometric tail estimate after the last term.
    pub err_est: f64,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// `(1/c_norm) [sum_n strip_n + sum_{n>=1} BT^1_n]`, truncated after three consecutive terms
/// below `tol |sum|` past the support.
pub fn dipp_sum(jump: &dyn Jump, state: &DippState, w: Complex64) -> Result<DippResult> {
    state.check_w(w)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut terms = Vec::new();
    let mut quiet = 0;
    for n in 0..state.n_max {
        let strip = state.strip_term(jump, n, w)?;
        let boundary = if n >= 1 { state.boundary_term(jump, n, w)? } else { Complex64::new(0.0, 0.0) };
        let term = strip + boundary;
        sum += term;
        terms.push(DippTerm { n, t_n: state.t(n), strip: pair(strip), boundary: pair(boundary), size: term.norm() });
        if state.t(n) > state.support_end {
            if term.norm() <= state.tol * sum.norm() {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= 3 {
                let rho = state.ratio_bound(w);
                let last = term.norm() / state.c_norm.norm();
                let err_est = if rho < 1.0 { last * rho / (1.0 - rho) } else { f64::INFINITY };
                return Ok(DippResult { value: sum / state.c_norm, terms, err_est });
            }
        }
    }
    Err(Error::Divergent(format!("no term decay within {} terms at w = {}", state.n_max, fmt_c(w))))
}

/// `S~_n g(w)` from the truncated series: `(1/c_norm)[sum_{r<n} strip_r + sum_{1<=r<=n} BT^1_r]`.
pub fn evanescent_by_parts(jump: &dyn Jump, state: &DippState, n: usize, w: Complex64) -> Result<Complex64> {
    if n < 1 || n > state.n_max {
        return Err(Error::InvalidInput(format!("order {n} outside 1..={}", state.n_max)));
    }
    state.check_w(w)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..n {
        acc += state.strip_term(jump, r, w)?;
    }
    for r in 1..=n {
        acc += state.boundary_term(jump, r, w)?;
    }
    Ok(acc / state.c_norm)
}

/// Coefficients `b_r = (-1)^{r+1} phi^{(n-r+2)}_{n+3}(t_n) / c_norm`, `r = 0..=n+2`.
pub fn border_coefficients(g: &ExpSum, state: &DippState, n: usize) -> Result<Vec<Complex64>> {
    let t = state.t(n);
    (0..=n + 2)
        .map(|r| {
            let s = if (r + 1) % 2 == 0 { 1.0 } else { -1.0 };
            Ok(g.phi_derivative(n + 3, n + 2 - r, t, state.c_norm)? * s / state.c_norm)
        })
        .collect()
}

fn border_value(b: &[Complex64], t: f64, w: Complex64) -> Complex64 {
    b.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c) * (w * t).exp()
}

/// `sum_{beta <= t_n} a_beta e^{beta w} + sum_r b_r w^r e^{w t_n}`.
pub fn evanescent_closed_form(g: &ExpSum, state: &DippState, n: usize, w: Complex64) -> Result<Complex64> {
    let t = state.t(n);
    let head: Complex64 = g.terms().iter().filter(|x| x.beta <= t).map(|x| x.coeff * (w * x.beta).exp()).sum();
    Ok(head + border_value(&border_coefficients(g, state, n)?, t, w))
}

/// `|g(w) - S~_n g(w)|` from its two parts, without cancellation against `g`.
pub fn evanescent_error(g: &ExpSum, state: &DippState, n: usize, w: Complex64) -> Result<f64> {
    let t = state.t(n);
    let tail: Complex64 = g.terms().iter().filter(|x| x.beta > t).map(|x| x.coeff * (w * x.beta).exp()).sum();
    Ok((tail - border_value(&border_coefficients(g, state, n)?, t, w)).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evanescent {
    pub by_parts: Complex64,
    pub closed: Complex64,
}

/// `S~_n g(w)` both from the truncated series and in closed form; they must agree.
pub fn evanescent_sum(g: &ExpSum, state: &DippState, n: usize, w: Complex64) -> Result<Evanescent> {
    let jump = ExpSumJump { g, c_norm: state.c_norm };
    let by_parts = evanescent_by_parts(&jump, state, n, w)?;
    let closed = evanescent_closed_form(g, state, n, w)?;
    let t = state.t(n);
    let scale: f64 = g.terms().iter().map(|x| (x.coeff * (w * x.beta).exp()).norm()).sum::<f64>()
        + border_coefficients(g, state, n)?
            .iter()
            .enumerate()
            .map(|(r, b)| b.norm() * w.norm().powi(r as i32))
            .sum::<f64>()
            * (w.re * t).exp();
    if (by_parts - closed).norm() > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::IllConditioned(format!(
            "series {} and closed form {} disagree",
            fmt_c(by_parts),
            fmt_c(closed)
        )));
    }
    Ok(Evanescent { by_parts, closed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub t_n: f64,
    pub max_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Each error is at most twice the previous one.
    pub monotone: bool,
    pub final_ok: bool,
}

impl ConvergenceReport {
    /// Least-squares slope of `log(max_err)` against `t_n`, zero errors skipped.
    pub fn log_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.rows.iter().filter(|r| r.max_err > 0.0).map(|r| (r.t_n, r.max_err.ln())).collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,t_n,max_err\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:e},{:e}\n", r.n, r.t_n, r.max_err));
        }
        out
    }
}

/// Maximum of `|g - S~_n g|` over the grid for each `n`.
pub fn convergence_report(
    g: &ExpSum,
    state: &DippState,
    w_grid: &[Complex64],
    n_range: std::ops::RangeInclusive<usize>,
) -> Result<ConvergenceReport> {
    for &w in w_grid {
        state.check_w(w)?;
    }
    let rows = n_range
        .map(|n| {
            let max_err = w_grid
                .iter()
                .map(|&w| evanescent_error(g, state, n, w))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(ConvergenceRow { n, t_n: state.t(n), max_err })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows.windows(2).all(|r| r[1].max_err <= 2.0 * r[0].max_err);
    let final_ok = rows.last().is_some_and(|r| r.max_err <= 1e-5);
    Ok(ConvergenceReport { rows, monotone, final_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::rng;
    use crate::transform::{inverse_laplace, best_angle, InverseConfig};
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn g2() -> ExpSum {
        ExpSum::from_pairs([(1.0, c(1.0, 0.0)), (3.0, c(2.0, 0.0))]).unwrap()
    }

    fn straight_cfg(a: f64, tol: f64) -> LaplaceConfig {
        LaplaceConfig::at_vertex(DomainProfile::straight(a).unwrap(), tol).unwrap()
    }

    #[test]
    fn partial_sum_examples() {
        let cfg = straight_cfg(0.0, 1e-10);
        let w = c(-3.0, 0.0);
        let s = partial_sum(&g2(), &SegmentLoop::with_gap(0.0, 2.0, 0.5).unwrap(), &cfg, w).unwrap();
        assert!((s.value - w.exp()).norm() < 1e-6, "{s:?}");
        let empty = partial_sum(&g2(), &SegmentLoop::with_gap(1.5, 2.5, 0.5).unwrap(), &cfg, w).unwrap();
        assert!(empty.value.norm() < 1e-9);
        let w = c(-1.5, 0.7);
        let a = partial_sum(&g2(), &SegmentLoop::with_gap(0.0, 2.0, 0.5).unwrap(), &cfg, w).unwrap();
        let b = partial_sum(&g2(), &SegmentLoop::with_gap(2.0, 4.0, 0.5).unwrap(), &cfg, w).unwrap();
        let ab = partial_sum(&g2(), &SegmentLoop::with_gap(0.0, 4.0, 0.5).unwrap(), &cfg, w).unwrap();
        assert!((a.value + b.value - ab.value).norm() <= 2e-10);
        assert!((ab.value - g2().eval(w)).norm() <= 1e-9);
    }

    #[test]
    fn partial_sum_errors() {
        let cfg = straight_cfg(0.0, 1e-10);
        assert!(matches!(
            partial_sum(&g2(), &SegmentLoop::with_gap(1.0, 2.0, 0.5).unwrap(), &cfg, c(-2.0, 0.0)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            partial_sum(&g2(), &SegmentLoop::with_gap(0.0, 2.0, 0.5).unwrap(), &cfg, c(-0.5, 0.0)),
            Err(Error::OutsideDomain(_))
        ));
        assert!(SegmentLoop::new(2.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn contour_shape_independence() {
        let cfg = straight_cfg(0.0, 1e-10);
        let w = c(-2.0, 1.0);
        let a = partial_sum(&g2(), &SegmentLoop::new(0.0, 2.0, 0.4).unwrap(), &cfg, w).unwrap();
        let b = partial_sum(&g2(), &SegmentLoop::new(0.0, 2.0, 0.2).unwrap(), &cfg, w).unwrap();
        assert!((a.value - b.value).norm() <= 2e-10);
    }

    #[test]
    fn remainders() {
        let cfg = straight_cfg(0.0, 1e-10);
        let w = c(-4.0, 0.0);
        let one = ExpSum::from_pairs([(1.0, c(1.0, 0.0))]).unwrap();
        assert!(remainder_sum(&one, 2.0, 0.5, &cfg, w).unwrap().value.norm() < 1e-9);
        let r = remainder_sum(&g2(), 2.0, 0.5, &cfg, w).unwrap();
        assert!((r.value - 2.0 * (-12f64).exp()).norm() < 1e-8, "{r:?}");
        let s = partial_sum(&g2(), &SegmentLoop::with_gap(-1.0, 2.0, 0.5).unwrap(), &cfg, w).unwrap();
        assert!((g2().eval(w) - r.value - s.value).norm() <= 3e-10);
        assert!(remainder_sum(&g2(), 3.0, 0.5, &cfg, w).is_err());
    }

    #[test]
    fn coefficient_extraction() {
        let cfg = straight_cfg(0.0, 1e-11);
        let probes = [c(-1.0, 0.0), c(-1.2, 0.5), c(-1.5, -0.3)];
        let g = ExpSum::from_pairs([(1.0, c(2.0, 1.0))]).unwrap();
        let a = extract_coefficient(&g, 1.0, 0.5, &cfg, &probes).unwrap();
        assert!((a - c(2.0, 1.0)).norm() < 1e-6);
        assert!(extract_coefficient(&g, 2.0, 0.5, &cfg, &probes).unwrap().norm() < 1e-8);
        let close = ExpSum::from_pairs([(1.0, c(2.0, 1.0)), (1.5, c(-1.0, 0.0))]).unwrap();
        let a = extract_coefficient(&close, 1.0, 0.5, &cfg, &probes).unwrap();
        assert!((a - c(2.0, 1.0)).norm() < 1e-6);
        assert!(extract_coefficient(&close, 1.0, 0.6, &cfg, &probes).is_err());
    }

    #[test]
    fn limit_sequences() {
        let cfg = straight_cfg(-1.0, 1e-11);
        let lp = SegmentLoop::with_gap(0.5, 1.5, 0.25).unwrap();
        let grid = [c(-3.0, 0.0), c(-4.0, 1.0)];
        let seq: Vec<ExpSum> = [4, 8, 16].iter().map(|n| ExpSum::from_pairs([(1.0 + 1.0 / *n as f64, c(1.0, 0.0))]).unwrap()).collect();
        let lim = ExpSum::from_pairs([(1.0, c(1.0, 0.0))]).unwrap();
        let rep = limit_series_check(&seq, &lim, &lp, &cfg, &grid, 1e-2).unwrap();
        assert!(rep.decreasing && rep.converged, "{rep:?}");
        let same = vec![lim.clone(), lim.clone()];
        let rep = limit_series_check(&same, &lim, &lp, &cfg, &grid, 1e-9).unwrap();
        assert!(rep.rows.iter().all(|r| r.max_diff == 0.0));
    }

    fn phi_tol() -> f64 {
        1e-11
    }

    #[test]
    fn calibration() {
        let cal = calibrate_phi_constant(phi_tol()).unwrap();
        assert!(cal.within, "{cal:?}");
        let again = calibrate_phi_constant(phi_tol()).unwrap();
        assert!((cal.c_norm - again.c_norm).norm() < 1e-8);
        let other = calibrate_phi_at(calibration_curve(), phi_tol(), 5, 2.5, c(1.0, 0.0)).unwrap();
        assert!((cal.c_norm - other.c_norm).norm() < 1e-6);
        let two = calibrate_phi_at(calibration_curve(), phi_tol(), 4, 2.0, c(2.0, 0.0)).unwrap();
        assert!((cal.c_norm - two.c_norm).norm() < 1e-8);
    }

    #[test]
    fn phi_values() {
        let curve = calibration_curve();
        let zero = ExpSum::zero();
        assert_eq!(phi_n(&zero, 5, 2.0, curve, phi_tol()).unwrap(), c(0.0, 0.0));
        let one = ExpSum::from_pairs([(1.0, c(1.0, 0.0))]).unwrap();
        let cn = calibrate_phi_constant(phi_tol()).unwrap().c_norm;
        let v = phi_n(&one, 5, 2.0, curve, phi_tol()).unwrap();
        let exact = one.phi_closed_form(5, 2.0, cn).unwrap();
        assert!((v - exact).norm() <= 1e-6 * exact.norm());
        assert!(phi_n(&one, 5, 0.5, curve, phi_tol()).unwrap().norm() < 1e-9);
        assert!(matches!(phi_n(&one, 4, 5.0, curve, phi_tol()), Err(Error::Precondition(_))));
        assert!(phi_n(&one, 4, 1.0, LogCurve { a: 0.5, k: 0.5 }, phi_tol()).is_err());
    }

    #[test]
    fn phi_derivatives_by_differences() {
        let curve = calibration_curve();
        let g = ExpSum::from_pairs([(0.5, c(1.0, -0.5)), (1.2, c(0.3, 0.0))]).unwrap();
        let cn = calibrate_phi_constant(phi_tol()).unwrap().c_norm;
        let cj = CurveJump { g: &g, curve, tol: 1e-12 };
        let t = 1.5;
        for (n, d) in [(6usize, 1usize), (7, 1), (7, 2)] {
            let exact = g.phi_derivative(n, d, t, cn).unwrap();
            let direct = cj.phi_derivative(n, d, t).unwrap();
            let fd = cj.phi_derivative_by_differences(n, d, t).unwrap();
            assert!((direct - exact).norm() <= 1e-6 * exact.norm(), "n={n} d={d}");
            assert!((fd - exact).norm() <= 1e-5 * exact.norm(), "n={n} d={d}: {fd} vs {exact}");
        }
    }

    #[test]
    fn primitive_bound_and_telescoping() {
        // curve and domain H_{-1,1}
        let curve = LogCurve { a: 1.0, k: 1.0 };
        let dom = DomainProfile::logarithmic(-1.0, 1.0).unwrap();
        let g = ExpSum::from_pairs([(0.3, c(1.0, 0.0)), (1.1, c(-0.5, 0.5))]).unwrap();
        let norm = g.sup_bound(&dom).unwrap();
        let (a, k) = (curve.a, curve.k);
        let mut r = rng(5);
        for _ in 0..10 {
            let p = c(r.gen_range(0.1..2.0), r.gen_range(0.2..2.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 });
            let n = (k * p.re).ceil() as usize + r.gen_range(0..3);
            let v = iterated_primitive(&g, n, p, curve, 1e-12).unwrap();
            let bound = (k + 1.0) * (a * n as f64 / k).exp() * 2f64.powi(n as i32) * norm / p.im.abs();
            assert!(v.norm() <= bound, "n={n} p={p}");
        }
        for n in 3..7 {
            let t = 0.25 * (n - 2) as f64 / k;
            let phi = phi_n(&g, n, t, curve, 1e-8).unwrap();
            let bound = 2.0 * (k + 1.0) * (a * (n - 2) as f64 / k).exp() * 2f64.powf((n - 2) as f64 / k + 1.0) * norm;
            assert!(phi.norm() <= bound);
        }
        // border terms at p_{n+1} on the ray from -eps with direction v
        let eps = 0.5 / k;
        let v = Complex64::from_polar(1.0, 0.4);
        let w = c(-3.0, 0.5);
        for n in 0..=4usize {
            let re = (n as f64 + 0.5) / k;
            let p = c(-eps, 0.0) + v * ((re + eps) / v.re);
            let prims: Vec<Complex64> = (1..=n + 5).map(|m| iterated_primitive(&g, m, p, curve, 1e-13).unwrap()).collect();
            let bt = |top: usize| -> Complex64 {
                (0..=top).map(|r| prims[r] * w.powi(r as i32) * (w * p).exp() * if r % 2 == 0 { 1.0 } else { -1.0 }).sum()
            };
            let lhs = bt(n + 2) - bt(n + 3);
            let s = if (n + 4) % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = prims[n + 3] * w.powi(n as i32 + 3) * (w * p).exp() * s;
            assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }
    }

    fn dipp_state(g: &ExpSum, k: f64) -> DippState {
        let dom = DomainProfile::logarithmic(-1.0, k).unwrap();
        DippState::for_germ(g, &dom, 2.0 * PI * I, 200).unwrap()
    }

    #[test]
    fn dipp_examples() {
        let one = ExpSum::from_pairs([(1.0, c(1.0, 0.0))]).unwrap();
        let st = dipp_state(&one, 1.0);
        let w = c(-8.0, 0.0);
        let r = dipp_sum(&ExpSumJump { g: &one, c_norm: st.c_norm }, &st, w).unwrap();
        assert!((r.value - w.exp()).norm() <= 1e-6 * w.exp().norm(), "{:?}", r.value);
        let zero = ExpSum::zero();
        let st0 = dipp_state(&zero, 1.0);
        let r0 = dipp_sum(&ExpSumJump { g: &zero, c_norm: st0.c_norm }, &st0, w).unwrap();
        assert_eq!(r0.value, c(0.0, 0.0));
        assert!(dipp_sum(&ExpSumJump { g: &one, c_norm: st.c_norm }, &st, c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn dipp_term_ratios() {
        let g = ExpSum::from_pairs([(0.7, c(1.0, 0.0)), (1.9, c(-1.0, 0.0)), (3.1, c(0.5, 0.0))]).unwrap();
        for k in [1.0, 2.0] {
            let st = dipp_state(&g, k);
            let w = c(-9.0, 1.0);
            let r = dipp_sum(&ExpSumJump { g: &g, c_norm: st.c_norm }, &st, w).unwrap();
            assert!((r.value - g.eval(w)).norm() <= 1e-8 * g.eval(w).norm().max(1e-12));
            let bound = 1.1 * st.ratio_bound(w);
            let late: Vec<&DippTerm> = r.terms.iter().filter(|t| t.t_n > 4.0 && t.size > 0.0).collect();
            assert!(late.windows(2).all(|p| p[1].size <= bound * p[0].size), "k={k}");
        }
    }

    #[test]
    fn evanescent() {
        let g = ExpSum::from_pairs([(0.7, c(1.0, 0.0)), (1.9, c(-1.0, 0.0)), (3.1, c(0.5, 0.0))]).unwrap();
        let st = dipp_state(&g, 1.0);
        let w = c(-7.5, 0.5);
        for n in 1..=10 {
            let e = evanescent_sum(&g, &st, n, w).unwrap();
            assert!((e.by_parts - e.closed).norm() <= 1e-10 * g.eval(w).norm().max(1e-6));
        }
        // nothing below t_n: pure border polynomial
        let late = ExpSum::from_pairs([(5.0, c(1.0, 0.0))]).unwrap();
        let stl = dipp_state(&late, 1.0);
        assert_eq!(evanescent_closed_form(&late, &stl, 2, w).unwrap(), c(0.0, 0.0));
        // |g - S~_n g| = O(e^{t_n Re w}) up to a polynomial in |w|: slope in Re w tends to t_n
        let one = ExpSum::from_pairs([(1.0, c(1.0, 0.0))]).unwrap();
        let st1 = dipp_state(&one, 1.0);
        let w = c(-6.0, 0.0);
        let err = evanescent_error(&one, &st1, 6, w).unwrap();
        let exact = (one.eval(w) - evanescent_closed_form(&one, &st1, 6, w).unwrap()).norm();
        assert!((err - exact).abs() <= 1e-12 + 1e-6 * exact);
        let (x0, x1) = (-30.0, -60.0);
        let e0 = evanescent_error(&one, &st1, 6, c(x0, 0.5)).unwrap();
        let e1 = evanescent_error(&one, &st1, 6, c(x1, 0.5)).unwrap();
        let slope = (e1.ln() - e0.ln()) / (x1 - x0);
        assert!((slope - st1.t(6)).abs() <= 0.1 * st1.t(6), "slope {slope}");
    }

    #[test]
    fn dipp_matches_direct_inverse() {
        let g = ExpSum::from_pairs([(0.7, c(1.0, 0.0)), (1.9, c(-1.0, 0.0))]).unwrap();
        let dom = DomainProfile::logarithmic(-1.0, 1.0).unwrap();
        let st = DippState::for_germ(&g, &dom, 2.0 * PI * I, 200).unwrap();
        let cfg = LaplaceConfig::at_vertex(dom, 1e-10).unwrap();
        let icfg = InverseConfig::for_slope(1.0, 1e-9).unwrap();
        let image = LaplaceImage { g: &g, cfg: &cfg };
        let w = c(-8.5, 0.5);
        let (angle, _) = best_angle(&image, icfg.eps, w, icfg.v_angle).unwrap();
        let direct = inverse_laplace(&image, &InverseConfig { v_angle: angle, ..icfg }, w).unwrap().value;
        let d = dipp_sum(&ExpSumJump { g: &g, c_norm: st.c_norm }, &st, w).unwrap().value;
        let s = evanescent_closed_form(&g, &st, 60, w).unwrap();
        assert!((d - direct).norm() < 1e-5 && (s - d).norm() < 1e-5);
    }

    #[test]
    fn convergence_table() {
        let g = ExpSum::from_pairs([(0.7, c(1.0, 0.0)), (1.9, c(-1.0, 0.0)), (3.1, c(0.5, 0.0))]).unwrap();
        let st = dipp_state(&g, 1.0);
        let grid: Vec<Complex64> = (0..10).map(|i| c(-7.0 - 0.3 * i as f64, -1.0 + 0.2 * i as f64)).collect();
        let rep = convergence_report(&g, &st, &grid, 1..=10).unwrap();
        assert!(rep.final_ok && rep.monotone, "{rep:?}");
        assert!(rep.to_csv().lines().count() == 11);
        let zero = ExpSum::zero();
        let rep0 = convergence_report(&zero, &dipp_state(&zero, 1.0), &grid, 1..=5).unwrap();
        assert!(rep0.rows.iter().all(|r| r.max_err == 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn border_polynomial_fades(beta in 0.0f64..3.0, re in -12.0f64..-8.0, im in -1.0f64..1.0) {
            let g = ExpSum::from_pairs([(beta, c(1.0, 0.0))]).unwrap();
            let st = dipp_state(&g, 1.0);
            let w = c(re, im);
            let e1 = evanescent_error(&g, &st, 6, w).unwrap();
            let e2 = evanescent_error(&g, &st, 12, w).unwrap();
            prop_assert!(e2 <= e1 + 1e-300);
        }
    }
}
