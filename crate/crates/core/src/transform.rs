//! Forward Laplace transform of germs, its inverse along hairpin contours and
//! the identities relating them.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{fmt_c, Error, Result};
use crate::geometry::{n_distance, DomainProfile};
use crate::germs::{ExpSum, Germ, LogKernel};
use crate::quadrature::{integrate, Contour, PathPiece, QuadOptions, QuadResult};
use crate::report::{Report, ReportRow};

/// Panel length along the hairpin rays, shared by all `w` so that node values can be reused.
const INVERSE_PANEL: f64 = 1.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone)]
pub struct LaplaceConfig {
    /// Real base point inside the domain.
    pub w0: f64,
    pub domain: DomainProfile,
    /// Tolerance relative to the peak modulus of the integrand.
    pub tol: f64,
    /// Smallest admissible `N(p)`.
    pub axis_floor: f64,
}

impl LaplaceConfig {
    pub fn new(w0: f64, domain: DomainProfile, tol: f64) -> Result<Self> {
        domain.validate()?;
        if !w0.is_finite() || !domain.contains(Complex64::new(w0, 0.0)) {
            return Err(Error::OutsideDomain(format!("base point {w0}")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        Ok(LaplaceConfig { w0, domain, tol, axis_floor: 1e-9 })
    }

    /// Base point at the rightmost real point of the domain.
    pub fn at_vertex(domain: DomainProfile, tol: f64) -> Result<Self> {
        let w0 = domain
            .sup_real()
            .ok_or_else(|| Error::InvalidDomain("domain has no rightmost real point".into()))?;
        Self::new(w0, domain, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseConfig {
    pub eps: f64,
    /// Half-angle of the hairpin; `roundtrip` searches `(0, v_angle]`.
    pub v_angle: f64,
    /// Absolute tolerance on the returned value.
    pub tol: f64,
}

impl InverseConfig {
    pub fn new(eps: f64, v_angle: f64, tol: f64) -> Result<Self> {
        if !(eps > 0.0) || !(v_angle > 0.0 && v_angle <= FRAC_PI_2) || !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("eps={eps}, v_angle={v_angle}, tol={tol}")));
        }
        Ok(InverseConfig { eps, v_angle, tol })
    }

    /// `eps = 0.5 / k`.
    pub fn for_slope(k: f64, tol: f64) -> Result<Self> {
        Self::new(0.5 / k.max(0.5), FRAC_PI_4, tol)
    }
}

/// Upper or lower half `C^+` / `C^-` of a logarithmic curve, both run from the real axis outward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Upper,
    Lower,
}

/// `w(y) = -a - k log(1 + |y|) + iy`; `k = 0` gives a vertical line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCurve {
    pub a: f64,
    pub k: f64,
}

impl LogCurve {
    pub fn new(a: f64, k: f64) -> Result<Self> {
        if !a.is_finite() || !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidInput(format!("curve needs finite a and k >= 0, got a={a}, k={k}")));
        }
        Ok(LogCurve { a, k })
    }

    /// Real crossing point `-a`.
    pub fn base(&self) -> f64 {
        -self.a
    }

    pub fn point(&self, y: f64) -> Complex64 {
        PathPiece::log_curve_point(self.a, self.k, y)
    }

    pub fn inside(&self, h: &DomainProfile) -> bool {
        match *h {
            DomainProfile::Logarithmic(d) => -self.a <= d.a && self.k >= d.k,
            DomainProfile::Straight { a } => -self.a <= a,
            DomainProfile::LogType { w0, k } => -self.a <= w0 && self.k >= k,
            DomainProfile::Custom(_) => (0..400).all(|i| {
                let y = 0.05 * f64::from(i) * f64::from(i);
                h.contains(self.point(y))
            }),
        }
    }
}

/// Integration path for the forward transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForwardPath {
    /// `[w0, w1]` followed by the ray from `w1` with unit direction `direction`.
    Broken { w1: f64, direction: Complex64 },
    /// Half of the logarithmic curve through `w0` with the domain's slope.
    Curve(Half),
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    path: ForwardPath,
    log_peak: f64,
    rate: f64,
}

fn broken_candidate(cfg: &LaplaceConfig, p: Complex64, dev: f64, up: bool) -> Option<Candidate> {
    let direction = Complex64::from_polar(1.0, if up { PI - dev } else { PI + dev });
    let rate = (p * direction).re;
    if !(rate > 0.0) {
        return None;
    }
    let vertex = if dev == 0.0 {
        cfg.w0
    } else if (dev - FRAC_PI_2).abs() < 1e-15 {
        match cfg.domain {
            DomainProfile::Straight { a } => a,
            _ => return None,
        }
    } else {
        cfg.domain.theta_inverse(dev).ok()?
    };
    let w1 = cfg.w0.min(vertex);
    let log_peak = (-p.re * cfg.w0).max(-p.re * w1);
    Some(Candidate { path: ForwardPath::Broken { w1, direction }, log_peak, rate })
}

fn curve_for(cfg: &LaplaceConfig) -> Option<LogCurve> {
    let k = match cfg.domain {
        DomainProfile::Logarithmic(d) => d.k,
        DomainProfile::LogType { k, .. } => k,
        _ => return None,
    };
    let curve = LogCurve { a: -cfg.w0, k };
    curve.inside(&cfg.domain).then_some(curve)
}

fn curve_candidate(cfg: &LaplaceConfig, p: Complex64) -> Option<Candidate> {
    let curve = curve_for(cfg)?;
    if p.im == 0.0 {
        return None;
    }
    let delta = p.im.abs();
    let s = curve.k * p.re;
    let bump = if s > delta { s * (s / delta).ln() - s + delta } else { 0.0 };
    let half = if p.im < 0.0 { Half::Upper } else { Half::Lower };
    Some(Candidate { path: ForwardPath::Curve(half), log_peak: -p.re * cfg.w0 + bump, rate: delta })
}

fn candidates(cfg: &LaplaceConfig, p: Complex64) -> Vec<Candidate> {
    let mut out = Vec::new();
    let n = 96;
    for i in 0..=n {
        let dev = FRAC_PI_2 * f64::from(i) / f64::from(n);
        for up in [true, false] {
            if let Some(c) = broken_candidate(cfg, p, dev, up) {
                out.push(c);
            }
        }
    }
    out.extend(curve_candidate(cfg, p));
    out
}

fn cost(c: &Candidate) -> f64 {
    c.log_peak - c.rate.min(1.0).ln()
}

/// Admissible paths for `p`, cheapest first.
pub fn admissible_paths(cfg: &LaplaceConfig, p: Complex64) -> Vec<ForwardPath> {
    let mut c = candidates(cfg, p);
    c.sort_by(|x, y| cost(x).total_cmp(&cost(y)));
    c.into_iter().map(|c| c.path).collect()
}

fn check_p(cfg: &LaplaceConfig, p: Complex64) -> Result<()> {
    if !p.re.is_finite() || !p.im.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite p {}", fmt_c(p))));
    }
    let nd = n_distance(p);
    if nd < cfg.axis_floor || nd == 0.0 {
        return Err(Error::TooCloseToAxis(fmt_c(p), nd));
    }
    Ok(())
}

/// `L_{w0} g(p)` along the cheapest admissible path.
pub fn laplace(g: &dyn Germ, cfg: &LaplaceConfig, p: Complex64) -> Result<QuadResult> {
    check_p(cfg, p)?;
    let mut c = candidates(cfg, p);
    c.sort_by(|x, y| cost(x).total_cmp(&cost(y)));
    let best = c
        .first()
        .ok_or_else(|| Error::NoAdmissibleRay(format!("p = {}", fmt_c(p))))?;
    laplace_along(g, cfg, p, best.path)
}

/// `L_{w0} g(p)` along a prescribed path.
pub fn laplace_along(g: &dyn Germ, cfg: &LaplaceConfig, p: Complex64, path: ForwardPath) -> Result<QuadResult> {
    check_p(cfg, p)?;
    match path {
        ForwardPath::Broken { w1, direction } => {
            if w1 > cfg.w0 || !cfg.domain.contains(Complex64::new(w1, 0.0)) {
                return Err(Error::OutsideDomain(format!("corner {w1}")));
            }
            let rate = (p * direction).re;
            if !(rate > 0.0) {
                return Err(Error::NonDecayingRay(rate));
            }
            let bound = g.modulus_bound(cfg.w0);
            if bound == 0.0 {
                return Ok(QuadResult::zero());
            }
            let z1 = Complex64::new(w1, 0.0);
            let peak = bound * (-p.re * cfg.w0).max(-p.re * w1).exp();
            let abs_tol = cfg.tol * peak;
            let mut pieces = Vec::new();
            if w1 < cfg.w0 {
                pieces.push(PathPiece::segment(Complex64::new(cfg.w0, 0.0), z1));
            }
            let decay_const = g.modulus_bound(w1) * (-(p * z1).re).exp();
            pieces.push(PathPiece::Ray { origin: z1, direction, decay_rate: rate, decay_const });
            let contour = Contour::new(pieces)?;
            let span = 1.0 + p.norm();
            let opts = QuadOptions { abs_tol, rel_tol: 0.0, max_panels: 1_000_000, max_panel_len: (6.0 / span).min(2.0) };
            integrate(|w| g.eval(w) * (-p * w).exp(), &contour, &opts)?.require(abs_tol)
        }
        ForwardPath::Curve(half) => {
            let curve = curve_for(cfg).ok_or_else(|| Error::NoAdmissibleRay("domain has no logarithmic curve".into()))?;
            let expected = if p.im < 0.0 { Half::Upper } else { Half::Lower };
            if p.im == 0.0 || half != expected {
                return Err(Error::Divergent(format!("curve half {half:?} for p = {}", fmt_c(p))));
            }
            let c = curve_candidate(cfg, p).expect("curve candidate exists when the curve does");
            let tol = cfg.tol * g.modulus_bound(cfg.w0) * c.log_peak.exp();
            if tol == 0.0 {
                return Ok(QuadResult::zero());
            }
            curve_integral(g, curve, half, p, 0, tol)
        }
    }
}

/// `L g(p)` along the half of `curve` on which `e^{-pw}` decays.
pub fn laplace_via_log_curve(g: &dyn Germ, curve: LogCurve, p: Complex64, tol: f64) -> Result<QuadResult> {
    if p.im == 0.0 {
        return Err(Error::TooCloseToAxis(fmt_c(p), 0.0));
    }
    let half = if p.im < 0.0 { Half::Upper } else { Half::Lower };
    curve_integral(g, curve, half, p, 0, tol)
}

/// `int g(w) w^{-m} e^{-pw} dw` along one half of `curve`, from the real axis outward,
/// with a certified bound on the discarded tail.
pub fn curve_integral(
    g: &dyn Germ,
    curve: LogCurve,
    half: Half,
    p: Complex64,
    m: usize,
    tol: f64,
) -> Result<QuadResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let sign = match half {
        Half::Upper => 1.0,
        Half::Lower => -1.0,
    };
    let delta = -sign * p.im;
    if delta < 0.0 {
        return Err(Error::Divergent(format!("e^(-pw) grows along this half for p = {}", fmt_c(p))));
    }
    if m > 0 && curve.point(0.0).norm() < 1.0 {
        return Err(Error::Precondition("weighted curve integrals need the curve in Re w <= -1".into()));
    }
    let k = curve.k;
    let s_inf = k * p.re - k * g.decay_rate() - m as f64;
    // modulus envelope of the integrand at height y >= 1, after which it decays at least like
    // ((1 + y) / (1 + Y))^s_inf e^{-delta (y - Y)}
    let envelope = |y: f64| {
        let w = curve.point(y);
        let jac = (1.0 + (k / (1.0 + y)).powi(2)).sqrt();
        g.modulus_bound(w.re) * (-p.re * w.re - delta * y).exp() * jac * y.powi(-(m as i32))
    };
    let tail = |y: f64| {
        let e = envelope(y);
        if e == 0.0 {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        if s_inf < -1.0 {
            best = e * (1.0 + y) / (-s_inf - 1.0);
        }
        let denom = delta - s_inf.max(0.0) / (1.0 + y);
        if denom > 0.0 {
            best = best.min(e / denom);
        }
        best
    };
    let tail_tol = 0.25 * tol;
    let mut y_hi = 1.0;
    while !(tail(y_hi) <= tail_tol) {
        y_hi *= 2.0;
        if y_hi > 1e9 {
            return Err(Error::Divergent(format!(
                "curve tail does not fall below {tail_tol:.3e} for p = {}, m = {m}",
                fmt_c(p)
            )));
        }
    }
    let mut y_lo = if y_hi > 1.0 { 0.5 * y_hi } else { y_hi };
    if y_lo < y_hi {
        for _ in 0..40 {
            let mid = 0.5 * (y_lo + y_hi);
            if tail(mid) <= tail_tol {
                y_hi = mid;
            } else {
                y_lo = mid;
            }
        }
    }
    let piece = PathPiece::LogCurve { a: curve.a, k, y0: 0.0, y1: sign * y_hi };
    let span = 1.0 + p.norm() * (1.0 + k);
    let opts = QuadOptions {
        abs_tol: 0.75 * tol,
        rel_tol: 0.0,
        max_panels: 400_000,
        max_panel_len: (6.0 / span).min(2.0),
    };
    let mi = m as i32;
    let mut res = integrate(|w| g.eval(w) * w.powi(-mi) * (-p * w).exp(), &Contour::new(vec![piece])?, &opts)?;
    res.err_est += tail(y_hi);
    res.require(tol)
}

/// Representative of a hyperfunction: a holomorphic function off the positive axis
/// with growth bounds along rays.
pub trait Representative {
    fn eval(&self, p: Complex64) -> Result<Complex64>;

    /// `(C, r)` with `|h(q + t u)| <= C e^{r t}` for all `t >= 0`.
    fn ray_growth(&self, q: Complex64, u: Complex64) -> Result<(f64, f64)>;
}

/// Smallest value of `N(p)` along the ray `q + t u`.
pub fn ray_min_n(q: Complex64, u: Complex64) -> f64 {
    let mut ts = vec![0.0];
    if u.re != 0.0 {
        let t = -q.re / u.re;
        if t > 0.0 {
            ts.push(t);
        }
    }
    if u.im != 0.0 {
        let t = -q.im / u.im;
        if t > 0.0 {
            ts.push(t);
        }
    }
    let t = -(q * u.conj()).re;
    if t > 0.0 {
        ts.push(t);
    }
    let mut best = ts.iter().map(|&t| n_distance(q + u * t)).fold(f64::INFINITY, f64::min);
    if u.re > 0.0 {
        best = best.min(if u.im == 0.0 { q.im.abs() } else { f64::INFINITY });
    }
    best
}

fn ray_point_distance(q: Complex64, u: Complex64, z: Complex64) -> f64 {
    let t = ((z - q) * u.conj()).re.max(0.0);
    (q + u * t - z).norm()
}

/// Transform of an exponential sum in closed form, based at `w0`.
#[derive(Debug, Clone)]
pub struct ClosedFormImage {
    pub g: ExpSum,
    pub w0: f64,
}

impl Representative for ClosedFormImage {
    fn eval(&self, p: Complex64) -> Result<Complex64> {
        self.g.laplace_closed_form(Complex64::new(self.w0, 0.0), p)
    }

    fn ray_growth(&self, q: Complex64, u: Complex64) -> Result<(f64, f64)> {
        let mut c = 0.0;
        for t in self.g.terms() {
            let d = ray_point_distance(q, u, Complex64::new(t.beta, 0.0));
            if d == 0.0 {
                return Err(Error::PoleProximity(fmt_c(q), 0.0));
            }
            c += t.coeff.norm() * ((t.beta - q.re) * self.w0).exp() / d;
        }
        Ok((c, -self.w0 * u.re))
    }
}

impl Representative for LogKernel {
    fn eval(&self, p: Complex64) -> Result<Complex64> {
        LogKernel::eval(self, p)
    }

    fn ray_growth(&self, q: Complex64, u: Complex64) -> Result<(f64, f64)> {
        let d0 = ray_point_distance(q, u, Complex64::new(0.0, 0.0));
        if ray_min_n(q, u) == 0.0 || d0 == 0.0 {
            return Err(Error::TooCloseToAxis(fmt_c(q), 0.0));
        }
        // |log p| <= 2 pi + |ln d0| + ln(1 + |q|) + ln(1 + t), and ln(1 + t) <= eta t + ln(1 / eta)
        let eta: f64 = 1e-2;
        let c = (-(self.z * q).re).exp() * (2.0 * PI + d0.ln().abs() + (1.0 + q.norm()).ln() + (1.0 / eta).ln());
        Ok((c, -(self.z * u).re + eta))
    }
}

/// The entire function `e^{c p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntireExp {
    pub c: f64,
}

impl Representative for EntireExp {
    fn eval(&self, p: Complex64) -> Result<Complex64> {
        Ok((p * self.c).exp())
    }

    fn ray_growth(&self, q: Complex64, u: Complex64) -> Result<(f64, f64)> {
        Ok(((self.c * q.re).exp(), self.c * u.re))
    }
}

/// `factor * h`.
pub struct Scaled<'a> {
    pub inner: &'a dyn Representative,
    pub factor: Complex64,
}

impl Representative for Scaled<'_> {
    fn eval(&self, p: Complex64) -> Result<Complex64> {
        Ok(self.inner.eval(p)? * self.factor)
    }

    fn ray_growth(&self, q: Complex64, u: Complex64) -> Result<(f64, f64)> {
        let (c, r) = self.inner.ray_growth(q, u)?;
        Ok((c * self.factor.norm(), r))
    }
}

/// Numerical transform `L_{w0} g`, with the growth certificate of the forward estimate.
pub struct LaplaceImage<'a> {
    pub g: &'a dyn Germ,
    pub cfg: &'a LaplaceConfig,
}

impl LaplaceImage<'_> {
    /// Vertex `Theta^{-1}(pi/2 - theta)` and bound `4 ||g|| e^{-w Re p} / N(p)`, `p` outside the
    /// closed cone of half-opening `theta`.
    pub fn forward_bound(&self, theta: f64, p: Complex64) -> Result<f64> {
        let w = self.cfg.domain.theta_inverse(FRAC_PI_2 - theta)?;
        let norm = self.g.sup_bound(&self.cfg.domain)?;
        Ok(4.0 * norm * (-w * p.re).exp() / n_distance(p))
    }
}

impl Representative for LaplaceImage<'_> {
    fn eval(&self, p: Complex64) -> Result<Complex64> {
        Ok(laplace(self.g, self.cfg, p)?.value)
    }

    fn ray_growth(&self, q: Complex64, u: Complex64) -> Result<(f64, f64)> {
        let nmin = ray_min_n(q, u);
        let theta_ray = q.arg().abs().min(u.arg().abs());
        if !(nmin > 0.0) || !(theta_ray > 0.0) {
            return Err(Error::TooCloseToAxis(fmt_c(q), nmin));
        }
        let theta = theta_ray.min(FRAC_PI_4) * (1.0 - 1e-9);
        let wv = self.cfg.domain.theta_inverse(FRAC_PI_2 - theta)?;
        let norm = self.g.sup_bound(&self.cfg.domain)?;
        let wb = self.cfg.w0;
        let gap = (wb - wv).abs();
        // L_{wb} = L_{wv} + segment [wb, wv]
        let c1 = norm * (4.0 / nmin + gap) * (-wv * q.re).exp();
        let c2 = norm * gap * (-wb * q.re).exp();
        Ok((c1 + c2, (-wv * u.re).max(-wb * u.re)))
    }
}

/// Caches the values of a representative by the exact bits of `p`.
pub struct Memo<'a> {
    inner: &'a dyn Representative,
    cache: RefCell<HashMap<(u64, u64), Complex64>>,
}

impl<'a> Memo<'a> {
    pub fn new(inner: &'a dyn Representative) -> Self {
        Memo { inner, cache: RefCell::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.cache.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Representative for Memo<'_> {
    fn eval(&self, p: Complex64) -> Result<Complex64> {
        let key = (p.re.to_bits(), p.im.to_bits());
        if let Some(v) = self.cache.borrow().get(&key) {
            return Ok(*v);
        }
        let v = self.inner.eval(p)?;
        self.cache.borrow_mut().insert(key, v);
        Ok(v)
    }

    fn ray_growth(&self, q: Complex64, u: Complex64) -> Result<(f64, f64)> {
        self.inner.ray_growth(q, u)
    }
}

fn ray_decay(h: &dyn Representative, q: Complex64, u: Complex64, w: Complex64) -> Result<(f64, f64)> {
    let (c, r) = h.ray_growth(q, u)?;
    let rate = -(r + (u * w).re);
    Ok((c * (q * w).re.exp(), rate))
}

/// `(1/2i pi) [int_{R(-eps, conj v)} - int_{R(-eps, v)}] h(p) e^{pw} dp`, `v = e^{i v_angle}`.
pub fn inverse_laplace(h: &dyn Representative, icfg: &InverseConfig, w: Complex64) -> Result<QuadResult> {
    let q = Complex64::new(-icfg.eps, 0.0);
    let v = Complex64::from_polar(1.0, icfg.v_angle);
    let mut total = QuadResult::zero();
    for (u, sign) in [(v.conj(), 1.0), (v, -1.0)] {
        let (c, rate) = ray_decay(h, q, u, w)?;
        if !(rate > 0.0) {
            return Err(Error::NoAdmissibleRay(format!(
                "w = {} is outside the convergence cone of angle {}",
                fmt_c(w),
                icfg.v_angle
            )));
        }
        let piece = PathPiece::Ray { origin: q, direction: u, decay_rate: rate, decay_const: c };
        let opts = QuadOptions {
            abs_tol: PI * icfg.tol,
            rel_tol: 0.0,
            max_panels: 20_000,
            max_panel_len: INVERSE_PANEL,
        };
        let mut failure = None;
        let res = integrate(
            |p| match h.eval(p) {
                Ok(v) => v * (p * w).exp(),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(f64::NAN, f64::NAN)
                }
            },
            &Contour::new(vec![piece])?,
            &opts,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        total += res.scale(Complex64::new(sign, 0.0));
    }
    total.scale((2.0 * PI * I).inv()).require(icfg.tol)
}

/// Hairpin angle in `(0, cap]` maximizing the slower of the two ray decay rates at `w`.
pub fn best_angle(h: &dyn Representative, eps: f64, w: Complex64, cap: f64) -> Result<(f64, f64)> {
    let q = Complex64::new(-eps, 0.0);
    let mut best: Option<(f64, f64)> = None;
    let n = 8;
    for i in 1..=n {
        let th = cap * f64::from(i) / f64::from(n);
        let v = Complex64::from_polar(1.0, th);
        let rate = match (ray_decay(h, q, v, w), ray_decay(h, q, v.conj(), w)) {
            (Ok((_, r1)), Ok((_, r2))) => r1.min(r2),
            _ => continue,
        };
        if best.is_none_or(|b| rate > b.1) {
            best = Some((th, rate));
        }
    }
    match best {
        Some(b) if b.1 > 0.0 => Ok(b),
        _ => Err(Error::NoAdmissibleRay(format!("no hairpin converges at w = {}", fmt_c(w)))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripPoint {
    pub w: Complex64,
    pub value: Complex64,
    pub exact: Complex64,
    pub error: f64,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripReport {
    pub points: Vec<RoundtripPoint>,
    pub max_abs_error: f64,
}

/// `L^{-1} L g` against `g` on a grid inside `-1 + H`.
pub fn roundtrip(g: &dyn Germ, cfg: &LaplaceConfig, icfg: &InverseConfig, grid: &[Complex64]) -> Result<RoundtripReport> {
    let shifted = cfg.domain.shifted(-1.0);
    if let Some(w) = grid.iter().find(|w| !shifted.contains(**w)) {
        return Err(Error::OutsideDomain(format!("{} is not in -1 + H", fmt_c(*w))));
    }
    let direct = LaplaceImage { g, cfg };
    let image = Memo::new(&direct);
    let mut points = Vec::with_capacity(grid.len());
    for &w in grid {
        let (angle, _) = best_angle(&image, icfg.eps, w, icfg.v_angle)?;
        let local = InverseConfig { v_angle: angle, ..*icfg };
        let value = inverse_laplace(&image, &local, w)?.value;
        let exact = g.eval(w);
        points.push(RoundtripPoint { w, value, exact, error: (value - exact).norm(), angle });
    }
    let max_abs_error = points.iter().map(|p| p.error).fold(0.0, f64::max);
    Ok(RoundtripReport { points, max_abs_error })
}

/// Checks `|L_{w0} g(p) - L_{w0,w1} g(p)| <= 4 ||g|| e^{-w0 Re p - Re(w01 p)} / N(p)` with
/// `w0 = Theta^{-1}(pi/2 - theta)` and `w1 = w0 + w01` in the cone `C_-(w0, pi/2 - theta)`.
/// `norm_scale` multiplies `||g||` on the right-hand side.
pub fn verify_forward_bound(
    g: &ExpSum,
    domain: &DomainProfile,
    samples: &[(f64, Complex64, Complex64)],
    norm_scale: f64,
) -> Result<Report> {
    let norm = g.sup_bound(domain)?;
    let mut rep = Report::default();
    for &(theta, w01, p) in samples {
        if !(theta > 0.0 && theta < FRAC_PI_4) {
            return Err(Error::AngleOutOfRange(theta));
        }
        if p.arg().abs() <= theta || n_distance(p) == 0.0 {
            return Err(Error::Precondition(format!("p = {} lies in the closed cone of angle {theta}", fmt_c(p))));
        }
        let w0 = domain.theta_inverse(FRAC_PI_2 - theta)?;
        // L_{w0} - L_{w0,w1} is the transform based at w1
        let lhs = g.laplace_closed_form(Complex64::new(w0, 0.0) + w01, p)?.norm();
        let rhs = 4.0 * norm * norm_scale * (-w0 * p.re - (w01 * p).re).exp() / n_distance(p);
        rep.rows.push(ReportRow::new(p, lhs, rhs, 1e-6));
    }
    Ok(rep)
}

/// Checks `|L^{-1} h(w)| <= 2 norm_est` on samples of the domain attached to `h`.
pub fn verify_inverse_bound(
    h: &dyn Representative,
    norm_est: f64,
    icfg: &InverseConfig,
    w_samples: &[Complex64],
) -> Result<Report> {
    let h = Memo::new(h);
    let h = &h;
    let mut rep = Report::default();
    for &w in w_samples {
        let (angle, _) = best_angle(h, icfg.eps, w, icfg.v_angle)?;
        let local = InverseConfig { v_angle: angle, ..*icfg };
        let lhs = inverse_laplace(h, &local, w)?.value.norm();
        rep.rows.push(ReportRow::new(w, lhs, 2.0 * norm_est, 1e-6));
    }
    Ok(rep)
}

/// `f(t + i0) - f(t - i0)`, extrapolated from `delta = 2^-6 .. 2^-12`.
pub fn boundary_jump<F: FnMut(Complex64) -> Result<Complex64>>(mut f: F, t: f64) -> Result<Complex64> {
    let mut table: Vec<Complex64> = Vec::new();
    for j in 6..=12 {
        let d = 2f64.powi(-j);
        table.push(f(Complex64::new(t, d))? - f(Complex64::new(t, -d))?);
    }
    // Richardson in delta with halving steps, error expansion in integer powers
    let mut row = table;
    let mut factor = 2.0;
    while row.len() > 1 {
        row = row.windows(2).map(|x| (x[1] * factor - x[0]) / (factor - 1.0)).collect();
        factor *= 2.0;
        if factor > 16.0 {
            break;
        }
    }
    Ok(*row.last().expect("non-empty table"))
}

/// `g(w) / w^m`, for germs on domains inside `Re w <= -1`.
pub struct PowerWeighted<'a> {
    pub g: &'a dyn Germ,
    pub m: i32,
}

impl Germ for PowerWeighted<'_> {
    fn eval(&self, w: Complex64) -> Complex64 {
        self.g.eval(w) * w.powi(-self.m)
    }

    fn modulus_bound(&self, x: f64) -> f64 {
        self.g.modulus_bound(x) / x.abs().max(1.0).powi(self.m)
    }

    fn decay_rate(&self) -> f64 {
        self.g.decay_rate()
    }

    fn sup_bound(&self, h: &DomainProfile) -> Result<f64> {
        self.g.sup_bound(h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_residual: f64,
    pub pass: bool,
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// `L(e^{a w} g)(p) = L g(p - a)`.
pub fn check_translation(g: &ExpSum, a: f64, cfg: &LaplaceConfig, p: Complex64) -> Result<f64> {
    let shifted = g.shift(a)?;
    let lhs = laplace(&shifted, cfg, p)?.value;
    let rhs = laplace(g, cfg, p - a)?.value;
    Ok(rel(lhs, rhs))
}

/// `L(g')(p) = -g(w0) e^{-p w0} + p L g(p)`.
pub fn check_derivative(g: &ExpSum, cfg: &LaplaceConfig, p: Complex64) -> Result<f64> {
    let dg = ExpSum::new(g.terms().iter().map(|t| crate::germs::ExpTerm::new(t.beta, t.coeff * t.beta)).collect())?;
    let w0 = Complex64::new(cfg.w0, 0.0);
    let lhs = laplace(&dg, cfg, p)?.value;
    let rhs = -g.eval(w0) * (-p * w0).exp() + p * laplace(g, cfg, p)?.value;
    Ok(rel(lhs, rhs))
}

/// The primitive vanishing at -infinity; undefined when a constant term is present.
pub fn primitive(g: &ExpSum) -> Result<ExpSum> {
    if g.terms().iter().any(|t| t.beta == 0.0 && t.coeff != Complex64::new(0.0, 0.0)) {
        return Err(Error::Precondition("the primitive of a constant term does not vanish at -infinity".into()));
    }
    ExpSum::new(
        g.terms()
            .iter()
            .filter(|t| t.beta > 0.0)
            .map(|t| crate::germs::ExpTerm::new(t.beta, t.coeff / t.beta))
            .collect(),
    )
}

/// `L(Ig)(p) = L g(p) / p` up to the entire term `Ig(w0) e^{-p w0} / p`.
pub fn check_primitive(g: &ExpSum, cfg: &LaplaceConfig, p: Complex64) -> Result<f64> {
    let ig = primitive(g)?;
    let w0 = Complex64::new(cfg.w0, 0.0);
    let lhs = laplace(&ig, cfg, p)?.value;
    let rhs = (laplace(g, cfg, p)?.value + ig.eval(w0) * (-p * w0).exp()) / p;
    Ok(rel(lhs, rhs))
}

/// `I L g = -L(g / w)`, checked as `-[L(g/w)(p2) - L(g/w)(p1)] = int_{p1}^{p2} L g(p) dp`.
pub fn check_division(g: &ExpSum, cfg: &LaplaceConfig, p1: Complex64, p2: Complex64) -> Result<f64> {
    match cfg.domain.sup_real() {
        Some(a) if a <= -1.0 => {}
        _ => return Err(Error::Precondition("the division identity needs H inside Re w <= -1".into())),
    }
    let gw = PowerWeighted { g, m: 1 };
    let lhs = -(laplace(&gw, cfg, p2)?.value - laplace(&gw, cfg, p1)?.value);
    let w0 = Complex64::new(cfg.w0, 0.0);
    let seg = Contour::new(vec![PathPiece::segment(p1, p2)])?;
    let mut failure = None;
    let rhs = integrate(
        |p| match g.laplace_closed_form(w0, p) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        &seg,
        &QuadOptions::with_abs(1e-13 * (1.0 + g.laplace_scale(w0, p1))),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(rel(lhs, rhs.value))
}

/// Jump of `L i_z` across the positive axis at `t`, against the jump `-2 i pi e^{-z t}` of
/// `e^{-z p} log p`.
pub fn check_cauchy_jump(z: Complex64, cfg: &LaplaceConfig, t: f64) -> Result<f64> {
    let kernel = crate::germs::CauchyKernel::new(z, &cfg.domain)?;
    let mut fine = cfg.clone();
    fine.tol = fine.tol.min(1e-11);
    fine.axis_floor = 0.0;
    let jump = boundary_jump(|p| Ok(laplace(&kernel, &fine, p)?.value), t)?;
    let lk = LogKernel::new(z);
    let expected = boundary_jump(|p| lk.eval(p), t)?;
    Ok(rel(jump, expected))
}

/// Runs every identity at the sample points; the Cauchy kernel pair is checked at `t = 1, 2`.
pub fn identity_suite(g: &ExpSum, cfg: &LaplaceConfig, samples: &[Complex64], tol: f64) -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    let mut push = |name: &'static str, vals: Vec<f64>| {
        let max_residual = vals.into_iter().fold(0.0, f64::max);
        out.push(IdentityCheck { name, max_residual, pass: max_residual <= tol });
    };
    push("translation", samples.iter().map(|&p| check_translation(g, 1.0, cfg, p)).collect::<Result<_>>()?);
    push("derivative", samples.iter().map(|&p| check_derivative(g, cfg, p)).collect::<Result<_>>()?);
    match primitive(g) {
        Ok(_) => push("primitive", samples.iter().map(|&p| check_primitive(g, cfg, p)).collect::<Result<_>>()?),
        Err(_) => push("primitive", vec![f64::INFINITY]),
    }
    if cfg.domain.sup_real().is_some_and(|a| a <= -1.0) {
        let vals = samples
            .windows(2)
            .filter(|s| {
                // the segment must avoid the positive axis
                let (a, b) = (s[0], s[1]);
                a.im * b.im > 0.0 || (a.re < 0.0 && b.re < 0.0)
            })
            .map(|s| check_division(g, cfg, s[0], s[1]))
            .collect::<Result<_>>()?;
        push("division", vals);
    }
    let z = Complex64::new(cfg.domain.sup_real().unwrap_or(0.0) + 1.5, 0.5);
    push("cauchy_kernel", [1.0, 2.0].iter().map(|&t| check_cauchy_jump(z, cfg, t)).collect::<Result<_>>()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germs::ExpTerm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(beta: f64) -> ExpSum {
        ExpSum::new(vec![ExpTerm::new(beta, c(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn forward_matches_closed_form() {
        let g = ExpSum::new(vec![ExpTerm::new(0.5, c(1.0, 0.0)), ExpTerm::new(2.2, c(-0.3, 0.7))]).unwrap();
        for dom in [DomainProfile::logarithmic(-1.0, 1.0).unwrap(), DomainProfile::straight(-1.0).unwrap()] {
            let cfg = LaplaceConfig::at_vertex(dom, 1e-12).unwrap();
            for p in [c(2.0, -1.0), c(-2.0, 0.0), c(3.0, 0.5), c(0.3, 2.0), c(-1.0, -3.0)] {
                let num = laplace(&g, &cfg, p).unwrap().value;
                let exact = g.laplace_closed_form(c(cfg.w0, 0.0), p).unwrap();
                assert!(rel(num, exact) < 1e-9, "{p}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn zero_germ_and_axis() {
        let cfg = LaplaceConfig::at_vertex(DomainProfile::logarithmic(-1.0, 2.0).unwrap(), 1e-10).unwrap();
        assert_eq!(laplace(&ExpSum::zero(), &cfg, c(1.0, 1.0)).unwrap().value, c(0.0, 0.0));
        assert!(matches!(laplace(&single(1.0), &cfg, c(2.0, 0.0)), Err(Error::TooCloseToAxis(..))));
        assert!(LaplaceConfig::new(0.0, DomainProfile::straight(-1.0).unwrap(), 1e-10).is_err());
    }

    #[test]
    fn path_independence() {
        let g = single(1.0);
        let cfg = LaplaceConfig::at_vertex(DomainProfile::logarithmic(-1.0, 1.0).unwrap(), 1e-12).unwrap();
        let p = c(1.5, 1.0);
        let paths = admissible_paths(&cfg, p);
        assert!(paths.len() > 3);
        let vals: Vec<_> = paths.iter().take(6).map(|&path| laplace_along(&g, &cfg, p, path).unwrap().value).collect();
        for v in &vals {
            assert!(rel(*v, vals[0]) < 1e-8);
        }
    }

    #[test]
    fn log_curve_agrees() {
        let g = single(1.0);
        let cfg = LaplaceConfig::at_vertex(DomainProfile::logarithmic(-1.0, 1.0).unwrap(), 1e-12).unwrap();
        let curve = LogCurve::new(1.0, 1.0).unwrap();
        let p = c(2.0, -1.0);
        let a = laplace_via_log_curve(&g, curve, p, 1e-12).unwrap().value;
        let b = laplace(&g, &cfg, p).unwrap().value;
        assert!((a - b).norm() < 1e-7);
        let conj = laplace_via_log_curve(&g, curve, p.conj(), 1e-12).unwrap().value;
        assert!((conj - a.conj()).norm() < 1e-9);
        assert_eq!(laplace_via_log_curve(&ExpSum::zero(), curve, p, 1e-12).unwrap().value, c(0.0, 0.0));
        assert!(laplace_via_log_curve(&g, curve, c(2.0, 0.0), 1e-12).is_err());
    }

    #[test]
    fn inverse_examples() {
        let icfg = InverseConfig::new(0.5, 0.5, 1e-9).unwrap();
        let z = c(0.5, 0.3);
        let lk = LogKernel::new(z);
        for w in [c(-2.0, 0.0), c(-3.0, 1.0), c(-1.5, -0.5)] {
            let (angle, _) = best_angle(&lk, 0.5, w, FRAC_PI_2).unwrap();
            let v = inverse_laplace(&lk, &InverseConfig { v_angle: angle, ..icfg }, w).unwrap().value;
            assert!((v - (z - w).inv()).norm() < 1e-7, "{w}: {v}");
        }
        let e = EntireExp { c: 0.3 };
        let w = c(-2.0, 0.5);
        let v = inverse_laplace(&e, &icfg, w).unwrap().value;
        assert!(v.norm() < 1e-9);
        let g = single(1.3);
        let h = ClosedFormImage { g: g.clone(), w0: 0.0 };
        let w = c(-2.0, 0.4);
        let v = inverse_laplace(&h, &icfg, w).unwrap().value;
        assert!((v - g.eval(w)).norm() < 1e-7);
        assert!(inverse_laplace(&h, &icfg, c(3.0, 0.0)).is_err());
    }

    #[test]
    fn roundtrip_constant() {
        let g = single(0.0);
        let dom = DomainProfile::logarithmic(-1.0, 1.0).unwrap();
        let cfg = LaplaceConfig::at_vertex(dom, 1e-12).unwrap();
        let icfg = InverseConfig::for_slope(1.0, 1e-9).unwrap();
        let grid = [c(-2.5, 0.0), c(-4.0, 1.5), c(-3.0, -0.5)];
        let rep = roundtrip(&g, &cfg, &icfg, &grid).unwrap();
        assert!(rep.max_abs_error < 1e-6, "{rep:?}");
        assert!(roundtrip(&g, &cfg, &icfg, &[c(-1.5, 0.0)]).is_err());
    }

    #[test]
    fn identities() {
        let cfg = LaplaceConfig::at_vertex(DomainProfile::straight(-1.0).unwrap(), 1e-12).unwrap();
        let g = single(0.5);
        assert!(check_translation(&g, 1.0, &cfg, c(2.0, 1.0)).unwrap() < 1e-8);
        assert!(check_derivative(&single(1.0), &cfg, c(-2.0, 0.0)).unwrap() < 1e-8);
        assert!(check_primitive(&g, &cfg, c(1.0, -1.0)).unwrap() < 1e-8);
        assert!(matches!(check_primitive(&single(0.0), &cfg, c(1.0, 1.0)), Err(Error::Precondition(_))));
        assert!(check_division(&g, &cfg, c(1.0, 1.0), c(-1.0, 2.0)).unwrap() < 1e-8);
        let cfg0 = LaplaceConfig::at_vertex(DomainProfile::straight(0.0).unwrap(), 1e-12).unwrap();
        assert!(check_division(&g, &cfg0, c(1.0, 1.0), c(-1.0, 2.0)).is_err());
    }

    #[test]
    fn cauchy_kernel_jump() {
        let cfg = LaplaceConfig::at_vertex(DomainProfile::straight(-1.0).unwrap(), 1e-12).unwrap();
        let r = check_cauchy_jump(c(0.5, 0.5), &cfg, 1.0).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn forward_bound_report() {
        let dom = DomainProfile::logarithmic(-1.0, 1.0).unwrap();
        let g = single(1.0);
        let th = PI / 8.0;
        let samples: Vec<_> = (0..40)
            .map(|i| {
                let ang = th + 0.05 + (2.0 * PI - 2.0 * th - 0.1) * f64::from(i) / 40.0;
                (th, c(-0.1 * f64::from(i % 5), 0.0), Complex64::from_polar(0.5 + 0.1 * f64::from(i), ang))
            })
            .collect();
        let rep = verify_forward_bound(&g, &dom, &samples, 1.0).unwrap();
        assert!(rep.passed(), "max ratio {}", rep.max_ratio());
        let zero = verify_forward_bound(&ExpSum::zero(), &dom, &samples, 1.0).unwrap();
        assert_eq!(zero.max_ratio(), 0.0);
    }
}
