//! Neighborhoods of -infinity, cones, rays and growth functions.
//!
//! A domain is stored through its boundary abscissa `rho(y)`, `y >= 0`:
//! `H = {x + iy : x <= rho(|y|)}`. Every domain is symmetric about the real
//! axis.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{fmt_c, Error, Result};

pub type ComplexPoint = Complex64;

/// Rejects NaN and infinite coordinates.
pub fn finite_point(w: ComplexPoint) -> Result<ComplexPoint> {
    if w.re.is_finite() && w.im.is_finite() {
        Ok(w)
    } else {
        Err(Error::InvalidInput(format!("non-finite point {}", fmt_c(w))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    origin: ComplexPoint,
    direction: ComplexPoint,
}

impl Ray {
    pub fn new(origin: ComplexPoint, direction: ComplexPoint) -> Result<Self> {
        finite_point(origin)?;
        finite_point(direction)?;
        if (direction.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "ray direction must have unit modulus, got {}",
                direction.norm()
            )));
        }
        Ok(Ray { origin, direction })
    }

    pub fn from_angle(origin: ComplexPoint, angle: f64) -> Result<Self> {
        Ray::new(origin, Complex64::from_polar(1.0, angle))
    }

    pub fn origin(&self) -> ComplexPoint {
        self.origin
    }

    pub fn direction(&self) -> ComplexPoint {
        self.direction
    }

    pub fn at(&self, t: f64) -> ComplexPoint {
        self.origin + self.direction * t
    }
}

fn check_opening(half_opening: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&half_opening) {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange(half_opening))
    }
}

/// Open cone `{w : |arg(vertex - w)| < half_opening}` pointing to the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeLeft {
    pub vertex: ComplexPoint,
    pub half_opening: f64,
}

impl ConeLeft {
    pub fn new(vertex: ComplexPoint, half_opening: f64) -> Result<Self> {
        finite_point(vertex)?;
        check_opening(half_opening)?;
        Ok(ConeLeft { vertex, half_opening })
    }

    pub fn contains(&self, w: ComplexPoint) -> bool {
        let d = self.vertex - w;
        d.norm() > 0.0 && d.arg().abs() < self.half_opening
    }

    /// Closed cone, vertex included.
    pub fn contains_closed(&self, w: ComplexPoint) -> bool {
        let d = self.vertex - w;
        d.norm() == 0.0 || d.arg().abs() <= self.half_opening
    }
}

/// Open cone `{p : |arg(p - vertex)| < half_opening}` with real vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeRight {
    pub vertex: f64,
    pub half_opening: f64,
}

impl ConeRight {
    pub fn new(vertex: f64, half_opening: f64) -> Result<Self> {
        if !vertex.is_finite() {
            return Err(Error::InvalidInput("non-finite cone vertex".into()));
        }
        check_opening(half_opening)?;
        Ok(ConeRight { vertex, half_opening })
    }

    pub fn contains(&self, p: ComplexPoint) -> bool {
        let d = p - self.vertex;
        d.norm() > 0.0 && d.arg().abs() < self.half_opening
    }

    pub fn contains_closed(&self, p: ComplexPoint) -> bool {
        let d = p - self.vertex;
        d.norm() == 0.0 || d.arg().abs() <= self.half_opening
    }
}

/// `H_{a,k} = {x + iy : x < a - k log(1 + |y|)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDomain {
    pub a: f64,
    pub k: f64,
}

impl LogDomain {
    pub fn new(a: f64, k: f64) -> Result<Self> {
        if !a.is_finite() || !k.is_finite() || k <= 0.0 {
            return Err(Error::InvalidDomain(format!("log domain needs finite a and k > 0, got a={a}, k={k}")));
        }
        Ok(LogDomain { a, k })
    }

    pub fn rho(&self, y: f64) -> f64 {
        self.a - self.k * (1.0 + y.abs()).ln()
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Boundary given by a user closure together with its derivative.
#[derive(Clone)]
pub struct CustomProfile {
    pub label: String,
    rho: RealFn,
    drho: RealFn,
}

impl CustomProfile {
    pub fn new(
        label: impl Into<String>,
        rho: impl Fn(f64) -> f64 + Send + Sync + 'static,
        drho: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomProfile { label: label.into(), rho: Arc::new(rho), drho: Arc::new(drho) }
    }
}

impl fmt::Debug for CustomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomProfile({})", self.label)
    }
}

#[derive(Debug, Clone)]
pub enum DomainProfile {
    /// `rho(y) = a - k log(1 + y)`.
    Logarithmic(LogDomain),
    /// `rho(y) = w0 - k log(y)`, unbounded to the right near the real axis.
    LogType { w0: f64, k: f64 },
    /// `rho(y) = a`.
    Straight { a: f64 },
    Custom(CustomProfile),
}

impl DomainProfile {
    pub fn logarithmic(a: f64, k: f64) -> Result<Self> {
        Ok(DomainProfile::Logarithmic(LogDomain::new(a, k)?))
    }

    pub fn log_type(w0: f64, k: f64) -> Result<Self> {
        if !w0.is_finite() || !k.is_finite() || k <= 0.0 {
            return Err(Error::InvalidDomain(format!("log-type domain needs finite w0 and k > 0, got w0={w0}, k={k}")));
        }
        Ok(DomainProfile::LogType { w0, k })
    }

    pub fn straight(a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidDomain("straight half-plane needs a finite abscissa".into()));
        }
        Ok(DomainProfile::Straight { a })
    }

    pub fn rho(&self, y: f64) -> f64 {
        let y = y.abs();
        match self {
            DomainProfile::Logarithmic(d) => d.rho(y),
            DomainProfile::LogType { w0, k } => {
                if y == 0.0 {
                    f64::INFINITY
                } else {
                    w0 - k * y.ln()
                }
            }
            DomainProfile::Straight { a } => *a,
            DomainProfile::Custom(c) => (c.rho)(y),
        }
    }

    fn drho(&self, y: f64) -> f64 {
        match self {
            DomainProfile::Logarithmic(d) => -d.k / (1.0 + y),
            DomainProfile::LogType { k, .. } => -k / y,
            DomainProfile::Straight { .. } => 0.0,
            DomainProfile::Custom(c) => (c.drho)(y),
        }
    }

    /// Slope of the logarithmic boundary, zero for half-planes.
    pub fn slope(&self) -> Option<f64> {
        match self {
            DomainProfile::Logarithmic(d) => Some(d.k),
            DomainProfile::LogType { k, .. } => Some(*k),
            DomainProfile::Straight { .. } => Some(0.0),
            DomainProfile::Custom(_) => None,
        }
    }

    pub fn contains(&self, w: ComplexPoint) -> bool {
        w.re <= self.rho(w.im.abs())
    }

    /// Largest real part reached by the domain, if finite.
    pub fn sup_real(&self) -> Option<f64> {
        match self {
            DomainProfile::Logarithmic(d) => Some(d.a),
            DomainProfile::LogType { .. } => None,
            DomainProfile::Straight { a } => Some(*a),
            DomainProfile::Custom(c) => {
                let r = (c.rho)(0.0);
                r.is_finite().then_some(r)
            }
        }
    }

    /// The same domain translated by `dx` along the real axis.
    pub fn shifted(&self, dx: f64) -> DomainProfile {
        match self {
            DomainProfile::Logarithmic(d) => DomainProfile::Logarithmic(LogDomain { a: d.a + dx, k: d.k }),
            DomainProfile::LogType { w0, k } => DomainProfile::LogType { w0: w0 + dx, k: *k },
            DomainProfile::Straight { a } => DomainProfile::Straight { a: a + dx },
            DomainProfile::Custom(c) => {
                let rho = c.rho.clone();
                let drho = c.drho.clone();
                DomainProfile::Custom(CustomProfile {
                    label: format!("{}{:+}", c.label, dx),
                    rho: Arc::new(move |y| rho(y) + dx),
                    drho,
                })
            }
        }
    }

    /// Abscissa of the rightmost closed left cone of half-opening `theta`
    /// contained in the closure of the domain.
    pub fn theta_inverse(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(Error::AngleOutOfRange(theta));
        }
        let t = theta.tan();
        Ok(match self {
            DomainProfile::Straight { a } => *a,
            DomainProfile::LogType { w0, k } => w0 + k - k * k.ln() - k * t.ln(),
            DomainProfile::Logarithmic(d) => {
                // tangency of the cone edge with the boundary at 1 + y = k tan(theta)
                if d.k * t <= 1.0 {
                    d.a
                } else {
                    d.a + d.k - 1.0 / t - d.k * (d.k * t).ln()
                }
            }
            DomainProfile::Custom(_) => self.theta_inverse_bisect(1.0 / t),
        })
    }

    /// `inf_y rho(y) + y cot(theta)`, located through `rho'(y) = -cot(theta)`.
    fn theta_inverse_bisect(&self, cot: f64) -> f64 {
        let value = |y: f64| self.rho(y) + y * cot;
        let g = |y: f64| self.drho(y) + cot;
        if g(0.0) >= 0.0 {
            return value(0.0);
        }
        let mut hi = 1.0;
        while g(hi) < 0.0 && hi < 1e300 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        value(0.5 * (lo + hi))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainProfile::Logarithmic(d) => LogDomain::new(d.a, d.k).map(|_| ()),
            DomainProfile::LogType { w0, k } => DomainProfile::log_type(*w0, *k).map(|_| ()),
            DomainProfile::Straight { a } => DomainProfile::straight(*a).map(|_| ()),
            DomainProfile::Custom(c) => {
                let mut prev = (c.rho)(0.0);
                for i in 1..=64 {
                    let y = 0.25 * f64::from(i * i);
                    let r = (c.rho)(y);
                    if !r.is_finite() || r > prev + 1e-12 {
                        return Err(Error::InvalidDomain(format!("{}: rho must be finite and non-increasing", c.label)));
                    }
                    prev = r;
                }
                Ok(())
            }
        }
    }
}

/// Growth function `mu` on `(0, pi/2)`.
#[derive(Debug, Clone)]
pub enum GrowthFn {
    Constant(f64),
    /// `a + k log(cot theta)`.
    LogCot { a: f64, k: f64 },
    /// `-Theta_H^{-1}(pi/2 - theta)` for a stored domain.
    Envelope(DomainProfile),
}

impl GrowthFn {
    pub fn eval(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(Error::AngleOutOfRange(theta));
        }
        Ok(match self {
            GrowthFn::Constant(a) => *a,
            GrowthFn::LogCot { a, k } => a + k * (1.0 / theta.tan()).ln(),
            GrowthFn::Envelope(h) => -h.theta_inverse(FRAC_PI_2 - theta)?,
        })
    }
}

/// `mu(theta) = -Theta_H^{-1}(pi/2 - theta)`.
pub fn mu_from_domain(h: &DomainProfile) -> GrowthFn {
    match h {
        DomainProfile::Straight { a } => GrowthFn::Constant(-a),
        DomainProfile::LogType { w0, k } => GrowthFn::LogCot { a: -w0 - k + k * k.ln(), k: *k },
        other => GrowthFn::Envelope(other.clone()),
    }
}

/// Union of the cones `C_-(-mu(theta) - 1, pi/2 - theta)`.
pub fn domain_from_mu(mu: &GrowthFn) -> DomainProfile {
    match mu {
        GrowthFn::Constant(m) => DomainProfile::Straight { a: -m - 1.0 },
        GrowthFn::LogCot { a, k } => DomainProfile::LogType { w0: -a - 1.0 - k + k * k.ln(), k: *k },
        GrowthFn::Envelope(h) => h.shifted(-1.0),
    }
}

/// `N(p)`: `|p|` on the closed left half-plane, `|Im p|` elsewhere.
pub fn n_distance(p: ComplexPoint) -> f64 {
    if p.re <= 0.0 {
        p.norm()
    } else {
        p.im.abs()
    }
}

/// `F(x, y) = x + (k/2) log(x^2 + y^2)`.
pub fn f_tilde(k: f64, w: ComplexPoint) -> f64 {
    w.re + 0.5 * k * w.norm_sqr().ln()
}

/// Membership in `{F < a}`, restricted to the component reaching -infinity.
pub fn tilde_contains(a: f64, k: f64, w: ComplexPoint) -> bool {
    w.re < -k && f_tilde(k, w) < a
}

/// Abscissa of the boundary of `{F < a}` at height `y` (left branch, `x < -k`).
pub fn tilde_boundary(a: f64, k: f64, y: f64) -> Result<f64> {
    if k <= 0.0 {
        return Err(Error::InvalidDomain("k must be positive".into()));
    }
    let f = |x: f64| x + 0.5 * k * (x * x + y * y).ln();
    // F is increasing in x on x < -k; F(-k) must exceed a for a crossing
    let hi = -k;
    if f(hi) <= a {
        return Err(Error::Precondition(format!("no boundary point at y={y} for a={a}, k={k}")));
    }
    let mut lo = hi - 1.0;
    while f(lo) >= a {
        lo = hi + 2.0 * (lo - hi);
    }
    let mut hi = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < a {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InclusionMargin {
    /// Shift `a'` with `{F < a} ⊂ H_{a + a', k}`.
    pub lower: f64,
    /// Shift `M` with `H_{a,k} ⊂ {F < a + M}`.
    pub upper: f64,
}

pub fn appendix_inclusion_margin(a: f64, k: f64) -> Result<InclusionMargin> {
    if !(a.is_finite() && k.is_finite() && k > 0.0) {
        return Err(Error::InvalidInput(format!("a={a}, k={k}")));
    }
    if a > (-1.0f64).min(-k) {
        return Err(Error::Precondition(format!("a must be <= min(-1, -k), got a={a}, k={k}")));
    }
    Ok(InclusionMargin {
        lower: 0.5 * LN_2,
        upper: 0.5 * k * PI * (1.0 + a * a + 3.0 * a * k + 2.0 * k * k),
    })
}

/// Largest `|F(w) - a - k log|a||` over `n` points of the boundary of `H_{a,k}` with heights
/// `0` and log-spaced in `[1e-3, y_max]`.
pub fn tilde_boundary_deviation(a: f64, k: f64, n: usize, y_max: f64) -> Result<f64> {
    let h = LogDomain::new(a, k)?;
    if n < 2 || !(y_max > 1e-3) {
        return Err(Error::InvalidInput(format!("n={n}, y_max={y_max}")));
    }
    let base = a + k * a.abs().ln();
    let (l0, l1) = (1e-3f64.ln(), y_max.ln());
    let dev = std::iter::once(0.0)
        .chain((0..n - 1).map(|i| (l0 + (l1 - l0) * i as f64 / (n - 2).max(1) as f64).exp()))
        .map(|y| (f_tilde(k, ComplexPoint::new(h.rho(y), y)) - base).abs())
        .fold(0.0, f64::max);
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn membership_examples() {
        let h = DomainProfile::logarithmic(0.0, 1.0).unwrap();
        assert!(h.contains(c(-1.0, 0.0)));
        assert!(!h.contains(c(0.5, 0.0)));
        let h2 = DomainProfile::logarithmic(0.0, 2.0).unwrap();
        assert!(!h2.contains(c(-3.0, 4.0)));
        assert!(h2.contains(c(-3.3, 4.0)));
    }

    #[test]
    fn theta_inverse_examples() {
        let s = DomainProfile::straight(-2.5).unwrap();
        for th in [0.1, 0.7, 1.5] {
            assert_eq!(s.theta_inverse(th).unwrap(), -2.5);
        }
        let l = DomainProfile::log_type(0.0, 1.0).unwrap();
        assert!((l.theta_inverse(PI / 4.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(l.theta_inverse(0.0).is_err());
        assert!(l.theta_inverse(FRAC_PI_2).is_err());
        let lg = DomainProfile::logarithmic(-1.0, 2.0).unwrap();
        assert!(lg.theta_inverse(1.5690).unwrap() < -10.0);
    }

    #[test]
    fn custom_profile_matches_closed_forms() {
        let (a, k) = (-1.5, 2.0);
        let custom = DomainProfile::Custom(CustomProfile::new(
            "log",
            move |y| a - k * (1.0 + y).ln(),
            move |y| -k / (1.0 + y),
        ));
        let exact = DomainProfile::logarithmic(a, k).unwrap();
        for th in [0.05, 0.3, 0.6, 1.0, 1.4] {
            let x = custom.theta_inverse(th).unwrap();
            let y = exact.theta_inverse(th).unwrap();
            assert!((x - y).abs() < 1e-10, "{th}: {x} vs {y}");
        }
    }

    #[test]
    fn mu_examples() {
        let h = DomainProfile::log_type(-1.0, 1.0).unwrap();
        let mu = mu_from_domain(&h);
        assert!(mu.eval(PI / 4.0).unwrap().abs() < 1e-14);
        let th: f64 = 0.3;
        assert!((mu.eval(th).unwrap() - (1.0 / th.tan()).ln()).abs() < 1e-14);
        let s = DomainProfile::straight(0.7).unwrap();
        assert_eq!(mu_from_domain(&s).eval(0.4).unwrap(), -0.7);
        match domain_from_mu(&GrowthFn::Constant(2.0)) {
            DomainProfile::Straight { a } => assert_eq!(a, -3.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn domain_mu_roundtrip_shifts_by_one() {
        for h in [
            DomainProfile::log_type(0.3, 1.5).unwrap(),
            DomainProfile::logarithmic(-2.0, 1.0).unwrap(),
            DomainProfile::straight(-1.0).unwrap(),
        ] {
            let back = domain_from_mu(&mu_from_domain(&h));
            if let (DomainProfile::LogType { k: k1, .. }, DomainProfile::LogType { k: k2, .. }) = (&h, &back) {
                assert_eq!(k1, k2);
            }
            for th in [0.1, 0.5, 0.9, 1.3] {
                let d = back.theta_inverse(th).unwrap() - h.theta_inverse(th).unwrap();
                assert!((d + 1.0).abs() < 1e-12, "{h:?} {th} {d}");
            }
        }
    }

    #[test]
    fn n_distance_examples() {
        assert_eq!(n_distance(c(-3.0, 4.0)), 5.0);
        assert_eq!(n_distance(c(1.0, 2.0)), 2.0);
        assert_eq!(n_distance(c(0.0, 0.0)), 0.0);
    }

    #[test]
    fn inclusion_margin_examples() {
        let m = appendix_inclusion_margin(-2.0, 1.0).unwrap();
        assert!((m.upper - FRAC_PI_2).abs() < 1e-14);
        assert!((m.lower - 0.5 * LN_2).abs() < 1e-15);
        assert!(appendix_inclusion_margin(-0.5, 1.0).is_err());
        let (a, k) = (-2.0, 1.0);
        for i in 0..1000 {
            let y = -50.0 + 0.1 * f64::from(i);
            let x = tilde_boundary(a, k, y).unwrap();
            assert!(x < (a + 1.0) - k * (1.0 + y.abs()).ln() - 1e-12);
            assert!(x < (a + 0.5 * LN_2) - k * (1.0 + y.abs()).ln() + 1e-12);
            let inner = c(x - 1e-9, y);
            assert!(tilde_contains(a, k, inner));
            assert!(tilde_contains(a, k, inner - 1.0));
        }
        // F on the boundary: a + k log|a| at y = 0, tends to a as y grows
        let d = tilde_boundary_deviation(-2.0, 1.0, 1000, 1e12).unwrap();
        assert!(d >= 2f64.ln() - 1e-9 && d <= m.upper);
        let d = tilde_boundary_deviation(-3.0, 2.0, 1000, 1e12).unwrap();
        assert!(d > appendix_inclusion_margin(-3.0, 2.0).unwrap().upper);
    }

    #[test]
    fn cones() {
        let cl = ConeLeft::new(c(1.0, 0.0), PI / 4.0).unwrap();
        assert!(cl.contains(c(0.0, 0.5)));
        assert!(!cl.contains(c(0.0, 1.5)));
        assert!(cl.contains_closed(c(0.0, 1.0)));
        let cr = ConeRight::new(0.0, 0.3).unwrap();
        assert!(cr.contains(c(1.0, 0.1)));
        assert!(!cr.contains(c(1.0, -0.5)));
        assert!(ConeLeft::new(c(0.0, 0.0), 2.0).is_err());
        assert!(Ray::new(c(0.0, 0.0), c(2.0, 0.0)).is_err());
    }

    fn domains() -> impl Strategy<Value = DomainProfile> {
        prop_oneof![
            (-5.0f64..2.0, 0.1f64..4.0).prop_map(|(a, k)| DomainProfile::logarithmic(a, k).unwrap()),
            (-5.0f64..2.0, 0.1f64..4.0).prop_map(|(a, k)| DomainProfile::log_type(a, k).unwrap()),
            (-5.0f64..2.0).prop_map(|a| DomainProfile::straight(a).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn inscribed_cones_stay_inside(h in domains(), theta in 0.01f64..1.56) {
            let v = h.theta_inverse(theta).unwrap();
            let edge = Complex64::from_polar(1.0, PI - theta);
            for i in 0..1000 {
                let s = 1e-3 * f64::from(i) * (1.0 + f64::from(i));
                let w = Complex64::new(v, 0.0) + edge * s;
                prop_assert!(w.re <= h.rho(w.im.abs()) + 1e-9 * (1.0 + w.re.abs()));
                prop_assert!(h.contains(w.conj() - 1e-9 * (1.0 + w.re.abs())));
            }
        }

        #[test]
        fn theta_inverse_and_mu_monotone(h in domains(), t1 in 0.01f64..1.55, dt in 0.001f64..0.5) {
            let t2 = (t1 + dt).min(1.56);
            prop_assert!(h.theta_inverse(t2).unwrap() <= h.theta_inverse(t1).unwrap() + 1e-12);
            let mu = mu_from_domain(&h);
            prop_assert!(mu.eval(t2).unwrap() <= mu.eval(t1).unwrap() + 1e-12);
        }

        #[test]
        fn n_distance_symmetric(re in -10.0f64..10.0, im in -10.0f64..10.0) {
            let p = Complex64::new(re, im);
            prop_assert_eq!(n_distance(p), n_distance(p.conj()));
            prop_assert!(n_distance(p) <= p.norm());
        }

        #[test]
        fn smaller_mu_gives_larger_domain(a in -3.0f64..3.0, da in 0.0f64..2.0, k in 0.2f64..3.0, th in 0.05f64..1.5) {
            let d1 = domain_from_mu(&GrowthFn::LogCot { a, k });
            let d2 = domain_from_mu(&GrowthFn::LogCot { a: a + da, k });
            prop_assert!(d2.theta_inverse(th).unwrap() <= d1.theta_inverse(th).unwrap() + 1e-12);
        }

        #[test]
        fn tilde_boundary_random(a in -6.0f64..-3.0, k in 0.3f64..3.0, y in -1e3f64..1e3) {
            prop_assume!(a <= -k);
            let x = tilde_boundary(a, k, y).unwrap();
            prop_assert!(x < a + 1.0 - k * (1.0 + y.abs()).ln() - 1e-12);
        }
    }
}
