//! Polynomial interpolation bounds on rectangles, the integration-trick constant and
//! local order estimation of functions with singularities on the real axis.

use std::f64::consts::E;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::report::{Report, ReportRow};

/// Grid points per side when taking sups over rectangle boundaries.
pub const SIDE_POINTS: usize = 512;

/// Closed rectangle `[c - A, c + A] x [-B, B]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectDomain {
    pub center: f64,
    pub half_width: f64,
    pub half_height: f64,
}

impl RectDomain {
    pub fn new(center: f64, half_width: f64, half_height: f64) -> Result<Self> {
        if !center.is_finite() || !(half_width > 0.0 && half_width.is_finite()) || !(half_height > 0.0 && half_height.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "rectangle needs positive finite sides, got A = {half_width}, B = {half_height}"
            )));
        }
        Ok(RectDomain { center, half_width, half_height })
    }

    /// The real segment `I`.
    pub fn interval(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    pub fn contains(&self, p: Complex64) -> bool {
        (p.re - self.center).abs() <= self.half_width && p.im.abs() <= self.half_height
    }

    /// Distance from `p` (inside) to the boundary.
    pub fn depth(&self, p: Complex64) -> f64 {
        (self.half_width - (p.re - self.center).abs()).min(self.half_height - p.im.abs())
    }

    /// `4 * per_side` points along the boundary, corners included once.
    pub fn boundary_grid(&self, per_side: usize) -> Vec<Complex64> {
        let (x0, x1) = self.interval();
        let b = self.half_height;
        let corners = [
            Complex64::new(x0, -b),
            Complex64::new(x1, -b),
            Complex64::new(x1, b),
            Complex64::new(x0, b),
        ];
        (0..4)
            .flat_map(|s| {
                let (from, to) = (corners[s], corners[(s + 1) % 4]);
                (0..per_side).map(move |i| from + (to - from) * (i as f64 / per_side as f64))
            })
            .collect()
    }
}

/// Complex polynomial stored by increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(Vec<Complex64>);

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("polynomial needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
        }
        Ok(Polynomial(coeffs))
    }

    /// `x^n`
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[n] = Complex64::new(1.0, 0.0);
        Polynomial(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    /// Degree of the highest nonzero coefficient; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|c| *c != Complex64::new(0.0, 0.0)).unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Random polynomial of degree `<= max_deg` with coefficients in the unit square.
    pub fn random<R: Rng>(rng: &mut R, max_deg: usize) -> Self {
        let n = rng.gen_range(0..=max_deg);
        Polynomial(
            (0..=n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }
}

/// `k = 2e sqrt(1 + (B/A)^2)`
pub fn interpolation_constant(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!("A and B must be positive, got A = {a}, B = {b}")));
    }
    let r = b / a;
    Ok(2.0 * E * (1.0 + r * r).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Compares the sup of `|P|` on the rectangle boundary with `k^N` times its sup on `I`.
pub fn verify_interpolation_bound(p: &Polynomial, rect: &RectDomain) -> InterpolationCheck {
    verify_interpolation_scaled(p, rect, 1.0)
}

/// As [`verify_interpolation_bound`] with the right-hand side multiplied by `scale`.
pub fn verify_interpolation_scaled(p: &Polynomial, rect: &RectDomain, scale: f64) -> InterpolationCheck {
    let k = interpolation_constant(rect.half_width, rect.half_height).expect("validated rectangle");
    let lhs = rect.boundary_grid(SIDE_POINTS).into_iter().map(|z| p.eval(z).norm()).fold(0.0, f64::max);
    let (x0, x1) = rect.interval();
    let m = 4 * SIDE_POINTS;
    let sup_i = (0..=m)
        .map(|i| p.eval(Complex64::new(x0 + (x1 - x0) * i as f64 / m as f64, 0.0)).norm())
        .fold(0.0, f64::max);
    let rhs = scale * k.powi(p.degree() as i32) * sup_i;
    InterpolationCheck { lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-9) }
}

/// Random rectangle with `B/A` log-uniform in `[0.1, 10]`.
pub fn random_rect<R: Rng>(rng: &mut R) -> RectDomain {
    let a = rng.gen_range(0.1..2.0);
    let ratio = 10f64.powf(rng.gen_range(-1.0..=1.0));
    RectDomain { center: rng.gen_range(-2.0..2.0), half_width: a, half_height: a * ratio }
}

/// Runs the interpolation check on `trials` random polynomials and rectangles.
pub fn interpolation_suite<R: Rng>(rng: &mut R, trials: usize, max_deg: usize, scale: f64) -> Report {
    let rows = (0..trials)
        .map(|_| {
            let p = Polynomial::random(rng, max_deg);
            let rect = random_rect(rng);
            let c = verify_interpolation_scaled(&p, &rect, scale);
            ReportRow::new(Complex64::new(rect.center, rect.half_height / rect.half_width), c.lhs, c.rhs, 1e-9)
        })
        .collect();
    Report { rows }
}

/// `b` with `|h(p)| <= b max(C_U, C_W)` at distance `> ell` from the boundary of a
/// rectangle of sides `A`, `B`, given a path of length `L` through it.
pub fn integration_trick_constant(n: u32, b: f64, a: f64, l: f64, ell: f64) -> Result<f64> {
    if !(ell > 0.0) {
        return Err(Error::InvalidInput(format!("ell must be positive, got {ell}")));
    }
    if !(l >= 0.0) {
        return Err(Error::InvalidInput(format!("L must be nonnegative, got {l}")));
    }
    let k = interpolation_constant(a, b)?;
    let kn = 1.0 + 2.0 * k.powi(n as i32);
    let ln = ell.powi(n as i32 + 2);
    Ok((n as f64 + 1.0) * b * kn / ln + kn * (l + b).powi(n as i32 + 1) / ln)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEstimate {
    pub beta: f64,
    pub order: u32,
    pub fit_constant: f64,
    pub residual: f64,
    /// Observed growth exceeds every tested order.
    pub saturated: bool,
}

/// Decreasing `2^-4, ..., 2^-14`.
pub fn default_deltas() -> Vec<f64> {
    (4..=14).map(|j| 2f64.powi(-j)).collect()
}

/// Fits `|h(beta +- i delta)| ~ C delta^-(N+1)` over `N <= max_order`.
pub fn estimate_local_order<F>(h: F, beta: f64, deltas: &[f64], max_order: u32) -> Result<OrderEstimate>
where
    F: Fn(Complex64) -> Complex64,
{
    if deltas.len() < 2 {
        return Err(Error::InvalidInput("need at least two deltas".into()));
    }
    if deltas.iter().any(|d| !(*d > 0.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("deltas must be positive and decreasing".into()));
    }
    let mags: Vec<f64> = deltas
        .iter()
        .map(|&d| h(Complex64::new(beta, d)).norm().max(h(Complex64::new(beta, -d)).norm()))
        .collect();
    if mags.iter().any(|m| !m.is_finite()) {
        return Err(Error::Divergent(format!("h is not finite near {beta}")));
    }
    if mags.iter().all(|m| *m == 0.0) {
        return Ok(OrderEstimate { beta, order: 0, fit_constant: f64::MIN_POSITIVE, residual: 0.0, saturated: false });
    }
    let xs: Vec<f64> = deltas.iter().map(|d| -d.ln()).collect();
    let ys: Vec<f64> = mags.iter().map(|m| m.max(f64::MIN_POSITIVE).ln()).collect();
    let fit = |n: u32| {
        let s = (n + 1) as f64;
        let offsets: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - s * x).collect();
        let mean = offsets.iter().sum::<f64>() / offsets.len() as f64;
        let rms = (offsets.iter().map(|o| (o - mean).powi(2)).sum::<f64>() / offsets.len() as f64).sqrt();
        let c = offsets.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp();
        (rms, c)
    };
    let (order, (residual, fit_constant)) = (0..=max_order)
        .map(|n| (n, fit(n)))
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("nonempty range");
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let saturated = order == max_order && slope > (max_order + 1) as f64 + 0.5;
    Ok(OrderEstimate { beta, order, fit_constant, residual, saturated })
}
