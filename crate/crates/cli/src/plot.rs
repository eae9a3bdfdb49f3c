//! Minimal SVG output: line charts and domain sketches.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use explap::DomainProfile;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit<'a>(pts: impl Iterator<Item = &'a (f64, f64)> + Clone) -> Option<Frame> {
        let fold = |f: fn(&(f64, f64)) -> f64| {
            pts.clone().map(f).filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (x, y) = (fold(|p| p.0), fold(|p| p.1));
        if !x.0.is_finite() || !y.0.is_finite() {
            return None;
        }
        let widen = |(lo, hi): (f64, f64)| if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        Some(Frame { x: widen(x), y: widen(y) })
    }

    fn sx(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }

    fn sy(&self, y: f64) -> f64 {
        H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r##"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for (v, anchor, x, y) in [
        (f.x.0, "start", PAD, H - PAD + 16.0),
        (f.x.1, "end", W - PAD, H - PAD + 16.0),
    ] {
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    for (v, y) in [(f.y.0, H - PAD), (f.y.1, PAD + 10.0)] {
        let _ = writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end">{v:.3}</text>"#, PAD - 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

fn polyline(out: &mut String, f: &Frame, pts: &[(f64, f64)], color: &str, dash: bool) {
    let coords: Vec<String> = pts
        .iter()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .map(|&(x, y)| format!("{:.2},{:.2}", f.sx(x), f.sy(y)))
        .collect();
    let dash = if dash { r#" stroke-dasharray="5,4""# } else { "" };
    let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#, coords.join(" "));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart; with `log_y` the ordinate is `log10` of the values and non-positive values are dropped.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series], log_y: bool) -> String {
    let series: Vec<Series> = series
        .iter()
        .map(|s| Series {
            label: s.label.clone(),
            points: s
                .points
                .iter()
                .filter(|p| !log_y || p.1 > 0.0)
                .map(|&(x, y)| (x, if log_y { y.log10() } else { y }))
                .collect(),
        })
        .collect();
    let mut out = String::new();
    header(&mut out, title);
    if let Some(f) = Frame::fit(series.iter().flat_map(|s| s.points.iter())) {
        let ylabel = if log_y { format!("log10 {ylabel}") } else { ylabel.to_string() };
        axes(&mut out, &f, xlabel, &ylabel);
        for (i, s) in series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            polyline(&mut out, &f, &s.points, color, false);
            for &(x, y) in &s.points {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, f.sx(x), f.sy(y));
            }
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                W - PAD - 120.0,
                PAD + 16.0 + 14.0 * i as f64,
                escape(&s.label)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Boundary `x = rho(|y|)` with the rightmost inscribed left cones of the given half-openings.
pub fn domain_sketch(title: &str, h: &DomainProfile, half_openings: &[f64], y_max: f64) -> String {
    let n = 400;
    let boundary: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let y = -y_max + 2.0 * y_max * i as f64 / n as f64;
            (h.rho(y.abs()), y)
        })
        .filter(|p| p.0.is_finite())
        .collect();
    let cones: Vec<(f64, Vec<(f64, f64)>)> = half_openings
        .iter()
        .filter_map(|&th| {
            let v = h.theta_inverse(th).ok()?;
            let reach = y_max / th.tan().max(1e-6);
            let dx = reach.min(4.0 * y_max);
            let dy = dx * th.tan();
            Some((th, vec![(v - dx, dy.min(y_max)), (v, 0.0), (v - dx, -dy.min(y_max))]))
        })
        .collect();
    let mut out = String::new();
    header(&mut out, title);
    let all: Vec<(f64, f64)> = boundary.iter().chain(cones.iter().flat_map(|c| c.1.iter())).copied().collect();
    if let Some(f) = Frame::fit(all.iter()) {
        axes(&mut out, &f, "Re w", "Im w");
        polyline(&mut out, &f, &boundary, COLORS[0], false);
        for (i, (th, pts)) in cones.iter().enumerate() {
            let color = COLORS[1 + i % (COLORS.len() - 1)];
            polyline(&mut out, &f, pts, color, true);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" fill="{color}">cone {:.3} rad</text>"#,
                W - PAD - 120.0,
                PAD + 16.0 + 14.0 * i as f64,
                th.min(FRAC_PI_2)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_well_formed() {
        let s = Series { label: "err".into(), points: vec![(1.0, 1e-3), (2.0, 1e-5), (3.0, 0.0)] };
        let svg = line_chart("t", "n", "err", &[s], true);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 2);
        let h = DomainProfile::logarithmic(-1.0, 2.0).unwrap();
        let svg = domain_sketch("H", &h, &[0.3, 0.6, 1.0], 10.0);
        assert_eq!(svg.matches("<polyline").count(), 4);
    }
}
