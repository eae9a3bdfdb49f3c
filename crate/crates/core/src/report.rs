//! Inequality reports: one row per sample, serialized as CSV.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportRow {
    pub p_re: f64,
    pub p_im: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl ReportRow {
    /// Passes when `lhs <= rhs (1 + slack)`.
    pub fn new(point: Complex64, lhs: f64, rhs: f64, slack: f64) -> Self {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        ReportRow { p_re: point.re, p_im: point.im, lhs, rhs, ratio, pass: lhs <= rhs * (1.0 + slack) }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("p_re,p_im,lhs,rhs,ratio,pass\n");
        for r in &self.rows {
            let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e},{}", r.p_re, r.p_im, r.lhs, r.rhs, r.ratio, r.pass);
        }
        out
    }
}
