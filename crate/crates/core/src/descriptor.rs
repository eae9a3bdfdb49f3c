//! JSON descriptors for domains and germs, and textual sample grids.
//!
//! ```text
//! {"kind":"log","a":-1.0,"k":2.0}
//! {"kind":"logtype","w0":0.0,"k":1.0}
//! {"kind":"straight","a":-1.0}
//! {"terms":[{"beta":1.0,"re":0.5,"im":0.0}]}
//! ```

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainProfile;
use crate::germs::ExpSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainDescriptor {
    Log { a: f64, k: f64 },
    #[serde(alias = "log_type", alias = "log-type")]
    LogType { w0: f64, k: f64 },
    Straight { a: f64 },
}

impl DomainDescriptor {
    pub fn to_profile(&self) -> Result<DomainProfile> {
        match *self {
            DomainDescriptor::Log { a, k } => DomainProfile::logarithmic(a, k),
            DomainDescriptor::LogType { w0, k } => DomainProfile::log_type(w0, k),
            DomainDescriptor::Straight { a } => DomainProfile::straight(a),
        }
    }

    /// Custom profiles have no descriptor.
    pub fn from_profile(h: &DomainProfile) -> Option<Self> {
        match h {
            DomainProfile::Logarithmic(d) => Some(DomainDescriptor::Log { a: d.a, k: d.k }),
            DomainProfile::LogType { w0, k } => Some(DomainDescriptor::LogType { w0: *w0, k: *k }),
            DomainProfile::Straight { a } => Some(DomainDescriptor::Straight { a: *a }),
            DomainProfile::Custom(_) => None,
        }
    }
}

impl FromStr for DomainDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("domain descriptor: {e}")))
    }
}

pub fn parse_domain(s: &str) -> Result<DomainProfile> {
    s.parse::<DomainDescriptor>()?.to_profile()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDescriptor {
    pub beta: f64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Terms may come in any order; repeated exponents are summed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermDescriptor {
    pub terms: Vec<TermDescriptor>,
}

impl GermDescriptor {
    pub fn to_exp_sum(&self) -> Result<ExpSum> {
        ExpSum::from_pairs(self.terms.iter().map(|t| (t.beta, Complex64::new(t.re, t.im))))
    }
}

impl From<&ExpSum> for GermDescriptor {
    fn from(g: &ExpSum) -> Self {
        let terms = g.terms().iter().map(|t| TermDescriptor { beta: t.beta, re: t.coeff.re, im: t.coeff.im }).collect();
        GermDescriptor { terms }
    }
}

impl FromStr for GermDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("germ descriptor: {e}")))
    }
}

pub fn parse_germ(s: &str) -> Result<ExpSum> {
    s.parse::<GermDescriptor>()?.to_exp_sum()
}

/// `lo..hi:n` (n evenly spaced values, ends included) or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.n {
            0 => vec![],
            1 => vec![self.lo],
            n => (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

impl FromStr for AxisSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("axis `{s}`: expected `lo..hi:n` or a number"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        match s.split_once("..") {
            None => {
                let v = num(s)?;
                Ok(AxisSpec { lo: v, hi: v, n: 1 })
            }
            Some((lo, rest)) => {
                let (hi, n) = rest.split_once(':').ok_or_else(bad)?;
                let n = n.trim().parse::<usize>().map_err(|_| bad())?;
                let (lo, hi) = (num(lo)?, num(hi)?);
                if n == 0 || !lo.is_finite() || !hi.is_finite() {
                    return Err(bad());
                }
                Ok(AxisSpec { lo, hi, n })
            }
        }
    }
}

/// Tensor grid `re=..,im=..`; a missing axis is the single value 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re: AxisSpec,
    pub im: AxisSpec,
}

impl GridSpec {
    pub fn points(&self) -> Vec<Complex64> {
        let ims = self.im.values();
        self.re.values().into_iter().flat_map(|x| ims.iter().map(move |&y| Complex64::new(x, y))).collect()
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let zero = AxisSpec { lo: 0.0, hi: 0.0, n: 1 };
        let mut grid = GridSpec { re: zero, im: zero };
        for part in s.split([',', ';']).map(str::trim).filter(|p| !p.is_empty()) {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("grid part `{part}`: expected re=.. or im=..")))?;
            match key.trim() {
                "re" => grid.re = val.parse()?,
                "im" => grid.im = val.parse()?,
                other => return Err(Error::InvalidInput(format!("unknown grid axis `{other}`"))),
            }
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains_roundtrip() {
        let h = parse_domain(r#"{"kind":"log","a":-1,"k":2}"#).unwrap();
        assert_eq!(h.rho(0.0), -1.0);
        assert_eq!(DomainDescriptor::from_profile(&h), Some(DomainDescriptor::Log { a: -1.0, k: 2.0 }));
        let s = parse_domain(r#"{"kind":"straight","a":-1.0}"#).unwrap();
        assert_eq!(s.rho(5.0), -1.0);
        let t = parse_domain(r#"{"kind":"logtype","w0":0.5,"k":1.0}"#).unwrap();
        assert!((t.rho(std::f64::consts::E) + 0.5).abs() < 1e-15);
        let d = DomainDescriptor::Straight { a: 2.0 };
        assert_eq!(serde_json::to_string(&d).unwrap(), r#"{"kind":"straight","a":2.0}"#);
    }

    #[test]
    fn domain_errors() {
        assert!(parse_domain("{").is_err());
        assert!(parse_domain(r#"{"kind":"disk","r":1}"#).is_err());
        assert!(parse_domain(r#"{"kind":"log","a":-1,"k":-2}"#).is_err());
        assert!(parse_domain(r#"{"kind":"log","a":-1}"#).is_err());
    }

    #[test]
    fn germs() {
        let g = parse_germ(r#"{"terms":[{"beta":1.0,"re":0.5,"im":0.0},{"beta":0.0,"re":1.0}]}"#).unwrap();
        assert_eq!(g.terms().len(), 2);
        assert_eq!(g.coeff_at(1.0), Complex64::new(0.5, 0.0));
        let back: GermDescriptor = (&g).into();
        assert_eq!(back.to_exp_sum().unwrap(), g);
        assert!(parse_germ(r#"{"terms":[{"beta":-1.0,"re":1.0}]}"#).is_err());
        assert!(parse_germ(r#"{"terms":[{"beta":1.0,"re":1.0,"x":0}]}"#).is_err());
    }

    #[test]
    fn grids() {
        let g: GridSpec = "re=-10..-4:7".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 7);
        assert_eq!(pts[0], Complex64::new(-10.0, 0.0));
        assert_eq!(pts[6], Complex64::new(-4.0, 0.0));
        let g: GridSpec = "re=-3..-2:2, im=-1..1:3".parse().unwrap();
        assert_eq!(g.points().len(), 6);
        let g: GridSpec = "re=-5;im=0.5".parse().unwrap();
        assert_eq!(g.points(), vec![Complex64::new(-5.0, 0.5)]);
        for bad in ["re=1..2", "re=a..b:3", "x=1", "re=1..2:0", "re"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }
}
