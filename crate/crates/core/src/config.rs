//! JSON domain documents:
//! `{"curves":[{"role":"outer"|"inner","coeffs":[[k,re,im],...]}],"N":256,"cuts":{"anchors":[...]}|"auto"}`.
//! Each anchor is `[[outer_re, outer_im], [inner_re, inner_im]]`, one per hole in curve order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::context::Problem;
use crate::error::{Error, Result};
use crate::geometry::{build_cuts, CurveParam, Domain, DEFAULT_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Outer,
    Inner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub role: Role,
    pub coeffs: Vec<(i32, f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Anchors {
    Auto(Auto),
    Pairs(Vec<[[f64; 2]; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutConfig {
    Auto(Auto),
    Anchors { anchors: Anchors },
}

impl Default for CutConfig {
    fn default() -> Self {
        CutConfig::Auto(Auto::Auto)
    }
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub curves: Vec<CurveConfig>,
    #[serde(rename = "N", default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub cuts: CutConfig,
}

impl DomainConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("domain config: {e}")))
    }

    /// Serializes `domain` with automatic cuts.
    pub fn from_domain(domain: &Domain, nodes: usize) -> Self {
        let curves = domain
            .curves()
            .iter()
            .enumerate()
            .map(|(i, c)| CurveConfig {
                role: if i == 0 { Role::Outer } else { Role::Inner },
                coeffs: c.coefficients().iter().map(|&(k, a)| (k, a.re, a.im)).collect(),
            })
            .collect();
        Self { curves, nodes, cuts: CutConfig::default() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Exactly one outer curve, listed anywhere.
    pub fn domain(&self) -> Result<Domain> {
        let curve = |c: &CurveConfig| CurveParam::new(c.coeffs.iter().map(|&(k, re, im)| (k, Complex64::new(re, im))));
        let mut outer = self.curves.iter().filter(|c| c.role == Role::Outer);
        let (Some(o), None) = (outer.next(), outer.next()) else {
            return Err(Error::InvalidInput("exactly one outer curve is required".into()));
        };
        if self.curves.iter().any(|c| c.coeffs.is_empty()) {
            return Err(Error::InvalidInput("every curve needs at least one coefficient".into()));
        }
        let inners = self.curves.iter().filter(|c| c.role == Role::Inner).map(curve).collect();
        Domain::new(curve(o), inners)
    }

    fn anchors(&self) -> Option<Vec<(Complex64, Complex64)>> {
        match &self.cuts {
            CutConfig::Anchors { anchors: Anchors::Pairs(p) } => Some(
                p.iter().map(|[a, b]| (Complex64::new(a[0], a[1]), Complex64::new(b[0], b[1]))).collect(),
            ),
            _ => None,
        }
    }

    /// Validates the domain, builds the cuts and solves on `N` nodes per curve.
    pub fn problem(&self) -> Result<Problem> {
        if self.nodes == 0 || self.nodes % 2 == 1 {
            return Err(Error::InvalidInput(format!("N must be a positive even integer, got {}", self.nodes)));
        }
        let domain = self.domain()?;
        let cuts = if domain.connectivity() >= 2 { Some(build_cuts(&domain, self.anchors().as_deref())?) } else { None };
        Problem::with_cuts(domain, self.nodes, cuts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ANNULUS: &str = r#"{"curves":[{"role":"outer","coeffs":[[1,1,0]]},{"role":"inner","coeffs":[[1,0.5,0]]}],"N":64,"cuts":"auto"}"#;

    #[test]
    fn parses_the_documented_schema() {
        let c = DomainConfig::from_json(ANNULUS).unwrap();
        assert_eq!(c.nodes, 64);
        assert_eq!(c.cuts, CutConfig::default());
        assert_eq!(c.domain().unwrap().connectivity(), 2);
        let anchored = ANNULUS.replace(r#""cuts":"auto""#, r#""cuts":{"anchors":[[[0,1],[0,0.5]]]}"#);
        let c = DomainConfig::from_json(&anchored).unwrap();
        assert_eq!(c.anchors().unwrap(), vec![(Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.5))]);
        let arc = c.problem().unwrap().cuts().unwrap().cut(1).clone();
        assert!((arc.point(0.5) - Complex64::new(0.0, 0.75)).norm() < 1e-12);
        let auto = ANNULUS.replace(r#""cuts":"auto""#, r#""cuts":{"anchors":"auto"}"#);
        assert_eq!(DomainConfig::from_json(&auto).unwrap().anchors(), None);
    }

    #[test]
    fn defaults_and_round_trip() {
        let c = DomainConfig::from_json(r#"{"curves":[{"role":"outer","coeffs":[[1,2,0]]}]}"#).unwrap();
        assert_eq!(c.nodes, DEFAULT_NODES);
        let d = DomainConfig::from_domain(&crate::catalog::blob(), 128);
        assert_eq!(DomainConfig::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn rejects_bad_documents() {
        for bad in [
            r#"{"curves":[]}"#,
            r#"{"curves":[{"role":"inner","coeffs":[[1,1,0]]}]}"#,
            r#"{"curves":[{"role":"outer","coeffs":[[1,1,0]]}],"N":63}"#,
            r#"{"curves":[{"role":"side","coeffs":[[1,1,0]]}]}"#,
            r#"{"curves":[{"role":"outer","coeffs":[[1,1,0],[-2,0.6,0]]}]}"#,
        ] {
            let e = DomainConfig::from_json(bad).and_then(|c| c.problem().map(|_| ()));
            assert!(e.as_ref().is_err_and(Error::is_input_error), "{bad}: {e:?}");
        }
    }
}
