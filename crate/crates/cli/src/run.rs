//! Run settings: the domain document plus optional top-level keys
//! `seed`, `samples`, `margin` and `tolerances`, overridable from flags.

use std::collections::BTreeMap;
use std::path::Path;

use hejhal_lab::config::DomainConfig;
use hejhal_lab::hejhal::{LambdaMethod, VerifyOptions, DEFAULT_MARGIN};
use hejhal_lab::suite::SuiteOptions;
use hejhal_lab::{Error, Problem, Result};
use serde::Deserialize;

pub const DEFAULT_SEED: u64 = 42;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_samples() -> usize {
    VerifyOptions::default().samples
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

#[derive(Debug, Clone, Deserialize)]
struct RunSection {
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default = "default_margin")]
    margin: f64,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub seed: u64,
    pub samples: usize,
    pub margin: f64,
    pub tolerances: BTreeMap<String, f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let domain = DomainConfig::from_json(text)?;
        let run: RunSection =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("run settings: {e}")))?;
        let config = Self { domain, seed: run.seed, samples: run.samples, margin: run.margin, tolerances: run.tolerances };
        config.validate()?;
        Ok(config)
    }

    /// Applies `--seed` and `--tolerance NAME=VALUE` flags.
    pub fn with_overrides(mut self, seed: Option<u64>, tolerances: &[String]) -> Result<Self> {
        if let Some(s) = seed {
            self.seed = s;
        }
        for t in tolerances {
            let (name, value) =
                t.split_once('=').ok_or_else(|| Error::InvalidInput(format!("expected NAME=VALUE, got '{t}'")))?;
            let value: f64 =
                value.trim().parse().map_err(|_| Error::InvalidInput(format!("bad tolerance value in '{t}'")))?;
            self.tolerances.insert(name.trim().to_string(), value);
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidInput("samples must be positive".into()));
        }
        if !(self.margin > 0.0 && self.margin < 0.5) {
            return Err(Error::InvalidInput("margin must lie in (0, 0.5)".into()));
        }
        self.suite(Vec::new()).validate()
    }

    pub fn problem(&self) -> Result<Problem> {
        self.domain.problem()
    }

    pub fn verify_options(&self, period_methods: Vec<LambdaMethod>) -> VerifyOptions {
        VerifyOptions {
            nodes: self.domain.nodes,
            period_methods,
            samples: self.samples,
            margin: self.margin,
            check_samples: self.samples,
            seed: self.seed,
        }
    }

    pub fn suite(&self, period_methods: Vec<LambdaMethod>) -> SuiteOptions {
        SuiteOptions {
            lambda: self.verify_options(period_methods),
            tolerances: self.tolerances.clone(),
            ..SuiteOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISK: &str = r#"{"curves":[{"role":"outer","coeffs":[[1,1,0]]}],"N":64}"#;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::parse(DISK).unwrap();
        assert_eq!((c.seed, c.samples, c.margin), (DEFAULT_SEED, 8, DEFAULT_MARGIN));
        let c = c.with_overrides(Some(7), &["unit_mass=1e-3".into()]).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.tolerances["unit_mass"], 1e-3);
        let text = DISK.replace(r#""N":64"#, r#""N":64,"seed":3,"tolerances":{"sign_zero":1e-4}"#);
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!((c.seed, c.tolerances["sign_zero"]), (3, 1e-4));
    }

    #[test]
    fn rejects_bad_settings() {
        let c = RunConfig::parse(DISK).unwrap();
        assert!(c.clone().with_overrides(None, &["unit_mass".into()]).is_err());
        assert!(c.clone().with_overrides(None, &["unit_mass=-1".into()]).is_err());
        assert!(c.with_overrides(None, &["bogus=1".into()]).is_err());
        assert!(RunConfig::parse(&DISK.replace(r#""N":64"#, r#""N":64,"margin":0"#)).is_err());
    }
}
