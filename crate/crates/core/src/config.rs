//! TOML run configuration.
//!
//! A file holds an optional `[run]` section (seed, workers, output) and one
//! section per command: `[estimate]`, `[witness]`, `[scan]`. Unknown keys are
//! rejected. Cutoffs and caps accept `inf`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drift::WitnessConfig;
use crate::error::{Error, Result};
use crate::estimator::MCConfig;
use crate::scan::ScanConfig;

/// Seed used when neither the file nor the command line sets one.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Output encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; `0` uses every core.
    #[serde(default)]
    pub workers: usize,
    /// Output base path without extension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, workers: 0, out: None, format: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<MCConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.resolve();
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration is always representable in TOML")
    }

    /// Overrides the seed and worker count and pushes them into every section.
    pub fn with_overrides(mut self, seed: Option<u64>, workers: Option<usize>) -> Self {
        if let Some(seed) = seed {
            self.run.seed = seed;
        }
        if let Some(workers) = workers {
            self.run.workers = workers;
        }
        self.resolve();
        self
    }

    fn resolve(&mut self) {
        let (seed, workers) = (self.run.seed, self.run.workers);
        if let Some(e) = self.estimate.as_mut() {
            e.master_seed = seed;
            e.workers = workers;
        }
        if let Some(w) = self.witness.as_mut() {
            w.master_seed = seed;
            w.workers = workers;
        }
        if let Some(s) = self.scan.as_mut() {
            s.master_seed = seed;
            s.workers = workers;
        }
    }
}

/// Serde adapter writing non-finite floats as the strings `"inf"`, `"-inf"`
/// and `"nan"` (JSON has no literal for them) and reading either form.
pub mod extended_float {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct Extended;

    impl Visitor<'_> for Extended {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(Extended)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::CutoffSchedule;

    const SAMPLE: &str = r#"
[run]
seed = 7
workers = 3

[estimate]
d = 2
N = 16
lambda = 0.1
K = inf
L = 40.0
p = 2
nsamples = 1000

[witness]
d = 2
N = 16
gamma = 0.05
lambda = 1.5
K = "inf"
K_M = 2.77
L = 1e4
nsamples = 500

[scan]
d = 2
N = [8, 16]
c = [0.0, 10.0]
schedules = [{ kind = "log", kappa = 1.0 }, { kind = "constant", K = 10.0 }]
gamma = 0.05
margin = 10.0
nsamples = 100
"#;

    #[test]
    fn parses_every_section() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        let e = c.estimate.as_ref().unwrap();
        assert_eq!(e.k, f64::INFINITY);
        assert_eq!(e.p, 2.0);
        assert_eq!((e.master_seed, e.workers), (7, 3));
        let w = c.witness.as_ref().unwrap();
        assert_eq!(w.k, f64::INFINITY);
        assert_eq!(w.k_m, Some(2.77));
        let s = c.scan.as_ref().unwrap();
        assert_eq!(s.schedules[1], CutoffSchedule::Constant { k: 10.0 });
        assert_eq!(s.master_seed, 7);
    }

    #[test]
    fn round_trips_losslessly() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        let again = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(c, again);
        let json = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.estimate.unwrap().k, f64::INFINITY);
    }

    #[test]
    fn rejects_unknown_keys_with_location() {
        let err = RunConfig::parse("[estimate]\nd = 2\nbogus = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
        assert!(RunConfig::parse("[nope]\n").is_err());
    }

    #[test]
    fn overrides_reach_sections() {
        let c = RunConfig::parse(SAMPLE).unwrap().with_overrides(Some(99), Some(1));
        assert_eq!(c.estimate.unwrap().master_seed, 99);
        assert_eq!(c.scan.unwrap().workers, 1);
    }

    #[test]
    fn empty_file_uses_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.run.seed, DEFAULT_SEED);
        assert!(c.estimate.is_none());
    }
}
