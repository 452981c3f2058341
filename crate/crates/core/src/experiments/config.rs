use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds::default_rho_grid;
use crate::error::{Error, Result};
use crate::measures::DeltaRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Dkw,
    Upper,
    LowerPipeline,
    BoxLower,
    Sandwich,
    Dominance,
    ReorderingOracle,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Dkw,
        ExperimentKind::Upper,
        ExperimentKind::LowerPipeline,
        ExperimentKind::BoxLower,
        ExperimentKind::Sandwich,
        ExperimentKind::Dominance,
        ExperimentKind::ReorderingOracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Dkw => "dkw",
            ExperimentKind::Upper => "upper",
            ExperimentKind::LowerPipeline => "lower-pipeline",
            ExperimentKind::BoxLower => "box-lower",
            ExperimentKind::Sandwich => "sandwich",
            ExperimentKind::Dominance => "dominance",
            ExperimentKind::ReorderingOracle => "reordering-oracle",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::UnknownExperiment(format!("'{s}' (known: {})", known.join(", ")))
            })
    }
}

/// `--delta auto` or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DeltaChoice {
    #[default]
    Auto,
    Value(f64),
}

impl DeltaChoice {
    pub fn resolve(&self, n: usize) -> f64 {
        match *self {
            DeltaChoice::Auto => DeltaRule::default().delta(n),
            DeltaChoice::Value(v) => v,
        }
    }
}

impl FromStr for DeltaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(DeltaChoice::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::config(format!("--delta must be 'auto' or a number, got '{s}'")))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::config(format!("--delta must be >= 0, got {v}")));
        }
        Ok(DeltaChoice::Value(v))
    }
}

impl Serialize for DeltaChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DeltaChoice::Auto => s.serialize_str("auto"),
            DeltaChoice::Value(v) => s.serialize_f64(*v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::config(format!(
                "--format must be json or csv, got '{s}'"
            ))),
        }
    }
}

/// Optional settings as given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub k: Option<Vec<usize>>,
    pub d: Option<Vec<usize>>,
    pub m: Option<usize>,
    pub rho_grid: Option<Vec<f64>>,
    pub delta: Option<DeltaChoice>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub k: Vec<usize>,
    pub d: Vec<usize>,
    /// Block size for the reordering oracle.
    pub m: usize,
    pub rho_grid: Vec<f64>,
    pub delta: DeltaChoice,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip)]
    pub threads: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: OutputFormat,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl ExperimentConfig {
    /// Defaults for `kind`, with `overrides` applied and validated.
    pub fn resolve(kind: ExperimentKind, o: Overrides) -> Result<Self> {
        use ExperimentKind::*;
        let (n, k, d, samples) = match kind {
            Dkw => (10_000, vec![1], vec![1], 2000),
            Upper => (1000, vec![1, 2, 5], vec![1], 1000),
            LowerPipeline => (200_000, vec![1], vec![256], 1),
            BoxLower => (1, vec![1], vec![16, 64, 256, 1024], 100_000),
            Sandwich => (1, vec![1, 2, 4, 8, 16, 32], vec![1], 100_000),
            Dominance => (64, vec![2, 3, 5, 10], vec![1], 100_000),
            ReorderingOracle => (6, vec![1], vec![1], 2000),
        };
        let cfg = ExperimentConfig {
            experiment: kind,
            n: o.n.unwrap_or(n),
            k: o.k.unwrap_or(k),
            d: o.d.unwrap_or(d),
            m: o.m.unwrap_or(2),
            rho_grid: o.rho_grid.unwrap_or_else(|| default_rho_grid(12)),
            delta: o.delta.unwrap_or_default(),
            samples: o.samples.unwrap_or(samples),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            threads: o.threads.unwrap_or(1),
            out: o.out,
            format: o.format.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.samples == 0 || self.threads == 0 {
            return Err(Error::config("n, samples and threads must be positive"));
        }
        if self.k.is_empty() || self.k.contains(&0) {
            return Err(Error::config("k values must be positive"));
        }
        if self.d.is_empty() || self.d.contains(&0) {
            return Err(Error::config("d values must be positive"));
        }
        if self.rho_grid.is_empty() || self.rho_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::config("rho grid must be nonempty and positive"));
        }
        Ok(())
    }
}

/// Parses a comma-separated list such as `1,2,4`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|item| {
            item.trim()
                .parse()
                .map_err(|_| Error::config(format!("cannot parse list item '{item}' in '{s}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!(matches!(
            "nope".parse::<ExperimentKind>(),
            Err(Error::UnknownExperiment(_))
        ));
    }

    #[test]
    fn delta_parsing() {
        assert_eq!("auto".parse::<DeltaChoice>().unwrap(), DeltaChoice::Auto);
        assert_eq!(
            "0.1".parse::<DeltaChoice>().unwrap(),
            DeltaChoice::Value(0.1)
        );
        assert!("-1".parse::<DeltaChoice>().is_err());
        assert!("x".parse::<DeltaChoice>().is_err());
    }

    #[test]
    fn lists_and_validation() {
        assert_eq!(parse_list::<usize>("1, 2,4").unwrap(), vec![1, 2, 4]);
        assert!(parse_list::<usize>("1,a").is_err());
        let bad = Overrides {
            k: Some(vec![0]),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(ExperimentKind::Sandwich, bad).is_err());
    }
}
