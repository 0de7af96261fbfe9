//! Experiment configuration (TOML) with per-preset defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::domain::DomainSpec;
use crate::error::{Error, Result};

/// Every preset, cheapest first.
pub const PRESETS: [&str; 11] = [
    "lemma44-integral",
    "thm12-wp-limit",
    "prop11-partition-identity",
    "prop31-exterior-identity",
    "thm15-fekete",
    "thm17-grunsky-asymptotics",
    "prop42-trace-constant",
    "prop41-trace-compare",
    "thm13-corner-slope",
    "thm14-equipotential-loewner",
    "thm16-pommerenke-slope",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    #[default]
    F64,
    DoubleDouble,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f64" | "double" => Ok(Precision::F64),
            "double-double" | "dd" => Ok(Precision::DoubleDouble),
            other => Err(Error::Config(format!("unknown precision `{other}` (use f64)"))),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F64 => "f64",
            Precision::DoubleDouble => "double-double",
        })
    }
}

/// One experiment run. Unset fields take the preset defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    /// Domain families; presets that compare several families take all of them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<DomainSpec>,
    /// Truncations `n`, strictly increasing.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_schedule: Vec<usize>,
    /// Values of `1 / (r - 1)` for equipotential radii, strictly increasing.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inverse_offsets: Vec<f64>,
    /// Grunsky columns per row for corner runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns_factor: Option<usize>,
    /// Relative band (slopes) or absolute tolerance (identities).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub svg: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_budget_mb: Option<usize>,
}

fn dyadic(lo: usize, hi: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut n = lo;
    while n <= hi {
        v.push(n);
        n *= 2;
    }
    v
}

impl ExperimentConfig {
    /// The preset `id` with every default filled in.
    pub fn preset(id: &str) -> Result<Self> {
        let mut c = Self {
            id: id.to_string(),
            ..Self::default()
        };
        c.fill_defaults()?;
        Ok(c)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let mut c: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.fill_defaults()?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn fill_defaults(&mut self) -> Result<()> {
        let sq = DomainSpec::square;
        let (families, ns, inv, cols, tol): (Vec<DomainSpec>, Vec<usize>, Vec<f64>, Option<usize>, f64) = match self.id.as_str() {
            "lemma44-integral" => (vec![], vec![], vec![], None, 1e-10),
            "thm12-wp-limit" => (vec![DomainSpec::Joukowski(0.5)], vec![64], vec![], None, 1e-8),
            "prop11-partition-identity" => (
                vec![DomainSpec::Disk, DomainSpec::Joukowski(0.5), sq()],
                (1..=16).collect(),
                vec![],
                Some(256),
                1e-6,
            ),
            "prop31-exterior-identity" => (vec![DomainSpec::Interior(vec![1.0, 0.2])], (1..=12).collect(), vec![], None, 1e-6),
            "thm15-fekete" => (vec![DomainSpec::Joukowski(0.3)], vec![16, 24, 32, 48], vec![], None, 0.05),
            "thm17-grunsky-asymptotics" => (vec![sq()], dyadic(8, 512), vec![], Some(4), 2.0),
            "prop42-trace-constant" | "prop41-trace-compare" => (vec![sq()], dyadic(128, 2048), vec![], Some(4), 3.0),
            "thm13-corner-slope" => (
                vec![DomainSpec::Polygon(3), sq(), DomainSpec::mixed()],
                dyadic(128, 2048),
                vec![],
                Some(4),
                0.15,
            ),
            "thm14-equipotential-loewner" => (vec![sq()], vec![2048], dyadic(16, 1024).into_iter().map(|q| q as f64).collect(), Some(4), 0.15),
            "thm16-pommerenke-slope" => (vec![sq()], vec![2048], dyadic(16, 1024).into_iter().map(|q| q as f64).collect(), Some(4), 0.20),
            other => return Err(Error::UnknownExperiment(other.to_string())),
        };
        if self.families.is_empty() {
            self.families = families;
        }
        if self.n_schedule.is_empty() {
            self.n_schedule = ns;
        }
        if self.inverse_offsets.is_empty() {
            self.inverse_offsets = inv;
        }
        if self.columns_factor.is_none() {
            self.columns_factor = cols;
        }
        if self.tolerance.is_none() {
            self.tolerance = Some(tol);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !PRESETS.contains(&self.id.as_str()) {
            return Err(Error::UnknownExperiment(self.id.clone()));
        }
        if self.n_schedule.windows(2).any(|w| w[1] <= w[0]) || self.n_schedule.contains(&0) {
            return Err(Error::Config("n_schedule must be positive and strictly increasing".into()));
        }
        if self.inverse_offsets.windows(2).any(|w| !(w[1] > w[0])) || self.inverse_offsets.iter().any(|q| !(*q > 0.0)) {
            return Err(Error::Config("inverse_offsets must be positive and strictly increasing".into()));
        }
        if self.tolerance.map_or(false, |t| !(t > 0.0)) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.columns_factor == Some(0) {
            return Err(Error::Config("columns_factor must be positive".into()));
        }
        if self.precision != Precision::F64 {
            return Err(Error::Config(format!("precision `{}` is not available in this build; use f64", self.precision)));
        }
        Ok(())
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.expect("defaults filled")
    }

    pub fn columns_factor(&self) -> usize {
        self.columns_factor.unwrap_or(4)
    }

    pub fn max_n(&self) -> usize {
        self.n_schedule.iter().copied().max().unwrap_or(0)
    }

    /// Rough peak memory in MB, dominated by the dense Grunsky block and its Gram product.
    pub fn estimated_memory_mb(&self) -> usize {
        let rows = self.max_n();
        let cols = match self.id.as_str() {
            "thm13-corner-slope" | "thm14-equipotential-loewner" | "thm16-pommerenke-slope" | "prop41-trace-compare"
            | "prop42-trace-constant" | "thm17-grunsky-asymptotics" => rows * self.columns_factor(),
            _ => rows.max(1) * 8,
        };
        // matrix, one scaled copy, its dense view, and n x n work arrays
        let bytes = 16 * rows * cols * 3 + 16 * rows * rows * 3;
        bytes / (1 << 20) + 16
    }

    /// Rough single-core runtime in minutes.
    pub fn estimated_minutes(&self) -> f64 {
        let rows = self.max_n() as f64;
        let cols = rows * self.columns_factor() as f64;
        // measured on one core: a 2048 x 8192 psi-engine block takes about 40 s
        let unit = rows * rows * cols / (2048.0 * 2048.0 * 8192.0);
        match self.id.as_str() {
            "thm13-corner-slope" => 0.75 * unit * self.families.len() as f64,
            "thm14-equipotential-loewner" | "thm16-pommerenke-slope" => 1.4 * unit,
            "prop41-trace-compare" | "prop42-trace-constant" => unit,
            "thm17-grunsky-asymptotics" => 0.05,
            "thm15-fekete" => 0.1,
            _ => 0.02,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for id in PRESETS {
            let c = ExperimentConfig::preset(id).unwrap();
            c.validate().unwrap();
        }
        assert!(matches!(ExperimentConfig::preset("thm99"), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn toml_round_trip_and_checks() {
        let c = ExperimentConfig::from_toml_str("id = \"thm13-corner-slope\"\nfamilies = [\"square\"]\nn_schedule = [64, 128, 256, 512]\n").unwrap();
        assert_eq!(c.families, vec![DomainSpec::square()]);
        assert_eq!(c.tolerance(), 0.15);
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back.n_schedule, c.n_schedule);
        assert!(ExperimentConfig::from_toml_str("id = \"thm13-corner-slope\"\nn_schedule = [64, 32, 128, 256]\n").is_err());
        assert!(ExperimentConfig::from_toml_str("id = \"lemma44-integral\"\nprecision = \"double-double\"\n").is_err());
        assert!(ExperimentConfig::from_toml_str("id = \"lemma44-integral\"\nbogus = 1\n").is_err());
    }
}
