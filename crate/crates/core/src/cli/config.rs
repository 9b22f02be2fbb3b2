//! Experiment configuration file (TOML).
//!
//! ```toml
//! servers = 2
//! seed = 42
//!
//! [sequence]
//! model = "iid"
//! tau = { dist = "exponential", rate = 1.0 }
//! sigma = { dist = "exponential", rate = 1.0 }
//! patience = { dist = "deterministic", value = 1.0 }
//!
//! [bounds]
//! samples = 5000
//! ```
//!
//! Every section other than `sequence` is optional; missing keys take the
//! defaults of the corresponding `Default` implementations.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coupling::{CftpOptions, DEFAULT_EXTRA_POINTS, DEFAULT_HSET_CAP};
use crate::error::{Error, Result};
use crate::loynes::LoynesOptions;
use crate::sequences::{DriverModel, SequenceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub servers: usize,
    #[serde(default)]
    pub seed: u64,
    pub sequence: DriverModel,
    #[serde(default)]
    pub loynes: LoynesOptions,
    #[serde(default)]
    pub validate: ValidateParams,
    #[serde(default)]
    pub bounds: BoundsParams,
    #[serde(default)]
    pub cftp: CftpParams,
    #[serde(default)]
    pub renovate: RenovateParams,
    #[serde(default)]
    pub hset: HSetParams,
    #[serde(default)]
    pub simulate: SimulateParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateParams {
    pub arrivals: usize,
    pub start: i64,
    pub tolerance: f64,
    /// Run lattice models in exact integer arithmetic.
    pub exact: bool,
    /// Also write the per-arrival trace.
    pub trace: bool,
}

impl Default for ValidateParams {
    fn default() -> Self {
        Self {
            arrivals: 100_000,
            start: 0,
            tolerance: 1e-9,
            exact: true,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsParams {
    pub samples: usize,
    pub start: i64,
}

impl Default for BoundsParams {
    fn default() -> Self {
        Self {
            samples: 10_000,
            start: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CftpParams {
    pub at: i64,
    pub initial_horizon: usize,
    pub max_horizon: usize,
    pub extra_points: usize,
}

impl Default for CftpParams {
    fn default() -> Self {
        let o = CftpOptions::default();
        Self {
            at: 0,
            initial_horizon: o.initial_horizon,
            max_horizon: o.max_horizon,
            extra_points: o.extra_points,
        }
    }
}

impl CftpParams {
    pub fn options(&self) -> CftpOptions {
        CftpOptions {
            initial_horizon: self.initial_horizon,
            max_horizon: self.max_horizon,
            extra_points: self.extra_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenovateParams {
    pub from: i64,
    pub to: i64,
    /// Random initial sets re-checked for coalescence at each event.
    pub coalescence_sets: usize,
    pub set_size: usize,
}

impl Default for RenovateParams {
    fn default() -> Self {
        Self {
            from: 0,
            to: 9_999,
            coalescence_sets: 100,
            set_size: DEFAULT_EXTRA_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HSetParams {
    /// First target index.
    pub start: i64,
    /// Number of consecutive target indices.
    pub starts: usize,
    /// Deepest `n`; defaults to `10 * servers`.
    pub depth: Option<usize>,
    pub cap: u128,
}

impl Default for HSetParams {
    fn default() -> Self {
        Self {
            start: 0,
            starts: 100,
            depth: None,
            cap: DEFAULT_HSET_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub arrivals: usize,
    pub start: i64,
}

impl Default for SimulateParams {
    fn default() -> Self {
        Self {
            arrivals: 100_000,
            start: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sequence_spec(&self) -> SequenceSpec {
        SequenceSpec::new(self.sequence.clone(), self.seed)
    }

    pub fn hset_depth(&self) -> usize {
        self.hset.depth.unwrap_or(10 * self.servers)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.servers == 0 {
            return bad("servers must be at least 1");
        }
        self.sequence_spec().validate()?;
        if self.loynes.max_depth == 0 || self.loynes.z_window == 0 {
            return bad("loynes depths and windows must be at least 1");
        }
        if !(self.loynes.tolerance > 0.0) || !(self.validate.tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.validate.arrivals == 0 || self.simulate.arrivals == 0 || self.bounds.samples == 0 {
            return bad("arrival and sample counts must be at least 1");
        }
        if self.cftp.initial_horizon == 0 || self.cftp.max_horizon < self.cftp.initial_horizon {
            return bad("cftp horizons must satisfy 1 <= initial_horizon <= max_horizon");
        }
        if self.renovate.to < self.renovate.from {
            return bad("renovate window is empty");
        }
        if self.hset.starts == 0 || self.hset_depth() == 0 || self.hset.cap == 0 {
            return bad("hset starts, depth and cap must be at least 1");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
servers = 2
seed = 7
[sequence]
model = "iid"
tau = { dist = "exponential", rate = 1.0 }
sigma = { dist = "exponential", rate = 1.0 }
patience = { dist = "deterministic", value = inf }
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.servers, 2);
        assert_eq!(cfg.validate, ValidateParams::default());
        assert_eq!(cfg.hset_depth(), 20);
        assert_eq!(cfg.hash(), ExperimentConfig::parse(MINIMAL).unwrap().hash());
    }

    #[test]
    fn rejects_zero_servers_and_unknown_keys() {
        let zero = MINIMAL.replace("servers = 2", "servers = 0");
        assert!(matches!(
            ExperimentConfig::parse(&zero),
            Err(Error::Config(_))
        ));
        let typo = MINIMAL.replace("seed = 7", "seed = 7\nsevers = 3");
        assert!(ExperimentConfig::parse(&typo).is_err());
    }

    #[test]
    fn parses_modulated_and_lattice_models() {
        let mm = r#"
servers = 3
[sequence]
model = "markov_modulated"
transition = [[0.9, 0.1], [0.2, 0.8]]
[[sequence.states]]
tau = { dist = "exponential", rate = 1.0 }
sigma = { dist = "uniform", low = 0.0, high = 2.0 }
patience = { dist = "exponential", rate = 1.0 }
[[sequence.states]]
tau = { dist = "shifted_exponential", shift = 0.1, rate = 2.0 }
sigma = { dist = "exponential", rate = 1.0 }
patience = { dist = "deterministic", value = 0.5 }
"#;
        let cfg = ExperimentConfig::parse(mm).unwrap();
        assert!(matches!(
            cfg.sequence,
            DriverModel::MarkovModulated {
                burn_in: 10_000,
                ..
            }
        ));
        let lattice = r#"
servers = 2
[sequence]
model = "lattice"
alpha = 0.5
tau = { dist = "discrete", values = [0.5, 1.0, 1.5], probs = [0.2, 0.3, 0.5] }
sigma = { dist = "discrete", values = [0.0, 0.5, 2.0], probs = [0.5, 0.25, 0.25] }
patience = { dist = "exponential", rate = 2.0 }
"#;
        assert!(ExperimentConfig::parse(lattice).is_ok());
    }
}
