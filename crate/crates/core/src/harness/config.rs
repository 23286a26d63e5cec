use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Algorithms the harness can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    KnownCsi,
    UnknownCsiAn,
    HybridNoPls,
    FullDigitalGed,
    FullDigitalNoPls,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::KnownCsi,
        Algorithm::UnknownCsiAn,
        Algorithm::HybridNoPls,
        Algorithm::FullDigitalGed,
        Algorithm::FullDigitalNoPls,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::KnownCsi => "known-csi",
            Algorithm::UnknownCsiAn => "unknown-csi-an",
            Algorithm::HybridNoPls => "hybrid-no-pls",
            Algorithm::FullDigitalGed => "full-digital-ged",
            Algorithm::FullDigitalNoPls => "full-digital-no-pls",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    SnrSweep,
    QosSweep,
}

/// Scenario parameters. Every field has a desk-scale default; see
/// [`ExperimentConfig::large_array`] for the full 192-antenna setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tx_antennas: usize,
    pub bob_antennas: usize,
    pub eve_antennas: usize,
    /// `d/λ` for all arrays.
    pub element_spacing: f64,
    pub rf_chains: usize,
    pub streams: usize,
    pub codebook_bits: u32,
    pub pool_size: usize,
    /// Inclusive `[min, max]` paths per receiver.
    pub path_count_range: [usize; 2],
    pub path_loss_bob: f64,
    pub path_loss_eve: f64,
    pub noise_variance_bob: f64,
    pub noise_variance_eve: f64,
    /// SNR points (dB) for `snr-sweep`; `P = 10^(SNR/10) · σ_b²`.
    pub snr_grid_db: Vec<f64>,
    /// QoS targets (bits/s/Hz) for `qos-sweep`.
    pub qos_grid: Vec<f64>,
    /// Fixed SNR (dB) setting the total power in `qos-sweep`.
    pub qos_snr_db: f64,
    /// QoS target used by `unknown-csi-an` inside `snr-sweep`.
    pub an_qos: f64,
    pub num_trials: u64,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tx_antennas: 32,
            bob_antennas: 32,
            eve_antennas: 32,
            element_spacing: 0.5,
            rf_chains: 2,
            streams: 2,
            codebook_bits: 5,
            pool_size: 20,
            path_count_range: [3, 8],
            path_loss_bob: 1.0,
            path_loss_eve: 1.0,
            noise_variance_bob: 1.0,
            noise_variance_eve: 1.0,
            snr_grid_db: vec![-10.0, 0.0, 10.0],
            qos_grid: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            qos_snr_db: 10.0,
            an_qos: 4.0,
            num_trials: 200,
            seed: 0,
            algorithms: vec![
                Algorithm::KnownCsi,
                Algorithm::HybridNoPls,
                Algorithm::FullDigitalGed,
                Algorithm::FullDigitalNoPls,
            ],
        }
    }
}

/// One problem with one configuration field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldIssue {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<FieldIssue>,
}

impl ConfigError {
    fn single(field: &str, message: impl Into<String>) -> Self {
        Self {
            issues: vec![FieldIssue {
                field: field.into(),
                message: message.into(),
            }],
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration")?;
        for issue in &self.issues {
            write!(f, "\n  {}: {}", issue.field, issue.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    /// 192-antenna arrays, 7-bit (128-angle) codebooks, `N_RF = N_s = 2`.
    pub fn large_array() -> Self {
        Self {
            tx_antennas: 192,
            bob_antennas: 192,
            eve_antennas: 192,
            codebook_bits: 7,
            snr_grid_db: vec![-30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0],
            ..Self::default()
        }
    }

    /// Parses a TOML document, applies `key=value` overrides on top of it and
    /// fills missing keys with defaults. Does not validate.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::single("<file>", e.message().to_string()))?;
        for raw in overrides {
            let (key, value) = parse_override(raw)?;
            table.insert(key, value);
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::single("<config>", e.message().to_string()))
    }

    /// Reads `path` (or starts from defaults when `None`) and applies
    /// overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, super::HarnessError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        Ok(Self::from_toml_str(&text, overrides)?)
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self, kind: ExperimentKind) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let mut bad = |field: &str, message: String| {
            issues.push(FieldIssue {
                field: field.into(),
                message,
            })
        };
        for (field, n) in [
            ("tx_antennas", self.tx_antennas),
            ("bob_antennas", self.bob_antennas),
            ("eve_antennas", self.eve_antennas),
        ] {
            if n == 0 {
                bad(field, "must be at least 1".into());
            }
        }
        if !(self.element_spacing > 0.0) || !self.element_spacing.is_finite() {
            bad("element_spacing", format!("must be positive, got {}", self.element_spacing));
        }
        if self.streams == 0 {
            bad("streams", "must be at least 1".into());
        }
        if self.streams > self.rf_chains {
            bad("streams", format!("{} streams exceed {} RF chains", self.streams, self.rf_chains));
        }
        let min_antennas = self.tx_antennas.min(self.bob_antennas);
        if self.rf_chains > min_antennas {
            bad("rf_chains", format!("{} RF chains exceed {min_antennas} antennas", self.rf_chains));
        }
        if self.codebook_bits == 0 || self.codebook_bits > 16 {
            bad("codebook_bits", format!("must be in 1..=16, got {}", self.codebook_bits));
        }
        let [lo, hi] = self.path_count_range;
        if lo == 0 || lo > hi {
            bad("path_count_range", format!("[{lo}, {hi}] must be nonempty and start at 1 or more"));
        }
        if self.pool_size < hi {
            bad("pool_size", format!("{} scatterers cannot supply {hi} paths", self.pool_size));
        }
        for (field, v) in [
            ("path_loss_bob", self.path_loss_bob),
            ("path_loss_eve", self.path_loss_eve),
            ("noise_variance_bob", self.noise_variance_bob),
            ("noise_variance_eve", self.noise_variance_eve),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                bad(field, format!("must be positive, got {v}"));
            }
        }
        if self.num_trials == 0 {
            bad("num_trials", "must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            bad("algorithms", "select at least one algorithm".into());
        }
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            bad("algorithms", "contains duplicates".into());
        }
        let uses_an = self.algorithms.contains(&Algorithm::UnknownCsiAn);
        if uses_an && self.streams >= self.rf_chains {
            bad(
                "rf_chains",
                format!("unknown-csi-an needs streams ({}) < rf_chains ({})", self.streams, self.rf_chains),
            );
        }
        if self.streams > self.tx_antennas.min(self.bob_antennas) {
            bad("streams", "more streams than antennas".into());
        }
        match kind {
            ExperimentKind::SnrSweep => {
                if self.snr_grid_db.is_empty() {
                    bad("snr_grid_db", "must be nonempty for snr-sweep".into());
                }
                if self.snr_grid_db.iter().any(|x| !x.is_finite()) {
                    bad("snr_grid_db", "values must be finite".into());
                }
                if uses_an && !(self.an_qos >= 0.0 && self.an_qos.is_finite()) {
                    bad("an_qos", format!("must be a finite nonnegative rate, got {}", self.an_qos));
                }
            }
            ExperimentKind::QosSweep => {
                if self.qos_grid.is_empty() {
                    bad("qos_grid", "must be nonempty for qos-sweep".into());
                }
                if self.qos_grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    bad("qos_grid", "values must be finite and nonnegative".into());
                }
                if !uses_an {
                    bad("algorithms", "qos-sweep requires unknown-csi-an".into());
                }
                if !self.qos_snr_db.is_finite() {
                    bad("qos_snr_db", "must be finite".into());
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { issues })
        }
    }
}

/// `key=value`, with `value` read as a TOML value and falling back to a bare
/// string.
fn parse_override(raw: &str) -> Result<(String, toml::Value), ConfigError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| ConfigError::single(raw, "override must look like key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::single(raw, "override key is empty"));
    }
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key.to_string(), parsed))
}
