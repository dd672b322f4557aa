//! Run configuration: model weights, fixed hyperparameters and retrieval
//! settings, loadable from a single TOML or JSON file.

use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading config {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing TOML config")]
    Toml(#[from] toml::de::Error),
    #[error("parsing JSON config")]
    Json(#[from] serde_json::Error),
    #[error("serializing config")]
    Write(#[from] toml::ser::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Match reliability of the five table parts consulted by the segmented
/// similarity for query tokens that fall outside the anchoring header.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Reliability {
    pub title: f64,
    pub context: f64,
    pub header_column: f64,
    pub header_row: f64,
    pub body: f64,
}

impl Default for Reliability {
    fn default() -> Self {
        Self {
            title: 1.0,
            context: 0.9,
            header_column: 0.5,
            header_row: 1.0,
            body: 0.8,
        }
    }
}

/// The six trainable weights plus the fixed constants of the column model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelWeights {
    /// Segmented similarity.
    pub w1: f64,
    /// Query-fraction cover.
    pub w2: f64,
    /// PMI² affinity (only used when `use_pmi2` is set).
    pub w3: f64,
    /// Irrelevance potential.
    pub w4: f64,
    /// Bias on every query label; negative.
    pub w5: f64,
    /// Cross-table edge weight.
    pub we: f64,
    /// Smoothing constant of the normalized neighbour similarity.
    pub lambda: f64,
    /// Neighbours with raw similarity below this are ignored.
    pub nsim_floor: f64,
    /// Column confidence needed to open an edge gate.
    pub conf_threshold: f64,
    /// Overrides MIN-MATCH's `m`; defaults to 2 for q >= 2, else 1.
    pub min_match: Option<usize>,
    /// Fraction of a column's non-empty cells a token must occur in to count
    /// as frequent body content.
    pub body_frequency: f64,
    pub use_pmi2: bool,
    pub reliability: Reliability,
}

impl Default for ModelWeights {
    fn default() -> Self {
        // These reproduce the gold labeling of the bundled explorer fixture
        // under table-centric inference; see fixtures/figure1.
        Self {
            w1: 2.0,
            w2: 1.0,
            w3: 0.25,
            w4: 0.5,
            w5: -0.15,
            we: 2.0,
            lambda: 0.3,
            nsim_floor: 0.1,
            conf_threshold: 0.6,
            min_match: None,
            body_frequency: 0.3,
            use_pmi2: false,
            reliability: Reliability::default(),
        }
    }
}

impl ModelWeights {
    pub fn min_match_for(&self, q: usize) -> usize {
        self.min_match.unwrap_or(if q >= 2 { 2 } else { 1 }).min(q.max(1))
    }

    /// The trainable part as `(w1, w2, w3, w4, w5, we)`.
    pub fn trainable(&self) -> [f64; 6] {
        [self.w1, self.w2, self.w3, self.w4, self.w5, self.we]
    }

    pub fn with_trainable(mut self, w: [f64; 6]) -> Self {
        [self.w1, self.w2, self.w3, self.w4, self.w5, self.we] = w;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let nonneg = [("w1", self.w1), ("w2", self.w2), ("w3", self.w3), ("w4", self.w4), ("we", self.we)];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!("{name} must be a finite non-negative number")));
            }
        }
        if !self.w5.is_finite() {
            return Err(ConfigError::Invalid("w5 must be finite".into()));
        }
        let r = self.reliability;
        for p in [r.title, r.context, r.header_column, r.header_row, r.body] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::Invalid("reliabilities must lie in [0, 1]".into()));
            }
        }
        if self.lambda < 0.0 || !(0.0..=1.0).contains(&self.conf_threshold) {
            return Err(ConfigError::Invalid("lambda must be >= 0 and conf_threshold in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Candidate retrieval settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    pub top_k: usize,
    pub stage2: bool,
    /// Relevance probability a table needs to seed the second probe.
    pub stage2_threshold: f64,
    pub stage2_tables: usize,
    pub stage2_rows: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            top_k: 100,
            stage2: true,
            stage2_threshold: 0.8,
            stage2_tables: 2,
            stage2_rows: 10,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelWeights,
    pub retrieval: RetrievalConfig,
}

impl Config {
    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: Config = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)?
        };
        cfg.model.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }
}
