//! Inference over the column model: per-table matching, max-marginals,
//! table-centric collective inference, constrained α-expansion and an
//! exhaustive oracle.

mod alpha;
mod brute;
mod independent;
mod marginals;
mod table_centric;

pub use alpha::{alpha_expansion, alpha_expansion_detailed, relaxed_objective, AlphaOutcome};
pub use brute::{brute_force_map, BRUTE_FORCE_MAX_COLUMNS};
pub use independent::{label_independent, label_table_independent, TableDecision};
pub use marginals::{column_confidence, max_marginals, table_confidences};
pub use table_centric::{table_centric, table_centric_detailed, TableCentricOutcome};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::flow::FlowError;
use crate::model::Model;
pub use crate::model::Labeling;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InferError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("brute force refused: {columns} columns exceed the limit of {limit}")]
    TooLarge { columns: usize, limit: usize },
    #[error("unknown algorithm {0:?}; expected independent, table-centric, alpha-expansion or brute-force")]
    UnknownAlgorithm(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Algorithm {
    Independent,
    TableCentric,
    AlphaExpansion,
    BruteForce,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Independent,
        Algorithm::TableCentric,
        Algorithm::AlphaExpansion,
        Algorithm::BruteForce,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Independent => "independent",
            Algorithm::TableCentric => "table-centric",
            Algorithm::AlphaExpansion => "alpha-expansion",
            Algorithm::BruteForce => "brute-force",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = InferError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| InferError::UnknownAlgorithm(s.to_string()))
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.as_str().to_string()
    }
}

impl TryFrom<String> for Algorithm {
    type Error = InferError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

pub fn run(model: &Model, algo: Algorithm) -> Result<Labeling, InferError> {
    match algo {
        Algorithm::Independent => label_independent(model),
        Algorithm::TableCentric => table_centric(model),
        Algorithm::AlphaExpansion => alpha_expansion(model),
        Algorithm::BruteForce => brute_force_map(model),
    }
}

/// Probability that a table is relevant: logistic of the gap between its best
/// constrained mapping and the all-nr labeling.
pub fn relevance_probability(theta: &[Vec<f64>], q: usize, m: usize) -> Result<f64, FlowError> {
    let d = label_table_independent(theta, q, m)?;
    Ok(match d.matched_score {
        Some(s) => 1.0 / (1.0 + (d.nr_score - s).exp()),
        None => 0.0,
    })
}
