//! Column-keyword search over tables harvested from HTML pages.
//!
//! A query names the columns it wants (`country | capital`). Candidate tables
//! come from a three-field inverted index; each candidate column gets a
//! label (a query column, `na` or `nr`) by joint inference over per-column
//! scores and cross-table column similarity; labeled columns are then merged
//! into one ranked answer table.

pub mod answer;
pub mod config;
pub mod flow;
pub mod harvest;
pub mod index;
pub mod infer;
pub mod model;
pub mod pipeline;
pub mod score;
pub mod synth;
pub mod table;
pub mod text;

pub use answer::{AnswerTable, GoldLabels};
pub use config::{Config, ModelWeights, RetrievalConfig};
pub use index::Index;
pub use infer::Algorithm;
pub use model::{Label, Labeling, Model, ModelInputs};
pub use pipeline::{run_query, QueryOutcome};
pub use score::Query;
pub use table::{RawDocument, WebTable};
