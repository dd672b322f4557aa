//! End-to-end query processing over an index, plus evaluation and tuning
//! drivers built on it.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::answer::{consolidate, f1_error, rank_rows, AnswerError, AnswerTable, GoldLabels};
use crate::config::{Config, ConfigError, ModelWeights};
use crate::flow::FlowError;
use crate::index::{two_stage_retrieve, Index, Retrieval};
use crate::infer::{self, relevance_probability, Algorithm, InferError};
use crate::model::{grid_search_weights, GridSpec, Label, Labeling, Model, ModelInputs, TrainingQuery, TuneError};
use crate::score::{pair_similarities, table_features, CorpusSets, Query};
use crate::table::WebTable;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("query has no columns")]
    EmptyQuery,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error(transparent)]
    Answer(#[from] AnswerError),
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error("query {query}: no gold labels for candidate table {table}")]
    MissingGold { query: String, table: String },
}

/// One query as stored in query files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryEntry {
    pub id: String,
    pub columns: Vec<String>,
}

/// A query together with its gold labels, as stored in training files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledQuery {
    pub id: String,
    pub columns: Vec<String>,
    pub labels: Vec<(String, usize, Label)>,
}

impl LabeledQuery {
    pub fn split(&self) -> (QueryEntry, GoldLabels) {
        (
            QueryEntry {
                id: self.id.clone(),
                columns: self.columns.clone(),
            },
            GoldLabels {
                query_id: self.id.clone(),
                labels: self.labels.clone(),
            },
        )
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub probe: f64,
    pub read_parse: f64,
    pub column_map: f64,
    pub consolidate: f64,
}

impl Timings {
    pub fn total(&self) -> f64 {
        self.probe + self.read_parse + self.column_map + self.consolidate
    }
}

/// Candidate tables and model inputs for one query.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub retrieval: Retrieval,
    pub tables: Vec<WebTable>,
    pub inputs: ModelInputs,
}

#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub prepared: Prepared,
    pub model: Model,
    pub labeling: Labeling,
    /// Relevance probability per candidate table id.
    pub relevance: BTreeMap<String, f64>,
    pub answer: AnswerTable,
    pub timings: Timings,
}

/// Retrieves candidates and computes their features and pairwise column
/// similarities. Stage 2 of retrieval judges tables one at a time with the
/// configured weights.
pub fn prepare(index: &Index, query: &Query, config: &Config, seed: u64) -> Result<(Prepared, Timings), PipelineError> {
    if query.q() == 0 {
        return Err(PipelineError::EmptyQuery);
    }
    config.model.validate()?;
    let w = &config.model;
    let q = query.q();
    let qtok = query.tokens();
    let corpus: Option<&dyn CorpusSets> = w.use_pmi2.then_some(index as &dyn CorpusSets);
    let mut timings = Timings::default();

    let mut cache = BTreeMap::new();
    let mut failure: Option<FlowError> = None;
    let started = Instant::now();
    let retrieval = two_stage_retrieve(index, query, &config.retrieval, seed, &mut |docs| {
        docs.iter()
            .map(|&d| {
                let f = cache
                    .entry(d)
                    .or_insert_with(|| table_features(&qtok, index.table(d), w, index, corpus));
                relevance_probability(&f.potentials(q, w), q, w.min_match_for(q)).unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    0.0
                })
            })
            .collect()
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    timings.probe = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let tables: Vec<WebTable> = retrieval.candidates.iter().map(|&d| index.table(d).clone()).collect();
    let features = retrieval
        .candidates
        .iter()
        .map(|&d| {
            cache
                .remove(&d)
                .unwrap_or_else(|| table_features(&qtok, index.table(d), w, index, corpus))
        })
        .collect();
    let pairs = pair_similarities(&tables, index);
    timings.read_parse = started.elapsed().as_secs_f64();
    Ok((
        Prepared {
            retrieval,
            tables,
            inputs: ModelInputs { q, tables: features, pairs },
        },
        timings,
    ))
}

/// Runs the full query pipeline.
pub fn run_query(
    index: &Index,
    query: &Query,
    config: &Config,
    algo: Algorithm,
    seed: u64,
) -> Result<QueryOutcome, PipelineError> {
    let (prepared, mut timings) = prepare(index, query, config, seed)?;
    let started = Instant::now();
    let model = prepared.inputs.build(&config.model)?;
    let labeling = infer::run(&model, algo)?;
    timings.column_map = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let mut relevance = BTreeMap::new();
    for t in &model.tables {
        relevance.insert(t.id.clone(), relevance_probability(&t.theta, model.q, model.m)?);
    }
    let answer = rank_rows(consolidate(&prepared.tables, &labeling, &query.columns), &relevance);
    timings.consolidate = started.elapsed().as_secs_f64();
    Ok(QueryOutcome {
        prepared,
        model,
        labeling,
        relevance,
        answer,
        timings,
    })
}

/// Gold labeling aligned with `tables`; every table must have gold labels.
pub fn gold_labeling(gold: &GoldLabels, tables: &[WebTable]) -> Result<Labeling, PipelineError> {
    let mut out = Vec::with_capacity(tables.len());
    for t in tables {
        match gold.table(&t.id, t.n_cols())? {
            Some(labels) => out.push(labels),
            None => {
                return Err(PipelineError::MissingGold {
                    query: gold.query_id.clone(),
                    table: t.id.clone(),
                })
            }
        }
    }
    Ok(Labeling { tables: out })
}

/// Labeling output: one entry per candidate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelingReport {
    pub columns: Vec<String>,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub tables: Vec<TableLabels>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableLabels {
    pub id: String,
    pub relevance: f64,
    pub labels: Vec<Label>,
}

impl LabelingReport {
    pub fn new(query: &Query, algo: Algorithm, seed: u64, out: &QueryOutcome) -> Self {
        Self {
            columns: query.columns.clone(),
            algorithm: algo,
            seed,
            tables: out
                .prepared
                .tables
                .iter()
                .zip(&out.labeling.tables)
                .map(|(t, labels)| TableLabels {
                    id: t.id.clone(),
                    relevance: out.relevance[&t.id],
                    labels: labels.clone(),
                })
                .collect(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&[Label]> {
        self.tables.iter().find(|t| t.id == id).map(|t| t.labels.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub query_id: String,
    /// One entry per evaluated algorithm; `None` when the query failed.
    pub errors: Vec<Option<f64>>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algorithms: Vec<Algorithm>,
    pub rows: Vec<EvalRow>,
    /// Mean error per algorithm over queries that did not fail.
    pub means: Vec<Option<f64>>,
}

/// F1 error of each algorithm on each query. Failures are recorded per query.
pub fn evaluate(
    index: &Index,
    queries: &[QueryEntry],
    gold: &[GoldLabels],
    config: &Config,
    algos: &[Algorithm],
    seed: u64,
) -> Result<EvalReport, PipelineError> {
    config.model.validate()?;
    let gold: BTreeMap<&str, &GoldLabels> = gold.iter().map(|g| (g.query_id.as_str(), g)).collect();
    let mut rows = Vec::with_capacity(queries.len());
    for qe in queries {
        let mut row = EvalRow {
            query_id: qe.id.clone(),
            errors: vec![None; algos.len()],
            note: None,
        };
        match eval_one(index, qe, gold.get(qe.id.as_str()).copied(), config, algos, seed) {
            Ok(errors) => row.errors = errors.into_iter().map(Some).collect(),
            Err(e) => row.note = Some(error_chain(&e)),
        }
        rows.push(row);
    }
    let means = (0..algos.len())
        .map(|a| {
            let ok: Vec<f64> = rows.iter().filter_map(|r| r.errors[a]).collect();
            (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64)
        })
        .collect();
    Ok(EvalReport {
        algorithms: algos.to_vec(),
        rows,
        means,
    })
}

fn error_chain(e: &dyn std::error::Error) -> String {
    let mut s = e.to_string();
    let mut cur = e.source();
    while let Some(c) = cur {
        s += ": ";
        s += &c.to_string();
        cur = c.source();
    }
    s
}

fn eval_one(
    index: &Index,
    qe: &QueryEntry,
    gold: Option<&GoldLabels>,
    config: &Config,
    algos: &[Algorithm],
    seed: u64,
) -> Result<Vec<f64>, PipelineError> {
    let gold = gold.ok_or_else(|| PipelineError::MissingGold {
        query: qe.id.clone(),
        table: "(all)".into(),
    })?;
    let (prepared, _) = prepare(index, &Query::new(qe.columns.clone()), config, seed)?;
    let gold = gold_labeling(gold, &prepared.tables)?;
    let model = prepared.inputs.build(&config.model)?;
    algos
        .iter()
        .map(|&a| Ok(f1_error(&infer::run(&model, a)?, &gold)?))
        .collect()
}

/// Mean error per algorithm within groups of queries binned by the error of
/// the algorithm at `baseline`, hardest group first. Failed queries are left
/// out; groups have near-equal sizes.
pub fn bin_by_baseline(report: &EvalReport, baseline: usize, groups: usize) -> Vec<Vec<f64>> {
    let mut ok: Vec<&EvalRow> = report.rows.iter().filter(|r| r.errors.iter().all(Option::is_some)).collect();
    if ok.is_empty() || groups == 0 {
        return Vec::new();
    }
    ok.sort_by(|a, b| {
        b.errors[baseline]
            .unwrap()
            .total_cmp(&a.errors[baseline].unwrap())
            .then_with(|| a.query_id.cmp(&b.query_id))
    });
    let groups = groups.min(ok.len());
    (0..groups)
        .map(|g| {
            let chunk = &ok[g * ok.len() / groups..(g + 1) * ok.len() / groups];
            (0..report.algorithms.len())
                .map(|a| chunk.iter().map(|r| r.errors[a].unwrap()).sum::<f64>() / chunk.len() as f64)
                .collect()
        })
        .collect()
}

/// Fits the trainable weights by grid search. Candidates and features come
/// from `config`, so retrieval is fixed while the grid varies.
pub fn tune(
    index: &Index,
    train: &[LabeledQuery],
    grid: &GridSpec,
    config: &Config,
    algo: Algorithm,
    seed: u64,
) -> Result<crate::model::TuneOutcome, PipelineError> {
    let mut examples = Vec::with_capacity(train.len());
    for lq in train {
        let (qe, gold) = lq.split();
        let (prepared, _) = prepare(index, &Query::new(qe.columns), config, seed)?;
        let gold = gold_labeling(&gold, &prepared.tables)?;
        examples.push(TrainingQuery {
            inputs: prepared.inputs,
            gold,
        });
    }
    let points: Vec<ModelWeights> = grid.points(&config.model);
    Ok(grid_search_weights(&examples, &points, algo)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::sample_table;

    fn corpus() -> Index {
        Index::build(vec![
            sample_table(
                "films",
                &["Film", "Director"],
                &[&["Alien", "Ridley Scott"], &["Heat", "Michael Mann"], &["Jaws", "Steven Spielberg"]],
            ),
            sample_table("other", &["River", "Length"], &[&["Nile", "6650"], &["Amazon", "6400"], &["Yangtze", "6300"]]),
        ])
        .unwrap()
    }

    #[test]
    fn films_query_maps_both_columns() {
        let idx = corpus();
        let q = Query::parse("film|director");
        let out = run_query(&idx, &q, &Config::default(), Algorithm::TableCentric, 1).unwrap();
        let report = LabelingReport::new(&q, Algorithm::TableCentric, 1, &out);
        assert_eq!(report.get("films"), Some(&[Label::Query(1), Label::Query(2)][..]));
        assert_eq!(report.get("other"), None);
        assert_eq!(out.answer.rows.len(), 3);
        assert_eq!(out.answer.rows[0].cells, ["Alien", "Ridley Scott"]);
    }

    #[test]
    fn empty_index_gives_empty_answer() {
        let idx = Index::build(Vec::new()).unwrap();
        let out = run_query(&idx, &Query::parse("a|b"), &Config::default(), Algorithm::AlphaExpansion, 0).unwrap();
        assert!(out.answer.rows.is_empty());
        assert!(out.labeling.tables.is_empty());
    }

    #[test]
    fn eval_reports_each_algorithm_and_flags_missing_gold() {
        let idx = corpus();
        let queries = vec![
            QueryEntry {
                id: "q1".into(),
                columns: vec!["film".into(), "director".into()],
            },
            QueryEntry {
                id: "q2".into(),
                columns: vec!["film".into()],
            },
        ];
        let gold = vec![GoldLabels {
            query_id: "q1".into(),
            labels: vec![("films".into(), 0, Label::Query(1)), ("films".into(), 1, Label::Query(2))],
        }];
        let algos = [Algorithm::Independent, Algorithm::TableCentric];
        let r = evaluate(&idx, &queries, &gold, &Config::default(), &algos, 0).unwrap();
        assert_eq!(r.rows[0].errors, vec![Some(0.0), Some(0.0)]);
        assert!(r.rows[1].note.is_some());
        assert_eq!(r.means, vec![Some(0.0), Some(0.0)]);
    }

    #[test]
    fn binning_is_hardest_first() {
        let row = |id: &str, e: f64| EvalRow {
            query_id: id.into(),
            errors: vec![Some(e), Some(e / 2.0)],
            note: None,
        };
        let report = EvalReport {
            algorithms: vec![Algorithm::Independent, Algorithm::TableCentric],
            rows: vec![row("a", 0.2), row("b", 0.8), row("c", 0.4), row("d", 0.6)],
            means: vec![],
        };
        let bins = bin_by_baseline(&report, 0, 2);
        assert_eq!(bins.len(), 2);
        assert!((bins[0][0] - 0.7).abs() < 1e-12 && (bins[1][0] - 0.3).abs() < 1e-12);
        assert!((bins[0][1] - 0.35).abs() < 1e-12);
    }

    #[test]
    fn one_point_grid_echoes_point() {
        let idx = corpus();
        let train = vec![LabeledQuery {
            id: "q".into(),
            columns: vec!["film".into(), "director".into()],
            labels: vec![
                ("films".into(), 0, Label::Query(1)),
                ("films".into(), 1, Label::Query(2)),
            ],
        }];
        let cfg = Config::default();
        let grid = GridSpec::single(&cfg.model);
        let out = tune(&idx, &train, &grid, &cfg, Algorithm::TableCentric, 0).unwrap();
        assert_eq!(out.weights, cfg.model);
        assert_eq!(out.evaluated, 1);
        assert!(matches!(
            tune(&idx, &[], &grid, &cfg, Algorithm::TableCentric, 0),
            Err(PipelineError::Tune(TuneError::EmptyTraining))
        ));
    }
}
