//! The column-mapping graphical model: labels, node and edge potentials,
//! hard constraints, the objective and weight tuning.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::answer::{f1_error, AnswerError};
use crate::config::{ConfigError, ModelWeights};
use crate::flow::{max_weight_matching, FlowError};
use crate::infer::{self, Algorithm, InferError};

/// A column label: query column `1..=q`, `na` (no query column) or `nr`
/// (the column's table is irrelevant). Orders as `1 < 2 < .. < na < nr`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Label {
    /// One-based query column.
    Query(usize),
    Na,
    Nr,
}

impl Label {
    /// Position of the label in a potential row of width `q + 2`.
    pub fn slot(self, q: usize) -> usize {
        match self {
            Label::Query(l) => l - 1,
            Label::Na => q,
            Label::Nr => q + 1,
        }
    }

    pub fn from_slot(slot: usize, q: usize) -> Label {
        match slot {
            s if s < q => Label::Query(s + 1),
            s if s == q => Label::Na,
            _ => Label::Nr,
        }
    }

    /// All `q + 2` labels in slot order.
    pub fn all(q: usize) -> impl Iterator<Item = Label> {
        (0..q + 2).map(move |s| Label::from_slot(s, q))
    }

    pub fn is_query(self) -> bool {
        matches!(self, Label::Query(_))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Query(l) => write!(f, "{l}"),
            Label::Na => f.write_str("na"),
            Label::Nr => f.write_str("nr"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid label {0:?}; expected a positive column number, \"na\" or \"nr\"")]
pub struct ParseLabelError(String);

impl FromStr for Label {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "na" => Ok(Label::Na),
            "nr" => Ok(Label::Nr),
            other => match other.parse::<usize>() {
                Ok(l) if l >= 1 => Ok(Label::Query(l)),
                _ => Err(ParseLabelError(s.to_string())),
            },
        }
    }
}

impl From<Label> for String {
    fn from(l: Label) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for Label {
    type Error = ParseLabelError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// A label for every column of every candidate table, indexed like
/// [`Model::tables`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Labeling {
    pub tables: Vec<Vec<Label>>,
}

impl Labeling {
    pub fn uniform(model: &Model, label: Label) -> Self {
        Self {
            tables: model.tables.iter().map(|t| vec![label; t.n_cols()]).collect(),
        }
    }

    pub fn is_relevant(&self, table: usize) -> bool {
        self.tables[table].iter().any(|&l| l != Label::Nr)
    }
}

/// Per-column feature bundle; each vector has one entry per query column.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ColumnFeatures {
    pub seg_sim: Vec<f64>,
    pub cover: Vec<f64>,
    pub pmi2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TableFeatures {
    pub id: String,
    /// Table relevance `R(Q, t)`.
    pub relevance: f64,
    pub columns: Vec<ColumnFeatures>,
}

/// θ(tc, ℓ) for one column.
pub fn node_potential(
    col: &ColumnFeatures,
    n_cols: usize,
    relevance: f64,
    q: usize,
    label: Label,
    w: &ModelWeights,
) -> f64 {
    match label {
        Label::Query(l) => {
            let i = l - 1;
            let pmi = if w.use_pmi2 { w.w3 * col.pmi2[i] } else { 0.0 };
            w.w1 * col.seg_sim[i] + w.w2 * col.cover[i] + pmi + w.w5
        }
        Label::Na => 0.0,
        Label::Nr => w.w4 * (q.min(n_cols) as f64 / n_cols as f64) * (1.0 - relevance),
    }
}

impl TableFeatures {
    /// Potential matrix, one row of `q + 2` entries per column.
    pub fn potentials(&self, q: usize, w: &ModelWeights) -> Vec<Vec<f64>> {
        let n = self.columns.len();
        self.columns
            .iter()
            .map(|c| Label::all(q).map(|l| node_potential(c, n, self.relevance, q, l, w)).collect())
            .collect()
    }
}

/// Raw similarities between the columns of two candidate tables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PairSimilarity {
    pub a: usize,
    pub b: usize,
    /// `column_sim` for every column pair, `[col of a][col of b]`.
    pub content: Vec<Vec<f64>>,
    /// Header-only cosine for every column pair.
    pub header: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColumnRef {
    pub table: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: ColumnRef,
    pub b: ColumnRef,
    /// Raw column similarity.
    pub sim: f64,
    pub nsim_ab: f64,
    pub nsim_ba: f64,
    /// Whether `a` is confident enough to vouch for `b`.
    pub gate_a: bool,
    pub gate_b: bool,
}

impl Edge {
    pub fn other(&self, end: ColumnRef) -> ColumnRef {
        if end == self.a {
            self.b
        } else {
            self.a
        }
    }

    /// `nsim(end -> other)` and whether the other end is confident.
    pub fn towards(&self, end: ColumnRef) -> (f64, bool) {
        if end == self.a {
            (self.nsim_ab, self.gate_b)
        } else {
            (self.nsim_ba, self.gate_a)
        }
    }
}

pub fn edge_potential(edge: &Edge, la: Label, lb: Label, we: f64) -> f64 {
    if la != lb || la == Label::Nr {
        return 0.0;
    }
    let ab = if edge.gate_b { edge.nsim_ab } else { 0.0 };
    let ba = if edge.gate_a { edge.nsim_ba } else { 0.0 };
    we * (ab + ba)
}

/// `sim / (λ + Σ neighbour sims)`, with neighbours below `floor` ignored.
pub fn normalized_sim(sim: f64, neighbour_sims: &[f64], lambda: f64, floor: f64) -> f64 {
    if sim < floor {
        return 0.0;
    }
    let total: f64 = neighbour_sims.iter().filter(|&&s| s >= floor).sum();
    sim / (lambda + total)
}

/// One-one column matching per table pair, then Eq 4 gates and nsim.
/// `confidence[t][c]` is `max_{y != nr} Pr(y | tc)`.
pub fn build_edges(
    pairs: &[PairSimilarity],
    confidence: &[Vec<f64>],
    w: &ModelWeights,
) -> Result<Vec<Edge>, FlowError> {
    let mut raw: Vec<(ColumnRef, ColumnRef, f64)> = Vec::new();
    for p in pairs {
        let (na, nb) = (p.content.len(), p.content.first().map_or(0, Vec::len));
        if na == 0 || nb == 0 {
            continue;
        }
        let weights: Vec<Vec<f64>> = (0..na)
            .map(|i| (0..nb).map(|j| 0.5 * p.content[i][j] + 0.5 * p.header[i][j]).collect())
            .collect();
        let m = max_weight_matching(&vec![1; na], &vec![1; nb], &weights)?;
        for &(i, j, _) in &m.pairs {
            if weights[i][j] >= w.nsim_floor {
                let a = ColumnRef { table: p.a, column: i };
                let b = ColumnRef { table: p.b, column: j };
                raw.push((a, b, p.content[i][j]));
            }
        }
    }

    let neighbours = |end: ColumnRef| -> Vec<f64> {
        raw.iter()
            .filter(|(a, b, _)| *a == end || *b == end)
            .map(|e| e.2)
            .collect()
    };
    let gate = |c: ColumnRef| confidence[c.table][c.column] > w.conf_threshold;

    Ok(raw
        .iter()
        .map(|&(a, b, sim)| Edge {
            a,
            b,
            sim,
            nsim_ab: normalized_sim(sim, &neighbours(a), w.lambda, w.nsim_floor),
            nsim_ba: normalized_sim(sim, &neighbours(b), w.lambda, w.nsim_floor),
            gate_a: gate(a),
            gate_b: gate(b),
        })
        .collect())
}

/// MUTEX, ALL-IRR, MUST-MATCH and MIN-MATCH for one table.
pub fn check_constraints(labels: &[Label], q: usize, m: usize) -> bool {
    let nr = labels.iter().filter(|&&l| l == Label::Nr).count();
    if nr == labels.len() {
        return true;
    }
    if nr > 0 {
        return false;
    }
    let mut seen = vec![false; q + 1];
    for &l in labels {
        if let Label::Query(i) = l {
            if i > q || seen[i] {
                return false;
            }
            seen[i] = true;
        }
    }
    q >= 1 && seen[1] && seen.iter().filter(|&&s| s).count() >= m
}

/// The assembled model for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub q: usize,
    /// MIN-MATCH threshold.
    pub m: usize,
    pub we: f64,
    pub tables: Vec<TableModel>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableModel {
    pub id: String,
    /// `theta[c][slot]`.
    pub theta: Vec<Vec<f64>>,
}

impl TableModel {
    pub fn n_cols(&self) -> usize {
        self.theta.len()
    }

    pub fn node_score(&self, labels: &[Label], q: usize) -> f64 {
        labels.iter().enumerate().map(|(c, &l)| self.theta[c][l.slot(q)]).sum()
    }
}

impl Model {
    pub fn edge_score(&self, y: &Labeling) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let la = y.tables[e.a.table][e.a.column];
                let lb = y.tables[e.b.table][e.b.column];
                edge_potential(e, la, lb, self.we)
            })
            .sum()
    }

    /// Eq 9; `-inf` when any table violates a constraint.
    pub fn objective(&self, y: &Labeling) -> f64 {
        if y.tables.len() != self.tables.len()
            || y.tables.iter().zip(&self.tables).any(|(l, t)| l.len() != t.n_cols())
        {
            return f64::NEG_INFINITY;
        }
        if y.tables.iter().any(|l| !check_constraints(l, self.q, self.m)) {
            return f64::NEG_INFINITY;
        }
        self.score(y)
    }

    /// Node plus edge score, ignoring constraints.
    pub fn score(&self, y: &Labeling) -> f64 {
        let nodes: f64 = self
            .tables
            .iter()
            .zip(&y.tables)
            .map(|(t, l)| t.node_score(l, self.q))
            .sum();
        nodes + self.edge_score(y)
    }

    /// Edges incident to every column, `incident[t][c]`.
    pub fn incidence(&self) -> Vec<Vec<Vec<usize>>> {
        let mut inc: Vec<Vec<Vec<usize>>> =
            self.tables.iter().map(|t| vec![Vec::new(); t.n_cols()]).collect();
        for (i, e) in self.edges.iter().enumerate() {
            inc[e.a.table][e.a.column].push(i);
            inc[e.b.table][e.b.column].push(i);
        }
        inc
    }
}

/// Everything the model needs for one query, independent of the weights
/// being tuned.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelInputs {
    pub q: usize,
    pub tables: Vec<TableFeatures>,
    pub pairs: Vec<PairSimilarity>,
}

impl ModelInputs {
    /// Node potentials, stage-one confidences, then gated edges.
    pub fn build(&self, w: &ModelWeights) -> Result<Model, FlowError> {
        let tables: Vec<TableModel> = self
            .tables
            .iter()
            .map(|t| TableModel {
                id: t.id.clone(),
                theta: t.potentials(self.q, w),
            })
            .collect();
        let confidence = tables
            .iter()
            .map(|t| infer::table_confidences(&t.theta, self.q))
            .collect::<Result<Vec<_>, _>>()?;
        let gate_values: Vec<Vec<f64>> = confidence
            .iter()
            .map(|cols| cols.iter().map(|p| p[..=self.q].iter().copied().fold(0.0, f64::max)).collect())
            .collect();
        let edges = build_edges(&self.pairs, &gate_values, w)?;
        Ok(Model {
            q: self.q,
            m: w.min_match_for(self.q),
            we: w.we,
            tables,
            edges,
        })
    }
}

/// Values to try for each trainable weight; points are the Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub w3: Vec<f64>,
    pub w4: Vec<f64>,
    pub w5: Vec<f64>,
    pub we: Vec<f64>,
}

impl GridSpec {
    pub fn single(w: &ModelWeights) -> Self {
        Self {
            w1: vec![w.w1],
            w2: vec![w.w2],
            w3: vec![w.w3],
            w4: vec![w.w4],
            w5: vec![w.w5],
            we: vec![w.we],
        }
    }

    /// Every grid point, filling the fixed constants from `base`.
    pub fn points(&self, base: &ModelWeights) -> Vec<ModelWeights> {
        let axes = [&self.w1, &self.w2, &self.w3, &self.w4, &self.w5, &self.we];
        let mut out = vec![[0.0; 6]];
        for (k, axis) in axes.iter().enumerate() {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut p = p;
                        p[k] = v;
                        p
                    })
                })
                .collect();
        }
        if axes.iter().any(|a| a.is_empty()) {
            return Vec::new();
        }
        out.into_iter().map(|p| base.with_trainable(p)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingQuery {
    pub inputs: ModelInputs,
    pub gold: Labeling,
}

#[derive(Debug, thiserror::Error)]
pub enum TuneError {
    #[error("weight grid is empty")]
    EmptyGrid,
    #[error("no training queries")]
    EmptyTraining,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Answer(#[from] AnswerError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub weights: ModelWeights,
    pub mean_error: f64,
    pub evaluated: usize,
}

/// Exhaustive search for the grid point with the least mean F1 error.
/// Ties go to the lexicographically smallest `(w1, .., w5, we)`.
pub fn grid_search_weights(
    train: &[TrainingQuery],
    grid: &[ModelWeights],
    algo: Algorithm,
) -> Result<TuneOutcome, TuneError> {
    if grid.is_empty() {
        return Err(TuneError::EmptyGrid);
    }
    if train.is_empty() {
        return Err(TuneError::EmptyTraining);
    }
    let mut best: Option<(f64, ModelWeights)> = None;
    for w in grid {
        w.validate()?;
        let mut total = 0.0;
        for tq in train {
            let model = tq.inputs.build(w)?;
            let y = infer::run(&model, algo)?;
            total += f1_error(&y, &tq.gold)?;
        }
        let err = total / train.len() as f64;
        let better = match &best {
            None => true,
            Some((e, bw)) => {
                err < e - 1e-12 || ((err - e).abs() <= 1e-12 && lex_less(&w.trainable(), &bw.trainable()))
            }
        };
        if better {
            best = Some((err, *w));
        }
    }
    let (mean_error, weights) = best.expect("grid is non-empty");
    Ok(TuneOutcome {
        weights,
        mean_error,
        evaluated: grid.len(),
    })
}

fn lex_less(a: &[f64; 6], b: &[f64; 6]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}
