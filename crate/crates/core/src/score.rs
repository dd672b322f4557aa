//! Per-column features: segmented similarity, cover, PMI², table relevance
//! and cross-table column similarity.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::config::{ModelWeights, Reliability};
use crate::model::{ColumnFeatures, PairSimilarity, TableFeatures};
use crate::table::WebTable;
use crate::text::{normalize_cell, tokenize};

/// Source of the TI(w) term weights.
pub trait TermWeights {
    fn ti(&self, term: &str) -> f64;
}

/// Every term weighs 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform;

impl TermWeights for Uniform {
    fn ti(&self, _: &str) -> f64 {
        1.0
    }
}

impl<T: TermWeights + ?Sized> TermWeights for &T {
    fn ti(&self, term: &str) -> f64 {
        (**self).ti(term)
    }
}

/// Table sets behind PMI²: tables whose header or context mentions all
/// tokens, and tables whose content does.
pub trait CorpusSets {
    fn header_tables(&self, tokens: &[String]) -> BTreeSet<u32>;
    fn content_tables(&self, tokens: &[String]) -> BTreeSet<u32>;
}

/// A multi-column keyword query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    /// Column descriptions as typed, in order.
    pub columns: Vec<String>,
}

impl Query {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
        }
    }

    /// Splits `"a | b | c"`.
    pub fn parse(spec: &str) -> Self {
        Self::new(spec.split('|').map(str::trim).filter(|s| !s.is_empty()))
    }

    pub fn q(&self) -> usize {
        self.columns.len()
    }

    pub fn tokens(&self) -> Vec<Vec<String>> {
        self.columns.iter().map(|c| tokenize(c)).collect()
    }

    pub fn all_tokens(&self) -> Vec<String> {
        let set: BTreeSet<String> = self.tokens().into_iter().flatten().collect();
        set.into_iter().collect()
    }
}

/// `Σ TI(w)²` over a token sequence.
pub fn sq_norm(tokens: &[String], tw: &impl TermWeights) -> f64 {
    tokens.iter().map(|w| tw.ti(w).powi(2)).sum()
}

fn tf_vector(tokens: &[String], tw: &impl TermWeights) -> BTreeMap<String, f64> {
    let mut v = BTreeMap::new();
    for w in tokens {
        *v.entry(w.clone()).or_insert(0.0) += tw.ti(w);
    }
    v
}

/// Cosine of the TI-weighted term vectors of `p` and `h`.
pub fn in_sim(p: &[String], h: &[String], tw: &impl TermWeights) -> f64 {
    let (a, b) = (tf_vector(p, tw), tf_vector(h, tw));
    let dot: f64 = a.iter().filter_map(|(w, x)| b.get(w).map(|y| x * y)).sum();
    let na: f64 = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Token sets of one table that the out-of-header match consults.
#[derive(Debug, Clone, PartialEq)]
pub struct TableParts {
    title: BTreeSet<String>,
    /// Best snippet score per context token.
    context: HashMap<String, f64>,
    /// `header[r][c]`.
    header: Vec<Vec<BTreeSet<String>>>,
    /// Frequent body tokens of any column.
    body: BTreeSet<String>,
    reliability: Reliability,
}

impl TableParts {
    pub fn new(table: &WebTable, reliability: Reliability, body_frequency: f64) -> Self {
        let title = table.title_rows.iter().flat_map(|r| tokenize(r)).collect();
        let mut context: HashMap<String, f64> = HashMap::new();
        for snip in &table.context {
            for w in tokenize(&snip.text) {
                let e = context.entry(w).or_insert(0.0);
                *e = e.max(snip.score);
            }
        }
        let header = table
            .header
            .iter()
            .map(|row| row.iter().map(|cell| tokenize(cell).into_iter().collect()).collect())
            .collect();
        let mut body = BTreeSet::new();
        for c in 0..table.n_cols() {
            body.extend(frequent_tokens(table.column(c), body_frequency));
        }
        Self {
            title,
            context,
            header,
            body,
            reliability,
        }
    }

    pub fn header_rows(&self) -> usize {
        self.header.len()
    }

    pub fn header_cell(&self, r: usize, c: usize) -> &BTreeSet<String> {
        &self.header[r][c]
    }

    /// `1 - Π (1 - p_i)` over the parts of `(r, c)` containing `w`.
    pub fn match_reliability(&self, w: &str, r: usize, c: usize) -> f64 {
        let p = &self.reliability;
        let mut miss = 1.0;
        if self.title.contains(w) {
            miss *= 1.0 - p.title;
        }
        if let Some(score) = self.context.get(w) {
            miss *= 1.0 - p.context * score;
        }
        let in_other_rows = self
            .header
            .iter()
            .enumerate()
            .any(|(r2, row)| r2 != r && row[c].contains(w));
        if in_other_rows {
            miss *= 1.0 - p.header_column;
        }
        if self.header.get(r).is_some_and(|row| row.iter().enumerate().any(|(c2, cell)| c2 != c && cell.contains(w))) {
            miss *= 1.0 - p.header_row;
        }
        if self.body.contains(w) {
            miss *= 1.0 - p.body;
        }
        1.0 - miss
    }
}

/// Tokens occurring in at least `fraction` of the non-empty cells.
fn frequent_tokens<'a>(cells: impl Iterator<Item = &'a str>, fraction: f64) -> BTreeSet<String> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut non_empty = 0usize;
    for cell in cells {
        let toks: BTreeSet<String> = tokenize(cell).into_iter().collect();
        if toks.is_empty() {
            continue;
        }
        non_empty += 1;
        for t in toks {
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .filter(|&(_, k)| non_empty > 0 && k as f64 >= fraction * non_empty as f64)
        .map(|(t, _)| t)
        .collect()
}

/// Soft-maxed match reliability of the tokens outside the header part.
pub fn out_sim(s: &[String], parts: &TableParts, r: usize, c: usize, tw: &impl TermWeights) -> f64 {
    let norm = sq_norm(s, tw);
    if norm == 0.0 {
        return 0.0;
    }
    s.iter()
        .map(|w| tw.ti(w).powi(2) / norm * parts.match_reliability(w, r, c))
        .sum()
}

/// Every way of cutting `q` into a header-side part `P` and a remainder
/// `S`, with `P` taken as either the prefix or the suffix. `P` is never
/// empty.
fn splits(q: &[String]) -> impl Iterator<Item = (&[String], Vec<String>)> {
    let m = q.len();
    let prefixes = (1..=m).map(move |k| (&q[..k], q[k..].to_vec()));
    let suffixes = (0..m).map(move |k| (&q[k..], q[..k].to_vec()));
    prefixes.chain(suffixes)
}

fn segmented(
    q: &[String],
    parts: &TableParts,
    c: usize,
    tw: &impl TermWeights,
    header_score: impl Fn(&[String], &BTreeSet<String>) -> f64,
) -> f64 {
    let qn = sq_norm(q, tw);
    if qn == 0.0 {
        return 0.0;
    }
    let mut best = 0.0f64;
    for r in 0..parts.header_rows() {
        let h = parts.header_cell(r, c);
        for (p, s) in splits(q) {
            if !p.iter().any(|w| h.contains(w)) {
                continue;
            }
            let v = sq_norm(p, tw) / qn * header_score(p, h) + sq_norm(&s, tw) / qn * out_sim(&s, parts, r, c, tw);
            best = best.max(v);
        }
    }
    best
}

/// Segmented similarity of query column `q` to column `c`.
pub fn seg_sim(q: &[String], parts: &TableParts, c: usize, tw: &impl TermWeights) -> f64 {
    segmented(q, parts, c, tw, |p, h| {
        let hv: Vec<String> = h.iter().cloned().collect();
        in_sim(p, &hv, tw)
    })
}

/// Like [`seg_sim`] but the header part scores the TI² share of its tokens
/// found in the header.
pub fn cover(q: &[String], parts: &TableParts, c: usize, tw: &impl TermWeights) -> f64 {
    segmented(q, parts, c, tw, |p, h| {
        let pn = sq_norm(p, tw);
        let hit: f64 = p.iter().filter(|w| h.contains(*w)).map(|w| tw.ti(w).powi(2)).sum();
        if pn == 0.0 {
            0.0
        } else {
            hit / pn
        }
    })
}

/// Average over rows of `|H ∩ B|² / (|H| |B|)`, where `H` holds the tables
/// described by the query column and `B` those containing the row's cell.
pub fn pmi2_from_sets(h: &BTreeSet<u32>, cells: &[BTreeSet<u32>]) -> f64 {
    if h.is_empty() || cells.is_empty() {
        return 0.0;
    }
    let total: f64 = cells
        .iter()
        .map(|b| {
            if b.is_empty() {
                0.0
            } else {
                let both = h.intersection(b).count() as f64;
                both * both / (h.len() as f64 * b.len() as f64)
            }
        })
        .sum();
    total / cells.len() as f64
}

pub fn pmi2(q: &[String], table: &WebTable, c: usize, corpus: &dyn CorpusSets) -> f64 {
    let h = corpus.header_tables(q);
    if h.is_empty() {
        return 0.0;
    }
    let cells: Vec<BTreeSet<u32>> = table
        .column(c)
        .map(|cell| {
            let toks = tokenize(cell);
            if toks.is_empty() {
                BTreeSet::new()
            } else {
                corpus.content_tables(&toks)
            }
        })
        .collect();
    pmi2_from_sets(&h, &cells)
}

/// `(1/q) clip(Σ_ℓ max_c cover, min(q, 1.5))`, where `clip(a, b)` is 0 when
/// `a < b` and `a` otherwise. `covers[ℓ][c]`.
pub fn table_relevance(covers: &[Vec<f64>]) -> f64 {
    let q = covers.len();
    if q == 0 {
        return 0.0;
    }
    let total: f64 = covers.iter().map(|row| row.iter().copied().fold(0.0, f64::max)).sum();
    let threshold = (q as f64).min(1.5);
    if total < threshold {
        0.0
    } else {
        total / q as f64
    }
}

fn value_set(table: &WebTable, c: usize) -> BTreeSet<String> {
    table.column(c).map(normalize_cell).filter(|v| !v.is_empty()).collect()
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// `0.8 · Jaccard(cell values) + 0.2 · header cosine`.
pub fn column_sim(a: &WebTable, ca: usize, b: &WebTable, cb: usize, tw: &impl TermWeights) -> f64 {
    0.8 * jaccard(&value_set(a, ca), &value_set(b, cb)) + 0.2 * header_sim(a, ca, b, cb, tw)
}

pub fn header_sim(a: &WebTable, ca: usize, b: &WebTable, cb: usize, tw: &impl TermWeights) -> f64 {
    in_sim(&a.column_header_tokens(ca), &b.column_header_tokens(cb), tw)
}

/// Node features for every column of `table`.
pub fn table_features(
    query: &[Vec<String>],
    table: &WebTable,
    w: &ModelWeights,
    tw: &impl TermWeights,
    corpus: Option<&dyn CorpusSets>,
) -> TableFeatures {
    let parts = TableParts::new(table, w.reliability, w.body_frequency);
    let n = table.n_cols();
    let columns: Vec<ColumnFeatures> = (0..n)
        .map(|c| ColumnFeatures {
            seg_sim: query.iter().map(|ql| seg_sim(ql, &parts, c, tw)).collect(),
            cover: query.iter().map(|ql| cover(ql, &parts, c, tw)).collect(),
            pmi2: query
                .iter()
                .map(|ql| corpus.map_or(0.0, |cs| pmi2(ql, table, c, cs)))
                .collect(),
        })
        .collect();
    let covers: Vec<Vec<f64>> = (0..query.len())
        .map(|l| columns.iter().map(|col| col.cover[l]).collect())
        .collect();
    TableFeatures {
        id: table.id.clone(),
        relevance: table_relevance(&covers),
        columns,
    }
}

/// Raw similarities for every pair of candidate tables.
pub fn pair_similarities(tables: &[WebTable], tw: &impl TermWeights) -> Vec<PairSimilarity> {
    let values: Vec<Vec<BTreeSet<String>>> = tables
        .iter()
        .map(|t| (0..t.n_cols()).map(|c| value_set(t, c)).collect())
        .collect();
    let headers: Vec<Vec<Vec<String>>> = tables
        .iter()
        .map(|t| (0..t.n_cols()).map(|c| t.column_header_tokens(c)).collect())
        .collect();
    let mut out = Vec::new();
    for a in 0..tables.len() {
        for b in a + 1..tables.len() {
            let header: Vec<Vec<f64>> = headers[a]
                .iter()
                .map(|ha| headers[b].iter().map(|hb| in_sim(ha, hb, tw)).collect())
                .collect();
            let content: Vec<Vec<f64>> = values[a]
                .iter()
                .enumerate()
                .map(|(i, va)| {
                    values[b]
                        .iter()
                        .enumerate()
                        .map(|(j, vb)| 0.8 * jaccard(va, vb) + 0.2 * header[i][j])
                        .collect()
                })
                .collect();
            if content.iter().flatten().chain(header.iter().flatten()).any(|&s| s > 0.0) {
                out.push(PairSimilarity { a, b, content, header });
            }
        }
    }
    out
}
