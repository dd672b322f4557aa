//! Consolidating mapped columns into one answer table, ranking its rows, and
//! scoring labelings against gold.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{Label, Labeling};
use crate::table::WebTable;
use crate::text::{normalize_cell, squash_whitespace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnswerError {
    #[error("labeling and gold cover different variables: {0}")]
    Mismatch(String),
    #[error("gold labeling: {0}")]
    Gold(String),
    #[error("writing CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellSource {
    pub table_id: String,
    pub row: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRow {
    pub cells: Vec<String>,
    /// Where each cell value was read from; empty for empty cells.
    pub sources: Vec<Vec<CellSource>>,
    /// Number of distinct tables contributing the row.
    pub support: usize,
    /// Highest relevance among contributing tables, set by [`rank_rows`].
    pub relevance: f64,
}

impl AnswerRow {
    pub fn tables(&self) -> BTreeSet<&str> {
        self.sources.iter().flatten().map(|s| s.table_id.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnswerTable {
    pub columns: Vec<String>,
    pub rows: Vec<AnswerRow>,
}

impl AnswerTable {
    pub fn to_csv(&self) -> Result<String, AnswerError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| AnswerError::Csv(e.to_string());
        w.write_record(&self.columns).map_err(err)?;
        for row in &self.rows {
            w.write_record(&row.cells).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| AnswerError::Csv(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 strings is UTF-8"))
    }
}

/// Projects every relevant table onto the query columns and merges rows.
///
/// Two rows merge when their first cells normalize to the same text and every
/// other cell agrees or is empty on one side; the merged row keeps the
/// non-empty values. `tables` must align with `y.tables`.
pub fn consolidate(tables: &[WebTable], y: &Labeling, columns: &[String]) -> AnswerTable {
    let q = columns.len();
    let mut rows: Vec<AnswerRow> = Vec::new();
    for (t, table) in tables.iter().enumerate() {
        let Some(labels) = y.tables.get(t) else { continue };
        if !y.is_relevant(t) {
            continue;
        }
        let mut column_of = vec![None; q];
        for (c, &l) in labels.iter().enumerate() {
            if let Label::Query(i) = l {
                if i <= q {
                    column_of[i - 1] = Some(c);
                }
            }
        }
        for (r, body_row) in table.body.iter().enumerate() {
            let mut cells = Vec::with_capacity(q);
            let mut sources = Vec::with_capacity(q);
            for col in &column_of {
                let value = col.map(|c| squash_whitespace(&body_row[c])).unwrap_or_default();
                sources.push(match *col {
                    Some(c) if !value.is_empty() => vec![CellSource {
                        table_id: table.id.clone(),
                        row: r,
                        column: c,
                    }],
                    _ => Vec::new(),
                });
                cells.push(value);
            }
            if cells.iter().all(String::is_empty) {
                continue;
            }
            match rows.iter_mut().find(|existing| mergeable(&existing.cells, &cells)) {
                Some(existing) => {
                    for (i, (cell, src)) in cells.into_iter().zip(sources).enumerate() {
                        if existing.cells[i].is_empty() && !cell.is_empty() {
                            existing.cells[i] = cell;
                        }
                        for s in src {
                            if !existing.sources[i].contains(&s) {
                                existing.sources[i].push(s);
                            }
                        }
                    }
                    existing.support = existing.tables().len();
                }
                None => rows.push(AnswerRow {
                    cells,
                    sources,
                    support: 1,
                    relevance: 0.0,
                }),
            }
        }
    }
    AnswerTable {
        columns: columns.to_vec(),
        rows,
    }
}

fn mergeable(a: &[String], b: &[String]) -> bool {
    if normalize_cell(&a[0]) != normalize_cell(&b[0]) {
        return false;
    }
    a.iter()
        .zip(b)
        .skip(1)
        .all(|(x, y)| x.is_empty() || y.is_empty() || normalize_cell(x) == normalize_cell(y))
}

/// Orders rows by support, then best source relevance, then first cell.
pub fn rank_rows(mut answer: AnswerTable, relevance: &BTreeMap<String, f64>) -> AnswerTable {
    for row in &mut answer.rows {
        row.relevance = row
            .tables()
            .iter()
            .filter_map(|t| relevance.get(*t).copied())
            .fold(0.0, f64::max);
    }
    answer.rows.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then(b.relevance.total_cmp(&a.relevance))
            .then_with(|| a.cells[0].cmp(&b.cells[0]))
    });
    answer
}

/// `1 - 2 * correct / (predicted mapped + gold mapped)`, where a variable
/// counts as mapped when its label is a query column. Zero when neither side
/// maps anything.
pub fn f1_error(y: &Labeling, gold: &Labeling) -> Result<f64, AnswerError> {
    if y.tables.len() != gold.tables.len() {
        return Err(AnswerError::Mismatch(format!(
            "{} tables vs {} gold tables",
            y.tables.len(),
            gold.tables.len()
        )));
    }
    let (mut correct, mut predicted, mut actual) = (0usize, 0usize, 0usize);
    for (t, (a, b)) in y.tables.iter().zip(&gold.tables).enumerate() {
        if a.len() != b.len() {
            return Err(AnswerError::Mismatch(format!("table {t}: {} vs {} columns", a.len(), b.len())));
        }
        for (&la, &lb) in a.iter().zip(b) {
            predicted += la.is_query() as usize;
            actual += lb.is_query() as usize;
            correct += (la.is_query() && la == lb) as usize;
        }
    }
    if predicted + actual == 0 {
        return Ok(0.0);
    }
    Ok(1.0 - 2.0 * correct as f64 / (predicted + actual) as f64)
}

/// Share of distinct rows found in only one of the two answers. This is a
/// stand-in answer-quality measure, not the F1 error.
pub fn row_error(answer: &AnswerTable, gold_rows: &[Vec<String>]) -> f64 {
    let key = |cells: &[String]| cells.iter().map(|c| normalize_cell(c)).collect::<Vec<_>>();
    let a: BTreeSet<Vec<String>> = answer.rows.iter().map(|r| key(&r.cells)).collect();
    let g: BTreeSet<Vec<String>> = gold_rows.iter().map(|r| key(r)).collect();
    let union = a.union(&g).count();
    if union == 0 {
        return 0.0;
    }
    a.symmetric_difference(&g).count() as f64 / union as f64
}

/// Gold labels for one query, as stored on disk. Columns are zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GoldLabels {
    pub query_id: String,
    pub labels: Vec<(String, usize, Label)>,
}

impl GoldLabels {
    pub fn from_labeling(query_id: &str, table_ids: &[String], y: &Labeling) -> Self {
        let labels = table_ids
            .iter()
            .zip(&y.tables)
            .flat_map(|(id, ls)| ls.iter().enumerate().map(move |(c, &l)| (id.clone(), c, l)))
            .collect();
        Self {
            query_id: query_id.to_string(),
            labels,
        }
    }

    pub fn table_ids(&self) -> BTreeSet<&str> {
        self.labels.iter().map(|(t, _, _)| t.as_str()).collect()
    }

    /// Gold labels of one table with `n_cols` columns; `None` when the
    /// table has no gold entries at all.
    pub fn table(&self, id: &str, n_cols: usize) -> Result<Option<Vec<Label>>, AnswerError> {
        let mut out: Vec<Option<Label>> = vec![None; n_cols];
        let mut any = false;
        for (t, c, l) in &self.labels {
            if t != id {
                continue;
            }
            any = true;
            let slot = out
                .get_mut(*c)
                .ok_or_else(|| AnswerError::Gold(format!("{id}: column {c} out of range")))?;
            if slot.replace(*l).is_some_and(|prev| prev != *l) {
                return Err(AnswerError::Gold(format!("{id}: column {c} labeled twice")));
            }
        }
        if !any {
            return Ok(None);
        }
        out.into_iter()
            .enumerate()
            .map(|(c, l)| l.ok_or_else(|| AnswerError::Gold(format!("{id}: column {c} has no label"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}
