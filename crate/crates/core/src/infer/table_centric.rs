use super::{label_table_independent, table_confidences, InferError};
use crate::model::{ColumnRef, Labeling, Model};

#[derive(Debug, Clone, PartialEq)]
pub struct TableCentricOutcome {
    pub labeling: Labeling,
    /// Stage-one `Pr(l | tc)`, `confidence[t][c][slot]`.
    pub confidence: Vec<Vec<Vec<f64>>>,
    /// Stage-two messages over labels `1..q, na`; `None` for columns with
    /// no confident neighbour.
    pub messages: Vec<Vec<Option<Vec<f64>>>>,
}

pub fn table_centric(model: &Model) -> Result<Labeling, InferError> {
    table_centric_detailed(model).map(|o| o.labeling)
}

/// Stage one: per-table confidences from max-marginals. Stage two: each
/// column collects `w_e * nsim * Pr` from its confident neighbours. Stage
/// three: relabel every table with `max(msg, θ)` as its potential.
pub fn table_centric_detailed(model: &Model) -> Result<TableCentricOutcome, InferError> {
    let q = model.q;
    let confidence = model
        .tables
        .iter()
        .map(|t| table_confidences(&t.theta, q))
        .collect::<Result<Vec<_>, _>>()?;

    let incidence = model.incidence();
    let mut messages: Vec<Vec<Option<Vec<f64>>>> =
        model.tables.iter().map(|t| vec![None; t.n_cols()]).collect();
    for (t, cols) in incidence.iter().enumerate() {
        for (c, edges) in cols.iter().enumerate() {
            let me = ColumnRef { table: t, column: c };
            let mut msg: Option<Vec<f64>> = None;
            for &ei in edges {
                let edge = &model.edges[ei];
                let (nsim, other_confident) = edge.towards(me);
                if !other_confident {
                    continue;
                }
                let other = edge.other(me);
                let p = &confidence[other.table][other.column];
                let acc = msg.get_or_insert_with(|| vec![0.0; q + 1]);
                for (slot, a) in acc.iter_mut().enumerate() {
                    *a += model.we * nsim * p[slot];
                }
            }
            messages[t][c] = msg;
        }
    }

    let tables = model
        .tables
        .iter()
        .enumerate()
        .map(|(t, table)| {
            let theta: Vec<Vec<f64>> = table
                .theta
                .iter()
                .enumerate()
                .map(|(c, row)| match &messages[t][c] {
                    None => row.clone(),
                    Some(msg) => {
                        let mut row = row.clone();
                        for (slot, &m) in msg.iter().enumerate() {
                            row[slot] = row[slot].max(m);
                        }
                        row
                    }
                })
                .collect();
            label_table_independent(&theta, q, model.m).map(|d| d.labels)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(TableCentricOutcome {
        labeling: Labeling { tables },
        confidence,
        messages,
    })
}
