use super::InferError;
use crate::model::{check_constraints, Label, Labeling, Model};

/// Largest total column count the exhaustive search accepts.
pub const BRUTE_FORCE_MAX_COLUMNS: usize = 12;

/// Exact maximizer of the objective by enumeration. Ties keep the
/// lexicographically smallest labeling (`1 < .. < q < na < nr`, tables in
/// order).
pub fn brute_force_map(model: &Model) -> Result<Labeling, InferError> {
    let q = model.q;
    let columns: usize = model.tables.iter().map(|t| t.n_cols()).sum();
    if columns > BRUTE_FORCE_MAX_COLUMNS {
        return Err(InferError::TooLarge {
            columns,
            limit: BRUTE_FORCE_MAX_COLUMNS,
        });
    }

    // Feasible labelings of each table, in lexicographic order.
    let options: Vec<Vec<(Vec<Label>, f64)>> = model
        .tables
        .iter()
        .map(|t| {
            feasible_tables(t.n_cols(), q, model.m)
                .into_iter()
                .map(|l| {
                    let s = t.node_score(&l, q);
                    (l, s)
                })
                .collect()
        })
        .collect();

    let mut pick = vec![0usize; options.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let y = Labeling {
            tables: pick.iter().zip(&options).map(|(&i, o)| o[i].0.clone()).collect(),
        };
        let nodes: f64 = pick.iter().zip(&options).map(|(&i, o)| o[i].1).sum();
        let value = nodes + model.edge_score(&y);
        if best.as_ref().is_none_or(|(b, _)| value > b + 1e-12) {
            best = Some((value, pick.clone()));
        }
        // Odometer increment, last table fastest.
        let mut k = pick.len();
        loop {
            if k == 0 {
                let (_, p) = best.expect("at least one labeling is enumerated");
                return Ok(Labeling {
                    tables: p.iter().zip(&options).map(|(&i, o)| o[i].0.clone()).collect(),
                });
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < options[k].len() {
                break;
            }
            pick[k] = 0;
        }
    }
}

fn feasible_tables(n: usize, q: usize, m: usize) -> Vec<Vec<Label>> {
    let width = q + 2;
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        let labels: Vec<Label> = digits.iter().map(|&d| Label::from_slot(d, q)).collect();
        if check_constraints(&labels, q, m) {
            out.push(labels);
        }
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < width {
                break;
            }
            digits[k] = 0;
        }
    }
}
