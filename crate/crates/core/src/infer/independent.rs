use crate::flow::{max_weight_matching, FlowError};
use crate::model::{check_constraints, Label, Labeling, Model};

/// Outcome of labeling one table on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct TableDecision {
    pub labels: Vec<Label>,
    /// Node score of `labels`.
    pub score: f64,
    /// Score of the best constraint-satisfying relevant labeling, if any.
    pub matched_score: Option<f64>,
    pub nr_score: f64,
}

/// Best labeling of one table under all four constraints.
///
/// Columns are matched to `1..q` (capacity 1) and `na` (capacity
/// `n_t - m`), with a bonus on label 1 large enough that every optimal
/// matching uses it. The result is compared with the all-nr labeling; ties
/// keep the relevant labeling.
pub fn label_table_independent(theta: &[Vec<f64>], q: usize, m: usize) -> Result<TableDecision, FlowError> {
    let n = theta.len();
    let nr_score: f64 = theta.iter().map(|row| row[q + 1]).sum();
    let all_nr = TableDecision {
        labels: vec![Label::Nr; n],
        score: nr_score,
        matched_score: None,
        nr_score,
    };
    if n == 0 || q == 0 {
        return Ok(all_nr);
    }

    let bonus = 1.0 + theta.iter().flatten().map(|v| v.abs()).sum::<f64>();
    let weights: Vec<Vec<f64>> = theta
        .iter()
        .map(|row| (0..=q).map(|s| row[s] + if s == 0 { bonus } else { 0.0 }).collect())
        .collect();
    let mut right = vec![1i64; q];
    right.push(n.saturating_sub(m) as i64);
    let matching = max_weight_matching(&vec![1; n], &right, &weights)?;

    let mut labels = vec![None; n];
    for &(c, slot, _) in &matching.pairs {
        labels[c] = Some(Label::from_slot(slot, q));
    }
    let Some(labels) = labels.into_iter().collect::<Option<Vec<Label>>>() else {
        return Ok(all_nr);
    };
    if !check_constraints(&labels, q, m) {
        return Ok(all_nr);
    }
    let score: f64 = labels.iter().enumerate().map(|(c, l)| theta[c][l.slot(q)]).sum();
    if score >= nr_score {
        Ok(TableDecision {
            labels,
            score,
            matched_score: Some(score),
            nr_score,
        })
    } else {
        Ok(TableDecision {
            matched_score: Some(score),
            ..all_nr
        })
    }
}

/// Every table labeled on its own, ignoring edges.
pub fn label_independent(model: &Model) -> Result<Labeling, super::InferError> {
    let tables = model
        .tables
        .iter()
        .map(|t| label_table_independent(&t.theta, model.q, model.m).map(|d| d.labels))
        .collect::<Result<_, _>>()?;
    Ok(Labeling { tables })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_prefers_label() {
        let d = label_table_independent(&[vec![2.0, 0.0, 1.0]], 1, 1).unwrap();
        assert_eq!(d.labels, vec![Label::Query(1)]);
        assert_eq!(d.score, 2.0);
    }

    #[test]
    fn negative_potentials_give_all_nr() {
        let theta = vec![vec![-5.0, -5.0, 0.0, 0.0]; 2];
        let d = label_table_independent(&theta, 2, 2).unwrap();
        assert_eq!(d.labels, vec![Label::Nr; 2]);
    }

    #[test]
    fn na_capacity_limits_unmapped_columns() {
        // na is best everywhere but at most n_t - m = 1 column may take it.
        let theta = vec![vec![-1.0, -1.0, 0.5, -9.0]; 3];
        let d = label_table_independent(&theta, 2, 2).unwrap();
        assert_eq!(d.labels.iter().filter(|&&l| l == Label::Na).count(), 1);
        assert!(d.labels.contains(&Label::Query(1)) && d.labels.contains(&Label::Query(2)));
    }

    #[test]
    fn label_one_forced_even_when_weak() {
        let theta = vec![vec![-3.0, 1.0, 0.0, -9.0], vec![-3.0, 0.5, 0.0, -9.0]];
        let d = label_table_independent(&theta, 2, 1).unwrap();
        assert!(d.labels.contains(&Label::Query(1)));
    }

    #[test]
    fn too_few_columns_for_min_match() {
        let d = label_table_independent(&[vec![5.0, 5.0, 0.0, -1.0]], 2, 2).unwrap();
        assert_eq!(d.labels, vec![Label::Nr]);
        assert_eq!(d.matched_score, None);
    }
}
