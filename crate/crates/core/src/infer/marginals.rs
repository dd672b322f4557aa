use crate::flow::{max_weight_matching, residual_distances, FlowError};

/// Max-marginals `mu[c][slot]` of one table under MUTEX and ALL-IRR only.
///
/// One matching of columns to `1..q` (capacity 1) and `na` (capacity
/// `n_t`) gives `Opt`. Forcing column `c` onto label `l` changes the flow by
/// the cycle `c -> l ~> c`, whose cheapest completion is the residual
/// shortest path from `l` back to `c`, so `mu = Opt - d(l, c) + θ(c, l)`.
/// The pair already in the optimum keeps `Opt`. Every `nr` entry is the
/// all-nr score.
pub fn max_marginals(theta: &[Vec<f64>], q: usize) -> Result<Vec<Vec<f64>>, FlowError> {
    let n = theta.len();
    let nr_score: f64 = theta.iter().map(|row| row[q + 1]).sum();
    let weights: Vec<Vec<f64>> = theta.iter().map(|row| row[..=q].to_vec()).collect();
    let mut right = vec![1i64; q];
    right.push(n as i64);
    let matching = max_weight_matching(&vec![1; n], &right, &weights)?;

    let mut assigned = vec![usize::MAX; n];
    for &(c, slot, _) in &matching.pairs {
        assigned[c] = slot;
    }
    let mut mu = vec![vec![f64::NEG_INFINITY; q + 2]; n];
    for slot in 0..=q {
        let d = residual_distances(&matching.residual, matching.layout.right[slot])?;
        for c in 0..n {
            mu[c][slot] = if assigned[c] == slot {
                matching.opt
            } else {
                let back = d[matching.layout.left[c]];
                if back.is_finite() {
                    matching.opt - back + theta[c][slot]
                } else {
                    f64::NEG_INFINITY
                }
            };
        }
    }
    for row in &mut mu {
        row[q + 1] = nr_score;
    }
    Ok(mu)
}

/// Softmax over the finite max-marginals; `-inf` entries get probability 0.
pub fn column_confidence(mu: &[f64]) -> Vec<f64> {
    let top = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return vec![1.0 / mu.len() as f64; mu.len()];
    }
    let exps: Vec<f64> = mu.iter().map(|&v| (v - top).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// `Pr(l | tc)` for every column of one table.
pub fn table_confidences(theta: &[Vec<f64>], q: usize) -> Result<Vec<Vec<f64>>, FlowError> {
    Ok(max_marginals(theta, q)?.iter().map(|m| column_confidence(m)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_two_by_two() {
        // θ = [[3,1],[1,3]] over labels 1 and 2, na = 0, nr = 0.
        let theta = vec![vec![3.0, 1.0, 0.0, 0.0], vec![1.0, 3.0, 0.0, 0.0]];
        let mu = max_marginals(&theta, 2).unwrap();
        assert_eq!(mu[0][0], 6.0);
        assert!((mu[0][1] - 2.0).abs() < 1e-12);
        assert!((mu[0][2] - 3.0).abs() < 1e-12);
        assert_eq!(mu[0][3], 0.0);
        assert_eq!(mu[1][3], 0.0);
    }

    #[test]
    fn softmax_examples() {
        let p = column_confidence(&[2.0, 0.0]);
        assert!((p[0] - 0.880_797_077_977_882_3).abs() < 1e-12);
        assert!((p[1] - 0.119_202_922_022_117_7).abs() < 1e-12);
        assert_eq!(column_confidence(&[1.0; 4]), vec![0.25; 4]);
        let shifted = column_confidence(&[12.0, 10.0]);
        assert!((shifted[0] - p[0]).abs() < 1e-12);
        let with_inf = column_confidence(&[0.0, f64::NEG_INFINITY]);
        assert_eq!(with_inf, vec![1.0, 0.0]);
    }
}
