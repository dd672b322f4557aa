use super::{label_table_independent, InferError};
use crate::flow::{constrained_min_cut, FlowGraph, NodeId};
use crate::model::{check_constraints, edge_potential, Label, Labeling, Model};

/// Improvement a move needs before it is accepted.
const MOVE_EPS: f64 = 1e-9;
/// Safety cap; each accepted move strictly raises a bounded objective.
const MAX_ROUNDS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaOutcome {
    /// Final labeling after the MUST-MATCH / MIN-MATCH repair.
    pub labeling: Labeling,
    /// Labeling reached by the moves, before repair.
    pub raw: Labeling,
    /// Relaxed objective of the all-na start and after every accepted move.
    pub trace: Vec<f64>,
    pub rounds: usize,
}

/// MUTEX and ALL-IRR only.
fn relaxed_feasible(labels: &[Label], q: usize) -> bool {
    let nr = labels.iter().filter(|&&l| l == Label::Nr).count();
    if nr == labels.len() {
        return true;
    }
    if nr > 0 {
        return false;
    }
    let mut seen = vec![false; q + 1];
    labels.iter().all(|&l| match l {
        Label::Query(i) if i <= q => !std::mem::replace(&mut seen[i], true),
        Label::Query(_) => false,
        _ => true,
    })
}

/// Objective under MUTEX and ALL-IRR, the constraints α-moves maintain.
pub fn relaxed_objective(model: &Model, y: &Labeling) -> f64 {
    if y.tables.iter().any(|l| !relaxed_feasible(l, model.q)) {
        return f64::NEG_INFINITY;
    }
    model.score(y)
}

pub fn alpha_expansion(model: &Model) -> Result<Labeling, InferError> {
    alpha_expansion_detailed(model).map(|o| o.labeling)
}

/// α-expansion from the all-na labeling. Moves are tried for na, nr, then
/// `1..q`, and rounds repeat until a full round changes nothing. Each move
/// is a binary problem solved as a minimum cut; for query labels the cut
/// lets at most one column per table switch. Tables that end up violating
/// MUST-MATCH or MIN-MATCH are relabeled on their own.
pub fn alpha_expansion_detailed(model: &Model) -> Result<AlphaOutcome, InferError> {
    let q = model.q;
    let mut y = Labeling::uniform(model, Label::Na);
    let mut current = relaxed_objective(model, &y);
    let mut trace = vec![current];
    let mut order = vec![Label::Na, Label::Nr];
    order.extend((1..=q).map(Label::Query));

    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut changed = false;
        for &alpha in &order {
            let candidate = expand(model, &y, alpha);
            let value = relaxed_objective(model, &candidate);
            if value > current + MOVE_EPS {
                y = candidate;
                current = value;
                trace.push(value);
                changed = true;
            }
        }
        if !changed || rounds >= MAX_ROUNDS {
            break;
        }
    }

    let raw = y.clone();
    for (t, labels) in y.tables.iter_mut().enumerate() {
        if !check_constraints(labels, q, model.m) {
            *labels = label_table_independent(&model.tables[t].theta, q, model.m)?.labels;
        }
    }
    Ok(AlphaOutcome {
        labeling: y,
        raw,
        trace,
        rounds,
    })
}

/// Pairwise energy table `[E(0,0), E(0,1), E(1,0), E(1,1)]` where 1 means
/// "switch to α".
type Pair = [f64; 4];

fn expand(model: &Model, y: &Labeling, alpha: Label) -> Labeling {
    let q = model.q;
    // Variables that may switch.
    let free: Vec<Vec<bool>> = y
        .tables
        .iter()
        .map(|labels| {
            let frozen = alpha.is_query() && labels.contains(&alpha);
            labels.iter().map(|&l| !frozen && l != alpha).collect()
        })
        .collect();

    let mut node_of: Vec<Vec<Option<NodeId>>> = Vec::with_capacity(free.len());
    let mut next = 2;
    for row in &free {
        node_of.push(
            row.iter()
                .map(|&f| {
                    f.then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect(),
        );
    }
    let n_nodes = next;
    if n_nodes == 2 {
        return y.clone();
    }

    // Finite stand-in for the infinite ALL-IRR penalty.
    let big = 1.0
        + 2.0 * model.tables.iter().flat_map(|t| t.theta.iter().flatten()).map(|v| v.abs()).sum::<f64>()
        + 2.0 * model.edges.iter().map(|e| model.we * (e.nsim_ab + e.nsim_ba)).sum::<f64>();

    let mut unary = vec![0.0; n_nodes];
    let mut pair_edges: Vec<(NodeId, NodeId, f64)> = Vec::new();
    let label_of = |t: usize, c: usize, x: bool| if x { alpha } else { y.tables[t][c] };

    for (t, table) in model.tables.iter().enumerate() {
        for (c, node) in node_of[t].iter().enumerate() {
            if let Some(v) = *node {
                unary[v] += -table.theta[c][alpha.slot(q)] + table.theta[c][y.tables[t][c].slot(q)];
            }
        }
    }

    let mut add_pair = |a: (usize, usize), b: (usize, usize), e: Pair, unary: &mut Vec<f64>| {
        match (node_of[a.0][a.1], node_of[b.0][b.1]) {
            (None, None) => {}
            (Some(i), None) => unary[i] += e[2] - e[0],
            (None, Some(j)) => unary[j] += e[1] - e[0],
            (Some(i), Some(j)) => {
                let [a0, b0, c0, d0] = e;
                unary[i] += c0 - a0;
                unary[j] += d0 - c0;
                let w = b0 + c0 - a0 - d0;
                if w > 0.0 {
                    pair_edges.push((i, j, w));
                }
            }
        }
    };

    for edge in &model.edges {
        let (a, b) = ((edge.a.table, edge.a.column), (edge.b.table, edge.b.column));
        let energy = |xa: bool, xb: bool| -edge_potential(edge, label_of(a.0, a.1, xa), label_of(b.0, b.1, xb), model.we);
        let e = [energy(false, false), energy(false, true), energy(true, false), energy(true, true)];
        add_pair(a, b, e, &mut unary);
    }

    for (t, table) in model.tables.iter().enumerate() {
        for i in 0..table.n_cols() {
            for j in i + 1..table.n_cols() {
                let penalty = |xi: bool, xj: bool| {
                    let (li, lj) = (label_of(t, i, xi), label_of(t, j, xj));
                    if (li == Label::Nr) != (lj == Label::Nr) {
                        big
                    } else {
                        0.0
                    }
                };
                let e = [penalty(false, false), penalty(false, true), penalty(true, false), penalty(true, true)];
                add_pair((t, i), (t, j), e, &mut unary);
            }
        }
    }

    let (s, sink) = (0, 1);
    let mut g: FlowGraph<f64> = FlowGraph::new(n_nodes);
    for (v, &u) in unary.iter().enumerate().skip(2) {
        if u > 0.0 {
            g.add_edge(s, v, u, 0.0);
        } else if u < 0.0 {
            g.add_edge(v, sink, -u, 0.0);
        }
    }
    for &(i, j, w) in &pair_edges {
        g.add_edge(i, j, w, 0.0);
    }

    let groups: Vec<Vec<NodeId>> = if alpha.is_query() {
        node_of
            .iter()
            .map(|row| row.iter().flatten().copied().collect::<Vec<_>>())
            .filter(|g: &Vec<NodeId>| g.len() > 1)
            .collect()
    } else {
        Vec::new()
    };
    let cut = constrained_min_cut(&g, s, sink, &groups);

    let mut out = y.clone();
    for (t, row) in node_of.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if let Some(v) = *v {
                if cut.t_side[v] {
                    out.tables[t][c] = alpha;
                }
            }
        }
    }
    out
}
