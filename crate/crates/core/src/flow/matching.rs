use super::{min_cost_max_flow, EdgeId, FlowError, FlowGraph, NodeId};

/// Where each bipartite node lives inside the flow graph.
#[derive(Debug, Clone)]
pub struct MatchingLayout {
    pub source: NodeId,
    pub sink: NodeId,
    pub left: Vec<NodeId>,
    pub right: Vec<NodeId>,
    /// `pair_edges[u][v]` is the forward edge `left[u] -> right[v]`.
    pub pair_edges: Vec<Vec<EdgeId>>,
}

#[derive(Debug, Clone)]
pub struct Matching {
    /// `(left, right, multiplicity)` for every pair carrying flow.
    pub pairs: Vec<(usize, usize, i64)>,
    /// Total matched weight.
    pub opt: f64,
    /// Graph holding the optimal flow, i.e. the residual graph.
    pub residual: FlowGraph<i64>,
    pub layout: MatchingLayout,
}

impl Matching {
    /// Right nodes matched to `left`, with multiplicity.
    pub fn partners(&self, left: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.pairs
            .iter()
            .filter(move |p| p.0 == left)
            .map(|&(_, r, k)| (r, k))
    }
}

/// Maximum-weight capacitated bipartite matching through min-cost max-flow.
///
/// The side with less total capacity receives a dummy node carrying the
/// deficit, joined to every node opposite at zero cost, so the flow must
/// saturate every real node on the smaller side. Edges `u -> v` have capacity
/// `min(c_u, c_v)` and cost `-w(u, v)`.
pub fn max_weight_matching(
    left_caps: &[i64],
    right_caps: &[i64],
    weights: &[Vec<f64>],
) -> Result<Matching, FlowError> {
    if weights.len() != left_caps.len() || weights.iter().any(|row| row.len() != right_caps.len()) {
        return Err(FlowError::InvalidProblem(
            "weight matrix shape does not match node counts".into(),
        ));
    }
    if left_caps.iter().chain(right_caps).any(|&c| c < 0) {
        return Err(FlowError::InvalidProblem("negative capacity".into()));
    }
    if weights.iter().flatten().any(|w| !w.is_finite()) {
        return Err(FlowError::InvalidProblem("non-finite weight".into()));
    }

    let mut g: FlowGraph<i64> = FlowGraph::new(0);
    let source = g.add_node();
    let sink = g.add_node();
    let left: Vec<NodeId> = left_caps.iter().map(|_| g.add_node()).collect();
    let right: Vec<NodeId> = right_caps.iter().map(|_| g.add_node()).collect();

    let left_total: i64 = left_caps.iter().sum();
    let right_total: i64 = right_caps.iter().sum();

    for (&node, &cap) in left.iter().zip(left_caps) {
        g.add_edge(source, node, cap, 0.0);
    }
    for (&node, &cap) in right.iter().zip(right_caps) {
        g.add_edge(node, sink, cap, 0.0);
    }
    let pair_edges = left
        .iter()
        .enumerate()
        .map(|(u, &lu)| {
            right
                .iter()
                .enumerate()
                .map(|(v, &rv)| g.add_edge(lu, rv, left_caps[u].min(right_caps[v]), -weights[u][v]))
                .collect()
        })
        .collect();

    if left_total < right_total {
        let deficit = right_total - left_total;
        let d = g.add_node();
        g.add_edge(source, d, deficit, 0.0);
        for (&rv, &cap) in right.iter().zip(right_caps) {
            g.add_edge(d, rv, deficit.min(cap), 0.0);
        }
    } else if right_total < left_total {
        let deficit = left_total - right_total;
        let d = g.add_node();
        g.add_edge(d, sink, deficit, 0.0);
        for (&lu, &cap) in left.iter().zip(left_caps) {
            g.add_edge(lu, d, deficit.min(cap), 0.0);
        }
    }

    min_cost_max_flow(&mut g, source, sink)?;

    let layout = MatchingLayout {
        source,
        sink,
        left,
        right,
        pair_edges,
    };
    let mut pairs = Vec::new();
    let mut opt = 0.0;
    for (u, row) in layout.pair_edges.iter().enumerate() {
        for (v, &e) in row.iter().enumerate() {
            let f = g.edge(e).flow;
            if f > 0 {
                pairs.push((u, v, f));
                opt += weights[u][v] * f as f64;
            }
        }
    }
    Ok(Matching {
        pairs,
        opt,
        residual: g,
        layout,
    })
}
