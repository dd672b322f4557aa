//! Flow algorithms behind the column mapper: successive-shortest-path
//! min-cost max-flow, capacitated bipartite matching, residual distances and
//! the group-constrained minimum s-t cut.

mod cut;
mod graph;
mod matching;

pub use cut::{constrained_min_cut, cut_weight, CutOutcome};
pub use graph::{Capacity, EdgeId, FlowEdge, FlowGraph, NodeId};
pub use matching::{max_weight_matching, Matching, MatchingLayout};

use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("negative-cost cycle in residual graph")]
    NegativeCycle,
    #[error("invalid matching problem: {0}")]
    InvalidProblem(String),
}

/// Result of a flow computation; the graph passed in holds the final flow
/// and therefore the residual graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSummary<C> {
    pub value: C,
    pub cost: f64,
}

/// Maximum `s -> t` flow of minimum total cost, found by repeatedly pushing
/// along the cheapest residual path. Paths are found with Bellman-Ford since
/// residual costs go negative.
pub fn min_cost_max_flow<C: Capacity>(
    g: &mut FlowGraph<C>,
    s: NodeId,
    t: NodeId,
) -> Result<FlowSummary<C>, FlowError> {
    let mut value = C::ZERO;
    let mut cost = 0.0;
    loop {
        let (dist, via) = g.residual_shortest_paths(s)?;
        if dist[t] == f64::INFINITY {
            break;
        }
        let path = g.trace_path(&via, t);
        let Some(amount) = bottleneck(g, &path) else {
            break;
        };
        for &e in &path {
            g.push(e, amount);
            cost += g.edge(e).cost * amount.to_f64();
        }
        value = value + amount;
    }
    Ok(FlowSummary { value, cost })
}

/// Shortest distances from `source` over positive-residual edges;
/// unreachable nodes are `f64::INFINITY`.
pub fn residual_distances<C: Capacity>(
    g: &FlowGraph<C>,
    source: NodeId,
) -> Result<Vec<f64>, FlowError> {
    g.residual_shortest_paths(source).map(|(d, _)| d)
}

/// Plain maximum flow by breadth-first augmenting paths (every edge costs
/// one). Returns the additional flow pushed.
pub fn max_flow<C: Capacity>(g: &mut FlowGraph<C>, s: NodeId, t: NodeId) -> C {
    let mut total = C::ZERO;
    loop {
        let n = g.node_count();
        let mut via: Vec<Option<EdgeId>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &e in g.out_edges(u) {
                let edge = g.edge(e);
                if edge.residual().has_room() && !seen[edge.to] {
                    seen[edge.to] = true;
                    via[edge.to] = Some(e);
                    queue.push_back(edge.to);
                }
            }
        }
        if !seen[t] {
            return total;
        }
        let path = g.trace_path(&via, t);
        let Some(amount) = bottleneck(g, &path) else {
            return total;
        };
        for &e in &path {
            g.push(e, amount);
        }
        total = total + amount;
    }
}

fn bottleneck<C: Capacity>(g: &FlowGraph<C>, path: &[EdgeId]) -> Option<C> {
    let mut it = path.iter().map(|&e| g.edge(e).residual());
    let first = it.next()?;
    let amount = it.fold(first, |m, r| if r < m { r } else { m });
    amount.has_room().then_some(amount)
}
