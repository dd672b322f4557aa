use std::fmt::Debug;
use std::ops::{Add, Neg, Sub};

use super::FlowError;

pub type NodeId = usize;
pub type EdgeId = usize;

/// Slack used when comparing real-valued path costs.
pub(crate) const COST_EPS: f64 = 1e-9;

/// Capacity/flow scalar. Matching graphs use `i64`; cut graphs carry real
/// weights and use `f64`.
pub trait Capacity:
    Copy + Debug + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self>
{
    const ZERO: Self;

    /// Whether a residual amount is large enough to route flow through.
    fn has_room(self) -> bool;

    fn to_f64(self) -> f64;
}

impl Capacity for i64 {
    const ZERO: Self = 0;

    fn has_room(self) -> bool {
        self > 0
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Capacity for f64 {
    const ZERO: Self = 0.0;

    fn has_room(self) -> bool {
        self > 1e-12
    }

    fn to_f64(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowEdge<C> {
    pub from: NodeId,
    pub to: NodeId,
    pub cap: C,
    pub flow: C,
    pub cost: f64,
}

impl<C: Capacity> FlowEdge<C> {
    pub fn residual(&self) -> C {
        self.cap - self.flow
    }
}

/// Directed graph with paired reverse edges: edge `e ^ 1` is the reverse of
/// `e`, with capacity 0, cost `-cost` and flow `-flow`.
#[derive(Debug, Clone)]
pub struct FlowGraph<C> {
    adj: Vec<Vec<EdgeId>>,
    edges: Vec<FlowEdge<C>>,
}

impl<C: Capacity> FlowGraph<C> {
    pub fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            edges: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn add_node(&mut self) -> NodeId {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Adds `from -> to` and its implicit reverse; returns the forward id.
    pub fn add_edge(&mut self, from: NodeId, to: NodeId, cap: C, cost: f64) -> EdgeId {
        let id = self.edges.len();
        self.edges.push(FlowEdge {
            from,
            to,
            cap,
            flow: C::ZERO,
            cost,
        });
        self.edges.push(FlowEdge {
            from: to,
            to: from,
            cap: C::ZERO,
            flow: C::ZERO,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub fn edge(&self, id: EdgeId) -> &FlowEdge<C> {
        &self.edges[id]
    }

    /// Forward (user-added) edges only.
    pub fn forward_edges(&self) -> impl Iterator<Item = (EdgeId, &FlowEdge<C>)> {
        self.edges.iter().enumerate().step_by(2)
    }

    pub fn out_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.adj[node]
    }

    pub(crate) fn push(&mut self, id: EdgeId, amount: C) {
        self.edges[id].flow = self.edges[id].flow + amount;
        self.edges[id ^ 1].flow = self.edges[id ^ 1].flow - amount;
    }

    /// Net flow leaving `node` over forward edges.
    pub fn net_outflow(&self, node: NodeId) -> C {
        let mut total = C::ZERO;
        for (_, e) in self.forward_edges() {
            if e.from == node {
                total = total + e.flow;
            }
            if e.to == node {
                total = total - e.flow;
            }
        }
        total
    }

    /// Nodes reachable from `src` over positive-residual edges.
    pub fn reachable_from(&self, src: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![src];
        seen[src] = true;
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let edge = &self.edges[e];
                if edge.residual().has_room() && !seen[edge.to] {
                    seen[edge.to] = true;
                    stack.push(edge.to);
                }
            }
        }
        seen
    }

    /// Bellman-Ford over positive-residual edges. Unreachable nodes get
    /// `f64::INFINITY`. Returns distances and the edge used to enter each
    /// node on a shortest path.
    pub fn residual_shortest_paths(
        &self,
        src: NodeId,
    ) -> Result<(Vec<f64>, Vec<Option<EdgeId>>), FlowError> {
        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![None; n];
        dist[src] = 0.0;
        for round in 0..n {
            let mut changed = false;
            for (id, e) in self.edges.iter().enumerate() {
                if !e.residual().has_room() || dist[e.from] == f64::INFINITY {
                    continue;
                }
                let cand = dist[e.from] + e.cost;
                if cand < dist[e.to] - COST_EPS {
                    dist[e.to] = cand;
                    via[e.to] = Some(id);
                    changed = true;
                }
            }
            if !changed {
                return Ok((dist, via));
            }
            if round + 1 == n {
                return Err(FlowError::NegativeCycle);
            }
        }
        Ok((dist, via))
    }

    /// Edge ids along the shortest-path tree from the search root to `target`.
    pub(crate) fn trace_path(&self, via: &[Option<EdgeId>], target: NodeId) -> Vec<EdgeId> {
        let mut path = Vec::new();
        let mut cur = target;
        while let Some(e) = via[cur] {
            path.push(e);
            cur = self.edges[e].from;
            if path.len() > self.edges.len() {
                break;
            }
        }
        path.reverse();
        path
    }
}
