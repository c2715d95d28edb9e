//! Combinatorial invariants: type I/II, g(G) and the d(G) bounds.

use std::collections::VecDeque;

use serde::{Serialize, Serializer};

use super::MetricGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphType {
    /// Tree with at most one vertex of degree 1.
    TypeI,
    TypeII,
}

impl Serialize for GraphType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            GraphType::TypeI => "I",
            GraphType::TypeII => "II",
        })
    }
}

/// A nonnegative integer or +∞; serialized as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Count {
    Finite(u64),
    Infinite,
}

impl Count {
    pub fn finite(self) -> Option<u64> {
        match self {
            Count::Finite(n) => Some(n),
            Count::Infinite => None,
        }
    }
}

impl std::fmt::Display for Count {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Count::Finite(n) => s.serialize_u64(*n),
            Count::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphInvariants {
    #[serde(rename = "type")]
    pub graph_type: GraphType,
    pub g: Count,
    pub total_length: f64,
    pub v0_size: usize,
    pub d_lower: u8,
    pub d_upper: Count,
    pub d_conjecture: Count,
}

/// Bare multigraph used after degree-2 suppression.
#[derive(Debug, Clone)]
struct Skeleton {
    alive: Vec<bool>,
    leads: Vec<u32>,
    edges: Vec<(usize, usize)>,
}

impl Skeleton {
    fn from_graph(g: &MetricGraph) -> Self {
        Skeleton {
            alive: vec![true; g.vertices().len()],
            leads: g.lead_counts().to_vec(),
            edges: g.edges().iter().map(|e| (e.from, e.to)).collect(),
        }
    }

    fn edge_degree(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b)| usize::from(a == v) + usize::from(b == v)).sum()
    }

    fn degree(&self, v: usize) -> usize {
        self.edge_degree(v) + self.leads[v] as usize
    }

    /// Merge series edges through lead-free degree-2 vertices until none is left.
    /// A vertex carrying a single loop (a bare circle) is kept.
    fn suppress_degree_two(mut self) -> Self {
        loop {
            let candidate = (0..self.alive.len()).find(|&v| {
                self.alive[v]
                    && self.leads[v] == 0
                    && self.edge_degree(v) == 2
                    && !self.edges.iter().any(|&(a, b)| a == v && b == v)
            });
            let Some(v) = candidate else { return self };
            let incident: Vec<usize> = (0..self.edges.len())
                .filter(|&i| self.edges[i].0 == v || self.edges[i].1 == v)
                .collect();
            let far = |(a, b): (usize, usize)| if a == v { b } else { a };
            let (i, j) = (incident[0], incident[1]);
            let merged = (far(self.edges[i]), far(self.edges[j]));
            self.edges[i] = merged;
            self.edges.remove(j);
            self.alive[v] = false;
        }
    }

    fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.alive.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            if a != b {
                adj[b].push(a);
            }
        }
        adj
    }

    fn has_loop_at(&self, v: usize) -> bool {
        self.edges.iter().any(|&(a, b)| a == v && b == v)
    }

    /// Fewest vertices on a simple cycle: a loop is 1, a parallel pair is 2.
    fn girth(&self) -> Option<u64> {
        if self.edges.iter().any(|&(a, b)| a == b) {
            return Some(1);
        }
        let mut pairs: Vec<(usize, usize)> =
            self.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            return Some(2);
        }
        // Simple graph: BFS from every root, each non-tree edge closes a cycle.
        let adj = self.neighbours();
        let mut best: Option<u64> = None;
        for root in (0..self.alive.len()).filter(|&v| self.alive[v]) {
            let mut dist = vec![usize::MAX; adj.len()];
            let mut parent = vec![usize::MAX; adj.len()];
            dist[root] = 0;
            let mut queue = VecDeque::from([root]);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    if dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        parent[y] = x;
                        queue.push_back(y);
                    } else if parent[x] != y {
                        let len = (dist[x] + dist[y] + 1) as u64;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
        best
    }

    /// Fewest edges on a path joining two distinct degree-1 vertices.
    fn leaf_path(&self) -> Option<u64> {
        let leaves: Vec<usize> =
            (0..self.alive.len()).filter(|&v| self.alive[v] && self.degree(v) == 1).collect();
        let adj = self.neighbours();
        let mut best: Option<u64> = None;
        for &s in &leaves {
            let mut dist = vec![usize::MAX; adj.len()];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    if dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            for &t in leaves.iter().filter(|&&t| t != s && dist[t] != usize::MAX) {
                let d = dist[t] as u64;
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }
}

pub fn compute_invariants(g: &MetricGraph) -> GraphInvariants {
    let n_vertices = g.vertices().len();
    let acyclic = g.num_edges() + 1 == n_vertices;
    let degree_one = (0..n_vertices).filter(|&v| g.degree(v) == 1).count();
    let graph_type =
        if acyclic && degree_one <= 1 { GraphType::TypeI } else { GraphType::TypeII };

    let skeleton = Skeleton::from_graph(g).suppress_degree_two();
    let v0: Vec<usize> = g.lead_vertices();
    let d_lower = u8::from(v0.iter().any(|&a| !skeleton.has_loop_at(a)));

    let (g_count, d_upper, d_conjecture) = match graph_type {
        GraphType::TypeI => (Count::Infinite, Count::Infinite, Count::Infinite),
        GraphType::TypeII => {
            let value = match (skeleton.girth(), skeleton.leaf_path()) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) | (None, Some(a)) => a,
                // Unreachable for connected type II graphs.
                (None, None) => 0,
            };
            let upper = value.saturating_sub(1);
            (
                Count::Finite(value),
                Count::Finite(upper),
                Count::Finite(upper.min(v0.len() as u64)),
            )
        }
    };

    GraphInvariants {
        graph_type,
        g: g_count,
        total_length: g.total_length(),
        v0_size: v0.len(),
        d_lower,
        d_upper,
        d_conjecture,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{catalog, Edge};

    fn inv(name: &str, params: &[f64]) -> GraphInvariants {
        compute_invariants(&catalog(name, params, None).unwrap())
    }

    #[test]
    fn star_is_type_one() {
        let i = inv("star", &[1.0, 3.0]);
        assert_eq!(i.graph_type, GraphType::TypeI);
        assert_eq!(i.g, Count::Infinite);
        assert_eq!(i.d_upper, Count::Infinite);
    }

    #[test]
    fn tetrahedron_with_one_lead() {
        let i = inv("tetrahedron", &[1.0]);
        assert_eq!(i.graph_type, GraphType::TypeII);
        assert_eq!(i.g, Count::Finite(3));
        assert_eq!(i.d_conjecture, Count::Finite(1));
        assert_eq!(i.d_lower, 1);
    }

    #[test]
    fn single_loop_has_g_one() {
        let i = inv("circular", &[1.0]);
        assert_eq!(i.graph_type, GraphType::TypeII);
        assert_eq!(i.g, Count::Finite(1));
        assert_eq!(i.d_lower, 0);
        assert_eq!(i.d_upper, Count::Finite(0));
    }

    #[test]
    fn parallel_pair_has_g_two() {
        let i = inv("circular", &[1.0, 1.0]);
        assert_eq!(i.g, Count::Finite(2));
        assert_eq!(i.d_conjecture, Count::Finite(1));
    }

    #[test]
    fn y_graph_is_type_two_through_its_leaf_path() {
        let i = inv("Y", &[1.0, 2.0]);
        assert_eq!(i.graph_type, GraphType::TypeII);
        assert_eq!(i.g, Count::Finite(2));
        assert_eq!(i.total_length, 3.0);
    }

    #[test]
    fn subdividing_a_loop_keeps_g() {
        let g = MetricGraph::new(
            vec!["a".into(), "x".into()],
            vec![
                Edge { id: "e1".into(), from: 0, to: 1, length: 1.0 },
                Edge { id: "e2".into(), from: 1, to: 0, length: 2.0 },
            ],
            vec![1, 0],
        )
        .unwrap();
        let i = compute_invariants(&g);
        assert_eq!(i.g, Count::Finite(1));
        assert_eq!(i.d_lower, 0);
    }
}
