//! Metric graphs with leads.
//!
//! A [`MetricGraph`] is a finite connected multigraph (loops and parallel
//! edges allowed) whose edges carry positive lengths, together with a number
//! of semi-infinite leads attached at some vertices. Values are immutable
//! once validated.

mod catalog;
mod invariants;

pub use catalog::{catalog, CATALOG_NAMES};
pub use invariants::{compute_invariants, Count, GraphInvariants, GraphType};

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub length: f64,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    /// Lead count per vertex, indexed like `vertices`; 0 means no leads.
    leads: Vec<u32>,
}

/// Wire form of a graph document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub leads: Vec<LeadRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadRecord {
    pub vertex: String,
    pub count: u32,
}

/// Parse and validate a graph document.
pub fn load_graph(text: &str) -> Result<MetricGraph> {
    let doc: GraphDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    MetricGraph::from_document(&doc)
}

impl MetricGraph {
    pub fn from_document(doc: &GraphDocument) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, v) in doc.vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateId { kind: "vertex", id: v.clone() });
            }
        }
        let lookup = |name: &str, context: String| {
            index.get(name).copied().ok_or_else(|| Error::UnknownVertex {
                vertex: name.to_string(),
                context,
            })
        };
        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(doc.edges.len());
        for rec in &doc.edges {
            if !seen.insert(rec.id.clone()) {
                return Err(Error::DuplicateId { kind: "edge", id: rec.id.clone() });
            }
            let from = lookup(&rec.from, format!("edge `{}`", rec.id))?;
            let to = lookup(&rec.to, format!("edge `{}`", rec.id))?;
            edges.push(Edge { id: rec.id.clone(), from, to, length: rec.length });
        }
        let mut leads = vec![0u32; doc.vertices.len()];
        let mut lead_seen = HashSet::new();
        for rec in &doc.leads {
            let v = lookup(&rec.vertex, "lead record".to_string())?;
            if !lead_seen.insert(v) {
                return Err(Error::DuplicateId { kind: "lead record", id: rec.vertex.clone() });
            }
            if rec.count == 0 {
                return Err(Error::ZeroLeadCount { vertex: rec.vertex.clone() });
            }
            leads[v] = rec.count;
        }
        Self::new(doc.vertices.clone(), edges, leads)
    }

    /// Build from already-indexed parts; runs the same validation as [`load_graph`].
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>, leads: Vec<u32>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Empty);
        }
        if leads.len() != vertices.len() {
            return Err(Error::InvalidParameter(format!(
                "{} lead counts for {} vertices",
                leads.len(),
                vertices.len()
            )));
        }
        let mut names = HashSet::new();
        for v in &vertices {
            if !names.insert(v) {
                return Err(Error::DuplicateId { kind: "vertex", id: v.clone() });
            }
        }
        let mut ids = HashSet::new();
        for e in &edges {
            if !ids.insert(&e.id) {
                return Err(Error::DuplicateId { kind: "edge", id: e.id.clone() });
            }
            if e.from >= vertices.len() || e.to >= vertices.len() {
                return Err(Error::UnknownVertex {
                    vertex: format!("#{}", e.from.max(e.to)),
                    context: format!("edge `{}`", e.id),
                });
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(Error::NonPositiveLength { id: e.id.clone(), length: e.length });
            }
        }
        let g = MetricGraph { vertices, edges, leads };
        g.check_connected()?;
        Ok(g)
    }

    fn check_connected(&self) -> Result<()> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(v) => Err(Error::Disconnected {
                root: self.vertices[0].clone(),
                vertex: self.vertices[v].clone(),
            }),
            None => Ok(()),
        }
    }

    /// Neighbour lists `(vertex, edge index)`; a loop appears twice at its vertex.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.from].push((e.to, i));
            adj[e.to].push((e.from, i));
        }
        adj
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn lead_counts(&self) -> &[u32] {
        &self.leads
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_leads(&self) -> usize {
        self.leads.iter().map(|&n| n as usize).sum()
    }

    /// Number of edge endpoints at `v` (a loop counts twice).
    pub fn edge_degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| usize::from(e.from == v) + usize::from(e.to == v))
            .sum()
    }

    /// Degree in G: edge endpoints plus attached leads.
    pub fn degree(&self, v: usize) -> usize {
        self.edge_degree(v) + self.leads[v] as usize
    }

    /// Vertices carrying at least one lead (V₀).
    pub fn lead_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.leads[v] > 0).collect()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.length).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Same combinatorics, new edge lengths (validated).
    pub fn with_lengths(&self, lengths: &[f64]) -> Result<Self> {
        if lengths.len() != self.edges.len() {
            return Err(Error::InvalidParameter(format!(
                "{} lengths for {} edges",
                lengths.len(),
                self.edges.len()
            )));
        }
        let edges = self
            .edges
            .iter()
            .zip(lengths)
            .map(|(e, &length)| Edge { length, ..e.clone() })
            .collect();
        Self::new(self.vertices.clone(), edges, self.leads.clone())
    }

    /// Same graph with every lead removed (the compact part Γ).
    pub fn without_leads(&self) -> Self {
        MetricGraph {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
            leads: vec![0; self.vertices.len()],
        }
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id.clone(),
                    from: self.vertices[e.from].clone(),
                    to: self.vertices[e.to].clone(),
                    length: e.length,
                })
                .collect(),
            leads: self
                .leads
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(v, &count)| LeadRecord { vertex: self.vertices[v].clone(), count })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STAR: &str = r#"{
        "vertices": ["c", "v1"],
        "edges": [{"id": "e1", "from": "c", "to": "v1", "length": 1.0}],
        "leads": [{"vertex": "c", "count": 3}]
    }"#;

    #[test]
    fn parses_star_document() {
        let g = load_graph(STAR).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.num_leads(), 3);
        assert_eq!(g.total_length(), 1.0);
        assert_eq!(g.degree(0), 4);
        assert_eq!(g.degree(1), 1);
        assert_eq!(g.lead_vertices(), vec![0]);
    }

    #[test]
    fn rejects_negative_length() {
        let text = STAR.replace("1.0", "-1");
        assert!(matches!(load_graph(&text), Err(Error::NonPositiveLength { .. })));
    }

    #[test]
    fn rejects_duplicate_edge_id() {
        let text = r#"{
            "vertices": ["a", "b"],
            "edges": [{"id": "e1", "from": "a", "to": "b", "length": 1},
                      {"id": "e1", "from": "b", "to": "a", "length": 2}],
            "leads": []
        }"#;
        assert!(matches!(load_graph(text), Err(Error::DuplicateId { kind: "edge", .. })));
    }

    #[test]
    fn rejects_unknown_vertex_and_disconnected() {
        let text = STAR.replace(r#""to": "v1""#, r#""to": "nowhere""#);
        assert!(matches!(load_graph(&text), Err(Error::UnknownVertex { .. })));
        let text = r#"{"vertices": ["a", "b"], "edges": [], "leads": []}"#;
        assert!(matches!(load_graph(text), Err(Error::Disconnected { .. })));
    }

    #[test]
    fn rejects_malformed_and_zero_leads() {
        assert!(matches!(load_graph("{ nope"), Err(Error::Parse(_))));
        let text = STAR.replace(r#""count": 3"#, r#""count": 0"#);
        assert!(matches!(load_graph(&text), Err(Error::ZeroLeadCount { .. })));
    }

    #[test]
    fn loops_count_twice() {
        let g = MetricGraph::new(
            vec!["v".into()],
            vec![Edge { id: "e".into(), from: 0, to: 0, length: 2.0 }],
            vec![1],
        )
        .unwrap();
        assert_eq!(g.degree(0), 3);
    }

    #[test]
    fn document_round_trip() {
        let g = load_graph(STAR).unwrap();
        let text = serde_json::to_string(&g.to_document()).unwrap();
        assert_eq!(load_graph(&text).unwrap(), g);
    }
}
