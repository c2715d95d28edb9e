//! Named graphs used throughout the examples and tests.
//!
//! | name           | params                          | default lengths |
//! |----------------|---------------------------------|-----------------|
//! | `star`         | `l_1, .., l_k, N` (k >= 0)      | from params     |
//! | `interval_Gnn` | `l, N, N'`                      | from params     |
//! | `Y`            | `l, L`                          | from params     |
//! | `circular`     | `N_1, .., N_p` (lead counts)    | all 1           |
//! | `tetrahedron`, `cube`, `petersen`, `dodecahedron` | lead counts per vertex, in vertex order (default `1`) | all 1 |
//!
//! An explicit `lengths` slice overrides the defaults; for `star`, `Y` and
//! `interval_Gnn` it overrides the lengths given in `params`.

use crate::error::{Error, Result};

use super::{Edge, MetricGraph};

pub const CATALOG_NAMES: [&str; 8] =
    ["star", "interval_Gnn", "Y", "circular", "tetrahedron", "cube", "petersen", "dodecahedron"];

pub fn catalog(name: &str, params: &[f64], lengths: Option<&[f64]>) -> Result<MetricGraph> {
    let g = match name {
        "star" => {
            if params.is_empty() {
                return Err(arity(name, "at least 1 (lengths..., N)", 0));
            }
            let (ls, n) = params.split_at(params.len() - 1);
            star(ls, lead_count(n[0])?)?
        }
        "interval_Gnn" => {
            if params.len() != 3 {
                return Err(arity(name, "3 (l, N, N')", params.len()));
            }
            let vertices = vec!["v".to_string(), "v'".to_string()];
            let edges = vec![edge("e1", 0, 1, params[0])];
            MetricGraph::new(vertices, edges, vec![lead_count(params[1])?, lead_count(params[2])?])?
        }
        "Y" => {
            if params.len() != 2 {
                return Err(arity(name, "2 (l, L)", params.len()));
            }
            star(params, 1)?
        }
        "circular" => {
            if params.is_empty() {
                return Err(arity(name, "at least 1 lead count", 0));
            }
            let counts = params.iter().map(|&p| lead_count(p)).collect::<Result<Vec<_>>>()?;
            let p = counts.len();
            let vertices = (1..=p).map(|i| format!("v{i}")).collect();
            let edges = (0..p).map(|i| edge(&format!("e{}", i + 1), i, (i + 1) % p, 1.0)).collect();
            MetricGraph::new(vertices, edges, counts)?
        }
        "tetrahedron" | "cube" | "petersen" | "dodecahedron" => {
            let (n, pairs) = match name {
                "tetrahedron" => (4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
                "cube" => generalized_petersen(4, 1),
                "petersen" => generalized_petersen(5, 2),
                _ => generalized_petersen(10, 2),
            };
            if params.len() > n {
                return Err(arity(name, &format!("at most {n} lead counts"), params.len()));
            }
            let mut leads = vec![0u32; n];
            if params.is_empty() {
                leads[0] = 1;
            }
            for (slot, &p) in leads.iter_mut().zip(params) {
                *slot = lead_count(p)?;
            }
            let vertices = (0..n).map(|i| format!("v{i}")).collect();
            let edges = pairs
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| edge(&format!("e{}", i + 1), a, b, 1.0))
                .collect();
            MetricGraph::new(vertices, edges, leads)?
        }
        other => return Err(Error::UnknownCatalog(other.to_string())),
    };
    match lengths {
        Some(ls) => g.with_lengths(ls),
        None => Ok(g),
    }
}

fn arity(name: &str, expected: &str, got: usize) -> Error {
    Error::CatalogArity { name: name.to_string(), expected: expected.to_string(), got }
}

fn edge(id: &str, from: usize, to: usize, length: f64) -> Edge {
    Edge { id: id.to_string(), from, to, length }
}

fn lead_count(p: f64) -> Result<u32> {
    if p >= 0.0 && p.fract() == 0.0 && p <= u32::MAX as f64 {
        Ok(p as u32)
    } else {
        Err(Error::InvalidParameter(format!("lead count must be a nonnegative integer, got {p}")))
    }
}

/// Centre `c` with `n` leads and one pendant edge per length.
fn star(lengths: &[f64], n: u32) -> Result<MetricGraph> {
    let mut vertices = vec!["c".to_string()];
    let mut edges = Vec::new();
    for (i, &l) in lengths.iter().enumerate() {
        vertices.push(format!("v{}", i + 1));
        edges.push(edge(&format!("e{}", i + 1), 0, i + 1, l));
    }
    let mut leads = vec![0; vertices.len()];
    leads[0] = n;
    MetricGraph::new(vertices, edges, leads)
}

/// GP(n, k): outer cycle, spokes, inner star polygon.
fn generalized_petersen(n: usize, k: usize) -> (usize, Vec<(usize, usize)>) {
    let mut pairs = Vec::with_capacity(3 * n);
    for i in 0..n {
        pairs.push((i, (i + 1) % n));
    }
    for i in 0..n {
        pairs.push((i, n + i));
    }
    for i in 0..n {
        let j = (i + k) % n;
        if k * 2 == n && j < i {
            continue;
        }
        pairs.push((n + i, n + j));
    }
    (2 * n, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{compute_invariants, Count, GraphType};

    #[test]
    fn named_graph_sizes() {
        for (name, v, e) in [
            ("tetrahedron", 4, 6),
            ("cube", 8, 12),
            ("petersen", 10, 15),
            ("dodecahedron", 20, 30),
        ] {
            let g = catalog(name, &[], None).unwrap();
            assert_eq!((g.vertices().len(), g.num_edges()), (v, e), "{name}");
            assert!((0..v).all(|x| g.edge_degree(x) == 3), "{name} is cubic");
        }
    }

    #[test]
    fn circular_one_one_with_lengths() {
        let g = catalog("circular", &[1.0, 1.0], Some(&[2.0, 3.0])).unwrap();
        assert_eq!(g.vertices().len(), 2);
        assert_eq!(g.lead_counts(), &[1, 1]);
        assert_eq!(g.lengths(), vec![2.0, 3.0]);
    }

    #[test]
    fn y_graph_shape() {
        let g = catalog("Y", &[1.0, 2.0f64.sqrt()], None).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.lead_counts(), &[1, 0, 0]);
        assert_eq!(g.degree(1), 1);
    }

    #[test]
    fn leads_only_star() {
        let g = catalog("star", &[4.0], None).unwrap();
        assert_eq!(g.num_edges(), 0);
        assert_eq!(g.num_leads(), 4);
    }

    #[test]
    fn catalog_types() {
        let cyclic = [("circular", vec![1.0]), ("tetrahedron", vec![]), ("cube", vec![]),
            ("petersen", vec![]), ("dodecahedron", vec![])];
        for (name, p) in cyclic {
            let i = compute_invariants(&catalog(name, &p, None).unwrap());
            assert_eq!(i.graph_type, GraphType::TypeII, "{name}");
        }
        for (name, p) in [("star", vec![1.0, 3.0]), ("interval_Gnn", vec![1.0, 2.0, 3.0])] {
            let i = compute_invariants(&catalog(name, &p, None).unwrap());
            assert_eq!(i.graph_type, GraphType::TypeI, "{name}");
        }
        let i = compute_invariants(&catalog("petersen", &[], None).unwrap());
        assert_eq!(i.g, Count::Finite(5));
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(catalog("moebius", &[], None), Err(Error::UnknownCatalog(_))));
        assert!(matches!(catalog("Y", &[1.0], None), Err(Error::CatalogArity { .. })));
        assert!(matches!(catalog("interval_Gnn", &[1.0, 2.0], None), Err(Error::CatalogArity { .. })));
        assert!(matches!(catalog("star", &[1.0, 2.5], None), Err(Error::InvalidParameter(_))));
        assert!(matches!(catalog("Y", &[1.0, -2.0], None), Err(Error::NonPositiveLength { .. })));
    }
}
