use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::finder::{find_resonances, FinderConfig, SearchRegion};
use crate::graph::MetricGraph;
use crate::scattering::{phases, BondScattering, SecularFunction};

/// Real eigenvalues of the graph without leads in (k_floor, k_max], with
/// multiplicities from winding counts.
pub fn compact_eigenvalues(g: &MetricGraph, k_max: f64, cfg: &FinderConfig) -> Result<Vec<(f64, u32)>> {
    if !(k_max > cfg.k_floor) {
        return Err(Error::InvalidParameter(format!("k_max must exceed {}", cfg.k_floor)));
    }
    let sf = SecularFunction::from_graph(g, false);
    let cfg = FinderConfig { tau_cap: cfg.tau_cap.max(1e-6), extract_states: false, ..cfg.clone() };
    let region = SearchRegion::new(cfg.k_floor, k_max, -1e-6, 1e-6)?;
    let rep = find_resonances(&sf, &region, &cfg)?;
    Ok(rep.resonances.iter().map(|r| (r.k.re, r.multiplicity)).collect())
}

#[derive(Debug, Clone)]
pub struct Witness {
    /// Amplitudes in the bond convention (b referenced at the `to` end), unit norm.
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    /// |a_e|² + |b_e|² per edge.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct VanishingTest {
    pub eigen_dim: usize,
    pub vanishing_dim: usize,
    pub witness: Option<Witness>,
}

// Orthonormal basis of the numerical null space of `m` (columns).
fn null_space(m: &DMatrix<Complex64>, rel_tol: f64, abs_floor: f64) -> DMatrix<Complex64> {
    let cols = m.ncols();
    let rows = m.nrows().max(cols);
    // Zero padding so the thin SVD carries a full right basis.
    let padded = DMatrix::from_fn(rows, cols, |i, j| if i < m.nrows() { m[(i, j)] } else { Complex64::default() });
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let s_max = svd.singular_values.max();
    let tol = (rel_tol * s_max).max(abs_floor);
    let idx: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] < tol).collect();
    DMatrix::from_fn(cols, idx.len(), |r, c| v_t[(idx[c], r)].conj())
}

/// Eigenspace of the compact graph at real `k` and its subspace vanishing on V₀.
pub fn vanishing_eigenfunction_test(g: &MetricGraph, k: f64) -> Result<VanishingTest> {
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::InvalidParameter(format!("k must be positive and finite, got {k}")));
    }
    let bs = BondScattering::build(g, false);
    let n = bs.num_edges();
    let sf = SecularFunction::new(bs, g.lengths());
    let m = sf.matrix(Complex64::new(k, 0.0));
    let basis = null_space(&m, 1e-8, 0.0);
    let eigen_dim = basis.ncols();
    if eigen_dim == 0 {
        return Ok(VanishingTest { eigen_dim: 0, vanishing_dim: 0, witness: None });
    }
    let d = phases(&g.lengths(), Complex64::new(k, 0.0));
    let v0 = g.lead_vertices();
    let mut c = DMatrix::<Complex64>::zeros(v0.len(), 2 * n);
    for (row, &v) in v0.iter().enumerate() {
        let Some(e) = g.edges().iter().position(|e| e.from == v || e.to == v) else {
            continue;
        };
        // u = a e^{ikx} + b e^{ik(l-x)} on [0, l].
        if g.edges()[e].from == v {
            c[(row, e)] = Complex64::from(1.0);
            c[(row, e + n)] = d[e];
        } else {
            c[(row, e)] = d[e];
            c[(row, e + n)] = Complex64::from(1.0);
        }
    }
    let reduced = null_space(&(&c * &basis), 1e-8, 1e-8);
    let vanishing_dim = reduced.ncols();
    let witness = (vanishing_dim > 0).then(|| {
        let mut x: DVector<Complex64> = &basis * reduced.column(0);
        x /= Complex64::from(x.norm());
        // Fix the phase: largest component real and positive.
        let (imax, _) = x.iter().enumerate().fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 + 1e-12 { (i, z.norm()) } else { acc });
        let phase = x[imax] / x[imax].norm();
        x /= phase;
        let a: Vec<Complex64> = x.rows(0, n).iter().copied().collect();
        let b: Vec<Complex64> = x.rows(n, n).iter().copied().collect();
        let weights = a.iter().zip(&b).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect();
        Witness { a, b, weights }
    });
    Ok(VanishingTest { eigen_dim, vanishing_dim, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::catalog;
    use std::f64::consts::PI;

    #[test]
    fn circle_and_interval_spectra() {
        let circle = catalog("circular", &[1.0], Some(&[2.0 * PI])).unwrap();
        let ev = compact_eigenvalues(&circle, 2.0, &FinderConfig::default()).unwrap();
        assert_eq!(ev.len(), 2);
        for (j, (k, m)) in ev.iter().enumerate() {
            assert!((k - (j + 1) as f64).abs() < 1e-10 && *m == 2, "{ev:?}");
        }
        let interval = catalog("interval_Gnn", &[PI, 1.0, 1.0], None).unwrap();
        let ev = compact_eigenvalues(&interval, 3.5, &FinderConfig::default()).unwrap();
        let ks: Vec<f64> = ev.iter().map(|e| e.0).collect();
        assert_eq!(ks.len(), 3, "{ev:?}");
        for (j, k) in ks.iter().enumerate() {
            assert!((k - (j + 1) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn commensurate_c11_has_vanishing_sine() {
        let g = catalog("circular", &[1.0, 1.0], Some(&[2.0 * PI, 2.0 * PI])).unwrap();
        let t = vanishing_eigenfunction_test(&g, 1.0).unwrap();
        assert_eq!((t.eigen_dim, t.vanishing_dim), (2, 1));
        let w = t.witness.unwrap();
        assert!((w.weights[0] - w.weights[1]).abs() < 1e-10);
        let g = catalog("circular", &[1.0, 1.0], Some(&[PI, PI])).unwrap();
        assert_eq!(vanishing_eigenfunction_test(&g, 1.0).unwrap().vanishing_dim, 1);
    }

    #[test]
    fn incommensurate_c11_has_no_vanishing_eigenfunction() {
        let g = catalog("circular", &[1.0, 1.0], Some(&[2.0 * PI, 2.0 * PI * 2f64.sqrt()])).unwrap();
        let t = vanishing_eigenfunction_test(&g, 1.0).unwrap();
        assert_eq!(t.vanishing_dim, 0);
        assert!(t.witness.is_none());
    }
}
