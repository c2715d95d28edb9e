use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use qgraph::analysis::{branch_trace, default_u_grid, direct_branch_fit, torus_zeros_2d};
use qgraph::finder::{count_zeros, find_resonances, FinderConfig, SearchRegion};
use qgraph::poly::symbolic_secular;
use qgraph::{catalog, SecularFunction};

fn star(n: f64) -> SecularFunction {
    SecularFunction::from_graph(&catalog("star", &[1.0, n], None).unwrap(), true)
}

#[test]
fn star_window_is_complete_and_mirrored() {
    let sf = star(3.0);
    let cfg = FinderConfig::default();
    let right = find_resonances(&sf, &SearchRegion::new(0.0, 30.0, -1.0, 1e-6).unwrap(), &cfg).unwrap();
    let left = find_resonances(&sf, &SearchRegion::new(-30.0, 0.0, -1.0, 1e-6).unwrap(), &cfg).unwrap();
    assert_eq!(right.resonances.len(), 10);
    assert_eq!(left.resonances.len(), right.resonances.len());
    for (l, r) in left.resonances.iter().rev().zip(&right.resonances) {
        assert!((l.k + r.k.conj()).norm() < 1e-10, "{} vs {}", l.k, r.k);
    }
}

#[test]
fn parallel_and_sequential_agree() {
    let sf = SecularFunction::from_graph(&catalog("tetrahedron", &[1.0, 1.0], None).unwrap(), true);
    let region = SearchRegion::new(0.5, 8.0, -1.5, 1e-6).unwrap();
    let par = find_resonances(&sf, &region, &FinderConfig::default()).unwrap();
    let seq = find_resonances(&sf, &region, &FinderConfig { parallel: false, ..Default::default() }).unwrap();
    assert!(par.is_consistent());
    let ks = |r: &qgraph::FinderReport| r.resonances.iter().map(|x| (x.k.re.to_bits(), x.k.im.to_bits(), x.multiplicity)).collect::<Vec<_>>();
    assert_eq!(ks(&par), ks(&seq));
    assert_eq!(par.total_winding, count_zeros(&sf, &region, &FinderConfig::default()).unwrap());
}

#[test]
fn boundary_through_a_root_is_jittered() {
    // σ = π/2 is a resonance of the star; put a tile edge through it.
    let sf = star(3.0);
    let cfg = FinderConfig { tile_width: FRAC_PI_4, ..Default::default() };
    let region = SearchRegion::new(FRAC_PI_4, 3.0 * FRAC_PI_4, -1.0, 1e-6).unwrap();
    let rep = find_resonances(&sf, &region, &cfg).unwrap();
    assert!(rep.stats.jitters > 0);
    assert_eq!(rep.resonances.len(), 1);
    assert!((rep.resonances[0].k.re - FRAC_PI_2).abs() < 1e-10);
}

#[test]
fn every_resonance_has_small_residual_and_state() {
    let g = catalog("cube", &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0], None).unwrap();
    let sf = SecularFunction::from_graph(&g, true);
    let rep = find_resonances(&sf, &SearchRegion::new(0.5, 6.0, -2.0, 1e-6).unwrap(), &FinderConfig::default()).unwrap();
    assert!(rep.is_consistent());
    assert!(!rep.resonances.is_empty());
    for r in &rep.resonances {
        assert!(!r.degraded);
        if r.multiplicity == 1 {
            let st = r.state.as_ref().expect("state for simple root");
            assert!(st.sigma_min < 1e-8);
        }
    }
}

// The rational Y-graph (1, 2) has a periodic flow, so the direct fit of τ
// against the torus offset uses slightly irrational lengths; c depends
// continuously on the lengths.
#[test]
fn rational_y_branch_constant_matches_direct_fit() {
    let g = catalog("Y", &[1.0, 2.0], None).unwrap();
    let bases = torus_zeros_2d(&symbolic_secular(&g).unwrap().poly, 64);
    let tr = branch_trace(&g, bases[0], &default_u_grid(0.1, 1e-3)).unwrap();
    assert!(tr.c > 0.0);
    assert!((tr.c - 1.0 / 3.0).abs() < 1e-6, "{}", tr.c);
    let lengths = [1.0, 2.0 + 1e-3 * 5f64.sqrt()];
    let sf = SecularFunction::from_graph(&catalog("Y", &lengths, None).unwrap(), true);
    let cfg = FinderConfig { extract_states: false, ..Default::default() };
    let rep = find_resonances(&sf, &SearchRegion::new(0.0, 3000.0, -0.02, 1e-6).unwrap(), &cfg).unwrap();
    let fit = direct_branch_fit(&rep.resonances, lengths, &bases, 0.05).unwrap();
    assert!((fit.c - tr.c).abs() < 0.05 * tr.c, "direct {} ({} points) vs trace {}", fit.c, fit.count, tr.c);
}

#[test]
fn compact_circle_double_root() {
    let g = catalog("circular", &[1.0], Some(&[2.0 * PI])).unwrap();
    let sf = SecularFunction::from_graph(&g, false);
    let rep = find_resonances(&sf, &SearchRegion::new(0.5, 3.5, -1e-6, 1e-6).unwrap(), &FinderConfig::default()).unwrap();
    let ks: Vec<(Complex64, u32)> = rep.resonances.iter().map(|r| (r.k, r.multiplicity)).collect();
    assert_eq!(ks.len(), 3);
    assert!(ks.iter().all(|(_, m)| *m == 2));
}
