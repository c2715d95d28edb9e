//! Resonance branches of two-edge graphs near real torus zeros.
//!
//! With α = σ l and β = σ L, a resonance close to the axis sits at a point
//! (α₀ + u, β₀ + b(u)) of the real torus where the secular polynomial vanishes
//! after both coordinates are damped by e^{-τ l_e}. Tracing (b(u), τ(u)) from a
//! real zero gives the local shape of the resonance-producing curve, and the
//! straight-line flow σ ↦ σ(l, L) crosses it at a rate fixed by the
//! flow-invariant measure.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use super::compact::vanishing_eigenfunction_test;
use super::polyfit;
use crate::error::{Error, Result};
use crate::finder::Resonance;
use crate::graph::MetricGraph;
use crate::poly::{symbolic_secular, Poly};

/// Wrap into (-π, π].
fn wrap_pm(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI { y - TAU } else { y }
}

/// Wrap into (0, 2π].
fn wrap_pos(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y == 0.0 { TAU } else { y }
}

// Solves [[a, b], [c, d]] x = r.
fn solve2(a: f64, b: f64, c: f64, d: f64, r: [f64; 2]) -> Option<[f64; 2]> {
    let det = a * d - b * c;
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if det.abs() <= 1e-14 * scale * scale || !det.is_finite() {
        return None;
    }
    Some([(r[0] * d - b * r[1]) / det, (a * r[1] - c * r[0]) / det])
}

struct TorusPoly {
    p: Poly,
    pz: Poly,
    pw: Poly,
    scale: f64,
}

impl TorusPoly {
    fn new(p: Poly) -> Self {
        let scale = p.eval(&[Complex64::from(1.0), Complex64::from(1.0)]).norm().max(1.0);
        let scale = scale.max(p.terms().len() as f64);
        TorusPoly { pz: p.partial(0), pw: p.partial(1), p, scale }
    }

    fn eval(&self, z: Complex64, w: Complex64) -> (Complex64, Complex64, Complex64) {
        let x = [z, w];
        (self.p.eval(&x), self.pz.eval(&x), self.pw.eval(&x))
    }
}

/// Isolated zeros (α, β) ∈ [0, 2π)² of a two-variable polynomial on the real torus.
pub fn torus_zeros_2d(p: &Poly, grid: usize) -> Vec<[f64; 2]> {
    assert_eq!(p.nvars(), 2);
    let tp = TorusPoly::new(p.clone());
    let n = grid.max(8);
    let h = TAU / n as f64;
    let val: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| tp.p.eval(&[Complex64::from_polar(1.0, i as f64 * h), Complex64::from_polar(1.0, j as f64 * h)]).norm())
                .collect()
        })
        .collect();
    let mut found: Vec<[f64; 2]> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = val[i][j];
            let is_min = (-1i64..=1).all(|di| {
                (-1i64..=1).all(|dj| {
                    let (a, b) = ((i as i64 + di).rem_euclid(n as i64) as usize, (j as i64 + dj).rem_euclid(n as i64) as usize);
                    (di == 0 && dj == 0) || val[a][b] >= v
                })
            });
            if !is_min {
                continue;
            }
            let (mut al, mut be) = (i as f64 * h, j as f64 * h);
            let mut ok = false;
            for _ in 0..60 {
                let (z, w) = (Complex64::from_polar(1.0, al), Complex64::from_polar(1.0, be));
                let (f, fz, fw) = tp.eval(z, w);
                if f.norm() < 1e-13 * tp.scale {
                    ok = true;
                    break;
                }
                let (fa, fb) = (Complex64::i() * z * fz, Complex64::i() * w * fw);
                let Some([da, db]) = solve2(fa.re, fb.re, fa.im, fb.im, [-f.re, -f.im]) else { break };
                al += da;
                be += db;
                if da.hypot(db) < 1e-15 {
                    let f = tp.p.eval(&[Complex64::from_polar(1.0, al), Complex64::from_polar(1.0, be)]);
                    ok = f.norm() < 1e-11 * tp.scale;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let pt = [al.rem_euclid(TAU), be.rem_euclid(TAU)];
            let dup = found.iter().any(|q| wrap_pm(q[0] - pt[0]).hypot(wrap_pm(q[1] - pt[1])) < 1e-8);
            if !dup {
                found.push(pt);
            }
        }
    }
    found.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    found
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchSample {
    pub u: f64,
    pub b: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchTrace {
    /// Base point (α₀, β₀) on the torus.
    pub base: [f64; 2],
    pub lengths: [f64; 2],
    /// Sorted by u.
    pub samples: Vec<BranchSample>,
    /// τ ≈ -c u² from a polynomial fit on |u| <= 0.05.
    pub c: f64,
    /// Linear coefficient of the same fit.
    pub fitted_slope: f64,
    /// dτ/du at u = 0 by implicit differentiation.
    pub tangent_slope: f64,
    /// db/du at u = 0.
    pub db_du: f64,
    /// |a_e|² + |b_e|² of the eigenfunction vanishing on V₀.
    pub weights: [f64; 2],
    /// |m_1 + m_2 db/du| / (m_1 + m_2).
    pub tangent_residual: f64,
}

/// u-values from -u_max to u_max in steps of `step` (u = 0 included).
pub fn default_u_grid(u_max: f64, step: f64) -> Vec<f64> {
    let n = (u_max / step).round() as i64;
    (-n..=n).map(|i| i as f64 * step).collect()
}

/// Traces τ(u) from a real torus zero of a two-edge graph.
pub fn branch_trace(g: &MetricGraph, base: [f64; 2], u_grid: &[f64]) -> Result<BranchTrace> {
    if g.num_edges() != 2 {
        return Err(Error::Unsupported(format!("branch tracing needs exactly 2 edges, graph has {}", g.num_edges())));
    }
    let tp = TorusPoly::new(symbolic_secular(g)?.poly);
    let (z0, w0) = (Complex64::from_polar(1.0, base[0]), Complex64::from_polar(1.0, base[1]));
    if tp.p.eval(&[z0, w0]).norm() > 1e-9 * tp.scale {
        return Err(Error::InvalidParameter(format!("({}, {}) is not a zero of the secular polynomial", base[0], base[1])));
    }
    let at_base = g.with_lengths(&[wrap_pos(base[0]), wrap_pos(base[1])])?;
    let vt = vanishing_eigenfunction_test(&at_base, 1.0)?;
    let Some(witness) = vt.witness else {
        return Err(Error::InvalidParameter("base point has no eigenfunction vanishing on the lead vertices".into()));
    };
    let weights = [witness.weights[0], witness.weights[1]];
    let lens = g.lengths();
    let (l, big_l) = (lens[0], lens[1]);
    let i = Complex64::i();

    let (_, fz, fw) = tp.eval(z0, w0);
    let (jb, jt, ju) = (i * w0 * fw, -(l * z0 * fz + big_l * w0 * fw), i * z0 * fz);
    let [db_du, tangent_slope] = solve2(jb.re, jt.re, jb.im, jt.im, [-ju.re, -ju.im])
        .ok_or_else(|| Error::Divergence("singular tangent system at the base point".into()))?;

    let newton = |u: f64, guess: [f64; 2]| -> Result<[f64; 2]> {
        let [mut b, mut tau] = guess;
        for _ in 0..60 {
            let z = Complex64::from_polar((-tau * l).exp(), base[0] + u);
            let w = Complex64::from_polar((-tau * big_l).exp(), base[1] + b);
            let (f, fz, fw) = tp.eval(z, w);
            let (jb, jt) = (i * w * fw, -(l * z * fz + big_l * w * fw));
            let [db, dt] = solve2(jb.re, jt.re, jb.im, jt.im, [-f.re, -f.im])
                .ok_or_else(|| Error::Divergence(format!("singular Jacobian at u = {u}")))?;
            b += db;
            tau += dt;
            if db.hypot(dt) < 1e-15 * (1.0 + b.abs()) || f.norm() < 1e-15 * tp.scale {
                return Ok([b, tau]);
            }
        }
        Err(Error::Divergence(format!("no convergence at u = {u}")))
    };

    let mut grid: Vec<f64> = u_grid.iter().copied().filter(|u| u.is_finite()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut samples = vec![BranchSample { u: 0.0, b: 0.0, tau: 0.0 }];
    for side in [1.0, -1.0] {
        let mut path: Vec<f64> = grid.iter().copied().filter(|&u| u * side > 0.0).collect();
        if side < 0.0 {
            path.reverse();
        }
        let mut prev: Vec<BranchSample> = vec![samples[0]];
        for u in path {
            let guess = match prev.as_slice() {
                [.., p, q] => {
                    let t = (u - q.u) / (q.u - p.u);
                    [q.b + t * (q.b - p.b), q.tau + t * (q.tau - p.tau)]
                }
                _ => [db_du * u, 0.0],
            };
            let [b, tau] = newton(u, guess)?;
            let s = BranchSample { u, b, tau };
            prev.push(s);
            samples.push(s);
        }
    }
    samples.sort_by(|a, b| a.u.total_cmp(&b.u));

    let window = 0.05;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        samples.iter().filter(|s| s.u.abs() <= window).map(|s| (s.u / window, s.tau)).unzip();
    let degree = 6.min(xs.len().saturating_sub(1));
    let (c, fitted_slope) = if degree >= 2 {
        let co = polyfit(&xs, &ys, degree).ok_or_else(|| Error::Divergence("branch fit failed".into()))?;
        (-co[2] / (window * window), co[1] / window)
    } else {
        (f64::NAN, f64::NAN)
    };
    let tangent_residual = (weights[0] + weights[1] * db_du).abs() / (weights[0] + weights[1]);
    Ok(BranchTrace {
        base,
        lengths: [l, big_l],
        samples,
        c,
        fitted_slope,
        tangent_slope,
        db_du,
        weights,
        tangent_residual,
    })
}

/// Predicted N̂(ε): crossings per unit σ of the flow σ(l, L) with the traced
/// branches restricted to τ >= -ε, i.e. (1/4π²) Σ ∫ |l dβ - L dα|.
pub fn barra_gaspard_density(traces: &[BranchTrace], eps: f64) -> Result<f64> {
    let mut total = 0.0;
    for tr in traces {
        let s = &tr.samples;
        let reaches = |x: Option<&BranchSample>| x.is_some_and(|x| x.tau < -eps);
        if !reaches(s.first()) || !reaches(s.last()) {
            return Err(Error::InvalidParameter(format!("branch trace does not reach depth {eps}; extend the u grid")));
        }
        let [l, big_l] = tr.lengths;
        for w in s.windows(2) {
            let (p, q) = (w[0], w[1]);
            let weight = (l * (q.b - p.b) - big_l * (q.u - p.u)).abs();
            let (inp, inq) = (p.tau >= -eps, q.tau >= -eps);
            let frac = match (inp, inq) {
                (true, true) => 1.0,
                (false, false) => 0.0,
                _ => {
                    let t = (-eps - p.tau) / (q.tau - p.tau);
                    if inp { t } else { 1.0 - t }
                }
            };
            total += frac * weight;
        }
    }
    Ok(total / (4.0 * PI * PI))
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchFit {
    /// τ ≈ -c u² fitted to resonances.
    pub c: f64,
    pub count: usize,
    /// (u, τ) of the resonances used.
    pub points: Vec<(f64, f64)>,
}

/// Fits τ against the torus offset u of resonances near the given base points,
/// independent of any branch parametrisation.
pub fn direct_branch_fit(resonances: &[Resonance], lengths: [f64; 2], bases: &[[f64; 2]], u_max: f64) -> Option<BranchFit> {
    let mut points = Vec::new();
    for r in resonances {
        let (al, be) = (r.k.re * lengths[0], r.k.re * lengths[1]);
        let nearest = bases
            .iter()
            .map(|b| (wrap_pm(al - b[0]), wrap_pm(be - b[1])))
            .min_by(|x, y| x.0.hypot(x.1).total_cmp(&y.0.hypot(y.1)))?;
        if nearest.0.abs() <= u_max && nearest.1.abs() <= 2.0 * u_max + 0.01 {
            points.push((nearest.0, r.k.im));
        }
    }
    if points.len() < 8 {
        return None;
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(u, t)| (u / u_max, t)).unzip();
    let co = polyfit(&xs, &ys, 4)?;
    Some(BranchFit { c: -co[2] / (u_max * u_max), count: points.len(), points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::catalog;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn y_graph_torus_zeros_are_all_sign_pairs() {
        let g = catalog("Y", &[1.0, 2.0], None).unwrap();
        let p = symbolic_secular(&g).unwrap().poly;
        let z = torus_zeros_2d(&p, 64);
        let want = [[1.0, 1.0], [1.0, 3.0], [3.0, 1.0], [3.0, 3.0]];
        assert_eq!(z.len(), 4, "{z:?}");
        for (got, w) in z.iter().zip(want) {
            assert!((got[0] - w[0] * FRAC_PI_2).abs() < 1e-10 && (got[1] - w[1] * FRAC_PI_2).abs() < 1e-10);
        }
    }

    #[test]
    fn c11_torus_zeros() {
        let g = catalog("circular", &[1.0, 1.0], None).unwrap();
        let z = torus_zeros_2d(&symbolic_secular(&g).unwrap().poly, 64);
        assert_eq!(z.len(), 2, "{z:?}");
        assert!(z[0][0].abs() < 1e-10 && z[0][1].abs() < 1e-10);
        assert!((z[1][0] - PI).abs() < 1e-10 && (z[1][1] - PI).abs() < 1e-10);
    }

    #[test]
    fn symmetric_y_branch_is_flat_with_equal_weights() {
        let g = catalog("Y", &[1.0, 1.0], None).unwrap();
        let tr = branch_trace(&g, [FRAC_PI_2, FRAC_PI_2], &default_u_grid(0.1, 0.002)).unwrap();
        assert!(tr.tangent_slope.abs() < 1e-12);
        assert!(tr.fitted_slope.abs() < 1e-6, "{}", tr.fitted_slope);
        assert!((tr.weights[0] - tr.weights[1]).abs() < 1e-8);
        assert!((tr.db_du + 1.0).abs() < 1e-10 && tr.tangent_residual < 1e-8);
        assert!(tr.samples.iter().all(|s| s.tau <= 1e-15));
        // Second-order expansion of z²w² - z² - w² = 3 gives c = 1/(l + L).
        assert!((tr.c - 0.5).abs() < 1e-3, "{}", tr.c);
    }

    #[test]
    fn rejects_points_off_the_zero_set() {
        let g = catalog("Y", &[1.0, 2.0], None).unwrap();
        assert!(branch_trace(&g, [1.0, 1.0], &[0.01]).is_err());
        let star = catalog("star", &[1.0, 3.0], None).unwrap();
        assert!(matches!(branch_trace(&star, [0.0, 0.0], &[0.01]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn flow_density_of_a_straight_branch() {
        // A branch along dα + dβ = 0 with τ = -u² over |u| <= 1.
        let samples: Vec<BranchSample> =
            default_u_grid(1.0, 0.001).into_iter().map(|u| BranchSample { u, b: -u, tau: -u * u }).collect();
        let tr = BranchTrace {
            base: [0.0, 0.0],
            lengths: [1.0, 2.0],
            samples,
            c: 1.0,
            fitted_slope: 0.0,
            tangent_slope: 0.0,
            db_du: -1.0,
            weights: [1.0, 1.0],
            tangent_residual: 0.0,
        };
        let got = barra_gaspard_density(&[tr], 0.25).unwrap();
        // |u| <= 1/2, |l db - L du| = 3 du.
        assert!((got - 3.0 / (4.0 * PI * PI)).abs() < 1e-6);
    }
}
