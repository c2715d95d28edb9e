//! Kirchhoff bond scattering and the secular function f(k) = det(I - U D(k)).
//!
//! Directed bonds are numbered edge-by-edge in input order, all forward
//! (`from -> to`) bonds first, then all backward bonds. On bond `j` the wave
//! amplitude is referenced at the bond's tail, so an amplitude arriving at the
//! head has picked up the phase `exp(i k l_j)`; with this convention all the
//! k-dependence sits in the diagonal matrix D(k) and U, R, T_o, T_i are
//! constant, real, rational matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::graph::MetricGraph;

/// `numerator / denominator` with a positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coefficient {
    pub num: i64,
    pub den: i64,
}

impl Coefficient {
    const ZERO: Coefficient = Coefficient { num: 0, den: 1 };

    /// Kirchhoff vertex scattering entry `2/deg - δ`.
    fn kirchhoff(degree: usize, reflect: bool) -> Self {
        let d = degree as i64;
        Coefficient { num: if reflect { 2 - d } else { 2 }, den: d }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// The constant blocks of the (N + 2n) scattering matrix
/// `S(k) = [[R, T_o D(k)], [T_i, U D(k)]]`.
#[derive(Debug, Clone)]
pub struct BondScattering {
    n_edges: usize,
    n_leads: usize,
    bond_tail: Vec<usize>,
    bond_head: Vec<usize>,
    lead_vertex: Vec<usize>,
    u_exact: Vec<Coefficient>,
    pub u: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub t_o: DMatrix<f64>,
    pub t_i: DMatrix<f64>,
}

impl BondScattering {
    /// Assemble the Kirchhoff blocks. With `include_leads == false` the leads
    /// are dropped (compact graph Γ) and vertex degrees count edges only.
    pub fn build(g: &MetricGraph, include_leads: bool) -> Self {
        let n = g.num_edges();
        let nb = 2 * n;
        let mut bond_tail = vec![0; nb];
        let mut bond_head = vec![0; nb];
        for (i, e) in g.edges().iter().enumerate() {
            bond_tail[i] = e.from;
            bond_head[i] = e.to;
            bond_tail[n + i] = e.to;
            bond_head[n + i] = e.from;
        }
        let leads: Vec<u32> =
            if include_leads { g.lead_counts().to_vec() } else { vec![0; g.vertices().len()] };
        let degree: Vec<usize> =
            (0..leads.len()).map(|v| g.edge_degree(v) + leads[v] as usize).collect();
        let lead_vertex: Vec<usize> =
            leads.iter().enumerate().flat_map(|(v, &c)| std::iter::repeat_n(v, c as usize)).collect();
        let nl = lead_vertex.len();

        let reverse = |j: usize| if j < n { j + n } else { j - n };
        let mut u_exact = vec![Coefficient::ZERO; nb * nb];
        for out in 0..nb {
            for inc in 0..nb {
                let v = bond_head[inc];
                if bond_tail[out] == v {
                    u_exact[out * nb + inc] = Coefficient::kirchhoff(degree[v], out == reverse(inc));
                }
            }
        }
        let u = DMatrix::from_fn(nb, nb, |i, j| u_exact[i * nb + j].to_f64());
        let r = DMatrix::from_fn(nl, nl, |a, b| {
            if lead_vertex[a] == lead_vertex[b] {
                Coefficient::kirchhoff(degree[lead_vertex[a]], a == b).to_f64()
            } else {
                0.0
            }
        });
        let t_o = DMatrix::from_fn(nl, nb, |m, j| {
            let v = lead_vertex[m];
            if bond_head[j] == v { 2.0 / degree[v] as f64 } else { 0.0 }
        });
        let t_i = DMatrix::from_fn(nb, nl, |j, m| {
            let v = lead_vertex[m];
            if bond_tail[j] == v { 2.0 / degree[v] as f64 } else { 0.0 }
        });
        BondScattering { n_edges: n, n_leads: nl, bond_tail, bond_head, lead_vertex, u_exact, u, r, t_o, t_i }
    }

    pub fn num_edges(&self) -> usize {
        self.n_edges
    }

    pub fn num_bonds(&self) -> usize {
        2 * self.n_edges
    }

    pub fn num_leads(&self) -> usize {
        self.n_leads
    }

    /// Exact entry U[out, inc].
    pub fn u_coefficient(&self, out: usize, inc: usize) -> Coefficient {
        self.u_exact[out * self.num_bonds() + inc]
    }

    /// Edge index of a bond.
    pub fn bond_edge(&self, j: usize) -> usize {
        j % self.n_edges.max(1)
    }

    pub fn bond_tail(&self, j: usize) -> usize {
        self.bond_tail[j]
    }

    pub fn bond_head(&self, j: usize) -> usize {
        self.bond_head[j]
    }

    pub fn lead_vertex(&self, m: usize) -> usize {
        self.lead_vertex[m]
    }

    /// Full scattering matrix at wavenumber `k`.
    pub fn s_matrix(&self, lengths: &[f64], k: Complex64) -> DMatrix<Complex64> {
        let nb = self.num_bonds();
        let nl = self.n_leads;
        let d = phases(lengths, k);
        let mut s = DMatrix::zeros(nl + nb, nl + nb);
        for a in 0..nl {
            for b in 0..nl {
                s[(a, b)] = Complex64::from(self.r[(a, b)]);
            }
            for j in 0..nb {
                s[(a, nl + j)] = self.t_o[(a, j)] * d[j];
            }
        }
        for i in 0..nb {
            for b in 0..nl {
                s[(nl + i, b)] = Complex64::from(self.t_i[(i, b)]);
            }
            for j in 0..nb {
                s[(nl + i, nl + j)] = self.u[(i, j)] * d[j];
            }
        }
        s
    }
}

/// Max-norm of `S S* - I`; zero up to rounding for real `k`.
pub fn unitary_defect(bs: &BondScattering, lengths: &[f64], k: f64) -> f64 {
    unitary_defect_at(bs, lengths, Complex64::new(k, 0.0))
}

/// Same as [`unitary_defect`] at complex `k`, where unitarity is lost.
pub fn unitary_defect_at(bs: &BondScattering, lengths: &[f64], k: Complex64) -> f64 {
    let s = bs.s_matrix(lengths, k);
    let p = &s * s.adjoint();
    let n = p.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

/// `exp(i k l_e)` doubled over both bond directions.
pub fn phases(lengths: &[f64], k: Complex64) -> Vec<Complex64> {
    let one: Vec<Complex64> = lengths.iter().map(|&l| (Complex64::i() * k * l).exp()).collect();
    one.iter().chain(one.iter()).copied().collect()
}

/// A complex number stored as `mantissa · 2^exp2` so determinants deep in the
/// lower half-plane do not overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub exp2: i64,
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex { mantissa: Complex64::new(0.0, 0.0), exp2: 0 };
    pub const ONE: ScaledComplex = ScaledComplex { mantissa: Complex64::new(1.0, 0.0), exp2: 0 };

    pub fn new(mantissa: Complex64, exp2: i64) -> Self {
        ScaledComplex { mantissa, exp2 }.normalized()
    }

    fn normalized(self) -> Self {
        let m = self.mantissa.re.abs().max(self.mantissa.im.abs());
        if m == 0.0 || !m.is_finite() {
            return self;
        }
        let e = m.log2().floor() as i64 + 1;
        ScaledComplex { mantissa: self.mantissa * 2f64.powi(-e as i32), exp2: self.exp2 + e }
    }

    pub fn mul(self, other: ScaledComplex) -> Self {
        ScaledComplex { mantissa: self.mantissa * other.mantissa, exp2: self.exp2 + other.exp2 }
            .normalized()
    }

    pub fn scale(self, c: Complex64) -> Self {
        ScaledComplex { mantissa: self.mantissa * c, exp2: self.exp2 }.normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    /// Plain complex value; may overflow to infinity or underflow to zero.
    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let e = self.exp2.clamp(-2000, 2000) as i32;
        // Split the power so intermediate factors stay finite.
        self.mantissa * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
    }

    pub fn abs(self) -> f64 {
        self.to_complex().norm()
    }

    pub fn log2_abs(self) -> f64 {
        self.mantissa.norm().log2() + self.exp2 as f64
    }

    /// Principal argument.
    pub fn arg(self) -> f64 {
        self.mantissa.arg()
    }

    /// `self / other` as a plain complex number.
    pub fn ratio(self, other: ScaledComplex) -> Complex64 {
        let e = (self.exp2 - other.exp2).clamp(-2000, 2000) as i32;
        self.mantissa / other.mantissa * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
    }
}

/// Result of evaluating the secular function at one `k`.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub value: ScaledComplex,
    pub derivative: ScaledComplex,
    /// f'/f; `None` when M(k) is exactly singular.
    pub log_derivative: Option<Complex64>,
    /// Set when f' came from the finite-difference fallback.
    pub fallback: bool,
}

impl Evaluation {
    pub fn f(&self) -> Complex64 {
        self.value.to_complex()
    }

    pub fn f_prime(&self) -> Complex64 {
        self.derivative.to_complex()
    }
}

/// Value and logarithmic gradient of det(I - U Z) at a point z of C^E.
#[derive(Debug, Clone)]
pub struct TorusEvaluation {
    pub value: ScaledComplex,
    /// ∂ log f / ∂ z_e, one entry per edge.
    pub log_gradient: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct SecularFunction {
    bs: BondScattering,
    lengths: Vec<f64>,
    bond_lengths: Vec<f64>,
    total_length: f64,
}

impl SecularFunction {
    pub fn new(bs: BondScattering, lengths: Vec<f64>) -> Self {
        assert_eq!(lengths.len(), bs.num_edges(), "one length per edge");
        let bond_lengths = lengths.iter().chain(lengths.iter()).copied().collect();
        let total_length = lengths.iter().sum();
        SecularFunction { bs, lengths, bond_lengths, total_length }
    }

    pub fn from_graph(g: &MetricGraph, include_leads: bool) -> Self {
        Self::new(BondScattering::build(g, include_leads), g.lengths())
    }

    pub fn scattering(&self) -> &BondScattering {
        &self.bs
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn with_lengths(&self, lengths: Vec<f64>) -> Self {
        Self::new(self.bs.clone(), lengths)
    }

    /// M(k) = I - U D(k).
    pub fn matrix(&self, k: Complex64) -> DMatrix<Complex64> {
        let d = phases(&self.lengths, k);
        let nb = self.bs.num_bonds();
        DMatrix::from_fn(nb, nb, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            Complex64::from(id) - self.bs.u[(i, j)] * d[j]
        })
    }

    /// f(k), f'(k) and f'/f.
    pub fn evaluate(&self, k: Complex64) -> Evaluation {
        let nb = self.bs.num_bonds();
        if nb == 0 {
            return Evaluation {
                value: ScaledComplex::ONE,
                derivative: ScaledComplex::ZERO,
                log_derivative: Some(Complex64::new(0.0, 0.0)),
                fallback: false,
            };
        }
        match self.evaluate_lu(k) {
            Some((value, logd)) => Evaluation {
                value,
                derivative: value.scale(logd),
                log_derivative: Some(logd),
                fallback: false,
            },
            None => {
                let value = self.value(k);
                let h = f64::EPSILON.cbrt() * k.norm().max(1.0);
                let fp = self.value(k + h).to_complex() - self.value(k - h).to_complex();
                Evaluation {
                    value,
                    derivative: ScaledComplex::new(fp / (2.0 * h), 0),
                    log_derivative: None,
                    fallback: true,
                }
            }
        }
    }

    /// f(k) only.
    pub fn value(&self, k: Complex64) -> ScaledComplex {
        if self.bs.num_bonds() == 0 {
            return ScaledComplex::ONE;
        }
        match self.evaluate_lu(k) {
            Some((v, _)) => v,
            None => ScaledComplex::ZERO,
        }
    }

    /// Determinant and log-derivative through one LU factorisation.
    /// Upper half-plane: M = I - U D. Lower half-plane: f = det(D⁻¹ - U) · Π D_j,
    /// which keeps every matrix entry bounded by 1 + |U|.
    fn evaluate_lu(&self, k: Complex64) -> Option<(ScaledComplex, Complex64)> {
        let nb = self.bs.num_bonds();
        let i = Complex64::i();
        if k.im >= 0.0 {
            let d = phases(&self.lengths, k);
            let m = DMatrix::from_fn(nb, nb, |r, c| {
                let id = if r == c { 1.0 } else { 0.0 };
                Complex64::from(id) - self.bs.u[(r, c)] * d[c]
            });
            let lu = m.lu();
            let det = lu_determinant(&lu)?;
            let x = lu.solve(&self.bs.u.map(Complex64::from))?;
            let mut logd = Complex64::new(0.0, 0.0);
            for j in 0..nb {
                logd -= x[(j, j)] * i * self.bond_lengths[j] * d[j];
            }
            Some((det, logd))
        } else {
            let dinv = phases(&self.lengths, -k);
            let a = DMatrix::from_fn(nb, nb, |r, c| {
                let diag = if r == c { dinv[r] } else { Complex64::new(0.0, 0.0) };
                diag - self.bs.u[(r, c)]
            });
            let lu = a.lu();
            let det = lu_determinant(&lu)?;
            let ainv = lu.try_inverse()?;
            let mut logd = Complex64::new(0.0, 2.0 * self.total_length);
            for j in 0..nb {
                logd -= ainv[(j, j)] * i * self.bond_lengths[j] * dinv[j];
            }
            // Π_j D_j = exp(2 i k |L|), split into phase and a power of two.
            let log2_mag = -2.0 * k.im * self.total_length / std::f64::consts::LN_2;
            let e = log2_mag.floor();
            let phase = Complex64::from_polar(2f64.powf(log2_mag - e), 2.0 * k.re * self.total_length);
            Some((det.mul(ScaledComplex::new(phase, e as i64)), logd))
        }
    }

    /// det(I - U Z) at an arbitrary point z (one coordinate per edge) and its
    /// logarithmic gradient.
    pub fn evaluate_torus(&self, z: &[Complex64]) -> Option<TorusEvaluation> {
        let n = self.bs.num_edges();
        assert_eq!(z.len(), n);
        let nb = 2 * n;
        let m = DMatrix::from_fn(nb, nb, |r, c| {
            let id = if r == c { 1.0 } else { 0.0 };
            Complex64::from(id) - self.bs.u[(r, c)] * z[c % n]
        });
        let lu = m.lu();
        let value = lu_determinant(&lu)?;
        let x = lu.solve(&self.bs.u.map(Complex64::from))?;
        let log_gradient = (0..n).map(|e| -(x[(e, e)] + x[(e + n, e + n)])).collect();
        Some(TorusEvaluation { value, log_gradient })
    }
}

/// Scaled determinant from an LU factorisation; `None` if a pivot is zero.
fn lu_determinant(
    lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
) -> Option<ScaledComplex> {
    let u = lu.u();
    let mut det = ScaledComplex::ONE;
    for j in 0..u.nrows() {
        let p = u[(j, j)];
        if p.norm() == 0.0 || !p.norm().is_finite() {
            return None;
        }
        det = det.mul(ScaledComplex::new(p, 0));
    }
    let sign: f64 = lu.p().determinant();
    Some(det.scale(Complex64::from(sign)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{catalog, Edge};
    use std::f64::consts::{LN_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn neumann_edge_reflects_into_reverse() {
        let g = MetricGraph::new(
            vec!["a".into(), "b".into()],
            vec![Edge { id: "e".into(), from: 0, to: 1, length: 1.0 }],
            vec![0, 0],
        )
        .unwrap();
        let bs = BondScattering::build(&g, true);
        assert_eq!(bs.u, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn leads_only_vertex() {
        let g = catalog("star", &[4.0], None).unwrap();
        let bs = BondScattering::build(&g, true);
        assert_eq!(bs.num_bonds(), 0);
        for a in 0..4 {
            for b in 0..4 {
                let expected = 0.5 - if a == b { 1.0 } else { 0.0 };
                assert_eq!(bs.r[(a, b)], expected);
            }
        }
    }

    #[test]
    fn y_graph_block_shapes() {
        let g = catalog("Y", &[1.0, 2.0], None).unwrap();
        let bs = BondScattering::build(&g, true);
        assert_eq!(bs.u.shape(), (4, 4));
        assert_eq!(bs.r.shape(), (1, 1));
        assert_eq!(bs.t_o.shape(), (1, 4));
        assert_eq!(bs.t_i.shape(), (4, 1));
    }

    #[test]
    fn compact_circle_vanishes_at_integer_k() {
        let g = catalog("circular", &[1.0], Some(&[2.0 * PI])).unwrap();
        let sf = SecularFunction::from_graph(&g, false);
        assert!(sf.value(c(1.0, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn star_closed_form_resonance() {
        let g = catalog("star", &[1.0, 3.0], None).unwrap();
        let sf = SecularFunction::from_graph(&g, true);
        let k0 = c(PI / 2.0, -LN_2 / 2.0);
        assert!(sf.value(k0).abs() < 1e-10);
    }

    #[test]
    fn reflection_symmetry() {
        let g = catalog("tetrahedron", &[1.0, 1.0], Some(&[1.0, 1.3, 0.7, 2.1, 1.9, 0.4])).unwrap();
        let sf = SecularFunction::from_graph(&g, true);
        let k = c(2.3, -0.4);
        let f = sf.value(k).to_complex();
        let g2 = sf.value(-k.conj()).to_complex();
        assert!((g2 - f.conj()).norm() <= 1e-12 * f.norm());
    }

    #[test]
    fn both_half_plane_branches_agree_near_axis() {
        let g = catalog("Y", &[1.0, 2f64.sqrt()], None).unwrap();
        let sf = SecularFunction::from_graph(&g, true);
        let above = sf.evaluate(c(3.1, 1e-13));
        let below = sf.evaluate(c(3.1, -1e-13));
        assert!((above.f() - below.f()).norm() < 1e-10);
        let (la, lb) = (above.log_derivative.unwrap(), below.log_derivative.unwrap());
        assert!((la - lb).norm() < 1e-9 * la.norm().max(1.0));
    }

    #[test]
    fn deep_lower_half_plane_does_not_overflow() {
        let g = catalog("Y", &[1.0, 2.0], None).unwrap();
        let sf = SecularFunction::from_graph(&g, true);
        let v = sf.value(c(1.0, -600.0));
        assert!(v.mantissa.norm().is_finite() && !v.is_zero());
        assert!(v.log2_abs() > 1000.0);
    }

    #[test]
    fn unitarity_on_and_off_axis() {
        let g = catalog("Y", &[1.0, 2.0], None).unwrap();
        let bs = BondScattering::build(&g, true);
        assert!(unitary_defect(&bs, &g.lengths(), 1.7) < 1e-12);
        assert!(unitary_defect_at(&bs, &g.lengths(), c(1.0, -0.5)) > 0.1);
        let t = catalog("tetrahedron", &[2.0], None).unwrap();
        let bs = BondScattering::build(&t, true);
        assert!(unitary_defect(&bs, &t.lengths(), 0.3) < 1e-12);
    }

    #[test]
    fn scaled_complex_arithmetic() {
        let a = ScaledComplex::new(c(3.0, 4.0), 10);
        assert!((a.abs() - 5.0 * 1024.0).abs() < 1e-9);
        let b = a.mul(ScaledComplex::new(c(0.5, 0.0), -10));
        assert!((b.to_complex() - c(1.5, 2.0)).norm() < 1e-15);
        assert!((a.ratio(b) - c(1024.0 * 2.0, 0.0)).norm() < 1e-9);
    }
}
