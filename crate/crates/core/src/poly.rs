//! Exact secular polynomial R_G(z) = det(I - U (z)₂) over the rationals.
//!
//! Entries of I - U (z)₂ are `δ - c·z_e` with rational Kirchhoff coefficients
//! `c`, so the determinant is computed exactly by Bareiss fraction-free
//! elimination over Q[z_1, .., z_n]. The result is only meaningful up to a
//! unit `c · Π z_e^{m_e}`; [`SecularPolynomial`] stores a canonical
//! representative and the unit that was divided out.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::scattering::BondScattering;

/// Largest edge count accepted by [`symbolic_secular`].
pub const MAX_SYMBOLIC_EDGES: usize = 8;

/// Exponent vector; `BTreeMap` order is lexicographic.
pub type Monomial = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// `c · z_var`.
    pub fn linear(nvars: usize, var: usize, c: BigRational) -> Self {
        let mut m = vec![0; nvars];
        m[var] = 1;
        let mut p = Poly::zero(nvars);
        p.add_term(m, c);
        p
    }

    /// Integer-coefficient polynomial from `(coefficient, exponents)` pairs.
    pub fn from_terms(nvars: usize, terms: &[(i64, &[u32])]) -> Self {
        let mut p = Poly::zero(nvars);
        for &(c, exps) in terms {
            assert_eq!(exps.len(), nvars);
            p.add_term(exps.to_vec(), BigRational::from_integer(c.into()));
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Lexicographically largest term.
    fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * c);
        }
        out
    }

    /// Exact quotient `self / divisor`; `None` if the division leaves a remainder.
    pub fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        let (lm, lc) = divisor.leading()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.nvars);
        while let Some((rm, rc)) = rem.leading() {
            if rm.iter().zip(&lm).any(|(a, b)| a < b) {
                return None;
            }
            let m: Monomial = rm.iter().zip(&lm).map(|(a, b)| a - b).collect();
            let c = rc / &lc;
            let mut term = Poly::zero(self.nvars);
            term.add_term(m, c);
            rem = rem.sub(&term.mul(divisor));
            quot = quot.add(&term);
        }
        Some(quot)
    }

    /// Componentwise minimum exponent over the support.
    fn monomial_content(&self) -> Monomial {
        let mut min = vec![u32::MAX; self.nvars];
        for m in self.terms.keys() {
            for (lo, &e) in min.iter_mut().zip(m) {
                *lo = (*lo).min(e);
            }
        }
        if self.terms.is_empty() {
            vec![0; self.nvars]
        } else {
            min
        }
    }

    /// Canonical representative of `self` up to units, and the unit:
    /// `self = scalar · z^shift · normalized`.
    pub fn normalize(&self) -> (Poly, BigRational, Monomial) {
        if self.is_zero() {
            return (self.clone(), BigRational::one(), vec![0; self.nvars]);
        }
        let shift = self.monomial_content();
        let mut denom_lcm = BigInt::one();
        for c in self.terms.values() {
            denom_lcm = denom_lcm.lcm(c.denom());
        }
        let mut num_gcd = BigInt::zero();
        for c in self.terms.values() {
            let scaled = (c * BigRational::from_integer(denom_lcm.clone())).to_integer();
            num_gcd = num_gcd.gcd(&scaled);
        }
        let mut scalar = BigRational::new(num_gcd, denom_lcm);
        let lead = self.terms.values().next_back().expect("nonzero");
        if lead.is_negative() {
            scalar = -scalar;
        }
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let m = m.iter().zip(&shift).map(|(a, b)| a - b).collect();
            out.add_term(m, c / &scalar);
        }
        (out, scalar, shift)
    }

    /// Numeric evaluation.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.nvars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = Complex64::from(rational_to_f64(c));
            for (zi, &e) in z.iter().zip(m) {
                t *= zi.powu(e);
            }
            acc += t;
        }
        acc
    }

    /// ∂p/∂z_var.
    pub fn partial(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[var] > 0 {
                let mut d = m.clone();
                d[var] -= 1;
                out.add_term(d, c * BigRational::from_integer(m[var].into()));
            }
        }
        out
    }

    /// One term per line, lexicographically largest monomial first:
    /// `coefficient * z1^a z2^b`, exponent 1 written as a bare variable.
    pub fn to_term_list(&self) -> String {
        let mut out = String::new();
        for (m, c) in self.terms.iter().rev() {
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("z{}", i + 1) } else { format!("z{}^{}", i + 1, e) })
                .collect();
            if mono.is_empty() {
                let _ = writeln!(out, "{c}");
            } else {
                let _ = writeln!(out, "{c} * {}", mono.join(" "));
            }
        }
        out
    }
}

fn rational_to_f64(c: &BigRational) -> f64 {
    c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN)
}

/// `p = c · z^m · q` for some nonzero rational `c` and integer shift `m`.
pub fn proportional(p: &Poly, q: &Poly) -> bool {
    p.nvars == q.nvars && p.normalize().0 == q.normalize().0
}

/// Determinant by Bareiss fraction-free elimination.
pub fn bareiss_determinant(mut a: Vec<Vec<Poly>>, nvars: usize) -> Poly {
    let n = a.len();
    if n == 0 {
        return Poly::constant(nvars, BigRational::one());
    }
    let mut sign = BigRational::one();
    let mut prev = Poly::constant(nvars, BigRational::one());
    for k in 0..n - 1 {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return Poly::zero(nvars);
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.exact_div(&prev).expect("Bareiss quotients are exact");
            }
            a[i][k] = Poly::zero(nvars);
        }
        prev = a[k][k].clone();
    }
    a[n - 1][n - 1].scale(&sign)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecularPolynomial {
    /// Canonical form: coprime integer coefficients, no common monomial factor,
    /// positive leading (lexicographically largest) coefficient.
    pub poly: Poly,
    /// Raw determinant = `unit_scalar · z^unit_monomial · poly`.
    pub unit_scalar: BigRational,
    pub unit_monomial: Monomial,
}

impl SecularPolynomial {
    pub fn from_raw(raw: &Poly) -> Self {
        let (poly, unit_scalar, unit_monomial) = raw.normalize();
        SecularPolynomial { poly, unit_scalar, unit_monomial }
    }

    pub fn raw(&self) -> Poly {
        let mut unit = Poly::zero(self.poly.nvars);
        unit.add_term(self.unit_monomial.clone(), self.unit_scalar.clone());
        self.poly.mul(&unit)
    }

    pub fn proportional(&self, other: &Poly) -> bool {
        proportional(&self.poly, other)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.poly.eval(z)
    }

    pub fn to_term_list(&self) -> String {
        self.poly.to_term_list()
    }
}

/// Expand det(I - U (z)₂) for a graph with leads, one variable per edge.
pub fn symbolic_secular(g: &MetricGraph) -> Result<SecularPolynomial> {
    let n = g.num_edges();
    if n > MAX_SYMBOLIC_EDGES {
        return Err(Error::SizeGuard { limit: MAX_SYMBOLIC_EDGES, edges: n });
    }
    let bs = BondScattering::build(g, true);
    let nb = bs.num_bonds();
    let matrix: Vec<Vec<Poly>> = (0..nb)
        .map(|r| {
            (0..nb)
                .map(|c| {
                    let coef = bs.u_coefficient(r, c);
                    let u = BigRational::new(coef.num.into(), coef.den.into());
                    let entry = Poly::linear(n, bs.bond_edge(c), -u);
                    if r == c {
                        entry.add(&Poly::constant(n, BigRational::one()))
                    } else {
                        entry
                    }
                })
                .collect()
        })
        .collect();
    Ok(SecularPolynomial::from_raw(&bareiss_determinant(matrix, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::catalog;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn sample() -> Poly {
        // z1^2 z2 - 3 z1 + 5
        Poly::from_terms(2, &[(1, &[2, 1]), (-3, &[1, 0]), (5, &[0, 0])])
    }

    #[test]
    fn proportional_to_scalar_and_monomial_multiples() {
        let p = sample();
        assert!(proportional(&p, &p.scale(&r(3))));
        assert!(proportional(&p, &p.mul(&Poly::linear(2, 0, r(1)))));
        assert!(!proportional(&p, &p.add(&Poly::constant(2, r(1)))));
    }

    #[test]
    fn exact_division_round_trip() {
        let p = sample();
        let q = Poly::from_terms(2, &[(2, &[1, 1]), (-1, &[0, 0])]);
        let prod = p.mul(&q);
        assert_eq!(prod.exact_div(&q).unwrap(), p);
        assert!(p.exact_div(&q).is_none());
    }

    #[test]
    fn normalization_is_canonical() {
        let p = sample();
        let scaled = p.scale(&BigRational::new((-4).into(), 7.into()));
        let (n1, _, _) = p.normalize();
        let (n2, s2, m2) = scaled.normalize();
        assert_eq!(n1, n2);
        assert_eq!(s2, BigRational::new((-4).into(), 7.into()));
        assert_eq!(m2, vec![0, 0]);
    }

    #[test]
    fn partial_derivative() {
        let p = Poly::from_terms(2, &[(1, &[2, 1]), (-3, &[1, 0]), (5, &[0, 0])]);
        assert_eq!(p.partial(0), Poly::from_terms(2, &[(2, &[1, 1]), (-3, &[0, 0])]));
        assert_eq!(p.partial(1), Poly::from_terms(2, &[(1, &[2, 0])]));
    }

    #[test]
    fn term_list_format() {
        assert_eq!(sample().to_term_list(), "1 * z1^2 z2\n-3 * z1\n5\n");
    }

    #[test]
    fn y_graph_polynomial() {
        let g = catalog("Y", &[1.0, 2.0], None).unwrap();
        let p = symbolic_secular(&g).unwrap();
        let expected = Poly::from_terms(2, &[(1, &[2, 2]), (-1, &[2, 0]), (-1, &[0, 2]), (-3, &[0, 0])]);
        assert!(p.proportional(&expected), "{}", p.to_term_list());
    }

    #[test]
    fn circular_one_one_polynomial() {
        let g = catalog("circular", &[1.0, 1.0], None).unwrap();
        let p = symbolic_secular(&g).unwrap();
        let a = Poly::from_terms(2, &[(1, &[1, 1]), (-1, &[0, 1]), (-1, &[1, 0]), (-3, &[0, 0])]);
        let b = Poly::from_terms(2, &[(1, &[1, 1]), (1, &[1, 0]), (1, &[0, 1]), (-3, &[0, 0])]);
        assert!(p.proportional(&a.mul(&b)), "{}", p.to_term_list());
    }

    #[test]
    fn size_guard() {
        let g = catalog("dodecahedron", &[], None).unwrap();
        assert!(matches!(symbolic_secular(&g), Err(Error::SizeGuard { .. })));
    }
}
