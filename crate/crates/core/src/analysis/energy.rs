use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::finder::{extract_state, Resonance, ResonantState};
use crate::scattering::SecularFunction;

// (e^x - 1)/x with the x -> 0 limit.
fn expm1_ratio(x: f64) -> f64 {
    if x.abs() < 1e-10 {
        1.0 + 0.5 * x
    } else {
        x.exp_m1() / x
    }
}

/// ∫ over the finite part of |u|², with u = a e^{ikx} + b e^{-ikx} on each edge.
pub fn state_norm_sq(k: Complex64, lengths: &[f64], state: &ResonantState) -> f64 {
    let (sigma, tau) = (k.re, k.im);
    let b0 = state.b_at_origin(k, lengths);
    let mut total = 0.0;
    for ((a, b), &l) in state.a.iter().zip(&b0).zip(lengths) {
        let ta = a.norm_sqr() * l * expm1_ratio(-2.0 * tau * l);
        let tb = b.norm_sqr() * l * expm1_ratio(2.0 * tau * l);
        let theta = 2.0 * sigma * l;
        let osc = if theta.abs() < 1e-10 {
            Complex64::from(l)
        } else {
            (Complex64::from_polar(1.0, theta) - 1.0) / Complex64::new(0.0, theta) * l
        };
        total += ta + tb + 2.0 * (a * b.conj() * osc).re;
    }
    total
}

/// Relative defect of -2τ‖u‖² = Σ|t_m|². For states without lead amplitude
/// (embedded eigenvalues) the absolute defect is returned.
pub fn energy_residual(sf: &SecularFunction, r: &Resonance) -> Result<f64> {
    let k = r.k;
    if k.re.abs() < 1e-12 {
        return Err(Error::InvalidParameter("energy identity needs sigma != 0".into()));
    }
    let owned;
    let state = match &r.state {
        Some(s) => s,
        None => {
            owned = extract_state(sf, k)?;
            &owned
        }
    };
    let lhs = -2.0 * k.im * state_norm_sq(k, sf.lengths(), state);
    let rhs: f64 = state.t_out.iter().map(|t| t.norm_sqr()).sum();
    if !state.lead_normalized {
        return Ok((lhs - rhs).abs());
    }
    Ok((lhs - rhs).abs() / rhs.max(1e-30))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::catalog;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn star_resonance_satisfies_energy_identity() {
        let sf = SecularFunction::from_graph(&catalog("star", &[1.0, 3.0], None).unwrap(), true);
        let k = Complex64::new(PI / 2.0, -LN_2 / 2.0);
        let r = Resonance { k, residual: 0.0, multiplicity: 1, degraded: false, state: None };
        assert!(energy_residual(&sf, &r).unwrap() < 1e-8);
        let st = extract_state(&sf, k).unwrap();
        let norm = state_norm_sq(k, sf.lengths(), &st);
        assert!((norm - 1.0 / (2.0 * k.im.abs())).abs() < 1e-8 * norm);
    }

    #[test]
    fn embedded_eigenvalue_has_zero_defect() {
        let g = catalog("circular", &[1.0, 1.0], Some(&[2.0 * PI, 2.0 * PI])).unwrap();
        let sf = SecularFunction::from_graph(&g, true);
        let r = Resonance { k: Complex64::new(1.0, 0.0), residual: 0.0, multiplicity: 1, degraded: false, state: None };
        assert!(energy_residual(&sf, &r).unwrap() < 1e-10);
    }

    #[test]
    fn rejects_zero_sigma() {
        let sf = SecularFunction::from_graph(&catalog("star", &[1.0, 3.0], None).unwrap(), true);
        let r = Resonance { k: Complex64::new(0.0, -0.3), residual: 0.0, multiplicity: 1, degraded: false, state: None };
        assert!(energy_residual(&sf, &r).is_err());
    }
}
