//! Quantities measured on resonance sets.

mod branch;
mod compact;
mod counting;
mod energy;

pub use branch::{
    barra_gaspard_density, branch_trace, default_u_grid, direct_branch_fit, torus_zeros_2d, BranchFit,
    BranchSample, BranchTrace,
};
pub use compact::{compact_eigenvalues, vanishing_eigenfunction_test, VanishingTest, Witness};
pub use counting::{
    counting_report, estimate_h, log_grid, n_eps_curve, sample_lengths, weyl_fit, CountingReport, EpsPoint,
    HEstimate, WeylFit,
};
pub use energy::{energy_residual, state_norm_sq};

use nalgebra::{DMatrix, DVector};

/// Least-squares polynomial fit; coefficients lowest degree first.
pub(crate) fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Option<Vec<f64>> {
    if x.len() <= degree || x.len() != y.len() {
        return None;
    }
    let a = DMatrix::from_fn(x.len(), degree + 1, |i, j| x[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let sol = svd.solve(&b, 1e-14).ok()?;
    Some(sol.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyfit_recovers_cubic() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.1 - 1.0).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.0 - 2.0 * t + 0.5 * t * t * t).collect();
        let c = polyfit(&x, &y, 3).unwrap();
        for (got, want) in c.iter().zip([1.0, -2.0, 0.0, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(polyfit(&x[..2], &y[..2], 3).is_none());
    }
}
