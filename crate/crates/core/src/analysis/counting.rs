use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::polyfit;
use crate::error::{Error, Result};
use crate::finder::{band_depth, find_resonances, FinderConfig, FinderReport, Resonance, SearchRegion};
use crate::graph::{compute_invariants, GraphType, MetricGraph};
use crate::scattering::SecularFunction;

#[derive(Debug, Clone, Serialize)]
pub struct WeylFit {
    pub k_max: f64,
    pub count: u64,
    pub slope: f64,
    pub intercept: f64,
    /// |L|/π.
    pub reference_one_sided: f64,
    /// |L|/2π.
    pub reference_two_sided: f64,
}

/// Least-squares line through the counting function #{0 <= σ_j <= x} on [K/4, K].
pub fn weyl_fit(resonances: &[Resonance], k_max: f64, total_length: f64) -> Result<WeylFit> {
    let mut sigmas: Vec<(f64, u64)> = resonances
        .iter()
        .filter(|r| r.k.re >= 0.0 && r.k.re <= k_max)
        .map(|r| (r.k.re, r.multiplicity as u64))
        .collect();
    let count: u64 = sigmas.iter().map(|s| s.1).sum();
    if count < 20 {
        return Err(Error::TooFewResonances { got: count as usize, needed: 20 });
    }
    sigmas.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = 4001;
    let (mut xs, mut ys) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut idx, mut acc) = (0, 0u64);
    for i in 0..n {
        let x = k_max / 4.0 + 0.75 * k_max * i as f64 / (n - 1) as f64;
        while idx < sigmas.len() && sigmas[idx].0 <= x {
            acc += sigmas[idx].1;
            idx += 1;
        }
        xs.push(x);
        ys.push(acc as f64);
    }
    let c = polyfit(&xs, &ys, 1).ok_or(Error::InsufficientCounts("degenerate Weyl fit".into()))?;
    Ok(WeylFit {
        k_max,
        count,
        slope: c[1],
        intercept: c[0],
        reference_one_sided: total_length / PI,
        reference_two_sided: total_length / (2.0 * PI),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsPoint {
    pub eps: f64,
    pub count: u64,
    /// count / K.
    pub density: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountingReport {
    pub k_max: f64,
    pub eps_grid: Vec<EpsPoint>,
    /// Slope of log N̂ against log ε over points with count >= 10.
    pub loglog_slope: Option<f64>,
    /// 2 × slope.
    pub exponent: Option<f64>,
    /// The same exponent from the window [0, K/2].
    pub half_window_exponent: Option<f64>,
    /// Exponents from K and K/2 agree within 10%.
    pub stable: Option<bool>,
    /// Smallest -τ|L| among counted resonances.
    pub h_hat: Option<f64>,
}

impl CountingReport {
    pub fn exponent(&self) -> Result<f64> {
        self.exponent.ok_or_else(|| {
            Error::InsufficientCounts(format!(
                "fewer than two eps values with at least 10 resonances at K = {}; widen K or the eps range",
                self.k_max
            ))
        })
    }
}

fn count_points(resonances: &[Resonance], k_max: f64, eps: &[f64]) -> Vec<EpsPoint> {
    eps.iter()
        .map(|&e| {
            let count = resonances
                .iter()
                .filter(|r| r.k.re >= 0.0 && r.k.re <= k_max && r.k.im >= -e)
                .map(|r| r.multiplicity as u64)
                .sum();
            EpsPoint { eps: e, count, density: count as f64 / k_max }
        })
        .collect()
}

fn loglog_slope(points: &[EpsPoint]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        points.iter().filter(|p| p.count >= 10).map(|p| (p.eps.ln(), p.density.ln())).unzip();
    if xs.len() < 2 || xs.iter().all(|&x| x == xs[0]) {
        return None;
    }
    polyfit(&xs, &ys, 1).map(|c| c[1])
}

/// N̂(ε) and the exponent fit from an existing resonance list.
pub fn counting_report(resonances: &[Resonance], k_max: f64, eps: &[f64], total_length: f64) -> CountingReport {
    let eps_grid = count_points(resonances, k_max, eps);
    let loglog = loglog_slope(&eps_grid);
    let half = loglog_slope(&count_points(resonances, 0.5 * k_max, eps)).map(|s| 2.0 * s);
    let exponent = loglog.map(|s| 2.0 * s);
    let stable = match (exponent, half) {
        (Some(d), Some(h)) => Some((d - h).abs() <= 0.1 * d.abs()),
        _ => None,
    };
    let e_max = eps.iter().copied().fold(0.0, f64::max);
    let h_hat = resonances
        .iter()
        .filter(|r| r.k.re >= 0.0 && r.k.re <= k_max && r.k.im >= -e_max)
        .map(|r| -r.k.im * total_length)
        .reduce(f64::min);
    CountingReport { k_max, eps_grid, loglog_slope: loglog, exponent, half_window_exponent: half, stable, h_hat }
}

/// `steps` logarithmically spaced values from `min` to `max`.
pub fn log_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min) || steps == 0 {
        return Err(Error::InvalidParameter(format!("bad eps grid {min}..{max} x {steps}")));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..steps).map(|i| (a + (b - a) * i as f64 / (steps - 1) as f64).exp()).collect())
}

/// Resonances in σ ∈ [0, K] within max(ε) of the axis, and N̂ on the grid.
pub fn n_eps_curve(
    sf: &SecularFunction,
    k_max: f64,
    eps: &[f64],
    cfg: &FinderConfig,
) -> Result<(CountingReport, FinderReport)> {
    let e_max = eps.iter().copied().fold(f64::NAN, f64::max);
    if eps.is_empty() || !(e_max > 0.0) || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("eps values must be positive".into()));
    }
    let region = SearchRegion::new(0.0, k_max, -(1.05 * e_max + 1e-4), cfg.tau_cap)?;
    let report = find_resonances(sf, &region, cfg)?;
    Ok((counting_report(&report.resonances, k_max, eps, sf.total_length()), report))
}

#[derive(Debug, Clone, Serialize)]
pub struct HEstimate {
    /// min over samples of the smallest -τ|L|; +∞ when nothing was found.
    pub h: f64,
    /// max - min of the finite per-sample values.
    pub spread: f64,
    pub per_sample: Vec<f64>,
    pub seed: u64,
    pub k_max: f64,
}

/// l_e = 1 + U(0, 1), rescaled to total length 1.
pub fn sample_lengths(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 1.0 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|l| l / total).collect()
}

/// Empirical resonance gap of a type I graph over sampled length vectors.
pub fn estimate_h(g: &MetricGraph, n_samples: usize, k_max: f64, seed: u64, cfg: &FinderConfig) -> Result<HEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if compute_invariants(g).graph_type == GraphType::TypeII {
        return Err(Error::Unsupported("gap estimate is defined for type I graphs only (h = 0 for type II)".into()));
    }
    let cfg = FinderConfig { extract_states: false, ..cfg.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_sample = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let lengths = sample_lengths(&mut rng, g.num_edges());
        if lengths.is_empty() {
            per_sample.push(f64::INFINITY);
            continue;
        }
        let sf = SecularFunction::from_graph(&g.with_lengths(&lengths)?, true);
        let depth = band_depth(&sf, &cfg)?;
        let region = SearchRegion::new(cfg.k_floor, k_max, -depth, cfg.tau_cap)?;
        let rep = find_resonances(&sf, &region, &cfg)?;
        let h = rep.resonances.iter().map(|r| -r.k.im * sf.total_length()).fold(f64::INFINITY, f64::min);
        per_sample.push(h);
    }
    let finite: Vec<f64> = per_sample.iter().copied().filter(|h| h.is_finite()).collect();
    let h = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if finite.is_empty() { 0.0 } else { finite.iter().copied().fold(f64::NEG_INFINITY, f64::max) - h };
    Ok(HEstimate { h, spread, per_sample, seed, k_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::catalog;
    use num_complex::Complex64;
    use std::f64::consts::LN_2;

    fn res(re: f64, im: f64) -> Resonance {
        Resonance { k: Complex64::new(re, im), residual: 0.0, multiplicity: 1, degraded: false, state: None }
    }

    #[test]
    fn weyl_slope_of_regular_spacing() {
        let list: Vec<Resonance> = (1..=100).map(|j| res(j as f64 * PI, -0.5)).collect();
        let fit = weyl_fit(&list, 100.0 * PI, 1.0).unwrap();
        assert!((fit.slope - 1.0 / PI).abs() < 0.01 / PI);
        assert!(weyl_fit(&list[..10], 100.0 * PI, 1.0).is_err());
    }

    #[test]
    fn counting_is_monotone_and_fits_power_law() {
        // τ_j = -(j/K)^2 gives N(ε) ∝ ε^{1/2}.
        let k = 10000.0;
        let list: Vec<Resonance> = (1..10000).map(|j| res(j as f64, -(j as f64 / k).powi(2))).collect();
        let eps = log_grid(1e-3, 1e-1, 9).unwrap();
        let rep = counting_report(&list, k, &eps, 1.0);
        assert!(rep.eps_grid.windows(2).all(|w| w[0].count <= w[1].count));
        assert!((rep.exponent.unwrap() - 1.0).abs() < 0.05, "{:?}", rep.exponent);
    }

    #[test]
    fn star_gap_estimate() {
        let g = catalog("star", &[1.0, 3.0], None).unwrap();
        let est = estimate_h(&g, 3, 20.0, 7, &FinderConfig::default()).unwrap();
        assert!((est.h - LN_2 / 2.0).abs() < 1e-8 && est.spread < 1e-8, "{est:?}");
    }

    #[test]
    fn gap_estimate_rejects_type_two() {
        let g = catalog("Y", &[1.0, 2.0], None).unwrap();
        assert!(matches!(estimate_h(&g, 1, 10.0, 0, &FinderConfig::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn leads_only_star_has_infinite_gap() {
        let g = catalog("star", &[4.0], None).unwrap();
        let est = estimate_h(&g, 2, 10.0, 0, &FinderConfig::default()).unwrap();
        assert!(est.h.is_infinite());
    }

    #[test]
    fn sampled_lengths_are_seeded() {
        let a = sample_lengths(&mut ChaCha8Rng::seed_from_u64(3), 4);
        let b = sample_lengths(&mut ChaCha8Rng::seed_from_u64(3), 4);
        assert_eq!(a, b);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
