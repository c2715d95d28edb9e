//! Zeros of the secular function in a rectangle of the lower half-plane.
//!
//! The region is tiled into boxes of bounded width. For every box the number
//! of zeros is the winding number of f along its boundary; each side is
//! integrated with adaptive Gauss–Legendre quadrature of f'/f, and the
//! argument change of every accepted piece is snapped to the principal value
//! of arg f(b)/f(a), so counts are exact integers and additive under
//! subdivision. Boxes holding one zero are resolved by Newton iteration started
//! from the first contour moment; boxes holding several are bisected unless
//! the moments show a single multiple zero.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scattering::{phases, ScaledComplex, SecularFunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRegion {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl SearchRegion {
    pub fn new(sigma_min: f64, sigma_max: f64, tau_min: f64, tau_max: f64) -> Result<Self> {
        let r = SearchRegion { sigma_min, sigma_max, tau_min, tau_max };
        if !(sigma_min < sigma_max) || !(tau_min < tau_max) || ![sigma_min, sigma_max, tau_min, tau_max].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter(format!("empty or non-finite search region {r:?}")));
        }
        Ok(r)
    }
}

#[derive(Debug, Clone)]
pub struct FinderConfig {
    /// Largest admissible τ_max; slightly positive so real zeros sit inside.
    pub tau_cap: f64,
    /// Half-width of the excluded strip |σ| < k_floor around the origin.
    pub k_floor: f64,
    /// Initial tile width in σ.
    pub tile_width: f64,
    /// Boxes below this size are not subdivided further.
    pub min_box: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub dedup_tol: f64,
    /// Tolerance on |∫ f'/f - log(f(b)/f(a))| for one quadrature piece.
    pub segment_tol: f64,
    /// Raw winding must lie this close to an integer.
    pub winding_tol: f64,
    /// Jitter step as a fraction of the box size.
    pub jitter_fraction: f64,
    pub max_jitter: usize,
    pub max_depth: usize,
    pub parallel: bool,
    pub extract_states: bool,
}

impl Default for FinderConfig {
    fn default() -> Self {
        FinderConfig {
            tau_cap: 1e-6,
            k_floor: 1e-3,
            tile_width: 1.0,
            min_box: 1e-9,
            newton_tol: 1e-12,
            newton_max_iter: 60,
            dedup_tol: 1e-8,
            segment_tol: 1e-6,
            winding_tol: 0.25,
            jitter_fraction: 1e-4,
            max_jitter: 8,
            max_depth: 60,
            parallel: true,
            extract_states: true,
        }
    }
}

/// Coefficients of a resonant state; t^in = 0.
#[derive(Debug, Clone)]
pub struct ResonantState {
    /// Forward amplitudes, referenced at each edge's `from` end.
    pub a: Vec<Complex64>,
    /// Backward amplitudes, referenced at each edge's `to` end.
    pub b: Vec<Complex64>,
    pub t_out: Vec<Complex64>,
    /// ‖M(k)(a,b)‖ / ‖(a,b)‖, the smallest singular value over the largest.
    pub sigma_min: f64,
    /// Second smallest singular value over the largest.
    pub sigma_second: f64,
    /// Two or more singular values below threshold.
    pub degenerate: bool,
    /// `true` when normalised by Σ|t_m|² = 1, `false` when by ‖(a,b)‖ = 1.
    pub lead_normalized: bool,
    /// ‖t_out‖ for ‖(a,b)‖ = 1: zero for compactly supported states.
    pub t_norm: f64,
}

impl ResonantState {
    /// Backward amplitude in the `a e^{ikx} + b e^{-ikx}` convention on [0, l_e].
    pub fn b_at_origin(&self, k: Complex64, lengths: &[f64]) -> Vec<Complex64> {
        self.b.iter().zip(lengths).map(|(b, &l)| b * (Complex64::i() * k * l).exp()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Resonance {
    pub k: Complex64,
    pub residual: f64,
    pub multiplicity: u32,
    /// Newton did not converge or the zero is an unresolved cluster.
    pub degraded: bool,
    pub state: Option<ResonantState>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FinderStats {
    pub tiles: usize,
    pub subdivisions: usize,
    pub additivity_checks: usize,
    pub additivity_violations: usize,
    pub jitters: usize,
    pub clusters: usize,
    pub duplicates: usize,
}

impl FinderStats {
    fn absorb(&mut self, o: &FinderStats) {
        self.tiles += o.tiles;
        self.subdivisions += o.subdivisions;
        self.additivity_checks += o.additivity_checks;
        self.additivity_violations += o.additivity_violations;
        self.jitters += o.jitters;
        self.clusters += o.clusters;
        self.duplicates += o.duplicates;
    }
}

#[derive(Debug, Clone)]
pub struct FinderReport {
    /// Sorted by (σ, τ).
    pub resonances: Vec<Resonance>,
    /// Sum of tile winding numbers.
    pub total_winding: i64,
    pub stats: FinderStats,
}

impl FinderReport {
    pub fn total_multiplicity(&self) -> i64 {
        self.resonances.iter().map(|r| r.multiplicity as i64).sum()
    }

    /// Winding counts were additive and every counted zero was reported.
    pub fn is_consistent(&self) -> bool {
        self.stats.additivity_violations == 0 && self.total_multiplicity() == self.total_winding
    }
}

// 10-point Gauss–Legendre rule on [-1, 1].
const GL_X: [f64; 5] =
    [0.148_874_338_981_631_2, 0.433_395_394_129_247_2, 0.679_409_568_299_024_4, 0.865_063_366_688_984_5, 0.973_906_528_517_171_7];
const GL_W: [f64; 5] =
    [0.295_524_224_714_752_9, 0.269_266_719_309_996_3, 0.219_086_362_515_982, 0.149_451_349_150_580_6, 0.066_671_344_308_688_1];

#[derive(Debug, Clone, Copy)]
struct Rect {
    s0: f64,
    s1: f64,
    t0: f64,
    t1: f64,
}

impl Rect {
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.s0, self.t0),
            Complex64::new(self.s1, self.t0),
            Complex64::new(self.s1, self.t1),
            Complex64::new(self.s0, self.t1),
        ]
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.s0 + self.s1), 0.5 * (self.t0 + self.t1))
    }

    fn size(&self) -> f64 {
        (self.s1 - self.s0).max(self.t1 - self.t0)
    }

    fn contains(&self, k: Complex64, margin: f64) -> bool {
        k.re >= self.s0 - margin && k.re <= self.s1 + margin && k.im >= self.t0 - margin && k.im <= self.t1 + margin
    }
}

/// Oriented-segment integrals of g = f'/f with moments about the start point.
#[derive(Debug, Clone, Copy)]
struct Segment {
    start: Complex64,
    /// Snapped argument change of f.
    arg: f64,
    i0: Complex64,
    i1: Complex64,
    i2: Complex64,
}

impl Segment {
    fn reversed(&self, end: Complex64) -> Segment {
        // Moments about the new start point `end`.
        let d = self.start - end;
        Segment {
            start: end,
            arg: -self.arg,
            i0: -self.i0,
            i1: -(self.i1 + d * self.i0),
            i2: -(self.i2 + 2.0 * d * self.i1 + d * d * self.i0),
        }
    }

    fn moments_about(&self, c: Complex64) -> (Complex64, Complex64, Complex64) {
        let d = self.start - c;
        (self.i0, self.i1 + d * self.i0, self.i2 + 2.0 * d * self.i1 + d * d * self.i0)
    }
}

#[derive(Debug, Clone, Copy)]
struct ContourSums {
    winding: i64,
    /// (1/2πi)∮ (k - c) g and (1/2πi)∮ (k - c)² g about the box centre.
    s1: Complex64,
    s2: Complex64,
}

/// Which side of a box a failed contour integral belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

const SIDES: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

type SegmentCache = HashMap<[u64; 4], Segment>;

fn key(a: Complex64, b: Complex64) -> [u64; 4] {
    [a.re.to_bits(), a.im.to_bits(), b.re.to_bits(), b.im.to_bits()]
}

fn jitter_offset(attempt: usize) -> f64 {
    // δ, -δ, 2δ, -2δ, ...
    let m = (attempt / 2 + 1) as f64;
    if attempt % 2 == 0 { m } else { -m }
}

struct Finder<'a> {
    sf: &'a SecularFunction,
    cfg: &'a FinderConfig,
}

impl Finder<'_> {
    fn min_segment(&self, a: Complex64) -> f64 {
        1e-11 * a.norm().max(1.0)
    }

    fn value(&self, k: Complex64) -> Result<ScaledComplex> {
        let v = self.sf.value(k);
        if v.is_zero() || !v.mantissa.norm().is_finite() {
            return Err(Error::BoundaryZero { re: k.re, im: k.im });
        }
        Ok(v)
    }

    /// Gauss–Legendre on [a, b]: integrals of g, (k-a) g, (k-a)² g and the
    /// smallest 1/|g| at the nodes (a proxy for the distance to the nearest zero).
    fn gauss(&self, a: Complex64, b: Complex64) -> Result<(Complex64, Complex64, Complex64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let (mut i0, mut i1, mut i2) = (Complex64::default(), Complex64::default(), Complex64::default());
        let mut min_inv = f64::INFINITY;
        for (x, w) in GL_X.iter().zip(GL_W.iter()) {
            for s in [-1.0, 1.0] {
                let k = mid + half * (s * x);
                let ev = self.sf.evaluate(k);
                let g = ev.log_derivative.ok_or(Error::BoundaryZero { re: k.re, im: k.im })?;
                if !g.norm().is_finite() {
                    return Err(Error::BoundaryZero { re: k.re, im: k.im });
                }
                let wg = g * (w * half);
                let d = k - a;
                i0 += wg;
                i1 += wg * d;
                i2 += wg * d * d;
                min_inv = min_inv.min(1.0 / g.norm());
            }
        }
        Ok((i0, i1, i2, min_inv))
    }

    fn segment(&self, a: Complex64, b: Complex64, fa: ScaledComplex, fb: ScaledComplex, depth: usize) -> Result<Segment> {
        let h = (b - a).norm();
        if h < self.min_segment(a) || depth > 200 {
            let m = 0.5 * (a + b);
            return Err(Error::BoundaryZero { re: m.re, im: m.im });
        }
        let (i0, i1, i2, min_inv) = self.gauss(a, b)?;
        if min_inv >= 0.5 * h && i0.im.abs() < 1.0 {
            let ratio = fb.ratio(fa);
            let exact = Complex64::new(ratio.norm().ln(), ratio.arg());
            if (i0 - exact).norm() < self.cfg.segment_tol * (1.0 + exact.re.abs()) {
                return Ok(Segment { start: a, arg: exact.im, i0, i1, i2 });
            }
        }
        let m = 0.5 * (a + b);
        let fm = self.value(m)?;
        let left = self.segment(a, m, fa, fm, depth + 1)?;
        let right = self.segment(m, b, fm, fb, depth + 1)?;
        let (r0, r1, r2) = right.moments_about(a);
        Ok(Segment { start: a, arg: left.arg + right.arg, i0: left.i0 + r0, i1: left.i1 + r1, i2: left.i2 + r2 })
    }

    fn side(&self, a: Complex64, b: Complex64, cache: &mut SegmentCache) -> Result<Segment> {
        if let Some(s) = cache.get(&key(a, b)) {
            return Ok(*s);
        }
        if let Some(s) = cache.get(&key(b, a)) {
            return Ok(s.reversed(b));
        }
        let fa = self.value(a)?;
        let fb = self.value(b)?;
        let s = self.segment(a, b, fa, fb, 0)?;
        cache.insert(key(a, b), s);
        Ok(s)
    }

    fn contour(&self, rect: &Rect, cache: &mut SegmentCache) -> std::result::Result<ContourSums, (Side, Error)> {
        let c = rect.corners();
        let center = rect.center();
        let (mut arg, mut raw) = (0.0, 0.0);
        let (mut s1, mut s2) = (Complex64::default(), Complex64::default());
        for (i, side) in SIDES.iter().enumerate() {
            let seg = self.side(c[i], c[(i + 1) % 4], cache).map_err(|e| (*side, e))?;
            let (m0, m1, m2) = seg.moments_about(center);
            arg += seg.arg;
            raw += m0.im;
            s1 += m1;
            s2 += m2;
        }
        let snapped = arg / (2.0 * PI);
        let winding = snapped.round();
        let raw = raw / (2.0 * PI);
        if (snapped - winding).abs() > 1e-6 || (raw - winding).abs() > self.cfg.winding_tol {
            return Err((Side::Bottom, Error::NonIntegerWinding { raw }));
        }
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        Ok(ContourSums { winding: winding as i64, s1: s1 / two_pi_i, s2: s2 / two_pi_i })
    }

    fn newton(&self, start: Complex64, mult: u32, rect: &Rect) -> Option<(Complex64, bool)> {
        let m = mult as f64;
        let tol = self.cfg.newton_tol.powf(1.0 / m);
        let mut k = start;
        for _ in 0..self.cfg.newton_max_iter {
            let ev = self.sf.evaluate(k);
            if ev.value.is_zero() {
                return Some((k, true));
            }
            let g = match ev.log_derivative {
                Some(g) => g,
                None => ev.derivative.ratio(ev.value),
            };
            let step = m / g;
            if !step.norm().is_finite() {
                return None;
            }
            k -= step;
            if !rect.contains(k, rect.size()) {
                return None;
            }
            if step.norm() < tol * (1.0 + k.norm()) {
                return Some((k, true));
            }
        }
        Some((k, false))
    }

    fn resonance(&self, k: Complex64, multiplicity: u32, degraded: bool) -> Resonance {
        let residual = self.sf.value(k).abs();
        Resonance { k, residual, multiplicity, degraded, state: None }
    }

    fn solve(
        &self,
        rect: Rect,
        sums: ContourSums,
        depth: usize,
        cache: &mut SegmentCache,
        out: &mut Vec<Resonance>,
        stats: &mut FinderStats,
    ) -> Result<()> {
        let m = sums.winding;
        if m == 0 {
            return Ok(());
        }
        if m < 0 {
            return Err(Error::NonIntegerWinding { raw: m as f64 });
        }
        let center = rect.center();
        let size = rect.size();
        let margin = 1e-10 * (1.0 + center.norm());
        let mean = sums.s1 / m as f64;
        if m == 1 {
            if let Some((k, true)) = self.newton(center + sums.s1, 1, &rect) {
                if rect.contains(k, margin) {
                    out.push(self.resonance(k, 1, false));
                    return Ok(());
                }
            }
        } else {
            let spread = (sums.s2 / m as f64 - mean * mean).norm().sqrt();
            if spread < 1e-3 * size {
                if let Some((k, true)) = self.newton(center + mean, m as u32, &rect) {
                    if rect.contains(k, margin) && self.confirm_multiplicity(k, m, size)? {
                        out.push(self.resonance(k, m as u32, false));
                        return Ok(());
                    }
                }
            }
        }
        if depth >= self.cfg.max_depth || size < self.cfg.min_box {
            stats.clusters += 1;
            out.push(self.resonance(center + mean, m as u32, true));
            return Ok(());
        }

        let vertical = rect.s1 - rect.s0 >= rect.t1 - rect.t0;
        let mut last_err = Error::CountMismatch { parent: m, children: -1 };
        for attempt in 0..=self.cfg.max_jitter {
            let offset = if attempt == 0 { 0.0 } else { jitter_offset(attempt - 1) * self.cfg.jitter_fraction * size };
            let (a, b) = if vertical {
                let x = 0.5 * (rect.s0 + rect.s1) + offset;
                (Rect { s1: x, ..rect }, Rect { s0: x, ..rect })
            } else {
                let y = 0.5 * (rect.t0 + rect.t1) + offset;
                (Rect { t1: y, ..rect }, Rect { t0: y, ..rect })
            };
            if attempt > 0 {
                stats.jitters += 1;
            }
            let (ca, cb) = match (self.contour(&a, cache), self.contour(&b, cache)) {
                (Ok(ca), Ok(cb)) => (ca, cb),
                (Err((_, e)), _) | (_, Err((_, e))) => {
                    last_err = e;
                    continue;
                }
            };
            stats.additivity_checks += 1;
            if ca.winding + cb.winding != m {
                stats.additivity_violations += 1;
                last_err = Error::CountMismatch { parent: m, children: ca.winding + cb.winding };
                continue;
            }
            stats.subdivisions += 1;
            self.solve(a, ca, depth + 1, cache, out, stats)?;
            return self.solve(b, cb, depth + 1, cache, out, stats);
        }
        Err(last_err)
    }

    /// A small square around `k` must wind exactly `m` times.
    fn confirm_multiplicity(&self, k: Complex64, m: i64, size: f64) -> Result<bool> {
        let r = (1e-4 * size).max(1e-7 * (1.0 + k.norm()));
        let rect = Rect { s0: k.re - r, s1: k.re + r, t0: k.im - r, t1: k.im + r };
        let mut cache = SegmentCache::new();
        match self.contour(&rect, &mut cache) {
            Ok(c) => Ok(c.winding == m),
            Err(_) => Ok(false),
        }
    }
}

/// σ-intervals of the region outside the strip |σ| < k_floor.
fn sigma_intervals(region: &SearchRegion, k_floor: f64) -> Vec<(f64, f64)> {
    let (a, b) = (region.sigma_min, region.sigma_max);
    if b <= -k_floor || a >= k_floor {
        return vec![(a, b)];
    }
    let mut out = Vec::new();
    if a < -k_floor {
        out.push((a, -k_floor));
    }
    if b > k_floor {
        out.push((k_floor, b));
    }
    out
}

struct Tiling {
    rects: Vec<Rect>,
    sums: Vec<ContourSums>,
    jitters: usize,
}

fn tile_region(finder: &Finder<'_>, region: &SearchRegion) -> Result<Tiling> {
    let cfg = finder.cfg;
    if region.tau_max > cfg.tau_cap {
        return Err(Error::InvalidParameter(format!(
            "tau_max {} exceeds tau_cap {}",
            region.tau_max, cfg.tau_cap
        )));
    }
    // Column lines per interval; tiles reference lines by index so a jittered
    // line moves both neighbours.
    let mut lines: Vec<f64> = Vec::new();
    let mut tiles: Vec<(usize, usize)> = Vec::new();
    for (a, b) in sigma_intervals(region, cfg.k_floor) {
        let n = ((b - a) / cfg.tile_width).ceil().max(1.0) as usize;
        let first = lines.len();
        for i in 0..=n {
            lines.push(if i == n { b } else { a + (b - a) * i as f64 / n as f64 });
        }
        tiles.extend((0..n).map(|i| (first + i, first + i + 1)));
    }
    let base_lines = lines.clone();
    let mut line_attempts = vec![0usize; lines.len()];
    let mut bottoms = vec![region.tau_min; tiles.len()];
    let mut tops = vec![region.tau_max; tiles.len()];
    let mut bottom_attempts = vec![0usize; tiles.len()];
    let mut top_attempts = vec![0usize; tiles.len()];
    let mut sums: Vec<Option<ContourSums>> = vec![None; tiles.len()];
    let mut jitters = 0;

    let rect_of = |i: usize, lines: &[f64], bottoms: &[f64], tops: &[f64]| Rect {
        s0: lines[tiles[i].0],
        s1: lines[tiles[i].1],
        t0: bottoms[i],
        t1: tops[i],
    };

    loop {
        let pending: Vec<usize> = (0..tiles.len()).filter(|&i| sums[i].is_none()).collect();
        if pending.is_empty() {
            break;
        }
        let eval = |&i: &usize| {
            let rect = rect_of(i, &lines, &bottoms, &tops);
            let mut cache = SegmentCache::new();
            (i, finder.contour(&rect, &mut cache))
        };
        let results: Vec<_> = if cfg.parallel {
            pending.par_iter().map(eval).collect()
        } else {
            pending.iter().map(eval).collect()
        };
        for (i, res) in results {
            match res {
                Ok(s) => sums[i] = Some(s),
                Err((side, err)) => {
                    if !matches!(err, Error::BoundaryZero { .. }) {
                        return Err(err);
                    }
                    let rect = rect_of(i, &lines, &bottoms, &tops);
                    let delta = cfg.jitter_fraction * rect.size();
                    jitters += 1;
                    let bump = |attempts: &mut usize| -> Result<f64> {
                        if *attempts >= cfg.max_jitter {
                            return Err(err.clone());
                        }
                        let o = jitter_offset(*attempts) * delta;
                        *attempts += 1;
                        Ok(o)
                    };
                    match side {
                        Side::Bottom => bottoms[i] = region.tau_min + bump(&mut bottom_attempts[i])?,
                        Side::Top => {
                            // Never push the top above the cap.
                            let o = bump(&mut top_attempts[i])?;
                            tops[i] = region.tau_max - o.abs();
                        }
                        Side::Left | Side::Right => {
                            let line = if side == Side::Left { tiles[i].0 } else { tiles[i].1 };
                            let o = bump(&mut line_attempts[line])?;
                            lines[line] = base_lines[line] + o;
                            for (j, t) in tiles.iter().enumerate() {
                                if t.0 == line || t.1 == line {
                                    sums[j] = None;
                                }
                            }
                        }
                    }
                    sums[i] = None;
                }
            }
        }
    }
    let rects = (0..tiles.len()).map(|i| rect_of(i, &lines, &bottoms, &tops)).collect();
    Ok(Tiling { rects, sums: sums.into_iter().map(|s| s.expect("all tiles resolved")).collect(), jitters })
}

/// Number of zeros of f in the region, counted with multiplicity.
pub fn count_zeros(sf: &SecularFunction, region: &SearchRegion, cfg: &FinderConfig) -> Result<i64> {
    let finder = Finder { sf, cfg };
    let tiling = tile_region(&finder, region)?;
    Ok(tiling.sums.iter().map(|s| s.winding).sum())
}

pub fn find_resonances(sf: &SecularFunction, region: &SearchRegion, cfg: &FinderConfig) -> Result<FinderReport> {
    let finder = Finder { sf, cfg };
    let tiling = tile_region(&finder, region)?;
    let total_winding = tiling.sums.iter().map(|s| s.winding).sum();
    let work = |i: usize| -> Result<(Vec<Resonance>, FinderStats)> {
        let mut out = Vec::new();
        let mut stats = FinderStats { tiles: 1, ..Default::default() };
        let mut cache = SegmentCache::new();
        finder.solve(tiling.rects[i], tiling.sums[i], 0, &mut cache, &mut out, &mut stats)?;
        Ok((out, stats))
    };
    let parts: Vec<Result<(Vec<Resonance>, FinderStats)>> = if cfg.parallel {
        (0..tiling.rects.len()).into_par_iter().map(work).collect()
    } else {
        (0..tiling.rects.len()).map(work).collect()
    };
    let mut stats = FinderStats { jitters: tiling.jitters, ..Default::default() };
    let mut all = Vec::new();
    for p in parts {
        let (res, st) = p?;
        stats.absorb(&st);
        all.extend(res);
    }
    all.sort_by(|a, b| a.k.re.total_cmp(&b.k.re).then(a.k.im.total_cmp(&b.k.im)));
    let mut merged: Vec<Resonance> = Vec::with_capacity(all.len());
    for r in all {
        let dup = merged
            .iter_mut()
            .rev()
            .take_while(|m| r.k.re - m.k.re <= cfg.dedup_tol)
            .find(|m| (m.k - r.k).norm() <= cfg.dedup_tol);
        match dup {
            Some(m) => {
                stats.duplicates += 1;
                m.multiplicity += r.multiplicity;
            }
            None => merged.push(r),
        }
    }
    if cfg.extract_states {
        let fill = |r: &mut Resonance| r.state = extract_state(sf, r.k).ok();
        if cfg.parallel {
            merged.par_iter_mut().for_each(fill);
        } else {
            merged.iter_mut().for_each(fill);
        }
    }
    Ok(FinderReport { resonances: merged, total_winding, stats })
}

/// A depth M such that every zero of f lies in -M <= τ.
///
/// When U is invertible, U D x = x forces e^{-τ l_min} <= 1/s_min(U), which
/// bounds τ from below. Otherwise zeros are counted in a fixed σ-window with
/// doubling depth until the count stops growing.
pub fn band_depth(sf: &SecularFunction, cfg: &FinderConfig) -> Result<f64> {
    let bs = sf.scattering();
    if bs.num_bonds() == 0 {
        return Ok(1.0);
    }
    let l_min = sf.lengths().iter().copied().fold(f64::INFINITY, f64::min);
    let sv = bs.u.clone().singular_values();
    let s_max = sv.max();
    let s_min = sv.min();
    if s_min > 1e-10 * s_max {
        return Ok(1.05 * (-s_min.ln()).max(0.0) / l_min + 1e-2);
    }
    let width = (4.0 * PI / l_min).max(20.0);
    let cfg = FinderConfig { extract_states: false, ..cfg.clone() };
    let count = |depth: f64| {
        let region = SearchRegion::new(0.5, 0.5 + width, -depth, cfg.tau_cap.min(1e-6))?;
        count_zeros(sf, &region, &cfg)
    };
    let mut depth = 1.0;
    let mut prev = count(depth)?;
    while depth < 256.0 {
        let next = count(2.0 * depth)?;
        if next == prev {
            break;
        }
        prev = next;
        depth *= 2.0;
    }
    Ok(2.0 * depth)
}

/// Null vector of M(k) and the outgoing lead amplitudes.
pub fn extract_state(sf: &SecularFunction, k: Complex64) -> Result<ResonantState> {
    let bs = sf.scattering();
    let n = bs.num_edges();
    if n == 0 {
        return Err(Error::NotAResonance { re: k.re, im: k.im, sigma: 1.0 });
    }
    let m = sf.matrix(k);
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^H");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let largest = svd.singular_values[order[order.len() - 1]].max(f64::MIN_POSITIVE);
    let sigma_min = svd.singular_values[order[0]] / largest;
    let sigma_second = order.get(1).map_or(1.0, |&i| svd.singular_values[i] / largest);
    if sigma_min > 1e-6 {
        return Err(Error::NotAResonance { re: k.re, im: k.im, sigma: sigma_min });
    }
    let mut x: DVector<Complex64> = v_t.row(order[0]).adjoint();
    let d = phases(sf.lengths(), k);
    let dx = DVector::from_fn(x.len(), |j, _| d[j] * x[j]);
    let t_o = bs.t_o.map(Complex64::from);
    let mut t = &t_o * dx;
    let t_norm = t.norm() / x.norm();
    let lead_normalized = t_norm > 1e-10;
    let scale = if lead_normalized { t.norm() } else { x.norm() };
    x /= Complex64::from(scale);
    t /= Complex64::from(scale);
    Ok(ResonantState {
        a: x.rows(0, n).iter().copied().collect(),
        b: x.rows(n, n).iter().copied().collect(),
        t_out: t.iter().copied().collect(),
        sigma_min,
        sigma_second,
        degenerate: sigma_second < 1e-6,
        lead_normalized,
        t_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::catalog;
    use std::f64::consts::LN_2;

    fn star3() -> SecularFunction {
        SecularFunction::from_graph(&catalog("star", &[1.0, 3.0], None).unwrap(), true)
    }

    #[test]
    fn counts_single_star_resonance() {
        let region = SearchRegion::new(1.0, 2.2, -0.6, 0.01).unwrap();
        let cfg = FinderConfig { tau_cap: 0.01, ..Default::default() };
        assert_eq!(count_zeros(&star3(), &region, &cfg).unwrap(), 1);
    }

    #[test]
    fn upper_half_plane_is_empty() {
        let sf = SecularFunction::from_graph(&catalog("Y", &[1.0, 2.0], None).unwrap(), true);
        let region = SearchRegion::new(5.0, 6.0, 0.5, 1.0).unwrap();
        let cfg = FinderConfig { tau_cap: 1.0, ..Default::default() };
        assert_eq!(count_zeros(&sf, &region, &cfg).unwrap(), 0);
    }

    #[test]
    fn circle_eigenvalue_is_double() {
        let g = catalog("circular", &[1.0], Some(&[2.0 * PI])).unwrap();
        let sf = SecularFunction::from_graph(&g, false);
        let region = SearchRegion::new(0.5, 1.5, -0.5, 1e-6).unwrap();
        assert_eq!(count_zeros(&sf, &region, &FinderConfig::default()).unwrap(), 2);
        let rep = find_resonances(&sf, &region, &FinderConfig::default()).unwrap();
        assert_eq!(rep.resonances.len(), 1);
        assert_eq!(rep.resonances[0].multiplicity, 2);
        assert!((rep.resonances[0].k - Complex64::new(1.0, 0.0)).norm() < 1e-8);
        assert!(rep.is_consistent());
    }

    #[test]
    fn star_resonances_in_window() {
        let region = SearchRegion::new(0.0, 10.0, -1.0, 0.01).unwrap();
        let cfg = FinderConfig { tau_cap: 0.01, ..Default::default() };
        let rep = find_resonances(&star3(), &region, &cfg).unwrap();
        let sigmas: Vec<f64> = rep.resonances.iter().map(|r| r.k.re).collect();
        assert_eq!(sigmas.len(), 3, "{sigmas:?}");
        for (j, r) in rep.resonances.iter().enumerate() {
            let expected = Complex64::new((1 + 2 * j) as f64 * PI / 2.0, -LN_2 / 2.0);
            assert!((r.k - expected).norm() < 1e-8, "{:?}", r.k);
            let st = r.state.as_ref().unwrap();
            assert!(st.lead_normalized && st.t_norm > 0.0);
        }
        assert!(rep.is_consistent());
    }

    #[test]
    fn rejects_region_above_cap() {
        let region = SearchRegion::new(1.0, 2.0, -1.0, 0.5).unwrap();
        assert!(matches!(
            find_resonances(&star3(), &region, &FinderConfig::default()),
            Err(Error::InvalidParameter(_))
        ));
        assert!(SearchRegion::new(2.0, 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn extract_state_rejects_non_resonance() {
        assert!(matches!(
            extract_state(&star3(), Complex64::new(1.0, -0.1)),
            Err(Error::NotAResonance { .. })
        ));
    }

    #[test]
    fn simple_resonance_has_one_dimensional_null_space() {
        let k0 = Complex64::new(PI / 2.0, -LN_2 / 2.0);
        let st = extract_state(&star3(), k0).unwrap();
        assert!(st.sigma_second > 1e-3);
        assert!(!st.degenerate);
    }

    #[test]
    fn band_depth_bounds_star_resonances() {
        let d = band_depth(&star3(), &FinderConfig::default()).unwrap();
        assert!(d >= LN_2 / 2.0 && d < 2.0, "{d}");
        // One lead at an edge end gives a degree-2 vertex with zero reflection: U is singular.
        let g = catalog("interval_Gnn", &[1.0, 1.0, 2.0], None).unwrap();
        let sf = SecularFunction::from_graph(&g, true);
        let d = band_depth(&sf, &FinderConfig::default()).unwrap();
        let region = SearchRegion::new(0.5, 20.0, -d, 1e-6).unwrap();
        let deeper = SearchRegion::new(0.5, 20.0, -4.0 * d, 1e-6).unwrap();
        let cfg = FinderConfig::default();
        assert_eq!(count_zeros(&sf, &region, &cfg).unwrap(), count_zeros(&sf, &deeper, &cfg).unwrap());
    }

    #[test]
    fn splits_regions_around_origin() {
        let r = SearchRegion::new(-2.0, 3.0, -1.0, 0.0).unwrap();
        assert_eq!(sigma_intervals(&r, 1e-3), vec![(-2.0, -1e-3), (1e-3, 3.0)]);
        let r = SearchRegion::new(0.0, 3.0, -1.0, 0.0).unwrap();
        assert_eq!(sigma_intervals(&r, 1e-3), vec![(1e-3, 3.0)]);
    }
}
