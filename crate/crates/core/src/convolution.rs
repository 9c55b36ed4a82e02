//! Free additive convolution by analytic subordination.
//!
//! With `F = 1/G` and `h = F − id`, the subordination function `ω₁` of
//! `μ ⊞ ν` is the attracting fixed point of `w ↦ z + h_ν(z + h_μ(w))` on the
//! upper half-plane; then `ω₂ = z + h_μ(ω₁)` and `G_{μ⊞ν}(z) = G_μ(ω₁(z))`.

use std::cell::Cell;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FgigError, Result};
use crate::measures::{Interpolation, SpectralMeasure};
use crate::transforms::{stieltjes_estimate, EpsLadder, StieltjesEstimate};

const MAX_ITER: usize = 500;
const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubordinationPair {
    pub omega1: Complex64,
    pub omega2: Complex64,
    pub iterations: usize,
    /// `|ω₁ − T(ω₁)|` at exit
    pub residual: f64,
}

impl SubordinationPair {
    /// `|ω₁ + ω₂ − 1/G(z) − z|` with `G = G_ν(ω₂)`, an independent route to `G_μ(ω₁)`.
    pub fn identity_residual(&self, nu: &SpectralMeasure, z: Complex64) -> f64 {
        let g = nu.cauchy_unchecked(self.omega2);
        (self.omega1 + self.omega2 - 1.0 / g - z).norm()
    }
}

fn h_transform(m: &SpectralMeasure, w: Complex64) -> Complex64 {
    1.0 / m.cauchy_unchecked(w) - w
}

/// Subordination functions of `μ ⊞ ν` at `z ∈ ℂ⁺`.
pub fn subordination_at(mu: &SpectralMeasure, nu: &SpectralMeasure, z: Complex64) -> Result<SubordinationPair> {
    subordination_seeded(mu, nu, z, None)
}

/// As [`subordination_at`], starting the iteration from `seed` (default `z + i`).
///
/// Damped fixed-point steps (factor ½) bring the iterate close; Newton steps
/// on `w − T(w)` then finish, each accepted only if it lowers the residual.
pub fn subordination_seeded(
    mu: &SpectralMeasure,
    nu: &SpectralMeasure,
    z: Complex64,
    seed: Option<Complex64>,
) -> Result<SubordinationPair> {
    if !(z.im > 0.0) {
        return Err(FgigError::domain(format!("subordination needs Im z > 0 (got {z})")));
    }
    let map = |w: Complex64| z + h_transform(nu, z + h_transform(mu, w));
    let mut w = match seed {
        Some(s) if s.im > 0.0 => s,
        _ => z + Complex64::new(0.0, 1.0),
    };
    let mut res = f64::INFINITY;
    for it in 0..MAX_ITER {
        let tw = map(w);
        res = (tw - w).norm();
        if !res.is_finite() {
            break;
        }
        if res <= TOL * w.norm().max(1.0) {
            let omega2 = z + h_transform(mu, w);
            return Ok(SubordinationPair { omega1: w, omega2, iterations: it, residual: res });
        }
        if res < 1e-3 * w.norm().max(1.0) {
            let h = 1e-7 * w.norm().max(1e-3);
            let d = (map(w + h) - map(w - h)) / (2.0 * h);
            let cand = w - (w - tw) / (1.0 - d);
            if cand.im > 0.0 && cand.re.is_finite() {
                let cres = (map(cand) - cand).norm();
                if cres < res {
                    w = cand;
                    continue;
                }
            }
        }
        w = 0.5 * (w + tw);
    }
    Err(FgigError::numeric("subordination_at", format!("no fixed point at z = {z}"), res))
}

/// `G_{μ⊞ν}(z)` via subordination.
pub fn convolved_cauchy(mu: &SpectralMeasure, nu: &SpectralMeasure, z: Complex64) -> Result<Complex64> {
    let s = subordination_at(mu, nu, z)?;
    Ok(mu.cauchy_unchecked(s.omega1))
}

/// Real grid for density recovery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionGrid {
    pub points: usize,
    /// extra room on each side, as a fraction of the width of the summed supports
    pub margin: f64,
    pub ladder: EpsLadder,
}

impl Default for ConvolutionGrid {
    fn default() -> Self {
        ConvolutionGrid { points: 2001, margin: 0.05, ladder: EpsLadder::default() }
    }
}

/// Recovered density together with diagnostics.
#[derive(Debug, Clone)]
pub struct Convolution {
    pub measure: SpectralMeasure,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// mass of the recovered density before any normalization
    pub raw_mass: f64,
}

/// `μ ⊞ ν` as a tabulated density (see [`free_convolve_detailed`]).
pub fn free_convolve(mu: &SpectralMeasure, nu: &SpectralMeasure, grid: &ConvolutionGrid) -> Result<SpectralMeasure> {
    Ok(free_convolve_detailed(mu, nu, grid)?.measure)
}

/// Density of `μ ⊞ ν` by Stieltjes inversion of `G_μ∘ω₁` on a uniform grid
/// spanning the sum of the supports. Grid points are independent and solved
/// in parallel; within a point the ε-ladder is warm-started rung to rung.
pub fn free_convolve_detailed(
    mu: &SpectralMeasure,
    nu: &SpectralMeasure,
    grid: &ConvolutionGrid,
) -> Result<Convolution> {
    if grid.points < 3 {
        return Err(FgigError::domain("convolution grid needs at least 3 points"));
    }
    let (l1, h1) = mu.support();
    let (l2, h2) = nu.support();
    let (lo, hi) = (l1 + l2, h1 + h2);
    let pad = grid.margin * (hi - lo).max(1e-12);
    // keep positive supports positive so that reciprocals stay defined
    let start = if lo > 0.0 { (lo - pad).max(0.5 * lo) } else { lo - pad };
    let (lo, hi) = (start, hi + pad);
    let n = grid.points;
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let estimate = |x: f64, ladder: &EpsLadder| {
        let warm = Cell::new(None);
        let g = |z: Complex64| -> Result<Complex64> {
            let s = subordination_seeded(mu, nu, z, warm.get())?;
            warm.set(Some(s.omega1));
            Ok(mu.cauchy_unchecked(s.omega1))
        };
        stieltjes_estimate(&g, x, ladder)
    };
    let mut est: Vec<StieltjesEstimate> =
        xs.par_iter().map(|&x| estimate(x, &grid.ladder)).collect::<Result<Vec<_>>>()?;
    // close to a square-root edge the ladder has to go below the distance to
    // the edge before it settles
    let peak = est.iter().fold(0.0f64, |m, e| m.max(e.value));
    let unsettled: Vec<usize> = (0..n).filter(|&i| est[i].spread > 1e-9 * peak).collect();
    let refined: Vec<StieltjesEstimate> = unsettled
        .par_iter()
        .map(|&i| {
            let mut best = est[i];
            for depth in 1..=3 {
                let ladder = EpsLadder { start: grid.ladder.start * 1e-2f64.powi(depth), ..grid.ladder };
                let e = estimate(xs[i], &ladder)?;
                if e.spread < best.spread {
                    best = e;
                }
                if best.spread <= 1e-9 * peak {
                    break;
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    for (&i, e) in unsettled.iter().zip(refined) {
        est[i] = e;
    }
    let ys = settle_density(&xs, &est);
    let measure = SpectralMeasure::tabulated_with(xs.clone(), ys.clone(), Vec::new(), Interpolation::RootCubic)?;
    let raw_mass = measure.mass();
    log::debug!("free_convolve: {} points on [{lo}, {hi}], raw mass {raw_mass}", n);
    Ok(Convolution { measure, grid: xs, density: ys, raw_mass })
}

/// Grid densities with unreliable points repaired.
///
/// Points whose ladder still has not settled are refilled by extending the
/// squared density of their settled neighbors, which is smooth across a
/// square-root edge. Noise outside the support is zeroed.
fn settle_density(xs: &[f64], est: &[StieltjesEstimate]) -> Vec<f64> {
    let peak = est.iter().fold(0.0f64, |m, e| m.max(e.value));
    let mut ys: Vec<f64> = est.iter().map(|e| e.value).collect();
    let mut good: Vec<bool> = est.iter().map(|e| e.spread <= 1e-5 * peak.max(1e-300)).collect();
    for y in ys.iter_mut() {
        if *y <= 1e-9 * peak {
            *y = 0.0;
        }
    }
    let n = xs.len();
    for _ in 0..8 {
        let mut changed = false;
        for i in 0..n {
            if good[i] {
                continue;
            }
            // squared density is smooth across a square-root edge; extend it
            // quadratically from three settled neighbors on one side
            let fit = |js: [usize; 3]| -> Option<f64> {
                if js.iter().all(|&j| good[j] && ys[j] > 0.0) {
                    let x = xs[i];
                    let mut q = 0.0;
                    for &j in &js {
                        let l: f64 = js.iter().filter(|&&k| k != j).map(|&k| (x - xs[k]) / (xs[j] - xs[k])).product();
                        q += l * ys[j] * ys[j];
                    }
                    Some(q)
                } else {
                    None
                }
            };
            let right = if i + 3 < n { fit([i + 1, i + 2, i + 3]) } else { None };
            let left = if i >= 3 { fit([i - 1, i - 2, i - 3]) } else { None };
            let q = match (left, right) {
                (Some(l), Some(r)) => Some(0.5 * (l + r)),
                (l, r) => l.or(r),
            };
            if let Some(q) = q {
                ys[i] = q.max(0.0).sqrt();
                good[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let bad = good.iter().filter(|g| !**g).count();
    if bad > 0 {
        log::debug!("free_convolve: {bad} grid points kept unsettled estimates");
    }
    ys
}
