//! R-transforms, Cauchy transforms, Stieltjes inversion and free cumulants.
//!
//! Sign conventions: R-transforms live on the closed lower half-plane and are
//! extended to the upper one by Schwarz reflection; Cauchy transforms are
//! evaluated on the upper half-plane.
//!
//! For `μ(α, β, λ)` with spectral roots `(γ, δ, η)`,
//!
//! ```text
//! r(z) = (−α + (λ+1)z + 2(z − δ)√(β(η − z))) / (2z(α − z)).
//! ```
//!
//! The numerator vanishes at `z = 0` for every `λ` and at `z = α` for
//! `λ < 0`; near those points the closed form cancels catastrophically and
//! local Taylor series are used instead.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FgigError, Result};
use crate::measures::{FreePoissonParams, SpectralMeasure};
use crate::params::{solve_support, spectral_roots, NaturalParams, SpectralRoots, SupportForm};
use crate::series::Series;

const SERIES_ORDER: usize = 24;
/// Local series are used within this fraction of their convergence radius.
const SERIES_REACH: f64 = 0.1;
/// Largest cumulant order served by [`free_cumulants`].
pub const MAX_CUMULANT_ORDER: usize = 64;

/// `√(β(η − z))` on the closed lower half-plane, principal branch, with the
/// cut approached from below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchedSqrtEvaluator {
    pub beta: f64,
    pub eta: f64,
}

impl BranchedSqrtEvaluator {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.beta.sqrt() * lower_sqrt(self.eta - z)
    }
}

/// Principal `√w` for `Im w ≥ 0`; a signed zero imaginary part is treated as
/// `+0`, which keeps the map continuous when `z = η − w` hugs ℝ from below.
fn lower_sqrt(w: Complex64) -> Complex64 {
    let w = if w.im == 0.0 { Complex64::new(w.re, 0.0) } else { w };
    w.sqrt()
}

/// `f(z) = 4β(z − δ)²(η − z)`, the polynomial under the square root.
pub fn branch_polynomial(p: &NaturalParams, r: &SpectralRoots, z: Complex64) -> Complex64 {
    4.0 * p.beta * (z - r.delta) * (z - r.delta) * (r.eta - z)
}

/// Cached evaluator of the fGIG R-transform.
#[derive(Debug, Clone)]
pub struct FgigRTransform {
    params: NaturalParams,
    roots: SpectralRoots,
    sqrt: BranchedSqrtEvaluator,
    at_zero: Series,
    zero_reach: f64,
    at_alpha: Option<(Series, f64)>,
}

impl FgigRTransform {
    pub fn new(p: &NaturalParams) -> Result<Self> {
        let roots = spectral_roots(p)?;
        Self::with_roots(p, roots)
    }

    pub fn with_roots(p: &NaturalParams, roots: SpectralRoots) -> Result<Self> {
        let at_zero = series_at_zero(p, &roots, SERIES_ORDER)?;
        let at_alpha = if p.lambda < 0.0 {
            let radius = p.alpha.min(roots.eta - p.alpha);
            Some((series_at_alpha(p, &roots, SERIES_ORDER)?, SERIES_REACH * radius))
        } else {
            None
        };
        Ok(FgigRTransform {
            params: *p,
            roots,
            sqrt: BranchedSqrtEvaluator { beta: p.beta, eta: roots.eta },
            at_zero,
            zero_reach: SERIES_REACH * p.alpha,
            at_alpha,
        })
    }

    pub fn params(&self) -> &NaturalParams {
        &self.params
    }

    pub fn roots(&self) -> &SpectralRoots {
        &self.roots
    }

    /// `r(z)`; the upper half-plane is reached by reflection.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z.im > 0.0 {
            return self.eval(z.conj()).map(|v| v.conj());
        }
        let p = &self.params;
        let alpha = p.alpha;
        if z.norm() < self.zero_reach {
            return Ok(self.at_zero.eval_complex(z));
        }
        let t = z - alpha;
        if t.im == 0.0 && t.re == 0.0 {
            if p.lambda > 0.0 {
                return Err(FgigError::Pole { location: alpha, residue: -p.lambda });
            }
            if p.lambda == 0.0 {
                return Err(FgigError::domain(format!(
                    "r is unbounded at the branch point z = {alpha} when lambda = 0"
                )));
            }
        }
        if let Some((series, reach)) = &self.at_alpha {
            if t.norm() < *reach {
                return Ok(series.eval_complex(t));
            }
        }
        if p.lambda == 0.0 {
            // η = α: the factor √(α − z) cancels once against the denominator
            let root = lower_sqrt(alpha - z);
            return Ok(-0.5 / z + p.beta.sqrt() * (z - self.roots.delta) / (z * root));
        }
        let num = -alpha + (p.lambda + 1.0) * z + 2.0 * (z - self.roots.delta) * self.sqrt.eval(z);
        Ok(num / (2.0 * z * (alpha - z)))
    }

    /// `z·r(z)`, the free cumulant transform.
    pub fn cumulant_transform(&self, z: Complex64) -> Result<Complex64> {
        Ok(z * self.eval(z)?)
    }
}

/// Taylor series of `r` at 0 in powers of `z`.
fn series_at_zero(p: &NaturalParams, r: &SpectralRoots, order: usize) -> Result<Series> {
    let n = order + 1;
    // √(β(η − t)) = √(βη)·√(1 − t/η)
    let mut inner = vec![0.0; n + 1];
    inner[0] = 1.0;
    inner[1] = -1.0 / r.eta;
    let root = Series::new(inner).sqrt()?.scale((p.beta * r.eta).sqrt());
    let lin = Series::variable(-r.delta, n);
    let mut num = &(&lin * &root).scale(2.0) + &Series::variable(0.0, n).scale(p.lambda + 1.0);
    num = num.add_scalar(-p.alpha);
    // the constant term vanishes identically (4βηδ² = α²)
    let reduced = num.shift_down();
    let den = Series::variable(-p.alpha, n - 1).scale(-2.0);
    reduced.div(&den).map(|s| s.truncate(order))
}

/// Taylor series of `r` at `α` in powers of `z − α`, for `λ < 0`.
fn series_at_alpha(p: &NaturalParams, r: &SpectralRoots, order: usize) -> Result<Series> {
    let n = order + 1;
    let gap = r.eta - p.alpha;
    let mut inner = vec![0.0; n + 1];
    inner[0] = gap;
    inner[1] = -1.0;
    let root = Series::new(inner).sqrt()?.scale(p.beta.sqrt());
    let lin = Series::variable(p.alpha - r.delta, n);
    let mut num = &(&lin * &root).scale(2.0) + &Series::variable(p.alpha, n).scale(p.lambda + 1.0);
    num = num.add_scalar(-p.alpha);
    // N(α) = λα + |λ|α = 0 for λ < 0
    let reduced = num.shift_down();
    let den = Series::variable(p.alpha, n - 1).scale(-2.0);
    reduced.div(&den).map(|s| s.truncate(order))
}

/// `r_{μ(α,β,λ)}(z)`.
pub fn r_fgig(p: &NaturalParams, z: Complex64) -> Result<Complex64> {
    FgigRTransform::new(p)?.eval(z)
}

/// `r_{ν(γ,λ)}(z) = γλ/(1 − γz)`.
pub fn r_free_poisson(fp: &FreePoissonParams, z: Complex64) -> Result<Complex64> {
    fp.check()?;
    let den = 1.0 - fp.jump * z;
    if den.re == 0.0 && den.im == 0.0 {
        return Err(FgigError::Pole { location: 1.0 / fp.jump, residue: -fp.rate });
    }
    Ok(fp.jump * fp.rate / den)
}

/// Free cumulants `κ_k = λγ^k` of `ν(γ, λ)`, `k = 1..=n`.
pub fn free_poisson_cumulants(fp: &FreePoissonParams, n: usize) -> Vec<f64> {
    (1..=n as i32).map(|k| fp.rate * fp.jump.powi(k)).collect()
}

/// `κ_1..κ_n` of `μ(α, β, λ)`: Taylor coefficients of `r` at 0.
pub fn free_cumulants(p: &NaturalParams, n: usize) -> Result<Vec<f64>> {
    if n > MAX_CUMULANT_ORDER {
        return Err(FgigError::domain(format!(
            "cumulant order {n} exceeds {MAX_CUMULANT_ORDER}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let roots = spectral_roots(p)?;
    Ok(series_at_zero(p, &roots, n - 1)?.into_coeffs())
}

/// `G_μ(z)`; errors when `z` lies on the support.
pub fn cauchy(m: &SpectralMeasure, z: Complex64) -> Result<Complex64> {
    if m.touches(z) {
        return Err(FgigError::domain(format!("z = {z} lies on the support")));
    }
    Ok(m.cauchy_unchecked(z))
}

/// Closed-form Cauchy transform of `μ(α, β, λ)`:
/// `½[α + (1−λ)/z − β/z² − (α/z + β/(√ab z²))√(z−a)√(z−b)]`.
pub fn fgig_cauchy(p: &NaturalParams, s: &SupportForm, z: Complex64) -> Complex64 {
    let c = p.beta / (s.a * s.b).sqrt();
    // product of principal roots: analytic off [a, b] and ~ z at infinity
    let root = (z - s.a).sqrt() * (z - s.b).sqrt();
    let inv = 1.0 / z;
    0.5 * (p.alpha + (1.0 - p.lambda) * inv - p.beta * inv * inv - (p.alpha * inv + c * inv * inv) * root)
}

/// Solve `r(w) + 1/w = z` for `w = G(z)`, `z ∈ ℂ⁺`.
///
/// Newton from `seed` (default `1/z`); on failure, continuation along a
/// vertical path from far above `z`, refined up to eight times.
pub fn cauchy_from_r(
    r: &dyn Fn(Complex64) -> Result<Complex64>,
    z: Complex64,
    seed: Option<Complex64>,
) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(FgigError::domain(format!("cauchy_from_r needs Im z > 0 (got {z})")));
    }
    let start = seed.unwrap_or(1.0 / z);
    if let Ok(w) = newton_inverse(r, z, start) {
        return Ok(w);
    }
    let height = 1e3 * (1.0 + z.norm());
    let mut last = f64::INFINITY;
    for attempt in 0..8 {
        let steps = 8usize << attempt;
        let mut w = 1.0 / (z + Complex64::new(0.0, height));
        let mut ok = true;
        for j in 0..=steps {
            let s = 1.0 - j as f64 / steps as f64;
            let zj = z + Complex64::new(0.0, height * s * s * s);
            match newton_inverse(r, zj, w) {
                Ok(v) => w = v,
                Err(FgigError::Numeric { residual, .. }) => {
                    last = residual;
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            return Ok(w);
        }
    }
    Err(FgigError::numeric("cauchy_from_r", format!("no convergence at z = {z}"), last))
}

fn newton_inverse(r: &dyn Fn(Complex64) -> Result<Complex64>, z: Complex64, seed: Complex64) -> Result<Complex64> {
    let tol = 1e-12 * z.norm().max(1.0);
    let resid = |w: Complex64| -> Result<Complex64> { Ok(r(w)? + 1.0 / w - z) };
    let mut w = seed;
    if w.im > 0.0 {
        w = w.conj();
    }
    let mut f = match resid(w) {
        Ok(f) => f,
        Err(_) => return Err(FgigError::numeric("cauchy_from_r", "seed outside domain", f64::INFINITY)),
    };
    for _ in 0..100 {
        if f.norm() <= tol {
            return Ok(w);
        }
        let h = 1e-7 * w.norm().max(1e-3);
        let d = match (r(w + h), r(w - h)) {
            (Ok(a), Ok(b)) => (a - b) / (2.0 * h) - 1.0 / (w * w),
            _ => break,
        };
        if d.norm() == 0.0 || !d.re.is_finite() {
            break;
        }
        let step = f / d;
        let mut damp = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let cand = w - damp * step;
            if cand.im < 0.0 {
                if let Ok(fc) = resid(cand) {
                    if fc.norm() < f.norm() || fc.norm() <= tol {
                        w = cand;
                        f = fc;
                        moved = true;
                        break;
                    }
                }
            }
            damp *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if f.norm() <= tol {
        Ok(w)
    } else {
        Err(FgigError::numeric("cauchy_from_r", format!("Newton stalled at z = {z}"), f.norm()))
    }
}

/// Geometric ladder of imaginary offsets for Stieltjes inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsLadder {
    pub start: f64,
    pub ratio: f64,
    pub rungs: usize,
}

impl Default for EpsLadder {
    fn default() -> Self {
        EpsLadder { start: 1e-2, ratio: 0.5, rungs: 8 }
    }
}

impl EpsLadder {
    pub fn values(&self) -> Vec<f64> {
        (0..self.rungs).map(|k| self.start * self.ratio.powi(k as i32)).collect()
    }
}

/// Extrapolated Stieltjes value with the disagreement of neighboring estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StieltjesEstimate {
    pub value: f64,
    pub spread: f64,
    /// largest `|h_ε(x)|` on the ladder
    pub scale: f64,
}

/// Density at `x` from `h_ε(x) = −Im G(x + iε)/π`, extrapolated to `ε = 0`.
///
/// Quadratic extrapolation over sliding triples of the ladder; the estimate
/// whose neighbor agrees best is returned, clamped at 0.
pub fn stieltjes_density(
    g: &dyn Fn(Complex64) -> Result<Complex64>,
    x: f64,
    ladder: &EpsLadder,
) -> Result<f64> {
    let est = stieltjes_estimate(g, x, ladder)?;
    if !(est.spread <= 1e-2 * est.scale || est.spread <= 1e-12) {
        return Err(FgigError::numeric(
            "stieltjes_density",
            format!("ladder did not settle at x = {x}"),
            est.spread,
        ));
    }
    Ok(est.value)
}

/// As [`stieltjes_density`] but never rejects; callers judge `spread`.
pub fn stieltjes_estimate(
    g: &dyn Fn(Complex64) -> Result<Complex64>,
    x: f64,
    ladder: &EpsLadder,
) -> Result<StieltjesEstimate> {
    if ladder.rungs < 4 || !(ladder.ratio > 0.0 && ladder.ratio < 1.0) || !(ladder.start > 0.0) {
        return Err(FgigError::domain("epsilon ladder needs >= 4 rungs and ratio in (0,1)"));
    }
    let eps = ladder.values();
    let mut h = Vec::with_capacity(eps.len());
    for e in &eps {
        h.push(-g(Complex64::new(x, *e))?.im / PI);
    }
    let est: Vec<f64> = (0..eps.len() - 2)
        .map(|i| neville_at_zero(&eps[i..i + 3], &h[i..i + 3]))
        .collect();
    let (best, spread) = est
        .windows(2)
        .map(|w| (w[1], (w[1] - w[0]).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least two estimates");
    let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(StieltjesEstimate { value: best.max(0.0), spread, scale })
}

/// Value at 0 of the interpolating polynomial through `(xs, ys)`.
pub(crate) fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

/// Sampling layout of the FID certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidGrid {
    /// real-part samples
    pub re_count: usize,
    /// depths below the axis, log-spaced
    pub depth_count: usize,
    /// samples on the half-circle around `α`
    pub arc_count: usize,
}

impl Default for FidGrid {
    fn default() -> Self {
        FidGrid { re_count: 200, depth_count: 200, arc_count: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidReport {
    pub params: NaturalParams,
    pub max_im: f64,
    pub worst_point: [f64; 2],
    pub samples: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Numerical check of `Im r ≤ 0` on the closed lower half-plane.
///
/// Samples a real-part × log-depth grid, the real axis itself (with the
/// neighborhood of `α` replaced by a small half-circle) and that half-circle.
pub fn fid_certificate(p: &NaturalParams, grid: &FidGrid) -> Result<FidReport> {
    const TOL: f64 = 1e-9;
    let rt = FgigRTransform::new(p)?;
    let roots = *rt.roots();
    let scale = 1f64.max(roots.eta).max(-roots.delta).max(p.alpha);
    let (lo, hi) = (-2.0 * scale, 3.0 * scale);
    let arc_radius = 1e-3 * p.alpha.min(1.0);
    let mut points: Vec<Complex64> = Vec::new();
    let nre = grid.re_count.max(2);
    let ndep = grid.depth_count.max(2);
    for i in 0..nre {
        let x = lo + (hi - lo) * i as f64 / (nre - 1) as f64;
        for j in 0..ndep {
            let y = scale * 10f64.powf(-12.0 + 14.0 * j as f64 / (ndep - 1) as f64);
            points.push(Complex64::new(x, -y));
        }
        if (x - p.alpha).abs() > arc_radius {
            points.push(Complex64::new(x, 0.0));
        }
    }
    for k in [roots.eta, roots.delta, roots.gamma, 0.0] {
        if (k - p.alpha).abs() > arc_radius {
            points.push(Complex64::new(k, 0.0));
        }
    }
    for i in 0..=grid.arc_count {
        let th = -PI * i as f64 / grid.arc_count.max(1) as f64;
        let z = p.alpha + arc_radius * Complex64::new(th.cos(), th.sin());
        points.push(Complex64::new(z.re, z.im.min(0.0)));
    }
    let mut max_im = f64::NEG_INFINITY;
    let mut worst = [0.0, 0.0];
    for z in &points {
        let v = rt.eval(*z)?;
        if v.im > max_im {
            max_im = v.im;
            worst = [z.re, z.im];
        }
    }
    Ok(FidReport {
        params: *p,
        max_im,
        worst_point: worst,
        samples: points.len(),
        tolerance: TOL,
        passed: max_im <= TOL,
    })
}

/// Closed-form Cauchy transform of `μ(α, β, λ)` with the support solved once.
pub fn fgig_cauchy_evaluator(p: &NaturalParams) -> Result<impl Fn(Complex64) -> Complex64> {
    let s = solve_support(p)?;
    let p = *p;
    Ok(move |z: Complex64| fgig_cauchy(&p, &s, z))
}
