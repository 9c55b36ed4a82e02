//! Behaviour of `μ(α, β, λ)` as `β ↓ 0`.
//!
//! The weak limit is `ν(1/α, λ)` for `λ ≥ 1`,
//! `(1−λ)/2·δ₀ + (1+λ)/2·ν((1+λ)/(2α), 1)` for `|λ| < 1` and `δ₀` for
//! `λ ≤ −1`. Along the way the support ends and the spectral roots `δ`, `η`
//! degenerate at regime-specific rates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FgigError, Result};
use crate::measures::{
    build_fgig_with, build_free_poisson, kolmogorov_distance, levy_distance, Atom, FreePoissonParams, SpectralMeasure,
};
use crate::params::{solve_support, solve_support_warm, spectral_roots_from_support, NaturalParams, SupportForm};
use crate::transforms::branch_polynomial;

const NODES: usize = 256;

/// Which case of the limit theorem applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[serde(rename = "lambda_ge_1")]
    LambdaGe1,
    #[serde(rename = "abs_lambda_lt_1")]
    AbsLambdaLt1,
    #[serde(rename = "lambda_le_minus_1")]
    LambdaLeMinus1,
}

impl Regime {
    /// `λ = 1` belongs to the first case and `λ = −1` to the last.
    pub fn of(lambda: f64) -> Regime {
        if lambda >= 1.0 {
            Regime::LambdaGe1
        } else if lambda > -1.0 {
            Regime::AbsLambdaLt1
        } else {
            Regime::LambdaLeMinus1
        }
    }
}

#[derive(Debug, Clone)]
pub struct LimitDescription {
    pub regime: Regime,
    pub limit: SpectralMeasure,
}

fn check_alpha(alpha: f64, lambda: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && lambda.is_finite()) {
        return Err(FgigError::domain(format!("need alpha > 0 and finite lambda (got {alpha}, {lambda})")));
    }
    Ok(())
}

/// Weak limit of `μ(α, β, λ)` as `β ↓ 0`.
pub fn limit_measure(alpha: f64, lambda: f64) -> Result<LimitDescription> {
    check_alpha(alpha, lambda)?;
    let regime = Regime::of(lambda);
    let limit = match regime {
        Regime::LambdaGe1 => build_free_poisson(&FreePoissonParams::new(1.0 / alpha, lambda)?, NODES)?,
        Regime::AbsLambdaLt1 => {
            let jump = (1.0 + lambda) / (2.0 * alpha);
            build_free_poisson(&FreePoissonParams::new(jump, 1.0)?, NODES)?
                .scaled(0.5 * (1.0 + lambda))?
                .with_atom(Atom { location: 0.0, weight: 0.5 * (1.0 - lambda) })?
        }
        Regime::LambdaLeMinus1 => SpectralMeasure::dirac(0.0),
    };
    Ok(LimitDescription { regime, limit })
}

/// Distance used to measure convergence to the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Kolmogorov,
    Levy,
}

/// One point of a convergence curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub eta: f64,
    pub distance: f64,
    pub metric: Metric,
}

fn check_betas(betas: &[f64]) -> Result<()> {
    if betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(FgigError::domain("betas must be positive"));
    }
    if betas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(FgigError::domain("betas must be strictly decreasing"));
    }
    Ok(())
}

/// Supports along decreasing `betas`, each solve warm-started from the
/// previous one. The first solve starts from `β = 0.1` when that lies above
/// the first target.
pub fn support_path(alpha: f64, lambda: f64, betas: &[f64]) -> Result<Vec<SupportForm>> {
    check_alpha(alpha, lambda)?;
    check_betas(betas)?;
    let mut out = Vec::with_capacity(betas.len());
    let mut prev: Option<SupportForm> = None;
    let mut at = betas.first().map(|b| b.max(0.1)).unwrap_or(0.1);
    for &beta in betas {
        // at most a decade per step
        loop {
            let next = (at * 0.1).max(beta);
            let target = if prev.is_none() { at } else { next };
            let p = NaturalParams::new(alpha, target, lambda)?;
            let s = match &prev {
                Some(s) => solve_support_warm(&p, s)?,
                None => solve_support(&p)?,
            };
            prev = Some(s);
            at = target;
            if target == beta {
                break;
            }
        }
        out.push(prev.expect("solved above"));
    }
    Ok(out)
}

/// Distance between `μ(α, β, λ)` and the limit for each `β`.
///
/// Kolmogorov distance when the limit is atomless. Otherwise the limit has an
/// atom at 0 that every `μ(α, β, λ)` misses, so the Kolmogorov distance stays
/// at least the atom weight and the Lévy distance is reported instead.
pub fn convergence_curve(alpha: f64, lambda: f64, betas: &[f64]) -> Result<Vec<ConvergencePoint>> {
    let lim = limit_measure(alpha, lambda)?;
    let metric = if lim.limit.atoms().iter().any(|a| a.weight > 0.0) { Metric::Levy } else { Metric::Kolmogorov };
    let path = support_path(alpha, lambda, betas)?;
    betas
        .iter()
        .zip(path)
        .map(|(&beta, s)| {
            let p = NaturalParams::new(alpha, beta, lambda)?;
            let m = build_fgig_with(&p, &s, NODES)?;
            let r = spectral_roots_from_support(&s)?;
            let distance = match metric {
                Metric::Kolmogorov => kolmogorov_distance(&m, &lim.limit),
                Metric::Levy => levy_distance(&m, &lim.limit),
            };
            log::debug!("convergence_curve: beta {beta:e}: distance {distance:e}");
            Ok(ConvergencePoint { beta, a: s.a, b: s.b, delta: r.delta, eta: r.eta, distance, metric })
        })
        .collect()
}

/// Power-law rates of the support ends, `a(β) ∝ β^{p_a}`, `b(β) ∝ β^{p_b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingExponents {
    pub p_a: f64,
    pub p_b: f64,
    /// raw least-squares slopes before snapping near-constant ends to 0
    pub slope_a: f64,
    pub slope_b: f64,
    pub expected: (f64, f64),
    pub matches: bool,
}

/// Exponents predicted for each `λ`: constant ends for `λ > 1`, `(2/3, 0)` at
/// `λ = 1`, `(1, 0)` for `|λ| < 1`, `(1, 1/3)` at `λ = −1`, `(1, 1)` below.
pub fn expected_exponents(lambda: f64) -> (f64, f64) {
    if lambda > 1.0 {
        (0.0, 0.0)
    } else if lambda == 1.0 {
        (2.0 / 3.0, 0.0)
    } else if lambda > -1.0 {
        (1.0, 0.0)
    } else if lambda == -1.0 {
        (1.0, 1.0 / 3.0)
    } else {
        (1.0, 1.0)
    }
}

const FIT_POINTS: usize = 4;
const EXPONENT_TOLERANCE: f64 = 0.05;

fn fitted_exponent(log_beta: &[f64], values: &[f64]) -> (f64, f64) {
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = ys.len() as f64;
    let mx = log_beta.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = log_beta.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = log_beta.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let mean = values.iter().sum::<f64>() / n;
    let constant = slope.abs() < 0.02 && (hi - lo) / mean.abs() < 0.05;
    (if constant { 0.0 } else { slope }, slope)
}

/// Least-squares slopes of `log a`, `log b` against `log β` over the four
/// smallest `betas`.
pub fn scaling_exponents(alpha: f64, lambda: f64, betas: &[f64]) -> Result<ScalingExponents> {
    if betas.len() < FIT_POINTS {
        return Err(FgigError::domain(format!("need at least {FIT_POINTS} betas")));
    }
    let path = support_path(alpha, lambda, betas)?;
    let tail = betas.len() - FIT_POINTS;
    let lb: Vec<f64> = betas[tail..].iter().map(|b| b.ln()).collect();
    let a: Vec<f64> = path[tail..].iter().map(|s| s.a).collect();
    let b: Vec<f64> = path[tail..].iter().map(|s| s.b).collect();
    let (p_a, slope_a) = fitted_exponent(&lb, &a);
    let (p_b, slope_b) = fitted_exponent(&lb, &b);
    if !(p_a.is_finite() && p_b.is_finite()) {
        return Err(FgigError::numeric("scaling_exponents", "non-finite fit", f64::NAN));
    }
    let expected = expected_exponents(lambda);
    let matches = (p_a - expected.0).abs() <= EXPONENT_TOLERANCE && (p_b - expected.1).abs() <= EXPONENT_TOLERANCE;
    Ok(ScalingExponents { p_a, p_b, slope_a, slope_b, expected, matches })
}

/// Limit of a spectral root as `β ↓ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum RootLimit {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl RootLimit {
    pub fn finite(&self) -> Option<f64> {
        match self {
            RootLimit::Finite(v) => Some(*v),
            _ => None,
        }
    }
}

/// `(lim δ, lim η)`: `(α/(1−|λ|), +∞)` for `|λ| > 1`, `(−∞, α/(1−λ²))` for
/// `|λ| < 1`, both unbounded at `λ = ±1`.
pub fn root_limits(alpha: f64, lambda: f64) -> Result<(RootLimit, RootLimit)> {
    check_alpha(alpha, lambda)?;
    let l = lambda.abs();
    Ok(if l > 1.0 {
        (RootLimit::Finite(alpha / (1.0 - l)), RootLimit::PlusInfinity)
    } else if l < 1.0 {
        (RootLimit::MinusInfinity, RootLimit::Finite(alpha / (1.0 - lambda * lambda)))
    } else {
        (RootLimit::MinusInfinity, RootLimit::PlusInfinity)
    })
}

/// Numeric roots at small `β` next to their limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootLimitCheck {
    pub beta: f64,
    pub delta: f64,
    pub eta: f64,
    pub delta_limit: RootLimit,
    pub eta_limit: RootLimit,
    /// relative errors against finite limits; `None` for unbounded ones
    pub delta_error: Option<f64>,
    pub eta_error: Option<f64>,
}

pub fn root_limit_check(alpha: f64, lambda: f64, beta: f64) -> Result<RootLimitCheck> {
    let (dl, el) = root_limits(alpha, lambda)?;
    let s = support_path(alpha, lambda, &[beta])?.pop().expect("one support per beta");
    let r = spectral_roots_from_support(&s)?;
    let rel = |v: f64, l: RootLimit| l.finite().map(|t| (v - t).abs() / t.abs());
    Ok(RootLimitCheck {
        beta,
        delta: r.delta,
        eta: r.eta,
        delta_limit: dl,
        eta_limit: el,
        delta_error: rel(r.delta, dl),
        eta_error: rel(r.eta, el),
    })
}

/// Limit of the polynomial under the square root of the R-transform:
/// `(α + (λ−1)z)²` for `λ > 1`, `α² + (λ²−1)αz` for `|λ| ≤ 1` and
/// `(α − (λ+1)z)²` for `λ < −1`.
pub fn f_limit(alpha: f64, lambda: f64, z: f64) -> f64 {
    if lambda > 1.0 {
        (alpha + (lambda - 1.0) * z).powi(2)
    } else if lambda >= -1.0 {
        alpha * alpha + (lambda * lambda - 1.0) * alpha * z
    } else {
        (alpha - (lambda + 1.0) * z).powi(2)
    }
}

/// Largest `|f(z) − f_lim(z)| / |f_lim(z)|` over `zs` at the given `β`.
pub fn f_limit_deviation(alpha: f64, lambda: f64, beta: f64, zs: &[f64]) -> Result<f64> {
    let s = support_path(alpha, lambda, &[beta])?.pop().expect("one support per beta");
    let p = NaturalParams::new(alpha, beta, lambda)?;
    let r = spectral_roots_from_support(&s)?;
    Ok(zs
        .iter()
        .map(|&z| {
            let f = branch_polynomial(&p, &r, Complex64::new(z, 0.0)).re;
            let lim = f_limit(alpha, lambda, z);
            (f - lim).abs() / lim.abs()
        })
        .fold(0.0, f64::max))
}
