//! The fixed-point characterization `X ≐ (X + Y)⁻¹` with `Y ∼ ν(1/α, λ)`.
//!
//! Around the point `c ∈ (−1, 0)` fixed by `αc⁴ − (1+λ)c³ + (1−λ)c − α = 0`,
//! the functional equation `−M(z) + z = z² M(N(z))` with
//! `M(z) = G_X(1/z)` and
//!
//! ```text
//! N(z) = (−z + αz² + M(z)) / (−(1+λ)z² + αz³ + zM(z))
//! ```
//!
//! determines every Taylor coefficient of `M` at `c`. This module solves for
//! them order by order with truncated series, compares against quadrature
//! over `μ(α, α, −λ)`, and checks the distributional identity directly
//! through free convolution and the reciprocal pushforward.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::convolution::{free_convolve, ConvolutionGrid};
use crate::error::{FgigError, Result};
use crate::measures::{
    build_fgig, build_free_poisson, kolmogorov_distance, pushforward_reciprocal, FreePoissonParams, SpectralMeasure,
};
use crate::params::NaturalParams;
use crate::series::Series;
use crate::transforms::cauchy;

/// Highest order accepted by [`series_coefficients`].
pub const MAX_SERIES_ORDER: usize = 32;

/// Order of the coefficient comparison in [`verify_fixed_point`].
pub const REPORT_ORDER: usize = 8;

const QUADRATURE_NODES: usize = 256;

/// Taylor coefficients of a function at a real point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSeries {
    pub center: f64,
    pub coeffs: Vec<f64>,
}

impl CoefficientSeries {
    /// Value of the truncated series at `z`.
    pub fn eval(&self, z: f64) -> f64 {
        Series::new(self.coeffs.clone()).eval(z - self.center)
    }
}

fn check_inputs(alpha: f64, lambda: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && lambda.is_finite() && lambda > 0.0) {
        return Err(FgigError::domain(format!("need alpha, lambda > 0 (got {alpha}, {lambda})")));
    }
    Ok(())
}

fn quartic(alpha: f64, lambda: f64, c: f64) -> f64 {
    ((alpha * c - (1.0 + lambda)) * c * c + (1.0 - lambda)) * c - alpha
}

/// `|αc⁴ − (1+λ)c³ + (1−λ)c − α|`.
pub fn quartic_residual(alpha: f64, lambda: f64, c: f64) -> f64 {
    quartic(alpha, lambda, c).abs()
}

/// The unique root of `αc⁴ − (1+λ)c³ + (1−λ)c − α` in `(−1, 0)`.
///
/// The quartic is `2λ > 0` at `−1` and `−α < 0` at `0`; bisection brackets
/// the root and Newton polishes it.
pub fn solve_c(alpha: f64, lambda: f64) -> Result<f64> {
    check_inputs(alpha, lambda)?;
    let f = |c: f64| quartic(alpha, lambda, c);
    let df = |c: f64| ((4.0 * alpha * c - 3.0 * (1.0 + lambda)) * c) * c + (1.0 - lambda);
    let (mut lo, mut hi) = (-1.0f64, 0.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut c = 0.5 * (lo + hi);
    for _ in 0..8 {
        let d = df(c);
        if d == 0.0 {
            break;
        }
        let next = c - f(c) / d;
        if !(next > lo - (hi - lo) && next < hi + (hi - lo)) {
            break;
        }
        c = next;
    }
    Ok(c)
}

/// `(α₀, α₁)`: `α₀ = c/(1+c²)` and `α₁` the smaller root of
/// `c(1+c²)²α₁² + (α(1+c²)² − 2c)(1+c²)α₁ − (α − c + αc²) = 0`.
pub fn initial_coefficients(alpha: f64, lambda: f64, c: f64) -> Result<(f64, f64)> {
    check_inputs(alpha, lambda)?;
    if !(c > -1.0 && c < 0.0) {
        return Err(FgigError::domain(format!("expansion point {c} outside (-1, 0)")));
    }
    let s = 1.0 + c * c;
    let a0 = c / s;
    let qa = c * s * s;
    let qb = (alpha * s * s - 2.0 * c) * s;
    let qc = -(alpha - c + alpha * c * c);
    let disc = qb * qb - 4.0 * qa * qc;
    if !(disc >= 0.0) {
        return Err(FgigError::numeric("initial_coefficients", "negative discriminant", disc));
    }
    let q = -0.5 * (qb + qb.signum() * disc.sqrt());
    let (r1, r2) = (q / qa, qc / q);
    let a1 = r1.min(r2);
    if !(a1 > 0.0 && a1 < 1.0 / s) {
        return Err(FgigError::numeric(
            "initial_coefficients",
            format!("smaller root {a1} outside (0, 1/(1+c^2))"),
            a1,
        ));
    }
    Ok((a0, a1))
}

/// `β₁ = N′(c)` from the derivative of the quotient defining `N`.
pub fn beta1_from_derivative(alpha: f64, lambda: f64, c: f64, a0: f64, a1: f64) -> f64 {
    let bracket = a0 - (1.0 + lambda) * c + alpha * c * c;
    let num = -lambda * c * c * a1 + c * c * (-1.0 - lambda + 2.0 * alpha * c - alpha * alpha * c * c)
        + 2.0 * c * (1.0 + lambda - alpha * c) * a0
        - a0 * a0;
    num / (c * c * bracket * bracket)
}

/// `β₁ = (1 − c²)/(α₁c²(1+c²)) − 1/c²`, which follows once `α₀` is eliminated.
pub fn beta1_closed(c: f64, a1: f64) -> f64 {
    let c2 = c * c;
    (1.0 - c2) / (a1 * c2 * (1.0 + c2)) - 1.0 / c2
}

/// Lower bound `α(1 − c⁴)/(α − c + αc²)` for the coefficient of `αₙ`.
pub fn linear_coefficient_bound(alpha: f64, c: f64) -> f64 {
    alpha * (1.0 - c.powi(4)) / (alpha - c + alpha * c * c)
}

/// Output of the order-by-order solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSolution {
    /// coefficients of `M` at `c`
    pub m: CoefficientSeries,
    /// coefficients of `N` at `c`
    pub n: CoefficientSeries,
    /// coefficient multiplying `αₙ` in the order-`n` equation, `n ≥ 2`
    pub linear_coefficients: Vec<f64>,
    /// `|coefficient n|` of `−M(z) + z − z²M(N(z))` for the final series
    pub residuals: Vec<f64>,
    /// worst departure of the third secant evaluation from the line
    pub collinearity: f64,
}

/// `(−M + z − z²M∘N, N)` for `M` given as a series in `z − c`.
fn functional_residual(alpha: f64, lambda: f64, c: f64, m: &Series) -> Result<(Series, Series)> {
    let order = m.order();
    let z = Series::variable(c, order);
    let z2 = &z * &z;
    let z3 = &z2 * &z;
    let num = &(&z2.scale(alpha) - &z) + m;
    let den = &(&z3.scale(alpha) - &z2.scale(1.0 + lambda)) + &(&z * m);
    let n = num.div(&den)?;
    let m_of_n = m.compose(&n);
    let res = &(&z - m) - &(&z2 * &m_of_n);
    Ok((res, n))
}

/// Taylor coefficients `α₀..α_N` of `M` at `c` from the functional equation.
pub fn series_coefficients(alpha: f64, lambda: f64, order: usize) -> Result<CoefficientSeries> {
    Ok(series_solution(alpha, lambda, order)?.m)
}

/// [`series_coefficients`] with the diagnostics of the solve.
///
/// From order 2 on, the order-`n` coefficient of the residual is affine in
/// `αₙ`: two evaluations (`αₙ = 0, 1`) give the line and a third (`αₙ = 2`)
/// checks it.
pub fn series_solution(alpha: f64, lambda: f64, order: usize) -> Result<SeriesSolution> {
    check_inputs(alpha, lambda)?;
    if order > MAX_SERIES_ORDER {
        return Err(FgigError::domain(format!("series order {order} exceeds {MAX_SERIES_ORDER}")));
    }
    let c = solve_c(alpha, lambda)?;
    let (a0, a1) = initial_coefficients(alpha, lambda, c)?;
    let mut coeffs = vec![a0, a1];
    coeffs.truncate(order + 1);
    let mut linear = Vec::new();
    let mut collinearity: f64 = 0.0;
    for n in 2..=order {
        let at = |x: f64| -> Result<f64> {
            let mut trial = coeffs.clone();
            trial.push(x);
            let (res, _) = functional_residual(alpha, lambda, c, &Series::new(trial))?;
            Ok(res.coeff(n))
        };
        let (f0, f1, f2) = (at(0.0)?, at(1.0)?, at(2.0)?);
        let slope = f1 - f0;
        let scale = f0.abs().max(slope.abs()).max(1.0);
        let off = (f2 - (f0 + 2.0 * slope)).abs() / scale;
        collinearity = collinearity.max(off);
        if off > 1e-9 {
            return Err(FgigError::numeric(
                "series_coefficients",
                format!("order {n} residual is not affine in the new coefficient"),
                off,
            ));
        }
        // residual_n = −(1 + c²β₁ⁿ + c²pα₁)·αₙ − (rest)
        let lin = -slope;
        if !(lin.abs() > 1e-300) {
            return Err(FgigError::numeric("series_coefficients", format!("order {n} coefficient vanishes"), lin));
        }
        linear.push(lin);
        coeffs.push(-f0 / slope);
    }
    let m = Series::new(coeffs);
    let (res, n_series) = functional_residual(alpha, lambda, c, &m)?;
    Ok(SeriesSolution {
        m: CoefficientSeries { center: c, coeffs: m.into_coeffs() },
        n: CoefficientSeries { center: c, coeffs: n_series.into_coeffs() },
        linear_coefficients: linear,
        residuals: res.coeffs().iter().map(|r| r.abs()).collect(),
        collinearity,
    })
}

/// Taylor coefficients of `M(z) = ∫ z/(1 − zx) dμ` at `c` for
/// `μ = μ(α, α, −λ)`, by quadrature of the closed-form derivatives
/// `k!·x^{k−1}/(1 − cx)^{k+1}` (so the `k`-th coefficient is the integral
/// without `k!`).
pub fn oracle_coefficients(alpha: f64, lambda: f64, c: f64, order: usize) -> Result<CoefficientSeries> {
    let mu = build_fgig(&NaturalParams::new(alpha, alpha, -lambda)?, QUADRATURE_NODES)?;
    Ok(oracle_from_measure(&mu, c, order))
}

fn oracle_from_measure(mu: &SpectralMeasure, c: f64, order: usize) -> CoefficientSeries {
    let coeffs = (0..=order)
        .map(|k| {
            if k == 0 {
                mu.integrate(|x| c / (1.0 - c * x))
            } else {
                mu.integrate(|x| x.powi(k as i32 - 1) / (1.0 - c * x).powi(k as i32 + 1))
            }
        })
        .collect();
    CoefficientSeries { center: c, coeffs }
}

/// Everything [`verify_fixed_point`] checks for one `(α, λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationReport {
    pub alpha: f64,
    pub lambda: f64,
    pub c: f64,
    pub quartic_residual: f64,
    pub series: CoefficientSeries,
    pub oracle: CoefficientSeries,
    /// largest relative deviation between the two coefficient routes
    pub max_rel_dev: f64,
    /// largest residual coefficient of the functional equation
    pub series_residual: f64,
    /// Kolmogorov distance between `(X + Y)⁻¹` and `X`
    pub fixed_point_distance: f64,
    /// Kolmogorov distance between `X + Y` and `μ(α, α, λ)`
    pub intermediate_distance: f64,
    /// `|1/c − λ/(G_{X⁻¹}(c) − α) − c|`
    pub key_residual: f64,
    /// largest `|G_{X⁻¹}(z) − (1 − G_X(1/z)/z)/z|` over the test points
    pub reciprocal_residual: f64,
    pub beta1: f64,
    pub beta1_closed: f64,
    pub alpha1_bounds: (f64, f64),
    pub min_linear_coefficient: f64,
    pub linear_coefficient_bound: f64,
}

impl CharacterizationReport {
    /// `1/(1+c²)² ≤ α₁ ≤ 1/(1+c²)` and `−1 ≤ β₁ ≤ −c²`.
    pub fn bounds_hold(&self) -> bool {
        let a1 = self.series.coeffs.get(1).copied().unwrap_or(f64::NAN);
        let (lo, hi) = self.alpha1_bounds;
        let c2 = self.c * self.c;
        a1 >= lo && a1 <= hi && self.beta1 >= -1.0 && self.beta1 <= -c2
    }
}

/// Relative deviation `|s − o| / |o|` (absolute below unit scale `1e−300`).
fn rel_dev(s: &[f64], o: &[f64]) -> f64 {
    s.iter().zip(o).map(|(a, b)| (a - b).abs() / b.abs().max(1e-300)).fold(0.0, f64::max)
}

/// Check `X ≐ (X + Y)⁻¹` for `X ∼ μ(α, α, −λ)`, `Y ∼ ν(1/α, λ)` by every
/// available route.
pub fn verify_fixed_point(alpha: f64, lambda: f64) -> Result<CharacterizationReport> {
    check_inputs(alpha, lambda)?;
    let sol = series_solution(alpha, lambda, REPORT_ORDER)?;
    let c = sol.m.center;
    let x = build_fgig(&NaturalParams::new(alpha, alpha, -lambda)?, QUADRATURE_NODES)?;
    let y = build_free_poisson(&FreePoissonParams::new(1.0 / alpha, lambda)?, QUADRATURE_NODES)?;
    let oracle = oracle_from_measure(&x, c, REPORT_ORDER);

    let sum = free_convolve(&x, &y, &ConvolutionGrid::default())?;
    let sum_target = build_fgig(&NaturalParams::new(alpha, alpha, lambda)?, QUADRATURE_NODES)?;
    let intermediate_distance = kolmogorov_distance(&sum, &sum_target);
    let inverse = pushforward_reciprocal(&sum)?;
    let fixed_point_distance = kolmogorov_distance(&inverse, &x);

    // G_{X⁻¹} by quadrature over the pushed-forward nodes, not the carried
    // closed form, so the relation below is a genuine two-route check
    let x_inv = pushforward_reciprocal(&x)?;
    let mut reciprocal_residual: f64 = 0.0;
    for z in [
        Complex64::new(0.5, 0.5),
        Complex64::new(2.0, 0.1),
        Complex64::new(-1.0, 1.0),
        Complex64::new(5.0, 3.0),
        Complex64::new(c, 0.25),
    ] {
        let direct = x_inv.cauchy_quadrature(z);
        let via = (1.0 - cauchy(&x, 1.0 / z)? / z) / z;
        reciprocal_residual = reciprocal_residual.max((direct - via).norm());
    }
    let g_inv_c = x_inv.cauchy_quadrature(Complex64::new(c, 0.0)).re;
    let key_residual = (1.0 / c - lambda / (g_inv_c - alpha) - c).abs();

    let (a0, a1) = (sol.m.coeffs[0], sol.m.coeffs[1]);
    let s = 1.0 + c * c;
    let min_linear = sol.linear_coefficients.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CharacterizationReport {
        alpha,
        lambda,
        c,
        quartic_residual: quartic_residual(alpha, lambda, c),
        max_rel_dev: rel_dev(&sol.m.coeffs, &oracle.coeffs),
        series_residual: sol.residuals.iter().copied().fold(0.0, f64::max),
        series: sol.m,
        oracle,
        fixed_point_distance,
        intermediate_distance,
        key_residual,
        reciprocal_residual,
        beta1: beta1_from_derivative(alpha, lambda, c, a0, a1),
        beta1_closed: beta1_closed(c, a1),
        alpha1_bounds: (1.0 / (s * s), 1.0 / s),
        min_linear_coefficient: min_linear,
        linear_coefficient_bound: linear_coefficient_bound(alpha, c),
    })
}

/// One stage of the iterated identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub label: String,
    /// closed-form law the stage is compared with
    pub target: NaturalParams,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteratedReport {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub stages: Vec<Stage>,
    pub final_distance: f64,
}

/// Check `X ≐ (Y₁ + (Y₂ + X)⁻¹)⁻¹` for `X ∼ μ(α, β, −λ)`,
/// `Y₁ ∼ ν(1/β, λ)`, `Y₂ ∼ ν(1/α, λ)`, comparing each intermediate law with
/// its closed form.
pub fn verify_iterated(alpha: f64, beta: f64, lambda: f64) -> Result<IteratedReport> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(FgigError::domain(format!("need beta > 0 (got {beta})")));
    }
    check_inputs(alpha, lambda)?;
    let law = |a: f64, b: f64, l: f64| -> Result<(NaturalParams, SpectralMeasure)> {
        let p = NaturalParams::new(a, b, l)?;
        Ok((p, build_fgig(&p, QUADRATURE_NODES)?))
    };
    let (_, x) = law(alpha, beta, -lambda)?;
    let y1 = build_free_poisson(&FreePoissonParams::new(1.0 / beta, lambda)?, QUADRATURE_NODES)?;
    let y2 = build_free_poisson(&FreePoissonParams::new(1.0 / alpha, lambda)?, QUADRATURE_NODES)?;
    let grid = ConvolutionGrid::default();
    let mut stages = Vec::with_capacity(4);
    let mut record = |label: &str, m: &SpectralMeasure, target: (NaturalParams, SpectralMeasure)| {
        let distance = kolmogorov_distance(m, &target.1);
        log::info!("verify_iterated: {label}: distance {distance:e}");
        stages.push(Stage { label: label.to_string(), target: target.0, distance });
    };

    let s1 = free_convolve(&x, &y2, &grid)?;
    record("X + Y2", &s1, law(alpha, beta, lambda)?);
    let r1 = pushforward_reciprocal(&s1)?;
    record("(X + Y2)^-1", &r1, law(beta, alpha, -lambda)?);
    let s2 = free_convolve(&y1, &r1, &grid)?;
    record("Y1 + (X + Y2)^-1", &s2, law(beta, alpha, lambda)?);
    let r2 = pushforward_reciprocal(&s2)?;
    record("(Y1 + (X + Y2)^-1)^-1", &r2, law(alpha, beta, -lambda)?);

    let final_distance = stages.last().map(|s| s.distance).unwrap_or(f64::NAN);
    Ok(IteratedReport { alpha, beta, lambda, stages, final_distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn c_for_unit_parameters() {
        // c⁴ − 2c³ − 1 = 0; sign change between −0.72 and −0.715
        let c = solve_c(1.0, 1.0).unwrap();
        assert!(c > -0.72 && c < -0.715, "{c}");
        assert!(quartic_residual(1.0, 1.0, c) <= 1e-12);
        let (a0, a1) = initial_coefficients(1.0, 1.0, c).unwrap();
        assert_relative_eq!(a0, c / (1.0 + c * c), max_relative = 1e-15);
        assert!((a0 + 0.4734).abs() < 1e-4, "{a0}");
        let s = 1.0 + c * c;
        assert!(a1 >= 1.0 / (s * s) && a1 <= 1.0 / s);
        let b1 = beta1_closed(c, a1);
        assert!((-1.0..=-c * c).contains(&b1), "{b1}");
    }

    #[test]
    fn low_orders_vanish_with_initial_coefficients() {
        let (al, la) = (1.5, 0.7);
        let c = solve_c(al, la).unwrap();
        let (a0, a1) = initial_coefficients(al, la, c).unwrap();
        let (res, n) = functional_residual(al, la, c, &Series::new(vec![a0, a1])).unwrap();
        assert!(res.coeff(0).abs() < 1e-14, "{}", res.coeff(0));
        assert!(res.coeff(1).abs() < 1e-13, "{}", res.coeff(1));
        assert_relative_eq!(n.coeff(0), c, max_relative = 1e-13);
        assert_relative_eq!(n.coeff(1), beta1_closed(c, a1), max_relative = 1e-10);
    }

    #[test]
    fn recursion_matches_quadrature() {
        let sol = series_solution(1.0, 1.0, 8).unwrap();
        let c = sol.m.center;
        let oracle = oracle_coefficients(1.0, 1.0, c, 8).unwrap();
        let dev = rel_dev(&sol.m.coeffs, &oracle.coeffs);
        assert!(dev < 1e-6, "deviation {dev}: {:?} vs {:?}", sol.m.coeffs, oracle.coeffs);
        assert!(sol.residuals.iter().all(|r| *r < 1e-12), "{:?}", sol.residuals);
        assert!(sol.collinearity < 1e-9);
    }

    #[test]
    fn oracle_anchors() {
        let (al, la) = (2.0, 1.0);
        let c = solve_c(al, la).unwrap();
        let o = oracle_coefficients(al, la, c, 2).unwrap();
        let mu = build_fgig(&NaturalParams::new(al, al, -la).unwrap(), 256).unwrap();
        let g = cauchy(&mu, Complex64::new(1.0 / c, 0.0)).unwrap();
        assert!((o.coeffs[0] - g.re).abs() < 1e-12);
        assert!((o.coeffs[0] - c / (1.0 + c * c)).abs() < 1e-9);
        let s = 1.0 + c * c;
        assert!(o.coeffs[1] >= 1.0 / (s * s) && o.coeffs[1] <= 1.0 / s);
    }

    #[test]
    fn fixed_point_for_two_one() {
        let r = verify_fixed_point(2.0, 1.0).unwrap();
        assert!(r.fixed_point_distance <= 1e-3, "{}", r.fixed_point_distance);
        assert!(r.intermediate_distance <= 1e-4, "{}", r.intermediate_distance);
        assert!(r.key_residual <= 1e-9, "{}", r.key_residual);
        assert!(r.reciprocal_residual <= 1e-9, "{}", r.reciprocal_residual);
        assert!(r.max_rel_dev <= 1e-6, "{}", r.max_rel_dev);
        assert!((r.beta1 - r.beta1_closed).abs() <= 1e-10);
        assert!(r.bounds_hold());
        assert!(r.min_linear_coefficient >= r.linear_coefficient_bound - 1e-9);
    }

    #[test]
    fn iterated_identity_for_two_eight_one() {
        let r = verify_iterated(2.0, 8.0, 1.0).unwrap();
        assert_eq!(r.stages.len(), 4);
        for s in &r.stages {
            assert!(s.distance <= 2e-3, "{}: {}", s.label, s.distance);
        }
        assert!(r.final_distance <= 2e-3, "{}", r.final_distance);
    }

    #[test]
    fn truncated_series_tracks_m() {
        let (al, la) = (1.0, 1.0);
        let sol = series_solution(al, la, 16).unwrap();
        let c = sol.m.center;
        let mu = build_fgig(&NaturalParams::new(al, al, -la).unwrap(), 256).unwrap();
        let z = c + 0.02;
        let m = z * mu.integrate(|x| 1.0 / (1.0 - z * x));
        assert!((sol.m.eval(z) - m).abs() < 1e-10, "{} vs {m}", sol.m.eval(z));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(solve_c(0.0, 1.0).is_err());
        assert!(solve_c(1.0, -1.0).is_err());
        assert!(series_coefficients(1.0, 1.0, MAX_SERIES_ORDER + 1).is_err());
        assert!(initial_coefficients(1.0, 1.0, 0.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn c_lies_in_unit_interval(al in 0.01f64..50.0, la in 0.01f64..50.0) {
            let c = solve_c(al, la).unwrap();
            prop_assert!(c > -1.0 && c < 0.0);
            prop_assert!(quartic_residual(al, la, c) <= 1e-12 * (1.0 + al + la));
        }

        #[test]
        fn beta1_routes_agree(al in 0.5f64..3.0, la in 0.5f64..3.0) {
            let c = solve_c(al, la).unwrap();
            let (a0, a1) = initial_coefficients(al, la, c).unwrap();
            let b = beta1_from_derivative(al, la, c, a0, a1);
            prop_assert!((b - beta1_closed(c, a1)).abs() <= 1e-10);
            prop_assert!(b >= -1.0 && b <= -c * c);
        }

        #[test]
        fn linear_coefficients_stay_above_bound(al in 0.5f64..3.0, la in 0.5f64..3.0) {
            let sol = series_solution(al, la, 12).unwrap();
            let bound = linear_coefficient_bound(al, sol.m.center);
            prop_assert!(sol.linear_coefficients.iter().all(|l| *l >= bound - 1e-9));
        }
    }
}
