//! The three fGIG parameterizations and the maps between them.
//!
//! * [`NaturalParams`] `(α, β, λ)`: the coefficients of the potential.
//! * [`SupportForm`] `(a, b, λ)`: the support endpoints.
//! * [`SpreadForm`] `(A, B, λ)` with `A = (√b − √a)²`, `B = (√a + √b)²`.
//!
//! Going from `(a, b)` to `(α, β)` is closed form. The reverse direction is a
//! root solve; writing `q² = B/A` it reduces to the scalar equation
//!
//! ```text
//! (q² − |λ|)(q² + |λ|)(q² − 1)² / q⁴ = 4αβ,   q² > max(1, |λ|),
//! ```
//!
//! whose left side is strictly increasing in `q`, so a bracketed Newton
//! iteration always converges to the unique admissible root.

use serde::{Deserialize, Serialize};

use crate::error::{FgigError, Result};

const SOLVE_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

/// `(α, β, λ)` with `α, β > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
}

/// Support endpoints `0 < a < b` together with `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportForm {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
}

/// `A = (√b − √a)²` (`diff_sq`) and `B = (√a + √b)²` (`sum_sq`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadForm {
    pub diff_sq: f64,
    pub sum_sq: f64,
    pub lambda: f64,
}

/// Roots of the quartic under the square root of the R-transform:
/// `f(z) = 4β (z − δ)² (η − z)` and the auxiliary root `γ` of the
/// expanded form `(α + (λ−1)z)² − 4βz(z − α)(z − γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRoots {
    pub gamma: f64,
    pub delta: f64,
    pub eta: f64,
}

impl NaturalParams {
    pub fn new(alpha: f64, beta: f64, lambda: f64) -> Result<Self> {
        let p = NaturalParams { alpha, beta, lambda };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(FgigError::domain(format!("alpha > 0 violated (alpha = {})", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(FgigError::domain(format!("beta > 0 violated (beta = {})", self.beta)));
        }
        if !self.lambda.is_finite() {
            return Err(FgigError::domain("lambda must be finite"));
        }
        Ok(())
    }
}

impl SupportForm {
    pub fn new(a: f64, b: f64, lambda: f64) -> Result<Self> {
        let s = SupportForm { a, b, lambda };
        s.check()?;
        Ok(s)
    }

    /// `((√a − √b)/(√a + √b))² = A/B`.
    pub fn ratio(&self) -> f64 {
        let sa = self.a.sqrt();
        let sb = self.b.sqrt();
        let d = (self.b - self.a) / (sa + sb);
        (d / (sa + sb)).powi(2)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.lambda.is_finite()) {
            return Err(FgigError::domain("support parameters must be finite"));
        }
        if !(self.a > 0.0) {
            return Err(FgigError::domain(format!("0 < a violated (a = {})", self.a)));
        }
        if !(self.a < self.b) {
            return Err(FgigError::domain(format!(
                "a < b violated (a = {}, b = {})",
                self.a, self.b
            )));
        }
        if !(self.lambda.abs() * self.ratio() < 1.0) {
            return Err(FgigError::domain(format!(
                "|lambda|((sqrt a - sqrt b)/(sqrt a + sqrt b))^2 < 1 violated (value {})",
                self.lambda.abs() * self.ratio()
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }
}

impl SpreadForm {
    pub fn new(diff_sq: f64, sum_sq: f64, lambda: f64) -> Result<Self> {
        let s = SpreadForm { diff_sq, sum_sq, lambda };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.diff_sq.is_finite() && self.sum_sq.is_finite() && self.lambda.is_finite()) {
            return Err(FgigError::domain("spread parameters must be finite"));
        }
        if !(self.diff_sq > 0.0) {
            return Err(FgigError::domain(format!("0 < A violated (A = {})", self.diff_sq)));
        }
        let m = self.lambda.abs().max(1.0);
        if !(m * self.diff_sq < self.sum_sq) {
            return Err(FgigError::domain(format!(
                "max(1,|lambda|) A < B violated ({} >= {})",
                m * self.diff_sq,
                self.sum_sq
            )));
        }
        Ok(())
    }

    /// Closed-form `(α, β)`.
    pub fn to_natural(&self) -> Result<NaturalParams> {
        self.check()?;
        Ok(Geometry::from_spread(self).natural())
    }
}

/// `(a, b, λ) -> (α, β, λ)` in closed form.
pub fn from_support(s: &SupportForm) -> Result<NaturalParams> {
    s.check()?;
    let sa = s.a.sqrt();
    let sb = s.b.sqrt();
    // (√a − √b)² without cancellation
    let diff_sq = ((s.b - s.a) / (sa + sb)).powi(2);
    let r = s.ratio();
    let alpha = 2.0 / diff_sq * (1.0 + s.lambda * r);
    let beta = 2.0 * s.a * s.b / diff_sq * (1.0 - s.lambda * r);
    NaturalParams::new(alpha, beta, s.lambda)
}

/// `(A, B, λ) <-> (a, b, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Reparameterized {
    Support(SupportForm),
    Spread(SpreadForm),
}

pub fn support_to_spread(s: &SupportForm) -> Result<SpreadForm> {
    s.check()?;
    let sa = s.a.sqrt();
    let sb = s.b.sqrt();
    let sum = sa + sb;
    Ok(SpreadForm {
        diff_sq: ((s.b - s.a) / sum).powi(2),
        sum_sq: sum * sum,
        lambda: s.lambda,
    })
}

pub fn spread_to_support(s: &SpreadForm) -> Result<SupportForm> {
    s.check()?;
    let sa = s.diff_sq.sqrt();
    let sb = s.sum_sq.sqrt();
    let a = ((s.sum_sq - s.diff_sq) / (sa + sb)).powi(2) / 4.0;
    let b = (sa + sb).powi(2) / 4.0;
    Ok(SupportForm { a, b, lambda: s.lambda })
}

/// Maps either form onto the other.
pub fn reparameterize(x: &Reparameterized) -> Result<Reparameterized> {
    match x {
        Reparameterized::Support(s) => Ok(Reparameterized::Spread(support_to_spread(s)?)),
        Reparameterized::Spread(s) => Ok(Reparameterized::Support(spread_to_support(s)?)),
    }
}

/// Internal description in terms of `A` and `q² = B/A`, with the differences
/// `q² − 1` and `q² ± λ` kept separately so that degenerate shapes (a → 0,
/// `B ≈ |λ|A`) retain full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Geometry {
    pub lambda: f64,
    pub diff_sq: f64,
    pub q2: f64,
    pub q2_m1: f64,
    pub q2_plus_lam: f64,
    pub q2_minus_lam: f64,
}

impl Geometry {
    fn from_offset(lambda: f64, diff_sq: f64, e: f64) -> Self {
        let l = lambda.abs();
        let m = l.max(1.0);
        let s = m.sqrt();
        let u = e * (2.0 * s + e);
        let q2 = m + u;
        let q2_m1 = u + (m - 1.0);
        let q2_m_abs = u + (m - l);
        let q2_p_abs = q2 + l;
        let (q2_plus_lam, q2_minus_lam) = if lambda >= 0.0 {
            (q2_p_abs, q2_m_abs)
        } else {
            (q2_m_abs, q2_p_abs)
        };
        Geometry { lambda, diff_sq, q2, q2_m1, q2_plus_lam, q2_minus_lam }
    }

    fn from_spread(s: &SpreadForm) -> Self {
        let q2 = s.sum_sq / s.diff_sq;
        Geometry {
            lambda: s.lambda,
            diff_sq: s.diff_sq,
            q2,
            q2_m1: (s.sum_sq - s.diff_sq) / s.diff_sq,
            q2_plus_lam: q2 + s.lambda,
            q2_minus_lam: q2 - s.lambda,
        }
    }

    fn from_support(s: &SupportForm) -> Self {
        let sa = s.a.sqrt();
        let sb = s.b.sqrt();
        let diff_sq = ((s.b - s.a) / (sa + sb)).powi(2);
        let q2_m1 = 4.0 * sa * sb / diff_sq;
        let q2 = 1.0 + q2_m1;
        let pm = |sign: f64| {
            let l = sign * s.lambda;
            if l >= -1.0 {
                q2_m1 + (1.0 + l)
            } else {
                q2 + l
            }
        };
        Geometry {
            lambda: s.lambda,
            diff_sq,
            q2,
            q2_m1,
            q2_plus_lam: pm(1.0),
            q2_minus_lam: pm(-1.0),
        }
    }

    pub fn q(&self) -> f64 {
        self.q2.sqrt()
    }

    pub fn support(&self) -> SupportForm {
        let q = self.q();
        let qm1 = self.q2_m1 / (q + 1.0);
        SupportForm {
            a: self.diff_sq * qm1 * qm1 / 4.0,
            b: self.diff_sq * (q + 1.0) * (q + 1.0) / 4.0,
            lambda: self.lambda,
        }
    }

    pub fn spread(&self) -> SpreadForm {
        SpreadForm {
            diff_sq: self.diff_sq,
            sum_sq: self.diff_sq * self.q2,
            lambda: self.lambda,
        }
    }

    pub fn natural(&self) -> NaturalParams {
        let a = self.diff_sq;
        NaturalParams {
            alpha: 2.0 * self.q2_plus_lam / (a * self.q2),
            beta: a * self.q2_m1 * self.q2_m1 * self.q2_minus_lam / (8.0 * self.q2),
            lambda: self.lambda,
        }
    }

    pub fn roots(&self) -> SpectralRoots {
        let a = self.diff_sq;
        let q2 = self.q2;
        SpectralRoots {
            gamma: 2.0 * (self.lambda + q2 - 2.0 * q2 * q2) / (a * q2 * self.q2_m1 * self.q2_m1),
            delta: -2.0 * self.q2_plus_lam / (a * q2 * self.q2_m1),
            eta: 2.0 * q2 / (a * self.q2_minus_lam),
        }
    }
}

/// `log h(e) − log(4αβ)` and its derivative in `e`, with `q = √m + e`.
fn offset_equation(lambda: f64, log_target: f64, e: f64) -> (f64, f64) {
    let g = Geometry::from_offset(lambda, 1.0, e);
    let l = lambda.abs();
    let q2_m_abs = if lambda >= 0.0 { g.q2_minus_lam } else { g.q2_plus_lam };
    let q2_p_abs = g.q2 + l;
    let value = q2_m_abs.ln() + q2_p_abs.ln() + 2.0 * g.q2_m1.ln() - 2.0 * g.q2.ln() - log_target;
    let dq2 = 2.0 * g.q();
    let deriv = dq2 * (1.0 / q2_m_abs + 1.0 / q2_p_abs + 2.0 / g.q2_m1 - 2.0 / g.q2);
    (value, deriv)
}

fn solve_offset(p: &NaturalParams, start: Option<f64>) -> Result<f64> {
    let log_target = (4.0 * p.alpha * p.beta).ln();
    let f = |e: f64| offset_equation(p.lambda, log_target, e);

    // bracket [lo, hi] with f(lo) < 0 < f(hi)
    let mut lo = 1.0;
    while f(lo).0 >= 0.0 {
        lo *= 1e-4;
        if lo < 1e-300 {
            return Err(FgigError::numeric("solve_support", "cannot bracket root from below", f(lo).0));
        }
    }
    let mut hi = 1.0;
    while f(hi).0 <= 0.0 {
        hi *= 16.0;
        if hi > 1e300 {
            return Err(FgigError::numeric("solve_support", "cannot bracket root from above", f(hi).0));
        }
    }

    let mut e = match start {
        Some(s) if s > lo && s < hi => s,
        _ => (lo * hi).sqrt(),
    };
    let mut last = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let (v, d) = f(e);
        last = v;
        if v.abs() <= 1e-15 {
            return Ok(e);
        }
        if v < 0.0 {
            lo = e;
        } else {
            hi = e;
        }
        let newton = e - v / d;
        e = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else if hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) <= 1e-16 * hi {
            return Ok(e);
        }
    }
    if last.abs() <= SOLVE_TOL {
        Ok(e)
    } else {
        Err(FgigError::numeric("solve_support", "iteration limit reached", last))
    }
}

pub(crate) fn solve_geometry(p: &NaturalParams, start: Option<f64>) -> Result<(Geometry, f64)> {
    p.check()?;
    let e = solve_offset(p, start)?;
    let mut g = Geometry::from_offset(p.lambda, 1.0, e);
    // α fixes the scale A
    g.diff_sq = 2.0 * g.q2_plus_lam / (p.alpha * g.q2);
    Ok((g, e))
}

/// Relative residuals of the two defining equations for `(a, b)`.
pub fn support_residuals(p: &NaturalParams, s: &SupportForm) -> (f64, f64) {
    let rab = (s.a * s.b).sqrt();
    let mid = 0.5 * (s.a + s.b);
    let t1 = [1.0, -p.lambda, p.alpha * rab, -p.beta * mid / (s.a * s.b)];
    let t2 = [1.0, p.lambda, p.beta / rab, -p.alpha * mid];
    let rel = |t: &[f64]| {
        let sum: f64 = t.iter().sum();
        let scale = t.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        sum.abs() / scale
    };
    (rel(&t1), rel(&t2))
}

/// Support endpoints `(a, b)` of `μ(α, β, λ)`.
pub fn solve_support(p: &NaturalParams) -> Result<SupportForm> {
    let (g, _) = solve_geometry(p, None)?;
    finish_support(p, &g)
}

/// As [`solve_support`], seeding the iteration from a nearby solution with the
/// same `λ` (used for continuation in `β`).
pub fn solve_support_warm(p: &NaturalParams, previous: &SupportForm) -> Result<SupportForm> {
    let seed = if previous.lambda == p.lambda && previous.check().is_ok() {
        let g = Geometry::from_support(previous);
        let s = p.lambda.abs().max(1.0).sqrt();
        Some(g.q() - s)
    } else {
        None
    };
    let (g, _) = solve_geometry(p, seed.filter(|e| *e > 0.0))?;
    finish_support(p, &g)
}

fn finish_support(p: &NaturalParams, g: &Geometry) -> Result<SupportForm> {
    let s = g.support();
    let (r1, r2) = support_residuals(p, &s);
    let r = r1.max(r2);
    if !(r <= SOLVE_TOL) {
        return Err(FgigError::numeric("solve_support", "residual above tolerance", r));
    }
    Ok(s)
}

/// `(γ, δ, η)` for `μ(α, β, λ)`.
pub fn spectral_roots(p: &NaturalParams) -> Result<SpectralRoots> {
    let (g, _) = solve_geometry(p, None)?;
    Ok(g.roots())
}

/// `(γ, δ, η)` computed from a given support (used when the support is already known).
pub fn spectral_roots_from_support(s: &SupportForm) -> Result<SpectralRoots> {
    s.check()?;
    Ok(Geometry::from_support(s).roots())
}

/// `γ` from its `(α, β, a, b)` expression (independent of the `(A, B)` route).
pub fn gamma_from_support(p: &NaturalParams, s: &SupportForm) -> f64 {
    let ab = s.a * s.b;
    let rab = ab.sqrt();
    (p.alpha * p.alpha * ab + p.beta * p.beta / ab
        - 2.0 * p.alpha * p.beta * ((s.a + s.b) / rab - 1.0)
        - (p.lambda - 1.0).powi(2))
        / (4.0 * p.beta)
}

/// Expanded quartic `(α + (λ−1)z)² − 4βz(z − α)(z − γ)` with `γ` from the support.
pub fn quartic_expanded(p: &NaturalParams, s: &SupportForm, z: f64) -> f64 {
    let gamma = gamma_from_support(p, s);
    (p.alpha + (p.lambda - 1.0) * z).powi(2) - 4.0 * p.beta * z * (z - p.alpha) * (z - gamma)
}

/// Factored quartic `4β(z − δ)²(η − z)`.
pub fn quartic_factored(p: &NaturalParams, r: &SpectralRoots, z: f64) -> f64 {
    4.0 * p.beta * (z - r.delta).powi(2) * (r.eta - z)
}

/// Law of `X⁻¹` when `X ~ μ(α, β, λ)`.
pub fn invert_params(p: &NaturalParams) -> NaturalParams {
    NaturalParams {
        alpha: p.beta,
        beta: p.alpha,
        lambda: -p.lambda,
    }
}

/// Any of the three parameter forms, for validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ParamForm {
    Natural(NaturalParams),
    Support(SupportForm),
    Spread(SpreadForm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    /// Signed slack of the inequality; positive when satisfied.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub form: String,
    pub valid: bool,
    pub checks: Vec<InvariantCheck>,
}

fn check(name: &str, margin: f64) -> InvariantCheck {
    InvariantCheck {
        name: name.to_string(),
        passed: margin.is_finite() && margin > 0.0,
        margin,
    }
}

/// Lists every invariant of the given form with its margin.
pub fn validate(x: &ParamForm) -> ValidationReport {
    let (form, checks) = match x {
        ParamForm::Natural(p) => (
            "natural",
            vec![
                check("alpha > 0", p.alpha),
                check("beta > 0", p.beta),
                InvariantCheck {
                    name: "lambda finite".into(),
                    passed: p.lambda.is_finite(),
                    margin: if p.lambda.is_finite() { f64::INFINITY } else { f64::NAN },
                },
            ],
        ),
        ParamForm::Support(s) => {
            let ratio = if s.a > 0.0 && s.b > 0.0 { s.ratio() } else { f64::NAN };
            (
                "support",
                vec![
                    check("0 < a", s.a),
                    check("a < b", s.b - s.a),
                    check(
                        "|lambda|((sqrt a - sqrt b)/(sqrt a + sqrt b))^2 < 1",
                        1.0 - s.lambda.abs() * ratio,
                    ),
                ],
            )
        }
        ParamForm::Spread(s) => (
            "spread",
            vec![
                check("0 < A", s.diff_sq),
                check("max(1,|lambda|) A < B", s.sum_sq - s.lambda.abs().max(1.0) * s.diff_sq),
            ],
        ),
    };
    ValidationReport {
        form: form.into(),
        valid: checks.iter().all(|c| c.passed),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn np(a: f64, b: f64, l: f64) -> NaturalParams {
        NaturalParams::new(a, b, l).unwrap()
    }

    #[test]
    fn worked_fixture_from_support() {
        let p = from_support(&SupportForm::new(1.0, 4.0, 0.0).unwrap()).unwrap();
        assert_relative_eq!(p.alpha, 2.0, max_relative = 1e-15);
        assert_relative_eq!(p.beta, 8.0, max_relative = 1e-15);
    }

    #[test]
    fn worked_fixture_solve_support() {
        let s = solve_support(&np(2.0, 8.0, 0.0)).unwrap();
        assert_relative_eq!(s.a, 1.0, max_relative = 1e-14);
        assert_relative_eq!(s.b, 4.0, max_relative = 1e-14);
        let neg = solve_support(&np(2.0, 8.0, -0.0)).unwrap();
        assert_eq!(s, SupportForm { lambda: -0.0, ..neg });
    }

    #[test]
    fn narrow_support_sends_alpha_to_infinity() {
        let mut last = 0.0;
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let p = from_support(&SupportForm::new(1.0, 1.0 + eps, 0.0).unwrap()).unwrap();
            assert!(p.alpha > last);
            last = p.alpha;
        }
        assert!(last > 1e8);
    }

    #[test]
    fn lambda_sign_flip_reflects_support() {
        let p = np(1.5, 0.7, 2.3);
        let s = solve_support(&p).unwrap();
        let m = solve_support(&NaturalParams { lambda: -2.3, ..p }).unwrap();
        assert_relative_eq!(m.a, p.beta / (p.alpha * s.b), max_relative = 1e-12);
        assert_relative_eq!(m.b, p.beta / (p.alpha * s.a), max_relative = 1e-12);
    }

    #[test]
    fn spread_fixture_both_ways() {
        let sp = support_to_spread(&SupportForm::new(1.0, 4.0, 0.0).unwrap()).unwrap();
        assert_relative_eq!(sp.diff_sq, 1.0, max_relative = 1e-15);
        assert_relative_eq!(sp.sum_sq, 9.0, max_relative = 1e-15);
        let back = spread_to_support(&SpreadForm::new(1.0, 9.0, 0.0).unwrap()).unwrap();
        assert_relative_eq!(back.a, 1.0, max_relative = 1e-15);
        assert_relative_eq!(back.b, 4.0, max_relative = 1e-15);
        match reparameterize(&Reparameterized::Spread(sp)).unwrap() {
            Reparameterized::Support(s) => assert_relative_eq!(s.b, 4.0, max_relative = 1e-15),
            _ => panic!("wrong direction"),
        }
    }

    #[test]
    fn degenerate_spread_rejected() {
        assert!(support_to_spread(&SupportForm { a: 2.0, b: 2.0, lambda: 0.0 }).is_err());
        assert!(SpreadForm::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn roots_fixture() {
        let r = spectral_roots(&np(2.0, 8.0, 0.0)).unwrap();
        assert_relative_eq!(r.gamma, -0.53125, max_relative = 1e-14);
        assert_relative_eq!(r.delta, -0.25, max_relative = 1e-14);
        assert_relative_eq!(r.eta, 2.0, max_relative = 1e-14);
        assert_relative_eq!(4.0 * 8.0 * r.eta * r.delta * r.delta, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn lambda_zero_equalities() {
        let p = np(0.8, 3.1, 0.0);
        let r = spectral_roots(&p).unwrap();
        assert_relative_eq!(r.eta, p.alpha, max_relative = 1e-14);
        assert_relative_eq!(r.delta, -(p.alpha / (4.0 * p.beta)).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn inversion_rules() {
        let p = np(2.0, 8.0, 0.0);
        assert_eq!(invert_params(&p), np(8.0, 2.0, 0.0));
        let q = np(1.3, 0.4, -0.6);
        assert_eq!(invert_params(&invert_params(&q)), q);
        let sym = solve_support(&np(1.7, 1.7, 0.0)).unwrap();
        assert_relative_eq!(sym.a * sym.b, 1.0, max_relative = 1e-13);
    }

    #[test]
    fn validation_reports() {
        let ok = validate(&ParamForm::Spread(SpreadForm { diff_sq: 1.0, sum_sq: 9.0, lambda: 0.0 }));
        assert!(ok.valid);
        let bad = validate(&ParamForm::Spread(SpreadForm { diff_sq: 3.0, sum_sq: 2.0, lambda: 0.0 }));
        assert!(!bad.valid);
        assert!(!bad.checks[1].passed);
        let bad_l = validate(&ParamForm::Spread(SpreadForm { diff_sq: 1.0, sum_sq: 2.0, lambda: 3.0 }));
        assert!(!bad_l.valid);
        assert_relative_eq!(bad_l.checks[1].margin, -1.0);
    }

    #[test]
    fn invalid_support_names_the_inequality() {
        let err = from_support(&SupportForm { a: 1.0, b: 4.0, lambda: 10.0 }).unwrap_err();
        assert!(err.to_string().contains("|lambda|"), "{err}");
        let err = from_support(&SupportForm { a: 4.0, b: 1.0, lambda: 0.0 }).unwrap_err();
        assert!(err.to_string().contains("a < b"), "{err}");
    }

    #[test]
    fn extreme_beta_keeps_precision() {
        for lambda in [-3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
            let p = np(1.0, 1e-10, lambda);
            let s = solve_support(&p).unwrap();
            let (r1, r2) = support_residuals(&p, &s);
            assert!(r1 < 1e-12 && r2 < 1e-12, "lambda {lambda}: {r1} {r2}");
            let back = from_support(&s).unwrap();
            assert_relative_eq!(back.beta, p.beta, max_relative = 1e-9);
        }
    }

    proptest! {
        #[test]
        fn support_round_trip(la in -2.0f64..1.0, lb in 0.05f64..3.0, frac in -0.99f64..0.99) {
            let a = 10f64.powf(la);
            let b = a * (1.0 + 10f64.powf(lb - 1.0));
            let s0 = SupportForm { a, b, lambda: 0.0 };
            let lambda = frac / s0.ratio();
            let s = SupportForm::new(a, b, lambda.clamp(-50.0, 50.0)).unwrap();
            let p = from_support(&s).unwrap();
            let back = solve_support(&p).unwrap();
            prop_assert!(((back.a - s.a) / s.a).abs() < 1e-10);
            prop_assert!(((back.b - s.b) / s.b).abs() < 1e-10);
        }

        #[test]
        fn root_identities(la in -1.5f64..1.5, lb in -1.5f64..1.5, lambda in -5.0f64..5.0) {
            let p = np(10f64.powf(la), 10f64.powf(lb), lambda);
            let r = spectral_roots(&p).unwrap();
            prop_assert!(r.gamma < 0.0 && r.delta < 0.0);
            prop_assert!(r.eta >= p.alpha);
            let ident = 4.0 * p.beta * r.eta * r.delta * r.delta;
            prop_assert!(((ident - p.alpha * p.alpha) / (p.alpha * p.alpha)).abs() < 1e-12);
        }

        #[test]
        fn quartic_symmetric_in_lambda(la in -1.0f64..1.0, lb in -1.0f64..1.0, lambda in 0.1f64..4.0, z in -3.0f64..3.0) {
            let p = np(10f64.powf(la), 10f64.powf(lb), lambda);
            let m = NaturalParams { lambda: -lambda, ..p };
            let sp = solve_support(&p).unwrap();
            let sm = solve_support(&m).unwrap();
            let fp = quartic_expanded(&p, &sp, z);
            let fm = quartic_expanded(&m, &sm, z);
            let scale = fp.abs().max(p.alpha * p.alpha);
            prop_assert!((fp - fm).abs() <= 1e-10 * scale, "{} vs {}", fp, fm);
        }
    }
}
