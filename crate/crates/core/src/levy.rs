//! Free Lévy–Khintchine data of `μ(α, β, λ)` and free self-decomposability.
//!
//! The Lévy measure is
//!
//! ```text
//! τ(dx) = (1 − δx)√(β(1 − ηx)) / (π x^{3/2} (1 − αx)) 1_{(0,1/η)}(x) dx + max(λ, 0) δ_{1/α}(dx),
//! ```
//!
//! drift and semicircular part vanish, and `z·r(z) = ∫ (1/(1 − zx) − 1) τ(dx)`.
//!
//! Integrals against the density part use `x = sin²φ / η`, which removes the
//! `x^{−1/2}` singularity of `x·τ(x)` at 0 and the square-root zero at `1/η`,
//! and cancels the shared zero of `√(1 − ηx)` and `1 − αx` when `λ = 0`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FgigError, Result};
use crate::measures::Atom;
use crate::params::{solve_geometry, NaturalParams, SpectralRoots, SpreadForm};
use crate::quad::adaptive;
use crate::transforms::{neville_at_zero, FgigRTransform};

const K_GRID: usize = 10_000;

/// `τ` density at `x`; zero outside `(0, 1/η)`.
pub fn levy_density(p: &NaturalParams, x: f64) -> Result<f64> {
    let (g, _) = solve_geometry(p, None)?;
    Ok(levy_density_with(p, &g.roots(), x))
}

fn levy_density_with(p: &NaturalParams, r: &SpectralRoots, x: f64) -> f64 {
    if !(x > 0.0 && x * r.eta < 1.0) {
        return 0.0;
    }
    let lead = (1.0 - r.delta * x) * p.beta.sqrt() / (PI * x.powf(1.5));
    if p.lambda == 0.0 {
        // η = α: √(1 − ηx)/(1 − αx) = 1/√(1 − αx)
        lead / (1.0 - p.alpha * x).sqrt()
    } else {
        lead * (1.0 - r.eta * x).sqrt() / (1.0 - p.alpha * x)
    }
}

/// Free Lévy–Khintchine triplet in reduced form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyTriplet {
    pub params: NaturalParams,
    pub roots: SpectralRoots,
    pub drift: f64,
    pub semicircular: f64,
    pub atom: Atom,
    /// right end `1/η` of the density part
    pub support_end: f64,
}

impl LevyTriplet {
    pub fn levy_density(&self, x: f64) -> f64 {
        levy_density_with(&self.params, &self.roots, x)
    }

    /// `dx/dφ · x·τ(x)` at `x = sin²φ/η`, smooth on `[0, π/2]`.
    fn weighted(&self, phi: f64) -> (f64, f64) {
        let p = &self.params;
        let r = &self.roots;
        let (s, c) = phi.sin_cos();
        let x = s * s / r.eta;
        let tilt = 1.0 - p.alpha / r.eta;
        let w = 2.0 * p.beta.sqrt() * (1.0 - r.delta * x) * c * c
            / (PI * r.eta.sqrt() * (c * c + tilt * s * s));
        (x, w)
    }

    /// `∫ min(1, x) τ(dx)` over the density part plus the atom.
    pub fn small_jump_integral(&self) -> Result<f64> {
        let cont = adaptive(0.0, FRAC_PI_2, 1e-14, 1e-13, |phi| {
            let (x, w) = self.weighted(phi);
            if x <= 1.0 { w } else { w / x }
        })?;
        Ok(cont + self.atom.weight * self.atom.location.min(1.0))
    }
}

/// Numerical triplet: drift and semicircular coefficient are extrapolated
/// limits of `r(u)` and `r(u)/u` along `u = −10^k`, `k = 2..6`.
pub fn levy_triplet(p: &NaturalParams) -> Result<LevyTriplet> {
    let rt = FgigRTransform::new(p)?;
    let roots = *rt.roots();
    // r(u) ~ |u|^{-1/2}: expansions are in s = |u|^{-1/2}
    let mut s = Vec::new();
    let mut drift_seq = Vec::new();
    let mut semi_seq = Vec::new();
    for k in 2..=6 {
        let u = -(10f64.powi(k));
        let v = rt.eval(Complex64::new(u, 0.0))?.re;
        s.push((-u).powf(-0.5));
        drift_seq.push(v);
        semi_seq.push(v / u);
    }
    let drift = settled_limit("levy_triplet drift", &s, &drift_seq)?;
    let semicircular = settled_limit("levy_triplet semicircular", &s, &semi_seq)?;
    Ok(LevyTriplet {
        params: *p,
        roots,
        drift,
        semicircular,
        atom: Atom { location: 1.0 / p.alpha, weight: p.lambda.max(0.0) },
        support_end: 1.0 / roots.eta,
    })
}

fn settled_limit(routine: &'static str, s: &[f64], v: &[f64]) -> Result<f64> {
    let all = neville_at_zero(s, v);
    let fewer = neville_at_zero(&s[1..], &v[1..]);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let gap = (all - fewer).abs();
    if !(gap <= 1e-3 * scale + 1e-12) {
        return Err(FgigError::numeric(routine, "limit sequence does not settle", gap));
    }
    Ok(all)
}

/// `ξ′z + max(λ,0)(1/(1 − z/α) − 1) + ∫ (1/(1 − zx) − 1) τ(x) dx` for `z ∈ ℂ⁻`.
pub fn reconstruct_cumulant(t: &LevyTriplet, z: Complex64) -> Result<Complex64> {
    if z.im > 0.0 {
        return Err(FgigError::domain(format!("z = {z} is not in the closed lower half-plane")));
    }
    if z.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let integral = adaptive(0.0, FRAC_PI_2, 1e-14, 1e-13, |phi| {
        let (x, w) = t.weighted(phi);
        z / (1.0 - z * x) * w
    })
    .map_err(|e| match e {
        FgigError::Numeric { residual, .. } => {
            FgigError::numeric("reconstruct_cumulant", format!("quadrature failed at z = {z}"), residual)
        }
        other => other,
    })?;
    let atom = if t.atom.weight > 0.0 {
        t.atom.weight * (1.0 / (1.0 - z * t.atom.location) - 1.0)
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(t.drift * z + atom + integral)
}

/// `D = 4(B + λA)(8λ²A³ − 9λ²A²B + B³) / (A²B(A − B)²(B − λA))`.
pub fn fsd_discriminant(s: &SpreadForm) -> f64 {
    let (a, b, l) = (s.diff_sq, s.sum_sq, s.lambda);
    4.0 * (b + l * a) * (8.0 * l * l * a.powi(3) - 9.0 * l * l * a * a * b + b.powi(3))
        / (a * a * b * (a - b).powi(2) * (b - l * a))
}

/// `λ* = −B^{3/2} / (A√(9B − 8A))`.
pub fn fsd_threshold(diff_sq: f64, sum_sq: f64) -> f64 {
    -sum_sq.powf(1.5) / (diff_sq * (9.0 * sum_sq - 8.0 * diff_sq).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsdReport {
    pub params: NaturalParams,
    pub spread: SpreadForm,
    /// `D` from the `(A, B, λ)` closed form
    pub discriminant: f64,
    /// `D = (δ − 3α)² − 4(2αη − 2ηδ + αδ)` from the roots
    pub discriminant_from_roots: f64,
    /// `2αη − 2ηδ + αδ`, positive for all valid parameters
    pub quadratic_coefficient: f64,
    pub threshold: f64,
    pub fsd: bool,
    /// `x·τ(x)` nonincreasing on a uniform grid over `(0, 1/η)`, no atom
    pub grid_monotone: bool,
    pub agrees: bool,
}

/// Free self-decomposability verdict with a grid cross-check.
pub fn fsd_report(p: &NaturalParams) -> Result<FsdReport> {
    let (g, _) = solve_geometry(p, None)?;
    let roots = g.roots();
    let spread = g.spread();
    let (al, de, et) = (p.alpha, roots.delta, roots.eta);
    let coef = 2.0 * al * et - 2.0 * et * de + al * de;
    let d_roots = (de - 3.0 * al).powi(2) - 4.0 * coef;
    let d = fsd_discriminant(&spread);
    let fsd = p.lambda <= 0.0 && d <= 0.0;
    let grid_monotone = p.lambda <= 0.0 && k_nonincreasing(p, &roots);
    Ok(FsdReport {
        params: *p,
        spread,
        discriminant: d,
        discriminant_from_roots: d_roots,
        quadratic_coefficient: coef,
        threshold: fsd_threshold(spread.diff_sq, spread.sum_sq),
        fsd,
        grid_monotone,
        agrees: fsd == grid_monotone,
    })
}

fn k_nonincreasing(p: &NaturalParams, r: &SpectralRoots) -> bool {
    let end = 1.0 / r.eta;
    let k = |x: f64| x * levy_density_with(p, r, x);
    let mut prev = k(end / (K_GRID + 1) as f64);
    for i in 2..=K_GRID {
        let cur = k(end * i as f64 / (K_GRID + 1) as f64);
        if cur - prev > 1e-9 * prev.abs().max(1.0) {
            return false;
        }
        prev = cur;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(a: f64, b: f64, l: f64) -> NaturalParams {
        NaturalParams::new(a, b, l).unwrap()
    }

    #[test]
    fn density_fixture() {
        let q = p(2.0, 8.0, 0.0);
        let expected = 1.0625 * 2.0 / (PI * 0.25f64.powf(1.5) * 0.5);
        assert_relative_eq!(levy_density(&q, 0.25).unwrap(), expected, max_relative = 1e-12);
        assert_relative_eq!(expected, 10.823, max_relative = 1e-4);
        assert_eq!(levy_density(&q, 0.5).unwrap(), 0.0);
        assert_eq!(levy_density(&q, 0.7).unwrap(), 0.0);
        assert_eq!(levy_density(&q, -0.1).unwrap(), 0.0);
    }

    #[test]
    fn triplet_limits_and_atoms() {
        let t = levy_triplet(&p(2.0, 8.0, 0.0)).unwrap();
        assert!(t.drift.abs() <= 1e-6, "{}", t.drift);
        assert!(t.semicircular.abs() <= 1e-6);
        assert_eq!(t.atom.weight, 0.0);
        let t = levy_triplet(&p(1.0, 1.0, 5.0)).unwrap();
        assert_eq!(t.atom, Atom { location: 1.0, weight: 5.0 });
        assert!(t.drift.abs() <= 1e-6);
        let t = levy_triplet(&p(1.0, 1.0, -5.0)).unwrap();
        assert_eq!(t.atom.weight, 0.0);
    }

    #[test]
    fn small_jumps_finite_and_refinement_stable() {
        let t = levy_triplet(&p(2.0, 8.0, 0.0)).unwrap();
        let v = t.small_jump_integral().unwrap();
        assert!(v.is_finite() && v > 0.0);
        // crude check by a plain rule in φ at two resolutions
        let rule = |n: usize| -> f64 {
            let h = FRAC_PI_2 / n as f64;
            (0..n).map(|i| t.weighted((i as f64 + 0.5) * h).1 * h).sum()
        };
        assert!((rule(4000) - rule(8000)).abs() < 1e-8);
        assert_relative_eq!(rule(8000), v, max_relative = 1e-7);
    }

    #[test]
    fn reconstruction_matches_cumulant_transform() {
        for q in [p(2.0, 8.0, 0.0), p(1.0, 1.0, 5.0), p(0.7, 2.0, -1.3), p(1.5, 0.4, 0.01)] {
            let t = levy_triplet(&q).unwrap();
            let rt = FgigRTransform::new(&q).unwrap();
            for z in [Complex64::new(-1.0, -1.0), Complex64::new(3.0, -0.2), Complex64::new(0.01, -1e-3), Complex64::new(-40.0, 0.0)] {
                let a = reconstruct_cumulant(&t, z).unwrap();
                let b = rt.cumulant_transform(z).unwrap();
                assert!((a - b).norm() <= 1e-6, "{q:?} z={z}: {a} vs {b}");
            }
            assert_eq!(reconstruct_cumulant(&t, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn threshold_fixtures() {
        assert_relative_eq!(fsd_threshold(3.0, 4.0), -4.0 * 3f64.sqrt() / 9.0, max_relative = 1e-14);
        // λ = −1: FSD iff B ≤ ((−1+√33)/2) A
        let crit = (-1.0 + 33f64.sqrt()) / 2.0;
        assert_relative_eq!(fsd_threshold(1.0, crit), -1.0, max_relative = 1e-13);
        let below = SpreadForm { diff_sq: 1.0, sum_sq: crit - 0.01, lambda: -1.0 };
        let above = SpreadForm { diff_sq: 1.0, sum_sq: crit + 0.01, lambda: -1.0 };
        assert!(fsd_discriminant(&below) < 0.0);
        assert!(fsd_discriminant(&above) > 0.0);
        let at = SpreadForm { diff_sq: 3.0, sum_sq: 4.0, lambda: fsd_threshold(3.0, 4.0) };
        assert!(fsd_discriminant(&at).abs() < 1e-9);
    }

    #[test]
    fn reports() {
        let r = fsd_report(&p(2.0, 8.0, -1.0)).unwrap();
        assert_relative_eq!(r.discriminant, r.discriminant_from_roots, max_relative = 1e-9, epsilon = 1e-12);
        assert!(r.agrees, "{r:?}");
        assert_eq!(r.fsd, r.spread.sum_sq <= (-1.0 + 33f64.sqrt()) / 2.0 * r.spread.diff_sq);
        for q in [p(1.0, 1.0, 5.0), p(2.0, 8.0, 0.5)] {
            let r = fsd_report(&q).unwrap();
            assert!(!r.fsd && r.agrees);
        }
        let r = fsd_report(&p(2.0, 8.0, 0.0)).unwrap();
        assert!(!r.fsd && !r.grid_monotone);
        let r = fsd_report(&p(1.0, 1.0, -6.0)).unwrap();
        assert!(r.agrees, "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn coefficient_positive_and_discriminants_agree(a in 0.1f64..5.0, b in 0.1f64..5.0, l in -6.0f64..6.0) {
            let r = fsd_report(&p(a, b, l)).unwrap();
            prop_assert!(r.quadratic_coefficient > 0.0);
            let scale = r.discriminant_from_roots.abs().max(r.roots_scale().powi(2));
            prop_assert!((r.discriminant - r.discriminant_from_roots).abs() <= 1e-8 * scale);
        }
    }

    impl FsdReport {
        fn roots_scale(&self) -> f64 {
            self.params.alpha.max(1.0 / self.spread.diff_sq)
        }
    }
}
