//! Free and classical entropy with the potential
//! `V(x) = (1−λ) log x + αx + β/x`.
//!
//! `μ(α, β, λ)` maximizes `I(μ) = ∫∫ log|x−y| dμ dμ − ∫ V dμ`; the classical
//! GIG density `∝ e^{−V}` maximizes `H(p) = −∫ p log p − ∫ V p`, with maximum
//! `−log((α/β)^{λ/2} / (2K_λ(2√(αβ))))`.

use serde::{Deserialize, Serialize};

use crate::error::{FgigError, Result};
use crate::measures::{build_fgig, SpectralMeasure};
use crate::params::NaturalParams;
use crate::quad::{adaptive, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
}

impl Potential {
    pub fn new(alpha: f64, beta: f64, lambda: f64) -> Result<Self> {
        NaturalParams::new(alpha, beta, lambda)?;
        Ok(Potential { alpha, beta, lambda })
    }

    pub fn of(p: &NaturalParams) -> Self {
        Potential { alpha: p.alpha, beta: p.beta, lambda: p.lambda }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (1.0 - self.lambda) * x.ln() + self.alpha * x + self.beta / x
    }

    /// Minimizer of `V`, the mode of `e^{−V}`.
    pub fn minimizer(&self) -> f64 {
        let b = 1.0 - self.lambda;
        // αx² + (1−λ)x − β = 0, positive root without cancellation
        let disc = (b * b + 4.0 * self.alpha * self.beta).sqrt();
        if b >= 0.0 {
            2.0 * self.beta / (b + disc)
        } else {
            (disc - b) / (2.0 * self.alpha)
        }
    }
}

/// `∫∫ log|x − y| dμ(x) dμ(y)` for an atomless measure on `[lo, hi]`.
///
/// With `x = m + h cos θ`, `log|x − y| = log(h/2) − Σ_k (2/k) cos kθ cos kφ`,
/// so the energy is `log(h/2) − Σ_k (2/k) c_k²` with Chebyshev moments
/// `c_k = ∫ T_k((x − m)/h) dμ`. The sum stops once the terms are negligible
/// or at half the quadrature node count.
pub fn log_energy(m: &SpectralMeasure) -> Result<f64> {
    if m.atoms().iter().any(|a| a.weight > 0.0) {
        return Err(FgigError::domain("log energy is infinite for measures with atoms"));
    }
    let Some((lo, hi)) = m.continuous_support() else {
        return Err(FgigError::domain("log energy needs an absolutely continuous part"));
    };
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mass = m.mass();
    let kmax = (m.node_count() / 2).clamp(8, 4096);
    let mut sum = 0.0;
    let mut quiet = 0;
    for k in 1..=kmax {
        let kf = k as f64;
        let ck = m.integrate(|x| (kf * ((x - mid) / half).clamp(-1.0, 1.0).acos()).cos());
        let term = 2.0 / kf * ck * ck;
        sum += term;
        quiet = if term < 1e-17 * mass * mass { quiet + 1 } else { 0 };
        if quiet >= 4 {
            break;
        }
    }
    Ok(mass * mass * (0.5 * half).ln() - sum)
}

/// `I(μ) = ∫∫ log|x − y| dμ dμ − ∫ V dμ`.
pub fn free_entropy(m: &SpectralMeasure, v: &Potential) -> Result<f64> {
    let (lo, _) = m.support();
    if !(lo > 0.0) {
        return Err(FgigError::domain(format!("free entropy needs support in (0, inf) (lower end {lo})")));
    }
    Ok(log_energy(m)? - m.integrate(|x| v.eval(x)))
}

/// `K_ν(w)·e^{w} = ∫₀^∞ e^{−w(cosh t − 1)} cosh(νt) dt`, by Gauss–Legendre
/// with 64 nodes per unit of `t`, up to where the integrand drops below
/// `1e−18`.
pub fn bessel_k_scaled(nu: f64, w: f64) -> Result<f64> {
    if !(w > 0.0 && w.is_finite() && nu.is_finite()) {
        return Err(FgigError::domain(format!("Bessel K needs w > 0 (got {w})")));
    }
    let nu = nu.abs();
    let f = |t: f64| {
        // e^{−w(cosh t − 1) + ν t}·(1 + e^{−2νt})/2 without overflow
        let c = if t < 1e-3 { t * t / 2.0 * (1.0 + t * t / 12.0) } else { t.cosh() - 1.0 };
        0.5 * ((nu * t - w * c).exp() + (-nu * t - w * c).exp())
    };
    let mut end = 1.0;
    while f(end) > 1e-18 * f(0.0).max(f(end * 0.5)) || end < 2.0 {
        end += 1.0;
        if end > 1e4 {
            return Err(FgigError::numeric("bessel_k", "integrand does not decay", f(end)));
        }
    }
    let gl = GaussLegendre::new(64);
    let mut acc = 0.0;
    let mut a = 0.0;
    while a < end {
        acc += gl.integrate(a, a + 1.0, f);
        a += 1.0;
    }
    Ok(acc)
}

/// Modified Bessel function of the second kind, `K_ν(w)`.
pub fn bessel_k(nu: f64, w: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, w)? * (-w).exp())
}

/// `log((α/β)^{λ/2} / (2K_λ(2√(αβ))))`, the log normalizer of the GIG law.
fn log_normalizer(alpha: f64, beta: f64, lambda: f64) -> Result<f64> {
    NaturalParams::new(alpha, beta, lambda)?;
    let w = 2.0 * (alpha * beta).sqrt();
    let log_k = bessel_k_scaled(lambda, w)?.ln() - w;
    Ok(0.5 * lambda * (alpha / beta).ln() - 2f64.ln() - log_k)
}

/// Classical GIG density `(α/β)^{λ/2} / (2K_λ(2√(αβ))) · x^{λ−1} e^{−(αx + β/x)}`.
pub fn classical_gig_density(alpha: f64, beta: f64, lambda: f64, x: f64) -> Result<f64> {
    let log_c = log_normalizer(alpha, beta, lambda)?;
    if !(x > 0.0) {
        return Ok(0.0);
    }
    Ok((log_c - Potential { alpha, beta, lambda }.eval(x)).exp())
}

/// Evaluator of the classical GIG density with the normalizer computed once.
pub fn classical_gig(alpha: f64, beta: f64, lambda: f64) -> Result<impl Fn(f64) -> f64> {
    let log_c = log_normalizer(alpha, beta, lambda)?;
    let v = Potential { alpha, beta, lambda };
    Ok(move |x: f64| if x > 0.0 { (log_c - v.eval(x)).exp() } else { 0.0 })
}

/// `−log((α/β)^{λ/2} / (2K_λ(2√(αβ))))`, the upper bound of `H` over densities.
pub fn gibbs_bound(alpha: f64, beta: f64, lambda: f64) -> Result<f64> {
    Ok(-log_normalizer(alpha, beta, lambda)?)
}

/// `∫₀^∞ f(x) dx` split at `split`, each half integrated in `u = log x` over
/// a range grown until the integrand is negligible.
fn integrate_half_line(f: &dyn Fn(f64) -> f64, split: f64) -> Result<f64> {
    let g = |u: f64| {
        let x = u.exp();
        let v = f(x) * x;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let u0 = split.ln();
    let reach = |dir: f64| -> Result<f64> {
        let mut u = u0;
        let mut quiet = 0;
        for _ in 0..400 {
            u += dir * 0.5;
            quiet = if g(u).abs() < 1e-22 { quiet + 1 } else { 0 };
            if quiet >= 6 {
                return Ok(u);
            }
        }
        Err(FgigError::numeric("classical_entropy", "integrand does not decay on (0, inf)", g(u)))
    };
    let (ul, ur) = (reach(-1.0)?, reach(1.0)?);
    let left = adaptive(ul, u0, 1e-15, 1e-13, g)?;
    let right = adaptive(u0, ur, 1e-15, 1e-13, g)?;
    Ok(left + right)
}

/// `H(p) = −∫ p log p − ∫ V p` for a density `p` on `(0, ∞)`; the integrals
/// are split at the minimizer of `V` and taken in `log x`.
pub fn classical_entropy(p: &dyn Fn(f64) -> f64, v: &Potential) -> Result<f64> {
    let integrand = |x: f64| {
        let px = p(x);
        if px > 0.0 {
            -px * (px.ln() + v.eval(x))
        } else {
            0.0
        }
    };
    integrate_half_line(&integrand, v.minimizer())
}

/// `∫ p log(p/q)`, nonnegative by the Gibbs inequality.
pub fn relative_entropy(p: &dyn Fn(f64) -> f64, q: &dyn Fn(f64) -> f64, split: f64) -> Result<f64> {
    let integrand = |x: f64| {
        let px = p(x);
        if px > 0.0 {
            px * (px.ln() - q(x).ln())
        } else {
            0.0
        }
    };
    integrate_half_line(&integrand, split)
}

/// `∫₀^∞ p`, for normalization checks.
pub fn total_mass(p: &dyn Fn(f64) -> f64, split: f64) -> Result<f64> {
    integrate_half_line(p, split)
}

/// A competitor in [`maximality_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// the fGIG law with other parameters
    Params(NaturalParams),
    /// the maximizer dilated by a factor
    Scale(f64),
}

impl Perturbation {
    /// Euclidean distance of the parameters, or `|c − 1|` for a dilation.
    pub fn distance(&self, base: &NaturalParams) -> f64 {
        match self {
            Perturbation::Params(q) => {
                ((q.alpha - base.alpha).powi(2) + (q.beta - base.beta).powi(2) + (q.lambda - base.lambda).powi(2)).sqrt()
            }
            Perturbation::Scale(c) => (c - 1.0).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalityEntry {
    pub perturbation: Perturbation,
    pub distance: f64,
    pub value: f64,
    /// `I(μ(p)) − I(competitor)`
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalityReport {
    pub params: NaturalParams,
    pub value: f64,
    pub entries: Vec<MaximalityEntry>,
    /// every competitor at distance ≥ 0.05 has a positive margin
    pub maximal: bool,
}

const ENTROPY_NODES: usize = 256;

/// `I(μ(p), V_p)` against `I(competitor, V_p)` for each perturbation.
pub fn maximality_scan(p: &NaturalParams, perturbations: &[Perturbation]) -> Result<MaximalityReport> {
    let v = Potential::of(p);
    let base = build_fgig(p, ENTROPY_NODES)?;
    let value = free_entropy(&base, &v)?;
    let entries = perturbations
        .iter()
        .map(|pert| {
            let m = match pert {
                Perturbation::Params(q) => build_fgig(q, ENTROPY_NODES)?,
                Perturbation::Scale(c) => base.dilate(*c)?,
            };
            let other = free_entropy(&m, &v)?;
            Ok(MaximalityEntry { perturbation: *pert, distance: pert.distance(p), value: other, margin: value - other })
        })
        .collect::<Result<Vec<_>>>()?;
    let maximal = entries.iter().filter(|e| e.distance >= 0.05).all(|e| e.margin > 0.0);
    Ok(MaximalityReport { params: *p, value, entries, maximal })
}
