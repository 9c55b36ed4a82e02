//! Compactly supported spectral measures: atoms plus an absolutely continuous
//! part, with quadrature, CDF and Cauchy-transform machinery.
//!
//! Two kinds of continuous part are supported. A *square-root edge* part has
//! density `√((x − lo)(hi − x))·ρ(x)` with `ρ` analytic near the support; this
//! covers fGIG, free Poisson, semicircle and their images under translation,
//! dilation and `x ↦ 1/x`. A *tabulated* part is a piecewise-linear density on
//! a grid, as produced by numerical free convolution.
//!
//! For the square-root edge part the substitution `x = c + h cos θ` absorbs
//! the edge factor, so integrals become smooth periodic integrals in `θ`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FgigError, Result};
use crate::params::{solve_support, NaturalParams, SupportForm};
use crate::quad::{adaptive, chebyshev2_angles, GaussLegendre};

/// Default number of Gauss-Chebyshev nodes.
pub const DEFAULT_NODES: usize = 256;

const CDF_PANELS: usize = 128;

/// Analytic factor `ρ` of a square-root edge density, evaluated off the axis
/// for Cauchy transforms.
pub type Profile = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Closed-form Cauchy transform of a whole measure, when one is known.
pub type CauchyFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Free Poisson (Marchenko-Pastur) law `ν(jump, rate)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreePoissonParams {
    pub jump: f64,
    pub rate: f64,
}

impl FreePoissonParams {
    pub fn new(jump: f64, rate: f64) -> Result<Self> {
        let fp = FreePoissonParams { jump, rate };
        fp.check()?;
        Ok(fp)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.jump.is_finite() && self.jump > 0.0) {
            return Err(FgigError::domain(format!("free Poisson jump > 0 violated ({})", self.jump)));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(FgigError::domain(format!("free Poisson rate > 0 violated ({})", self.rate)));
        }
        Ok(())
    }

    /// Edges `jump(1 ∓ √rate)²` of the continuous part.
    pub fn edges(&self) -> (f64, f64) {
        let s = self.rate.sqrt();
        let lo = if (self.rate - 1.0).abs() < f64::EPSILON {
            0.0
        } else {
            // (1 − √r)² = (1 − r)²/(1 + √r)²
            self.jump * ((1.0 - self.rate) / (1.0 + s)).powi(2)
        };
        (lo, self.jump * (1.0 + s) * (1.0 + s))
    }
}

#[derive(Clone)]
struct SqrtEdge {
    lo: f64,
    hi: f64,
    profile: Profile,
    /// cumulative mass from `θ_k = kπ/P` to `π`, i.e. `F(x(θ_k))`
    cum: Vec<f64>,
}

impl SqrtEdge {
    fn new(lo: f64, hi: f64, profile: Profile) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FgigError::domain(format!("continuous support [{lo}, {hi}] is empty")));
        }
        let mut part = SqrtEdge { lo, hi, profile, cum: Vec::new() };
        let step = PI / CDF_PANELS as f64;
        let mut cum = vec![0.0; CDF_PANELS + 1];
        for k in (0..CDF_PANELS).rev() {
            let lo_t = k as f64 * step;
            let piece = part.angular_integral(lo_t, lo_t + step)?;
            cum[k] = cum[k + 1] + piece;
        }
        part.cum = cum;
        Ok(part)
    }

    fn half(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    fn rho(&self, x: f64) -> f64 {
        (self.profile)(Complex64::new(x, 0.0)).re
    }

    /// `x(θ)` with `x − lo` and `hi − x` computed without cancellation.
    fn point(&self, theta: f64) -> (f64, f64, f64) {
        let h = self.half();
        let below = 2.0 * h * (0.5 * theta).cos().powi(2);
        let above = 2.0 * h * (0.5 * theta).sin().powi(2);
        let x = if below < above { self.lo + below } else { self.hi - above };
        (x, below, above)
    }

    fn angular_density(&self, theta: f64) -> f64 {
        let h = self.half();
        let (x, _, _) = self.point(theta);
        let s = theta.sin();
        h * h * s * s * self.rho(x)
    }

    fn angular_integral(&self, t0: f64, t1: f64) -> Result<f64> {
        adaptive(t0, t1, 1e-15, 1e-14, |t| self.angular_density(t))
    }

    fn density(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        ((x - self.lo) * (self.hi - x)).sqrt() * self.rho(x)
    }

    fn theta_of(&self, x: f64) -> f64 {
        2.0 * (self.hi - x).max(0.0).sqrt().atan2((x - self.lo).max(0.0).sqrt())
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return self.cum[0];
        }
        let theta = self.theta_of(x);
        let step = PI / CDF_PANELS as f64;
        let k = ((theta / step) as usize).min(CDF_PANELS - 1);
        let upper = (k + 1) as f64 * step;
        let partial = self.angular_integral(theta, upper).unwrap_or_else(|_| {
            GaussLegendre::new(32).integrate(theta, upper, |t| self.angular_density(t))
        });
        (self.cum[k + 1] + partial).clamp(0.0, self.cum[0])
    }

    fn nodes(&self, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = self.half();
        let (thetas, base) = chebyshev2_angles(n);
        let mut xs = Vec::with_capacity(n);
        let mut ws = Vec::with_capacity(n);
        let mut bs = Vec::with_capacity(n);
        // ascending x: θ from π down to 0
        for (t, b) in thetas.iter().zip(&base).rev() {
            let (x, _, _) = self.point(*t);
            let bw = h * h * b;
            xs.push(x);
            bs.push(bw);
            ws.push(bw * self.rho(x));
        }
        (xs, ws, bs)
    }
}

/// Interpolation rule between tabulated density values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// piecewise-linear density
    #[default]
    Linear,
    /// local cubic in the squared density; at the ends of the support the
    /// cubic of the neighboring values is continued to its zero, which
    /// resolves square-root edges between grid points
    RootCubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    Interior,
    // density vanishes like a square root at `start`
    Left,
    // ... or at `end`
    Right,
}

/// Active part `[start, end]` of one grid cell. `c` holds the coefficients of
/// the interpolating polynomial in `x - origin`: the density itself for the
/// linear rule, its square for the root rule.
#[derive(Debug, Clone, Copy)]
struct Piece {
    start: f64,
    end: f64,
    origin: f64,
    c: [f64; 4],
    edge: Edge,
}

impl Piece {
    fn empty(at: f64) -> Self {
        Piece { start: at, end: at, origin: at, c: [0.0; 4], edge: Edge::Interior }
    }

    fn is_empty(&self) -> bool {
        self.end <= self.start || self.c.iter().all(|c| *c == 0.0)
    }

    fn poly(&self, x: f64) -> f64 {
        let t = x - self.origin;
        self.c.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

const CELL_NODES: usize = 8;

#[derive(Clone)]
struct Tabulated {
    xs: Vec<f64>,
    ys: Vec<f64>,
    interp: Interpolation,
    pieces: Vec<Piece>,
    cum: Vec<f64>,
    // CELL_NODES nodes and density weights per piece
    cell_x: Vec<f64>,
    cell_w: Vec<f64>,
}

impl Tabulated {
    fn new(xs: Vec<f64>, ys: Vec<f64>, interp: Interpolation) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(FgigError::domain("tabulated density needs matching grids of length >= 2"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FgigError::domain("tabulated grid must be strictly increasing"));
        }
        if ys.iter().any(|y| !(y.is_finite() && *y >= 0.0)) {
            return Err(FgigError::domain("tabulated density must be finite and nonnegative"));
        }
        let pieces: Vec<Piece> = match interp {
            Interpolation::Linear => (0..xs.len() - 1)
                .map(|i| {
                    let slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
                    Piece { start: xs[i], end: xs[i + 1], origin: xs[i], c: [ys[i], slope, 0.0, 0.0], edge: Edge::Interior }
                })
                .collect(),
            Interpolation::RootCubic => (0..xs.len() - 1).map(|i| root_piece(&xs, &ys, i)).collect(),
        };
        let mut t = Tabulated { xs, ys, interp, pieces, cum: Vec::new(), cell_x: Vec::new(), cell_w: Vec::new() };
        let gl = GaussLegendre::new(CELL_NODES);
        let mut cum = vec![0.0; t.xs.len()];
        let (mut cx, mut cw) = (Vec::new(), Vec::new());
        for (i, pc) in t.pieces.iter().enumerate() {
            let rule = t.rule(pc, pc.start, pc.end, &gl);
            cum[i + 1] = cum[i] + rule.iter().map(|(_, w)| w).sum::<f64>();
            for k in 0..CELL_NODES {
                let (x, w) = rule.get(k).copied().unwrap_or((pc.start, 0.0));
                cx.push(x);
                cw.push(w);
            }
        }
        t.cum = cum;
        t.cell_x = cx;
        t.cell_w = cw;
        Ok(t)
    }

    fn segment(&self, x: f64) -> Option<usize> {
        if x < self.xs[0] || x > *self.xs.last().unwrap() {
            return None;
        }
        let i = self.xs.partition_point(|v| *v <= x);
        Some(i.saturating_sub(1).min(self.xs.len() - 2))
    }

    fn piece_value(&self, pc: &Piece, x: f64) -> f64 {
        if x < pc.start || x > pc.end || pc.end <= pc.start {
            return 0.0;
        }
        let v = pc.poly(x);
        match self.interp {
            Interpolation::Linear => v,
            Interpolation::RootCubic => v.max(0.0).sqrt(),
        }
    }

    fn density(&self, x: f64) -> f64 {
        match self.segment(x) {
            None => 0.0,
            Some(i) => self.piece_value(&self.pieces[i], x),
        }
    }

    /// Nodes and density weights of a Gauss rule for `∫_u^v · density dx`
    /// inside one piece. Square-root ends are integrated in `s² = |x - edge|`,
    /// where the integrand is smooth.
    fn rule(&self, pc: &Piece, u: f64, v: f64, gl: &GaussLegendre) -> Vec<(f64, f64)> {
        let (u, v) = (u.max(pc.start), v.min(pc.end));
        if pc.is_empty() || v <= u {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(gl.nodes().len());
        let mut push = |lo: f64, hi: f64, map: &dyn Fn(f64) -> (f64, f64)| {
            let half = 0.5 * (hi - lo);
            for (t, w) in gl.nodes().iter().zip(gl.weights()) {
                let (x, jac) = map(lo + half * (1.0 + t));
                out.push((x, w * half * jac * self.piece_value(pc, x)));
            }
        };
        match pc.edge {
            Edge::Left => {
                let e = pc.start;
                push((u - e).sqrt(), (v - e).sqrt(), &|s| (e + s * s, 2.0 * s));
            }
            Edge::Right => {
                let e = pc.end;
                push((e - v).sqrt(), (e - u).sqrt(), &|s| (e - s * s, 2.0 * s));
            }
            Edge::Interior => push(u, v, &|x| (x, 1.0)),
        }
        out
    }

    fn cdf(&self, x: f64) -> f64 {
        let total = *self.cum.last().unwrap();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= *self.xs.last().unwrap() {
            return total;
        }
        let i = self.segment(x).unwrap();
        let pc = &self.pieces[i];
        let part: f64 = self.rule(pc, pc.start, x, &GaussLegendre::new(CELL_NODES)).iter().map(|(_, w)| w).sum();
        (self.cum[i] + part).clamp(0.0, total)
    }

    fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        self.cell_x.iter().zip(&self.cell_w).filter(|(_, w)| **w != 0.0).map(|(x, w)| (*x, *w)).unzip()
    }

    /// Cauchy transform of the interpolant. Far cells use their stored Gauss
    /// rule; near cells the exact logarithmic formula (linear rule) or
    /// adaptive quadrature.
    fn cauchy(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, pc) in self.pieces.iter().enumerate() {
            if pc.is_empty() {
                continue;
            }
            let width = pc.end - pc.start;
            let mid = 0.5 * (pc.start + pc.end);
            if (z - mid).norm() > 8.0 * width {
                let r = i * CELL_NODES..(i + 1) * CELL_NODES;
                for (x, w) in self.cell_x[r.clone()].iter().zip(&self.cell_w[r]) {
                    acc += w / (z - x);
                }
            } else if self.interp == Interpolation::Linear {
                let slope = pc.c[1];
                let at_z = pc.c[0] + slope * (z - pc.origin);
                acc += at_z * ((z - pc.start).ln() - (z - pc.end).ln()) - slope * width;
            } else {
                let integrand = |x: f64| Complex64::new(self.piece_value(pc, x), 0.0) / (z - x);
                acc += adaptive(pc.start, pc.end, 1e-15, 1e-13, integrand)
                    .unwrap_or_else(|_| GaussLegendre::new(64).integrate(pc.start, pc.end, integrand));
            }
        }
        acc
    }
}

/// Monomial coefficients, in `t - ts[0]`, of the polynomial through `(ts, qs)`
/// (at most four points).
fn interpolating_cubic(ts: &[f64], qs: &[f64]) -> [f64; 4] {
    let n = ts.len();
    let mut dd = qs.to_vec();
    for k in 1..n {
        for j in (k..n).rev() {
            dd[j] = (dd[j] - dd[j - 1]) / (ts[j] - ts[j - k]);
        }
    }
    // expand the Newton form, innermost factor first
    let mut c = [0.0; 4];
    for k in (0..n).rev() {
        // c <- c * (t - (ts[k] - ts[0])) + dd[k]
        let shift = ts[k] - ts[0];
        let mut next = [0.0; 4];
        for p in 0..4 {
            next[p] -= shift * c[p];
            if p + 1 < 4 {
                next[p + 1] += c[p];
            }
        }
        next[0] += dd[k];
        c = next;
    }
    c
}

/// Root-rule piece for cell `i`. Interior cells interpolate `y²` through the
/// nearest positive values (four when available); a cell with one zero end
/// continues its neighbors' cubic to the zero crossing.
fn root_piece(xs: &[f64], ys: &[f64], i: usize) -> Piece {
    let n = xs.len();
    let pos = |j: usize| ys[j] > 0.0;
    let stencil = |from: usize, to: usize| -> Option<Vec<usize>> {
        // `from..=to` clipped to the grid, trimmed to the positive run
        let v: Vec<usize> = (from..=to.min(n - 1)).collect();
        v.iter().all(|&j| pos(j)).then_some(v)
    };
    let fit = |idx: &[usize], origin: f64| -> [f64; 4] {
        let ts: Vec<f64> = idx.iter().map(|&j| xs[j]).collect();
        let qs: Vec<f64> = idx.iter().map(|&j| ys[j] * ys[j]).collect();
        let c = interpolating_cubic(&ts, &qs);
        rebase(c, ts[0], origin)
    };
    let (a, b) = (xs[i], xs[i + 1]);
    match (pos(i), pos(i + 1)) {
        (false, false) => Piece::empty(a),
        (true, true) => {
            let idx = (i >= 1).then(|| stencil(i - 1, i + 2)).flatten().filter(|v| v.len() == 4)
                .or_else(|| stencil(i, i + 2).filter(|v| v.len() == 3))
                .or_else(|| (i >= 1).then(|| stencil(i - 1, i + 1)).flatten())
                .unwrap_or_else(|| vec![i, i + 1]);
            Piece { start: a, end: b, origin: a, c: fit(&idx, a), edge: Edge::Interior }
        }
        (false, true) => {
            let mut idx = vec![i + 1];
            while idx.len() < 4 && idx[idx.len() - 1] + 1 < n && pos(idx[idx.len() - 1] + 1) {
                idx.push(idx[idx.len() - 1] + 1);
            }
            edge_piece(a, b, if idx.len() >= 2 { fit(&idx, a) } else { line_to_zero(a, b, ys[i + 1], true) }, true)
        }
        (true, false) => {
            let mut idx = vec![i];
            while idx.len() < 4 && idx[idx.len() - 1] >= 1 && pos(idx[idx.len() - 1] - 1) {
                idx.push(idx[idx.len() - 1] - 1);
            }
            edge_piece(a, b, if idx.len() >= 2 { fit(&idx, a) } else { line_to_zero(a, b, ys[i], false) }, false)
        }
    }
}

/// `c` re-expanded from powers of `t - from` to powers of `t - to`.
fn rebase(c: [f64; 4], from: f64, to: f64) -> [f64; 4] {
    let h = to - from;
    // Taylor shift: coefficients of p(s + h)
    [
        c[0] + h * (c[1] + h * (c[2] + h * c[3])),
        c[1] + h * (2.0 * c[2] + 3.0 * h * c[3]),
        c[2] + 3.0 * h * c[3],
        c[3],
    ]
}

// isolated positive value: y² falls linearly to zero across the cell
fn line_to_zero(a: f64, b: f64, y: f64, rising: bool) -> [f64; 4] {
    let q = y * y;
    if rising {
        [0.0, q / (b - a), 0.0, 0.0]
    } else {
        [q, -q / (b - a), 0.0, 0.0]
    }
}

/// Piece on `[a, b]` with polynomial `c` (in `x - a`), which is positive at
/// the inner end; the outer end moves to the zero crossing if there is one.
fn edge_piece(a: f64, b: f64, c: [f64; 4], left: bool) -> Piece {
    let p = |x: f64| {
        let t = x - a;
        c.iter().rev().fold(0.0, |acc, k| acc * t + k)
    };
    let (outer, inner) = if left { (a, b) } else { (b, a) };
    if p(outer) > 0.0 {
        return Piece { start: a, end: b, origin: a, c, edge: Edge::Interior };
    }
    let (mut lo, mut hi) = (outer, inner);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let e = hi;
    if left {
        Piece { start: e, end: b, origin: a, c, edge: Edge::Left }
    } else {
        Piece { start: a, end: e, origin: a, c, edge: Edge::Right }
    }
}

#[derive(Clone)]
enum Continuous {
    SqrtEdge(SqrtEdge),
    Tabulated(Tabulated),
}

/// Compactly supported probability (or sub-probability) measure.
#[derive(Clone)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
    part: Option<Continuous>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // weights without the profile factor; only for square-root edge parts
    base_weights: Vec<f64>,
    node_count: usize,
    closed: Option<CauchyFn>,
}

impl fmt::Debug for SpectralMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.part {
            None => "atomic",
            Some(Continuous::SqrtEdge(_)) => "sqrt-edge",
            Some(Continuous::Tabulated(_)) => "tabulated",
        };
        f.debug_struct("SpectralMeasure")
            .field("kind", &kind)
            .field("atoms", &self.atoms)
            .field("support", &self.support())
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

/// JSON form of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub atoms: Vec<Atom>,
    pub support: [f64; 2],
    pub nodes: Vec<f64>,
    pub density_values: Vec<f64>,
}

impl SpectralMeasure {
    /// Purely atomic measure.
    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        check_atoms(&atoms)?;
        Ok(SpectralMeasure {
            atoms: sorted(atoms),
            part: None,
            nodes: Vec::new(),
            weights: Vec::new(),
            base_weights: Vec::new(),
            node_count: 0,
            closed: None,
        })
    }

    pub fn dirac(location: f64) -> Self {
        SpectralMeasure::atomic(vec![Atom { location, weight: 1.0 }]).expect("unit atom is valid")
    }

    /// Density `√((x − lo)(hi − x))·ρ(x)` on `[lo, hi]` plus atoms.
    pub fn with_sqrt_edge(lo: f64, hi: f64, profile: Profile, n: usize, atoms: Vec<Atom>) -> Result<Self> {
        check_atoms(&atoms)?;
        if n < 16 {
            return Err(FgigError::domain(format!("at least 16 quadrature nodes required (got {n})")));
        }
        let part = SqrtEdge::new(lo, hi, profile)?;
        let (nodes, weights, base_weights) = part.nodes(n);
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(FgigError::domain("density profile is not finite on the support"));
        }
        Ok(SpectralMeasure {
            atoms: sorted(atoms),
            part: Some(Continuous::SqrtEdge(part)),
            nodes,
            weights,
            base_weights,
            node_count: n,
            closed: None,
        })
    }

    /// Piecewise-linear density through `(xs, ys)` plus atoms.
    pub fn tabulated(xs: Vec<f64>, ys: Vec<f64>, atoms: Vec<Atom>) -> Result<Self> {
        SpectralMeasure::tabulated_with(xs, ys, atoms, Interpolation::Linear)
    }

    /// Tabulated density with an explicit interpolation rule.
    pub fn tabulated_with(xs: Vec<f64>, ys: Vec<f64>, atoms: Vec<Atom>, interp: Interpolation) -> Result<Self> {
        check_atoms(&atoms)?;
        let part = Tabulated::new(xs, ys, interp)?;
        let (nodes, weights) = part.nodes();
        let n = part.xs.len();
        Ok(SpectralMeasure {
            atoms: sorted(atoms),
            part: Some(Continuous::Tabulated(part)),
            nodes,
            weights,
            base_weights: Vec::new(),
            node_count: n,
            closed: None,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights of the continuous part (density already included).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn is_atomless(&self) -> bool {
        self.atoms.iter().all(|a| a.weight == 0.0)
    }

    /// Interval carrying the continuous part, if any.
    pub fn continuous_support(&self) -> Option<(f64, f64)> {
        match &self.part {
            None => None,
            Some(Continuous::SqrtEdge(p)) => Some((p.lo, p.hi)),
            Some(Continuous::Tabulated(t)) => Some((t.xs[0], *t.xs.last().unwrap())),
        }
    }

    /// Smallest interval containing atoms and continuous part.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in self.atoms.iter().filter(|a| a.weight > 0.0) {
            lo = lo.min(a.location);
            hi = hi.max(a.location);
        }
        if let Some((l, h)) = self.continuous_support() {
            lo = lo.min(l);
            hi = hi.max(h);
        }
        (lo, hi)
    }

    pub fn density(&self, x: f64) -> f64 {
        match &self.part {
            None => 0.0,
            Some(Continuous::SqrtEdge(p)) => p.density(x),
            Some(Continuous::Tabulated(t)) => t.density(x),
        }
    }

    fn continuous_cdf(&self, x: f64) -> f64 {
        match &self.part {
            None => 0.0,
            Some(Continuous::SqrtEdge(p)) => p.cdf(x),
            Some(Continuous::Tabulated(t)) => t.cdf(x),
        }
    }

    /// `μ((−∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.location <= x).map(|a| a.weight).sum();
        atoms + self.continuous_cdf(x)
    }

    /// `μ((−∞, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.location < x).map(|a| a.weight).sum();
        atoms + self.continuous_cdf(x)
    }

    /// Total mass from the accurate CDF tables.
    pub fn mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight).sum();
        let cont = match &self.part {
            None => 0.0,
            Some(Continuous::SqrtEdge(p)) => p.cum[0],
            Some(Continuous::Tabulated(t)) => *t.cum.last().unwrap(),
        };
        atoms + cont
    }

    /// `∫ f dμ` by atoms plus node quadrature.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let a: f64 = self.atoms.iter().map(|a| a.weight * f(a.location)).sum();
        let c: f64 = self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum();
        a + c
    }

    /// `∫ f dμ` for complex-valued `f`.
    pub fn integrate_complex(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        let a: Complex64 = self.atoms.iter().map(|a| f(a.location) * a.weight).sum();
        let c: Complex64 = self.nodes.iter().zip(&self.weights).map(|(x, w)| f(*x) * *w).sum();
        a + c
    }

    /// True if `z` lies on the real support (continuous part or an atom).
    pub fn touches(&self, z: Complex64) -> bool {
        if z.im != 0.0 {
            return false;
        }
        if self.atoms.iter().any(|a| a.weight > 0.0 && a.location == z.re) {
            return true;
        }
        match self.continuous_support() {
            Some((lo, hi)) => z.re >= lo && z.re <= hi,
            None => false,
        }
    }

    /// Attach a closed-form Cauchy transform; it then takes precedence over
    /// quadrature and follows the measure through affine maps, mass scaling,
    /// added atoms and the reciprocal pushforward.
    pub fn with_closed_cauchy(mut self, g: CauchyFn) -> Self {
        self.closed = Some(g);
        self
    }

    pub fn has_closed_cauchy(&self) -> bool {
        self.closed.is_some()
    }

    /// `∫ dμ(x)/(z − x)`, closed form when available.
    pub(crate) fn cauchy_unchecked(&self, z: Complex64) -> Complex64 {
        match &self.closed {
            Some(g) => g(z),
            None => self.cauchy_quadrature(z),
        }
    }

    /// Cauchy transform `∫ dμ(x)/(z − x)` by quadrature over the nodes plus atoms.
    ///
    /// Near the support of a square-root edge part the analytic profile is
    /// subtracted so that the remaining integrand is smooth; the subtracted
    /// semicircle piece is closed form.
    pub fn cauchy_quadrature(&self, z: Complex64) -> Complex64 {
        let atoms: Complex64 = self
            .atoms
            .iter()
            .map(|a| Complex64::new(a.weight, 0.0) / (z - a.location))
            .sum();
        let cont = match &self.part {
            None => Complex64::new(0.0, 0.0),
            Some(Continuous::Tabulated(t)) => t.cauchy(z),
            Some(Continuous::SqrtEdge(p)) => {
                let c = 0.5 * (p.lo + p.hi);
                let h = p.half();
                let w = (z - c) / h;
                // log of the Bernstein ellipse parameter through w
                let rho = (w + (w - 1.0).sqrt() * (w + 1.0).sqrt()).norm().ln();
                if 2.0 * self.nodes.len() as f64 * rho > 40.0 {
                    self.nodes
                        .iter()
                        .zip(&self.weights)
                        .map(|(x, wt)| Complex64::new(*wt, 0.0) / (z - x))
                        .sum()
                } else {
                    let rz = (p.profile)(z);
                    let smooth: Complex64 = self
                        .nodes
                        .iter()
                        .zip(&self.base_weights)
                        .map(|(x, b)| (Complex64::new(p.rho(*x), 0.0) - rz) * *b / (z - x))
                        .sum();
                    let root = (z - p.lo).sqrt() * (z - p.hi).sqrt();
                    let semi = PI * h * h / ((z - c) + root);
                    smooth + rz * semi
                }
            }
        };
        atoms + cont
    }

    fn carry(&self, out: Result<SpectralMeasure>, map: impl FnOnce(CauchyFn) -> CauchyFn) -> Result<SpectralMeasure> {
        let mut out = out?;
        out.closed = self.closed.clone().map(map);
        Ok(out)
    }

    /// Image under `x ↦ x + shift`.
    pub fn translate(&self, shift: f64) -> Result<SpectralMeasure> {
        self.carry(self.translate_parts(shift), |g| Arc::new(move |z| g(z - shift)))
    }

    fn translate_parts(&self, shift: f64) -> Result<SpectralMeasure> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { location: a.location + shift, weight: a.weight })
            .collect();
        match &self.part {
            None => SpectralMeasure::atomic(atoms),
            Some(Continuous::SqrtEdge(p)) => {
                let prof = p.profile.clone();
                let profile: Profile = Arc::new(move |z| prof(z - shift));
                SpectralMeasure::with_sqrt_edge(p.lo + shift, p.hi + shift, profile, self.node_count, atoms)
            }
            Some(Continuous::Tabulated(t)) => SpectralMeasure::tabulated_with(
                t.xs.iter().map(|x| x + shift).collect(),
                t.ys.clone(),
                atoms,
                t.interp,
            ),
        }
    }

    /// Image under `x ↦ factor·x` (`factor > 0`).
    pub fn dilate(&self, factor: f64) -> Result<SpectralMeasure> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(FgigError::domain(format!("dilation factor must be positive (got {factor})")));
        }
        self.carry(self.dilate_parts(factor), |g| Arc::new(move |z| g(z / factor) / factor))
    }

    fn dilate_parts(&self, factor: f64) -> Result<SpectralMeasure> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { location: a.location * factor, weight: a.weight })
            .collect();
        match &self.part {
            None => SpectralMeasure::atomic(atoms),
            Some(Continuous::SqrtEdge(p)) => {
                let prof = p.profile.clone();
                let profile: Profile = Arc::new(move |z| prof(z / factor) / (factor * factor));
                SpectralMeasure::with_sqrt_edge(p.lo * factor, p.hi * factor, profile, self.node_count, atoms)
            }
            Some(Continuous::Tabulated(t)) => SpectralMeasure::tabulated_with(
                t.xs.iter().map(|x| x * factor).collect(),
                t.ys.iter().map(|y| y / factor).collect(),
                atoms,
                t.interp,
            ),
        }
    }

    /// Multiply all mass by `factor` (for mixtures).
    pub fn scaled(&self, factor: f64) -> Result<SpectralMeasure> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(FgigError::domain(format!("mass factor must be nonnegative (got {factor})")));
        }
        self.carry(self.scaled_parts(factor), |g| Arc::new(move |z| g(z) * factor))
    }

    fn scaled_parts(&self, factor: f64) -> Result<SpectralMeasure> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { location: a.location, weight: a.weight * factor })
            .collect();
        match &self.part {
            None => SpectralMeasure::atomic(atoms),
            Some(Continuous::SqrtEdge(p)) => {
                let prof = p.profile.clone();
                let profile: Profile = Arc::new(move |z| prof(z) * factor);
                SpectralMeasure::with_sqrt_edge(p.lo, p.hi, profile, self.node_count, atoms)
            }
            Some(Continuous::Tabulated(t)) => SpectralMeasure::tabulated_with(
                t.xs.clone(),
                t.ys.iter().map(|y| y * factor).collect(),
                atoms,
                t.interp,
            ),
        }
    }

    /// Add an atom (merging with an existing one at the same location).
    pub fn with_atom(&self, atom: Atom) -> Result<SpectralMeasure> {
        check_atoms(&[atom])?;
        let mut out = self.clone();
        match out.atoms.iter_mut().find(|a| a.location == atom.location) {
            Some(a) => a.weight += atom.weight,
            None => out.atoms.push(atom),
        }
        out.atoms = sorted(out.atoms);
        if let Some(g) = out.closed.take() {
            out.closed = Some(Arc::new(move |z| g(z) + atom.weight / (z - atom.location)));
        }
        Ok(out)
    }

    /// JSON record: atoms, support, quadrature nodes and density at the nodes.
    pub fn record(&self) -> MeasureRecord {
        let (lo, hi) = self.support();
        MeasureRecord {
            atoms: self.atoms.clone(),
            support: [lo, hi],
            nodes: self.nodes.clone(),
            density_values: self.nodes.iter().map(|x| self.density(*x)).collect(),
        }
    }
}

fn check_atoms(atoms: &[Atom]) -> Result<()> {
    for a in atoms {
        if !(a.location.is_finite() && a.weight.is_finite() && a.weight >= 0.0) {
            return Err(FgigError::domain(format!("invalid atom {a:?}")));
        }
    }
    Ok(())
}

fn sorted(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
    atoms
}

/// fGIG density at `x`; zero outside `[a, b]`.
pub fn fgig_density(p: &NaturalParams, x: f64) -> Result<f64> {
    let s = solve_support(p)?;
    Ok(fgig_density_with(p, &s, x))
}

/// fGIG density with a precomputed support.
pub fn fgig_density_with(p: &NaturalParams, s: &SupportForm, x: f64) -> f64 {
    if x <= s.a || x >= s.b {
        return 0.0;
    }
    let c = p.beta / (s.a * s.b).sqrt();
    ((x - s.a) * (s.b - x)).sqrt() * (p.alpha / x + c / (x * x)) / (2.0 * PI)
}

fn fgig_profile(p: &NaturalParams, s: &SupportForm) -> Profile {
    let alpha = p.alpha;
    let c = p.beta / (s.a * s.b).sqrt();
    Arc::new(move |z: Complex64| (alpha / z + c / (z * z)) / (2.0 * PI))
}

/// `μ(α, β, λ)` with `n` Gauss-Chebyshev nodes.
pub fn build_fgig(p: &NaturalParams, n: usize) -> Result<SpectralMeasure> {
    let s = solve_support(p)?;
    build_fgig_with(p, &s, n)
}

/// `μ(α, β, λ)` with a precomputed support.
pub fn build_fgig_with(p: &NaturalParams, s: &SupportForm, n: usize) -> Result<SpectralMeasure> {
    let m = SpectralMeasure::with_sqrt_edge(s.a, s.b, fgig_profile(p, s), n, Vec::new())?;
    let quad = m.clone();
    let (p, s) = (*p, *s);
    // the closed form cancels badly near 0, where the node sum is accurate
    let closed: CauchyFn = Arc::new(move |z: Complex64| {
        if z.norm() < 0.25 * s.a {
            quad.cauchy_quadrature(z)
        } else {
            fgig_closed_cauchy(&p, &s, z)
        }
    });
    Ok(m.with_closed_cauchy(closed))
}

/// `½[α + (1−λ)/z − β/z² − (α/z + β/(√ab z²))√(z−a)√(z−b)]`.
fn fgig_closed_cauchy(p: &NaturalParams, s: &SupportForm, z: Complex64) -> Complex64 {
    let c = p.beta / (s.a * s.b).sqrt();
    let root = (z - s.a).sqrt() * (z - s.b).sqrt();
    let inv = 1.0 / z;
    0.5 * (p.alpha + (1.0 - p.lambda) * inv - p.beta * inv * inv - (p.alpha * inv + c * inv * inv) * root)
}

/// `ν(jump, rate)`: atom `max(0, 1 − rate)` at 0 plus the Marchenko-Pastur density.
pub fn build_free_poisson(fp: &FreePoissonParams, n: usize) -> Result<SpectralMeasure> {
    fp.check()?;
    let (lo, hi) = fp.edges();
    let jump = fp.jump;
    let profile: Profile = Arc::new(move |z: Complex64| 1.0 / (2.0 * PI * jump * z));
    let atoms = if fp.rate < 1.0 {
        vec![Atom { location: 0.0, weight: 1.0 - fp.rate }]
    } else {
        Vec::new()
    };
    let m = SpectralMeasure::with_sqrt_edge(lo, hi, profile, n, atoms)?;
    let (g, r) = (fp.jump, fp.rate);
    // (z + γ(1−λ) − √(z−lo)√(z−hi)) / (2γz); the atom at 0 is built in
    let closed: CauchyFn = Arc::new(move |z: Complex64| {
        let root = (z - lo).sqrt() * (z - hi).sqrt();
        (z + g * (1.0 - r) - root) / (2.0 * g * z)
    });
    Ok(m.with_closed_cauchy(closed))
}

/// Semicircle law with the given center and radius (variance `radius²/4`).
pub fn build_semicircle(center: f64, radius: f64, n: usize) -> Result<SpectralMeasure> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(FgigError::domain(format!("semicircle radius must be positive (got {radius})")));
    }
    let c = 2.0 / (PI * radius * radius);
    let profile: Profile = Arc::new(move |_z: Complex64| Complex64::new(c, 0.0));
    let m = SpectralMeasure::with_sqrt_edge(center - radius, center + radius, profile, n, Vec::new())?;
    let closed: CauchyFn = Arc::new(move |z: Complex64| {
        let w = z - center;
        2.0 * (w - (w - radius).sqrt() * (w + radius).sqrt()) / (radius * radius)
    });
    Ok(m.with_closed_cauchy(closed))
}

/// `∫ x^k dμ` for `k ≥ −2`.
pub fn moment(m: &SpectralMeasure, k: i32) -> Result<f64> {
    if k < -2 {
        return Err(FgigError::domain(format!("moment order must be >= -2 (got {k})")));
    }
    if k < 0 {
        if m.atoms.iter().any(|a| a.weight > 0.0 && a.location.abs() <= 1e-12) {
            return Err(FgigError::domain("negative moment of a measure with mass at 0"));
        }
        if let Some((lo, _)) = m.continuous_support() {
            if lo <= 1e-12 {
                return Err(FgigError::domain(format!(
                    "negative moment needs support bounded away from 0 (lower end {lo})"
                )));
            }
        }
    }
    Ok(m.integrate(|x| x.powi(k)))
}

/// Coefficients `(c2, c1, c0)` of the quadratic numerator of the fGIG density
/// derivative.
pub fn mode_quadratic(p: &NaturalParams, s: &SupportForm) -> (f64, f64, f64) {
    let c = p.beta / (s.a * s.b).sqrt();
    let sum = s.a + s.b;
    let prod = s.a * s.b;
    (2.0 * c - p.alpha * sum, 2.0 * p.alpha * prod - 3.0 * c * sum, 4.0 * prod * c)
}

/// Unique mode of `μ(α, β, λ)`: the root in `(a, b)` of the derivative's numerator.
pub fn mode(p: &NaturalParams) -> Result<f64> {
    let s = solve_support(p)?;
    Ok(mode_with(p, &s))
}

pub fn mode_with(p: &NaturalParams, s: &SupportForm) -> f64 {
    let (c2, c1, c0) = mode_quadratic(p, s);
    let q = |x: f64| (c2 * x + c1) * x + c0;
    // closed-form candidates, then bisection polish on the sign change
    let mut candidates = Vec::new();
    if c2 == 0.0 {
        candidates.push(-c0 / c1);
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            let t = -0.5 * (c1 + c1.signum() * disc.sqrt());
            if t != 0.0 {
                candidates.push(c0 / t);
            }
            candidates.push(t / c2);
        }
    }
    let (mut lo, mut hi) = (s.a, s.b);
    if let Some(x) = candidates.into_iter().find(|x| *x > s.a && *x < s.b) {
        let width = 64.0 * f64::EPSILON * s.b;
        let (l, h) = ((x - width).max(s.a), (x + width).min(s.b));
        if q(l) > 0.0 && q(h) < 0.0 {
            lo = l;
            hi = h;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Law of `X⁻¹`: image of `m` under `x ↦ 1/x`.
pub fn pushforward_reciprocal(m: &SpectralMeasure) -> Result<SpectralMeasure> {
    // G_{1/X}(z) = 1/z − G_X(1/z)/z²
    m.carry(reciprocal_parts(m), |g| {
        Arc::new(move |z| {
            let inv = 1.0 / z;
            inv - g(inv) * inv * inv
        })
    })
}

fn reciprocal_parts(m: &SpectralMeasure) -> Result<SpectralMeasure> {
    let touches_zero = |lo: f64| lo <= 0.0;
    if m.atoms.iter().any(|a| a.weight > 0.0 && a.location <= 0.0) {
        return Err(FgigError::domain("reciprocal pushforward needs all mass in (0, inf)"));
    }
    let atoms: Vec<Atom> = m
        .atoms
        .iter()
        .filter(|a| a.weight > 0.0)
        .map(|a| Atom { location: 1.0 / a.location, weight: a.weight })
        .collect();
    match &m.part {
        None => SpectralMeasure::atomic(atoms),
        Some(Continuous::SqrtEdge(p)) => {
            if touches_zero(p.lo) {
                return Err(FgigError::domain(format!(
                    "reciprocal pushforward needs support in (0, inf) (lower end {})",
                    p.lo
                )));
            }
            let scale = (p.lo * p.hi).sqrt();
            let prof = p.profile.clone();
            let profile: Profile = Arc::new(move |y: Complex64| prof(1.0 / y) * scale / (y * y * y));
            SpectralMeasure::with_sqrt_edge(1.0 / p.hi, 1.0 / p.lo, profile, m.node_count, atoms)
        }
        Some(Continuous::Tabulated(t)) => {
            // keep one zero-density point beyond each end of the positive part
            let Some(first) = t.ys.iter().position(|y| *y > 0.0) else {
                return SpectralMeasure::atomic(atoms);
            };
            let last = t.ys.iter().rposition(|y| *y > 0.0).unwrap();
            let start = first.saturating_sub(1);
            let stop = (last + 1).min(t.xs.len() - 1);
            if !(t.xs[start] > 0.0) {
                return Err(FgigError::domain("reciprocal pushforward needs support in (0, inf)"));
            }
            let xs: Vec<f64> = t.xs[start..=stop].iter().rev().map(|x| 1.0 / x).collect();
            let ys: Vec<f64> = t.xs[start..=stop]
                .iter()
                .zip(&t.ys[start..=stop])
                .rev()
                .map(|(x, y)| y * x * x)
                .collect();
            SpectralMeasure::tabulated_with(xs, ys, atoms, t.interp)
        }
    }
}

/// `sup_x |F₁(x) − F₂(x)|` over a merged grid of breakpoints and a dense
/// uniform grid, checking left limits at atoms.
pub fn kolmogorov_distance(m1: &SpectralMeasure, m2: &SpectralMeasure) -> f64 {
    let mut worst: f64 = 0.0;
    for x in comparison_grid(m1, m2) {
        worst = worst.max((m1.cdf(x) - m2.cdf(x)).abs());
        worst = worst.max((m1.cdf_left(x) - m2.cdf_left(x)).abs());
    }
    worst
}

/// Atoms, support ends, grid or quadrature nodes of both measures, and a
/// dense uniform grid over the joint support.
fn comparison_grid(m1: &SpectralMeasure, m2: &SpectralMeasure) -> Vec<f64> {
    let (l1, h1) = m1.support();
    let (l2, h2) = m2.support();
    let lo = l1.min(l2);
    let hi = h1.max(h2);
    let mut grid: Vec<f64> = Vec::new();
    for m in [m1, m2] {
        grid.extend(m.atoms.iter().map(|a| a.location));
        if let Some((l, h)) = m.continuous_support() {
            grid.push(l);
            grid.push(h);
        }
        match &m.part {
            Some(Continuous::Tabulated(t)) => grid.extend(t.xs.iter().copied()),
            Some(Continuous::SqrtEdge(_)) => grid.extend(m.nodes.iter().copied()),
            None => {}
        }
    }
    const DENSE: usize = 4000;
    if hi > lo {
        grid.extend((0..=DENSE).map(|i| lo + (hi - lo) * i as f64 / DENSE as f64));
    }
    grid.retain(|x| x.is_finite());
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Lévy distance: the least `ε` with `F₁(x − ε) − ε ≤ F₂(x) ≤ F₁(x + ε) + ε`
/// for all `x`, checked on the comparison grid and its `±ε` shifts and located
/// by bisection to `1e−9`. Unlike the Kolmogorov distance it metrizes weak
/// convergence, also towards limits with atoms.
pub fn levy_distance(m1: &SpectralMeasure, m2: &SpectralMeasure) -> f64 {
    let base = comparison_grid(m1, m2);
    let holds = |eps: f64| {
        let sandwiched = |f: &SpectralMeasure, g: &SpectralMeasure, x: f64| {
            let v = g.cdf(x);
            f.cdf(x - eps) - eps <= v && v <= f.cdf(x + eps) + eps
        };
        base.iter().flat_map(|&x| [x - eps, x, x + eps]).all(|x| sandwiched(m1, m2, x) && sandwiched(m2, m1, x))
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if holds(0.0) {
        return 0.0;
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p280() -> NaturalParams {
        NaturalParams::new(2.0, 8.0, 0.0).unwrap()
    }

    #[test]
    fn density_fixture_and_edges() {
        let p = p280();
        assert_relative_eq!(fgig_density(&p, 2.0).unwrap(), 2f64.sqrt() / PI, max_relative = 1e-14);
        assert_eq!(fgig_density(&p, 1.0).unwrap(), 0.0);
        assert_eq!(fgig_density(&p, 4.0).unwrap(), 0.0);
        assert_eq!(fgig_density(&p, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn fgig_mass_mean_and_support() {
        let m = build_fgig(&p280(), 256).unwrap();
        assert!(m.is_atomless());
        assert_relative_eq!(moment(&m, 0).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(m.mass(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(moment(&m, 1).unwrap(), 2.125, epsilon = 1e-12);
        let (lo, hi) = m.support();
        assert_relative_eq!(lo, 1.0, max_relative = 1e-14);
        assert_relative_eq!(hi, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn free_poisson_atoms_and_mean() {
        let full = build_free_poisson(&FreePoissonParams::new(1.0, 1.0).unwrap(), 256).unwrap();
        assert!(full.atoms().is_empty());
        assert_relative_eq!(full.mass(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(moment(&full, 1).unwrap(), 1.0, epsilon = 1e-12);

        let quarter = build_free_poisson(&FreePoissonParams::new(1.0, 0.25).unwrap(), 256).unwrap();
        assert_eq!(quarter.atoms(), &[Atom { location: 0.0, weight: 0.75 }]);
        assert_relative_eq!(quarter.mass(), 1.0, epsilon = 1e-12);

        let fp = FreePoissonParams::new(0.7, 2.5).unwrap();
        let m = build_free_poisson(&fp, 256).unwrap();
        assert_relative_eq!(moment(&m, 1).unwrap(), 0.7 * 2.5, max_relative = 1e-12);
        assert_relative_eq!(moment(&m, 0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dirac_moments() {
        let d = SpectralMeasure::dirac(1.7);
        for k in -2..5 {
            assert_relative_eq!(moment(&d, k).unwrap(), 1.7f64.powi(k), max_relative = 1e-15);
        }
        assert!(moment(&SpectralMeasure::dirac(0.0), -1).is_err());
    }

    #[test]
    fn negative_moment_near_zero_rejected() {
        let m = build_free_poisson(&FreePoissonParams::new(1.0, 1.0).unwrap(), 64).unwrap();
        assert!(moment(&m, -1).is_err());
        assert!(moment(&m, -3).is_err());
    }

    #[test]
    fn mode_fixture() {
        let p = p280();
        let x = mode(&p).unwrap();
        assert_relative_eq!(x, -11.0 + 153f64.sqrt(), epsilon = 1e-12);
        let s = solve_support(&p).unwrap();
        let h = 1e-5;
        let d = (fgig_density_with(&p, &s, x + h) - fgig_density_with(&p, &s, x - h)) / (2.0 * h);
        assert!(d.abs() < 1e-8, "derivative at mode {d}");
        let (c2, c1, c0) = mode_quadratic(&p, &s);
        assert_eq!((c2, c1, c0), (-2.0, -44.0, 64.0));
    }

    #[test]
    fn reciprocal_matches_inverted_params() {
        let m = build_fgig(&p280(), 256).unwrap();
        let r = pushforward_reciprocal(&m).unwrap();
        let target = build_fgig(&NaturalParams::new(8.0, 2.0, 0.0).unwrap(), 256).unwrap();
        let mut worst: f64 = 0.0;
        for i in 1..200 {
            let y = 0.25 + 0.75 * i as f64 / 200.0;
            worst = worst.max((r.density(y) - target.density(y)).abs());
        }
        assert!(worst < 1e-8, "sup density gap {worst}");
        assert!(kolmogorov_distance(&r, &target) < 1e-8);
        let back = pushforward_reciprocal(&r).unwrap();
        assert!(kolmogorov_distance(&back, &m) < 1e-10);
    }

    #[test]
    fn reciprocal_of_atoms_and_zero_support() {
        let d = SpectralMeasure::atomic(vec![Atom { location: 4.0, weight: 1.0 }]).unwrap();
        let r = pushforward_reciprocal(&d).unwrap();
        assert_eq!(r.atoms(), &[Atom { location: 0.25, weight: 1.0 }]);
        let fp = build_free_poisson(&FreePoissonParams::new(1.0, 1.0).unwrap(), 64).unwrap();
        assert!(pushforward_reciprocal(&fp).is_err());
    }

    #[test]
    fn kolmogorov_basics() {
        let m = build_fgig(&p280(), 128).unwrap();
        assert_eq!(kolmogorov_distance(&m, &m), 0.0);
        let d = kolmogorov_distance(&SpectralMeasure::dirac(0.0), &SpectralMeasure::dirac(1.0));
        assert_relative_eq!(d, 1.0);
    }

    #[test]
    fn levy_distance_of_shifted_atoms() {
        let d = levy_distance(&SpectralMeasure::dirac(0.0), &SpectralMeasure::dirac(0.1));
        assert!((d - 0.1).abs() < 1e-8, "{d}");
        let far = levy_distance(&SpectralMeasure::dirac(0.0), &SpectralMeasure::dirac(3.0));
        assert!((far - 1.0).abs() < 1e-8, "{far}");
        let m = build_fgig(&p280(), 128).unwrap();
        assert_eq!(levy_distance(&m, &m), 0.0);
        // Lévy never exceeds Kolmogorov
        let shifted = m.translate(0.01).unwrap();
        assert!(levy_distance(&m, &shifted) <= kolmogorov_distance(&m, &shifted) + 1e-9);
    }

    #[test]
    fn cdf_agrees_with_brute_force() {
        let p = NaturalParams::new(1.3, 0.6, -0.8).unwrap();
        let s = solve_support(&p).unwrap();
        let m = build_fgig_with(&p, &s, 256).unwrap();
        for frac in [0.001, 0.1, 0.37, 0.5, 0.9, 0.999] {
            let x = s.a + frac * (s.b - s.a);
            let brute = adaptive(s.a, x, 1e-14, 1e-13, |t| fgig_density_with(&p, &s, t)).unwrap();
            assert_relative_eq!(m.cdf(x), brute, epsilon = 1e-11);
        }
    }

    #[test]
    fn tabulated_cdf_and_cauchy() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let ys = vec![1.0; xs.len()];
        let m = SpectralMeasure::tabulated(xs, ys, Vec::new()).unwrap();
        assert_relative_eq!(m.cdf(0.3), 0.3, epsilon = 1e-14);
        let z = Complex64::new(0.4, 0.01);
        let exact = (z / (z - 1.0)).ln();
        assert!((m.cauchy_unchecked(z) - exact).norm() < 1e-12, "{} vs {}", m.cauchy_unchecked(z), exact);
        let far = Complex64::new(3.0, 2.0);
        assert!((m.cauchy_unchecked(far) - (far / (far - 1.0)).ln()).norm() < 1e-12);
    }

    #[test]
    fn sqrt_edge_cauchy_near_axis_matches_closed_form() {
        // closed form for fGIG: G = ½[α + (1−λ)/z − β/z² − (α/z + β/(√ab z²))√((z−a)(z−b))]
        let p = NaturalParams::new(2.0, 8.0, 1.0).unwrap();
        let s = solve_support(&p).unwrap();
        let m = build_fgig_with(&p, &s, 256).unwrap();
        let c = p.beta / (s.a * s.b).sqrt();
        for (x, y) in [(2.0, 1e-9), (s.a + 1e-3, 1e-6), (0.5, 0.3), (3.0, 2.0), (-4.0, 0.0)] {
            let z = Complex64::new(x, y);
            let root = (z - s.a).sqrt() * (z - s.b).sqrt();
            let closed = 0.5
                * (p.alpha + (1.0 - p.lambda) / z - p.beta / (z * z) - (p.alpha / z + c / (z * z)) * root);
            let g = m.cauchy_quadrature(z);
            assert!((g - closed).norm() < 1e-11, "z={z}: {g} vs {closed}");
            assert!((m.cauchy_unchecked(z) - closed).norm() < 1e-13);
        }
    }

    #[test]
    fn unimodal_on_fine_grid() {
        for p in [p280(), NaturalParams::new(1.0, 1.0, 5.0).unwrap(), NaturalParams::new(0.3, 4.0, -2.0).unwrap()] {
            let s = solve_support(&p).unwrap();
            let md = mode_with(&p, &s);
            let n = 10_000;
            let mut prev = 0.0;
            for i in 1..n {
                let x = s.a + (s.b - s.a) * i as f64 / n as f64;
                let d = fgig_density_with(&p, &s, x);
                if x < md {
                    assert!(d >= prev - 1e-12, "{p:?} not increasing at {x}");
                } else if prev > 0.0 && x - (s.b - s.a) / n as f64 > md {
                    assert!(d <= prev + 1e-12, "{p:?} not decreasing at {x}");
                }
                prev = d;
            }
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let z_list = [
            Complex64::new(0.7, 0.4),
            Complex64::new(-1.5, 0.05),
            Complex64::new(6.0, 1e-4),
            Complex64::new(2.0, -3.0),
        ];
        let fps = [(1.0, 0.25), (0.5, 2.0), (2.0, 4.0)];
        for (jump, rate) in fps {
            let m = build_free_poisson(&FreePoissonParams::new(jump, rate).unwrap(), 256).unwrap();
            for z in z_list {
                let (a, b) = (m.cauchy_unchecked(z), m.cauchy_quadrature(z));
                assert!((a - b).norm() < 1e-10, "nu({jump},{rate}) z={z}: {a} vs {b}");
            }
        }
        let semi = build_semicircle(1.0, 2.0, 256).unwrap();
        let fg = build_fgig(&p280(), 256).unwrap();
        let inv = pushforward_reciprocal(&fg).unwrap();
        let moved = fg.dilate(0.5).unwrap().translate(-0.3).unwrap().scaled(0.5).unwrap()
            .with_atom(Atom { location: 0.1, weight: 0.5 }).unwrap();
        for m in [&semi, &fg, &inv, &moved] {
            assert!(m.has_closed_cauchy());
            for z in z_list {
                let (a, b) = (m.cauchy_unchecked(z), m.cauchy_quadrature(z));
                assert!((a - b).norm() < 1e-10, "{m:?} z={z}: {a} vs {b}");
            }
        }
        // near 0 the fGIG evaluator switches to the node sum
        let z = Complex64::new(0.01, 0.01);
        assert_eq!(fg.cauchy_unchecked(z), fg.cauchy_quadrature(z));
    }

    #[test]
    fn semicircle_second_moment() {
        let m = build_semicircle(0.5, 2.0, 64).unwrap();
        assert_relative_eq!(m.mass(), 1.0, epsilon = 1e-13);
        assert_relative_eq!(moment(&m, 1).unwrap(), 0.5, epsilon = 1e-13);
        assert_relative_eq!(moment(&m, 2).unwrap(), 0.25 + 1.0, epsilon = 1e-13);
    }

    #[test]
    fn too_few_nodes_rejected() {
        assert!(build_fgig(&p280(), 8).is_err());
    }
}
