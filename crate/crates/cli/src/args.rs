use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Numerics for the free generalized inverse Gaussian family.
#[derive(Debug, Parser)]
#[command(name = "fgig", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert between the natural and support parameterizations.
    Params(ParamArgs),
    /// Density and distribution function on a grid.
    Density {
        #[command(flatten)]
        params: ParamArgs,
        /// Sampling grid `lo:hi:count` (default: the support, 401 points).
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        /// Quadrature nodes of the stored measure.
        #[arg(long, default_value_t = 256)]
        nodes: usize,
    },
    /// R-transform, Cauchy transform, free cumulants and the FID certificate.
    Transform {
        #[command(flatten)]
        params: ParamArgs,
        /// Real parts `lo:hi:count` (default: the support widened by half its width).
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        /// Distance from the real axis of the evaluation points.
        #[arg(long, default_value_t = 0.5)]
        imag: f64,
        /// Number of free cumulants.
        #[arg(long, default_value_t = 8)]
        order: usize,
    },
    /// Free Lévy–Khintchine triplet and its reconstruction residuals.
    Levy {
        #[command(flatten)]
        params: ParamArgs,
        /// Grid for the Lévy density (default: 400 points up to the support end).
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
    },
    /// Free self-decomposability verdict.
    Fsd {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
    },
    /// Check μ(α,β,−λ) ⊞ ν(1/α,λ) = μ(α,β,λ) numerically (λ > 0).
    Convolve {
        #[command(flatten)]
        params: ParamArgs,
        /// Points of the inversion grid.
        #[arg(long, default_value_t = 2001)]
        points: usize,
    },
    /// Fixed-point characterization X = (X + Y)⁻¹; with --beta also the iterated form.
    Fixpoint(ShapeArgs),
    /// Behavior as β ↓ 0.
    Limits {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Geometric β sequence `hi:lo:count`.
        #[arg(long, default_value = "1e-1:1e-6:6")]
        betas: GridSpec,
    },
    /// Free entropy maximality and the classical Gibbs bound.
    Entropy(ParamArgs),
}

/// A parameter triple, either `(α, β, λ)` or `(a, b, λ)`.
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Lower support end.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Upper support end.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
}

/// `(α, λ)` with an optional `β`.
#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
}

/// `lo:hi:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(format!("expected lo:hi:count, got {s:?}"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        let (lo, hi) = (num(lo)?, num(hi)?);
        let count: usize = count.trim().parse().map_err(|e| format!("bad count {count:?}: {e}"))?;
        if !(lo.is_finite() && hi.is_finite()) {
            return Err("grid ends must be finite".into());
        }
        if count == 0 {
            return Err("grid count must be positive".into());
        }
        if count == 1 && lo != hi {
            return Err("a one-point grid needs lo == hi".into());
        }
        Ok(GridSpec { lo, hi, count })
    }
}

impl GridSpec {
    /// Evenly spaced points, both ends included.
    pub fn linear(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        let mut xs: Vec<f64> = (0..self.count).map(|i| self.lo + step * i as f64).collect();
        xs[self.count - 1] = self.hi;
        xs
    }

    /// Log-spaced points from `lo` to `hi`.
    pub fn geometric(&self) -> Result<Vec<f64>, String> {
        if !(self.lo > 0.0 && self.hi > 0.0) {
            return Err("geometric grid needs positive ends".into());
        }
        // base 10 so decades land on exact powers
        let log = GridSpec { lo: self.lo.log10(), hi: self.hi.log10(), count: self.count };
        let mut xs: Vec<f64> = log.linear().into_iter().map(|e| 10f64.powf(e)).collect();
        xs[0] = self.lo;
        xs[self.count - 1] = self.hi;
        Ok(xs)
    }
}
