//! Truncated power series with real coefficients.
//!
//! A [`Series`] holds the coefficients `c_0..c_N` of `Σ c_k t^k` where `t` is
//! the offset from some expansion point; all operations truncate at the order
//! of their shortest operand.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{FgigError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    coeffs: Vec<f64>,
}

impl Series {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least a constant term");
        Series { coeffs }
    }

    /// Constant `value` truncated at `order`.
    pub fn constant(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Series { coeffs }
    }

    /// `value + t` truncated at `order`.
    pub fn variable(value: f64, order: usize) -> Self {
        let mut s = Series::constant(value, order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Series {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, 0.0);
        Series { coeffs: c }
    }

    pub fn scale(&self, factor: f64) -> Series {
        Series::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn add_scalar(&self, value: f64) -> Series {
        let mut s = self.clone();
        s.coeffs[0] += value;
        s
    }

    /// Drop the constant term and divide by `t`; the result has one order less.
    pub fn shift_down(&self) -> Series {
        if self.coeffs.len() == 1 {
            return Series::constant(0.0, 0);
        }
        Series::new(self.coeffs[1..].to_vec())
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn recip(&self) -> Result<Series> {
        let c0 = self.coeffs[0];
        if c0 == 0.0 || !c0.is_finite() {
            return Err(FgigError::domain("series reciprocal needs a nonzero constant term"));
        }
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = 1.0 / c0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.coeffs[j] * out[k - j]).sum();
            out[k] = -s / c0;
        }
        Ok(Series { coeffs: out })
    }

    pub fn div(&self, other: &Series) -> Result<Series> {
        Ok(self * &other.recip()?)
    }

    /// Square root with positive constant term.
    pub fn sqrt(&self) -> Result<Series> {
        let c0 = self.coeffs[0];
        if c0 <= 0.0 || !c0.is_finite() {
            return Err(FgigError::domain("series square root needs a positive constant term"));
        }
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = c0.sqrt();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| out[j] * out[k - j]).sum();
            out[k] = (self.coeffs[k] - s) / (2.0 * out[0]);
        }
        Ok(Series { coeffs: out })
    }

    /// `self(inner(t))` where `inner` has zero constant term.
    ///
    /// The constant of `inner` is ignored: composition is only defined when
    /// the inner series maps the expansion point of `self` to itself.
    pub fn compose(&self, inner: &Series) -> Series {
        let order = self.order().min(inner.order());
        let mut shifted = inner.truncate(order);
        shifted.coeffs[0] = 0.0;
        let mut acc = Series::constant(self.coeffs[order], order);
        for k in (0..order).rev() {
            acc = &acc * &shifted;
            acc.coeffs[0] += self.coeffs[k];
        }
        acc
    }

    /// Evaluate at offset `t` by Horner.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// Evaluate at a complex offset by Horner.
    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Series::new((0..n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect())
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Series::new((0..n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect())
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(n - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Series { coeffs: out }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}
