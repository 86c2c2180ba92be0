// SPDX-License-Identifier: Apache-2.0
//! Numerical tolerances.

/// Absolute threshold below which a tail dependence coefficient counts as
/// zero. Values in `(0, ZERO_TOL)` are rejected rather than classified.
pub const ZERO_TOL: f64 = 1e-12;

/// Default relative tolerance for equality-based classifications.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Relative tolerance used by every equality test on coefficients.
///
/// Two values `a` and `b` compare equal when
/// `|a - b| <= eps * max(1, |a|, |b|)`, so the test is absolute for
/// standardized quantities (all in `[0, 1]`) and relative for raw
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { eps: DEFAULT_EPS }
    }
}

impl Tolerance {
    pub fn new(eps: f64) -> Self {
        Self { eps }
    }

    #[inline]
    pub fn scale(&self, a: f64, b: f64) -> f64 {
        self.eps * 1f64.max(a.abs()).max(b.abs())
    }

    /// Scaled residual `|a - b| / max(1, |a|, |b|)`.
    #[inline]
    pub fn residual(&self, a: f64, b: f64) -> f64 {
        (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
    }

    #[inline]
    pub fn eq(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.scale(a, b)
    }

    /// `a > b` by more than the tolerance.
    #[inline]
    pub fn gt(&self, a: f64, b: f64) -> bool {
        a - b > self.scale(a, b)
    }

    /// `a >= b` up to the tolerance.
    #[inline]
    pub fn ge(&self, a: f64, b: f64) -> bool {
        a - b >= -self.scale(a, b)
    }

    #[inline]
    pub fn is_zero(&self, a: f64) -> bool {
        a.abs() <= self.eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_for_large_absolute_for_small() {
        let t = Tolerance::default();
        assert!(t.eq(1e6, 1e6 + 1e-4));
        assert!(!t.eq(1e6, 1e6 + 1e-2));
        assert!(t.eq(1e-12, 0.0));
        assert!(!t.eq(1e-8, 0.0));
        assert!(t.ge(0.5, 0.5 + 1e-12));
        assert!(!t.gt(0.5, 0.5 - 1e-12));
    }
}
