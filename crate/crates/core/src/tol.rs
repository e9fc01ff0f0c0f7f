//! Absolute tolerance shared by every height and distance comparison.

use std::fmt;

/// Absolute comparison tolerance. All equality tests on heights,
/// distances and torus coordinates go through this type.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tol(pub f64);

impl Tol {
    pub const DEFAULT: Tol = Tol(1e-9);

    pub fn new(value: f64) -> Self {
        assert!(value.is_finite() && value >= 0.0, "tolerance must be finite and non-negative");
        Tol(value)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn eq(self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.0
    }

    /// `a < b` by more than the tolerance.
    #[inline]
    pub fn lt(self, a: f64, b: f64) -> bool {
        a < b - self.0
    }

    /// `a <= b` up to the tolerance.
    #[inline]
    pub fn le(self, a: f64, b: f64) -> bool {
        a <= b + self.0
    }

    #[inline]
    pub fn is_zero(self, a: f64) -> bool {
        a.abs() <= self.0
    }

    pub fn scaled(self, factor: f64) -> Self {
        Tol(self.0 * factor)
    }
}

impl Default for Tol {
    fn default() -> Self {
        Tol::DEFAULT
    }
}

impl fmt::Display for Tol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons_respect_tolerance() {
        let tol = Tol(1e-6);
        assert!(tol.eq(1.0, 1.0 + 5e-7));
        assert!(!tol.eq(1.0, 1.0 + 2e-6));
        assert!(!tol.lt(1.0, 1.0 + 5e-7));
        assert!(tol.lt(1.0, 1.0 + 2e-6));
        assert!(tol.le(1.0 + 5e-7, 1.0));
        assert!(!tol.le(1.0 + 2e-6, 1.0));
    }
}
