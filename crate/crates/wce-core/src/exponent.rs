//! Conjugate exponent pairs.

use crate::scalar::{c, Scalar};

/// An L^p exponent: finite in `[1, oo)` or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent<T> {
    Finite(T),
    Infinity,
}

impl<T: Scalar> Exponent<T> {
    pub fn is_one(&self) -> bool {
        matches!(self, Exponent::Finite(p) if *p == T::one())
    }

    pub fn finite(&self) -> Option<T> {
        match self {
            Exponent::Finite(p) => Some(*p),
            Exponent::Infinity => None,
        }
    }
}

impl<T: Scalar> std::fmt::Display for Exponent<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// A conjugate pair `(p, q)` with `1/p + 1/q = 1` (convention `1/inf = 0`).
///
/// Constructed from a finite `p in [1, oo)`; the infinite-`p` side arises
/// only as the conjugate of `p = 1`, via [`ExponentPair::conjugate`]. The
/// stored values are swapped verbatim by `conjugate`, so a double
/// conjugate is bit-identical to the original pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair<T> {
    pub p: Exponent<T>,
    pub q: Exponent<T>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExponentError {
    #[error("exponent p = {0} is outside [1, oo)")]
    OutOfRange(f64),
}

impl<T: Scalar> ExponentPair<T> {
    /// Build the pair for a finite `p >= 1`.
    pub fn new(p: T) -> Result<Self, ExponentError> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(ExponentError::OutOfRange(p.to_f64().unwrap_or(f64::NAN)));
        }
        if p == T::one() {
            Ok(Self { p: Exponent::Finite(p), q: Exponent::Infinity })
        } else {
            let q = p / (p - T::one());
            Ok(Self { p: Exponent::Finite(p), q: Exponent::Finite(q) })
        }
    }

    pub fn two() -> Self {
        Self { p: Exponent::Finite(c(2.0)), q: Exponent::Finite(c(2.0)) }
    }

    /// Swap the roles of `p` and `q`.
    pub fn conjugate(self) -> Self {
        Self { p: self.q, q: self.p }
    }

    /// Finite `p` strictly between 1 and infinity.
    pub fn is_intermediate(&self) -> bool {
        matches!(self.p, Exponent::Finite(p) if p > T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates() {
        let pair = ExponentPair::new(1.5f64).unwrap();
        assert_eq!(pair.q.finite().unwrap(), 3.0);
        let pair = ExponentPair::new(1.0f64).unwrap();
        assert_eq!(pair.q, Exponent::Infinity);
        assert!(ExponentPair::new(0.5f64).is_err());
        assert!(ExponentPair::new(f64::INFINITY).is_err());
    }

    #[test]
    fn conjugate_is_involution() {
        let pair = ExponentPair::new(3.0f64).unwrap();
        let back = pair.conjugate().conjugate();
        assert_eq!(pair, back);
    }

    #[test]
    fn holder_identity() {
        for p in [1.25f64, 1.5, 2.0, 3.0, 7.0] {
            let pair = ExponentPair::new(p).unwrap();
            let q = pair.q.finite().unwrap();
            assert!((1.0 / p + 1.0 / q - 1.0).abs() < 1e-15);
        }
    }
}
