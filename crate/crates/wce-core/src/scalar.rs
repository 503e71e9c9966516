//! Scalar abstraction for all numeric kernels.
//!
//! Everything in this crate is generic over [`Scalar`], a floating-point
//! type with the usual transcendental operations. `f32` and `f64` are the
//! two implementations; the concrete aliases at the crate root fix `f64`
//! as the working type for the CLI and the oracle.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used throughout the crate.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Convert an `f64` constant into the working scalar type.
///
/// Panics only when the target type cannot represent any `f64`, which
/// does not happen for the provided impls.
#[inline]
pub fn c<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in scalar type")
}

/// `|x|^e` with an exact-power fast path for small integer exponents.
#[inline]
pub fn abs_pow<T: Scalar>(x: T, e: T) -> T {
    let a = x.abs();
    match small_int_exponent(e) {
        Some(k) => a.powi(k),
        None => a.powf(e),
    }
}

/// Recognize exponents that are exactly small integers.
#[inline]
pub fn small_int_exponent<T: Scalar>(e: T) -> Option<i32> {
    if e.fract() == T::zero() {
        let k = e.to_i32()?;
        if k.abs() <= 1 << 20 {
            return Some(k);
        }
    }
    None
}

/// Relative agreement check: `|a - b| <= tol * (1 + max(|a|, |b|))`.
#[inline]
pub fn close_rel<T: Scalar>(a: T, b: T, tol: T) -> bool {
    (a - b).abs() <= tol * (T::one() + a.abs().max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_pow_integer_fast_path() {
        assert_eq!(abs_pow(-2.0f64, 3.0), 8.0);
        assert_eq!(abs_pow(2.0f64, -2.0), 0.25);
        assert!((abs_pow(2.0f64, 1.5) - 2.0f64.powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn small_int_detection() {
        assert_eq!(small_int_exponent(3.0f64), Some(3));
        assert_eq!(small_int_exponent(1.5f64), None);
    }
}
