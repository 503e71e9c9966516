//! Compensated (Neumaier) summation.
//!
//! All series and integrals in this crate are accumulated with a fixed
//! ascending-index order and error-free-transformation compensation, so
//! results are bit-reproducible and accurate for 1e4..1e6 terms.

use crate::scalar::Scalar;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy)]
pub struct Accumulator<T> {
    sum: T,
    compensation: T,
}

impl<T: Scalar> Default for Accumulator<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Accumulator<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), compensation: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<T: Scalar>(it: impl IntoIterator<Item = T>) -> T {
    let mut acc = Accumulator::new();
    for x in it {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancellation() {
        let xs = [1.0f64, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn matches_exact_on_small_ints() {
        let s = compensated_sum((1..=1000).map(|k| k as f64));
        assert_eq!(s, 500500.0);
    }
}
