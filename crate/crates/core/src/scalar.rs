//! Numeric backends for workloads and driver times.
//!
//! Continuous models run on `f64`. Lattice models can run on `u64`, where a
//! value `k` stands for `k * alpha`; every operation is then exact, which is
//! what lattice set enumeration and tie-heavy cross-validation rely on.

use std::fmt::Debug;

/// Non-negative time quantity with the handful of operations the recursions need.
pub trait Scalar: Copy + PartialOrd + Debug + Send + Sync + 'static {
    const ZERO: Self;

    /// Sum, saturating at the representable maximum.
    fn plus(self, other: Self) -> Self;

    /// `[self - other]^+`.
    fn minus_clip(self, other: Self) -> Self;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Conversion for reporting; lattice values are reported in units of alpha.
    fn to_f64(self) -> f64;

    /// A value in `[0, self]` chosen by `u` in `[0, 1)`.
    fn fraction(self, u: f64) -> Self;

    /// Absolute difference, as `f64`.
    fn distance(self, other: Self) -> f64 {
        if self > other {
            self.minus_clip(other).to_f64()
        } else {
            other.minus_clip(self).to_f64()
        }
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;

    #[inline]
    fn plus(self, other: Self) -> Self {
        self + other
    }

    #[inline]
    fn minus_clip(self, other: Self) -> Self {
        let d = self - other;
        if d > 0.0 {
            d
        } else {
            0.0
        }
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }

    fn fraction(self, u: f64) -> Self {
        if self.is_finite() {
            self * u
        } else {
            // unbounded box: stay finite
            u / (1.0 - u)
        }
    }
}

impl Scalar for u64 {
    const ZERO: Self = 0;

    #[inline]
    fn plus(self, other: Self) -> Self {
        self.saturating_add(other)
    }

    #[inline]
    fn minus_clip(self, other: Self) -> Self {
        self.saturating_sub(other)
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }

    fn fraction(self, u: f64) -> Self {
        let k = (u * (self as f64 + 1.0)).floor() as u64;
        k.min(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_and_saturation() {
        assert_eq!(3.0f64.minus_clip(5.0), 0.0);
        assert_eq!(5.0f64.minus_clip(3.0), 2.0);
        assert_eq!(3u64.minus_clip(5), 0);
        assert_eq!(u64::MAX.plus(1), u64::MAX);
        assert_eq!(7u64.fraction(0.999_999), 7);
        assert_eq!(7u64.fraction(0.0), 0);
        assert_eq!(2.0f64.distance(5.0), 3.0);
    }
}
