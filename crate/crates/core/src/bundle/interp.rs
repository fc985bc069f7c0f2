//! Lagrange interpolation weights.

use crate::scalar::{lit, Real};

/// Cubic Lagrange weights on nodes `-1, 0, 1, 2` at offset `s`.
#[inline(always)]
pub fn cubic_weights<T: Real>(s: T) -> [T; 4] {
    let one = T::one();
    let two = lit::<T>(2.0);
    let sixth = lit::<T>(1.0 / 6.0);
    let half = lit::<T>(0.5);
    let sm1 = s - one;
    let sm2 = s - two;
    let sp1 = s + one;
    [
        -s * sm1 * sm2 * sixth,
        sp1 * sm1 * sm2 * half,
        -sp1 * s * sm2 * half,
        sp1 * s * sm1 * sixth,
    ]
}

/// Periodic band-limited interpolation kernel for `n` (even) equispaced samples.
#[inline]
pub fn periodic_sinc<T: Real>(t: T, n: usize) -> T {
    let nt = T::from_usize(n).unwrap();
    let half = lit::<T>(0.5) * t;
    let s = half.sin();
    if s.abs() < lit(1e-13) {
        // For even n the kernel tends to one at every multiple of 2 pi.
        return T::one();
    }
    (nt * half).sin() * half.cos() / (s * nt)
}

/// Derivative of [`periodic_sinc`].
#[inline]
pub fn periodic_sinc_derivative<T: Real>(t: T, n: usize) -> T {
    let nt = T::from_usize(n).unwrap();
    let half = lit::<T>(0.5) * t;
    let s = half.sin();
    if s.abs() < lit(1e-8) {
        return T::zero();
    }
    let c = half.cos();
    let hn = lit::<T>(0.5) * nt;
    (hn * (nt * half).cos() * c / s - (nt * half).sin() / (lit::<T>(2.0) * s * s)) / nt
}

/// Derivatives in `s` of [`cubic_weights`].
#[inline(always)]
pub fn cubic_weight_derivatives<T: Real>(s: T) -> [T; 4] {
    let s2 = s * s * lit::<T>(3.0);
    let sixth = lit::<T>(1.0 / 6.0);
    let half = lit::<T>(0.5);
    [
        -(s2 - lit::<T>(6.0) * s + lit(2.0)) * sixth,
        (s2 - lit::<T>(4.0) * s - T::one()) * half,
        -(s2 - lit::<T>(2.0) * s - lit(2.0)) * half,
        (s2 - T::one()) * sixth,
    ]
}
