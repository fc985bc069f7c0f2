//! Fibrewise Fourier operations: Hilbert transform, holomorphic projections, angular derivative.

use rayon::prelude::*;

use crate::bundle::field::FiberField;
use crate::domain::AngularGrid;
use crate::scalar::{czero, from_usize, Complex, Real};

/// `-i sgn(k)`, zero at `k = 0` and at the Nyquist bin.
pub fn hilbert_symbol<T: Real>(k: isize, n: usize) -> Complex<T> {
    if k == 0 || 2 * k.unsigned_abs() == n {
        czero()
    } else if k > 0 {
        Complex::new(T::zero(), -T::one())
    } else {
        Complex::new(T::zero(), T::one())
    }
}

/// Symbol of `Id + i sign H`.
pub fn holo_symbol<T: Real>(k: isize, n: usize, sign: i32) -> Complex<T> {
    let s = if sign >= 0 { T::one() } else { -T::one() };
    Complex::new(T::one(), T::zero()) + Complex::new(T::zero(), s) * hilbert_symbol::<T>(k, n)
}

/// Symbol of `d/dtheta`, zero at the Nyquist bin.
pub fn derivative_symbol<T: Real>(k: isize, n: usize) -> Complex<T> {
    if 2 * k.unsigned_abs() == n {
        czero()
    } else {
        Complex::new(T::zero(), T::from_isize(k).unwrap())
    }
}

fn symbol_table<T: Real>(ag: &AngularGrid<T>, m: &dyn Fn(isize) -> Complex<T>) -> Vec<Complex<T>> {
    let inv = T::one() / from_usize::<T>(ag.n);
    (0..ag.n).map(|i| m(ag.freq(i)) * inv).collect()
}

/// Applies the Fourier multiplier `m(k)` to every fibre.
pub fn apply_multiplier<T: Real, F: FiberField<T>>(u: &F, m: impl Fn(isize) -> Complex<T>) -> F {
    let dom = u.domain().clone();
    let ag = &dom.angles;
    let table = symbol_table(ag, &m);
    let mut buf = u.gather();
    buf.par_chunks_mut(ag.n * 64).for_each(|block| {
        let mut scratch = vec![czero(); ag.fwd.get_inplace_scratch_len().max(ag.inv.get_inplace_scratch_len())];
        for fib in block.chunks_mut(ag.n) {
            ag.fwd.process_with_scratch(fib, &mut scratch);
            for (c, s) in fib.iter_mut().zip(&table) {
                *c = *c * *s;
            }
            ag.inv.process_with_scratch(fib, &mut scratch);
        }
    });
    let mut out = u.clone();
    out.scatter(&buf);
    out
}

/// Fibrewise Hilbert transform `H e^{ik theta} = -i sgn(k) e^{ik theta}`.
pub fn hilbert<T: Real, F: FiberField<T>>(u: &F) -> F {
    let n = u.domain().n_theta();
    apply_multiplier(u, |k| hilbert_symbol(k, n))
}

/// `(Id + i sign H) u`. Sign `+1` keeps non-negative modes, `-1` keeps non-positive ones.
pub fn holo_project<T: Real, F: FiberField<T>>(u: &F, sign: i32) -> F {
    let n = u.domain().n_theta();
    apply_multiplier(u, |k| holo_symbol(k, n, sign))
}

/// Spectral `d/dtheta`.
pub fn angular_derivative<T: Real, F: FiberField<T>>(u: &F) -> F {
    let n = u.domain().n_theta();
    apply_multiplier(u, |k| derivative_symbol(k, n))
}

/// Normalised Fourier coefficients `u_k`, fibre-major, bin order as returned by the FFT.
pub fn fourier_coefficients<T: Real, F: FiberField<T>>(u: &F) -> Vec<Complex<T>> {
    let dom = u.domain().clone();
    let ag = &dom.angles;
    let inv = T::one() / from_usize::<T>(ag.n);
    let mut buf = u.gather();
    buf.par_chunks_mut(ag.n * 64).for_each(|block| {
        let mut scratch = vec![czero(); ag.fwd.get_inplace_scratch_len()];
        for fib in block.chunks_mut(ag.n) {
            ag.fwd.process_with_scratch(fib, &mut scratch);
            fib.iter_mut().for_each(|c| *c = *c * inv);
        }
    });
    buf
}

/// Inverse of [`fourier_coefficients`].
pub fn from_fourier_coefficients<T: Real, F: FiberField<T>>(template: &F, coeffs: &[Complex<T>]) -> F {
    let dom = template.domain().clone();
    let ag = &dom.angles;
    let mut buf = coeffs.to_vec();
    buf.par_chunks_mut(ag.n * 64).for_each(|block| {
        let mut scratch = vec![czero(); ag.inv.get_inplace_scratch_len()];
        for fib in block.chunks_mut(ag.n) {
            ag.inv.process_with_scratch(fib, &mut scratch);
        }
    });
    let mut out = template.clone();
    out.scatter(&buf);
    out
}
