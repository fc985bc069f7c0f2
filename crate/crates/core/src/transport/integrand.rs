//! Functions on the unit circle bundle that can be integrated along geodesics.

use crate::bundle::{BundleField, OneFormField, ScalarField};
use crate::scalar::{czero, Complex, Real};

pub trait Integrand<T: Real>: Sync {
    fn eval(&self, x: [T; 2], theta: T) -> Complex<T>;
}

impl<T: Real, I: Integrand<T> + ?Sized> Integrand<T> for &I {
    #[inline]
    fn eval(&self, x: [T; 2], theta: T) -> Complex<T> {
        (**self).eval(x, theta)
    }
}

/// Scalar fields are integrated with bicubic interpolation.
impl<T: Real> Integrand<T> for ScalarField<T> {
    #[inline]
    fn eval(&self, x: [T; 2], _theta: T) -> Complex<T> {
        self.sample_cubic(x)
    }
}

/// Bundle fields are integrated with bilinear-linear interpolation.
impl<T: Real> Integrand<T> for BundleField<T> {
    #[inline]
    fn eval(&self, x: [T; 2], theta: T) -> Complex<T> {
        self.sample_linear(x, theta)
    }
}

/// Closure integrand.
pub struct FnIntegrand<F>(pub F);

impl<T: Real, F: Fn([T; 2], T) -> Complex<T> + Sync> Integrand<T> for FnIntegrand<F> {
    #[inline]
    fn eval(&self, x: [T; 2], theta: T) -> Complex<T> {
        (self.0)(x, theta)
    }
}

/// The zero function.
pub struct Zero;

impl<T: Real> Integrand<T> for Zero {
    #[inline]
    fn eval(&self, _x: [T; 2], _theta: T) -> Complex<T> {
        czero()
    }
}

/// `f(x) + alpha_x(xi)` for a function and a one-form.
pub struct FirstDegree<'a, T: Real> {
    pub f: &'a ScalarField<T>,
    pub alpha: &'a OneFormField<T>,
}

impl<'a, T: Real> Integrand<T> for FirstDegree<'a, T> {
    #[inline]
    fn eval(&self, x: [T; 2], theta: T) -> Complex<T> {
        self.f.sample_cubic(x) + self.alpha.contract(x, theta)
    }
}

/// Pointwise sum of two integrands.
pub struct Sum<A, B>(pub A, pub B);

impl<T: Real, A: Integrand<T>, B: Integrand<T>> Integrand<T> for Sum<A, B> {
    #[inline]
    fn eval(&self, x: [T; 2], theta: T) -> Complex<T> {
        self.0.eval(x, theta) + self.1.eval(x, theta)
    }
}
