//! Geodesic vector field `H` and its rotation `H_perp` acting on bundle fields.
//!
//! `H u` is a finite difference along the flow. `H_perp u` is
//! `e^{-lambda} [sin th d1 u - cos th d2 u + (cos th l1 + sin th l2) dth u]`, the commutator
//! of `H` with the vertical field, and is evaluated with fourth-order spatial differences
//! and a spectral angular derivative.

use rayon::prelude::*;

use crate::bundle::field::{BundleField, FiberField, ScalarField};
use crate::bundle::interp::periodic_sinc_derivative;
use crate::bundle::spectral::angular_derivative;
use crate::geometry::{flow_step, BundlePoint};
use crate::scalar::{czero, lit, Complex, Real};

/// Step pattern of the field-level geodesic derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DerivativeScheme {
    /// `(u(phi_d) - u(phi_-d)) / 2d`, second order.
    Central,
    /// Richardson combination of steps `d` and `d/2`, fourth order.
    #[default]
    Richardson,
}

/// `H u` at one bundle point, spectral in angle.
pub fn geodesic_derivative<T: Real>(u: &BundleField<T>, p: &BundlePoint<T>) -> Complex<T> {
    let dom = &u.dom;
    let d = dom.deriv_step;
    let a = flow_step(&dom.metric, p, d);
    let b = flow_step(&dom.metric, p, -d);
    (u.sample_spectral(a.x, a.theta) - u.sample_spectral(b.x, b.theta)) / (lit::<T>(2.0) * d)
}

/// `d/dtheta` of the band-limited angular interpolant at a point.
fn sample_spectral_dtheta<T: Real>(u: &BundleField<T>, x: [T; 2], theta: T) -> Complex<T> {
    let nt = u.dom.n_theta();
    let mut acc = czero();
    for k in 0..nt {
        let w = periodic_sinc_derivative(theta - u.dom.angles.theta(k), nt);
        if w != T::zero() {
            acc = acc + u.sample_slice(x, k) * w;
        }
    }
    acc
}

/// `H_perp u` at one bundle point.
pub fn perp_derivative<T: Real>(u: &BundleField<T>, p: &BundlePoint<T>) -> Complex<T> {
    let dom = &u.dom;
    let h = dom.grid.h;
    let two_h = lit::<T>(2.0) * h;
    let x = p.x;
    let th = p.theta;
    let d1 = (u.sample_spectral([x[0] + h, x[1]], th) - u.sample_spectral([x[0] - h, x[1]], th)) / two_h;
    let d2 = (u.sample_spectral([x[0], x[1] + h], th) - u.sample_spectral([x[0], x[1] - h], th)) / two_h;
    let dt = sample_spectral_dtheta(u, x, th);
    let lc = dom.metric.log_conformal(x);
    let (s, c) = th.sin_cos();
    (d1 * s - d2 * c + dt * (c * lc.grad[0] + s * lc.grad[1])) * (-lc.lambda).exp()
}

/// `H u` on every active node, halo refilled.
pub fn geodesic_derivative_field<T: Real>(u: &BundleField<T>, scheme: DerivativeScheme) -> BundleField<T> {
    let dom = u.dom.clone();
    let n2 = dom.grid.node_count();
    let d = dom.deriv_step;
    let m = &dom.metric;
    let mut out = BundleField::zeros(&dom);
    out.values.par_chunks_mut(n2).enumerate().for_each(|(k, sl)| {
        let th = dom.angles.theta(k);
        let diff = |p: &BundlePoint<T>, step: T| {
            let a = flow_step(m, p, step);
            let b = flow_step(m, p, -step);
            (u.sample(a.x, a.theta) - u.sample(b.x, b.theta)) / (lit::<T>(2.0) * step)
        };
        for &i in &dom.grid.active {
            let p = BundlePoint::new(dom.grid.position(i as usize), th);
            sl[i as usize] = match scheme {
                DerivativeScheme::Central => diff(&p, d),
                DerivativeScheme::Richardson => {
                    let coarse = diff(&p, d);
                    let fine = diff(&p, lit::<T>(0.5) * d);
                    (fine * lit::<T>(4.0) - coarse) / lit::<T>(3.0)
                }
            };
        }
        dom.grid.fill_halo(sl);
    });
    out
}

/// Fourth-order central differences of a node slice at node `i`.
#[inline(always)]
fn d4<T: Real>(v: &[Complex<T>], i: usize, stride: usize, inv12h: T) -> Complex<T> {
    (v[i - 2 * stride] - v[i + 2 * stride] + (v[i + stride] - v[i - stride]) * lit::<T>(8.0)) * inv12h
}

/// `H_perp u` on every active node, halo refilled.
pub fn perp_derivative_field<T: Real>(u: &BundleField<T>) -> BundleField<T> {
    let dom = u.dom.clone();
    let g = &dom.grid;
    let n2 = g.node_count();
    let n = g.n;
    let inv12h = T::one() / (lit::<T>(12.0) * g.h);
    let dth = angular_derivative(u);
    let geo: Vec<(T, [T; 2])> = g
        .active
        .iter()
        .map(|&i| {
            let lc = dom.metric.log_conformal(g.position(i as usize));
            ((-lc.lambda).exp(), lc.grad)
        })
        .collect();
    let mut out = BundleField::zeros(&dom);
    out.values.par_chunks_mut(n2).enumerate().for_each(|(k, sl)| {
        let (s, c) = (dom.angles.sin[k], dom.angles.cos[k]);
        let src = u.slice(k);
        let dt = dth.slice(k);
        for (a, &i) in g.active.iter().enumerate() {
            let i = i as usize;
            let d1 = d4(src, i, 1, inv12h);
            let d2 = d4(src, i, n, inv12h);
            let (e, gr) = geo[a];
            sl[i] = (d1 * s - d2 * c + dt[i] * (c * gr[0] + s * gr[1])) * e;
        }
        g.fill_halo(sl);
    });
    out
}

/// Fourth-order gradient of a scalar field on active nodes, halo refilled.
pub fn gradient<T: Real>(f: &ScalarField<T>) -> [Vec<Complex<T>>; 2] {
    let g = &f.dom.grid;
    let inv12h = T::one() / (lit::<T>(12.0) * g.h);
    let mut d1 = vec![czero(); g.node_count()];
    let mut d2 = vec![czero(); g.node_count()];
    for &i in &g.active {
        let i = i as usize;
        d1[i] = d4(&f.values, i, 1, inv12h);
        d2[i] = d4(&f.values, i, g.n, inv12h);
    }
    g.fill_halo(&mut d1);
    g.fill_halo(&mut d2);
    [d1, d2]
}

/// `H f` for a function of `x` alone: `e^{-lambda} (cos th d1 f + sin th d2 f)`.
pub fn geodesic_derivative_scalar<T: Real>(f: &ScalarField<T>) -> BundleField<T> {
    let dom = f.dom.clone();
    let [d1, d2] = gradient(f);
    let n2 = dom.grid.node_count();
    let mut out = BundleField::zeros(&dom);
    out.values.par_chunks_mut(n2).enumerate().for_each(|(k, sl)| {
        let (s, c) = (dom.angles.sin[k], dom.angles.cos[k]);
        for &i in &dom.grid.stored {
            let i = i as usize;
            let e = (-dom.metric.log_conformal(dom.grid.position(i)).lambda).exp();
            sl[i] = (d1[i] * c + d2[i] * s) * e;
        }
    });
    out
}

/// Convenience wrapper used by the commutator checks: `[H, H_hilbert] u`.
pub fn commutator_residual<T: Real>(u: &BundleField<T>, scheme: DerivativeScheme) -> BundleField<T> {
    use crate::bundle::spectral::hilbert;
    let hu = geodesic_derivative_field(u, scheme);
    let lhs = hilbert(&hu).sub(&geodesic_derivative_field(&hilbert(u), scheme));
    let u0 = BundleField::broadcast(&u.average());
    let p0 = perp_derivative_field(&u0);
    let pu = perp_derivative_field(u);
    let rhs = p0.add(&BundleField::broadcast(&pu.average()));
    lhs.sub(&rhs)
}
