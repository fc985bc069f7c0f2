//! Transport solutions `u^F` and boundary-to-bundle maps.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bundle::{BoundaryField, BundleField, FiberField};
use crate::domain::Domain;
use crate::error::Result;
use crate::geometry::{walk, BoundaryPoint, BundlePoint};
use crate::scalar::{czero, Complex, Real};
use crate::transport::integrand::Integrand;
use crate::transport::quadrature::TraceSamples;

/// `int_0^tau F(phi_t) dt`, reusing `buf`.
pub fn transport_with<T: Real, I: Integrand<T>>(
    dom: &Domain<T>,
    f: &I,
    p: &BundlePoint<T>,
    buf: &mut TraceSamples<T>,
) -> Result<Complex<T>> {
    buf.clear();
    walk(&dom.metric, p, &dom.trace, |t, q| {
        buf.t.push(t);
        buf.f.push(f.eval(q.x, q.theta));
    })?;
    Ok(buf.integral())
}

/// `int_0^tau F(phi_t) dt`.
pub fn transport_at<T: Real, I: Integrand<T>>(dom: &Domain<T>, f: &I, p: &BundlePoint<T>) -> Result<Complex<T>> {
    transport_with(dom, f, p, &mut TraceSamples::new())
}

/// `int_0^tau F(phi_t) exp(int_0^t a(phi_s) ds) dt`.
pub fn attenuated_at<T: Real, A: Integrand<T>, I: Integrand<T>>(
    dom: &Domain<T>,
    a: &A,
    f: &I,
    p: &BundlePoint<T>,
) -> Result<Complex<T>> {
    let mut buf = TraceSamples::new();
    walk(&dom.metric, p, &dom.trace, |t, q| {
        buf.t.push(t);
        buf.f.push(f.eval(q.x, q.theta));
        buf.a.push(a.eval(q.x, q.theta));
    })?;
    Ok(buf.attenuated_integral())
}

/// `u^F` on every active node, halo extrapolated.
pub fn transport<T: Real, I: Integrand<T>>(dom: &Arc<Domain<T>>, f: &I) -> Result<BundleField<T>> {
    let n2 = dom.grid.node_count();
    let mut out = BundleField::zeros(dom);
    out.values
        .par_chunks_mut(n2)
        .enumerate()
        .try_for_each(|(k, sl)| -> Result<()> {
            let th = dom.angles.theta(k);
            let mut buf = TraceSamples::new();
            for &i in &dom.grid.active {
                let p = BundlePoint::new(dom.grid.position(i as usize), th);
                sl[i as usize] = transport_with(dom, f, &p, &mut buf)?;
            }
            dom.grid.fill_halo(sl);
            Ok(())
        })?;
    Ok(out)
}

/// `u^F` restricted to the boundary bundle: `I^0 F` on inflow nodes, zero on outflow nodes.
pub fn transport_boundary<T: Real, I: Integrand<T>>(dom: &Arc<Domain<T>>, f: &I) -> Result<BoundaryField<T>> {
    boundary_map(dom, |b| {
        if b.is_inflow() {
            transport_at(dom, f, &b.to_bundle(dom.radius()))
        } else {
            Ok(czero())
        }
    })
}

/// Attenuated transform `I^a F` on inflow nodes, zero elsewhere.
pub fn forward_attenuated<T: Real, A: Integrand<T>, I: Integrand<T>>(
    dom: &Arc<Domain<T>>,
    a: &A,
    f: &I,
) -> Result<BoundaryField<T>> {
    boundary_map(dom, |b| {
        if b.is_inflow() {
            attenuated_at(dom, a, f, &b.to_bundle(dom.radius()))
        } else {
            Ok(czero())
        }
    })
}

/// Weighted transform `int rho F dt` on inflow nodes, zero elsewhere.
pub fn forward_weighted<T: Real, I: Integrand<T>>(
    dom: &Arc<Domain<T>>,
    rho: &BundleField<T>,
    f: &I,
) -> Result<BoundaryField<T>> {
    struct Weighted<'a, T: Real, I> {
        rho: &'a BundleField<T>,
        f: &'a I,
    }
    impl<'a, T: Real, I: Integrand<T>> Integrand<T> for Weighted<'a, T, I> {
        fn eval(&self, x: [T; 2], theta: T) -> Complex<T> {
            self.rho.sample(x, theta) * self.f.eval(x, theta)
        }
    }
    transport_boundary(dom, &Weighted { rho, f })
}

fn boundary_map<T: Real>(
    dom: &Arc<Domain<T>>,
    f: impl Fn(BoundaryPoint<T>) -> Result<Complex<T>> + Sync,
) -> Result<BoundaryField<T>> {
    let nt = dom.n_theta();
    let mut out = BoundaryField::zeros(dom);
    out.values
        .par_chunks_mut(nt)
        .enumerate()
        .try_for_each(|(j, row)| -> Result<()> {
            for (k, v) in row.iter_mut().enumerate() {
                *v = f(dom.boundary_point(j, k))?;
            }
            Ok(())
        })?;
    Ok(out)
}

/// Scattering relation on every boundary node: forward exit for inflow nodes, backward
/// entry for outflow nodes (tangent nodes map to themselves).
pub fn boundary_scattering<T: Real>(dom: &Arc<Domain<T>>) -> Result<Vec<BoundaryPoint<T>>> {
    let nt = dom.n_theta();
    let rows: Vec<Result<Vec<BoundaryPoint<T>>>> = (0..dom.boundary.n_phi)
        .into_par_iter()
        .map(|j| {
            (0..nt)
                .map(|k| crate::geometry::scattering(&dom.metric, &dom.boundary_point(j, k), &dom.trace))
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(nt * dom.boundary.n_phi);
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// `w_psi`: constant extension of inflow data along geodesics, read at the entry point.
pub fn w_psi<T: Real>(w: &BoundaryField<T>) -> Result<BundleField<T>> {
    let dom = w.dom.clone();
    let map = dom.exit_map()?;
    let na = dom.grid.active.len();
    let nt = dom.n_theta();
    let n2 = dom.grid.node_count();
    let mut out = BundleField::zeros(&dom);
    out.values.par_chunks_mut(n2).enumerate().for_each(|(k, sl)| {
        let kr = (k + nt / 2) % nt;
        for (a, &i) in dom.grid.active.iter().enumerate() {
            let m = kr * na + a;
            sl[i as usize] = w.sample_inflow(map.phi[m], map.theta[m] + T::PI());
        }
        dom.grid.fill_halo(sl);
    });
    Ok(out)
}

/// `b o psi`: boundary data read at the forward exit point.
pub fn compose_exit<T: Real>(b: &BoundaryField<T>) -> Result<BundleField<T>> {
    let dom = b.dom.clone();
    let map = dom.exit_map()?;
    let na = dom.grid.active.len();
    let n2 = dom.grid.node_count();
    let mut out = BundleField::zeros(&dom);
    out.values.par_chunks_mut(n2).enumerate().for_each(|(k, sl)| {
        for (a, &i) in dom.grid.active.iter().enumerate() {
            let m = k * na + a;
            sl[i as usize] = b.sample(map.phi[m], map.theta[m]);
        }
        dom.grid.fill_halo(sl);
    });
    Ok(out)
}

/// A function of the boundary angle, given on boundary nodes, read at the forward exit point.
pub fn compose_exit_phi<T: Real>(dom: &Arc<Domain<T>>, vals: &[Complex<T>]) -> Result<BundleField<T>> {
    let nt = dom.n_theta();
    let mut b = BoundaryField::zeros(dom);
    for (j, &v) in vals.iter().enumerate() {
        for k in 0..nt {
            b.set(j, k, v);
        }
    }
    compose_exit(&b)
}

/// Even continuation `A_+ w`: `w` on the inflow part, `w o alpha` on the outflow part.
pub fn even_continuation<T: Real>(w: &BoundaryField<T>) -> Result<BoundaryField<T>> {
    let dom = w.dom.clone();
    let sc = boundary_scattering(&dom)?;
    let nt = dom.n_theta();
    let mut out = w.clone();
    for j in 0..dom.boundary.n_phi {
        for k in 0..nt {
            let b = dom.boundary_point(j, k);
            if !b.is_inflow() {
                let s = &sc[j * nt + k];
                out.set(j, k, w.sample_inflow(s.phi, s.theta));
            }
        }
    }
    Ok(out)
}

/// `A_-^* w = (w - w o alpha)` on the inflow part, zero on the outflow part.
pub fn a_minus_star<T: Real>(w: &BoundaryField<T>) -> Result<BoundaryField<T>> {
    let dom = w.dom.clone();
    let sc = boundary_scattering(&dom)?;
    let nt = dom.n_theta();
    let mut out = BoundaryField::zeros(&dom);
    for j in 0..dom.boundary.n_phi {
        for k in 0..nt {
            if dom.boundary_point(j, k).is_inflow() {
                out.set(j, k, w.at(j, k) - w.sample_point(&sc[j * nt + k]));
            }
        }
    }
    Ok(out)
}

/// Restriction of a bundle-grid field to the boundary nodes by interpolation.
pub fn restrict_to_boundary<T: Real>(u: &BundleField<T>) -> BoundaryField<T> {
    let dom = u.dom.clone();
    BoundaryField::from_fn(&dom, |b| {
        let p = b.to_bundle(dom.radius());
        u.sample(p.x, p.theta)
    })
}

/// `exp` of a field, pointwise.
pub fn exp_field<T: Real, F: FiberField<T>>(u: &F) -> F {
    u.map(|v| v.exp())
}
