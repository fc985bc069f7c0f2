//! Backprojection and normal operators of weighted ray transforms on functions and one-forms.

use std::sync::Arc;

use crate::bundle::{BoundaryField, BundleField, FiberField, OneFormField, ScalarField};
use crate::domain::Domain;
use crate::error::Result;
use crate::scalar::{czero, Real};
use crate::transport::integrand::{FirstDegree, Integrand};
use crate::transport::solve::{forward_attenuated, transport, w_psi};

/// Output of the backprojection: a function and a vector field (upper chart components).
#[derive(Clone, Debug)]
pub struct Backprojection<T: Real> {
    pub scalar: ScalarField<T>,
    pub vector: OneFormField<T>,
}

impl<T: Real> Backprojection<T> {
    /// `int_M (s f + V^j alpha_j) dA_g`.
    pub fn pairing(&self, f: &ScalarField<T>, alpha: &OneFormField<T>) -> crate::scalar::Complex<T> {
        self.scalar.pairing(f) + alpha.pairing_vector(&self.vector)
    }
}

/// Adjoint of `F -> int rho F dt` from `L^2_mu(inflow)` to functions and one-forms:
/// `s(x) = int rho g_psi dtheta`, `V^j(x) = int rho g_psi xi^j dtheta`.
pub fn adjoint<T: Real>(rho: &BundleField<T>, g: &BoundaryField<T>) -> Result<Backprojection<T>> {
    let dom = g.dom.clone();
    let gp = w_psi(&g.restrict_inflow())?;
    let n2 = dom.grid.node_count();
    let nt = dom.n_theta();
    let dth = dom.angles.dtheta;
    let mut s = ScalarField::zeros(&dom);
    let mut v = OneFormField::zeros(&dom);
    for &i in &dom.grid.active {
        let i = i as usize;
        let e = (-dom.metric.log_conformal(dom.grid.position(i)).lambda).exp();
        let (mut a0, mut a1, mut a2) = (czero(), czero(), czero());
        for k in 0..nt {
            let w = rho.values[k * n2 + i] * gp.values[k * n2 + i];
            a0 = a0 + w;
            a1 = a1 + w * dom.angles.cos[k];
            a2 = a2 + w * dom.angles.sin[k];
        }
        s.values[i] = a0 * dth;
        v.comps[0][i] = a1 * (dth * e);
        v.comps[1][i] = a2 * (dth * e);
    }
    s.fill_halo();
    v.fill_halo();
    Ok(Backprojection { scalar: s, vector: v })
}

/// Weight `rho(x, xi) = exp(u^a(x, -xi))` under which the adjoint matches `I^a`.
pub fn attenuation_weight<T: Real, A: Integrand<T>>(dom: &Arc<Domain<T>>, a: &A) -> Result<BundleField<T>> {
    Ok(transport(dom, a)?.shift_half().map(|z| z.exp()))
}

/// Normal operator `(I^a)^* I^a` on pairs `(f, alpha)`.
pub fn normal_operator<T: Real, A: Integrand<T>>(
    a: &A,
    f: &ScalarField<T>,
    alpha: &OneFormField<T>,
) -> Result<Backprojection<T>> {
    let dom = f.dom.clone();
    let data = forward_attenuated(&dom, a, &FirstDegree { f, alpha })?;
    let rho = attenuation_weight(&dom, a)?;
    adjoint(&rho, &data)
}
