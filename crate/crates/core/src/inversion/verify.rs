//! Numerical check that transport solutions with holomorphic sources are holomorphic.

use serde::Serialize;

use crate::bundle::{geodesic_derivative_field, BundleField, FiberField, ScalarField};
use crate::error::Result;
use crate::holomorphic::{holomorphicity_report, integrating_factor, HolomorphicityReport, NeumannOptions};
use crate::scalar::{cplx, to_f64, Real};
use crate::transport::{restrict_to_boundary, transport};

#[derive(Clone, Debug, Serialize)]
pub struct HolomorphicSolutionReport {
    pub holomorphicity: HolomorphicityReport,
    /// `max |v_0|` over the disc.
    pub mean_max: f64,
    /// `max |v|` over boundary nodes.
    pub boundary_max: f64,
    /// `|v - v*|_inf / |v*|_inf` for the compactly supported generator `v*`.
    pub deviation: f64,
}

/// Builds the holomorphic source `F = -H v*` with `v* = zeta (e^{-w} - 1)`, where `w` is the
/// holomorphic factor of `a` and `zeta` is supported inside the disc, solves `H v = -F` with zero
/// outflow values and measures the negative-frequency content of `v`.
pub fn verify_holomorphic_solution<T: Real>(
    a: &ScalarField<T>,
    zeta: &ScalarField<T>,
    opts: NeumannOptions,
) -> Result<HolomorphicSolutionReport> {
    let dom = a.dom.clone();
    let fac = integrating_factor(a, 1, opts)?;
    let e = fac.w.map(|w| (-w).exp() - cplx(T::one(), T::zero()));
    let vstar = e.zip_map(&BundleField::broadcast(zeta), |x, z| x * z);
    let source = geodesic_derivative_field(&vstar, Default::default()).map(|z| -z);
    let v = transport(&dom, &source)?;
    let scale = to_f64(vstar.max_abs()).max(f64::MIN_POSITIVE);
    Ok(HolomorphicSolutionReport {
        holomorphicity: holomorphicity_report(&v, 1),
        mean_max: to_f64(v.average().max_abs()),
        boundary_max: to_f64(restrict_to_boundary(&v).max_abs()),
        deviation: to_f64(v.sub(&vstar).max_abs()) / scale,
    })
}
