//! The operator `W f = (H_perp u^f)_0` and odd (anti)holomorphic integrating factors.

use std::sync::Arc;

use serde::Serialize;

use crate::bundle::{
    fourier_coefficients, holo_project, perp_derivative_field, BoundaryField, BundleField, FiberField, ScalarField,
};
use crate::domain::{Domain, NONE};
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Complex, Real};
use crate::transport::{transport, transport_boundary, w_psi};

/// `W f = (H_perp u^f)_0`.
pub fn w_operator<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    let u = transport(&f.dom, f)?;
    let mut out = perp_derivative_field(&u).average();
    out.fill_halo();
    Ok(out)
}

/// `S h = (H_perp h_psi)_0` for boundary data on the inflow part.
pub fn s_operator<T: Real>(h: &BoundaryField<T>) -> Result<ScalarField<T>> {
    let hp = w_psi(&h.restrict_inflow())?;
    let mut out = perp_derivative_field(&hp).average();
    out.fill_halo();
    Ok(out)
}

fn check_sign(sign: i32) -> Result<i32> {
    match sign {
        1 | -1 => Ok(sign),
        _ => Err(Error::InvalidGrid(format!("holomorphy sign must be +1 or -1, got {sign}"))),
    }
}

/// `(Id + i sign H) u^a_-` on the bundle grid.
pub fn gamma<T: Real>(a: &ScalarField<T>, sign: i32) -> Result<BundleField<T>> {
    let sign = check_sign(sign)?;
    Ok(holo_project(&transport(&a.dom, a)?.odd_part(), sign))
}

/// The same quantity on boundary nodes, computed from the boundary values of `u^a` directly.
pub fn gamma_boundary<T: Real>(a: &ScalarField<T>, sign: i32) -> Result<BoundaryField<T>> {
    let sign = check_sign(sign)?;
    Ok(holo_project(&transport_boundary(&a.dom, a)?.odd_part(), sign))
}

/// Neumann series controls.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NeumannOptions {
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_terms: 50 }
    }
}

/// An odd, holomorphic (`sign = 1`) or antiholomorphic (`sign = -1`) `w` with `H w = -a`.
#[derive(Clone, Debug)]
pub struct IntegratingFactor<T: Real> {
    pub sign: i32,
    pub w: BundleField<T>,
    /// `w` on boundary nodes.
    pub boundary: BoundaryField<T>,
    /// Solution of `(Id + i sign W) b = a`.
    pub b: ScalarField<T>,
    /// Sup norms of the Neumann terms relative to `a`; empty when `W` vanishes identically.
    pub increments: Vec<f64>,
}

/// Partial sums of `sum_m (c K)^m g` until the increment falls below `tol` relative to `g`.
pub fn neumann_series<T: Real>(
    g: &ScalarField<T>,
    c: Complex<T>,
    opts: NeumannOptions,
    mut op: impl FnMut(&ScalarField<T>) -> Result<ScalarField<T>>,
) -> Result<(ScalarField<T>, Vec<f64>)> {
    let scale = to_f64(g.max_abs()).max(f64::MIN_POSITIVE);
    let mut sum = g.clone();
    let mut term = g.clone();
    let mut incs = Vec::new();
    let mut prev = 1.0;
    for m in 1..opts.max_terms.max(1) {
        term = op(&term)?.map(|v| v * c);
        let inc = to_f64(term.max_abs()) / scale;
        incs.push(inc);
        sum = sum.zip_map(&term, |s, t| s + t);
        if inc <= opts.tol {
            return Ok((sum, incs));
        }
        if inc >= prev {
            return Err(Error::NeumannDiverged { term: m, ratio: inc / prev });
        }
        prev = inc;
    }
    Ok((sum, incs))
}

/// Solves `(Id + i sign W) b = a` and returns `w = Gamma b`.
///
/// On constant curvature `W = 0` and `b = a`.
pub fn integrating_factor<T: Real>(
    a: &ScalarField<T>,
    sign: i32,
    opts: NeumannOptions,
) -> Result<IntegratingFactor<T>> {
    let sign = check_sign(sign)?;
    let (b, increments) = if a.dom.metric.is_constant_curvature() {
        (a.clone(), Vec::new())
    } else {
        let c = Complex::new(T::zero(), -T::from_i32(sign).unwrap());
        neumann_series(a, c, opts, w_operator)?
    };
    Ok(IntegratingFactor {
        sign,
        w: gamma(&b, sign)?,
        boundary: gamma_boundary(&b, sign)?,
        b,
        increments,
    })
}

/// Wrong-frequency content of a bundle field.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HolomorphicityReport {
    /// Energy in the wrong-signed modes (and the Nyquist mode) over all non-constant energy.
    pub ratio: f64,
    /// Largest wrong-signed coefficient.
    pub linf: f64,
}

/// Relative `L^2` energy of negative (`sign = 1`) or positive (`sign = -1`) modes, mean excluded.
pub fn holomorphicity_report<T: Real>(u: &BundleField<T>, sign: i32) -> HolomorphicityReport {
    let dom: &Arc<Domain<T>> = &u.dom;
    let nt = dom.n_theta();
    let coeffs = fourier_coefficients(u);
    let (mut wrong, mut total, mut linf) = (0.0, 0.0, 0.0f64);
    for (s, &node) in dom.grid.stored.iter().enumerate() {
        if dom.grid.active_of[node as usize] == NONE {
            continue;
        }
        let wgt = to_f64(dom.area_weight(node as usize));
        for (idx, c) in coeffs[s * nt..(s + 1) * nt].iter().enumerate() {
            let k = dom.angles.freq(idx);
            if k == 0 {
                continue;
            }
            let e = to_f64(c.norm_sqr());
            total += e * wgt;
            if 2 * k.unsigned_abs() == nt || (sign > 0 && k < 0) || (sign < 0 && k > 0) {
                wrong += e * wgt;
                linf = linf.max(e.sqrt());
            }
        }
    }
    HolomorphicityReport {
        ratio: if total > 0.0 { wrong / total } else { 0.0 },
        linf,
    }
}
