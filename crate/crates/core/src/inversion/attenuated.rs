//! Reconstruction of `f` from `I^a f` through holomorphic integrating factors.

use std::sync::Arc;

use crate::bundle::{
    geodesic_derivative_field, holo_project, BoundaryField, BundleField, FiberField, ScalarField,
};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::holomorphic::{holomorphicity_report, integrating_factor, IntegratingFactor};
use crate::inversion::i0::{invert_i0, invert_i0_pairs};
use crate::inversion::{Diagnostics, I0Backend, ReconstructionConfig};
use crate::scalar::{cplx, lit, to_f64, Complex, Real};
use crate::transport::{a_minus_star, compose_exit, compose_exit_phi, transport};

pub struct Reconstruction<T: Real> {
    pub f: ScalarField<T>,
    pub diagnostics: Diagnostics,
}

/// Intermediate fields of one holomorphic branch.
struct Branch<T: Real> {
    /// `(Id -+ i H)(e^{+-w} v)` on the bundle grid and on the boundary.
    m: BundleField<T>,
    m_boundary: BoundaryField<T>,
}

fn grazing_count<T: Real>(dom: &Domain<T>) -> usize {
    let nt = dom.n_theta();
    let mut n = 0;
    for j in 0..dom.boundary.n_phi {
        for k in 0..nt {
            let b = dom.boundary_point(j, k);
            if !b.is_inflow() && b.mu() > -lit::<T>(1e-12) {
                n += 1;
            }
        }
    }
    n
}

fn interior_max<T: Real>(u: &BundleField<T>) -> f64 {
    to_f64(u.max_abs_within(lit(0.9)))
}

/// Steps 2 to 5 for one integrating factor. `sign = 1` uses a holomorphic factor.
fn branch<T: Real>(
    d: &BoundaryField<T>,
    fac: &IntegratingFactor<T>,
    cfg: &ReconstructionConfig,
    diag: &mut Diagnostics,
) -> Result<Branch<T>> {
    let sign = fac.sign;
    let tag = if sign > 0 { "w" } else { "w_tilde" };
    // Step 3: beta = (Id -+ i H)(e^{-w} d) on the boundary.
    let beta = diag.time(&format!("step3_{tag}"), |_| {
        let ed = d.zip_map(&fac.boundary, |x, w| x * (-w).exp());
        holo_project(&ed, -sign)
    });
    // Step 4: v = beta o psi + u^{(I^0)^{-1} A_-^* beta}.
    let v = diag.time(&format!("step4_{tag}"), |diag| -> Result<BundleField<T>> {
        let g = a_minus_star(&beta)?;
        let inv = invert_i0_pairs(&g, cfg)?;
        diag.iterations.insert(format!("cgls_{tag}"), inv.report.iterations);
        diag.per_step_residuals.insert(format!("step4_{tag}_cgls_normal"), inv.report.relative_residual);
        diag.per_step_residuals.insert(format!("step4_{tag}_data"), inv.data_residual);
        let u = transport(&d.dom, &inv.integrand())?;
        Ok(compose_exit(&beta)?.add(&u))
    })?;
    diag.holomorphicity_reports.insert(format!("step4_v_{tag}"), holomorphicity_report(&v, -sign));
    // Step 5 ingredients.
    let m = holo_project(&v.zip_map(&fac.w, |x, w| x * w.exp()), -sign);
    let m_boundary = holo_project(&beta.zip_map(&fac.boundary, |x, w| x * w.exp()), -sign);
    Ok(Branch { m, m_boundary })
}

/// Reconstructs `f` from `I^a f` on inflow nodes.
///
/// With `a = 0` and a holomorphic backend the pipeline reduces to that backend. Otherwise the
/// integrating factor is built, the boundary data is conjugated, the pair problem is solved by
/// least squares, and the mean `q = u_0` is found by integrating the odd part of the residual.
pub fn reconstruct_attenuated<T: Real>(
    a: &ScalarField<T>,
    sinogram: &BoundaryField<T>,
    cfg: &ReconstructionConfig,
) -> Result<Reconstruction<T>> {
    let dom: Arc<Domain<T>> = sinogram.dom.clone();
    if !Arc::ptr_eq(&dom, &a.dom) {
        return Err(Error::InvalidGrid("attenuation and sinogram live on different domains".into()));
    }
    if cfg.i0_backend == I0Backend::ExplicitCC && !dom.metric.is_constant_curvature() {
        return Err(Error::BackendMismatch(
            "the explicit backend needs a constant-curvature metric".into(),
        ));
    }
    let mut diag = Diagnostics {
        backend: Some(cfg.i0_backend),
        real_valued: cfg.real_valued,
        grazing_clamped: grazing_count(&dom),
        ..Default::default()
    };
    // Step 1: zero extension to the outflow part.
    let d = sinogram.restrict_inflow();

    if a.max_abs() == T::zero() && cfg.i0_backend != I0Backend::LeastSquares {
        diag.fast_path = true;
        let mut f = invert_i0(&d, cfg, &mut diag)?;
        if cfg.real_valued {
            f = f.re();
        }
        return Ok(Reconstruction { f, diagnostics: diag });
    }

    // Step 2: integrating factors.
    let signs: &[i32] = if cfg.real_valued { &[1] } else { &[1, -1] };
    let mut factors = Vec::new();
    for &s in signs {
        let tag = if s > 0 { "w" } else { "w_tilde" };
        let fac = diag.time(&format!("step2_{tag}"), |_| integrating_factor(a, s, cfg.neumann()))?;
        let hw = geodesic_derivative_field(&fac.w, cfg.derivative);
        let abar = BundleField::broadcast(a);
        diag.per_step_residuals.insert(format!("step2_{tag}_Hw_plus_a"), interior_max(&hw.add(&abar)));
        diag.holomorphicity_reports.insert(format!("step2_{tag}"), holomorphicity_report(&fac.w, s));
        if !fac.increments.is_empty() {
            diag.neumann_increments.insert(tag.to_string(), fac.increments.clone());
        }
        factors.push(fac);
    }

    // Steps 3 and 4, and step 5: m = (1/2) Re[(Id - iH)(e^w v)], or the complex average.
    let mut m = BundleField::zeros(&dom);
    let mut mb = BoundaryField::zeros(&dom);
    for fac in &factors {
        let br = branch(&d, fac, cfg, &mut diag)?;
        m = m.add(&br.m);
        mb = mb.add(&br.m_boundary);
    }
    let scale: T = if cfg.real_valued { lit(0.5) } else { lit(0.25) };
    let finish = |x: Complex<T>| if cfg.real_valued { cplx(x.re * scale, T::zero()) } else { x * scale };
    m = m.map(finish);
    mb = mb.map(finish);
    let m0 = BundleField::broadcast(&m.average());
    let u_hat = m.sub(&m0);
    let mb0 = mb.average();
    let nt = dom.n_theta();
    let mut ub_hat = mb.clone();
    for j in 0..dom.boundary.n_phi {
        for k in 0..nt {
            ub_hat.values[j * nt + k] = mb.values[j * nt + k] - mb0[j];
        }
    }
    diag.per_step_residuals
        .insert("step5_mean_of_u_hat".into(), to_f64(u_hat.average().max_abs()));

    // Step 6: q = (d - u_hat)_0 o psi + u^{(H u_hat + a u_hat)_-}, then averaged over the fibre.
    let (q, hu) = diag.time("step6", |diag| -> Result<(ScalarField<T>, BundleField<T>)> {
        let hu = geodesic_derivative_field(&u_hat, cfg.derivative);
        let au = u_hat.zip_map(&BundleField::broadcast(a), |x, y| x * y);
        let g = hu.add(&au).odd_part();
        let ug = transport(&dom, &g)?;
        let edge: Vec<Complex<T>> = d.sub(&ub_hat).average();
        let qf = compose_exit_phi(&dom, &edge)?.add(&ug);
        let mut q = qf.average();
        q.fill_halo();
        let spread = qf.sub(&BundleField::broadcast(&q));
        let qn = to_f64(q.max_abs_within(lit(0.9))).max(f64::MIN_POSITIVE);
        diag.per_step_residuals.insert("step6_q_angular_spread".into(), interior_max(&spread) / qn);
        Ok((q, hu))
    })?;

    // Step 7: f = -(H u + a u)_0 = -(H u_hat)_0 - a q.
    let mut f = hu.average().zip_map(&a.zip_map(&q, |x, y| x * y), |x, y| -x - y);
    f.fill_halo();
    if cfg.real_valued {
        f = f.re();
    }
    Ok(Reconstruction { f, diagnostics: diag })
}
