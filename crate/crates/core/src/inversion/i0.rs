//! Inversion of `I^0` on functions and on function/solenoidal-form pairs.

use crate::bundle::{
    geodesic_derivative_field, hilbert, holo_project, BoundaryField, FiberField, OneFormField, ScalarField,
};
use crate::error::{Error, Result};
use crate::holomorphic::{neumann_series, w_operator, NeumannOptions};
use crate::inversion::{Diagnostics, I0Backend, ReconstructionConfig};
use crate::linalg::{cgls, mean, Composed, LinearMap, SolveReport};
use crate::scalar::{cplx, czero, to_f64, Complex, Real};
use crate::transport::{a_minus_star, w_psi, PairIntegrand, PairOperator, PairPreconditioner};

/// Applies a real-linear inversion to the real and imaginary parts of the data separately.
fn split_complex<T: Real>(
    d: &BoundaryField<T>,
    mut inv: impl FnMut(&BoundaryField<T>) -> Result<ScalarField<T>>,
) -> Result<ScalarField<T>> {
    let re = inv(&d.re())?;
    if d.values.iter().all(|v| v.im == T::zero()) {
        return Ok(re);
    }
    let im = inv(&d.im())?;
    Ok(re.zip_map(&im, |a, b| cplx(a.re - b.im, a.im + b.re)))
}

fn check_cc<T: Real>(d: &BoundaryField<T>) -> Result<()> {
    if d.dom.metric.is_constant_curvature() {
        Ok(())
    } else {
        Err(Error::BackendMismatch(
            "the explicit backend needs a constant-curvature metric".into(),
        ))
    }
}

/// `-(H v)_0` for a bundle field `v`.
fn minus_mean_derivative<T: Real>(v: &crate::bundle::BundleField<T>) -> ScalarField<T> {
    let mut f = geodesic_derivative_field(v, Default::default()).average().map(|z| -z);
    f.fill_halo();
    f
}

fn explicit_real<T: Real>(d: &BoundaryField<T>) -> Result<ScalarField<T>> {
    let im_b = hilbert(&d.odd_part());
    let im = w_psi(&im_b)?;
    let re = hilbert(&im).map(|z| -z);
    Ok(minus_mean_derivative(&re).re())
}

/// Inverts `I^0` on functions through the holomorphic extension of the odd part of the data.
///
/// The data is taken on inflow nodes; outflow values are ignored.
pub fn invert_i0_explicit<T: Real>(data: &BoundaryField<T>) -> Result<ScalarField<T>> {
    check_cc(data)?;
    split_complex(&data.restrict_inflow(), explicit_real)
}

/// Output of the Fredholm scheme.
#[derive(Clone, Debug)]
pub struct FredholmResult<T: Real> {
    pub f: ScalarField<T>,
    /// `g = f + W^2 f` as recovered from the data.
    pub g: ScalarField<T>,
    pub increments: Vec<f64>,
}

fn fredholm_real<T: Real>(d: &BoundaryField<T>) -> Result<ScalarField<T>> {
    let v = hilbert(&d.odd_part());
    let corr = a_minus_star(&v)?;
    let big_u = d.zip_map(&corr, |a, b| a + Complex::new(-b.im, b.re));
    let im_b = holo_project(&big_u.odd_part(), -1).im();
    let im = w_psi(&im_b)?;
    let re = hilbert(&im);
    Ok(minus_mean_derivative(&re).re())
}

/// Inverts `I^0` on functions when `W` is small: recovers `g = f + W^2 f`, then sums
/// `sum_m (-W^2)^m g`. On constant curvature the series is skipped.
pub fn invert_i0_fredholm<T: Real>(data: &BoundaryField<T>, opts: NeumannOptions) -> Result<FredholmResult<T>> {
    let g = split_complex(&data.restrict_inflow(), fredholm_real)?;
    if data.dom.metric.is_constant_curvature() {
        return Ok(FredholmResult {
            f: g.clone(),
            g,
            increments: Vec::new(),
        });
    }
    let minus_one = cplx(-T::one(), T::zero());
    let (f, increments) = neumann_series(&g, minus_one, opts, |x| w_operator(&w_operator(x)?))?;
    Ok(FredholmResult { f, g, increments })
}

/// Result of the pair inversion `I^0 (f + (*dq)(xi)) = data`.
pub struct PairInversion<T: Real> {
    pub f: ScalarField<T>,
    pub q: ScalarField<T>,
    pub alpha: OneFormField<T>,
    pub report: SolveReport,
    /// `|A x - b| / |b|`.
    pub data_residual: f64,
    pub op: PairOperator<T>,
    /// Lattice unknowns `(f, q)`, with `q` of zero mean.
    pub x: Vec<Complex<T>>,
}

impl<T: Real> PairInversion<T> {
    /// `f + (*dq)(xi)` with the discretisation used by the solve.
    pub fn integrand(&self) -> PairIntegrand<T> {
        self.op.integrand_from(&self.x)
    }
}

/// CGLS inversion for a function and a solenoidal form `alpha = *dq`.
pub fn invert_i0_pairs<T: Real>(data: &BoundaryField<T>, cfg: &ReconstructionConfig) -> Result<PairInversion<T>> {
    let dom = data.dom.clone();
    let op = PairOperator::new(&dom, dom.options.ray_step_ratio, cfg.pair_coarsen)?;
    let b = op.data_vector(data);
    let pre = PairPreconditioner::new(&op);
    let (y, report) = cgls(&Composed::new(&op, &pre), &b, T::from_f64(cfg.cgls_tol).unwrap(), cfg.cgls_max_iter)?;
    let mut x = vec![czero(); op.cols()];
    pre.apply(&y, &mut x);
    let mut ax = vec![czero(); op.rows()];
    op.apply(&x, &mut ax);
    let bn = b.iter().map(|v| v.norm_sqr()).fold(T::zero(), |s, v| s + v).sqrt();
    let rn = ax.iter().zip(&b).map(|(p, q)| (*p - *q).norm_sqr()).fold(T::zero(), |s, v| s + v).sqrt();
    let data_residual = if bn > T::zero() { to_f64(rn / bn) } else { 0.0 };
    let m = op.nodes.len();
    let qmean = mean(&x[m..]);
    x[m..].iter_mut().for_each(|v| *v = *v - qmean);
    let (mut f, mut q, mut alpha) = op.fields(&x);
    f.fill_halo();
    q.fill_halo();
    alpha.fill_halo();
    Ok(PairInversion {
        f,
        q,
        alpha,
        report,
        data_residual,
        op,
        x,
    })
}

/// Function-only inversion with the configured backend, recording diagnostics.
pub fn invert_i0<T: Real>(
    data: &BoundaryField<T>,
    cfg: &ReconstructionConfig,
    diag: &mut Diagnostics,
) -> Result<ScalarField<T>> {
    diag.backend = Some(cfg.i0_backend);
    match cfg.i0_backend {
        I0Backend::ExplicitCC => diag.time("i0_explicit", |_| invert_i0_explicit(data)),
        I0Backend::FredholmW2 => {
            let r = diag.time("i0_fredholm", |_| invert_i0_fredholm(data, cfg.neumann()))?;
            diag.iterations.insert("neumann_terms".into(), r.increments.len());
            diag.neumann_increments.insert("fredholm".into(), r.increments);
            Ok(r.f)
        }
        I0Backend::LeastSquares => {
            let r = diag.time("i0_pairs", |_| invert_i0_pairs(data, cfg))?;
            diag.iterations.insert("cgls".into(), r.report.iterations);
            diag.per_step_residuals.insert("cgls_normal_residual".into(), r.report.relative_residual);
            diag.per_step_residuals.insert("cgls_data_residual".into(), r.data_residual);
            Ok(r.f)
        }
    }
}
