//! Krylov solvers used by the inversion routines.

use crate::error::{Error, Result};
use crate::scalar::{czero, from_usize, Complex, Real};

/// Matrix-free linear map between complex vector spaces.
pub trait LinearMap<T: Real>: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]);
    /// Conjugate transpose.
    fn apply_adjoint(&self, y: &[Complex<T>], x: &mut [Complex<T>]);
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final relative residual (normal-equation residual for CGLS).
    pub relative_residual: f64,
    pub converged: bool,
}

fn nrm2<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().fold(T::zero(), |s, x| s + x.norm_sqr()).sqrt()
}

/// CGLS for `min |A x - b|`, started from zero. Stops when `|A^* r| <= tol |A^* b|`.
pub fn cgls<T: Real, M: LinearMap<T>>(
    op: &M,
    b: &[Complex<T>],
    tol: T,
    max_iter: usize,
) -> Result<(Vec<Complex<T>>, SolveReport)> {
    let n = op.cols();
    let mut x = vec![czero(); n];
    let mut r = b.to_vec();
    let mut s = vec![czero(); n];
    op.apply_adjoint(&r, &mut s);
    let s0 = nrm2(&s);
    let mut report = SolveReport::default();
    if s0 == T::zero() {
        report.converged = true;
        return Ok((x, report));
    }
    let mut p = s.clone();
    let mut gamma = s0 * s0;
    let mut q = vec![czero(); op.rows()];
    for it in 1..=max_iter {
        op.apply(&p, &mut q);
        let qq = nrm2(&q);
        let alpha = gamma / (qq * qq);
        if !alpha.is_finite() {
            return Err(Error::SolverDiverged {
                iterations: it,
                residual: (gamma.sqrt() / s0).to_f64().unwrap_or(f64::NAN),
            });
        }
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi = *xi + *pi * alpha;
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri = *ri - *qi * alpha;
        }
        op.apply_adjoint(&r, &mut s);
        let gnew = nrm2(&s).powi(2);
        let rel = gnew.sqrt() / s0;
        report.iterations = it;
        report.relative_residual = rel.to_f64().unwrap_or(f64::NAN);
        if rel <= tol {
            report.converged = true;
            break;
        }
        let beta = gnew / gamma;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = *si + *pi * beta;
        }
        gamma = gnew;
    }
    Ok((x, report))
}

/// Sparse matrix in compressed row form.
#[derive(Clone, Debug)]
pub struct Csr<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: Real> Csr<T> {
    pub fn mul(&self, x: &[T], y: &mut [T]) {
        for r in 0..self.n {
            let mut s = T::zero();
            for e in self.row_ptr[r]..self.row_ptr[r + 1] {
                s = s + self.vals[e] * x[self.cols[e]];
            }
            y[r] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .find(|&e| self.cols[e] == r)
                    .map(|e| self.vals[e])
                    .unwrap_or(T::one())
            })
            .collect()
    }
}

/// Jacobi-preconditioned BiCGSTAB for a real non-symmetric system.
pub fn bicgstab<T: Real>(a: &Csr<T>, b: &[T], tol: T, max_iter: usize) -> Result<(Vec<T>, SolveReport)> {
    let n = a.n;
    let dinv: Vec<T> = a.diagonal().iter().map(|d| T::one() / *d).collect();
    let dotr = |u: &[T], v: &[T]| u.iter().zip(v).fold(T::zero(), |s, (x, y)| s + *x * *y);
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let bnorm = dotr(b, b).sqrt();
    let mut report = SolveReport::default();
    if bnorm == T::zero() {
        report.converged = true;
        return Ok((x, report));
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (T::one(), T::one(), T::one());
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    for it in 1..=max_iter {
        let rho_new = dotr(&r_hat, &r);
        if rho_new == T::zero() || !rho_new.is_finite() {
            return Err(Error::SolverDiverged {
                iterations: it,
                residual: (dotr(&r, &r).sqrt() / bnorm).to_f64().unwrap_or(f64::NAN),
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = dinv[i] * p[i];
        }
        a.mul(&y, &mut v);
        alpha = rho / dotr(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if dotr(&s, &s).sqrt() <= tol * bnorm {
            for i in 0..n {
                x[i] = x[i] + alpha * y[i];
            }
            report.iterations = it;
            report.relative_residual = (dotr(&s, &s).sqrt() / bnorm).to_f64().unwrap();
            report.converged = true;
            return Ok((x, report));
        }
        for i in 0..n {
            z[i] = dinv[i] * s[i];
        }
        a.mul(&z, &mut t);
        omega = dotr(&t, &s) / dotr(&t, &t);
        for i in 0..n {
            x[i] = x[i] + alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        let rel = dotr(&r, &r).sqrt() / bnorm;
        report.iterations = it;
        report.relative_residual = rel.to_f64().unwrap_or(f64::NAN);
        if !rel.is_finite() {
            return Err(Error::SolverDiverged {
                iterations: it,
                residual: report.relative_residual,
            });
        }
        if rel <= tol {
            report.converged = true;
            return Ok((x, report));
        }
    }
    Err(Error::MaxIterations {
        iterations: max_iter,
        residual: report.relative_residual,
    })
}

/// Mean of a slice.
pub fn mean<T: Real>(v: &[Complex<T>]) -> Complex<T> {
    v.iter().fold(czero(), |s, x| s + *x) / from_usize::<T>(v.len().max(1))
}

/// `A D` for a diagonal `D`, used for column scaling.
pub struct RightScaled<'a, T: Real, M: LinearMap<T>> {
    pub op: &'a M,
    pub d: Vec<T>,
}

impl<'a, T: Real, M: LinearMap<T>> RightScaled<'a, T, M> {
    /// Scales every column to unit norm; empty columns are dropped.
    pub fn unit_columns(op: &'a M, norms: &[T]) -> Self {
        let d = norms
            .iter()
            .map(|&c| if c > T::zero() { T::one() / c } else { T::zero() })
            .collect();
        Self { op, d }
    }

    /// `D y`.
    pub fn unscale(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        y.iter().zip(&self.d).map(|(v, d)| *v * *d).collect()
    }
}

impl<'a, T: Real, M: LinearMap<T>> LinearMap<T> for RightScaled<'a, T, M> {
    fn rows(&self) -> usize {
        self.op.rows()
    }
    fn cols(&self) -> usize {
        self.op.cols()
    }
    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        self.op.apply(&self.unscale(x), y);
    }
    fn apply_adjoint(&self, y: &[Complex<T>], x: &mut [Complex<T>]) {
        self.op.apply_adjoint(y, x);
        for (v, d) in x.iter_mut().zip(&self.d) {
            *v = *v * *d;
        }
    }
}

/// Composition `A B` with adjoint `B^* A^*`.
pub struct Composed<'a, T: Real, A: LinearMap<T>, B: LinearMap<T>> {
    pub a: &'a A,
    pub b: &'a B,
    _t: std::marker::PhantomData<T>,
}

impl<'a, T: Real, A: LinearMap<T>, B: LinearMap<T>> Composed<'a, T, A, B> {
    pub fn new(a: &'a A, b: &'a B) -> Self {
        Self {
            a,
            b,
            _t: std::marker::PhantomData,
        }
    }
}

impl<'a, T: Real, A: LinearMap<T>, B: LinearMap<T>> LinearMap<T> for Composed<'a, T, A, B> {
    fn rows(&self) -> usize {
        self.a.rows()
    }
    fn cols(&self) -> usize {
        self.b.cols()
    }
    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        let mut t = vec![czero(); self.b.rows()];
        self.b.apply(x, &mut t);
        self.a.apply(&t, y);
    }
    fn apply_adjoint(&self, y: &[Complex<T>], x: &mut [Complex<T>]) {
        let mut t = vec![czero(); self.a.cols()];
        self.a.apply_adjoint(y, &mut t);
        self.b.apply_adjoint(&t, x);
    }
}
