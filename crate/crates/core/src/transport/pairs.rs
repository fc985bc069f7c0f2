//! Discrete unattenuated transform of pairs `f + (*dq)(xi)` with nodal `f` and `q`.
//!
//! The unknowns live on a lattice `coarsen` times coarser than the spatial grid: every geodesic
//! is measured from both ends, so nodal unknowns at full resolution would outnumber the
//! independent data. Ray samples are traced once and cached. Both unknowns are read through the
//! bicubic interpolant, and `(*dq)(xi) = xi_perp . grad q` uses the exact gradient of the interpolant of
//! `q`, with `xi_perp = e^{-lambda} (sin theta, -cos theta)`. The transpose is exact.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bundle::interp::{cubic_weight_derivatives, cubic_weights};
use crate::bundle::{BoundaryField, OneFormField, ScalarField};
use crate::domain::Domain;
use crate::error::Result;
use crate::geometry::walk;
use crate::linalg::LinearMap;
use crate::scalar::{czero, from_usize, lit, Complex, Real};
use crate::transport::integrand::Integrand;
use crate::transport::quadrature::{weights, TraceSamples};

#[derive(Clone, Copy, Debug)]
struct Sample<T> {
    /// Lower-left node of the 4x4 stencil.
    base: u32,
    sx: T,
    sy: T,
    w: T,
    /// `w xi_perp / h`.
    wp1: T,
    wp2: T,
}

impl<T: Real> Sample<T> {
    /// Stencil coefficients of `f` and `q`, row-major in `y`.
    #[inline(always)]
    fn coeffs(&self) -> ([T; 16], [T; 16]) {
        let wx = cubic_weights(self.sx);
        let wy = cubic_weights(self.sy);
        let dx = cubic_weight_derivatives(self.sx);
        let dy = cubic_weight_derivatives(self.sy);
        let mut cf = [T::zero(); 16];
        let mut cq = [T::zero(); 16];
        for b in 0..4 {
            for a in 0..4 {
                cf[4 * b + a] = self.w * wx[a] * wy[b];
                cq[4 * b + a] = self.wp1 * dx[a] * wy[b] + self.wp2 * wx[a] * dy[b];
            }
        }
        (cf, cq)
    }
}

/// Square lattice carrying the unknowns.
#[derive(Clone, Copy, Debug)]
pub struct Lattice<T> {
    pub n: usize,
    pub h: T,
    pub origin: T,
}

impl<T: Real> Lattice<T> {
    #[inline(always)]
    fn locate(&self, x: T) -> (usize, T) {
        let u = (x - self.origin) / self.h;
        let i = u.floor().to_isize().unwrap_or(0).clamp(1, self.n as isize - 3) as usize;
        (i, u - from_usize::<T>(i))
    }

    pub fn position(&self, idx: usize) -> [T; 2] {
        [
            self.origin + from_usize::<T>(idx % self.n) * self.h,
            self.origin + from_usize::<T>(idx / self.n) * self.h,
        ]
    }

    /// Stencil base and the `f` and `q` coefficients at `x` for weights `w` and `w xi_perp`.
    #[inline(always)]
    fn sample(&self, x: [T; 2], w: T, perp: [T; 2]) -> Sample<T> {
        let (i0, sx) = self.locate(x[0]);
        let (j0, sy) = self.locate(x[1]);
        let inv_h = T::one() / self.h;
        Sample {
            base: ((j0 - 1) * self.n + i0 - 1) as u32,
            sx,
            sy,
            w,
            wp1: perp[0] * inv_h,
            wp2: perp[1] * inv_h,
        }
    }
}

/// Cached inflow rays and the unknown layout of the pair problem.
pub struct PairOperator<T: Real> {
    pub dom: Arc<Domain<T>>,
    pub lattice: Lattice<T>,
    /// `(j, k)` boundary node of each ray.
    pub rays: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    samples: Vec<Sample<T>>,
    /// Lattice nodes carrying a value of `f` and of `q`.
    pub nodes: Vec<u32>,
}

impl<T: Real> PairOperator<T> {
    /// Traces every inflow ray with step `step_ratio * h`; unknowns on a lattice of spacing
    /// `coarsen * h`.
    pub fn new(dom: &Arc<Domain<T>>, step_ratio: f64, coarsen: usize) -> Result<Self> {
        let g = &dom.grid;
        let nt = dom.n_theta();
        let mut opts = dom.trace;
        opts.step = g.h * lit(step_ratio);
        let c = coarsen.max(1);
        let lattice = Lattice {
            n: g.n.div_ceil(c),
            h: g.h * from_usize::<T>(c),
            origin: g.origin,
        };
        let mut rays = Vec::new();
        for j in 0..dom.boundary.n_phi {
            for k in 0..nt {
                if dom.boundary_point(j, k).is_inflow() {
                    rays.push((j as u32, k as u32));
                }
            }
        }
        let per_ray: Vec<Result<Vec<Sample<T>>>> = rays
            .par_iter()
            .map(|&(j, k)| {
                let b = dom.boundary_point(j as usize, k as usize);
                let mut pts = Vec::new();
                walk(&dom.metric, &b.to_bundle(dom.radius()), &opts, |t, p| pts.push((t, *p)))?;
                let mut buf = TraceSamples::<T>::new();
                buf.t.extend(pts.iter().map(|p| p.0));
                let m0 = pts.len();
                buf.prune_tail();
                if buf.t.len() < m0 {
                    pts.remove(m0 - 2);
                }
                let mut wts = Vec::new();
                weights(&buf.t, &mut wts);
                let mut out = Vec::with_capacity(pts.len());
                for (s, &w) in wts.iter().enumerate() {
                    let p = pts[s].1;
                    let e = (-dom.metric.log_conformal(p.x).lambda).exp();
                    let (sn, cs) = p.theta.sin_cos();
                    out.push(lattice.sample(p.x, w, [w * e * sn, -w * e * cs]));
                }
                Ok(out)
            })
            .collect();
        let mut offsets = vec![0];
        let mut samples = Vec::new();
        for r in per_ray {
            samples.extend(r?);
            offsets.push(samples.len());
        }
        let n = lattice.n;
        let mut mark = vec![false; n * n];
        for s in &samples {
            let b = s.base as usize;
            for r in 0..4 {
                for c in 0..4 {
                    mark[b + r * n + c] = true;
                }
            }
        }
        let nodes = mark.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i as u32).collect();
        Ok(Self {
            dom: dom.clone(),
            lattice,
            rays,
            offsets,
            samples,
            nodes,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    /// Lattice arrays of `f` and `q` from an unknown vector.
    fn expand(&self, x: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let nn = self.lattice.n * self.lattice.n;
        let m = self.nodes.len();
        let mut f = vec![czero(); nn];
        let mut q = vec![czero(); nn];
        for (u, &i) in self.nodes.iter().enumerate() {
            f[i as usize] = x[u];
            q[i as usize] = x[m + u];
        }
        (f, q)
    }

    /// `f`, `q` and `*dq` on the spatial grid, read through the lattice interpolant.
    pub fn fields(&self, x: &[Complex<T>]) -> (ScalarField<T>, ScalarField<T>, OneFormField<T>) {
        let it = self.integrand_from(x);
        let dom = &self.dom;
        let mut f = ScalarField::zeros(dom);
        let mut q = ScalarField::zeros(dom);
        let mut alpha = OneFormField::zeros(dom);
        for i in 0..dom.grid.node_count() {
            let [fv, qv, g1, g2] = it.parts(dom.grid.position(i));
            f.values[i] = fv;
            q.values[i] = qv;
            alpha.comps[0][i] = -g2;
            alpha.comps[1][i] = g1;
        }
        (f, q, alpha)
    }

    /// Least-squares projection of grid fields onto the lattice, for tests and warm starts.
    pub fn restrict(&self, f: &ScalarField<T>, q: &ScalarField<T>) -> Vec<Complex<T>> {
        let pick = |v: &ScalarField<T>| -> Vec<Complex<T>> {
            self.nodes
                .iter()
                .map(|&i| {
                    let p = self.lattice.position(i as usize);
                    v.sample_cubic(p)
                })
                .collect()
        };
        let mut out = pick(f);
        out.extend(pick(q));
        out
    }

    /// Ray data as a vector, read from the inflow nodes of a boundary field.
    pub fn data_vector(&self, g: &BoundaryField<T>) -> Vec<Complex<T>> {
        self.rays.iter().map(|&(j, k)| g.at(j as usize, k as usize)).collect()
    }

    /// Inverse of [`PairOperator::data_vector`], zero on outflow nodes.
    pub fn data_field(&self, y: &[Complex<T>]) -> BoundaryField<T> {
        let mut out = BoundaryField::zeros(&self.dom);
        for (&(j, k), v) in self.rays.iter().zip(y) {
            out.set(j as usize, k as usize, *v);
        }
        out
    }

    /// Euclidean norms of the columns, in unknown order.
    pub fn column_norms(&self) -> Vec<T> {
        let n = self.lattice.n;
        let nn = n * n;
        let mut af = vec![T::zero(); nn];
        let mut aq = vec![T::zero(); nn];
        let mut sf = vec![T::zero(); nn];
        let mut sq = vec![T::zero(); nn];
        let mut touched = Vec::new();
        for r in 0..self.rays.len() {
            for s in &self.samples[self.offsets[r]..self.offsets[r + 1]] {
                let (cf, cq) = s.coeffs();
                let b = s.base as usize;
                for rr in 0..4 {
                    for c in 0..4 {
                        let i = b + rr * n + c;
                        if af[i] == T::zero() && aq[i] == T::zero() {
                            touched.push(i);
                        }
                        af[i] = af[i] + cf[4 * rr + c];
                        aq[i] = aq[i] + cq[4 * rr + c];
                    }
                }
            }
            for &i in &touched {
                sf[i] = sf[i] + af[i] * af[i];
                sq[i] = sq[i] + aq[i] * aq[i];
                af[i] = T::zero();
                aq[i] = T::zero();
            }
            touched.clear();
        }
        self.nodes
            .iter()
            .map(|&i| sf[i as usize].sqrt())
            .chain(self.nodes.iter().map(|&i| sq[i as usize].sqrt()))
            .collect()
    }

    /// Integrand that evaluates `f + (*dq)(xi)` for an unknown vector, with the same
    /// interpolation as the operator.
    pub fn integrand_from(&self, x: &[Complex<T>]) -> PairIntegrand<T> {
        let (f, q) = self.expand(x);
        PairIntegrand {
            dom: self.dom.clone(),
            lattice: self.lattice,
            f,
            q,
        }
    }
}

impl<T: Real> LinearMap<T> for PairOperator<T> {
    fn rows(&self) -> usize {
        self.rays.len()
    }

    fn cols(&self) -> usize {
        2 * self.nodes.len()
    }

    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        let (f, q) = self.expand(x);
        let n = self.lattice.n;
        y.par_iter_mut().enumerate().for_each(|(r, yr)| {
            let mut acc = czero();
            for s in &self.samples[self.offsets[r]..self.offsets[r + 1]] {
                let (cf, cq) = s.coeffs();
                let b = s.base as usize;
                for rr in 0..4 {
                    let o = b + rr * n;
                    for c in 0..4 {
                        acc = acc + f[o + c] * cf[4 * rr + c] + q[o + c] * cq[4 * rr + c];
                    }
                }
            }
            *yr = acc;
        });
    }

    fn apply_adjoint(&self, y: &[Complex<T>], x: &mut [Complex<T>]) {
        let n = self.lattice.n;
        let nn = n * n;
        let mut af = vec![czero(); nn];
        let mut aq = vec![czero(); nn];
        for (r, yr) in y.iter().enumerate() {
            let yc = yr.conj();
            for s in &self.samples[self.offsets[r]..self.offsets[r + 1]] {
                let (cf, cq) = s.coeffs();
                let b = s.base as usize;
                for rr in 0..4 {
                    let o = b + rr * n;
                    for c in 0..4 {
                        af[o + c] = af[o + c] + yc * cf[4 * rr + c];
                        aq[o + c] = aq[o + c] + yc * cq[4 * rr + c];
                    }
                }
            }
        }
        let m = self.nodes.len();
        for (u, &i) in self.nodes.iter().enumerate() {
            x[u] = af[i as usize].conj();
            x[m + u] = aq[i as usize].conj();
        }
    }
}

/// Pair integrand matching the discretisation of [`PairOperator`].
pub struct PairIntegrand<T: Real> {
    dom: Arc<Domain<T>>,
    lattice: Lattice<T>,
    f: Vec<Complex<T>>,
    q: Vec<Complex<T>>,
}

impl<T: Real> PairIntegrand<T> {
    /// `f`, `q`, `d1 q`, `d2 q` at a point.
    pub fn parts(&self, x: [T; 2]) -> [Complex<T>; 4] {
        let s = self.lattice.sample(x, T::one(), [T::one(), T::zero()]);
        let t = self.lattice.sample(x, T::zero(), [T::zero(), T::one()]);
        let (cf, c1) = s.coeffs();
        let (_, c2) = t.coeffs();
        let n = self.lattice.n;
        let b = s.base as usize;
        let mut out = [czero(); 4];
        for rr in 0..4 {
            let o = b + rr * n;
            for c in 0..4 {
                let k = 4 * rr + c;
                out[0] = out[0] + self.f[o + c] * cf[k];
                out[1] = out[1] + self.q[o + c] * cf[k];
                out[2] = out[2] + self.q[o + c] * c1[k];
                out[3] = out[3] + self.q[o + c] * c2[k];
            }
        }
        out
    }
}

impl<T: Real> Integrand<T> for PairIntegrand<T> {
    #[inline]
    fn eval(&self, x: [T; 2], theta: T) -> Complex<T> {
        let e = (-self.dom.metric.log_conformal(x).lambda).exp();
        let (sn, cs) = theta.sin_cos();
        let s = self.lattice.sample(x, T::one(), [e * sn, -e * cs]);
        let (cf, cq) = s.coeffs();
        let b = s.base as usize;
        let n = self.lattice.n;
        let mut acc = czero();
        for rr in 0..4 {
            let o = b + rr * n;
            for c in 0..4 {
                acc = acc + self.f[o + c] * cf[4 * rr + c] + self.q[o + c] * cq[4 * rr + c];
            }
        }
        acc
    }
}
