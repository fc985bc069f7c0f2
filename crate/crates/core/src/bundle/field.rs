//! Grid functions on the disc, its unit circle bundle and the boundary bundle.

use std::sync::Arc;

use crate::bundle::interp::{cubic_weights, periodic_sinc};
use crate::domain::Domain;
use crate::geometry::BoundaryPoint;
use crate::scalar::{czero, from_usize, lit, wrap_2pi, Complex, Real};

/// Complex function on the spatial grid. Values live on every node.
#[derive(Clone, Debug)]
pub struct ScalarField<T: Real> {
    pub dom: Arc<Domain<T>>,
    pub values: Vec<Complex<T>>,
}

/// One-form with complex chart components `alpha_1`, `alpha_2`.
#[derive(Clone, Debug)]
pub struct OneFormField<T: Real> {
    pub dom: Arc<Domain<T>>,
    pub comps: [Vec<Complex<T>>; 2],
}

/// Function on the unit circle bundle, stored angle-major: `values[k * n^2 + node]`.
///
/// Only active and halo nodes carry data. Halo values are quadratic extrapolations.
#[derive(Clone, Debug)]
pub struct BundleField<T: Real> {
    pub dom: Arc<Domain<T>>,
    pub values: Vec<Complex<T>>,
}

/// Function on the boundary bundle, stored node-major: `values[j * n_theta + k]`.
#[derive(Clone, Debug)]
pub struct BoundaryField<T: Real> {
    pub dom: Arc<Domain<T>>,
    pub values: Vec<Complex<T>>,
}

/// Common interface of fields made of full circle fibres.
pub trait FiberField<T: Real>: Clone + Send + Sync {
    fn domain(&self) -> &Arc<Domain<T>>;
    fn values(&self) -> &[Complex<T>];
    fn values_mut(&mut self) -> &mut [Complex<T>];
    fn fiber_count(&self) -> usize;
    /// Fibres copied into a contiguous fibre-major buffer.
    fn gather(&self) -> Vec<Complex<T>>;
    /// Inverse of [`FiberField::gather`].
    fn scatter(&mut self, buf: &[Complex<T>]);
    /// `u(x, theta + pi)`.
    fn shift_half(&self) -> Self;

    fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        let mut out = self.clone();
        out.values_mut().iter_mut().for_each(|v| *v = f(*v));
        out
    }

    fn zip_map(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        let mut out = self.clone();
        out.values_mut()
            .iter_mut()
            .zip(other.values())
            .for_each(|(a, b)| *a = f(*a, *b));
        out
    }

    fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    fn scale(&self, c: Complex<T>) -> Self {
        self.map(|a| a * c)
    }

    fn conj(&self) -> Self {
        self.map(|a| a.conj())
    }

    fn re(&self) -> Self {
        self.map(|a| Complex::new(a.re, T::zero()))
    }

    fn im(&self) -> Self {
        self.map(|a| Complex::new(a.im, T::zero()))
    }

    /// Even and odd parts under `theta -> theta + pi`.
    fn parity_split(&self) -> (Self, Self) {
        let s = self.shift_half();
        let half = lit::<T>(0.5);
        (
            self.zip_map(&s, |a, b| (a + b) * half),
            self.zip_map(&s, |a, b| (a - b) * half),
        )
    }

    fn odd_part(&self) -> Self {
        let s = self.shift_half();
        self.zip_map(&s, |a, b| (a - b) * lit::<T>(0.5))
    }

    fn even_part(&self) -> Self {
        let s = self.shift_half();
        self.zip_map(&s, |a, b| (a + b) * lit::<T>(0.5))
    }
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(dom: &Arc<Domain<T>>) -> Self {
        Self {
            dom: dom.clone(),
            values: vec![czero(); dom.grid.node_count()],
        }
    }

    /// Samples `f` on every grid node, including those outside the disc.
    pub fn from_fn(dom: &Arc<Domain<T>>, f: impl Fn([T; 2]) -> Complex<T>) -> Self {
        let g = &dom.grid;
        Self {
            dom: dom.clone(),
            values: (0..g.node_count()).map(|i| f(g.position(i))).collect(),
        }
    }

    pub fn from_real_fn(dom: &Arc<Domain<T>>, f: impl Fn([T; 2]) -> T) -> Self {
        Self::from_fn(dom, |x| Complex::new(f(x), T::zero()))
    }

    pub fn fill_halo(&mut self) {
        self.dom.grid.fill_halo(&mut self.values);
    }

    /// Zeroes every node outside the disc and refills the halo.
    pub fn restrict_to_disc(&mut self) {
        let g = &self.dom.grid;
        for (i, v) in self.values.iter_mut().enumerate() {
            if g.active_of[i] == crate::domain::NONE {
                *v = czero();
            }
        }
        g.fill_halo(&mut self.values);
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            dom: self.dom.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, o: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        Self {
            dom: self.dom.clone(),
            values: self.values.iter().zip(&o.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn re(&self) -> Self {
        self.map(|a| Complex::new(a.re, T::zero()))
    }

    /// Bicubic Lagrange interpolation.
    #[inline]
    pub fn sample_cubic(&self, x: [T; 2]) -> Complex<T> {
        sample_cubic_slice(&self.dom, &self.values, x)
    }

    /// Bilinear interpolation.
    #[inline]
    pub fn sample_linear(&self, x: [T; 2]) -> Complex<T> {
        sample_linear_slice(&self.dom, &self.values, x)
    }

    /// Max modulus over active nodes with `|x| <= frac R`.
    pub fn max_abs_within(&self, frac: T) -> T {
        let g = &self.dom.grid;
        let r = frac * g.radius;
        g.active
            .iter()
            .filter(|&&i| norm(g.position(i as usize)) <= r)
            .fold(T::zero(), |m, &i| m.max(self.values[i as usize].norm()))
    }

    pub fn max_abs(&self) -> T {
        self.max_abs_within(T::one())
    }

    /// Weighted `L^2(M)` norm over active nodes.
    pub fn l2_norm(&self) -> T {
        let g = &self.dom.grid;
        g.active
            .iter()
            .fold(T::zero(), |s, &i| s + self.values[i as usize].norm_sqr() * self.dom.area_weight(i as usize))
            .sqrt()
    }

    /// Bilinear pairing `sum f g dA_g` over active nodes.
    pub fn pairing(&self, o: &Self) -> Complex<T> {
        let g = &self.dom.grid;
        g.active.iter().fold(czero(), |s, &i| {
            let i = i as usize;
            s + self.values[i] * o.values[i] * self.dom.area_weight(i)
        })
    }
}

#[inline(always)]
pub(crate) fn norm<T: Real>(x: [T; 2]) -> T {
    (x[0] * x[0] + x[1] * x[1]).sqrt()
}

#[inline(always)]
pub(crate) fn sample_cubic_slice<T: Real>(dom: &Domain<T>, v: &[Complex<T>], x: [T; 2]) -> Complex<T> {
    let g = &dom.grid;
    let (i, sx) = g.locate(x[0]);
    let (j, sy) = g.locate(x[1]);
    let wx = cubic_weights(sx);
    let wy = cubic_weights(sy);
    let n = g.n;
    let mut acc = czero();
    for b in 0..4 {
        let row = (j + b - 1) * n + i - 1;
        let r = v[row] * wx[0] + v[row + 1] * wx[1] + v[row + 2] * wx[2] + v[row + 3] * wx[3];
        acc = acc + r * wy[b];
    }
    acc
}

#[inline(always)]
pub(crate) fn sample_linear_slice<T: Real>(dom: &Domain<T>, v: &[Complex<T>], x: [T; 2]) -> Complex<T> {
    let g = &dom.grid;
    let (i, sx) = g.locate(x[0]);
    let (j, sy) = g.locate(x[1]);
    let n = g.n;
    let b = j * n + i;
    let one = T::one();
    (v[b] * (one - sx) + v[b + 1] * sx) * (one - sy) + (v[b + n] * (one - sx) + v[b + n + 1] * sx) * sy
}

impl<T: Real> OneFormField<T> {
    pub fn zeros(dom: &Arc<Domain<T>>) -> Self {
        let n = dom.grid.node_count();
        Self {
            dom: dom.clone(),
            comps: [vec![czero(); n], vec![czero(); n]],
        }
    }

    pub fn from_fn(dom: &Arc<Domain<T>>, f: impl Fn([T; 2]) -> [Complex<T>; 2]) -> Self {
        let g = &dom.grid;
        let vals: Vec<_> = (0..g.node_count()).map(|i| f(g.position(i))).collect();
        Self {
            dom: dom.clone(),
            comps: [vals.iter().map(|v| v[0]).collect(), vals.iter().map(|v| v[1]).collect()],
        }
    }

    pub fn fill_halo(&mut self) {
        let g = &self.dom.grid;
        g.fill_halo(&mut self.comps[0]);
        g.fill_halo(&mut self.comps[1]);
    }

    #[inline]
    pub fn sample_cubic(&self, x: [T; 2]) -> [Complex<T>; 2] {
        [
            sample_cubic_slice(&self.dom, &self.comps[0], x),
            sample_cubic_slice(&self.dom, &self.comps[1], x),
        ]
    }

    /// `alpha(xi)` for the unit vector of angle `theta` at `x`.
    #[inline]
    pub fn contract(&self, x: [T; 2], theta: T) -> Complex<T> {
        let a = self.sample_cubic(x);
        let xi = self.dom.metric.unit_vector(x, theta);
        a[0] * xi[0] + a[1] * xi[1]
    }

    /// Pairing with a vector field given by upper components: `sum alpha_j V^j dA_g`.
    pub fn pairing_vector(&self, v: &OneFormField<T>) -> Complex<T> {
        let g = &self.dom.grid;
        g.active.iter().fold(czero(), |s, &i| {
            let i = i as usize;
            s + (self.comps[0][i] * v.comps[0][i] + self.comps[1][i] * v.comps[1][i]) * self.dom.area_weight(i)
        })
    }

    /// `max |alpha|_g` over active nodes.
    pub fn max_abs(&self) -> T {
        let g = &self.dom.grid;
        g.active.iter().fold(T::zero(), |m, &i| {
            let i = i as usize;
            let e = (-self.dom.metric.log_conformal(g.position(i)).lambda).exp();
            m.max(e * (self.comps[0][i].norm_sqr() + self.comps[1][i].norm_sqr()).sqrt())
        })
    }
}

impl<T: Real> BundleField<T> {
    pub fn zeros(dom: &Arc<Domain<T>>) -> Self {
        Self {
            dom: dom.clone(),
            values: vec![czero(); dom.grid.node_count() * dom.n_theta()],
        }
    }

    /// Samples `f(x, theta)` on active and halo nodes.
    pub fn from_fn(dom: &Arc<Domain<T>>, f: impl Fn([T; 2], T) -> Complex<T> + Sync) -> Self {
        let mut out = Self::zeros(dom);
        let n2 = dom.grid.node_count();
        use rayon::prelude::*;
        out.values.par_chunks_mut(n2).enumerate().for_each(|(k, sl)| {
            let th = dom.angles.theta(k);
            for &i in &dom.grid.stored {
                sl[i as usize] = f(dom.grid.position(i as usize), th);
            }
        });
        out
    }

    /// Constant extension along fibres.
    pub fn broadcast(f: &ScalarField<T>) -> Self {
        let dom = &f.dom;
        let mut out = Self::zeros(dom);
        let n2 = dom.grid.node_count();
        for k in 0..dom.n_theta() {
            for &i in &dom.grid.stored {
                out.values[k * n2 + i as usize] = f.values[i as usize];
            }
        }
        out
    }

    #[inline(always)]
    pub fn slice(&self, k: usize) -> &[Complex<T>] {
        let n2 = self.dom.grid.node_count();
        &self.values[k * n2..(k + 1) * n2]
    }

    #[inline(always)]
    pub fn at(&self, node: usize, k: usize) -> Complex<T> {
        self.values[k * self.dom.grid.node_count() + node]
    }

    pub fn fill_halo(&mut self) {
        let n2 = self.dom.grid.node_count();
        let g = &self.dom.grid;
        for sl in self.values.chunks_mut(n2) {
            g.fill_halo(sl);
        }
    }

    /// Bicubic interpolation on fibre slice `k`.
    #[inline(always)]
    pub fn sample_slice(&self, x: [T; 2], k: usize) -> Complex<T> {
        sample_cubic_slice(&self.dom, self.slice(k), x)
    }

    /// Bicubic in space, cubic Lagrange in angle.
    #[inline]
    pub fn sample(&self, x: [T; 2], theta: T) -> Complex<T> {
        let nt = self.dom.n_theta();
        let u = wrap_2pi(theta) / self.dom.angles.dtheta;
        let f = u.floor();
        let s = u - f;
        let k0 = f.to_usize().unwrap_or(0) % nt;
        let eps = lit::<T>(1e-12);
        if s < eps {
            return self.sample_slice(x, k0);
        }
        if s > T::one() - eps {
            return self.sample_slice(x, (k0 + 1) % nt);
        }
        let w = cubic_weights(s);
        let mut acc = czero();
        for (a, wa) in w.iter().enumerate() {
            let k = (k0 + nt + a - 1) % nt;
            acc = acc + self.sample_slice(x, k) * *wa;
        }
        acc
    }

    /// Bilinear in space, linear in angle.
    #[inline]
    pub fn sample_linear(&self, x: [T; 2], theta: T) -> Complex<T> {
        let nt = self.dom.n_theta();
        let u = wrap_2pi(theta) / self.dom.angles.dtheta;
        let f = u.floor();
        let s = u - f;
        let k0 = f.to_usize().unwrap_or(0) % nt;
        let a = sample_linear_slice(&self.dom, self.slice(k0), x);
        if s < lit(1e-12) {
            return a;
        }
        let b = sample_linear_slice(&self.dom, self.slice((k0 + 1) % nt), x);
        a * (T::one() - s) + b * s
    }

    /// Bicubic in space, band-limited trigonometric interpolation in angle.
    pub fn sample_spectral(&self, x: [T; 2], theta: T) -> Complex<T> {
        let nt = self.dom.n_theta();
        let mut acc = czero();
        for k in 0..nt {
            let w = periodic_sinc(theta - self.dom.angles.theta(k), nt);
            if w != T::zero() {
                acc = acc + self.sample_slice(x, k) * w;
            }
        }
        acc
    }

    /// Max modulus over active nodes with `|x| <= frac R`, all angles.
    pub fn max_abs_within(&self, frac: T) -> T {
        let g = &self.dom.grid;
        let r = frac * g.radius;
        let nodes: Vec<usize> = g
            .active
            .iter()
            .map(|&i| i as usize)
            .filter(|&i| norm(g.position(i)) <= r)
            .collect();
        let n2 = g.node_count();
        let mut m = T::zero();
        for k in 0..self.dom.n_theta() {
            for &i in &nodes {
                m = m.max(self.values[k * n2 + i].norm());
            }
        }
        m
    }

    pub fn max_abs(&self) -> T {
        self.max_abs_within(T::one())
    }

    /// `L^2(SM)` norm over active nodes.
    pub fn l2_norm(&self) -> T {
        let g = &self.dom.grid;
        let n2 = g.node_count();
        let dth = self.dom.angles.dtheta;
        let mut s = T::zero();
        for &i in &g.active {
            let i = i as usize;
            let w = self.dom.area_weight(i) * dth;
            for k in 0..self.dom.n_theta() {
                s = s + self.values[k * n2 + i].norm_sqr() * w;
            }
        }
        s.sqrt()
    }

    /// Fibre average `u_0(x)`.
    pub fn average(&self) -> ScalarField<T> {
        let mut out = ScalarField::zeros(&self.dom);
        let n2 = self.dom.grid.node_count();
        let nt = self.dom.n_theta();
        let inv = T::one() / from_usize::<T>(nt);
        for &i in &self.dom.grid.stored {
            let i = i as usize;
            let mut s = czero();
            for k in 0..nt {
                s = s + self.values[k * n2 + i];
            }
            out.values[i] = s * inv;
        }
        out
    }
}

impl<T: Real> FiberField<T> for BundleField<T> {
    fn domain(&self) -> &Arc<Domain<T>> {
        &self.dom
    }
    fn values(&self) -> &[Complex<T>] {
        &self.values
    }
    fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }
    fn fiber_count(&self) -> usize {
        self.dom.grid.stored.len()
    }
    fn gather(&self) -> Vec<Complex<T>> {
        let nt = self.dom.n_theta();
        let n2 = self.dom.grid.node_count();
        let st = &self.dom.grid.stored;
        let mut buf = vec![czero(); st.len() * nt];
        for k in 0..nt {
            let sl = &self.values[k * n2..(k + 1) * n2];
            for (s, &i) in st.iter().enumerate() {
                buf[s * nt + k] = sl[i as usize];
            }
        }
        buf
    }
    fn scatter(&mut self, buf: &[Complex<T>]) {
        let nt = self.dom.n_theta();
        let n2 = self.dom.grid.node_count();
        let dom = self.dom.clone();
        for k in 0..nt {
            let sl = &mut self.values[k * n2..(k + 1) * n2];
            for (s, &i) in dom.grid.stored.iter().enumerate() {
                sl[i as usize] = buf[s * nt + k];
            }
        }
    }
    fn shift_half(&self) -> Self {
        let nt = self.dom.n_theta();
        let n2 = self.dom.grid.node_count();
        let mut out = self.clone();
        for k in 0..nt {
            let src = (k + nt / 2) % nt;
            out.values[k * n2..(k + 1) * n2].copy_from_slice(&self.values[src * n2..(src + 1) * n2]);
        }
        out
    }
}

impl<T: Real> BoundaryField<T> {
    pub fn zeros(dom: &Arc<Domain<T>>) -> Self {
        Self {
            dom: dom.clone(),
            values: vec![czero(); dom.boundary.n_phi * dom.n_theta()],
        }
    }

    pub fn from_fn(dom: &Arc<Domain<T>>, f: impl Fn(BoundaryPoint<T>) -> Complex<T>) -> Self {
        let nt = dom.n_theta();
        let mut out = Self::zeros(dom);
        for j in 0..dom.boundary.n_phi {
            for k in 0..nt {
                out.values[j * nt + k] = f(dom.boundary_point(j, k));
            }
        }
        out
    }

    #[inline(always)]
    pub fn at(&self, j: usize, k: usize) -> Complex<T> {
        self.values[j * self.dom.n_theta() + k]
    }

    #[inline(always)]
    pub fn set(&mut self, j: usize, k: usize, v: Complex<T>) {
        let nt = self.dom.n_theta();
        self.values[j * nt + k] = v;
    }

    /// Zeroes the outflow part.
    pub fn restrict_inflow(&self) -> Self {
        let mut out = self.clone();
        let nt = self.dom.n_theta();
        for j in 0..self.dom.boundary.n_phi {
            for k in 0..nt {
                if !self.dom.boundary_point(j, k).is_inflow() {
                    out.values[j * nt + k] = czero();
                }
            }
        }
        out
    }

    /// Periodic bicubic interpolation in `(phi, theta)`.
    #[inline]
    pub fn sample(&self, phi: T, theta: T) -> Complex<T> {
        let np = self.dom.boundary.n_phi;
        let nt = self.dom.n_theta();
        let up = wrap_2pi(phi) / self.dom.boundary.dphi;
        let ut = wrap_2pi(theta) / self.dom.angles.dtheta;
        let (fp, ft) = (up.floor(), ut.floor());
        let (sp, st) = (up - fp, ut - ft);
        let j0 = fp.to_usize().unwrap_or(0) % np;
        let k0 = ft.to_usize().unwrap_or(0) % nt;
        let wp = cubic_weights(sp);
        let wt = cubic_weights(st);
        let mut acc = czero();
        for (a, wa) in wp.iter().enumerate() {
            let j = (j0 + np + a - 1) % np;
            let row = &self.values[j * nt..(j + 1) * nt];
            let mut r = czero();
            for (b, wb) in wt.iter().enumerate() {
                r = r + row[(k0 + nt + b - 1) % nt] * *wb;
            }
            acc = acc + r * *wa;
        }
        acc
    }

    /// Like [`BoundaryField::sample`] for data that is only meaningful on the inflow part.
    ///
    /// Angular stencil indices beyond the last inflow node of each fibre are clamped to it, so
    /// queries within one cell of the tangent direction extrapolate by a constant.
    pub fn sample_inflow(&self, phi: T, theta: T) -> Complex<T> {
        let np = self.dom.boundary.n_phi;
        let nt = self.dom.n_theta();
        let ratio = (nt / np) as isize;
        let (nti, quarter) = (nt as isize, (nt / 4) as isize);
        let up = wrap_2pi(phi) / self.dom.boundary.dphi;
        let ut = wrap_2pi(theta) / self.dom.angles.dtheta;
        let (fp, ft) = (up.floor(), ut.floor());
        let (sp, st) = (up - fp, ut - ft);
        let j0 = fp.to_usize().unwrap_or(0) % np;
        let k0 = (ft.to_usize().unwrap_or(0) % nt) as isize;
        let wp = cubic_weights(sp);
        let wt = cubic_weights(st);
        let mut acc = czero();
        for (a, wa) in wp.iter().enumerate() {
            let j = (j0 + np + a - 1) % np;
            let row = &self.values[j * nt..(j + 1) * nt];
            // index of the inward normal direction in this fibre
            let centre = j as isize * ratio + nti / 2;
            let mut r = czero();
            for (b, wb) in wt.iter().enumerate() {
                let m = (k0 + b as isize - 1 - centre).rem_euclid(nti);
                let m = if m > nti / 2 { m - nti } else { m };
                let m = m.clamp(1 - quarter, quarter - 1);
                r = r + row[(centre + m).rem_euclid(nti) as usize] * *wb;
            }
            acc = acc + r * *wa;
        }
        acc
    }

    pub fn sample_point(&self, b: &BoundaryPoint<T>) -> Complex<T> {
        self.sample(b.phi, b.theta)
    }

    /// Max modulus over inflow nodes.
    pub fn max_abs_inflow(&self) -> T {
        let nt = self.dom.n_theta();
        let mut m = T::zero();
        for j in 0..self.dom.boundary.n_phi {
            for k in 0..nt {
                if self.dom.boundary_point(j, k).is_inflow() {
                    m = m.max(self.values[j * nt + k].norm());
                }
            }
        }
        m
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// Bilinear pairing in `L^2_mu` over the inflow boundary.
    pub fn pairing_mu(&self, o: &Self) -> Complex<T> {
        let nt = self.dom.n_theta();
        let mut s = czero();
        for j in 0..self.dom.boundary.n_phi {
            for k in 0..nt {
                let w = self.dom.boundary_weight(j, k);
                if w > T::zero() {
                    s = s + self.values[j * nt + k] * o.values[j * nt + k] * w;
                }
            }
        }
        s
    }

    /// `L^2_mu` norm over the inflow boundary.
    pub fn l2_mu(&self) -> T {
        let nt = self.dom.n_theta();
        let mut s = T::zero();
        for j in 0..self.dom.boundary.n_phi {
            for k in 0..nt {
                s = s + self.values[j * nt + k].norm_sqr() * self.dom.boundary_weight(j, k);
            }
        }
        s.sqrt()
    }

    /// Fibre averages, one per boundary node.
    pub fn average(&self) -> Vec<Complex<T>> {
        let nt = self.dom.n_theta();
        let inv = T::one() / from_usize::<T>(nt);
        self.values
            .chunks(nt)
            .map(|c| c.iter().fold(czero(), |s, &v| s + v) * inv)
            .collect()
    }
}

impl<T: Real> FiberField<T> for BoundaryField<T> {
    fn domain(&self) -> &Arc<Domain<T>> {
        &self.dom
    }
    fn values(&self) -> &[Complex<T>] {
        &self.values
    }
    fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }
    fn fiber_count(&self) -> usize {
        self.dom.boundary.n_phi
    }
    fn gather(&self) -> Vec<Complex<T>> {
        self.values.clone()
    }
    fn scatter(&mut self, buf: &[Complex<T>]) {
        self.values.copy_from_slice(buf);
    }
    fn shift_half(&self) -> Self {
        let nt = self.dom.n_theta();
        let mut out = self.clone();
        for (o, i) in out.values.chunks_mut(nt).zip(self.values.chunks(nt)) {
            for k in 0..nt {
                o[k] = i[(k + nt / 2) % nt];
            }
        }
        out
    }
}
