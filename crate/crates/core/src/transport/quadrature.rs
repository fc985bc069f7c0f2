//! Quadrature along sampled geodesics.
//!
//! Samples sit at `t = 0, h, 2h, ...` plus the exit time. Each interval is integrated exactly
//! against the cubic through four neighbouring samples, using two-point Gauss-Legendre.

use crate::scalar::{czero, lit, Complex, Real};

/// Reusable sample buffers for one trace.
#[derive(Default)]
pub struct TraceSamples<T: Real> {
    pub t: Vec<T>,
    pub f: Vec<Complex<T>>,
    pub a: Vec<Complex<T>>,
    cum: Vec<Complex<T>>,
    w: Vec<T>,
}

impl<T: Real> TraceSamples<T> {
    pub fn new() -> Self {
        Self {
            t: Vec::with_capacity(256),
            f: Vec::with_capacity(256),
            a: Vec::with_capacity(256),
            cum: Vec::with_capacity(256),
            w: Vec::with_capacity(256),
        }
    }

    pub fn clear(&mut self) {
        self.t.clear();
        self.f.clear();
        self.a.clear();
    }

    /// Drops the last uniform sample when the exit follows it by less than a quarter step.
    pub fn prune_tail(&mut self) {
        let m = self.t.len();
        if m >= 3 {
            let h = self.t[1] - self.t[0];
            if self.t[m - 1] - self.t[m - 2] < lit::<T>(0.25) * h {
                self.t.remove(m - 2);
                if self.f.len() == m {
                    self.f.remove(m - 2);
                }
                if self.a.len() == m {
                    self.a.remove(m - 2);
                }
            }
        }
    }

    /// `int F dt` from the samples in `f`.
    pub fn integral(&mut self) -> Complex<T> {
        self.prune_tail();
        weights(&self.t, &mut self.w);
        self.w.iter().zip(&self.f).fold(czero(), |s, (w, f)| s + *f * *w)
    }

    /// `int F exp(int_0^t a) dt` from the samples in `f` and `a`.
    pub fn attenuated_integral(&mut self) -> Complex<T> {
        self.prune_tail();
        cumulative(&self.t, &self.a, &mut self.cum);
        weights(&self.t, &mut self.w);
        self.w
            .iter()
            .zip(&self.f)
            .zip(&self.cum)
            .fold(czero(), |s, ((w, f), c)| s + *f * c.exp() * *w)
    }
}

/// Stencil start and weights for the interval `[t_i, t_{i+1}]`.
#[inline]
fn interval<T: Real>(t: &[T], i: usize) -> (usize, [T; 4], usize) {
    let m = t.len();
    if m == 2 {
        let hh = lit::<T>(0.5) * (t[1] - t[0]);
        return (0, [hh, hh, T::zero(), T::zero()], 2);
    }
    let (start, len) = if m == 3 {
        (0, 3)
    } else if i == 0 {
        (0, 4)
    } else if i + 2 >= m {
        (m - 4, 4)
    } else {
        (i - 1, 4)
    };
    let (a, b) = (t[i], t[i + 1]);
    let half = lit::<T>(0.5) * (b - a);
    let mid = lit::<T>(0.5) * (a + b);
    let off = half / lit::<T>(3.0).sqrt();
    let nodes = &t[start..start + len];
    let mut w = [T::zero(); 4];
    for g in [mid - off, mid + off] {
        for j in 0..len {
            let mut l = T::one();
            for k in 0..len {
                if k != j {
                    l = l * (g - nodes[k]) / (nodes[j] - nodes[k]);
                }
            }
            w[j] = w[j] + half * l;
        }
    }
    (start, w, len)
}

/// Weights `w_i` with `int F dt ~ sum w_i F(t_i)`.
pub fn weights<T: Real>(t: &[T], w: &mut Vec<T>) {
    let m = t.len();
    w.clear();
    w.resize(m, T::zero());
    if m < 2 {
        return;
    }
    let h = t[1] - t[0];
    let u = [-h / lit(24.0), h * lit(13.0 / 24.0), h * lit(13.0 / 24.0), -h / lit(24.0)];
    for i in 0..m - 1 {
        // Interior intervals have a uniform four-point stencil that excludes the exit sample.
        if m >= 4 && i >= 1 && i + 3 < m {
            for j in 0..4 {
                w[i - 1 + j] = w[i - 1 + j] + u[j];
            }
        } else {
            let (s, iw, len) = interval(t, i);
            for j in 0..len {
                w[s + j] = w[s + j] + iw[j];
            }
        }
    }
}

/// Running integrals `c_i = int_0^{t_i} F dt`.
pub fn cumulative<T: Real>(t: &[T], f: &[Complex<T>], c: &mut Vec<Complex<T>>) {
    let m = t.len();
    c.clear();
    c.resize(m, czero());
    if m < 2 {
        return;
    }
    let h = t[1] - t[0];
    let u = [-h / lit(24.0), h * lit(13.0 / 24.0), h * lit(13.0 / 24.0), -h / lit(24.0)];
    for i in 0..m - 1 {
        let inc = if m >= 4 && i >= 1 && i + 3 < m {
            f[i - 1] * u[0] + f[i] * u[1] + f[i + 1] * u[2] + f[i + 2] * u[3]
        } else {
            let (s, iw, len) = interval(t, i);
            (0..len).fold(czero(), |acc, j| acc + f[s + j] * iw[j])
        };
        c[i + 1] = c[i] + inc;
    }
}
