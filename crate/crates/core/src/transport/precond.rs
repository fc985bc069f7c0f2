//! Spectral right preconditioner for the pair problem.
//!
//! The transform smooths functions by half a derivative and roughens `q` by half a derivative.
//! Each block is multiplied by `c (1 + |k L|^2)^{+-1/4}` on a zero-padded grid, which is
//! symmetric and positive definite on the unknown space.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::linalg::LinearMap;
use crate::scalar::{czero, from_usize, lit, Complex, Real};
use crate::transport::pairs::PairOperator;

pub struct PairPreconditioner<T: Real> {
    nodes: Vec<u32>,
    n: usize,
    pad: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    /// Multipliers of the `f` and `q` blocks in FFT bin order, row-major.
    sym: [Vec<T>; 2],
}

impl<T: Real> PairPreconditioner<T> {
    pub fn new(op: &PairOperator<T>) -> Self {
        let g = &op.lattice;
        let n = g.n;
        let pad = 2 * n;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(pad);
        let inv = planner.plan_fft_inverse(pad);
        let len = lit::<T>(0.5) * op.dom.radius();
        let dk = lit::<T>(2.0) * T::PI() / (from_usize::<T>(pad) * g.h);
        let freq = |i: usize| {
            let m = if i <= pad / 2 { i as f64 } else { i as f64 - pad as f64 };
            lit::<T>(m) * dk
        };
        let norm = T::one() / from_usize::<T>(pad * pad);
        let mut sym = [vec![T::zero(); pad * pad], vec![T::zero(); pad * pad]];
        for j in 0..pad {
            for i in 0..pad {
                let k2 = (freq(i) * freq(i) + freq(j) * freq(j)) * len * len;
                let s = (T::one() + k2).powf(lit(0.25));
                sym[0][j * pad + i] = s * norm;
                sym[1][j * pad + i] = norm / s;
            }
        }
        let mut p = Self {
            nodes: op.nodes.clone(),
            n,
            pad,
            fwd,
            inv,
            sym,
        };
        p.balance(op);
        p
    }

    /// Rescales each block so that `A P` has comparable gain on both.
    fn balance(&mut self, op: &PairOperator<T>) {
        let m = self.nodes.len();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            lit::<T>((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        };
        let z: Vec<Complex<T>> = (0..m).map(|_| Complex::new(rnd(), T::zero())).collect();
        for b in 0..2 {
            let mut x = vec![czero(); 2 * m];
            x[b * m..(b + 1) * m].copy_from_slice(&z);
            let mut px = vec![czero(); 2 * m];
            self.apply(&x, &mut px);
            let mut y = vec![czero(); op.rows()];
            op.apply(&px, &mut y);
            let gain = (y.iter().map(|v| v.norm_sqr()).fold(T::zero(), |s, v| s + v)
                / z.iter().map(|v| v.norm_sqr()).fold(T::zero(), |s, v| s + v))
            .sqrt();
            if gain > T::zero() {
                for s in self.sym[b].iter_mut() {
                    *s = *s / gain;
                }
            }
        }
    }

    fn filter(&self, vals: &[Complex<T>], sym: &[T], out: &mut [Complex<T>]) {
        let (n, pad) = (self.n, self.pad);
        let mut grid = vec![czero(); pad * pad];
        for (u, &i) in self.nodes.iter().enumerate() {
            let i = i as usize;
            grid[(i / n) * pad + i % n] = vals[u];
        }
        let mut scratch = vec![czero(); self.fwd.get_inplace_scratch_len().max(self.inv.get_inplace_scratch_len())];
        let mut col = vec![czero(); pad];
        let transform = |grid: &mut [Complex<T>], f: &Arc<dyn Fft<T>>, scratch: &mut [Complex<T>], col: &mut [Complex<T>]| {
            for row in grid.chunks_mut(pad) {
                f.process_with_scratch(row, scratch);
            }
            for i in 0..pad {
                for j in 0..pad {
                    col[j] = grid[j * pad + i];
                }
                f.process_with_scratch(col, scratch);
                for j in 0..pad {
                    grid[j * pad + i] = col[j];
                }
            }
        };
        transform(&mut grid, &self.fwd, &mut scratch, &mut col);
        for (g, s) in grid.iter_mut().zip(sym) {
            *g = *g * *s;
        }
        transform(&mut grid, &self.inv, &mut scratch, &mut col);
        for (u, &i) in self.nodes.iter().enumerate() {
            let i = i as usize;
            out[u] = grid[(i / n) * pad + i % n];
        }
    }
}

impl<T: Real> LinearMap<T> for PairPreconditioner<T> {
    fn rows(&self) -> usize {
        2 * self.nodes.len()
    }
    fn cols(&self) -> usize {
        2 * self.nodes.len()
    }
    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        let m = self.nodes.len();
        let (yf, yq) = y.split_at_mut(m);
        self.filter(&x[..m], &self.sym[0], yf);
        self.filter(&x[m..], &self.sym[1], yq);
    }
    fn apply_adjoint(&self, y: &[Complex<T>], x: &mut [Complex<T>]) {
        self.apply(y, x);
    }
}
