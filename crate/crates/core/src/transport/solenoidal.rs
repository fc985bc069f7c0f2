//! Hodge splitting `alpha = alpha^s + dp` with `p = 0` on the boundary circle.
//!
//! In two dimensions the conformal factor drops out of the divergence of a one-form, so `p`
//! solves the flat Poisson problem `Delta p = d1 alpha_1 + d2 alpha_2`. The curved boundary is
//! handled with Shortley-Weller arms, which makes the matrix non-symmetric.

use crate::bundle::{OneFormField, ScalarField};
use crate::domain::NONE;
use crate::error::Result;
use crate::linalg::{bicgstab, Csr, SolveReport};
use crate::scalar::{czero, lit, Real};

#[derive(Clone, Debug)]
pub struct SolenoidalSplit<T: Real> {
    pub solenoidal: OneFormField<T>,
    pub potential: ScalarField<T>,
    pub report: SolveReport,
}

/// Second-order central divergence on active nodes.
pub fn divergence<T: Real>(alpha: &OneFormField<T>) -> ScalarField<T> {
    let g = &alpha.dom.grid;
    let inv2h = T::one() / (lit::<T>(2.0) * g.h);
    let mut out = ScalarField::zeros(&alpha.dom);
    for &i in &g.active {
        let i = i as usize;
        out.values[i] = (alpha.comps[0][i + 1] - alpha.comps[0][i - 1] + alpha.comps[1][i + g.n]
            - alpha.comps[1][i - g.n])
            * inv2h;
    }
    out
}

/// Second-order central gradient on active nodes, halo refilled.
pub fn central_gradient<T: Real>(p: &ScalarField<T>) -> OneFormField<T> {
    let g = &p.dom.grid;
    let inv2h = T::one() / (lit::<T>(2.0) * g.h);
    let mut out = OneFormField::zeros(&p.dom);
    for &i in &g.active {
        let i = i as usize;
        out.comps[0][i] = (p.values[i + 1] - p.values[i - 1]) * inv2h;
        out.comps[1][i] = (p.values[i + g.n] - p.values[i - g.n]) * inv2h;
    }
    out.fill_halo();
    out
}

/// Dirichlet Laplacian on interior nodes with Shortley-Weller boundary arms.
pub struct DirichletLaplacian<T> {
    pub matrix: Csr<T>,
    /// Grid node of each unknown.
    pub nodes: Vec<usize>,
}

impl<T: Real> DirichletLaplacian<T> {
    pub fn new(dom: &crate::domain::Domain<T>) -> Self {
        let g = &dom.grid;
        let r = g.radius;
        let r2 = r * r;
        let h = g.h;
        let interior = |idx: usize| -> bool {
            if g.active_of[idx] == NONE {
                return false;
            }
            let x = g.position(idx);
            x[0] * x[0] + x[1] * x[1] < r2 * (T::one() - lit(1e-9))
        };
        let nodes: Vec<usize> = g.active.iter().map(|&i| i as usize).filter(|&i| interior(i)).collect();
        let mut unk = vec![NONE; g.node_count()];
        for (u, &i) in nodes.iter().enumerate() {
            unk[i] = u as u32;
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for &i in &nodes {
            let x = g.position(i);
            let mut diag = T::zero();
            let mut entries: Vec<(usize, T)> = Vec::with_capacity(5);
            for (axis, stride) in [(0usize, 1isize), (1, g.n as isize)] {
                let mut arms = [h, h];
                let mut nbs = [NONE; 2];
                for (side, sgn) in [(0usize, -1isize), (1, 1)] {
                    let nb = (i as isize + sgn * stride) as usize;
                    if unk[nb] != NONE {
                        nbs[side] = unk[nb];
                    } else {
                        let e = T::from_isize(sgn).unwrap();
                        let xe = x[axis] * e;
                        let disc = r2 - (x[0] * x[0] + x[1] * x[1]) + xe * xe;
                        let s = -xe + disc.max(T::zero()).sqrt();
                        arms[side] = s.min(h).max(h * lit(1e-6));
                    }
                }
                let (al, ar) = (arms[0], arms[1]);
                let c = lit::<T>(2.0) / (al + ar);
                diag = diag - c * (T::one() / al + T::one() / ar);
                if nbs[0] != NONE {
                    entries.push((nbs[0] as usize, c / al));
                }
                if nbs[1] != NONE {
                    entries.push((nbs[1] as usize, c / ar));
                }
            }
            entries.push((unk[i] as usize, diag));
            entries.sort_by_key(|e| e.0);
            for (c, v) in entries {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            matrix: Csr {
                n: nodes.len(),
                row_ptr,
                cols,
                vals,
            },
            nodes,
        }
    }

    /// Solves `Delta p = rhs`, `p = 0` on the circle. Real and imaginary parts are solved separately.
    pub fn solve(&self, rhs: &ScalarField<T>, tol: T, max_iter: usize) -> Result<(ScalarField<T>, SolveReport)> {
        let mut p = ScalarField::zeros(&rhs.dom);
        let mut report = SolveReport {
            converged: true,
            ..Default::default()
        };
        for part in 0..2 {
            let b: Vec<T> = self
                .nodes
                .iter()
                .map(|&i| if part == 0 { rhs.values[i].re } else { rhs.values[i].im })
                .collect();
            let (x, rep) = bicgstab(&self.matrix, &b, tol, max_iter)?;
            report.iterations = report.iterations.max(rep.iterations);
            report.relative_residual = report.relative_residual.max(rep.relative_residual);
            for (&i, v) in self.nodes.iter().zip(x) {
                if part == 0 {
                    p.values[i].re = v;
                } else {
                    p.values[i].im = v;
                }
            }
        }
        p.fill_halo();
        Ok((p, report))
    }
}

/// Splits `alpha` into a divergence-free part and `dp` with `p = 0` on the boundary.
pub fn solenoidal_decompose<T: Real>(alpha: &OneFormField<T>, tol: T, max_iter: usize) -> Result<SolenoidalSplit<T>> {
    let lap = DirichletLaplacian::new(&alpha.dom);
    let div = divergence(alpha);
    let (p, report) = lap.solve(&div, tol, max_iter)?;
    let dp = central_gradient(&p);
    let mut s = alpha.clone();
    for c in 0..2 {
        for (a, d) in s.comps[c].iter_mut().zip(&dp.comps[c]) {
            *a = *a - *d;
        }
    }
    s.fill_halo();
    Ok(SolenoidalSplit {
        solenoidal: s,
        potential: p,
        report,
    })
}

/// `*dq`: the one-form with components `(-d2 q, d1 q)`, using central differences.
pub fn star_d<T: Real>(q: &ScalarField<T>) -> OneFormField<T> {
    let d = central_gradient(q);
    let mut out = OneFormField::zeros(&q.dom);
    for i in 0..out.comps[0].len() {
        out.comps[0][i] = czero::<T>() - d.comps[1][i];
        out.comps[1][i] = d.comps[0][i];
    }
    out
}

