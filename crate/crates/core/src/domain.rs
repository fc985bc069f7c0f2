//! Discretisation of the disc, its boundary and the circle fibres.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::geometry::{walk, BoundaryPoint, BundlePoint, MetricModel, TraceOptions};
use crate::scalar::{from_usize, lit, wrap_2pi, Real};

/// Sentinel for "not in this index set".
pub const NONE: u32 = u32::MAX;

/// Quadratic extrapolation `v[t] = 3 v[s0] - 3 v[s1] + v[s2]` along a grid axis.
#[derive(Clone, Copy, Debug)]
pub struct HaloRule {
    pub target: u32,
    pub src: [u32; 3],
}

/// Node-centred Cartesian grid over `[-R - m h, R + m h]^2` with `n_disc` nodes across the diameter.
#[derive(Clone, Debug)]
pub struct SpatialGrid<T> {
    pub n_disc: usize,
    pub margin: usize,
    pub n: usize,
    pub h: T,
    pub radius: T,
    pub origin: T,
    /// Nodes of the closed disc.
    pub active: Vec<u32>,
    /// Node to position in `active`, or `NONE`.
    pub active_of: Vec<u32>,
    /// Extrapolated ring outside the disc, in fill order.
    pub halo: Vec<HaloRule>,
    /// Active nodes followed by halo nodes.
    pub stored: Vec<u32>,
}

/// Width of the extrapolated ring in grid spacings.
pub const HALO_WIDTH: f64 = 4.5;
const MARGIN: usize = 6;

impl<T: Real> SpatialGrid<T> {
    pub fn new(n_disc: usize, radius: T) -> Result<Self> {
        if n_disc < 8 {
            return Err(Error::InvalidGrid(format!("need at least 8 nodes across, got {n_disc}")));
        }
        let margin = MARGIN;
        let n = n_disc + 2 * margin;
        let h = lit::<T>(2.0) * radius / from_usize::<T>(n_disc - 1);
        let origin = -radius - from_usize::<T>(margin) * h;
        let r2 = radius * radius * (T::one() + lit(1e-10));
        let halo_r = radius + lit::<T>(HALO_WIDTH) * h;
        let mut active = Vec::new();
        let mut active_of = vec![NONE; n * n];
        let mut ring = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let x = origin + from_usize::<T>(i) * h;
                let y = origin + from_usize::<T>(j) * h;
                let r = x * x + y * y;
                let idx = j * n + i;
                if r <= r2 {
                    active_of[idx] = active.len() as u32;
                    active.push(idx as u32);
                } else if r.sqrt() <= halo_r {
                    ring.push((r, idx, i, j, x, y));
                }
            }
        }
        ring.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let halo = ring
            .iter()
            .map(|&(_, idx, i, j, x, y)| {
                let (di, dj): (isize, isize) = if x.abs() >= y.abs() {
                    (if x > T::zero() { -1 } else { 1 }, 0)
                } else {
                    (0, if y > T::zero() { -1 } else { 1 })
                };
                let at = |k: isize| ((j as isize + k * dj) as usize * n + (i as isize + k * di) as usize) as u32;
                HaloRule {
                    target: idx as u32,
                    src: [at(1), at(2), at(3)],
                }
            })
            .collect::<Vec<_>>();
        let mut stored = active.clone();
        stored.extend(halo.iter().map(|r| r.target));
        Ok(Self {
            n_disc,
            margin,
            n,
            h,
            radius,
            origin,
            active,
            active_of,
            halo,
            stored,
        })
    }

    #[inline(always)]
    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    #[inline(always)]
    pub fn coord(&self, i: usize) -> T {
        self.origin + from_usize::<T>(i) * self.h
    }

    #[inline(always)]
    pub fn position(&self, idx: usize) -> [T; 2] {
        [self.coord(idx % self.n), self.coord(idx / self.n)]
    }

    /// Applies the halo rules in order to one node-indexed slice.
    pub fn fill_halo<V>(&self, v: &mut [V])
    where
        V: Copy + std::ops::Mul<T, Output = V> + std::ops::Add<Output = V> + std::ops::Sub<Output = V>,
    {
        let three = lit::<T>(3.0);
        for r in &self.halo {
            let a = v[r.src[0] as usize];
            let b = v[r.src[1] as usize];
            let c = v[r.src[2] as usize];
            v[r.target as usize] = (a - b) * three + c;
        }
    }

    /// Base index and fractional offset of the cell containing coordinate `x` along one axis.
    #[inline(always)]
    pub fn locate(&self, x: T) -> (usize, T) {
        let u = (x - self.origin) / self.h;
        let f = u.floor();
        let i = f.to_isize().unwrap_or(0).clamp(1, self.n as isize - 3) as usize;
        (i, u - from_usize::<T>(i))
    }
}

/// Equispaced nodes `phi_j = 2 pi j / n_phi` on the boundary circle.
#[derive(Clone, Debug)]
pub struct BoundaryGrid<T> {
    pub n_phi: usize,
    pub dphi: T,
    pub radius: T,
}

impl<T: Real> BoundaryGrid<T> {
    pub fn phi(&self, j: usize) -> T {
        from_usize::<T>(j) * self.dphi
    }
}

/// Equispaced fibre angles with cached FFT plans.
#[derive(Clone)]
pub struct AngularGrid<T: Real> {
    pub n: usize,
    pub dtheta: T,
    pub cos: Vec<T>,
    pub sin: Vec<T>,
    pub fwd: Arc<dyn Fft<T>>,
    pub inv: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for AngularGrid<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AngularGrid").field("n", &self.n).finish()
    }
}

impl<T: Real> AngularGrid<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("angular count must be even and >= 4, got {n}")));
        }
        let dtheta = T::TAU() / from_usize::<T>(n);
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            dtheta,
            cos: (0..n).map(|k| (from_usize::<T>(k) * dtheta).cos()).collect(),
            sin: (0..n).map(|k| (from_usize::<T>(k) * dtheta).sin()).collect(),
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    #[inline(always)]
    pub fn theta(&self, k: usize) -> T {
        from_usize::<T>(k) * self.dtheta
    }

    /// Signed frequency of FFT bin `idx`. The Nyquist bin maps to `-n/2`.
    #[inline(always)]
    pub fn freq(&self, idx: usize) -> isize {
        if idx < self.n / 2 {
            idx as isize
        } else {
            idx as isize - self.n as isize
        }
    }
}

/// User-facing discretisation parameters.
#[derive(Clone, Debug)]
pub struct DomainOptions {
    pub n_x: usize,
    pub n_theta: usize,
    /// Boundary nodes. Must divide `n_theta`. Defaults to `n_theta`.
    pub n_phi: Option<usize>,
    /// Ray step as a fraction of the grid spacing.
    pub ray_step_ratio: f64,
    /// Finite-difference step of the geodesic derivative as a fraction of the grid spacing.
    pub deriv_step_ratio: f64,
    pub tol_boundary: f64,
}

impl DomainOptions {
    pub fn new(n_x: usize, n_theta: usize) -> Self {
        Self {
            n_x,
            n_theta,
            n_phi: None,
            ray_step_ratio: 1.0,
            deriv_step_ratio: 1.0,
            tol_boundary: 1e-10,
        }
    }
}

/// Forward exit data of every active node and fibre angle, stored angle-major.
#[derive(Clone, Debug)]
pub struct ExitMap<T> {
    pub phi: Vec<T>,
    pub theta: Vec<T>,
    pub tau: Vec<T>,
}

/// Metric plus all grids. Fields hold an `Arc<Domain>`.
#[derive(Debug)]
pub struct Domain<T: Real> {
    pub metric: MetricModel<T>,
    pub grid: SpatialGrid<T>,
    pub boundary: BoundaryGrid<T>,
    pub angles: AngularGrid<T>,
    pub trace: TraceOptions<T>,
    pub deriv_step: T,
    pub options: DomainOptions,
    exit_map: OnceLock<ExitMap<T>>,
}

impl<T: Real> Domain<T> {
    pub fn new(metric: MetricModel<T>, options: DomainOptions) -> Result<Arc<Self>> {
        let radius = metric.radius();
        let grid = SpatialGrid::new(options.n_x, radius)?;
        let angles = AngularGrid::new(options.n_theta)?;
        let n_phi = options.n_phi.unwrap_or(options.n_theta);
        if n_phi == 0 || options.n_theta % n_phi != 0 {
            return Err(Error::InvalidGrid(format!(
                "boundary count {n_phi} must divide the angular count {}",
                options.n_theta
            )));
        }
        if !(options.ray_step_ratio > 0.0 && options.deriv_step_ratio > 0.0) {
            return Err(Error::InvalidGrid("step ratios must be positive".into()));
        }
        let step = grid.h * lit(options.ray_step_ratio);
        let max_steps = (64.0 * options.n_x as f64 / options.ray_step_ratio) as usize + 64;
        let trace = TraceOptions {
            step,
            tol_boundary: lit(options.tol_boundary),
            max_steps,
        };
        Ok(Arc::new(Self {
            boundary: BoundaryGrid {
                n_phi,
                dphi: T::TAU() / from_usize::<T>(n_phi),
                radius,
            },
            deriv_step: grid.h * lit(options.deriv_step_ratio),
            grid,
            angles,
            trace,
            options,
            metric,
            exit_map: OnceLock::new(),
        }))
    }

    pub fn radius(&self) -> T {
        self.metric.radius()
    }

    pub fn n_theta(&self) -> usize {
        self.angles.n
    }

    /// Boundary point of node `j` and fibre angle `k`.
    pub fn boundary_point(&self, j: usize, k: usize) -> BoundaryPoint<T> {
        BoundaryPoint {
            phi: self.boundary.phi(j),
            theta: self.angles.theta(k),
        }
    }

    /// Fibre angles at boundary node `j` that point strictly inward.
    pub fn inflow_angles(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_theta()).filter(move |&k| self.boundary_point(j, k).is_inflow())
    }

    /// Exit data for every active node, traced once and cached.
    pub fn exit_map(&self) -> Result<&ExitMap<T>> {
        if let Some(m) = self.exit_map.get() {
            return Ok(m);
        }
        let na = self.grid.active.len();
        let nt = self.n_theta();
        let per_angle: Vec<Result<Vec<(T, T, T)>>> = (0..nt)
            .into_par_iter()
            .map(|k| {
                let th = self.angles.theta(k);
                self.grid
                    .active
                    .iter()
                    .map(|&idx| {
                        let p = BundlePoint::new(self.grid.position(idx as usize), th);
                        let e = walk(&self.metric, &p, &self.trace, |_, _| {})?;
                        let b = BoundaryPoint::from_bundle(&e.exit);
                        Ok((b.phi, wrap_2pi(b.theta), e.tau))
                    })
                    .collect()
            })
            .collect();
        let mut map = ExitMap {
            phi: Vec::with_capacity(na * nt),
            theta: Vec::with_capacity(na * nt),
            tau: Vec::with_capacity(na * nt),
        };
        for r in per_angle {
            for (p, t, tau) in r? {
                map.phi.push(p);
                map.theta.push(t);
                map.tau.push(tau);
            }
        }
        Ok(self.exit_map.get_or_init(|| map))
    }

    /// Area weight `e^{2 lambda} h^2` of an active node.
    pub fn area_weight(&self, idx: usize) -> T {
        let h = self.grid.h;
        self.metric.conformal_factor(self.grid.position(idx)) * h * h
    }

    /// Boundary bundle weight `mu e^{lambda} R dphi dtheta` of an inflow node, zero otherwise.
    pub fn boundary_weight(&self, j: usize, k: usize) -> T {
        let b = self.boundary_point(j, k);
        let mu = b.mu();
        if !b.is_inflow() {
            return T::zero();
        }
        let x = b.to_bundle(self.radius()).x;
        let e = self.metric.log_conformal(x).lambda.exp();
        mu * e * self.radius() * self.boundary.dphi * self.angles.dtheta
    }
}
