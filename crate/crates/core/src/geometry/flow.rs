//! Unit-speed geodesic flow on the unit circle bundle, parametrised by `(x1, x2, theta)`.
//!
//! With `xi = e^{-lambda} (cos theta, sin theta)` the flow reads
//! `x' = e^{-lambda} (cos theta, sin theta)` and
//! `theta' = e^{-lambda} (-sin theta d1 lambda + cos theta d2 lambda)`.

use crate::error::{Error, Result};
use crate::geometry::metric::{MetricKind, MetricModel};
use crate::scalar::{lit, to_f64, wrap_2pi, wrap_pi, Real};

/// Point `(x, xi)` of the unit circle bundle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BundlePoint<T> {
    pub x: [T; 2],
    pub theta: T,
}

impl<T: Real> BundlePoint<T> {
    pub fn new(x: [T; 2], theta: T) -> Self {
        Self { x, theta }
    }

    pub fn reversed(self) -> Self {
        Self {
            x: self.x,
            theta: wrap_2pi(self.theta + T::PI()),
        }
    }
}

/// Point of the boundary bundle: boundary angle `phi` and chart direction `theta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint<T> {
    pub phi: T,
    pub theta: T,
}

impl<T: Real> BoundaryPoint<T> {
    /// Inflow point with direction at angle `psi` from the inward normal.
    pub fn from_inflow(phi: T, psi: T) -> Self {
        Self {
            phi: wrap_2pi(phi),
            theta: wrap_2pi(phi + T::PI() + psi),
        }
    }

    /// Angle of the direction measured from the inward normal, in `(-pi, pi]`.
    pub fn psi(&self) -> T {
        wrap_pi(self.theta - self.phi - T::PI())
    }

    /// Santalo weight `mu = <nu, xi>` with `nu` the inward unit normal.
    pub fn mu(&self) -> T {
        -(self.theta - self.phi).cos()
    }

    /// Strictly inward pointing. Tangent directions count as outflow.
    pub fn is_inflow(&self) -> bool {
        self.mu() > lit(1e-12)
    }

    pub fn to_bundle(&self, radius: T) -> BundlePoint<T> {
        BundlePoint {
            x: [radius * self.phi.cos(), radius * self.phi.sin()],
            theta: self.theta,
        }
    }

    pub fn from_bundle(p: &BundlePoint<T>) -> Self {
        Self {
            phi: wrap_2pi(p.x[1].atan2(p.x[0])),
            theta: wrap_2pi(p.theta),
        }
    }
}

/// Step control for traces.
#[derive(Clone, Copy, Debug)]
pub struct TraceOptions<T> {
    pub step: T,
    pub tol_boundary: T,
    pub max_steps: usize,
}

impl<T: Real> TraceOptions<T> {
    pub fn new(step: T) -> Self {
        Self {
            step,
            tol_boundary: lit(1e-10),
            max_steps: 1_000_000,
        }
    }
}

/// End of a forward trace.
#[derive(Clone, Copy, Debug)]
pub struct ExitInfo<T> {
    pub tau: T,
    pub exit: BundlePoint<T>,
    pub steps: usize,
}

/// Sampled geodesic: times and bundle points, ending on the boundary.
#[derive(Clone, Debug)]
pub struct GeodesicTrace<T> {
    pub times: Vec<T>,
    pub points: Vec<BundlePoint<T>>,
}

/// Flow vector field on the lifted state `(x1, x2, theta, sin theta, cos theta)`.
#[inline(always)]
fn rhs<T: Real>(m: &MetricModel<T>, x: [T; 2], s: T, c: T) -> [T; 5] {
    let (e, g) = m.flow_coeffs(x);
    let w = c * g[1] - s * g[0];
    [e * c, e * s, w, w * c, -w * s]
}

/// Integrator state: position, angle and the angle's sine and cosine.
#[derive(Clone, Copy, Debug)]
struct State<T> {
    x: [T; 2],
    th: T,
    s: T,
    c: T,
}

impl<T: Real> State<T> {
    fn new(p: &BundlePoint<T>) -> Self {
        let (s, c) = p.theta.sin_cos();
        Self { x: p.x, th: p.theta, s, c }
    }

    fn point(&self) -> BundlePoint<T> {
        BundlePoint { x: self.x, theta: self.th }
    }
}

#[inline]
fn step_state<T: Real>(m: &MetricModel<T>, p: &State<T>, h: T) -> State<T> {
    if m.kind() == MetricKind::Euclidean {
        return State {
            x: [p.x[0] + h * p.c, p.x[1] + h * p.s],
            ..*p
        };
    }
    let half = lit::<T>(0.5) * h;
    let at = |k: &[T; 5], a: T| ([p.x[0] + a * k[0], p.x[1] + a * k[1]], p.s + a * k[3], p.c + a * k[4]);
    let k1 = rhs(m, p.x, p.s, p.c);
    let (x2, s2, c2) = at(&k1, half);
    let k2 = rhs(m, x2, s2, c2);
    let (x3, s3, c3) = at(&k2, half);
    let k3 = rhs(m, x3, s3, c3);
    let (x4, s4, c4) = at(&k3, h);
    let k4 = rhs(m, x4, s4, c4);
    let w = h / lit(6.0);
    let two = lit::<T>(2.0);
    let comb = |i: usize| w * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
    State {
        x: [p.x[0] + comb(0), p.x[1] + comb(1)],
        th: p.th + comb(2),
        s: p.s + comb(3),
        c: p.c + comb(4),
    }
}

/// One classical RK4 step of signed length `h`. No domain check.
#[inline]
pub fn flow_step<T: Real>(m: &MetricModel<T>, p: &BundlePoint<T>, h: T) -> BundlePoint<T> {
    step_state(m, &State::new(p), h).point()
}

/// Chart velocity of the flow at `p`.
#[inline]
pub fn velocity<T: Real>(m: &MetricModel<T>, p: &BundlePoint<T>) -> [T; 2] {
    let (s, c) = p.theta.sin_cos();
    state_velocity(m, &State { x: p.x, th: p.theta, s, c })
}

#[inline]
fn state_velocity<T: Real>(m: &MetricModel<T>, p: &State<T>) -> [T; 2] {
    let (e, _) = m.flow_coeffs(p.x);
    [e * p.c, e * p.s]
}

#[inline]
fn norm2<T: Real>(x: [T; 2]) -> T {
    x[0] * x[0] + x[1] * x[1]
}

fn boundary_slack<T: Real>(r2: T) -> T {
    r2 * (lit::<T>(1e-12)).max(T::epsilon() * lit(16.0))
}

/// Root of `|x(s)|^2 = R^2` for the RK4 step from `p`, with the root in `(0, h]`.
///
/// When `from_boundary` is set `p` lies on the circle and the quotient `(|x(s)|^2 - R^2) / s`
/// is used so the trivial root at `s = 0` is excluded.
fn locate_exit<T: Real>(m: &MetricModel<T>, p: &State<T>, h: T, from_boundary: bool, tol: T) -> T {
    let r2 = m.radius() * m.radius();
    let two = lit::<T>(2.0);
    if m.kind() == MetricKind::Euclidean {
        let xe = p.x[0] * p.c + p.x[1] * p.s;
        let disc = (r2 - norm2(p.x) + xe * xe).max(T::zero());
        let s = if from_boundary { -two * xe } else { -xe + disc.sqrt() };
        return s.max(T::zero()).min(h);
    }
    let g = |s: T| -> (T, T) {
        let q = step_state(m, p, s);
        let v = state_velocity(m, &q);
        let val = norm2(q.x) - r2;
        let der = two * (q.x[0] * v[0] + q.x[1] * v[1]);
        if from_boundary {
            (val / s, (der * s - val) / (s * s))
        } else {
            (val, der)
        }
    };
    let tol = tol.max(T::epsilon() * lit(64.0) * h);
    let mut lo = T::zero();
    let mut hi = h;
    let (mut s, ghi) = {
        let glo = if from_boundary {
            let v = state_velocity(m, p);
            two * (p.x[0] * v[0] + p.x[1] * v[1])
        } else {
            norm2(p.x) - r2
        };
        let (ghi, _) = g(h);
        if ghi <= glo {
            (lit::<T>(0.5) * h, ghi)
        } else {
            ((glo / (glo - ghi)) * h, ghi)
        }
    };
    if ghi <= T::zero() {
        return h;
    }
    for _ in 0..100 {
        if !(s > lo && s < hi) {
            s = lit::<T>(0.5) * (lo + hi);
        }
        let (gs, ds) = g(s);
        if gs > T::zero() {
            hi = s;
        } else {
            lo = s;
        }
        let mut next = if ds > T::zero() { s - gs / ds } else { lit::<T>(0.5) * (lo + hi) };
        if !(next > lo && next < hi) {
            next = lit::<T>(0.5) * (lo + hi);
        }
        if (next - s).abs() <= tol || hi - lo <= tol {
            return next.max(lo).min(hi);
        }
        s = next;
    }
    lit::<T>(0.5) * (lo + hi)
}

/// Walks the geodesic from `start` until it leaves the disc, calling `visit(t, point)` at
/// `t = 0, h, 2h, ...` and finally at the exit time `tau`.
pub fn walk<T: Real, F: FnMut(T, &BundlePoint<T>)>(
    m: &MetricModel<T>,
    start: &BundlePoint<T>,
    opts: &TraceOptions<T>,
    mut visit: F,
) -> Result<ExitInfo<T>> {
    let r2 = m.radius() * m.radius();
    let n0 = norm2(start.x);
    let slack = boundary_slack(r2);
    if n0 > r2 + slack {
        return Err(Error::OutsideDomain {
            x: to_f64(start.x[0]),
            y: to_f64(start.x[1]),
        });
    }
    let on_boundary = n0 >= r2 - slack;
    if on_boundary {
        let v = velocity(m, start);
        if start.x[0] * v[0] + start.x[1] * v[1] >= T::zero() {
            visit(T::zero(), start);
            return Ok(ExitInfo {
                tau: T::zero(),
                exit: *start,
                steps: 0,
            });
        }
    }
    let h = opts.step;
    let mut p = State::new(start);
    let mut t = T::zero();
    visit(t, start);
    let mut steps = 0usize;
    loop {
        if steps >= opts.max_steps {
            return Err(Error::TrapBudgetExceeded { steps });
        }
        let q = step_state(m, &p, h);
        if norm2(q.x) > r2 {
            let s = locate_exit(m, &p, h, on_boundary && steps == 0, opts.tol_boundary);
            let mut e = step_state(m, &p, s).point();
            let scale = m.radius() / norm2(e.x).sqrt();
            e.x = [e.x[0] * scale, e.x[1] * scale];
            visit(t + s, &e);
            return Ok(ExitInfo {
                tau: t + s,
                exit: e,
                steps: steps + 1,
            });
        }
        steps += 1;
        t = t + h;
        p = q;
        visit(t, &p.point());
    }
}

/// Exit time `tau(x, xi)`.
pub fn exit_time<T: Real>(m: &MetricModel<T>, p: &BundlePoint<T>, opts: &TraceOptions<T>) -> Result<T> {
    walk(m, p, opts, |_, _| {}).map(|e| e.tau)
}

/// Full forward trace up to the boundary.
pub fn trace<T: Real>(m: &MetricModel<T>, p: &BundlePoint<T>, opts: &TraceOptions<T>) -> Result<GeodesicTrace<T>> {
    let mut times = Vec::new();
    let mut points = Vec::new();
    walk(m, p, opts, |t, q| {
        times.push(t);
        points.push(*q);
    })?;
    Ok(GeodesicTrace { times, points })
}

/// Flow for signed time `t`, failing if the geodesic leaves the disc first.
pub fn flow<T: Real>(m: &MetricModel<T>, p: &BundlePoint<T>, t: T, opts: &TraceOptions<T>) -> Result<BundlePoint<T>> {
    let r2 = m.radius() * m.radius();
    let slack = boundary_slack(r2);
    if norm2(p.x) > r2 + slack {
        return Err(Error::OutsideDomain {
            x: to_f64(p.x[0]),
            y: to_f64(p.x[1]),
        });
    }
    let n = (t.abs() / opts.step).ceil().to_usize().unwrap_or(0).max(1);
    let h = t / T::from_usize(n).unwrap();
    let mut q = *p;
    for i in 0..n {
        let next = flow_step(m, &q, h);
        if norm2(next.x) > r2 + slack {
            let lo = h.abs() * T::from_usize(i).unwrap();
            return Err(Error::ExitedDomain {
                t_lo: to_f64(lo),
                t_hi: to_f64(lo + h.abs()),
            });
        }
        q = next;
    }
    q.theta = wrap_2pi(q.theta);
    Ok(q)
}

/// Exit point of the geodesic through a boundary point, as a boundary point.
///
/// Inflow points flow forward to the outflow boundary. Outflow points flow backward to the
/// inflow boundary, so applying the map twice returns the input.
pub fn scattering<T: Real>(m: &MetricModel<T>, b: &BoundaryPoint<T>, opts: &TraceOptions<T>) -> Result<BoundaryPoint<T>> {
    let p = b.to_bundle(m.radius());
    if b.is_inflow() {
        let e = walk(m, &p, opts, |_, _| {})?;
        Ok(BoundaryPoint::from_bundle(&e.exit))
    } else {
        let e = walk(m, &p.reversed(), opts, |_, _| {})?;
        Ok(BoundaryPoint::from_bundle(&e.exit.reversed()))
    }
}

/// Scattering relation in inflow coordinates: returns the exit point and exit direction.
pub fn scattering_inflow<T: Real>(m: &MetricModel<T>, phi: T, psi: T, opts: &TraceOptions<T>) -> Result<BoundaryPoint<T>> {
    scattering(m, &BoundaryPoint::from_inflow(phi, psi), opts)
}

/// `tau_-`: half the chord on the inflow boundary, minus half the backward chord on the outflow boundary.
pub fn tau_minus<T: Real>(m: &MetricModel<T>, b: &BoundaryPoint<T>, opts: &TraceOptions<T>) -> Result<T> {
    let p = b.to_bundle(m.radius());
    let half = lit::<T>(0.5);
    if b.is_inflow() {
        Ok(half * exit_time(m, &p, opts)?)
    } else {
        Ok(-half * exit_time(m, &p.reversed(), opts)?)
    }
}

/// Santalo weight `cos psi` of an inflow direction.
pub fn santalo_weight<T: Real>(psi: T) -> T {
    psi.cos()
}
