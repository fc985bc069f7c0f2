//! Conformal metrics `g = e^{2 lambda} |dx|^2` on the chart disc `|x| <= R`.
//!
//! Constant curvature uses `e^{2 lambda} = 1 / (1 + kappa |x|^2 / 4)^2`, which is the
//! stereographic model of curvature `kappa` with unit factor at the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    ConstantCurvature,
    Perturbed,
}

/// One Gaussian lobe of the perturbation bump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpComponent {
    pub center: [f64; 2],
    pub sigma: f64,
    pub amplitude: f64,
}

/// Serializable metric description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub kind: MetricKind,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub bump_spec: Vec<BumpComponent>,
}

fn default_radius() -> f64 {
    1.0
}

/// Largest admissible `|epsilon| * max|bump|` for perturbed metrics.
pub const MAX_PERTURBATION: f64 = 0.25;

#[derive(Clone, Debug)]
struct Lobe<T> {
    c: [T; 2],
    inv_two_s2: T,
    amp: T,
}

/// Log-conformal factor and its chart gradient at a point.
#[derive(Clone, Copy, Debug)]
pub struct LogConformal<T> {
    pub lambda: T,
    pub grad: [T; 2],
}

#[derive(Clone, Debug)]
pub struct MetricModel<T> {
    kind: MetricKind,
    kappa: T,
    radius: T,
    epsilon: T,
    lobes: Vec<Lobe<T>>,
    spec: MetricSpec,
}

impl<T: Real> MetricModel<T> {
    pub fn euclidean(radius: f64) -> Result<Self> {
        Self::from_spec(&MetricSpec {
            kind: MetricKind::Euclidean,
            kappa: 0.0,
            radius,
            epsilon: 0.0,
            bump_spec: vec![],
        })
    }

    pub fn constant_curvature(kappa: f64, radius: f64) -> Result<Self> {
        Self::from_spec(&MetricSpec {
            kind: MetricKind::ConstantCurvature,
            kappa,
            radius,
            epsilon: 0.0,
            bump_spec: vec![],
        })
    }

    pub fn perturbed(kappa: f64, epsilon: f64, bump: Vec<BumpComponent>, radius: f64) -> Result<Self> {
        Self::from_spec(&MetricSpec {
            kind: MetricKind::Perturbed,
            kappa,
            radius,
            epsilon,
            bump_spec: bump,
        })
    }

    pub fn from_spec(spec: &MetricSpec) -> Result<Self> {
        let r = spec.radius;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidMetric(format!("radius must be positive, got {r}")));
        }
        let kappa = match spec.kind {
            MetricKind::Euclidean => 0.0,
            _ => spec.kappa,
        };
        if !kappa.is_finite() {
            return Err(Error::InvalidMetric("kappa must be finite".into()));
        }
        // Positive curvature: stay well inside a hemisphere so the disc is simple.
        if kappa > 0.0 && kappa * r * r >= 1.0 {
            return Err(Error::InvalidMetric(format!(
                "kappa * R^2 = {} must be below 1 for positive curvature",
                kappa * r * r
            )));
        }
        // Negative curvature: the chart factor must stay finite on the closed disc.
        if kappa < 0.0 && -kappa * r * r >= 4.0 {
            return Err(Error::InvalidMetric(format!(
                "|kappa| * R^2 = {} must be below 4 for negative curvature",
                -kappa * r * r
            )));
        }
        let (epsilon, lobes) = match spec.kind {
            MetricKind::Perturbed => {
                if spec.bump_spec.is_empty() {
                    return Err(Error::InvalidMetric("perturbed metric needs a bump_spec".into()));
                }
                for b in &spec.bump_spec {
                    if !(b.sigma > 0.0) {
                        return Err(Error::InvalidMetric("bump sigma must be positive".into()));
                    }
                }
                let peak: f64 = spec.bump_spec.iter().map(|b| b.amplitude.abs()).sum();
                if spec.epsilon.abs() * peak > MAX_PERTURBATION {
                    return Err(Error::InvalidMetric(format!(
                        "|epsilon| * sum|amplitude| = {} exceeds the cap {MAX_PERTURBATION}",
                        spec.epsilon.abs() * peak
                    )));
                }
                let lobes = spec
                    .bump_spec
                    .iter()
                    .map(|b| Lobe {
                        c: [lit(b.center[0]), lit(b.center[1])],
                        inv_two_s2: lit(0.5 / (b.sigma * b.sigma)),
                        amp: lit(b.amplitude),
                    })
                    .collect();
                (spec.epsilon, lobes)
            }
            _ => (0.0, vec![]),
        };
        let mut spec = spec.clone();
        spec.kappa = kappa;
        if spec.kind != MetricKind::Perturbed {
            spec.epsilon = 0.0;
            spec.bump_spec.clear();
        }
        Ok(Self {
            kind: spec.kind,
            kappa: lit(kappa),
            radius: lit(r),
            epsilon: lit(epsilon),
            lobes,
            spec,
        })
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    /// True when the curvature is constant, in which case the operator `W` vanishes.
    pub fn is_constant_curvature(&self) -> bool {
        self.kind != MetricKind::Perturbed
    }

    /// Bump `b(x)`, cut off so that value and gradient vanish on the boundary circle.
    fn bump(&self, x: [T; 2]) -> (T, [T; 2]) {
        let r2 = self.radius * self.radius;
        let s = T::one() - (x[0] * x[0] + x[1] * x[1]) / r2;
        let cut = s * s;
        let two = lit::<T>(2.0);
        let dcut = [-two * two * s * x[0] / r2, -two * two * s * x[1] / r2];
        let mut g = T::zero();
        let mut dg = [T::zero(); 2];
        for l in &self.lobes {
            let d0 = x[0] - l.c[0];
            let d1 = x[1] - l.c[1];
            let e = l.amp * (-(d0 * d0 + d1 * d1) * l.inv_two_s2).exp();
            g = g + e;
            dg[0] = dg[0] - two * l.inv_two_s2 * d0 * e;
            dg[1] = dg[1] - two * l.inv_two_s2 * d1 * e;
        }
        (g * cut, [dg[0] * cut + g * dcut[0], dg[1] * cut + g * dcut[1]])
    }

    /// `lambda(x)` and its gradient.
    #[inline]
    pub fn log_conformal(&self, x: [T; 2]) -> LogConformal<T> {
        match self.kind {
            MetricKind::Euclidean => LogConformal {
                lambda: T::zero(),
                grad: [T::zero(); 2],
            },
            MetricKind::ConstantCurvature | MetricKind::Perturbed => {
                let q = lit::<T>(0.25) * self.kappa;
                let den = T::one() + q * (x[0] * x[0] + x[1] * x[1]);
                let k = -lit::<T>(2.0) * q / den;
                let mut out = LogConformal {
                    lambda: -den.ln(),
                    grad: [k * x[0], k * x[1]],
                };
                if self.kind == MetricKind::Perturbed {
                    let (b, db) = self.bump(x);
                    let h = lit::<T>(0.5) * self.epsilon;
                    out.lambda = out.lambda + h * b;
                    out.grad[0] = out.grad[0] + h * db[0];
                    out.grad[1] = out.grad[1] + h * db[1];
                }
                out
            }
        }
    }

    /// `e^{-lambda(x)}` and `e^{-lambda(x)} grad lambda(x)`, the coefficients of the flow.
    #[inline]
    pub fn flow_coeffs(&self, x: [T; 2]) -> (T, [T; 2]) {
        match self.kind {
            MetricKind::Euclidean => (T::one(), [T::zero(); 2]),
            MetricKind::ConstantCurvature => {
                let q = lit::<T>(0.25) * self.kappa;
                let den = T::one() + q * (x[0] * x[0] + x[1] * x[1]);
                let k = -lit::<T>(2.0) * q;
                (den, [k * x[0], k * x[1]])
            }
            MetricKind::Perturbed => {
                let lc = self.log_conformal(x);
                let e = (-lc.lambda).exp();
                (e, [e * lc.grad[0], e * lc.grad[1]])
            }
        }
    }

    /// Conformal factor `c(x) = e^{2 lambda(x)}`.
    pub fn conformal_factor(&self, x: [T; 2]) -> T {
        (lit::<T>(2.0) * self.log_conformal(x).lambda).exp()
    }

    /// Gaussian curvature from a five-point finite-difference Laplacian of `lambda`.
    pub fn gaussian_curvature_fd(&self, x: [T; 2], step: T) -> T {
        let l = |p: [T; 2]| self.log_conformal(p).lambda;
        let c = l(x);
        let lap = (l([x[0] + step, x[1]]) + l([x[0] - step, x[1]]) + l([x[0], x[1] + step])
            + l([x[0], x[1] - step])
            - lit::<T>(4.0) * c)
            / (step * step);
        -(-lit::<T>(2.0) * c).exp() * lap
    }

    /// Unit tangent vector of chart angle `theta` in chart components.
    #[inline]
    pub fn unit_vector(&self, x: [T; 2], theta: T) -> [T; 2] {
        let e = (-self.log_conformal(x).lambda).exp();
        [e * theta.cos(), e * theta.sin()]
    }
}
