//! Test objects: Gaussian mixtures with a hard support cut, polynomial bumps, and gauge pairs
//! `a p + dp`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bundle::{OneFormField, ScalarField};
use crate::domain::Domain;
use crate::scalar::{cplx, lit, to_f64, Real};

fn default_cutoff() -> f64 {
    0.8
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian {
    pub center: [f64; 2],
    pub sigma: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl Gaussian {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let d2 = (x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2);
        self.amplitude * (-d2 / (2.0 * self.sigma * self.sigma)).exp()
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let v = self.eval(x) / (self.sigma * self.sigma);
        [-(x[0] - self.center[0]) * v, -(x[1] - self.center[1]) * v]
    }
}

/// Sum of Gaussians, set to zero for `|x| > cutoff`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMixture {
    pub bumps: Vec<Gaussian>,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
}

impl GaussianMixture {
    pub fn single(center: [f64; 2], sigma: f64) -> Self {
        Self {
            bumps: vec![Gaussian {
                center,
                sigma,
                amplitude: 1.0,
            }],
            cutoff: default_cutoff(),
        }
    }

    /// The reference phantom: centre `(0.2, 0.1)`, width `0.15`.
    pub fn reference() -> Self {
        Self::single([0.2, 0.1], 0.15)
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        if x[0] * x[0] + x[1] * x[1] > self.cutoff * self.cutoff {
            return 0.0;
        }
        self.bumps.iter().map(|b| b.eval(x)).sum()
    }

    pub fn field<T: Real>(&self, dom: &Arc<Domain<T>>) -> ScalarField<T> {
        ScalarField::from_real_fn(dom, |x| lit(self.eval([to_f64(x[0]), to_f64(x[1])])))
    }
}

/// `amplitude * (1 - |x - center|^2 / radius^2)^power` inside its support disc, zero outside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialBump {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "default_power")]
    pub power: i32,
}

fn default_power() -> i32 {
    4
}

impl PolynomialBump {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let d2 = (x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2);
        let s = 1.0 - d2 / (self.radius * self.radius);
        if s <= 0.0 {
            0.0
        } else {
            self.amplitude * s.powi(self.power)
        }
    }

    /// Largest `|x|` in the support.
    pub fn reach(&self) -> f64 {
        self.center[0].hypot(self.center[1]) + self.radius
    }
}

/// `p = (1 - |x|^2 / R^2)^2`, which vanishes with its gradient on the boundary.
pub fn gauge_potential(x: [f64; 2], radius: f64) -> f64 {
    let s = 1.0 - (x[0] * x[0] + x[1] * x[1]) / (radius * radius);
    s * s
}

/// `dp` for [`gauge_potential`].
pub fn gauge_potential_gradient(x: [f64; 2], radius: f64) -> [f64; 2] {
    let s = 1.0 - (x[0] * x[0] + x[1] * x[1]) / (radius * radius);
    let c = -4.0 * s / (radius * radius);
    [c * x[0], c * x[1]]
}

/// The pair `(a p, dp)` that the attenuated transform with attenuation `a` annihilates.
pub fn gauge_pair<T: Real>(a: &ScalarField<T>) -> (ScalarField<T>, OneFormField<T>) {
    let dom = &a.dom;
    let r = to_f64(dom.radius());
    let p = ScalarField::from_real_fn(dom, |x| lit(gauge_potential([to_f64(x[0]), to_f64(x[1])], r)));
    let f = a.zip_map(&p, |u, v| u * v);
    let dp = OneFormField::from_fn(dom, |x| {
        let g = gauge_potential_gradient([to_f64(x[0]), to_f64(x[1])], r);
        [cplx(lit(g[0]), T::zero()), cplx(lit(g[1]), T::zero())]
    });
    (f, dp)
}
