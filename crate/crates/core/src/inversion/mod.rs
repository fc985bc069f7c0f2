//! Inversion of the unattenuated transform and the attenuated reconstruction pipeline.

mod attenuated;
mod i0;
mod verify;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bundle::DerivativeScheme;
use crate::holomorphic::{HolomorphicityReport, NeumannOptions};

pub use attenuated::{reconstruct_attenuated, Reconstruction};
pub use i0::{invert_i0, invert_i0_explicit, invert_i0_fredholm, invert_i0_pairs, FredholmResult, PairInversion};
pub use verify::{verify_holomorphic_solution, HolomorphicSolutionReport};

/// Backend for inverting the unattenuated transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum I0Backend {
    /// Holomorphic scheme, valid on constant curvature.
    #[serde(rename = "explicit_cc", alias = "ExplicitCC")]
    ExplicitCC,
    /// Holomorphic scheme followed by a Neumann series for `Id + W^2`.
    #[serde(rename = "fredholm_w2", alias = "FredholmW2")]
    FredholmW2,
    /// CGLS on function and solenoidal one-form unknowns.
    #[default]
    #[serde(rename = "least_squares", alias = "LeastSquares")]
    LeastSquares,
}

impl std::str::FromStr for I0Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "explicitcc" | "explicit" => Ok(Self::ExplicitCC),
            "fredholmw2" | "fredholm" => Ok(Self::FredholmW2),
            "leastsquares" | "ls" | "cgls" => Ok(Self::LeastSquares),
            _ => Err(format!("unknown backend `{s}` (explicit_cc, fredholm_w2, least_squares)")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionConfig {
    pub i0_backend: I0Backend,
    /// Real path with one integrating factor; otherwise the complex path with two.
    pub real_valued: bool,
    /// CGLS stopping threshold on the relative normal-equation residual.
    pub cgls_tol: f64,
    pub cgls_max_iter: usize,
    /// Ratio of the pair-unknown lattice spacing to the grid spacing.
    pub pair_coarsen: usize,
    pub neumann_tol: f64,
    pub neumann_max_terms: usize,
    #[serde(skip)]
    pub derivative: DerivativeScheme,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            i0_backend: I0Backend::default(),
            real_valued: true,
            cgls_tol: 1e-6,
            cgls_max_iter: 200,
            pair_coarsen: 2,
            neumann_tol: 1e-10,
            neumann_max_terms: 50,
            derivative: DerivativeScheme::Richardson,
        }
    }
}

impl ReconstructionConfig {
    pub fn neumann(&self) -> NeumannOptions {
        NeumannOptions {
            tol: self.neumann_tol,
            max_terms: self.neumann_max_terms,
        }
    }
}

/// Per-step record of a reconstruction run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub backend: Option<I0Backend>,
    pub real_valued: bool,
    pub per_step_residuals: BTreeMap<String, f64>,
    pub holomorphicity_reports: BTreeMap<String, HolomorphicityReport>,
    pub iterations: BTreeMap<String, usize>,
    pub timings: BTreeMap<String, f64>,
    pub neumann_increments: BTreeMap<String, Vec<f64>>,
    /// Directions within one angular cell of tangency, excluded from the inflow set.
    pub grazing_clamped: usize,
    pub fast_path: bool,
}

impl Diagnostics {
    pub(crate) fn time<R>(&mut self, step: &str, f: impl FnOnce(&mut Self) -> R) -> R {
        let t = std::time::Instant::now();
        let r = f(self);
        self.timings.insert(step.to_string(), t.elapsed().as_secs_f64());
        r
    }
}
