//! Run configuration.

use std::path::Path;
use std::sync::Arc;

use agrt::domain::{Domain, DomainOptions};
use agrt::geometry::{MetricModel, MetricSpec};
use agrt::inversion::ReconstructionConfig;
use agrt::phantom::{Gaussian, PolynomialBump};
use agrt::ScalarField;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Phantom support must stay this fraction of the radius away from the boundary.
pub const SUPPORT_MARGIN: f64 = 0.05;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_x: usize,
    pub n_theta: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_phi: Option<usize>,
}

/// `a(x) = constant + sum of Gaussians`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttenuationSpec {
    pub constant: f64,
    pub gaussians: Vec<Gaussian>,
}

impl AttenuationSpec {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.constant + self.gaussians.iter().map(|g| g.eval(x)).sum::<f64>()
    }
}

/// Source term. With `gauge` set the source is the invisible pair `a p + dp`, and the lists
/// must be empty.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomSpec {
    pub gaussians: Vec<Gaussian>,
    /// Gaussians are cut to zero for `|x| > cutoff`.
    pub cutoff: f64,
    pub polynomial: Vec<PolynomialBump>,
    pub gauge: bool,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            gaussians: Vec::new(),
            cutoff: 0.8,
            polynomial: Vec::new(),
            gauge: false,
        }
    }
}

impl PhantomSpec {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let g = if x[0] * x[0] + x[1] * x[1] > self.cutoff * self.cutoff {
            0.0
        } else {
            self.gaussians.iter().map(|g| g.eval(x)).sum()
        };
        g + self.polynomial.iter().map(|p| p.eval(x)).sum::<f64>()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty() && self.polynomial.is_empty() && !self.gauge
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub metric: MetricSpec,
    #[serde(default)]
    pub attenuation: AttenuationSpec,
    #[serde(default)]
    pub phantom: PhantomSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub reconstruction: ReconstructionConfig,
    #[serde(default)]
    pub seed: u64,
}

/// The parts of a config that determine the data.
#[derive(Serialize)]
struct Acquisition<'a> {
    metric: &'a MetricSpec,
    attenuation: &'a AttenuationSpec,
    phantom: &'a PhantomSpec,
    grid: &'a GridSpec,
}

fn line_of(text: &str, key: &str) -> Option<usize> {
    let pat = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&pat)).map(|i| i + 1)
}

fn at_line(text: &str, key: &str, msg: String) -> CliError {
    match line_of(text, key) {
        Some(l) => CliError::config(format!("line {l}: {msg}")),
        None => CliError::config(msg),
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses and validates. Errors carry the line of the offending entry.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    fn validate(&self, text: &str) -> Result<(), CliError> {
        MetricModel::<f64>::from_spec(&self.metric).map_err(|e| at_line(text, "metric", e.to_string()))?;
        let r = self.metric.radius;
        let limit = r * (1.0 - SUPPORT_MARGIN);
        let p = &self.phantom;
        if !p.gaussians.is_empty() && !(p.cutoff > 0.0 && p.cutoff < limit) {
            return Err(at_line(text, "cutoff", format!("Gaussian cutoff {} must lie in (0, {limit})", p.cutoff)));
        }
        for b in &p.polynomial {
            if !(b.radius > 0.0 && b.reach() < limit) {
                return Err(at_line(text, "polynomial", format!("polynomial bump reaches |x| = {}, limit {limit}", b.reach())));
            }
        }
        for g in p.gaussians.iter().chain(&self.attenuation.gaussians) {
            if !(g.sigma > 0.0) {
                return Err(at_line(text, "sigma", format!("sigma must be positive, got {}", g.sigma)));
            }
        }
        if p.gauge && !(p.gaussians.is_empty() && p.polynomial.is_empty()) {
            return Err(at_line(text, "gauge", "a gauge phantom takes no other components".into()));
        }
        self.domain().map_err(|e| at_line(text, "grid", e.message))?;
        Ok(())
    }

    /// Hex SHA-256 of the metric, attenuation, phantom and grid.
    pub fn hash(&self) -> String {
        let acq = Acquisition {
            metric: &self.metric,
            attenuation: &self.attenuation,
            phantom: &self.phantom,
            grid: &self.grid,
        };
        agrt::io::sha256_hex(serde_json::to_string(&acq).expect("config serialises").as_bytes())
    }

    pub fn domain(&self) -> Result<Arc<Domain<f64>>, CliError> {
        let mut opts = DomainOptions::new(self.grid.n_x, self.grid.n_theta);
        opts.n_phi = self.grid.n_phi;
        Ok(Domain::new(MetricModel::from_spec(&self.metric)?, opts)?)
    }

    pub fn attenuation_field(&self, dom: &Arc<Domain<f64>>) -> ScalarField {
        ScalarField::from_real_fn(dom, |x| self.attenuation.eval(x))
    }

    pub fn phantom_field(&self, dom: &Arc<Domain<f64>>) -> ScalarField {
        ScalarField::from_real_fn(dom, |x| self.phantom.eval(x))
    }
}

/// Parses `nx,ntheta`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected nx,ntheta, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(a)?, p(b)?))
}
