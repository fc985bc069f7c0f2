//! Attenuated geodesic ray transform on simple surfaces.
//!
//! The surface is a disc `|x| <= R` with a conformal metric `e^{2 lambda} |dx|^2`. Functions on
//! the unit circle bundle are sampled on a Cartesian grid times equispaced fibre angles.

pub mod bundle;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod holomorphic;
pub mod inversion;
pub mod io;
pub mod linalg;
pub mod phantom;
pub mod scalar;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

/// Double precision aliases.
pub type Domain = domain::Domain<f64>;
pub type Metric = geometry::MetricModel<f64>;
pub type ScalarField = bundle::ScalarField<f64>;
pub type OneFormField = bundle::OneFormField<f64>;
pub type BundleField = bundle::BundleField<f64>;
pub type BoundaryField = bundle::BoundaryField<f64>;
