pub mod derivative;
pub mod field;
pub mod interp;
pub mod spectral;

pub use derivative::{
    commutator_residual, geodesic_derivative, geodesic_derivative_field, geodesic_derivative_scalar, gradient,
    perp_derivative, perp_derivative_field, DerivativeScheme,
};
pub use field::{BoundaryField, BundleField, FiberField, OneFormField, ScalarField};
pub use spectral::{
    angular_derivative, apply_multiplier, fourier_coefficients, from_fourier_coefficients, hilbert, hilbert_symbol,
    holo_project, holo_symbol,
};
