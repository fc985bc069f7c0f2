pub mod integrand;
pub mod pairs;
pub mod precond;
pub mod quadrature;
pub mod solenoidal;
pub mod solve;
pub mod xray;

pub use integrand::{FirstDegree, FnIntegrand, Integrand, Sum, Zero};
pub use pairs::{PairIntegrand, PairOperator};
pub use precond::PairPreconditioner;
pub use solenoidal::{central_gradient, divergence, solenoidal_decompose, star_d, DirichletLaplacian, SolenoidalSplit};
pub use solve::{
    a_minus_star, attenuated_at, boundary_scattering, compose_exit, compose_exit_phi, even_continuation, exp_field,
    forward_attenuated, forward_weighted, restrict_to_boundary, transport, transport_at, transport_boundary, transport_with, w_psi,
};
pub use xray::{adjoint, attenuation_weight, normal_operator, Backprojection};
