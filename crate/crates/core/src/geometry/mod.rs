pub mod flow;
pub mod metric;

pub use flow::{
    exit_time, flow, flow_step, santalo_weight, scattering, scattering_inflow, tau_minus, trace, velocity, walk,
    BoundaryPoint, BundlePoint, ExitInfo, GeodesicTrace, TraceOptions,
};
pub use metric::{BumpComponent, LogConformal, MetricKind, MetricModel, MetricSpec, MAX_PERTURBATION};
