//! Random metric ribbon graphs at large genus: uniform sampling of one-faced
//! trivalent maps, cycle length spectra and girth, the limiting Poisson model,
//! Kontsevich volume formulas with their asymptotics, and stable graph
//! inequalities. The `run` module ties everything into reproducible batch
//! drivers used by the `ribbonlab` CLI.

pub mod acceptance;
pub mod cycles;
pub mod halfedge;
pub mod numeric;
pub mod poisson;
pub mod run;
pub mod sampler;
pub mod scalar;
pub mod scaled;
pub mod series;
pub mod stablegraph;
pub mod stats;
pub mod volumes;

pub use halfedge::{HalfEdgeStructure, MetricMap};
pub use poisson::{IntensityParams, IntervalSpec};
pub use scalar::Scalar;

/// Metric map over double-precision lengths, the default working type.
pub type MetricMapF64 = MetricMap<f64>;
