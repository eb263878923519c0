//! Dirichlet eigenpairs, heat kernels and metric-measure audits on annular
//! domains, boxes and sectors.

// `!(x > 0.0)` is used on purpose so that NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod numerics;
pub mod bases;
pub mod radial;
pub mod spectrum;
pub mod spectral2d;
pub mod estimates;
pub mod geometry;
pub mod heatkernel;
pub mod perturb;
pub mod auditors;
pub mod specfun;

pub use error::{Error, Result};
pub use auditors::{AuditReport, AuditRow, AuditSummary};
pub use bases::BaseDomain;
pub use estimates::{BoundsReport, CaricatureFn, CaricatureKind};
pub use geometry::{MetricDomain, WeightFunction, WeightedNet};
pub use perturb::{PerturbationReport, PerturbationScenario, ScenarioFile};
pub use radial::AnnularDomainSpec;
pub use spectrum::{EigenMode, Spectrum, TailModel};

/// Library version embedded in every CLI artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
