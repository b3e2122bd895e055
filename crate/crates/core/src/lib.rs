//! Discrete causal Bayesian networks and EPRB causal models.
//!
//! - [`graph`]: DAGs, d-separation and the independences a graph implies.
//! - [`prob`]: exact joint tables, conditional tables and causal models.
//! - [`eprb`]: singlet statistics, retrocausal and common-cause models, CHSH
//!   and the no-signalling measure.
//! - [`amplitude`]: amplitude composition through an intermediary
//!   measurement of tunable coherence.
//! - [`audit`]: faithfulness audits and stability of fine-tuned independences.
//! - [`model_file`]: the JSON model format.

pub mod amplitude;
pub mod audit;
pub mod eprb;
pub mod error;
pub mod graph;
pub mod model_file;
pub mod prob;

pub use amplitude::{chsh_sweep, uniform_grid, AmplitudeKernel, ComplexAmplitude, Intermediary};
pub use audit::{
    audit, audit_with, stability_profile, AuditOptions, AuditReport, PerturbationSpec, PerturbationTarget, StabilityReport,
    Subject,
};
pub use eprb::{chsh, EprbGeometry, EprbRoles, SettingJoints, Sign};
pub use error::{Error, Result};
pub use graph::{CiStatement, Dag, Variable};
pub use model_file::ModelFile;
pub use prob::{CausalModel, Cpd, DiscreteDistribution};
