//! Spectral-graph model of promotion & tenure committee voting.
//!
//! * [`model`] builds the weighted committee graph and its Laplacian from
//!   scholarship data.
//! * [`spectral`] embeds the graph in the plane and evaluates Gaussian
//!   influence fields over it.
//! * [`voting`] solves the Laplacian-regularized vote dynamics and runs
//!   seeded Monte Carlo sweeps.
//! * [`case_study`] embeds an eleven-agent department and reproduces its
//!   figures.

pub mod case_study;
pub mod error;
pub mod export;
pub mod io;
pub mod model;
pub mod spectral;
pub mod svg;
pub mod voting;

pub use error::{Error, Result};
pub use model::{CommitteeGraph, DepartmentData, Matrix, ModelParams, ProductivityVector};
pub use spectral::{InfluenceDiagram, SpectralDecomposition};
pub use voting::{SweepResult, VoteOutcome, VotingScenario};
