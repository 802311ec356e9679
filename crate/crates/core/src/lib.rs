//! Radial solutions of the linear Schrödinger–Maxwell (Schrödinger–Poisson)
//! system with an attractive external potential `V`:
//!
//! ```text
//! -½ Δu - φ u - V u = ω u,     Δφ = 4π u²      in ℝ³
//! ```
//!
//! The Poisson equation is eliminated exactly (`φ = 4π Δ⁻¹ u²`), which
//! turns the coupled system into critical points of the even functional
//!
//! ```text
//! J_ω(u) = ¼∫|∇u|² + π∫|∇Δ⁻¹u²|² - ½∫V u² - (ω/2)∫u².
//! ```
//!
//! The crate discretizes radial functions ([`grid`]), solves the Poisson
//! equation ([`poisson`]), evaluates the functionals and their gradients
//! ([`energy`]), searches for several critical points and estimates the
//! minimax levels ([`solver`]), and provides independent reference
//! solutions ([`oracle`]).
//!
//! Every numeric type is generic over [`Real`]; the aliases at the crate
//! root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod energy;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod oracle;
pub mod poisson;
pub mod potentials;
pub mod real;
pub mod solver;

pub use error::{Error, Result};
pub use real::Real;

pub use energy::{EnergyBreakdown, Functional, RayDecomposition};
pub use grid::{GridKind, RadialFunction, RadialGrid};
pub use oracle::LinearSpectrum;
pub use poisson::PoissonSolution;
pub use potentials::{DecayClass, HypothesisReport, HypothesisThresholds, Potential};
pub use solver::{
    MinimaxEstimate, PipelineOutcome, Precondition, SolveOptions, SolveReport, SolveStatus,
    SubspaceFamily,
};

pub type Grid = grid::RadialGrid<f64>;
pub type Func = grid::RadialFunction<f64>;
pub type Pot = potentials::Potential<f64>;
pub type Energy = energy::EnergyBreakdown<f64>;
pub type Options = solver::SolveOptions<f64>;
pub type Report = solver::SolveReport<f64>;
pub type Family = solver::SubspaceFamily<f64>;
pub type Minimax = solver::MinimaxEstimate<f64>;
