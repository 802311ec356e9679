//! Critical points of `J_ω`: deflated descent with Newton polishing, the
//! annulus-bump subspaces with a uniform negativity margin, sampled upper
//! bounds for the minimax levels, and the multiplicity pipeline tying them
//! together.

mod minimax;
mod minimize;
mod pipeline;
mod subspace;

pub use minimax::{
    dilation_bound_check, estimate_minimax_level, estimate_minimax_level_with, DilationBoundFit,
    MinimaxEstimate,
};
pub use minimize::{minimize, newton_refine};
pub use pipeline::{multiplicity_pipeline, subspace_seed, AttemptRecord, KStatus, PipelineOutcome};
pub use subspace::{
    build_lemma10_subspace, build_lemma10_subspace_with, sample_rayleigh_sup, SubspaceFamily,
    SubspaceOptions,
};

use serde::{Deserialize, Serialize};

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::grid::RadialFunction;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    ArmijoBacktracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precondition {
    None,
    /// Descent direction from `(K + W) p = -∂J`, i.e. `(I - Δ) p = -g`.
    Sobolev,
}

impl std::str::FromStr for Precondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "sobolev" => Ok(Self::Sobolev),
            other => Err(Error::InvalidArgument(format!(
                "unknown preconditioner '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions<T> {
    pub max_iters: usize,
    /// Convergence when the raw L² residual drops below this.
    pub grad_tol: T,
    pub step_rule: StepRule,
    pub precondition: Precondition,
    pub coupling_enabled: bool,
    /// Shift `s` of the deflation factors `1 + s/‖u - u_j‖²`.
    pub deflation_strength: T,
    /// Polish with Newton steps once the (projected) dual residual is below
    /// `newton_switch` and the energy is negative.
    pub newton: bool,
    pub newton_switch: T,
    /// Minimum L² distance separating distinct solutions (and from zero).
    pub dist_tol: T,
    /// `λ̄ = safety_factor · min λ_i` in the subspace construction.
    pub safety_factor: T,
    /// Relative size of the random perturbation added to pipeline seeds.
    pub seed_perturbation: T,
    pub seed: u64,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            grad_tol: T::c(1e-8),
            step_rule: StepRule::ArmijoBacktracking,
            precondition: Precondition::Sobolev,
            coupling_enabled: true,
            deflation_strength: T::one(),
            newton: true,
            newton_switch: T::c(1e-2),
            dist_tol: T::c(1e-3),
            safety_factor: T::c(0.5),
            seed_perturbation: T::c(1e-2),
            seed: 0,
        }
    }
}

impl<T: Real> SolveOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if !(self.grad_tol > T::zero()) {
            return Err(Error::InvalidArgument("grad_tol must be positive".into()));
        }
        if !(self.deflation_strength >= T::zero()) {
            return Err(Error::InvalidArgument(
                "deflation_strength must be >= 0".into(),
            ));
        }
        if !(self.safety_factor > T::zero() && self.safety_factor < T::one()) {
            return Err(Error::InvalidArgument(
                "safety_factor must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    LineSearchFailure,
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub u: RadialFunction<T>,
    /// `4π Δ⁻¹ u²`.
    pub phi: RadialFunction<T>,
    pub omega: T,
    pub energy: EnergyBreakdown<T>,
    /// Raw `‖J_ω'(u)‖_{L²}`, no deflation or projection.
    pub residual: T,
    pub iters: usize,
    pub newton_iters: usize,
    pub converged: bool,
    pub status: SolveStatus,
    /// `energy.total < -ω/2`.
    pub below_threshold: bool,
    /// Energy after every accepted step, starting with `u0`.
    pub energy_history: Vec<T>,
}

impl<T: Real> SolveReport<T> {
    pub fn norm_l2(&self) -> T {
        self.u.norm_l2()
    }

    pub fn threshold(&self) -> T {
        -self.omega * T::c(0.5)
    }
}
