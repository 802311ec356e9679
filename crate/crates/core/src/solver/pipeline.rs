use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{annulus_bump, RadialFunction, RadialGrid};
use crate::potentials::{check_hypotheses, HypothesisReport, Potential};
use crate::real::Real;

use super::minimize::minimize;
use super::subspace::{build_lemma10_subspace_with, SubspaceOptions};
use super::{SolveOptions, SolveReport, SolveStatus};

/// One `minimize` run of the pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct AttemptRecord {
    pub k: usize,
    /// `+1` for the seed, `-1` for its negation.
    pub sign: i8,
    pub status: SolveStatus,
    pub residual: f64,
    pub energy: f64,
    pub norm_l2: f64,
    pub iters: usize,
    pub accepted: bool,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct KStatus {
    pub k: usize,
    /// Error from the subspace construction, if any.
    pub family_error: Option<String>,
    pub lambda_bar: Option<f64>,
    pub nu: Option<f64>,
    pub new_solutions: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome<T> {
    /// Accepted solutions in discovery order.
    pub solutions: Vec<SolveReport<T>>,
    pub attempts: Vec<AttemptRecord>,
    pub per_k: Vec<KStatus>,
    pub hypotheses: HypothesisReport,
    /// Hypotheses failed or the subspace construction broke down.
    pub hypothesis_violated: bool,
    /// Grid the solutions live on (extended to hold the seeds).
    pub grid: RadialGrid<T>,
}

impl<T: Real> PipelineOutcome<T> {
    /// Smallest pairwise L² distance among the accepted solutions.
    pub fn min_pairwise_distance(&self) -> Option<T> {
        let mut best: Option<T> = None;
        for i in 0..self.solutions.len() {
            for j in 0..i {
                let d = (&self.solutions[i].u - &self.solutions[j].u).norm_l2();
                best = Some(best.map_or(d, |b: T| b.min(d)));
            }
        }
        best
    }
}

/// Smooth random profile concentrated near the origin, unit L² norm.
fn perturbation<T: Real>(grid: &RadialGrid<T>, seed: u64) -> RadialFunction<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64)> = (0..4)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..3.0)))
        .collect();
    let p = grid.sample(|r| {
        let r = r.as_f64();
        T::c(terms.iter().map(|&(a, l)| a * (-r / l).exp()).sum())
    });
    let n = p.norm_l2();
    if n > T::zero() {
        p.scaled(T::one() / n)
    } else {
        p
    }
}

fn seed_state<T: Real>(
    base: &RadialFunction<T>,
    opts: &SolveOptions<T>,
    k: usize,
) -> RadialFunction<T> {
    let mut s = base.clone();
    if opts.seed_perturbation > T::zero() {
        let p = perturbation(
            base.grid(),
            opts.seed.wrapping_mul(0x9E37_79B9).wrapping_add(k as u64),
        );
        s.axpy(opts.seed_perturbation * base.norm_l2(), &p);
    }
    s
}

/// Seed used for index `k`: the `k`-th basis element of the `k`-family
/// built on `grid`, scaled by `λ̄^{1/2}` and perturbed. Lives on the
/// (possibly extended) family grid.
pub fn subspace_seed<T: Real>(
    k: usize,
    v: &Potential<T>,
    grid: &RadialGrid<T>,
    omega: T,
    opts: &SolveOptions<T>,
) -> Result<RadialFunction<T>> {
    opts.validate()?;
    let sub_opts = SubspaceOptions {
        safety_factor: opts.safety_factor,
        seed: opts.seed,
        ..SubspaceOptions::default()
    };
    let fam = build_lemma10_subspace_with(k, v, grid, omega, &sub_opts)?;
    let base = fam.basis[k - 1].scaled(fam.lambda_bar.sqrt());
    Ok(seed_state(&base, opts, k))
}

/// Runs `minimize` from seeds built out of the annulus-bump families for
/// `k = 1..=k_max`. For each `k` the seed is the `k`-th basis element
/// scaled by `λ̄^{1/2}` plus a small seeded perturbation; it is run with both
/// signs against all previously accepted solutions. A run is accepted when
/// it converges, `‖u‖ > dist_tol` and it lies farther than `dist_tol` from
/// every accepted solution.
///
/// When the family cannot be built (e.g. (V4) fails) the pipeline falls
/// back to unit annulus bumps as seeds and flags `hypothesis_violated`.
pub fn multiplicity_pipeline<T: Real>(
    k_max: usize,
    omega: T,
    v: &Potential<T>,
    grid: &RadialGrid<T>,
    opts: &SolveOptions<T>,
) -> Result<PipelineOutcome<T>> {
    opts.validate()?;
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be >= 1".into()));
    }
    if !(omega < T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "multiplicity needs omega < 0, got {omega}"
        )));
    }
    let hypotheses = check_hypotheses(v, grid)?;
    let sub_opts = SubspaceOptions {
        safety_factor: opts.safety_factor,
        seed: opts.seed,
        ..SubspaceOptions::default()
    };
    let top = build_lemma10_subspace_with(k_max, v, grid, omega, &sub_opts);
    let mut family_broken = top.is_err();
    let work = match &top {
        Ok(f) => f.grid().clone(),
        Err(_) => grid.clone(),
    };

    let mut solutions: Vec<SolveReport<T>> = Vec::new();
    let mut attempts = Vec::new();
    let mut per_k = Vec::new();
    for k in 1..=k_max {
        let mut status = KStatus {
            k,
            family_error: None,
            lambda_bar: None,
            nu: None,
            new_solutions: 0,
        };
        let base = match build_lemma10_subspace_with(k, v, &work, omega, &sub_opts) {
            Ok(fam) => {
                status.lambda_bar = Some(fam.lambda_bar.as_f64());
                status.nu = Some(fam.nu.as_f64());
                let b = fam.basis[k - 1].resample(&work);
                Some(b.scaled(fam.lambda_bar.sqrt()))
            }
            Err(e) => {
                family_broken = true;
                status.family_error = Some(e.to_string());
                annulus_bump(k, &work).ok()
            }
        };
        let Some(base) = base else {
            per_k.push(status);
            continue;
        };
        let seed = seed_state(&base, opts, k);
        let deflation: Vec<RadialFunction<T>> = solutions.iter().map(|s| s.u.clone()).collect();
        for sign in [1i8, -1] {
            let u0 = if sign > 0 { seed.clone() } else { -&seed };
            let rep = minimize(&u0, omega, v, opts, &deflation)?;
            let norm = rep.norm_l2();
            let nearest = solutions
                .iter()
                .map(|s| (&s.u - &rep.u).norm_l2())
                .fold(T::infinity(), T::min);
            let reason = if !rep.converged {
                format!("not converged ({:?})", rep.status)
            } else if !(norm > opts.dist_tol) {
                "trivial solution".to_string()
            } else if !(nearest > opts.dist_tol) {
                format!("duplicate (L2 distance {:.3e})", nearest.as_f64())
            } else {
                String::new()
            };
            let accepted = reason.is_empty();
            attempts.push(AttemptRecord {
                k,
                sign,
                status: rep.status,
                residual: rep.residual.as_f64(),
                energy: rep.energy.total.as_f64(),
                norm_l2: norm.as_f64(),
                iters: rep.iters,
                accepted,
                reason: if accepted { "accepted".into() } else { reason },
            });
            if accepted {
                status.new_solutions += 1;
                solutions.push(rep);
            }
        }
        per_k.push(status);
    }
    Ok(PipelineOutcome {
        solutions,
        attempts,
        per_k,
        hypothesis_violated: family_broken || !hypotheses.all_pass(),
        hypotheses,
        grid: work,
    })
}
