use crate::energy::Functional;
use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid};
use crate::linalg::{solve_dense, solve_tridiagonal};
use crate::poisson::self_consistent_phi;
use crate::potentials::Potential;
use crate::real::Real;

use super::{Precondition, SolveOptions, SolveReport, SolveStatus};

const ARMIJO_C1: f64 = 1e-4;
const ALPHA_MAX: f64 = 1e8;
const ALPHA_MIN: f64 = 1e-30;
const NEWTON_HALVINGS: usize = 30;
const NEWTON_COOLDOWN: usize = 25;

fn w_dot<T: Real>(w: &[T], a: &[T], b: &[T]) -> T {
    w.iter().zip(a).zip(b).map(|((&w, &x), &y)| w * x * y).sum()
}

struct Preconditioner<T> {
    kind: Precondition,
    lower: Vec<T>,
    diag: Vec<T>,
    upper: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> Preconditioner<T> {
    fn new(grid: &RadialGrid<T>, kind: Precondition) -> Self {
        let (lower, mut diag, upper) = grid.stiffness_bands();
        for (d, &w) in diag.iter_mut().zip(grid.weights()) {
            *d = *d + w;
        }
        Self {
            kind,
            lower,
            diag,
            upper,
            weights: grid.weights().to_vec(),
        }
    }

    /// `M⁻¹ x` with `M = K + W` (Sobolev) or `M = W`.
    fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        match self.kind {
            Precondition::Sobolev => solve_tridiagonal(&self.lower, &self.diag, &self.upper, x),
            Precondition::None => Ok(x.iter().zip(&self.weights).map(|(&v, &w)| v / w).collect()),
        }
    }
}

/// Linear constraints `⟨u, d_j⟩_W = 0` against the deflation set.
struct Projection<T> {
    dirs: Vec<Vec<T>>,
    /// `M⁻¹ W d_j`
    z: Vec<Vec<T>>,
    /// `(Dᵀ W M⁻¹ W D)` row-major
    gram_m: Vec<T>,
    /// `(Dᵀ W D)` row-major
    gram_w: Vec<T>,
}

impl<T: Real> Projection<T> {
    fn new(dirs: Vec<Vec<T>>, pre: &Preconditioner<T>, w: &[T]) -> Result<Self> {
        let m = dirs.len();
        let mut z = Vec::with_capacity(m);
        for d in &dirs {
            let wd: Vec<T> = d.iter().zip(w).map(|(&x, &wi)| x * wi).collect();
            z.push(pre.apply(&wd)?);
        }
        let mut gram_m = vec![T::zero(); m * m];
        let mut gram_w = vec![T::zero(); m * m];
        for i in 0..m {
            for j in 0..m {
                gram_m[i * m + j] = w_dot(w, &dirs[i], &z[j]);
                gram_w[i * m + j] = w_dot(w, &dirs[i], &dirs[j]);
            }
        }
        Ok(Self {
            dirs,
            z,
            gram_m,
            gram_w,
        })
    }

    fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Removes the W-orthogonal projection of `u` onto span(D).
    fn project_state(&self, u: &mut [T], w: &[T]) -> Result<()> {
        if self.is_empty() {
            return Ok(());
        }
        let rhs: Vec<T> = self.dirs.iter().map(|d| w_dot(w, d, u)).collect();
        let coef = solve_dense(self.gram_w.clone(), rhs)?;
        for (d, &c) in self.dirs.iter().zip(&coef) {
            for (x, &dv) in u.iter_mut().zip(d) {
                *x = *x - c * dv;
            }
        }
        Ok(())
    }

    /// Turns `p0 = M⁻¹ ∂J` into the constrained descent direction
    /// `p = -M⁻¹(∂J + W D μ)` with `Dᵀ W p = 0`.
    fn direction(&self, mut p0: Vec<T>, w: &[T]) -> Result<Vec<T>> {
        if !self.is_empty() {
            let rhs: Vec<T> = self.dirs.iter().map(|d| -w_dot(w, d, &p0)).collect();
            let mu = solve_dense(self.gram_m.clone(), rhs)?;
            for (z, &m) in self.z.iter().zip(&mu) {
                for (x, &zv) in p0.iter_mut().zip(z) {
                    *x = *x + m * zv;
                }
            }
        }
        for x in &mut p0 {
            *x = -*x;
        }
        Ok(p0)
    }
}

/// W-orthonormal basis of span(deflation), dropping dependent members.
fn orthonormalize<T: Real>(deflation: &[RadialFunction<T>], w: &[T]) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = Vec::new();
    for d in deflation {
        let mut v = d.values().to_vec();
        let norm0 = w_dot(w, &v, &v).sqrt();
        if !(norm0 > T::zero()) {
            continue;
        }
        for b in &basis {
            let c = w_dot(w, b, &v);
            for (x, &bv) in v.iter_mut().zip(b) {
                *x = *x - c * bv;
            }
        }
        let norm = w_dot(w, &v, &v).sqrt();
        if norm > T::c(1e-8) * norm0 {
            basis.push(v.iter().map(|&x| x / norm).collect());
        }
    }
    basis
}

/// `Σ_e ∂ ln(1 + s/‖u - e‖²) · δ` over the deflated states `e`.
fn deflation_slope<T: Real>(u: &[T], delta: &[T], states: &[Vec<T>], s: T, w: &[T]) -> T {
    let two = T::c(2.0);
    states
        .iter()
        .map(|e| {
            let diff: Vec<T> = u.iter().zip(e).map(|(&a, &b)| a - b).collect();
            let d2 = w_dot(w, &diff, &diff);
            if d2 <= T::zero() {
                return T::zero();
            }
            -two * s * w_dot(w, &diff, delta) / (d2 * d2 + s * d2)
        })
        .sum()
}

fn finish<T: Real>(
    f: &Functional<T>,
    u: Vec<T>,
    residual: T,
    iters: usize,
    newton_iters: usize,
    status: SolveStatus,
    energy_history: Vec<T>,
) -> Result<SolveReport<T>> {
    let grid = f.grid();
    let u = RadialFunction::new(grid, u)?;
    let phi = self_consistent_phi(&u)?.phi;
    let energy = f.breakdown(u.values());
    let omega = f.omega();
    Ok(SolveReport {
        below_threshold: energy.total < -omega * T::c(0.5),
        u,
        phi,
        omega,
        energy,
        residual,
        iters,
        newton_iters,
        converged: status == SolveStatus::Converged,
        status,
        energy_history,
    })
}

/// Nontrivial critical points satisfy `J = -SI < 0`; Newton is only tried
/// once the quartic term carries a comparable share of the energy, so that
/// states still in the linear regime around `0` are not pulled onto it.
fn near_nehari<T: Real>(f: &Functional<T>, u: &[T], energy: T) -> bool {
    if !(energy < T::zero()) {
        return false;
    }
    if !f.coupling() {
        return true;
    }
    T::c(3.0) * f.breakdown(u).self_interaction >= -energy
}

/// Searches for a critical point of `J_ω` starting from `u0`.
///
/// Phase one is Armijo descent along the (optionally Sobolev-preconditioned)
/// negative gradient. A non-empty `deflation` set is enforced as the linear
/// constraints `⟨u, u_j⟩ = 0` on the state and the direction, which also
/// excludes `-u_j`. Phase two applies Newton steps to the raw equation
/// `J'(u) = 0`; with a deflation set, steps are rescaled by the deflation
/// factors `1 + s/‖u - e‖²` for `e ∈ {0, ±u_j}`, and without one a step is
/// only taken if it does not raise the energy. Convergence is always judged
/// on the raw residual.
pub fn minimize<T: Real>(
    u0: &RadialFunction<T>,
    omega: T,
    v: &Potential<T>,
    opts: &SolveOptions<T>,
    deflation: &[RadialFunction<T>],
) -> Result<SolveReport<T>> {
    opts.validate()?;
    if !u0.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    for d in deflation {
        u0.check_same_grid(d)?;
    }
    let grid = u0.grid();
    let w = grid.weights();
    let f = Functional::new(grid, omega, v).with_coupling(opts.coupling_enabled);
    let pre = Preconditioner::new(grid, opts.precondition);

    let mut states: Vec<Vec<T>> = Vec::new();
    if deflation.iter().any(|d| d.norm_l2() > T::zero()) {
        states.push(vec![T::zero(); grid.len()]);
        for d in deflation {
            states.push(d.values().to_vec());
            states.push(d.values().iter().map(|&x| -x).collect());
        }
    }
    let proj = Projection::new(orthonormalize(deflation, w), &pre, w)?;

    let mut u = u0.values().to_vec();
    proj.project_state(&mut u, w)?;

    let slack = T::c(1e-12);
    let mut energy = f.value(&u);
    let mut history = vec![energy];
    let mut alpha = T::one();
    let mut newton_iters = 0;
    let mut in_newton = false;
    let mut newton_blocked_until = 0usize;

    for iter in 0..opts.max_iters {
        let grad = f.gradient(&u);
        let residual = f.residual_of(&grad);
        if residual < opts.grad_tol {
            return finish(
                &f,
                u,
                residual,
                iter,
                newton_iters,
                SolveStatus::Converged,
                history,
            );
        }

        let p0 = pre.apply(&grad)?;
        let p = proj.direction(p0, w)?;
        let slope: T = grad.iter().zip(&p).map(|(&g, &d)| g * d).sum();
        let dual = (-slope).max(T::zero()).sqrt();

        let want_newton = opts.newton
            && iter >= newton_blocked_until
            && (in_newton || (dual < opts.newton_switch && near_nehari(&f, &u, energy)));
        if want_newton {
            let rhs: Vec<T> = grad.iter().map(|&g| -g).collect();
            let mut accepted = false;
            if let Ok(mut delta) = f.newton_solve(&u, &rhs) {
                if !states.is_empty() {
                    let gamma = deflation_slope(&u, &delta, &states, opts.deflation_strength, w);
                    let tau = T::one() / (T::one() - gamma);
                    if tau.is_finite() && tau > T::zero() {
                        for x in &mut delta {
                            *x = *x * tau;
                        }
                    }
                }
                let mut t = T::one();
                for _ in 0..NEWTON_HALVINGS {
                    let trial: Vec<T> = u.iter().zip(&delta).map(|(&a, &d)| a + t * d).collect();
                    let r_trial = f.residual(&trial);
                    let e_trial = f.value(&trial);
                    let energy_ok =
                        !states.is_empty() || e_trial <= energy + slack * (T::one() + energy.abs());
                    if r_trial.is_finite()
                        && r_trial < (T::one() - T::c(1e-4) * t) * residual
                        && energy_ok
                    {
                        u = trial;
                        energy = e_trial;
                        history.push(energy);
                        accepted = true;
                        break;
                    }
                    t = t * T::c(0.5);
                }
            }
            if accepted {
                newton_iters += 1;
                in_newton = true;
                continue;
            }
            in_newton = false;
            newton_blocked_until = iter + NEWTON_COOLDOWN;
        }

        if !(slope < T::zero()) {
            return finish(
                &f,
                u,
                residual,
                iter,
                newton_iters,
                SolveStatus::LineSearchFailure,
                history,
            );
        }
        let c1 = T::c(ARMIJO_C1);
        alpha = (alpha + alpha).min(T::c(ALPHA_MAX));
        loop {
            let trial: Vec<T> = u.iter().zip(&p).map(|(&a, &d)| a + alpha * d).collect();
            let e_trial = f.value(&trial);
            if e_trial.is_finite() && e_trial <= energy + c1 * alpha * slope {
                u = trial;
                energy = e_trial;
                history.push(energy);
                break;
            }
            alpha = alpha * T::c(0.5);
            if alpha < T::c(ALPHA_MIN) {
                return finish(
                    &f,
                    u,
                    residual,
                    iter,
                    newton_iters,
                    SolveStatus::LineSearchFailure,
                    history,
                );
            }
        }
    }
    let residual = f.residual(&u);
    let status = if residual < opts.grad_tol {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIters
    };
    finish(
        &f,
        u,
        residual,
        opts.max_iters,
        newton_iters,
        status,
        history,
    )
}

/// Damped Newton iteration on `J'(u) = 0` started from `u0` (typically a
/// solution transferred from another grid). Accepts any step that lowers
/// the raw residual, so saddle points are reachable.
pub fn newton_refine<T: Real>(
    u0: &RadialFunction<T>,
    omega: T,
    v: &Potential<T>,
    opts: &SolveOptions<T>,
) -> Result<SolveReport<T>> {
    opts.validate()?;
    if !u0.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    let f = Functional::new(u0.grid(), omega, v).with_coupling(opts.coupling_enabled);
    let mut u = u0.values().to_vec();
    let mut history = vec![f.value(&u)];
    let max_steps = opts.max_iters.min(200);
    for iter in 0..max_steps {
        let grad = f.gradient(&u);
        let residual = f.residual_of(&grad);
        if residual < opts.grad_tol {
            return finish(&f, u, residual, iter, iter, SolveStatus::Converged, history);
        }
        let rhs: Vec<T> = grad.iter().map(|&g| -g).collect();
        let delta = f.newton_solve(&u, &rhs)?;
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..NEWTON_HALVINGS {
            let trial: Vec<T> = u.iter().zip(&delta).map(|(&a, &d)| a + t * d).collect();
            if f.residual(&trial) < (T::one() - T::c(1e-4) * t) * residual {
                u = trial;
                history.push(f.value(&u));
                accepted = true;
                break;
            }
            t = t * T::c(0.5);
        }
        if !accepted {
            return finish(
                &f,
                u,
                residual,
                iter,
                iter,
                SolveStatus::LineSearchFailure,
                history,
            );
        }
    }
    let residual = f.residual(&u);
    let status = if residual < opts.grad_tol {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIters
    };
    finish(&f, u, residual, max_steps, max_steps, status, history)
}
