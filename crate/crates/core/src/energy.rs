//! The reduced functional
//!
//! ```text
//! J_ω(u) = ¼∫|∇u|² + π∫|∇ψ|² - ½∫V u² - (ω/2)∫u²,    ψ = Δ⁻¹u²,
//! ```
//!
//! the strongly indefinite `F_ω(u, φ)` it comes from, the Euler–Lagrange
//! residual and Newton steps.
//!
//! Discretely, with stiffness `K`, weights `W` and the Poisson matrix
//! `L = K + 4πR e_N e_Nᵀ` (so `Lψ = -W u²`):
//!
//! ```text
//! J(u)  = ¼ uᵀKu - π Σ w ψ u² - ½ Σ w V u² - (ω/2) Σ w u²
//! ∂J(u) = ½ Ku - 4π W ψ u - W V u - ω W u
//! H(u)  = ½ K + W diag(-4πψ - V - ω) + 8π WU L⁻¹ WU
//! ```
//!
//! and the L² representation of the gradient is `g = W⁻¹ ∂J`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid};
use crate::linalg::BandedMatrix;
use crate::poisson::{newton_potential, potential_dirichlet};
use crate::potentials::Potential;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown<T> {
    pub kinetic: T,
    pub self_interaction: T,
    pub potential: T,
    pub mass: T,
    pub total: T,
}

impl<T: Real> EnergyBreakdown<T> {
    pub fn zero() -> Self {
        Self {
            kinetic: T::zero(),
            self_interaction: T::zero(),
            potential: T::zero(),
            mass: T::zero(),
            total: T::zero(),
        }
    }

    pub fn to_f64(&self) -> EnergyBreakdown<f64> {
        EnergyBreakdown {
            kinetic: self.kinetic.as_f64(),
            self_interaction: self.self_interaction.as_f64(),
            potential: self.potential.as_f64(),
            mass: self.mass.as_f64(),
            total: self.total.as_f64(),
        }
    }
}

/// `J_ω` on a fixed grid with the potential sampled once.
#[derive(Debug, Clone)]
pub struct Functional<T> {
    grid: RadialGrid<T>,
    omega: T,
    v: Vec<T>,
    coupling: bool,
}

impl<T: Real> Functional<T> {
    pub fn new(grid: &RadialGrid<T>, omega: T, potential: &Potential<T>) -> Self {
        Self {
            grid: grid.clone(),
            omega,
            v: potential.values_on(grid),
            coupling: true,
        }
    }

    /// Drops the `ψ` term everywhere (energy, gradient, Hessian), leaving
    /// the linear problem `-½Δu - Vu = ωu`.
    pub fn with_coupling(mut self, on: bool) -> Self {
        self.coupling = on;
        self
    }

    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn coupling(&self) -> bool {
        self.coupling
    }

    /// `Δ⁻¹ u²`.
    pub fn psi(&self, u: &[T]) -> Vec<T> {
        let rho: Vec<T> = u.iter().map(|&x| x * x).collect();
        newton_potential(&self.grid, &rho)
    }

    pub fn breakdown(&self, u: &[T]) -> EnergyBreakdown<T> {
        let g = &self.grid;
        let half = T::c(0.5);
        let kinetic = T::c(0.25) * g.dirichlet_form(u, u);
        let self_interaction = if self.coupling {
            T::PI() * potential_dirichlet(g, &self.psi(u))
        } else {
            T::zero()
        };
        let (mut vu2, mut u2) = (T::zero(), T::zero());
        for ((&w, &x), &v) in g.weights().iter().zip(u).zip(&self.v) {
            vu2 = vu2 + w * v * x * x;
            u2 = u2 + w * x * x;
        }
        let potential = -half * vu2;
        let mass = -half * self.omega * u2;
        EnergyBreakdown {
            kinetic,
            self_interaction,
            potential,
            mass,
            total: kinetic + self_interaction + potential + mass,
        }
    }

    pub fn value(&self, u: &[T]) -> T {
        self.breakdown(u).total
    }

    /// Euclidean gradient `∂J` and `ψ`.
    pub fn gradient_with_psi(&self, u: &[T]) -> (Vec<T>, Vec<T>) {
        let g = &self.grid;
        let psi = if self.coupling {
            self.psi(u)
        } else {
            vec![T::zero(); u.len()]
        };
        let mut grad = g.stiffness_apply(u);
        let four_pi = T::four_pi();
        for i in 0..u.len() {
            let w = g.weights()[i];
            grad[i] = T::c(0.5) * grad[i] - w * (four_pi * psi[i] + self.v[i] + self.omega) * u[i];
        }
        (grad, psi)
    }

    pub fn gradient(&self, u: &[T]) -> Vec<T> {
        self.gradient_with_psi(u).0
    }

    /// L² representation `W⁻¹ ∂J`, i.e. `-½Δu - 4πψu - Vu - ωu`.
    pub fn l2_gradient(&self, u: &[T]) -> Vec<T> {
        let grad = self.gradient(u);
        grad.iter()
            .zip(self.grid.weights())
            .map(|(&d, &w)| d / w)
            .collect()
    }

    /// `‖W⁻¹ ∂J‖_{L²} = (Σ ∂J_i² / w_i)^{1/2}`.
    pub fn residual_of(&self, grad: &[T]) -> T {
        grad.iter()
            .zip(self.grid.weights())
            .map(|(&d, &w)| d * d / w)
            .sum::<T>()
            .sqrt()
    }

    pub fn residual(&self, u: &[T]) -> T {
        self.residual_of(&self.gradient(u))
    }

    /// `H(u) d` (matrix-free; the coupling term costs one Poisson solve).
    pub fn hessian_apply(&self, u: &[T], d: &[T]) -> Vec<T> {
        let g = &self.grid;
        let four_pi = T::four_pi();
        let psi = if self.coupling {
            self.psi(u)
        } else {
            vec![T::zero(); u.len()]
        };
        let mut out = g.stiffness_apply(d);
        for i in 0..u.len() {
            let w = g.weights()[i];
            out[i] = T::c(0.5) * out[i] - w * (four_pi * psi[i] + self.v[i] + self.omega) * d[i];
        }
        if self.coupling {
            // δψ = Δ⁻¹(2ud) = -L⁻¹ W (2ud)
            let src: Vec<T> = u.iter().zip(d).map(|(&a, &b)| T::c(2.0) * a * b).collect();
            let dpsi = newton_potential(g, &src);
            for i in 0..u.len() {
                out[i] = out[i] - four_pi * g.weights()[i] * u[i] * dpsi[i];
            }
        }
        out
    }

    /// Solves `H(u) δ = rhs`. With coupling this is the interleaved
    /// `(δ_i, χ_i)` system
    ///
    /// ```text
    /// [ A      8πWU ] [δ]   [rhs]
    /// [ 8πWU  -8πL  ] [χ] = [ 0 ]
    /// ```
    ///
    /// with bandwidth 2, so the cost stays linear in the grid size.
    pub fn newton_solve(&self, u: &[T], rhs: &[T]) -> Result<Vec<T>> {
        let g = &self.grid;
        let n = u.len();
        let four_pi = T::four_pi();
        let eight_pi = four_pi + four_pi;
        let (_, kd, _) = g.stiffness_bands();
        let c = g.conductances();
        let w = g.weights();
        let psi = if self.coupling {
            self.psi(u)
        } else {
            vec![T::zero(); n]
        };
        let half = T::c(0.5);
        let a_diag: Vec<T> = (0..n)
            .map(|i| half * kd[i] - w[i] * (four_pi * psi[i] + self.v[i] + self.omega))
            .collect();

        let (m, stride) = if self.coupling {
            (BandedMatrix::zeros(2 * n, 2, 2), 2)
        } else {
            (BandedMatrix::zeros(n, 1, 1), 1)
        };
        let mut m = m;
        for i in 0..n {
            let di = stride * i;
            m.add(di, di, a_diag[i]);
            if i + 1 < n {
                let dj = stride * (i + 1);
                m.add(di, dj, -half * c[i]);
                m.add(dj, di, -half * c[i]);
            }
        }
        if self.coupling {
            let r_max = g.r_max();
            for i in 0..n {
                let (d, x) = (2 * i, 2 * i + 1);
                let cpl = eight_pi * w[i] * u[i];
                m.add(d, x, cpl);
                m.add(x, d, cpl);
                let mut l_ii = kd[i];
                if i + 1 == n {
                    l_ii = l_ii + four_pi * r_max;
                }
                m.add(x, x, -eight_pi * l_ii);
                if i + 1 < n {
                    m.add(x, x + 2, eight_pi * c[i]);
                    m.add(x + 2, x, eight_pi * c[i]);
                }
            }
        }

        // symmetric equilibration
        let size = m.len();
        let (kl, ku) = if self.coupling { (2, 2) } else { (1, 1) };
        let scale: Vec<T> = (0..size)
            .map(|i| {
                let lo = i.saturating_sub(kl);
                let hi = (i + ku).min(size - 1);
                let big = (lo..=hi).fold(T::zero(), |acc, j| acc.max(m.get(i, j).abs()));
                if big > T::zero() {
                    T::one() / big.sqrt()
                } else {
                    T::one()
                }
            })
            .collect();
        let mut scaled = BandedMatrix::zeros(size, kl, ku);
        for i in 0..size {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(size - 1);
            for j in lo..=hi {
                let v = m.get(i, j);
                if v != T::zero() {
                    scaled.add(i, j, scale[i] * v * scale[j]);
                }
            }
        }
        let lu = scaled.factor()?;
        let mut b = vec![T::zero(); size];
        for i in 0..n {
            b[stride * i] = rhs[i] * scale[stride * i];
        }
        let y = lu.solve(&b);
        let delta: Vec<T> = (0..n).map(|i| y[stride * i] * scale[stride * i]).collect();
        if delta.iter().all(|x| x.is_finite()) {
            Ok(delta)
        } else {
            Err(Error::NonFinite("Newton step"))
        }
    }
}

/// `J_ω(u)` term by term.
pub fn j_energy<T: Real>(u: &RadialFunction<T>, omega: T, v: &Potential<T>) -> EnergyBreakdown<T> {
    Functional::new(u.grid(), omega, v).breakdown(u.values())
}

/// `F_ω(u, φ) = ¼∫|∇u|² - ½∫φu² - (1/16π)∫|∇φ|² - ½∫Vu² - (ω/2)∫u²`,
/// with `φ` continued harmonically beyond the grid.
pub fn f_energy<T: Real>(
    u: &RadialFunction<T>,
    phi: &RadialFunction<T>,
    omega: T,
    v: &Potential<T>,
) -> Result<T> {
    u.check_same_grid(phi)?;
    let g = u.grid();
    let half = T::c(0.5);
    let (uv, pv) = (u.values(), phi.values());
    let kinetic = T::c(0.25) * g.dirichlet_form(uv, uv);
    let field = potential_dirichlet(g, pv) / (T::four_pi() * T::c(4.0));
    let mut rest = T::zero();
    for (((&w, &x), &p), &r) in g.weights().iter().zip(uv).zip(pv).zip(g.nodes()) {
        rest = rest + w * x * x * (p + v.eval(r) + omega);
    }
    Ok(kinetic - field - half * rest)
}

/// L² representation of `J_ω'(u)` (coupling on).
pub fn j_gradient<T: Real>(u: &RadialFunction<T>, omega: T, v: &Potential<T>) -> RadialFunction<T> {
    let f = Functional::new(u.grid(), omega, v);
    RadialFunction::from_parts(u.grid(), f.l2_gradient(u.values()))
}

/// Coefficients of `J_ω(λũ) = aλ² + bλ⁴ - cλ² + dλ²` for a unit-H¹
/// direction `ũ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayDecomposition<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> RayDecomposition<T> {
    pub fn energy_at(&self, lambda: T) -> T {
        let l2 = lambda * lambda;
        (self.a - self.c + self.d) * l2 + self.b * l2 * l2
    }
}

/// Normalizes `u` to unit H¹ norm (`∫|∇u|² + ∫u² = 1`) and splits `J_ω` along the ray.
pub fn ray_decomposition<T: Real>(
    u: &RadialFunction<T>,
    omega: T,
    v: &Potential<T>,
) -> Result<(RadialFunction<T>, RayDecomposition<T>)> {
    let h1 = u.norm_h1_squared();
    if !(h1 > T::zero()) {
        return Err(Error::InvalidArgument(
            "ray direction must be nonzero".into(),
        ));
    }
    let unit = u.scaled(T::one() / h1.sqrt());
    let e = j_energy(&unit, omega, v);
    Ok((
        unit,
        RayDecomposition {
            a: e.kinetic,
            b: e.self_interaction,
            c: -e.potential,
            d: e.mass,
        },
    ))
}
