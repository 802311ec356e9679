use serde::Serialize;

use crate::error::{Error, Result};
use crate::poisson::newton_potential;
use crate::potentials::Potential;
use crate::real::Real;

use super::subspace::{quad_form, sphere_samples, SubspaceFamily};

/// Sampled upper bound for `c_k^ω` over `h_λ(V_k ∩ B)`, `h_λ(u) = λ^{1/2} u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimaxEstimate<T> {
    pub k: usize,
    pub c_k_upper: T,
    pub threshold: T,
    pub passes: bool,
    pub lambda_used: T,
    pub samples: usize,
}

/// Per-family precomputation: on the span of disjoint bumps
///
/// ```text
/// J_ω(λ^{1/2} Σ c_i b_i) = λ cᵀQc + λ² Σ_ij c_i² c_j² S_ij
/// ```
///
/// with `Q` the quadratic part of `J_ω` and `S_ij = -π ∫ (Δ⁻¹b_i²) b_j²`.
pub(crate) struct SpanEnergy<T> {
    k: usize,
    q: Vec<T>,
    s: Vec<T>,
}

impl<T: Real> SpanEnergy<T> {
    pub(crate) fn new(family: &SubspaceFamily<T>, omega: T, v: &Potential<T>) -> Self {
        let k = family.k;
        let g = family.grid();
        let w = g.weights();
        let vv = v.values_on(g);
        let half = T::c(0.5);
        let mut q = vec![T::zero(); k * k];
        let mut s = vec![T::zero(); k * k];
        let squares: Vec<Vec<T>> = family
            .basis
            .iter()
            .map(|b| b.values().iter().map(|&x| x * x).collect())
            .collect();
        let psis: Vec<Vec<T>> = squares.iter().map(|sq| newton_potential(g, sq)).collect();
        for i in 0..k {
            for j in 0..k {
                let (bi, bj) = (family.basis[i].values(), family.basis[j].values());
                let mut pot = T::zero();
                let mut mass = T::zero();
                for n in 0..g.len() {
                    let p = w[n] * bi[n] * bj[n];
                    pot = pot + p * vv[n];
                    mass = mass + p;
                }
                q[i * k + j] =
                    T::c(0.25) * g.dirichlet_form(bi, bj) - half * pot - half * omega * mass;
                s[i * k + j] = -T::PI()
                    * psis[i]
                        .iter()
                        .zip(&squares[j])
                        .zip(w)
                        .map(|((&p, &b2), &wn)| wn * p * b2)
                        .sum::<T>();
            }
        }
        Self { k, q, s }
    }

    /// `(cᵀQc, Σ c_i²c_j² S_ij)`.
    pub(crate) fn parts(&self, c: &[T]) -> (T, T) {
        let sq: Vec<T> = c.iter().map(|&x| x * x).collect();
        (quad_form(&self.q, c), quad_form(&self.s, &sq))
    }

    pub(crate) fn k(&self) -> usize {
        self.k
    }
}

fn lambda_grid<T: Real>(points: usize) -> Vec<T> {
    (1..=points)
        .map(|j| T::from_usize_lossy(j) / T::from_usize_lossy(points))
        .collect()
}

pub fn estimate_minimax_level<T: Real>(
    family: &SubspaceFamily<T>,
    omega: T,
    v: &Potential<T>,
    samples: usize,
) -> Result<MinimaxEstimate<T>> {
    estimate_minimax_level_with(family, omega, v, samples, 0, 400)
}

/// `c_k_upper = min_λ sup_c J_ω(λ^{1/2} Σ c_i b_i)` over `samples`
/// coefficient vectors on the unit sphere (one per antipodal pair) and
/// `lambda_points` equispaced `λ ∈ (0, 1]`.
pub fn estimate_minimax_level_with<T: Real>(
    family: &SubspaceFamily<T>,
    omega: T,
    v: &Potential<T>,
    samples: usize,
    seed: u64,
    lambda_points: usize,
) -> Result<MinimaxEstimate<T>> {
    if family.basis.is_empty() || family.k == 0 {
        return Err(Error::EmptyFamily);
    }
    if !(omega < T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "minimax levels need omega < 0, got {omega}"
        )));
    }
    if samples < 100 * family.k {
        return Err(Error::InvalidArgument(format!(
            "need at least {} sphere samples for k = {}, got {samples}",
            100 * family.k,
            family.k
        )));
    }
    if lambda_points == 0 {
        return Err(Error::InvalidArgument(
            "lambda grid must be non-empty".into(),
        ));
    }
    let span = SpanEnergy::new(family, omega, v);
    let parts: Vec<(T, T)> = sphere_samples::<T>(span.k(), samples, seed)
        .iter()
        .map(|c| span.parts(c))
        .collect();
    let mut best = (T::infinity(), T::one());
    for lam in lambda_grid::<T>(lambda_points) {
        let sup = parts
            .iter()
            .map(|&(q, s)| lam * q + lam * lam * s)
            .fold(T::neg_infinity(), T::max);
        if sup < best.0 {
            best = (sup, lam);
        }
    }
    let threshold = -omega * T::c(0.5);
    Ok(MinimaxEstimate {
        k: family.k,
        c_k_upper: best.0,
        threshold,
        passes: best.0 < threshold,
        lambda_used: best.1,
        samples,
    })
}

/// Fit of `J_ω(λ^{1/2}u) ≤ -(λ/2)ν' + c'λ² - (ω/2)λ` over sampled `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DilationBoundFit<T> {
    pub nu_fit: T,
    pub c_fit: T,
    /// `max (J - bound)` over samples and the λ grid; `≤ 0` means the curve dominates.
    pub max_violation: T,
}

pub fn dilation_bound_check<T: Real>(
    family: &SubspaceFamily<T>,
    omega: T,
    v: &Potential<T>,
    samples: usize,
    seed: u64,
) -> Result<DilationBoundFit<T>> {
    if family.basis.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let span = SpanEnergy::new(family, omega, v);
    let half = T::c(0.5);
    let coeffs = sphere_samples::<T>(span.k(), samples, seed);
    let parts: Vec<(T, T)> = coeffs.iter().map(|c| span.parts(c)).collect();
    // Q = ½R - ω/2 on the unit sphere
    let worst_r = parts
        .iter()
        .map(|&(q, _)| (q + half * omega) / half)
        .fold(T::neg_infinity(), T::max);
    let nu_fit = family.nu.min(-worst_r);
    let c_fit = parts.iter().map(|&(_, s)| s).fold(T::zero(), T::max);
    let mut max_violation = T::neg_infinity();
    for lam in lambda_grid::<T>(400) {
        let bound = -half * lam * nu_fit + c_fit * lam * lam - half * omega * lam;
        for &(q, s) in &parts {
            max_violation = max_violation.max(lam * q + lam * lam * s - bound);
        }
    }
    Ok(DilationBoundFit {
        nu_fit,
        c_fit,
        max_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::j_energy;
    use crate::grid::RadialGrid;
    use crate::solver::build_lemma10_subspace;

    #[test]
    fn span_energy_matches_direct_evaluation() {
        let g = RadialGrid::<f64>::logarithmic(3000, 1e-6, 60.0).unwrap();
        let v = Potential::coulomb(1.0).unwrap();
        let fam = build_lemma10_subspace(3, &v, &g, -0.1).unwrap();
        let span = SpanEnergy::new(&fam, -0.1, &v);
        for c in sphere_samples::<f64>(3, 5, 3) {
            let (q, s) = span.parts(&c);
            let u = fam.combine(&c);
            for lam in [1.0, 0.3] {
                let direct = j_energy(&u.scaled(f64::sqrt(lam)), -0.1, &v).total;
                let fast = lam * q + lam * lam * s;
                assert!(
                    (direct - fast).abs() < 1e-12 * (1.0 + direct.abs()),
                    "{direct} {fast}"
                );
            }
        }
    }

    #[test]
    fn coulomb_single_level_below_threshold() {
        let g = RadialGrid::<f64>::logarithmic(3000, 1e-6, 60.0).unwrap();
        let v = Potential::coulomb(1.0).unwrap();
        let fam = build_lemma10_subspace(1, &v, &g, -0.1).unwrap();
        let est = estimate_minimax_level(&fam, -0.1, &v, 300).unwrap();
        assert!(est.passes && est.c_k_upper < 0.05);
        assert!(estimate_minimax_level(&fam, -0.1, &v, 50).is_err());
        assert!(estimate_minimax_level(&fam, 0.1, &v, 300).is_err());
        let fit = dilation_bound_check(&fam, -0.1, &v, 300, 1).unwrap();
        assert!(fit.nu_fit > 0.0 && fit.c_fit > 0.0 && fit.max_violation <= 1e-8);
    }
}
