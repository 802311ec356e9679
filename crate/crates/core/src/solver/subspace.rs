use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{bump_profile, scaled_annulus_bump, RadialFunction, RadialGrid};
use crate::linalg::symmetric_eigenvalues;
use crate::potentials::{check_hypotheses, Potential};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceOptions<T> {
    pub safety_factor: T,
    /// Smallest dilation tried before giving up on negativity.
    pub lambda_min: T,
    /// Coefficient-sphere samples used to report the sampled Rayleigh sup.
    pub samples: usize,
    pub seed: u64,
    /// The working grid is extended to `margin · 2ρ_k / λ̄`.
    pub margin: T,
    /// Nodes of the reference grid on which each bump's search runs.
    pub search_nodes: usize,
}

impl<T: Real> Default for SubspaceOptions<T> {
    fn default() -> Self {
        Self {
            safety_factor: T::c(0.5),
            lambda_min: T::c(1e-6),
            samples: 1000,
            seed: 0,
            margin: T::c(1.25),
            search_nodes: 2000,
        }
    }
}

/// Span of `k` dilated annulus bumps on which `½∫|∇v|² - ∫Vv² ≤ -ν ∫v²`.
#[derive(Debug, Clone)]
pub struct SubspaceFamily<T> {
    /// Unit-L² bumps on `[ρ_i/λ̄, 2ρ_i/λ̄]`, `ρ_i = 2^{i-1}`.
    pub basis: Vec<RadialFunction<T>>,
    pub lambda_bar: T,
    /// Per-bump dilations found by the halving search.
    pub lambdas: Vec<T>,
    pub inner_radii: Vec<T>,
    pub nu: T,
    /// Largest Rayleigh value over the construction samples (`≤ -ν`).
    pub sampled_sup: T,
    pub samples: usize,
    pub k: usize,
    /// `R_ij = ½∫∇b_i·∇b_j - ∫V b_i b_j`, row-major `k × k`.
    pub rayleigh_matrix: Vec<T>,
}

impl<T: Real> SubspaceFamily<T> {
    pub fn grid(&self) -> &RadialGrid<T> {
        self.basis[0].grid()
    }

    /// `Σ c_i b_i`.
    pub fn combine(&self, coeffs: &[T]) -> RadialFunction<T> {
        let mut out = self.grid().zeros();
        for (b, &c) in self.basis.iter().zip(coeffs) {
            out.axpy(c, b);
        }
        out
    }

    /// Rayleigh value `cᵀ R c` of a coefficient vector.
    pub fn rayleigh(&self, coeffs: &[T]) -> T {
        quad_form(&self.rayleigh_matrix, coeffs)
    }

    /// Gram matrix `⟨b_i, b_j⟩`, row-major.
    pub fn gram(&self) -> Vec<T> {
        let k = self.k;
        let mut g = vec![T::zero(); k * k];
        for i in 0..k {
            for j in 0..k {
                g[i * k + j] = self.basis[i].dot(&self.basis[j]);
            }
        }
        g
    }
}

pub(crate) fn quad_form<T: Real>(m: &[T], c: &[T]) -> T {
    let k = c.len();
    let mut s = T::zero();
    for i in 0..k {
        for j in 0..k {
            s = s + c[i] * m[i * k + j] * c[j];
        }
    }
    s
}

/// Uniform points on the unit sphere of `ℝ^k`, one per antipodal pair.
pub(crate) fn sphere_samples<T: Real>(k: usize, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut c: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let flip = if c.iter().find(|x| **x != 0.0).copied().unwrap_or(1.0) < 0.0 {
            -1.0
        } else {
            1.0
        };
        for x in &mut c {
            *x *= flip / norm;
        }
        out.push(c.into_iter().map(T::c).collect());
    }
    out
}

fn rayleigh_matrix<T: Real>(basis: &[RadialFunction<T>], v: &[T]) -> Vec<T> {
    let k = basis.len();
    let g = basis[0].grid();
    let mut m = vec![T::zero(); k * k];
    for i in 0..k {
        for j in i..k {
            let (bi, bj) = (basis[i].values(), basis[j].values());
            let pot: T = g
                .weights()
                .iter()
                .zip(bi)
                .zip(bj)
                .zip(v)
                .map(|(((&w, &a), &b), &vv)| w * vv * a * b)
                .sum();
            let val = T::c(0.5) * g.dirichlet_form(bi, bj) - pot;
            m[i * k + j] = val;
            m[j * k + i] = val;
        }
    }
    m
}

/// Largest sampled Rayleigh value over `samples` points of the unit sphere of the span.
pub fn sample_rayleigh_sup<T: Real>(family: &SubspaceFamily<T>, samples: usize, seed: u64) -> T {
    sphere_samples::<T>(family.k, samples, seed)
        .iter()
        .map(|c| family.rayleigh(c))
        .fold(T::neg_infinity(), |a, b| a.max(b))
}

pub fn build_lemma10_subspace<T: Real>(
    k: usize,
    v: &Potential<T>,
    grid: &RadialGrid<T>,
    omega: T,
) -> Result<SubspaceFamily<T>> {
    build_lemma10_subspace_with(k, v, grid, omega, &SubspaceOptions::default())
}

/// Builds the family on dyadic annuli `[ρ_i, 2ρ_i]`, `ρ_i = 2^{i-1}`:
///
/// 1. for each bump, halve `λ` from 1 until the dilated bump
///    `λ^{3/2} b(λr)` has a negative Rayleigh value;
/// 2. take `λ̄ = safety_factor · min λ_i` and dilate every bump by `λ̄`
///    on a grid extended to hold the outermost support;
/// 3. `ν = -max` of the Rayleigh form over the unit sphere of the span
///    (the largest eigenvalue of the `k × k` form matrix, which bounds every
///    sample from above).
///
/// The search fails with the (V4) diagnostic when no `λ ≥ lambda_min`
/// gives negativity.
pub fn build_lemma10_subspace_with<T: Real>(
    k: usize,
    v: &Potential<T>,
    grid: &RadialGrid<T>,
    _omega: T,
    opts: &SubspaceOptions<T>,
) -> Result<SubspaceFamily<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "subspace dimension must be >= 1".into(),
        ));
    }
    if !(opts.safety_factor > T::zero() && opts.safety_factor < T::one()) {
        return Err(Error::InvalidArgument(
            "safety_factor must lie in (0, 1)".into(),
        ));
    }
    let two = T::c(2.0);
    let inner_radii: Vec<T> = (0..k).map(|i| two.powi(i as i32)).collect();
    let mut lambdas = Vec::with_capacity(k);
    for (idx, &rho) in inner_radii.iter().enumerate() {
        // R(λ) = λ² ½∫|∇b|² - ∫ V(s/λ) b(s)² ds on b's own grid
        let reference = RadialGrid::uniform(opts.search_nodes.max(16), rho + rho)?;
        let b = reference.sample(|r| bump_profile(r, rho));
        let b = b.scaled(T::one() / b.norm_l2());
        let half_dirichlet = T::c(0.5) * reference.dirichlet_form(b.values(), b.values());
        let rayleigh = |lam: T| {
            let pot: T = reference
                .nodes()
                .iter()
                .zip(reference.weights())
                .zip(b.values())
                .map(|((&s, &w), &bv)| w * v.eval(s / lam) * bv * bv)
                .sum();
            lam * lam * half_dirichlet - pot
        };
        let mut lam = T::one();
        let mut value = rayleigh(lam);
        while !(value < T::zero()) {
            let next = lam * T::c(0.5);
            if next < opts.lambda_min {
                let report = check_hypotheses(v, grid)?;
                return Err(Error::NegativityUnreachable {
                    index: idx + 1,
                    lambda: lam.as_f64(),
                    rayleigh: value.as_f64(),
                    diagnostic: report.v4_diagnostic(),
                });
            }
            lam = next;
            value = rayleigh(lam);
        }
        lambdas.push(lam);
    }
    let lambda_min = lambdas.iter().copied().fold(T::infinity(), T::min);
    let lambda_bar = opts.safety_factor * lambda_min;
    let outer = (inner_radii[k - 1] + inner_radii[k - 1]) / lambda_bar;
    let work = grid.extended_to(outer * opts.margin)?;
    let mut basis = Vec::with_capacity(k);
    for &rho in &inner_radii {
        basis.push(scaled_annulus_bump(rho, lambda_bar, &work)?);
    }
    let vv = v.values_on(&work);
    let rmat = rayleigh_matrix(&basis, &vv);
    let top = *symmetric_eigenvalues(rmat.clone(), k)
        .last()
        .expect("k >= 1");
    let mut family = SubspaceFamily {
        basis,
        lambda_bar,
        lambdas,
        inner_radii,
        nu: -top,
        sampled_sup: T::neg_infinity(),
        samples: opts.samples,
        k,
        rayleigh_matrix: rmat,
    };
    family.sampled_sup = sample_rayleigh_sup(&family, opts.samples, opts.seed);
    family.nu = -top.max(family.sampled_sup);
    if !(family.nu > T::zero()) {
        return Err(Error::NegativityUnreachable {
            index: 0,
            lambda: lambda_bar.as_f64(),
            rayleigh: (-family.nu).as_f64(),
            diagnostic: "the span of the dilated bumps is not uniformly negative".into(),
        });
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid<f64> {
        RadialGrid::logarithmic(3000, 1e-6, 60.0).unwrap()
    }

    #[test]
    fn coulomb_single_bump() {
        let v = Potential::coulomb(1.0).unwrap();
        let fam = build_lemma10_subspace(1, &v, &grid(), -0.1).unwrap();
        assert!(fam.nu > 0.0);
        assert!(fam.lambda_bar > 0.0 && fam.lambda_bar < fam.lambdas[0]);
        assert!((fam.basis[0].norm_l2() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn coulomb_five_bumps_orthonormal() {
        let v = Potential::coulomb(1.0).unwrap();
        let fam = build_lemma10_subspace(5, &v, &grid(), -0.1).unwrap();
        let g = fam.gram();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[i * 5 + j] - want).abs() < 1e-8);
                if i != j {
                    let prod = fam.basis[i]
                        .values()
                        .iter()
                        .zip(fam.basis[j].values())
                        .all(|(a, b)| a * b == 0.0);
                    assert!(prod);
                }
            }
        }
        assert!(sample_rayleigh_sup(&fam, 10 * fam.samples, 7) <= -fam.nu);
    }

    #[test]
    fn yukawa_fails_with_v4_diagnostic() {
        let v = Potential::yukawa(1.0, 1.0).unwrap();
        match build_lemma10_subspace(1, &v, &grid(), -0.1) {
            Err(Error::NegativityUnreachable { diagnostic, .. }) => {
                assert!(diagnostic.contains("(V4) fails"), "{diagnostic}")
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn rayleigh_form_matches_direct_evaluation() {
        let v = Potential::coulomb(1.0).unwrap();
        let fam = build_lemma10_subspace(3, &v, &grid(), -0.1).unwrap();
        let c = [0.6, -0.48, 0.64];
        let u = fam.combine(&c);
        let g = u.grid();
        let direct = 0.5 * g.dirichlet_form(u.values(), u.values())
            - g.integrate_values(
                &u.values()
                    .iter()
                    .zip(g.nodes())
                    .map(|(x, &r)| v.eval(r) * x * x)
                    .collect::<Vec<_>>(),
            );
        assert!((direct - fam.rayleigh(&c)).abs() < 1e-12);
    }
}
