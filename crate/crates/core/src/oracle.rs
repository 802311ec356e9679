//! Reference solutions that share no code path with the solvers: analytic
//! hydrogen s-states, a tridiagonal eigensolver for `-½Δ - V` in the
//! variable `w = r u`, and an `O(n²)` Newton-potential quadrature.

use crate::error::{Error, Result};
use crate::grid::{GridKind, RadialFunction, RadialGrid};
use crate::linalg::SymTridiagonal;
use crate::potentials::Potential;
use crate::real::Real;

#[derive(Debug, Clone)]
pub struct LinearSpectrum<T> {
    pub eigenvalues: Vec<T>,
    pub eigenfunctions: Vec<RadialFunction<T>>,
}

fn normalize_positive<T: Real>(mut f: RadialFunction<T>) -> Result<RadialFunction<T>> {
    let norm = f.norm_l2();
    if !(norm > T::zero() && norm.is_finite()) {
        return Err(Error::NonFinite("eigenfunction normalization"));
    }
    let first = f
        .values()
        .iter()
        .copied()
        .find(|v| v.abs() > norm * T::epsilon())
        .unwrap_or(T::one());
    let s = if first < T::zero() {
        -T::one()
    } else {
        T::one()
    } / norm;
    for v in f.values_mut() {
        *v = *v * s;
    }
    Ok(f)
}

/// `L^{(1)}_k(x)` by the three-term recurrence.
fn laguerre_1<T: Real>(k: usize, x: T) -> T {
    let mut prev = T::one();
    if k == 0 {
        return prev;
    }
    let mut cur = T::c(2.0) - x;
    for j in 1..k {
        let jf = T::from_usize_lossy(j);
        let next =
            ((T::c(2.0) * jf + T::c(2.0) - x) * cur - (jf + T::one()) * prev) / (jf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// `(ω_n, u_n)` with `ω_n = -Z²/(2n²)` and `u_n ∝ L^{(1)}_{n-1}(2Zr/n) e^{-Zr/n}`.
pub fn hydrogen_eigen<T: Real>(
    n: usize,
    z: T,
    grid: &RadialGrid<T>,
) -> Result<(T, RadialFunction<T>)> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "principal quantum number must be >= 1".into(),
        ));
    }
    if !(z > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "Z must be positive, got {z}"
        )));
    }
    let nf = T::from_usize_lossy(n);
    let omega = -z * z / (T::c(2.0) * nf * nf);
    let u = grid.sample(|r| {
        let x = T::c(2.0) * z * r / nf;
        laguerre_1(n - 1, x) * (-x * T::c(0.5)).exp()
    });
    Ok((omega, normalize_positive(u)?))
}

/// Lowest `count` eigenpairs of `-½Δ - V` on the grid.
///
/// With `w = r u` the operator becomes `-½ w'' - V w`, discretized with
/// Dirichlet ends (a virtual node at the origin and the last grid node) and
/// the lumped mass `m_i = w_i / 4πr_i²`, which makes the eigenfunctions
/// exactly orthogonal in the grid's L² inner product.
pub fn linear_eigensolve<T: Real>(
    v: &Potential<T>,
    grid: &RadialGrid<T>,
    count: usize,
) -> Result<LinearSpectrum<T>> {
    let n = grid.len();
    if count == 0 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    if count + 1 > n {
        return Err(Error::InvalidArgument(format!(
            "requested {count} eigenpairs from a grid with {n} nodes"
        )));
    }
    let r = grid.nodes();
    let m = n - 1; // interior unknowns 0..m, w_{n-1} = 0
    let half = T::c(0.5);
    let mass: Vec<T> = (0..m)
        .map(|i| grid.weights()[i] / (T::four_pi() * r[i] * r[i]))
        .collect();
    let inv_h: Vec<T> = (0..n)
        .map(|i| {
            let left = if i == 0 { T::zero() } else { r[i - 1] };
            T::one() / (r[i] - left)
        })
        .collect();
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m.saturating_sub(1));
    for i in 0..m {
        let s = half * (inv_h[i] + inv_h[i + 1]) - mass[i] * v.eval(r[i]);
        diag.push(s / mass[i]);
        if i + 1 < m {
            off.push(-half * inv_h[i + 1] / (mass[i] * mass[i + 1]).sqrt());
        }
    }
    let mat = SymTridiagonal::new(diag, off);
    let mut eigenvalues = Vec::with_capacity(count);
    let mut eigenfunctions = Vec::with_capacity(count);
    for k in 0..count {
        let lambda = mat.eigenvalue(k);
        let y = mat.eigenvector(lambda)?;
        let mut u = vec![T::zero(); n];
        for i in 0..m {
            u[i] = y[i] / (mass[i].sqrt() * r[i]);
        }
        eigenvalues.push(lambda);
        eigenfunctions.push(normalize_positive(RadialFunction::new(grid, u)?)?);
    }
    Ok(LinearSpectrum {
        eigenvalues,
        eigenfunctions,
    })
}

/// `φ(r) = -∫ ρ(s) min(1/r, 1/s) s² ds` for `ρ = 4πu²` by direct double
/// summation, using plain trapezoid weights in `r` (uniform grids) or in
/// `ln r` (logarithmic grids).
pub fn brute_force_phi<T: Real>(u: &RadialFunction<T>) -> RadialFunction<T> {
    let rho: Vec<T> = u.values().iter().map(|&x| T::four_pi() * x * x).collect();
    brute_force_potential(u.grid(), &rho)
}

/// Same quadrature for an arbitrary source `ρ` (solves `Δφ = ρ`).
pub fn brute_force_potential<T: Real>(grid: &RadialGrid<T>, rho: &[T]) -> RadialFunction<T> {
    let r = grid.nodes();
    let n = r.len();
    let half = T::c(0.5);
    let weights: Vec<T> = match grid.kind() {
        GridKind::Uniform => (0..n)
            .map(|j| {
                let left = if j == 0 { T::zero() } else { r[j - 1] };
                let right = if j + 1 == n { r[j] } else { r[j + 1] };
                half * (right - left) * r[j] * r[j]
            })
            .collect(),
        GridKind::Logarithmic => (0..n)
            .map(|j| {
                let ls = |a: T, b: T| (b / a).ln();
                let left = if j == 0 {
                    T::zero()
                } else {
                    ls(r[j - 1], r[j])
                };
                let right = if j + 1 == n {
                    T::zero()
                } else {
                    ls(r[j], r[j + 1])
                };
                let mut wj = half * (left + right) * r[j] * r[j] * r[j];
                if j == 0 {
                    wj = wj + r[0] * r[0] * r[0] / T::c(3.0);
                }
                wj
            })
            .collect(),
    };
    let phi: Vec<T> = (0..n)
        .map(|i| {
            let ri = r[i];
            -(0..n)
                .map(|j| weights[j] * rho[j] / if r[j] > ri { r[j] } else { ri })
                .sum::<T>()
        })
        .collect();
    RadialFunction::new(grid, phi).expect("finite source gives finite potential")
}
