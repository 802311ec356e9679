//! Radial discretization of functions on ℝ³ that depend only on |x|.
//!
//! Nodes never include the origin. Quadrature weights carry the 4πr²
//! Jacobian, so `Σ w_i f(r_i)` approximates `∫_{ℝ³} f(|x|) dx` directly.
//! Gradient energies use a flux (two-point) form with harmonic shell
//! conductances `4π r_i r_{i+1} / (r_{i+1} - r_i)`; this is the form the
//! Poisson and energy modules are built on.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Node placement rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// `r_i = (i + 1) r_max / n`.
    Uniform,
    /// `r_i = r_min · (r_max / r_min)^{i / (n - 1)}`.
    Logarithmic,
}

impl std::str::FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "lin" | "linear" => Ok(GridKind::Uniform),
            "log" | "logarithmic" => Ok(GridKind::Logarithmic),
            other => Err(Error::InvalidArgument(format!(
                "unknown grid kind `{other}`"
            ))),
        }
    }
}

#[derive(Debug)]
struct GridData<T> {
    kind: GridKind,
    nodes: Vec<T>,
    weights: Vec<T>,
    conductances: Vec<T>,
    r_min: T,
}

/// Radial grid with quadrature weights. Cheap to clone (shared storage).
#[derive(Debug, Clone)]
pub struct RadialGrid<T> {
    data: Arc<GridData<T>>,
}

// Gregory end-correction coefficients for backward differences at r_max.
const GREGORY: [f64; 4] = [1.0 / 12.0, 1.0 / 24.0, 19.0 / 720.0, 3.0 / 160.0];

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Adds the right-end Gregory correction to trapezoid weights.
///
/// `jac[i]` is the factor multiplying `f(r_i)` in the integrand of the
/// integration variable, `step` its spacing. `virtual_origin` appends an
/// implicit node with zero integrand before index 0, which extends the
/// stencil without carrying weight.
fn gregory_correct<T: Real>(weights: &mut [T], jac: &[T], step: T, virtual_origin: bool) {
    let n = weights.len();
    let points = n + usize::from(virtual_origin);
    let order = GREGORY.len().min(points.saturating_sub(1));
    for m in 0..=order {
        let Some(idx) = (n - 1).checked_sub(m) else {
            continue;
        };
        let mut delta = 0.0;
        for (q, a) in GREGORY.iter().enumerate().take(order) {
            let q = q + 1;
            if m <= q {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                delta -= a * sign * binomial(q, m);
            }
        }
        weights[idx] = weights[idx] + step * T::c(delta) * jac[idx];
    }
}

impl<T: Real> RadialGrid<T> {
    /// Builds a grid. `r_min` is only used by the logarithmic kind.
    pub fn new(kind: GridKind, n: usize, r_max: T, r_min: T) -> Result<Self> {
        if !(r_max.is_finite() && r_max > T::zero()) {
            return Err(Error::InvalidGrid(format!(
                "r_max must be positive, got {r_max}"
            )));
        }
        match kind {
            GridKind::Uniform => {
                if n < 2 {
                    return Err(Error::InvalidGrid(format!(
                        "need at least 2 nodes, got {n}"
                    )));
                }
                let nf = T::from_usize_lossy(n);
                let h = r_max / nf;
                let nodes: Vec<T> = (0..n)
                    .map(|i| r_max * T::from_usize_lossy(i + 1) / nf)
                    .collect();
                let jac: Vec<T> = nodes.iter().map(|&r| T::four_pi() * r * r).collect();
                let mut weights: Vec<T> = jac.iter().map(|&g| g * h).collect();
                weights[n - 1] = weights[n - 1] * T::c(0.5);
                gregory_correct(&mut weights, &jac, h, true);
                Ok(Self::assemble(kind, nodes, weights, h))
            }
            GridKind::Logarithmic => {
                if n < 3 {
                    return Err(Error::InvalidGrid(format!(
                        "logarithmic grid needs at least 3 nodes, got {n}"
                    )));
                }
                if !(r_min.is_finite() && r_min > T::zero()) {
                    return Err(Error::InvalidGrid(format!(
                        "r_min must be positive, got {r_min}"
                    )));
                }
                if r_min >= r_max {
                    return Err(Error::InvalidGrid(format!(
                        "r_min ({r_min}) must be below r_max ({r_max})"
                    )));
                }
                let ds = (r_max / r_min).ln() / T::from_usize_lossy(n - 1);
                let mut nodes: Vec<T> = (0..n)
                    .map(|i| r_min * (ds * T::from_usize_lossy(i)).exp())
                    .collect();
                nodes[n - 1] = r_max;
                let jac: Vec<T> = nodes.iter().map(|&r| T::four_pi() * r * r * r).collect();
                let mut weights: Vec<T> = jac.iter().map(|&g| g * ds).collect();
                weights[0] = weights[0] * T::c(0.5) + jac[0] / T::c(3.0);
                weights[n - 1] = weights[n - 1] * T::c(0.5);
                gregory_correct(&mut weights, &jac, ds, false);
                Ok(Self::assemble(kind, nodes, weights, r_min))
            }
        }
    }

    pub fn uniform(n: usize, r_max: T) -> Result<Self> {
        Self::new(
            GridKind::Uniform,
            n,
            r_max,
            r_max / T::from_usize_lossy(n.max(1)),
        )
    }

    pub fn logarithmic(n: usize, r_min: T, r_max: T) -> Result<Self> {
        Self::new(GridKind::Logarithmic, n, r_max, r_min)
    }

    fn assemble(kind: GridKind, nodes: Vec<T>, weights: Vec<T>, r_min: T) -> Self {
        let conductances = nodes
            .windows(2)
            .map(|p| T::four_pi() * p[0] * p[1] / (p[1] - p[0]))
            .collect();
        Self {
            data: Arc::new(GridData {
                kind,
                nodes,
                weights,
                conductances,
                r_min,
            }),
        }
    }

    pub fn kind(&self) -> GridKind {
        self.data.kind
    }

    pub fn len(&self) -> usize {
        self.data.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.data.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.data.weights
    }

    /// Shell conductances `4π r_i r_{i+1} / (r_{i+1} - r_i)`, one per interval.
    pub fn conductances(&self) -> &[T] {
        &self.data.conductances
    }

    pub fn r_max(&self) -> T {
        *self.data.nodes.last().expect("grid has nodes")
    }

    /// First node for uniform grids, the configured `r_min` for logarithmic ones.
    pub fn r_min(&self) -> T {
        self.data.r_min
    }

    /// True when both handles share storage or have identical nodes.
    pub fn same_as(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data) || self.data.nodes == other.data.nodes
    }

    /// Same kind and node density, larger radius. Returns a clone when
    /// `r_max` already fits.
    pub fn extended_to(&self, r_max: T) -> Result<Self> {
        if r_max <= self.r_max() {
            return Ok(self.clone());
        }
        match self.kind() {
            GridKind::Uniform => {
                let h = self.r_max() / T::from_usize_lossy(self.len());
                let n = (r_max / h).ceil().to_usize().unwrap_or(self.len());
                Self::uniform(n, h * T::from_usize_lossy(n))
            }
            GridKind::Logarithmic => {
                let n = self.len();
                let ds = (self.r_max() / self.r_min()).ln() / T::from_usize_lossy(n - 1);
                let extra = ((r_max / self.r_max()).ln() / ds)
                    .ceil()
                    .to_usize()
                    .unwrap_or(0);
                let n2 = n + extra;
                let r2 = self.r_min() * (ds * T::from_usize_lossy(n2 - 1)).exp();
                Self::logarithmic(n2, self.r_min(), r2)
            }
        }
    }

    /// Rebuilds with a different node count, keeping kind and extent.
    pub fn with_len(&self, n: usize) -> Result<Self> {
        Self::new(self.kind(), n, self.r_max(), self.r_min())
    }

    /// Rebuilds with a different outer radius, keeping kind, count and `r_min`.
    pub fn with_r_max(&self, r_max: T) -> Result<Self> {
        match self.kind() {
            GridKind::Uniform => Self::uniform(self.len(), r_max),
            GridKind::Logarithmic => Self::logarithmic(self.len(), self.r_min(), r_max),
        }
    }

    pub fn sample(&self, f: impl Fn(T) -> T) -> RadialFunction<T> {
        RadialFunction {
            grid: self.clone(),
            values: self.nodes().iter().map(|&r| f(r)).collect(),
        }
    }

    pub fn zeros(&self) -> RadialFunction<T> {
        RadialFunction {
            grid: self.clone(),
            values: vec![T::zero(); self.len()],
        }
    }

    /// `Σ w_i v_i`.
    pub fn integrate_values(&self, values: &[T]) -> T {
        debug_assert_eq!(values.len(), self.len());
        self.weights()
            .iter()
            .zip(values)
            .map(|(&w, &v)| w * v)
            .sum()
    }

    /// `Σ c_i (a_{i+1} - a_i)(b_{i+1} - b_i)`: the discrete `∫ ∇a·∇b dx`.
    pub fn dirichlet_form(&self, a: &[T], b: &[T]) -> T {
        self.conductances()
            .iter()
            .enumerate()
            .map(|(i, &c)| c * (a[i + 1] - a[i]) * (b[i + 1] - b[i]))
            .sum()
    }

    /// Stiffness operator `K` with `uᵀ K u = dirichlet_form(u, u)`.
    pub fn stiffness_apply(&self, u: &[T]) -> Vec<T> {
        let n = self.len();
        let c = self.conductances();
        let mut out = vec![T::zero(); n];
        for i in 0..n - 1 {
            let flux = c[i] * (u[i + 1] - u[i]);
            out[i] = out[i] - flux;
            out[i + 1] = out[i + 1] + flux;
        }
        out
    }

    /// Tridiagonal stiffness coefficients `(lower, diag, upper)`.
    pub fn stiffness_bands(&self) -> (Vec<T>, Vec<T>, Vec<T>) {
        let n = self.len();
        let c = self.conductances();
        let mut diag = vec![T::zero(); n];
        for i in 0..n - 1 {
            diag[i] = diag[i] + c[i];
            diag[i + 1] = diag[i + 1] + c[i];
        }
        let off: Vec<T> = c.iter().map(|&x| -x).collect();
        (off.clone(), diag, off)
    }
}

/// Sampled radial profile `u(r_i)` on a grid.
#[derive(Debug, Clone)]
pub struct RadialFunction<T> {
    grid: RadialGrid<T>,
    values: Vec<T>,
}

impl<T: Real> RadialFunction<T> {
    pub fn new(grid: &RadialGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("radial function"));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Unchecked constructor for values produced by this crate's own kernels.
    pub(crate) fn from_parts(grid: &RadialGrid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_parts(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn map_with_r(&self, f: impl Fn(T, T) -> T) -> Self {
        Self::from_parts(
            &self.grid,
            self.grid
                .nodes()
                .iter()
                .zip(&self.values)
                .map(|(&r, &v)| f(r, v))
                .collect(),
        )
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    /// `self += a · x`.
    pub fn axpy(&mut self, a: T, x: &Self) {
        debug_assert!(self.grid.same_as(&x.grid));
        for (y, &xv) in self.values.iter_mut().zip(&x.values) {
            *y = *y + a * xv;
        }
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `∫ u dx`.
    pub fn integral(&self) -> T {
        self.grid.integrate_values(&self.values)
    }

    /// `∫ u v dx`.
    pub fn dot(&self, other: &Self) -> T {
        debug_assert!(self.grid.same_as(&other.grid));
        self.grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(&w, (&a, &b))| w * a * b)
            .sum()
    }

    pub fn norm_l2(&self) -> T {
        self.dot(self).sqrt()
    }

    /// Squared H¹ norm, `∫|∇u|² + ∫u²`.
    pub fn norm_h1_squared(&self) -> T {
        dirichlet_energy(self) + self.dot(self)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Radii of the first and last nonzero samples, if any.
    pub fn support(&self) -> Option<(T, T)> {
        let nodes = self.grid.nodes();
        let first = self.values.iter().position(|v| *v != T::zero())?;
        let last = self.values.iter().rposition(|v| *v != T::zero())?;
        Some((nodes[first], nodes[last]))
    }

    /// Piecewise-linear evaluation; constant below the first node, zero
    /// beyond `r_max`.
    pub fn interpolate(&self, r: T) -> T {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        if r > nodes[n - 1] {
            return T::zero();
        }
        if r <= nodes[0] {
            return self.values[0];
        }
        let hi = nodes.partition_point(|&x| x < r);
        if nodes[hi] == r {
            return self.values[hi];
        }
        let lo = hi - 1;
        let t = (r - nodes[lo]) / (nodes[hi] - nodes[lo]);
        self.values[lo] + t * (self.values[hi] - self.values[lo])
    }

    /// Piecewise-linear transfer onto another grid.
    pub fn resample(&self, grid: &RadialGrid<T>) -> Self {
        grid.sample(|r| self.interpolate(r))
    }
}

impl<T: Real> Add for &RadialFunction<T> {
    type Output = RadialFunction<T>;

    fn add(self, rhs: Self) -> RadialFunction<T> {
        debug_assert!(self.grid.same_as(&rhs.grid));
        RadialFunction::from_parts(
            &self.grid,
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }
}

impl<T: Real> Sub for &RadialFunction<T> {
    type Output = RadialFunction<T>;

    fn sub(self, rhs: Self) -> RadialFunction<T> {
        debug_assert!(self.grid.same_as(&rhs.grid));
        RadialFunction::from_parts(
            &self.grid,
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(&a, &b)| a - b)
                .collect(),
        )
    }
}

impl<T: Real> Mul<T> for &RadialFunction<T> {
    type Output = RadialFunction<T>;

    fn mul(self, rhs: T) -> RadialFunction<T> {
        self.scaled(rhs)
    }
}

impl<T: Real> Neg for &RadialFunction<T> {
    type Output = RadialFunction<T>;

    fn neg(self) -> RadialFunction<T> {
        self.map(|v| -v)
    }
}

/// Builds a grid from its description.
pub fn make_grid<T: Real>(kind: GridKind, n: usize, r_max: T, r_min: T) -> Result<RadialGrid<T>> {
    RadialGrid::new(kind, n, r_max, r_min)
}

/// `∫_{ℝ³} f dx`.
pub fn integrate<T: Real>(f: &RadialFunction<T>) -> T {
    f.integral()
}

/// `(∫ |u|^p dx)^{1/p}`, or `max |u|` for `p = ∞`.
pub fn lp_norm<T: Real>(u: &RadialFunction<T>, p: T) -> Result<T> {
    if p.is_nan() || p < T::one() {
        return Err(Error::InvalidArgument(format!(
            "L^p norm needs p >= 1, got {p}"
        )));
    }
    if p.is_infinite() {
        return Ok(u.max_abs());
    }
    let s = u
        .grid()
        .weights()
        .iter()
        .zip(u.values())
        .map(|(&w, &v)| w * v.abs().powf(p))
        .sum::<T>();
    Ok(s.powf(T::one() / p))
}

/// First derivative by second-order central differences (one-sided
/// three-point stencils at both ends), valid on non-uniform nodes.
pub fn derivative<T: Real>(u: &RadialFunction<T>) -> Result<RadialFunction<T>> {
    let r = u.grid().nodes();
    let n = r.len();
    if n < 3 {
        return Err(Error::InvalidGrid(format!(
            "derivative needs at least 3 nodes, got {n}"
        )));
    }
    let v = u.values();
    let two = T::c(2.0);
    let mut d = vec![T::zero(); n];
    for i in 1..n - 1 {
        let h1 = r[i] - r[i - 1];
        let h2 = r[i + 1] - r[i];
        d[i] = -h2 / (h1 * (h1 + h2)) * v[i - 1]
            + (h2 - h1) / (h1 * h2) * v[i]
            + h1 / (h2 * (h1 + h2)) * v[i + 1];
    }
    let (h1, h2) = (r[1] - r[0], r[2] - r[1]);
    d[0] = -(two * h1 + h2) / (h1 * (h1 + h2)) * v[0] + (h1 + h2) / (h1 * h2) * v[1]
        - h1 / (h2 * (h1 + h2)) * v[2];
    let (h1, h2) = (r[n - 2] - r[n - 3], r[n - 1] - r[n - 2]);
    d[n - 1] = h2 / (h1 * (h1 + h2)) * v[n - 3] - (h1 + h2) / (h1 * h2) * v[n - 2]
        + (two * h2 + h1) / (h2 * (h1 + h2)) * v[n - 1];
    Ok(RadialFunction::from_parts(u.grid(), d))
}

/// `∫ |∇u|² dx` in flux form, `Σ c_i (u_{i+1} - u_i)²`.
pub fn dirichlet_energy<T: Real>(u: &RadialFunction<T>) -> T {
    u.grid().dirichlet_form(u.values(), u.values())
}

/// Discrete radial Laplacian `(1/r²)(r² u')'` in flux form, `-W⁻¹ K u`.
pub fn laplacian<T: Real>(u: &RadialFunction<T>) -> RadialFunction<T> {
    let grid = u.grid();
    let ku = grid.stiffness_apply(u.values());
    RadialFunction::from_parts(
        grid,
        ku.iter()
            .zip(grid.weights())
            .map(|(&k, &w)| -k / w)
            .collect(),
    )
}

/// `r ↦ λ^{3/2} u(λ r)` resampled on `u`'s grid by linear interpolation.
pub fn scale_function<T: Real>(u: &RadialFunction<T>, lambda: T) -> Result<RadialFunction<T>> {
    if !(lambda.is_finite() && lambda > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "scale factor must be positive, got {lambda}"
        )));
    }
    let amp = lambda * lambda.sqrt();
    Ok(RadialFunction::from_parts(
        u.grid(),
        u.grid()
            .nodes()
            .iter()
            .map(|&r| amp * u.interpolate(lambda * r))
            .collect(),
    ))
}

/// Unnormalized squared-cosine bump supported on `[inner, 2·inner]`.
pub fn bump_profile<T: Real>(r: T, inner: T) -> T {
    let outer = inner + inner;
    if r <= inner || r >= outer {
        return T::zero();
    }
    let mid = inner * T::c(1.5);
    let c = (T::PI() * (r - mid) / inner).cos();
    c * c
}

/// Bump on `[inner, 2·inner]` dilated as `λ^{3/2} b(λ r)` (support
/// `[inner/λ, 2·inner/λ]`), normalized to unit discrete L² norm.
pub fn scaled_annulus_bump<T: Real>(
    inner: T,
    lambda: T,
    grid: &RadialGrid<T>,
) -> Result<RadialFunction<T>> {
    if !(inner > T::zero() && lambda > T::zero()) {
        return Err(Error::InvalidArgument(
            "annulus radius and scale must be positive".into(),
        ));
    }
    let (lo, hi) = (inner / lambda, (inner + inner) / lambda);
    if hi > grid.r_max() {
        return Err(Error::AnnulusOutsideGrid {
            inner: lo.as_f64(),
            outer: hi.as_f64(),
            r_max: grid.r_max().as_f64(),
        });
    }
    let f = grid.sample(|r| bump_profile(lambda * r, inner));
    let norm = f.norm_l2();
    if norm <= T::zero() {
        return Err(Error::InvalidGrid(format!(
            "annulus [{lo}, {hi}] contains no grid nodes"
        )));
    }
    Ok(f.scaled(T::one() / norm))
}

/// Unit-L² squared-cosine bump supported in `[i, 2i]`.
pub fn annulus_bump<T: Real>(i: usize, grid: &RadialGrid<T>) -> Result<RadialFunction<T>> {
    if i == 0 {
        return Err(Error::InvalidArgument(
            "annulus index must be positive".into(),
        ));
    }
    scaled_annulus_bump(T::from_usize_lossy(i), T::one(), grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn two_node_uniform_grid() {
        let g = RadialGrid::<f64>::uniform(2, 1.0).unwrap();
        assert_eq!(g.nodes(), &[0.5, 1.0]);
        let one = g.sample(|_| 1.0);
        assert!(rel(integrate(&one), 4.0 * std::f64::consts::PI / 3.0) < 1e-12);
    }

    #[test]
    fn constant_integrand_exact_for_large_grids() {
        let exact = |r: f64| 4.0 * std::f64::consts::PI * r.powi(3) / 3.0;
        for n in [1000, 1001, 4000] {
            let g = RadialGrid::<f64>::uniform(n, 60.0).unwrap();
            assert!(rel(g.sample(|_| 1.0).integral(), exact(60.0)) < 1e-8);
            let g = RadialGrid::<f64>::logarithmic(n, 1e-6, 60.0).unwrap();
            assert!(rel(g.sample(|_| 1.0).integral(), exact(60.0)) < 1e-8);
        }
    }

    #[test]
    fn exponential_integrand() {
        for g in [
            RadialGrid::<f64>::uniform(4000, 60.0).unwrap(),
            RadialGrid::<f64>::logarithmic(4000, 1e-6, 60.0).unwrap(),
        ] {
            let f = g.sample(|r| (-2.0 * r).exp());
            assert!(
                rel(integrate(&f), std::f64::consts::PI) < 1e-8,
                "{:?}",
                g.kind()
            );
        }
    }

    #[test]
    fn grid_invariants() {
        for g in [
            RadialGrid::<f64>::uniform(517, 13.0).unwrap(),
            RadialGrid::<f64>::logarithmic(517, 1e-5, 13.0).unwrap(),
        ] {
            assert!(g.nodes().windows(2).all(|p| p[0] < p[1]));
            assert!(g.nodes()[0] > 0.0);
            assert_eq!(g.r_max(), 13.0);
            assert!(g.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(RadialGrid::<f64>::uniform(1, 1.0).is_err());
        assert!(RadialGrid::<f64>::uniform(10, 0.0).is_err());
        assert!(RadialGrid::<f64>::logarithmic(10, 2.0, 1.0).is_err());
        assert!(RadialGrid::<f64>::logarithmic(10, 1.0, 1.0).is_err());
        assert!(RadialGrid::<f64>::logarithmic(10, -1.0, 1.0).is_err());
    }

    #[test]
    fn integrate_zero_and_ball_indicator() {
        let g = RadialGrid::<f64>::uniform(4000, 4.0).unwrap();
        assert_eq!(integrate(&g.zeros()), 0.0);
        let ball = g.sample(|r| {
            if r < 1.0 {
                1.0
            } else if r == 1.0 {
                0.5
            } else {
                0.0
            }
        });
        assert!(rel(integrate(&ball), 4.0 * std::f64::consts::PI / 3.0) < 1e-6);
        assert!(
            rel(
                lp_norm(&ball, 1.0).unwrap(),
                4.0 * std::f64::consts::PI / 3.0
            ) < 1e-6
        );
    }

    #[test]
    fn lp_norms() {
        let g = RadialGrid::<f64>::uniform(4000, 60.0).unwrap();
        assert_eq!(lp_norm(&g.zeros(), 2.0).unwrap(), 0.0);
        let u = g.sample(|r| (-r).exp());
        assert!(rel(lp_norm(&u, 2.0).unwrap(), std::f64::consts::PI.sqrt()) < 1e-7);
        assert!(rel(lp_norm(&u, f64::INFINITY).unwrap(), (-0.015f64).exp()) < 1e-12);
        assert!(lp_norm(&u, 0.5).is_err());
    }

    #[test]
    fn derivative_examples() {
        let g = RadialGrid::<f64>::uniform(200, 5.0).unwrap();
        let d = derivative(&g.sample(|_| 3.0)).unwrap();
        assert!(d.max_abs() < 1e-12);
        let d = derivative(&g.sample(|r| r * r)).unwrap();
        for (i, (&r, &v)) in g.nodes().iter().zip(d.values()).enumerate() {
            if i > 0 && i + 1 < g.len() {
                assert!(rel(v, 2.0 * r) < 1e-10);
            }
        }
        assert!(derivative(&RadialGrid::<f64>::uniform(2, 1.0).unwrap().zeros()).is_err());
    }

    #[test]
    fn derivative_is_second_order() {
        let err = |n| {
            let g = RadialGrid::<f64>::uniform(n, 20.0).unwrap();
            let d = derivative(&g.sample(|r| (-r).exp())).unwrap();
            g.nodes()[1..n - 1]
                .iter()
                .zip(&d.values()[1..n - 1])
                .filter(|(&r, _)| r > 1.0)
                .map(|(&r, &v)| (v + (-r).exp()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(400) / err(800);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn dirichlet_energy_of_exponential() {
        let g = RadialGrid::<f64>::uniform(40000, 40.0).unwrap();
        assert_eq!(dirichlet_energy(&g.zeros()), 0.0);
        let u = g.sample(|r| (-r).exp());
        assert!(rel(dirichlet_energy(&u), std::f64::consts::PI) < 1e-6);
    }

    #[test]
    fn laplacian_matches_analytic_profile() {
        let g = RadialGrid::<f64>::uniform(2000, 30.0).unwrap();
        let u = g.sample(|r| (-r * r).exp());
        let lap = laplacian(&u);
        // Δ e^{-r²} = (4r² - 6) e^{-r²}
        for (i, &r) in g.nodes().iter().enumerate().take(g.len() - 1).skip(1) {
            let exact = (4.0 * r * r - 6.0) * (-r * r).exp();
            assert!((lap.values()[i] - exact).abs() < 2e-3, "r={r}");
        }
    }

    #[test]
    fn scaling_identity_and_mass() {
        let g = RadialGrid::<f64>::logarithmic(4000, 1e-6, 60.0).unwrap();
        let u = g.sample(|r| (-r * r / 4.0).exp());
        let u = u.scaled(1.0 / u.norm_l2());
        let same = scale_function(&u, 1.0).unwrap();
        assert!(same
            .values()
            .iter()
            .zip(u.values())
            .all(|(a, b)| (a - b).abs() < 1e-15));
        for lambda in [0.25, 0.5, 2.0, 4.0] {
            let s = scale_function(&u, lambda).unwrap();
            assert!((s.norm_l2() - 1.0).abs() < 1e-5, "lambda={lambda}");
        }
        assert!(scale_function(&u, 0.0).is_err());
    }

    #[test]
    fn scaling_moves_support() {
        let g = RadialGrid::<f64>::uniform(4000, 8.0).unwrap();
        let b = annulus_bump(1, &g).unwrap();
        let s = scale_function(&b, 0.5).unwrap();
        let (lo, hi) = s.support().unwrap();
        assert!(lo >= 2.0 && hi <= 4.0, "{lo} {hi}");
    }

    #[test]
    fn bumps() {
        let g = RadialGrid::<f64>::uniform(4000, 5.0).unwrap();
        let b1 = annulus_bump(1, &g).unwrap();
        let b2 = annulus_bump(2, &g).unwrap();
        assert!((b1.norm_l2() - 1.0).abs() < 1e-8);
        let (lo, hi) = b1.support().unwrap();
        assert!(lo >= 1.0 && hi <= 2.0);
        assert!(b1
            .values()
            .iter()
            .zip(b2.values())
            .all(|(a, b)| a * b == 0.0));
        assert!(matches!(
            annulus_bump(3, &g),
            Err(Error::AnnulusOutsideGrid { .. })
        ));
    }

    #[test]
    fn extension_keeps_spacing() {
        let g = RadialGrid::<f64>::logarithmic(1000, 1e-6, 60.0).unwrap();
        let e = g.extended_to(500.0).unwrap();
        assert!(e.r_max() >= 500.0);
        let ds = |g: &RadialGrid<f64>| (g.nodes()[1] / g.nodes()[0]).ln();
        assert!((ds(&g) - ds(&e)).abs() < 1e-9);
        let u = RadialGrid::<f64>::uniform(100, 10.0)
            .unwrap()
            .extended_to(25.0)
            .unwrap();
        assert!((u.nodes()[0] - 0.1).abs() < 1e-12 && u.r_max() >= 25.0);
    }

    #[test]
    fn single_precision_quadrature() {
        let g = RadialGrid::<f32>::uniform(2000, 30.0).unwrap();
        let f = g.sample(|r| (-2.0 * r).exp());
        assert!((integrate(&f) - std::f32::consts::PI).abs() / std::f32::consts::PI < 1e-4);
    }
}
