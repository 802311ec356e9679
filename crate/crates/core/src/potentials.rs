//! External potentials and finite-sample checks of the four standing
//! hypotheses on `V`:
//!
//! * (V1) continuous away from the origin,
//! * (V2) `V ∈ L^{3/2}` on the unit ball,
//! * (V3) `V → 0` at infinity,
//! * (V4) `r² V(r) → +∞`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    CoulombLike,
    FasterThanR2,
    CompactSupport,
    Other,
}

type Eval<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Radial, non-negative external potential with catalog metadata.
#[derive(Clone)]
pub struct Potential<T> {
    eval: Eval<T>,
    label: String,
    name: String,
    params: Vec<(String, f64)>,
    singular_exponent: T,
    decay_class: DecayClass,
    continuous: bool,
}

impl<T: Real> fmt::Debug for Potential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("label", &self.label)
            .field("singular_exponent", &self.singular_exponent)
            .field("decay_class", &self.decay_class)
            .finish()
    }
}

fn positive<T: Real>(name: &str, x: T) -> Result<()> {
    if x.is_finite() && x > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be positive, got {x}"
        )))
    }
}

impl<T: Real> Potential<T> {
    /// User-supplied potential. Continuity away from the origin cannot be
    /// certified for arbitrary closures, so (V1) falls back to sampled
    /// finiteness.
    pub fn custom(
        label: impl Into<String>,
        singular_exponent: T,
        decay_class: DecayClass,
        f: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        let label = label.into();
        Self {
            eval: Arc::new(f),
            name: "custom".into(),
            label,
            params: Vec::new(),
            singular_exponent,
            decay_class,
            continuous: false,
        }
    }

    /// `V(r) = Z / r`.
    pub fn coulomb(z: T) -> Result<Self> {
        positive("Z", z)?;
        Ok(Self {
            eval: Arc::new(move |r: T| z / r),
            label: format!("coulomb(Z={z})"),
            name: "coulomb".into(),
            params: vec![("Z".into(), z.as_f64())],
            singular_exponent: T::one(),
            decay_class: DecayClass::CoulombLike,
            continuous: true,
        })
    }

    /// `V(r) = Z r^{-α}`, `0 < α < 2`.
    pub fn power_law(z: T, alpha: T) -> Result<Self> {
        positive("Z", z)?;
        if !(alpha > T::zero() && alpha < T::c(2.0)) {
            return Err(Error::InvalidArgument(format!(
                "power-law exponent must lie in (0, 2), got {alpha}"
            )));
        }
        let decay_class = if alpha == T::one() {
            DecayClass::CoulombLike
        } else {
            DecayClass::Other
        };
        Ok(Self {
            eval: Arc::new(move |r: T| z * r.powf(-alpha)),
            label: format!("power_law(Z={z}, alpha={alpha})"),
            name: "power_law".into(),
            params: vec![("Z".into(), z.as_f64()), ("alpha".into(), alpha.as_f64())],
            singular_exponent: alpha,
            decay_class,
            continuous: true,
        })
    }

    /// Screened Coulomb `V(r) = Z e^{-μ r} / r`.
    pub fn yukawa(z: T, mu: T) -> Result<Self> {
        positive("Z", z)?;
        positive("mu", mu)?;
        Ok(Self {
            eval: Arc::new(move |r: T| z * (-mu * r).exp() / r),
            label: format!("yukawa(Z={z}, mu={mu})"),
            name: "yukawa".into(),
            params: vec![("Z".into(), z.as_f64()), ("mu".into(), mu.as_f64())],
            singular_exponent: T::one(),
            decay_class: DecayClass::FasterThanR2,
            continuous: true,
        })
    }

    pub fn zero() -> Self {
        Self {
            eval: Arc::new(|_| T::zero()),
            label: "zero".into(),
            name: "zero".into(),
            params: Vec::new(),
            singular_exponent: T::zero(),
            decay_class: DecayClass::CompactSupport,
            continuous: true,
        }
    }

    /// `s · V`, keeping the metadata.
    pub fn scaled(&self, s: T) -> Self {
        let inner = self.eval.clone();
        let mut out = self.clone();
        out.eval = Arc::new(move |r| s * inner(r));
        out.label = format!("{s}*{}", self.label);
        out
    }

    #[inline]
    pub fn eval(&self, r: T) -> T {
        (self.eval)(r)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Catalog name (`coulomb`, `power_law`, `yukawa`, `zero`, `custom`).
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn singular_exponent(&self) -> T {
        self.singular_exponent
    }

    pub fn decay_class(&self) -> DecayClass {
        self.decay_class
    }

    pub fn sample(&self, grid: &RadialGrid<T>) -> RadialFunction<T> {
        grid.sample(|r| self.eval(r))
    }

    pub(crate) fn values_on(&self, grid: &RadialGrid<T>) -> Vec<T> {
        grid.nodes().iter().map(|&r| self.eval(r)).collect()
    }
}

/// Finite-sample proxies for the asymptotic hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisThresholds {
    /// (V3) passes when the tail sup is below `tol_v3_factor · V(1)` ...
    pub tol_v3_factor: f64,
    /// ... or when doubling `r_max` shrinks the tail sup by at least this factor.
    pub v3_decay_factor: f64,
    /// (V4): required growth of `min r²V` on the tail under `r_max` doubling.
    pub growth_factor: f64,
    /// Fraction of outermost nodes forming the tail.
    pub tail_fraction: f64,
    /// Nodes of the dedicated unit-ball grid for (V2).
    pub v2_nodes: usize,
    /// (V2) is declared finite when successive inner-cutoff increments
    /// contract by at least this ratio, or fall below `v2_rel_tol`.
    pub v2_contraction: f64,
    pub v2_rel_tol: f64,
}

impl Default for HypothesisThresholds {
    fn default() -> Self {
        Self {
            tol_v3_factor: 1e-3,
            v3_decay_factor: 1.5,
            growth_factor: 1.5,
            tail_fraction: 0.1,
            v2_nodes: 4000,
            v2_contraction: 0.9,
            v2_rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub potential: String,
    pub nonnegative: bool,
    pub v1_continuous_away_from_0: bool,
    pub v2_l32_unit_ball: f64,
    pub v2_finite: bool,
    pub v3_vanishes_at_infinity: bool,
    pub v3_tail_sup: f64,
    pub v3_tail_sup_doubled: f64,
    pub v3_tolerance: f64,
    pub v4_r2v_diverges: bool,
    pub v4_tail_min: f64,
    pub v4_tail_min_doubled: f64,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.failures().is_empty()
    }

    /// Names of the failed hypotheses, e.g. `["V4"]`.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.v1_continuous_away_from_0 {
            out.push("V1");
        }
        if !self.v2_finite {
            out.push("V2");
        }
        if !self.v3_vanishes_at_infinity {
            out.push("V3");
        }
        if !self.v4_r2v_diverges {
            out.push("V4");
        }
        out
    }

    pub fn v4_diagnostic(&self) -> String {
        format!(
            "(V4) {}: min r^2 V on the outer tail is {:.3e} at r_max and {:.3e} at 2 r_max",
            if self.v4_r2v_diverges {
                "holds"
            } else {
                "fails"
            },
            self.v4_tail_min,
            self.v4_tail_min_doubled
        )
    }
}

fn tail<T: Real>(grid: &RadialGrid<T>, fraction: f64) -> &[T] {
    let n = grid.len();
    let count = ((n as f64 * fraction).ceil() as usize).clamp(1, n);
    &grid.nodes()[n - count..]
}

fn l32_unit_ball<T: Real>(v: &Potential<T>, r_min: f64, nodes: usize) -> Result<f64> {
    let g = RadialGrid::<f64>::logarithmic(nodes.max(3), r_min, 1.0)?;
    let s: f64 = g
        .nodes()
        .iter()
        .zip(g.weights())
        .map(|(&r, &w)| w * v.eval(T::c(r)).as_f64().abs().powf(1.5))
        .sum();
    Ok(s.powf(2.0 / 3.0))
}

/// Evaluates (V1)–(V4) for `v` with tails taken from `grid` and a grid
/// with the same node count and twice the radius.
pub fn check_hypotheses<T: Real>(
    v: &Potential<T>,
    grid: &RadialGrid<T>,
) -> Result<HypothesisReport> {
    check_hypotheses_with(v, grid, &HypothesisThresholds::default())
}

pub fn check_hypotheses_with<T: Real>(
    v: &Potential<T>,
    grid: &RadialGrid<T>,
    th: &HypothesisThresholds,
) -> Result<HypothesisReport> {
    let doubled = grid.with_r_max(grid.r_max() + grid.r_max())?;
    let vals =
        |g: &RadialGrid<T>| -> Vec<f64> { v.values_on(g).iter().map(|x| x.as_f64()).collect() };
    let on_grid = vals(grid);
    let on_doubled = vals(&doubled);
    let finite = on_grid.iter().chain(&on_doubled).all(|x| x.is_finite());
    let nonnegative = on_grid.iter().chain(&on_doubled).all(|&x| x >= 0.0);

    let cutoffs = [1e-4, 1e-6, 1e-8, 1e-10];
    let mut norms = Vec::with_capacity(cutoffs.len());
    for &c in &cutoffs {
        norms.push(l32_unit_ball(v, c, th.v2_nodes)?);
    }
    let v2 = *norms.last().expect("cutoffs non-empty");
    let incs: Vec<f64> = norms.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    let last_inc = incs[incs.len() - 1];
    let contracting = incs
        .windows(2)
        .all(|p| p[1] <= th.v2_contraction * p[0] || p[1] <= th.v2_rel_tol * v2.max(1.0));
    let v2_finite = v2.is_finite() && (last_inc <= th.v2_rel_tol * v2.max(1.0) || contracting);

    let sup_tail = |g: &RadialGrid<T>| {
        tail(g, th.tail_fraction)
            .iter()
            .map(|&r| v.eval(r).as_f64().abs())
            .fold(0.0, f64::max)
    };
    let min_r2v = |g: &RadialGrid<T>| {
        tail(g, th.tail_fraction)
            .iter()
            .map(|&r| {
                let rf = r.as_f64();
                rf * rf * v.eval(r).as_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };

    let v3_tol = th.tol_v3_factor * v.eval(T::one()).as_f64().abs();
    let (s1, s2) = (sup_tail(grid), sup_tail(&doubled));
    let v3 = s1.is_finite() && (s1 <= v3_tol || (s2 > 0.0 && s1 >= th.v3_decay_factor * s2));

    let (m1, m2) = (min_r2v(grid), min_r2v(&doubled));
    let v4 = m1.is_finite() && m1 > 0.0 && m2 >= th.growth_factor * m1;

    Ok(HypothesisReport {
        potential: v.label().to_string(),
        nonnegative,
        v1_continuous_away_from_0: finite && (v.continuous || v.name == "custom"),
        v2_l32_unit_ball: v2,
        v2_finite,
        v3_vanishes_at_infinity: v3,
        v3_tail_sup: s1,
        v3_tail_sup_doubled: s2,
        v3_tolerance: v3_tol,
        v4_r2v_diverges: v4,
        v4_tail_min: m1,
        v4_tail_min_doubled: m2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid<f64> {
        RadialGrid::logarithmic(4000, 1e-6, 60.0).unwrap()
    }

    #[test]
    fn catalog_values() {
        assert_eq!(Potential::coulomb(1.0).unwrap().eval(2.0), 0.5);
        assert_eq!(Potential::power_law(1.0, 1.5).unwrap().eval(4.0), 0.125);
        let y = Potential::yukawa(1.0, 1.0).unwrap();
        assert!((y.eval(1.0) - (-1.0f64).exp()).abs() < 1e-15);
        let c = Potential::coulomb(1.0).unwrap();
        let p = Potential::power_law(1.0, 1.0).unwrap();
        for r in [0.1, 1.0, 7.5] {
            assert_eq!(c.eval(r), p.eval(r));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Potential::coulomb(0.0).is_err());
        assert!(Potential::coulomb(-1.0).is_err());
        assert!(Potential::power_law(1.0, 2.0).is_err());
        assert!(Potential::power_law(1.0, 0.0).is_err());
        assert!(Potential::yukawa(1.0, 0.0).is_err());
    }

    #[test]
    fn coulomb_passes_all() {
        for z in [0.5, 1.0, 2.0, 5.0] {
            let rep = check_hypotheses(&Potential::coulomb(z).unwrap(), &grid()).unwrap();
            assert!(rep.all_pass(), "{rep:?}");
        }
    }

    #[test]
    fn coulomb_l32_closed_form_and_homogeneity() {
        let exact = (8.0 * std::f64::consts::PI / 3.0).powf(2.0 / 3.0);
        let one = check_hypotheses(&Potential::coulomb(1.0).unwrap(), &grid()).unwrap();
        assert!((one.v2_l32_unit_ball - exact).abs() / exact < 1e-8);
        let three = check_hypotheses(&Potential::coulomb(3.0).unwrap(), &grid()).unwrap();
        assert!((three.v2_l32_unit_ball / one.v2_l32_unit_ball - 3.0).abs() < 1e-8 * 3.0);
    }

    #[test]
    fn yukawa_and_zero_fail_only_v4() {
        for v in [Potential::yukawa(1.0, 1.0).unwrap(), Potential::zero()] {
            let rep = check_hypotheses(&v, &grid()).unwrap();
            assert_eq!(rep.failures(), vec!["V4"], "{rep:?}");
        }
    }

    #[test]
    fn steep_power_law_is_locally_integrable() {
        let rep = check_hypotheses(&Potential::power_law(1.0, 1.9).unwrap(), &grid()).unwrap();
        assert!(rep.v2_finite);
        let blowup = Potential::custom("r^-2", 2.0, DecayClass::Other, |r: f64| r.powi(-2));
        let rep = check_hypotheses(&blowup, &grid()).unwrap();
        assert!(!rep.v2_finite);
    }

    #[test]
    fn v4_verdict_invariant_under_scaling() {
        for v in [
            Potential::coulomb(1.0).unwrap(),
            Potential::yukawa(1.0, 0.5).unwrap(),
        ] {
            let base = check_hypotheses(&v, &grid()).unwrap().v4_r2v_diverges;
            for s in [1e-3, 0.5, 7.0, 1e4] {
                assert_eq!(
                    check_hypotheses(&v.scaled(s), &grid())
                        .unwrap()
                        .v4_r2v_diverges,
                    base
                );
            }
        }
    }

    #[test]
    fn non_finite_samples_fail_v1() {
        let v = Potential::custom("spike", 0.0, DecayClass::Other, |r: f64| {
            if (r - 30.0).abs() < 0.05 {
                f64::INFINITY
            } else {
                1.0 / r
            }
        });
        let rep = check_hypotheses(&v, &RadialGrid::uniform(4000, 60.0).unwrap()).unwrap();
        assert!(!rep.v1_continuous_away_from_0);
    }
}
