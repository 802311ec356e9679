use smx::energy::j_energy;
use smx::oracle::hydrogen_eigen;
use smx::solver::{minimize, multiplicity_pipeline, newton_refine, subspace_seed};
use smx::{Error, Grid, Options, Pot, SolveStatus};

fn setup() -> (Grid, Pot) {
    (
        Grid::logarithmic(2000, 1e-5, 60.0).unwrap(),
        Pot::coulomb(1.0).unwrap(),
    )
}

#[test]
fn ground_state_satisfies_nehari_identity() {
    let (g, v) = setup();
    let opts = Options::default();
    let u0 = subspace_seed(1, &v, &g, -0.1, &opts).unwrap();
    let rep = minimize(&u0, -0.1, &v, &opts, &[]).unwrap();
    assert!(rep.converged && rep.residual < 1e-8, "{:?}", rep.status);
    assert!(rep.below_threshold && rep.energy.total < 0.0);
    // J'(u)u = 0 forces J = -SI
    let e = rep.energy;
    assert!((e.total + e.self_interaction).abs() < 1e-7, "{e:?}");
    assert!(rep.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn small_amplitude_branch_follows_hydrogen() {
    // near ω = -1/2 the solution is a·u_1s with a² = (ω + ½)/(4 SI(u_1s)),
    // SI(u_1s) = 5/32, so J ≈ -(ω + ½)² / (16 · 5/32)
    let (g, v) = setup();
    let omega = -0.49;
    let (_, h) = hydrogen_eigen(1, 1.0, &g).unwrap();
    let opts = Options::default();
    let rep = minimize(&h.scaled(0.05), omega, &v, &opts, &[]).unwrap();
    assert!(rep.converged);
    let overlap = rep.u.dot(&h).abs() / rep.norm_l2();
    assert!(overlap > 0.999, "overlap {overlap}");
    let predicted = -(omega + 0.5f64).powi(2) / (16.0 * 5.0 / 32.0);
    let rel = (rep.energy.total / predicted - 1.0).abs();
    assert!(rel < 0.05, "J = {} vs {predicted}", rep.energy.total);
}

#[test]
fn above_the_linear_spectrum_only_zero_remains() {
    let (g, v) = setup();
    let (_, h) = hydrogen_eigen(1, 1.0, &g).unwrap();
    let rep = minimize(&h.scaled(0.3), -0.6, &v, &Options::default(), &[]).unwrap();
    assert!(rep.converged && rep.norm_l2() < 1e-6);
}

#[test]
fn linear_problem_without_coupling() {
    let (g, v) = setup();
    let (_, h) = hydrogen_eigen(1, 1.0, &g).unwrap();
    let opts = Options {
        coupling_enabled: false,
        newton: false,
        max_iters: 200,
        ..Options::default()
    };
    // -½Δ - V - ω is positive for ω < -½: descent decays to 0
    let rep = minimize(&h, -0.55, &v, &opts, &[]).unwrap();
    assert_eq!(rep.energy.self_interaction, 0.0);
    assert!(rep.norm_l2() < 1e-3 && rep.energy.total < 1e-6);
    // ... and is unbounded below for ω > -½
    let e = j_energy(&h.scaled(100.0), -0.45, &v);
    assert!(e.total - e.self_interaction < -100.0);
}

#[test]
fn deflation_finds_a_second_state() {
    let (g, v) = setup();
    let opts = Options::default();
    let u0 = subspace_seed(1, &v, &g, -0.1, &opts).unwrap();
    let first = minimize(&u0, -0.1, &v, &opts, &[]).unwrap();
    let grid = first.u.grid().clone();
    let seed = subspace_seed(2, &v, &grid, -0.1, &opts)
        .unwrap()
        .resample(&grid);
    let second = minimize(&seed, -0.1, &v, &opts, std::slice::from_ref(&first.u)).unwrap();
    assert!(second.converged && second.residual < 1e-8);
    assert!(second.norm_l2() > 1e-2);
    assert!((&second.u - &first.u).norm_l2() > 1e-2 && (&second.u + &first.u).norm_l2() > 1e-2);
    assert!(second.energy.total > first.energy.total);
}

#[test]
fn newton_refine_recovers_perturbed_solution() {
    let (g, v) = setup();
    let opts = Options::default();
    let u0 = subspace_seed(1, &v, &g, -0.1, &opts).unwrap();
    let rep = minimize(&u0, -0.1, &v, &opts, &[]).unwrap();
    let kicked = rep.u.map_with_r(|r, x| x * (1.0 + 0.05 * (-r).exp()));
    let back = newton_refine(&kicked, -0.1, &v, &opts).unwrap();
    assert!(back.converged);
    assert!((&back.u - &rep.u).norm_l2() < 1e-6);
}

#[test]
fn rejects_bad_input() {
    let (g, v) = setup();
    let opts = Options::default();
    let nan = g.sample(|r| if r > 1.0 { f64::NAN } else { 1.0 });
    assert!(matches!(
        minimize(&nan, -0.1, &v, &opts, &[]),
        Err(Error::NonFinite(_))
    ));
    let bad = Options {
        grad_tol: 0.0,
        ..Options::default()
    };
    assert!(minimize(&g.zeros(), -0.1, &v, &bad, &[]).is_err());
    let other = Grid::uniform(100, 10.0).unwrap();
    assert!(minimize(&g.zeros(), -0.1, &v, &opts, &[other.zeros()]).is_err());
    assert!(multiplicity_pipeline(0, -0.1, &v, &g, &opts).is_err());
    assert!(multiplicity_pipeline(2, 0.1, &v, &g, &opts).is_err());
}

#[test]
fn zero_is_critical() {
    let (g, v) = setup();
    let rep = minimize(&g.zeros(), -0.1, &v, &Options::default(), &[]).unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    assert_eq!(rep.iters, 0);
}

#[test]
fn yukawa_pipeline_flags_hypotheses() {
    let g = Grid::logarithmic(1000, 1e-5, 40.0).unwrap();
    let v = Pot::yukawa(1.0, 1.0).unwrap();
    let opts = Options {
        max_iters: 2000,
        ..Options::default()
    };
    let out = multiplicity_pipeline(2, -0.1, &v, &g, &opts).unwrap();
    assert!(out.hypothesis_violated);
    assert_eq!(out.hypotheses.failures(), vec!["V4"]);
    assert!(out.per_k.iter().all(|k| k
        .family_error
        .as_deref()
        .is_some_and(|e| e.contains("(V4) fails"))));
}
