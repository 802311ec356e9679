use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use smx::energy::{f_energy, j_energy, j_gradient};
use smx::oracle::{brute_force_phi, hydrogen_eigen, linear_eigensolve};
use smx::poisson::self_consistent_phi;
use smx::potentials::check_hypotheses;
use smx::solver::{
    build_lemma10_subspace, dilation_bound_check, estimate_minimax_level_with, minimize,
    multiplicity_pipeline, subspace_seed, AttemptRecord, DilationBoundFit, KStatus,
};
use smx::{Energy, Func, Grid, HypothesisReport, Minimax, Pot, Report, SolveStatus};

use crate::{CliError, Mode, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Option<PathBuf>,
    pub files: Vec<PathBuf>,
    /// One-line human summaries printed by the binary.
    pub messages: Vec<String>,
}

#[derive(Serialize)]
struct Metadata {
    timestamp: u64,
    version: &'static str,
}

#[derive(Serialize)]
struct Summary<'a, R> {
    schema_version: u32,
    mode: Mode,
    config: &'a RunConfig,
    results: R,
    metadata: Metadata,
}

#[derive(Serialize)]
struct GridInfo {
    kind: smx::GridKind,
    n: usize,
    r_min: f64,
    r_max: f64,
}

impl GridInfo {
    fn of(g: &Grid) -> Self {
        Self {
            kind: g.kind(),
            n: g.len(),
            r_min: g.r_min(),
            r_max: g.r_max(),
        }
    }
}

#[derive(Serialize)]
struct SolutionRecord {
    index: usize,
    converged: bool,
    status: SolveStatus,
    residual: f64,
    iters: usize,
    newton_iters: usize,
    norm_l2: f64,
    energy: Energy,
    threshold: f64,
    below_threshold: bool,
    csv: Option<String>,
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.out)?;
        Ok(Self {
            cfg,
            files: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn csv(&mut self, index: usize, u: &Func, phi: &Func) -> Result<Option<String>, CliError> {
        if !self.cfg.wants("csv") {
            return Ok(None);
        }
        let name = format!("solution_{index}.csv");
        let mut text = String::from("r,u,phi\n");
        for ((r, x), p) in u.grid().nodes().iter().zip(u.values()).zip(phi.values()) {
            let _ = writeln!(text, "{r:.16e},{x:.16e},{p:.16e}");
        }
        let path = self.path(&name);
        fs::write(&path, text)?;
        self.files.push(path);
        Ok(Some(name))
    }

    fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<Option<PathBuf>, CliError> {
        if !self.cfg.wants("json") {
            return Ok(None);
        }
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.files.push(path.clone());
        Ok(Some(path))
    }

    fn hypotheses(&mut self, report: &HypothesisReport) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct H<'r> {
            schema_version: u32,
            all_pass: bool,
            failures: Vec<&'static str>,
            report: &'r HypothesisReport,
        }
        self.json(
            "hypotheses.json",
            &H {
                schema_version: SCHEMA_VERSION,
                all_pass: report.all_pass(),
                failures: report.failures(),
                report,
            },
        )?;
        Ok(())
    }

    fn summary<R: Serialize>(&mut self, results: R) -> Result<Option<PathBuf>, CliError> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.json(
            "summary.json",
            &Summary {
                schema_version: SCHEMA_VERSION,
                mode: self.cfg.mode,
                config: self.cfg,
                results,
                metadata: Metadata {
                    timestamp,
                    version: env!("CARGO_PKG_VERSION"),
                },
            },
        )
    }

    fn solution(&mut self, index: usize, rep: &Report) -> Result<SolutionRecord, CliError> {
        let csv = self.csv(index, &rep.u, &rep.phi)?;
        Ok(SolutionRecord {
            index,
            converged: rep.converged,
            status: rep.status,
            residual: rep.residual,
            iters: rep.iters,
            newton_iters: rep.newton_iters,
            norm_l2: rep.norm_l2(),
            energy: rep.energy,
            threshold: rep.threshold(),
            below_threshold: rep.below_threshold,
            csv,
        })
    }

    fn finish(self, summary: Option<PathBuf>, messages: Vec<String>) -> RunOutcome {
        RunOutcome {
            summary,
            files: self.files,
            messages,
        }
    }
}

/// Validates `cfg`, dispatches on the mode and writes the artifacts into
/// `cfg.out`. Configuration errors leave no artifacts behind; on
/// non-convergence the artifacts are written before the error is returned.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Solve => run_solve(cfg),
        Mode::Multiplicity => run_multiplicity(cfg),
        Mode::Minimax => run_minimax(cfg),
        Mode::Verify => run_verify(cfg),
        Mode::Hydrogen => run_hydrogen(cfg),
    }
}

fn omega(cfg: &RunConfig) -> f64 {
    cfg.omega.expect("validated")
}

fn run_solve(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let (grid, v, opts, omega) = (
        cfg.grid()?,
        cfg.potential()?,
        cfg.solve_options()?,
        omega(cfg),
    );
    let hyp = check_hypotheses(&v, &grid)?;
    let u0 = subspace_seed(1, &v, &grid, omega, &opts)
        .map_err(|e| CliError::Hypothesis(format!("cannot build a seed: {e}")))?;
    let rep = minimize(&u0, omega, &v, &opts, &[])?;

    #[derive(Serialize)]
    struct R {
        omega: f64,
        potential: String,
        grid: GridInfo,
        hypotheses_pass: bool,
        solution: SolutionRecord,
    }
    let mut w = Writer::new(cfg)?;
    let solution = w.solution(1, &rep)?;
    w.hypotheses(&hyp)?;
    let summary = w.summary(R {
        omega,
        potential: v.label().to_string(),
        grid: GridInfo::of(rep.u.grid()),
        hypotheses_pass: hyp.all_pass(),
        solution,
    })?;
    if !rep.converged {
        return Err(CliError::NonConvergence(format!(
            "solve stopped with {:?}, residual {:.3e}",
            rep.status, rep.residual
        )));
    }
    let msg = format!(
        "converged: J = {:.12e}, residual {:.3e}, |u| = {:.6e}",
        rep.energy.total,
        rep.residual,
        rep.norm_l2()
    );
    Ok(w.finish(summary, vec![msg]))
}

fn run_multiplicity(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let (grid, v, opts, omega) = (
        cfg.grid()?,
        cfg.potential()?,
        cfg.solve_options()?,
        omega(cfg),
    );
    let out = multiplicity_pipeline(cfg.k_max, omega, &v, &grid, &opts)?;

    #[derive(Serialize)]
    struct R<'a> {
        omega: f64,
        potential: String,
        grid: GridInfo,
        count: usize,
        min_pairwise_distance: Option<f64>,
        hypothesis_violated: bool,
        solutions: Vec<SolutionRecord>,
        attempts: &'a [AttemptRecord],
        per_k: &'a [KStatus],
    }
    let mut w = Writer::new(cfg)?;
    let mut solutions = Vec::new();
    for (i, s) in out.solutions.iter().enumerate() {
        solutions.push(w.solution(i + 1, s)?);
    }
    w.hypotheses(&out.hypotheses)?;
    let count = solutions.len();
    let summary = w.summary(R {
        omega,
        potential: v.label().to_string(),
        grid: GridInfo::of(&out.grid),
        count,
        min_pairwise_distance: out.min_pairwise_distance(),
        hypothesis_violated: out.hypothesis_violated,
        solutions,
        attempts: &out.attempts,
        per_k: &out.per_k,
    })?;
    if count == 0 {
        return Err(CliError::NonConvergence("no solution was accepted".into()));
    }
    let mut messages = vec![format!("{count} distinct solutions")];
    for s in &out.solutions {
        messages.push(format!(
            "  J = {:+.12e}  residual {:.3e}  |u| = {:.6e}",
            s.energy.total,
            s.residual,
            s.norm_l2()
        ));
    }
    Ok(w.finish(summary, messages))
}

#[derive(Serialize)]
struct MinimaxRecord {
    k: usize,
    lambda_bar: f64,
    nu: f64,
    sampled_sup: f64,
    estimate: Minimax,
    c_k_upper_doubled: f64,
    relative_change: f64,
    dilation_bound: DilationBoundFit<f64>,
}

fn minimax_one(
    k: usize,
    cfg: &RunConfig,
    v: &Pot,
    grid: &Grid,
    omega: f64,
) -> smx::Result<MinimaxRecord> {
    let fam = build_lemma10_subspace(k, v, grid, omega)?;
    let samples = cfg.samples_per_k * k;
    let est = estimate_minimax_level_with(&fam, omega, v, samples, cfg.seed, 400)?;
    let doubled = estimate_minimax_level_with(&fam, omega, v, 2 * samples, cfg.seed, 400)?;
    let fit = dilation_bound_check(&fam, omega, v, samples, cfg.seed)?;
    Ok(MinimaxRecord {
        k,
        lambda_bar: fam.lambda_bar,
        nu: fam.nu,
        sampled_sup: fam.sampled_sup,
        estimate: est,
        c_k_upper_doubled: doubled.c_k_upper,
        relative_change: (doubled.c_k_upper - est.c_k_upper).abs()
            / est.c_k_upper.abs().max(f64::MIN_POSITIVE),
        dilation_bound: fit,
    })
}

fn run_minimax(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let (grid, v, omega) = (cfg.grid()?, cfg.potential()?, omega(cfg));
    let hyp = check_hypotheses(&v, &grid)?;
    let ks: Vec<usize> = (1..=cfg.k_max).collect();
    let mut results: Vec<smx::Result<MinimaxRecord>> = Vec::with_capacity(ks.len());
    for chunk in ks.chunks(cfg.threads) {
        if chunk.len() == 1 {
            results.push(minimax_one(chunk[0], cfg, &v, &grid, omega));
            continue;
        }
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&k| {
                    let (v, grid) = (&v, &grid);
                    s.spawn(move || minimax_one(k, cfg, v, grid, omega))
                })
                .collect();
            for h in handles {
                results.push(h.join().expect("minimax worker panicked"));
            }
        });
    }

    let mut w = Writer::new(cfg)?;
    w.hypotheses(&hyp)?;
    let mut records = Vec::new();
    let mut failure = None;
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    #[derive(Serialize)]
    struct R {
        omega: f64,
        potential: String,
        threshold: f64,
        all_pass: bool,
        estimates: Vec<MinimaxRecord>,
        error: Option<String>,
    }
    let all_pass = failure.is_none() && records.iter().all(|r| r.estimate.passes);
    let messages: Vec<String> = records
        .iter()
        .map(|r| {
            format!(
                "k = {}: c_k <= {:.6e} (threshold {:.3e}) {}",
                r.k,
                r.estimate.c_k_upper,
                r.estimate.threshold,
                if r.estimate.passes { "pass" } else { "FAIL" }
            )
        })
        .collect();
    let summary = w.summary(R {
        omega,
        potential: v.label().to_string(),
        threshold: -omega / 2.0,
        all_pass,
        estimates: records,
        error: failure.as_ref().map(|e| e.to_string()),
    })?;
    if let Some(e) = failure {
        return Err(match e {
            smx::Error::NegativityUnreachable { .. } => CliError::Hypothesis(e.to_string()),
            other => CliError::Numerics(other),
        });
    }
    Ok(w.finish(summary, messages))
}

/// Smooth random profile: three Gaussians with seeded centers and widths.
fn random_profile(grid: &Grid, rng: &mut ChaCha8Rng) -> Func {
    let terms: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..4.0),
                rng.gen_range(0.5..2.0),
            )
        })
        .collect();
    grid.sample(|r| {
        terms
            .iter()
            .map(|&(a, c, s)| a * (-((r - c) / s).powi(2)).exp())
            .sum()
    })
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value < tolerance,
        }
    }
}

fn run_verify(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let (grid, v) = (cfg.grid()?, cfg.potential()?);
    let omega = cfg.omega.unwrap_or(-0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();

    let (mut grad_err, mut fj_err, mut poisson_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..5 {
        let u = random_profile(&grid, &mut rng);
        let d = random_profile(&grid, &mut rng);
        let g = j_gradient(&u, omega, &v);
        let analytic = g.dot(&d);
        let eps = 1e-5;
        let mut plus = u.clone();
        plus.axpy(eps, &d);
        let mut minus = u.clone();
        minus.axpy(-eps, &d);
        let fd =
            (j_energy(&plus, omega, &v).total - j_energy(&minus, omega, &v).total) / (2.0 * eps);
        grad_err = grad_err.max((analytic - fd).abs() / analytic.abs().max(1e-12));

        let phi = self_consistent_phi(&u)?.phi;
        let j = j_energy(&u, omega, &v).total;
        let f = f_energy(&u, &phi, omega, &v)?;
        fj_err = fj_err.max((f - j).abs() / (1.0 + j.abs()));

        poisson_err = poisson_err.max((&phi - &brute_force_phi(&u)).max_abs());
    }
    checks.push(Check::new("gradient_vs_central_difference", grad_err, 1e-5));
    checks.push(Check::new(
        "f_equals_j_on_self_consistent_phi",
        fj_err,
        1e-9,
    ));
    checks.push(Check::new("poisson_vs_brute_force", poisson_err, 1e-6));

    let numeric_pass = checks.iter().all(|c| c.pass);
    let hyp = check_hypotheses(&v, &grid)?;
    checks.push(Check::new(
        "hypothesis_failures",
        hyp.failures().len() as f64,
        0.5,
    ));

    let mut w = Writer::new(cfg)?;
    w.hypotheses(&hyp)?;
    #[derive(Serialize)]
    struct R {
        omega: f64,
        potential: String,
        all_pass: bool,
        checks: Vec<Check>,
    }
    let all_pass = checks.iter().all(|c| c.pass);
    let messages = checks
        .iter()
        .map(|c| {
            format!(
                "{} {}: {:.3e} (tol {:.1e})",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance
            )
        })
        .collect();
    let summary = w.summary(R {
        omega,
        potential: v.label().to_string(),
        all_pass,
        checks,
    })?;
    // hypothesis failures are reported, not treated as numerical faults
    if !numeric_pass {
        return Err(CliError::NonConvergence(
            "verification checks failed".into(),
        ));
    }
    Ok(w.finish(summary, messages))
}

fn run_hydrogen(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let (grid, v) = (cfg.grid()?, cfg.potential()?);
    let count = cfg.k_max;
    let spectrum = linear_eigensolve(&v, &grid, count)?;
    let hyp = check_hypotheses(&v, &grid)?;

    #[derive(Serialize)]
    struct Row {
        n: usize,
        numeric: f64,
        analytic: f64,
        relative_error: f64,
        overlap: f64,
        csv: Option<String>,
    }
    let mut w = Writer::new(cfg)?;
    let mut rows = Vec::new();
    for (i, (&e, u)) in spectrum
        .eigenvalues
        .iter()
        .zip(&spectrum.eigenfunctions)
        .enumerate()
    {
        let (exact, ue) = hydrogen_eigen(i + 1, cfg.z, &grid)?;
        let phi = self_consistent_phi(u)?.phi;
        rows.push(Row {
            n: i + 1,
            numeric: e,
            analytic: exact,
            relative_error: ((e - exact) / exact).abs(),
            overlap: u.dot(&ue).abs(),
            csv: w.csv(i + 1, u, &phi)?,
        });
    }
    #[derive(Serialize)]
    struct R {
        potential: String,
        grid: GridInfo,
        levels: Vec<Row>,
    }
    let messages = rows
        .iter()
        .map(|r| {
            format!(
                "n = {}: numeric {:+.10e}  analytic {:+.10e}  rel err {:.2e}",
                r.n, r.numeric, r.analytic, r.relative_error
            )
        })
        .collect();
    w.hypotheses(&hyp)?;
    let summary = w.summary(R {
        potential: v.label().to_string(),
        grid: GridInfo::of(&grid),
        levels: rows,
    })?;
    Ok(w.finish(summary, messages))
}
