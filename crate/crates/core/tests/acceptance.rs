//! Acceptance suite: runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use splap::analysis::{audit_energy_ledger, l1_contraction_experiment, monotonicity_sample_check, monotonicity_slack};
use splap::control::{project_control, FineTable};
use splap::io::{write_ldp_csv, write_tci_csv};
use splap::ldp::{
    ldp_diagnostic, rate_function_continuation, EventSpec, LdpReport, LdpSetup, OptimizerSettings, LAMBDA_LADDER,
};
use splap::rng::{mix_seed, GaussianStream};
use splap::stepper::{implicit_step, run_skeleton};
use splap::tci::{tci_sweep, DriftCase, DriftShape, TciReport};
use splap::*;

mod common;
use common::{dp_rate, single_node_setup};

const SEED: u64 = 20240611;

struct Outcome {
    passed: bool,
    summary: String,
}

impl Outcome {
    fn new(passed: bool, summary: String) -> Self {
        Self { passed, summary }
    }
}

type Criterion = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Criterion); 10] = [
        ("1 heat-equation regression", Duration::from_secs(10), heat),
        ("2 single-node oracle", Duration::from_millis(1), single_node),
        ("3 discrete energy ledger", Duration::from_secs(30), energy_ledger),
        ("4 monotonicity inequality", Duration::from_secs(5), monotonicity),
        ("5 projection non-expansiveness", Duration::from_secs(5), projection),
        ("6 L1 contraction", Duration::from_secs(30), contraction),
        ("7 rate-function sanity", Duration::from_secs(120), rate_sanity),
        ("8 LDP trend", Duration::from_secs(300), ldp_trend),
        ("9 TCI surrogate", Duration::from_secs(300), tci_surrogate),
        ("10 determinism", Duration::from_secs(600), determinism),
    ];
    let mut failed = Vec::new();
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let passed = outcome.passed && in_time;
        println!(
            "{} criterion {name}: {} [{:.3} s of {} s]",
            if passed { "PASS" } else { "FAIL" },
            outcome.summary,
            elapsed.as_secs_f64(),
            budget.as_secs_f64()
        );
        if !passed {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} failed: {}", failed.len(), failed.join("; "));
        ExitCode::FAILURE
    }
}

fn heat_max_error(n_cells: usize, n_steps: usize) -> Result<f64> {
    let horizon = 0.1;
    let grid = Grid64::new(1.0, n_cells)?;
    let params = ModelParams64::new(2.0, FluxFamily::Zero, DiffusionFamily::Zero, horizon, n_steps, 0.0)?;
    let u0 = Field64::from_fn(&grid, |x| (PI * x).sin())?;
    let h = Control64::zeros(n_steps, params.tau());
    let traj = run_skeleton(&params, &h, &u0, &grid, &NewtonSettings64::default())?;
    let exact = Field64::from_fn(&grid, |x| (-PI * PI * horizon).exp() * (PI * x).sin())?;
    Ok((traj.terminal() - &exact).max_abs())
}

fn heat() -> Result<Outcome> {
    let err = heat_max_error(128, 4096)?;
    let coarse = heat_max_error(32, 100_000)?;
    let fine = heat_max_error(64, 100_000)?;
    let ratio = coarse / fine;
    Ok(Outcome::new(
        err <= 5e-3 && (3.2..=4.8).contains(&ratio),
        format!("max error {err:.3e} (<= 5e-3); grid 32 -> 64 ratio {ratio:.3} (in [3.2, 4.8])"),
    ))
}

fn single_node() -> Result<Outcome> {
    let grid = Grid64::new(1.0, 2)?;
    let params = ModelParams64::new(3.0, FluxFamily::Zero, DiffusionFamily::Zero, 0.1, 1, 0.0)?;
    let u = implicit_step(
        &Field64::new(vec![1.0])?,
        &Field64::new(vec![0.0])?,
        &params,
        &grid,
        &NewtonSettings64::default(),
    )?[0];
    let err = (u - 0.537592).abs();
    Ok(Outcome::new(
        err <= 1e-6,
        format!("u = {u:.9}, |u - 0.537592| = {err:.2e} (<= 1e-6)"),
    ))
}

fn energy_ledger() -> Result<Outcome> {
    let mut rng = GaussianStream::new(mix_seed(SEED, 1));
    let s = NewtonSettings64::default();
    let grid = Grid64::new(1.0, 16)?;
    let mut violations = 0;
    for i in 0..20 {
        let p = [2.5, 3.0, 4.0][i % 3];
        let a = 0.5 + 1.5 * rng.uniform_open0();
        let params = ModelParams64::new(p, FluxFamily::Zero, DiffusionFamily::Linear(a), 0.1, 40, 0.0)?;
        let h = Control64::new((0..40).map(|_| 4.0 * rng.uniform_open0() - 2.0).collect(), params.tau())?;
        let amp = 2.0 * rng.uniform_open0();
        let u0 = Field64::from_fn(&grid, |x| amp * (PI * x).sin() + x * (1.0 - x))?;
        let traj = run_skeleton(&params, &h, &u0, &grid, &s)?;
        violations += audit_energy_ledger(&traj, &params, &grid, s.residual_tol).len();
    }
    Ok(Outcome::new(
        violations == 0,
        format!(
            "{violations} violations over 20 configs at tolerance 10 * {:.0e}",
            s.residual_tol
        ),
    ))
}

fn monotonicity() -> Result<Outcome> {
    let mut worst = f64::INFINITY;
    for (i, p) in [2.5, 3.0, 4.0].into_iter().enumerate() {
        worst = worst.min(monotonicity_sample_check(p, 100_000, mix_seed(SEED, 10 + i as u64))?.worst_slack);
    }
    let eq = monotonicity_slack(1.0, -1.0, 3.0);
    Ok(Outcome::new(
        worst >= -1e-12 && eq == 0.0,
        format!("worst slack {worst:.3e} (>= -1e-12); equality case slack {eq}"),
    ))
}

fn projection() -> Result<Outcome> {
    let mut rng = GaussianStream::new(mix_seed(SEED, 2));
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let coef: Vec<f64> = (0..4).map(|_| rng.next_normal()).collect();
        let h = |t: f64| {
            coef.iter()
                .enumerate()
                .map(|(j, c)| c * (PI * (j as f64 + 1.0) * t + j as f64).sin())
                .sum::<f64>()
        };
        let table = FineTable::sample(h, 1.0, 4000);
        let c = project_control(&table, 40)?;
        let lhs = c.tau() * c.values().iter().map(|v| v * v).sum::<f64>();
        worst = worst.max(lhs - table.l2_squared());
    }
    Ok(Outcome::new(
        worst <= 1e-6,
        format!("worst excess {worst:.3e} (<= 1e-6)"),
    ))
}

fn contraction() -> Result<Outcome> {
    let mut rng = GaussianStream::new(mix_seed(SEED, 3));
    let grid = Grid64::new(1.0, 32)?;
    let params = ModelParams64::new(
        3.0,
        FluxFamily::Linear(1.0),
        DiffusionFamily::Linear(1.0),
        0.1,
        100,
        0.0,
    )?;
    let s = NewtonSettings64::default();
    let h = Control64::zeros(100, params.tau());
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10 {
        let mut field = || {
            let c: Vec<f64> = (0..3).map(|_| rng.next_normal()).collect();
            Field64::from_fn(&grid, |x| {
                c.iter()
                    .enumerate()
                    .map(|(j, a)| a * (PI * (j as f64 + 1.0) * x).sin())
                    .sum()
            })
        };
        let (a, b) = (field()?, field()?);
        let rep = l1_contraction_experiment(&params, &a, &b, &h, &grid, &s)?;
        worst = worst.max(rep.max_step_increase() - (10.0 * s.residual_tol + 0.05 * rep.gap[0]));
    }
    Ok(Outcome::new(
        worst <= 0.0,
        format!("largest step increase minus tolerance {worst:.3e} (<= 0)"),
    ))
}

/// Grid 32, N = 200, p = 3, linear H (a = 2), T = 0.02, `u₀ = 4 sin(πx)`.
fn ldp_setup() -> Result<LdpSetup<f64>> {
    let grid = Grid64::new(1.0, 32)?;
    let params = ModelParams64::new(3.0, FluxFamily::Zero, DiffusionFamily::Linear(2.0), 0.02, 200, 0.5)?;
    let u0 = Field64::from_fn(&grid, |x| 4.0 * (PI * x).sin())?;
    LdpSetup::new(params, u0, grid)
}

fn rate_sanity() -> Result<Outcome> {
    let opt = OptimizerSettings::default();
    let setup = ldp_setup()?;
    let target = setup.deterministic_terminal()?;
    let zero = rate_function_continuation(&setup, &target, &LAMBDA_LADDER, &opt)?;
    let i_zero = zero.last().expect("non-empty ladder").i_value;

    let s = single_node_setup(8, 0.5);
    let target = s.skeleton_terminal(&Control::constant(1.0, 8, s.params.tau()))?;
    let stages = rate_function_continuation(&s, &target, &LAMBDA_LADDER, &opt)?;
    let found = stages.last().expect("non-empty ladder");
    let dp = dp_rate(8, 0.5, target[0], 1000.0);
    let rel = (found.i_value - dp).abs() / dp;
    Ok(Outcome::new(
        i_zero <= 1e-8 && rel <= 0.05 && found.converged,
        format!(
            "zero-control target I = {i_zero:.2e} (<= 1e-8); single node I = {:.6} vs DP {dp:.6}, rel {rel:.2e} (<= 0.05)",
            found.i_value
        ),
    ))
}

fn ldp_report() -> Result<LdpReport<f64>> {
    let setup = ldp_setup()?;
    let center = setup.deterministic_terminal()?;
    let event = EventSpec::new(center.clone(), 0.15 * center.l2(&setup.grid))?;
    ldp_diagnostic(
        &setup,
        &[0.5, 0.35, 0.25],
        &event,
        2000,
        SEED,
        &LAMBDA_LADDER,
        &OptimizerSettings::default(),
    )
}

fn ldp_trend() -> Result<Outcome> {
    let rep = ldp_report()?;
    let monotone = rep.monotone_within_error();
    let violations = rep.lower_bound_violations();
    let bound = rep.rate_bound.unwrap_or(f64::NAN);
    let rows: Vec<String> = rep
        .rows
        .iter()
        .map(|r| {
            let (lo, hi) = r.log_interval();
            match r.eps2_log_p {
                Some(v) => format!(
                    "eps {}: {}/{} hits, eps2 log p {v:.4} in [{lo:.4}, {hi:.4}], floor {:.4}",
                    r.epsilon,
                    r.estimate.n_hits,
                    r.estimate.n_samples,
                    bound - r.lower_margin()
                ),
                None => format!("eps {}: {}", r.epsilon, r.flag.unwrap_or_default()),
            }
        })
        .collect();
    Ok(Outcome::new(
        monotone && violations.is_empty() && rep.rate_bound.is_some(),
        format!(
            "-I = {bound:.4}; monotone within error: {monotone}; rows below -I - margin: {violations:?}; {}",
            rows.join("; ")
        ),
    ))
}

/// Bounded sine H, ε = 1, grid 32, T = 0.1, N = 100, `u₀ = sin(πx)`, M = 500.
fn tci_report() -> Result<TciReport> {
    let grid = Grid64::new(1.0, 32)?;
    let params = ModelParams64::new(3.0, FluxFamily::Zero, DiffusionFamily::BoundedSine(1.0), 0.1, 100, 1.0)?;
    let u0 = Field64::from_fn(&grid, |x| (PI * x).sin())?;
    let mut suite = DriftShape::STANDARD
        .iter()
        .map(|&sh| DriftCase::from_shape(sh, &params, &[1.0, 2.0, 4.0]))
        .collect::<Result<Vec<_>>>()?;
    suite.push(DriftCase::from_shape(DriftShape::Zero, &params, &[1.0])?);
    tci_sweep(&params, &suite, 500, SEED, &u0, &grid, &NewtonSettings64::default())
}

fn tci_surrogate() -> Result<Outcome> {
    let rep = tci_report()?;
    let ratios_finite = rep
        .rows
        .iter()
        .filter(|r| r.entropy > 0.0)
        .all(|r| r.ratio.is_some_and(f64::is_finite));
    let spreads: Vec<(&str, Option<f64>)> = DriftShape::STANDARD
        .iter()
        .map(|sh| (sh.name(), rep.scale_spread(sh.name())))
        .collect();
    let spreads_ok = spreads.iter().all(|(_, s)| s.is_some_and(|x| x <= 3.0));
    let zero_exact = rep
        .rows
        .iter()
        .filter(|r| r.g_id == DriftShape::Zero.name())
        .all(|r| r.mean_sq_distance == 0.0);
    let spread_text: Vec<String> = spreads
        .iter()
        .map(|(n, s)| format!("{n} {}", s.map_or("undefined".into(), |x| format!("{x:.3}"))))
        .collect();
    Ok(Outcome::new(
        ratios_finite && spreads_ok && zero_exact,
        format!(
            "ratios finite: {ratios_finite}; scale spreads (<= 3): {}; zero drift distance exactly 0: {zero_exact}; C_emp {:?}",
            spread_text.join(", "),
            rep.c_emp
        ),
    ))
}

fn determinism() -> Result<Outcome> {
    let ldp_csv = |rep: &LdpReport<f64>| -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_ldp_csv(rep, &mut buf)?;
        Ok(buf)
    };
    let tci_csv = |rep: &TciReport| -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_tci_csv(rep, &mut buf)?;
        Ok(buf)
    };
    let ldp_same = ldp_csv(&ldp_report()?)? == ldp_csv(&ldp_report()?)?;
    let tci_same = tci_csv(&tci_report()?)? == tci_csv(&tci_report()?)?;
    Ok(Outcome::new(
        ldp_same && tci_same,
        format!("LDP report identical: {ldp_same}; TCI report identical: {tci_same}"),
    ))
}
