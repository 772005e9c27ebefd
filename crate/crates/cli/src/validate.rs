//! Self-contained regression and property checks behind `splap validate`.

use std::f64::consts::PI;

use splap::analysis::{audit_energy_ledger, l1_contraction_experiment, monotonicity_sample_check};
use splap::control::{project_control, FineTable};
use splap::rng::{mix_seed, GaussianStream};
use splap::stepper::{implicit_step, run_skeleton};
use splap::{Control64, DiffusionFamily, Field64, FluxFamily, Grid64, ModelParams64, NewtonSettings64, Result};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            passed: value <= tolerance,
            value,
            tolerance,
            detail,
        }
    }
}

/// Runs every check; the seed drives the randomized suites.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        heat_error()?,
        heat_refinement()?,
        single_node()?,
        energy_audit(seed)?,
        monotonicity(seed)?,
        projection(seed)?,
        contraction(seed)?,
    ])
}

fn heat_max_error(n_cells: usize, n_steps: usize, horizon: f64) -> Result<f64> {
    let grid = Grid64::new(1.0, n_cells)?;
    let params = ModelParams64::new(2.0, FluxFamily::Zero, DiffusionFamily::Zero, horizon, n_steps, 0.0)?;
    let u0 = Field64::from_fn(&grid, |x| (PI * x).sin())?;
    let traj = run_skeleton(
        &params,
        &Control64::zeros(n_steps, params.tau()),
        &u0,
        &grid,
        &NewtonSettings64::default(),
    )?;
    let exact = Field64::from_fn(&grid, |x| (-PI * PI * horizon).exp() * (PI * x).sin())?;
    Ok((traj.terminal() - &exact).max_abs())
}

fn heat_error() -> Result<Check> {
    let e = heat_max_error(128, 4096, 0.1)?;
    Ok(Check::at_most(
        "heat_max_error",
        e,
        5e-3,
        "p=2, grid 128, N=4096, T=0.1".into(),
    ))
}

fn heat_refinement() -> Result<Check> {
    let coarse = heat_max_error(32, 100_000, 0.1)?;
    let fine = heat_max_error(64, 100_000, 0.1)?;
    let ratio = coarse / fine;
    Ok(Check {
        name: "heat_refinement_ratio",
        passed: (3.2..=4.8).contains(&ratio),
        value: ratio,
        tolerance: 4.8,
        detail: format!("grid 32 -> 64 at N=100000, expected in [3.2, 4.8] (errors {coarse:.3e}, {fine:.3e})"),
    })
}

fn single_node() -> Result<Check> {
    let grid = Grid64::new(1.0, 2)?;
    let params = ModelParams64::new(3.0, FluxFamily::Zero, DiffusionFamily::Zero, 0.1, 1, 0.0)?;
    let u = implicit_step(
        &Field64::new(vec![1.0])?,
        &Field64::new(vec![0.0])?,
        &params,
        &grid,
        &NewtonSettings64::default(),
    )?;
    let err = (u[0] - 0.537592).abs();
    Ok(Check::at_most("single_node_oracle", err, 1e-6, format!("u = {}", u[0])))
}

fn energy_audit(seed: u64) -> Result<Check> {
    let mut rng = GaussianStream::new(mix_seed(seed, 1));
    let s = NewtonSettings64::default();
    let mut violations = 0;
    for i in 0..20 {
        let p = [2.5, 3.0, 4.0][i % 3];
        let grid = Grid64::new(1.0, 16)?;
        let a = 0.5 + 1.5 * rng.uniform_open0();
        let params = ModelParams64::new(p, FluxFamily::Zero, DiffusionFamily::Linear(a), 0.1, 40, 0.0)?;
        let h = Control64::new((0..40).map(|_| 4.0 * rng.uniform_open0() - 2.0).collect(), params.tau())?;
        let amp = 2.0 * rng.uniform_open0();
        let u0 = Field64::from_fn(&grid, |x| amp * (PI * x).sin() + x * (1.0 - x))?;
        let traj = run_skeleton(&params, &h, &u0, &grid, &s)?;
        violations += audit_energy_ledger(&traj, &params, &grid, s.residual_tol).len();
    }
    Ok(Check::at_most(
        "energy_ledger_violations",
        violations as f64,
        0.0,
        "20 random configs, p in {2.5, 3, 4}, linear H".into(),
    ))
}

fn monotonicity(seed: u64) -> Result<Check> {
    let mut worst = f64::INFINITY;
    for (i, p) in [2.5, 3.0, 4.0].into_iter().enumerate() {
        let c = monotonicity_sample_check(p, 100_000, mix_seed(seed, 10 + i as u64))?;
        worst = worst.min(c.worst_slack);
    }
    let eq = splap::analysis::monotonicity_slack(1.0, -1.0, 3.0);
    Ok(Check {
        name: "monotonicity_worst_slack",
        passed: worst >= -1e-12 && eq == 0.0,
        value: worst,
        tolerance: -1e-12,
        detail: format!("1e5 pairs per p; equality case slack {eq}"),
    })
}

fn projection(seed: u64) -> Result<Check> {
    let mut rng = GaussianStream::new(mix_seed(seed, 2));
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
    Ok(Check::at_most(
        "projection_excess",
        worst,
        1e-6,
        "100 random smooth controls, N=40".into(),
    ))
}

fn contraction(seed: u64) -> Result<Check> {
    let mut rng = GaussianStream::new(mix_seed(seed, 3));
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
        let tol = 10.0 * s.residual_tol + 0.05 * rep.gap[0];
        worst = worst.max(rep.max_step_increase() - tol);
    }
    Ok(Check::at_most(
        "contraction_excess",
        worst,
        0.0,
        "10 random pairs, p=3, f linear, grid 32, N=100, h=0".into(),
    ))
}
