// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod validate;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use splap::control::sample_brownian_indexed;
use splap::ldp::{ldp_diagnostic, rate_function_continuation, OptimizerSettings};
use splap::rng::mix_seed;
use splap::stepper::{run_sde, run_skeleton};
use splap::tci::{check_coupling_params, tci_sweep};
use splap::{analysis, io, Error};

use crate::config::Config;

#[derive(Parser, Debug)]
#[command(name = "splap", version, about = "Stochastic p-Laplace laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, global = true, default_value = "configs/default.json")]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for Monte Carlo ensembles; 0 picks automatically.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// One small-noise trajectory with its energy ledger.
    Simulate,
    /// Skeleton trajectory driven by the configured control.
    Skeleton,
    /// Rate of the skeleton terminal state reached by the configured control.
    Rate,
    /// Rare-event probabilities against the rate bound.
    Ldp,
    /// Shared-noise coupling sweep over the drift suite.
    Tci,
    /// L¹ distance of two skeleton trajectories.
    Contraction,
    /// Heat-equation regression and property suites.
    Validate,
}

enum Failure {
    Core(Error),
    Checks(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_failure() { 2 } else { 1 })
        }
        Err(Failure::Checks(n)) => {
            eprintln!("error: {n} validation check(s) failed");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Error::config("--threads", e.to_string()))?;
    }
    let cfg = Config::load(&cli.config)?;
    if matches!(cli.command, Command::Tci) {
        check_coupling_params(&cfg.params)?;
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.spec.output_dir.clone());
    fs::create_dir_all(&out)?;
    match cli.command {
        Command::Simulate => simulate(&cfg, &out),
        Command::Skeleton => skeleton(&cfg, &out),
        Command::Rate => rate(&cfg, &out),
        Command::Ldp => ldp(&cfg, &out),
        Command::Tci => tci(&cfg, &out),
        Command::Contraction => contraction(&cfg, &out),
        Command::Validate => validate(&cfg, &out),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn simulate(cfg: &Config, out: &Path) -> Result<(), Failure> {
    let p = &cfg.params;
    let seed = cfg.base_seed();
    let w = sample_brownian_indexed(p.n_steps(), p.tau(), seed, 0)?;
    let traj = run_sde(p, &w, &cfg.u0, &cfg.grid, &cfg.newton).map_err(|e| Error::Sample {
        seed: mix_seed(seed, 0),
        source: Box::new(e),
    })?;
    io::write_ledger_csv(&traj, create(out, "ledger.csv")?)?;
    io::write_snapshots(&traj.fields, create(out, "fields.bin")?)?;
    println!("terminal L2 norm {}", traj.terminal().l2(&cfg.grid));
    Ok(())
}

fn skeleton(cfg: &Config, out: &Path) -> Result<(), Failure> {
    let h = cfg.control()?;
    let traj = run_skeleton(&cfg.params, &h, &cfg.u0, &cfg.grid, &cfg.newton)?;
    io::write_control_csv(&h, create(out, "control.csv")?)?;
    io::write_ledger_csv(&traj, create(out, "ledger.csv")?)?;
    io::write_snapshots(&traj.fields, create(out, "fields.bin")?)?;
    let violations = analysis::audit_energy_ledger(&traj, &cfg.params, &cfg.grid, cfg.newton.residual_tol);
    println!(
        "terminal L2 norm {}, energy-ledger violations {}",
        traj.terminal().l2(&cfg.grid),
        violations.len()
    );
    Ok(())
}

fn rate(cfg: &Config, out: &Path) -> Result<(), Failure> {
    let setup = cfg.ldp_setup()?;
    let target = setup.skeleton_terminal(&cfg.control()?)?;
    let stages = rate_function_continuation(
        &setup,
        &target,
        &cfg.spec.experiment.lambda_ladder,
        &OptimizerSettings::default(),
    )?;
    let mut w = create(out, "rate_summary.csv")?;
    writeln!(w, "lambda,i_value,terminal_gap,objective,iterations,converged")?;
    for r in &stages {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.lambda, r.i_value, r.terminal_gap, r.objective, r.iterations, r.converged
        )?;
        if !r.converged {
            eprintln!("warning: optimizer did not converge at lambda = {}", r.lambda);
        }
    }
    w.flush()?;
    let last = stages.last().expect("ladder is non-empty");
    io::write_control_csv(&last.optimal_control, create(out, "rate_control.csv")?)?;
    println!("I = {} (terminal gap {})", last.i_value, last.terminal_gap);
    Ok(())
}

fn ldp(cfg: &Config, out: &Path) -> Result<(), Failure> {
    let setup = cfg.ldp_setup()?;
    let event = cfg.event(&setup)?;
    let e = &cfg.spec.experiment;
    let rep = ldp_diagnostic(
        &setup,
        &e.epsilons,
        &event,
        e.m,
        e.base_seed,
        &e.lambda_ladder,
        &OptimizerSettings::default(),
    )?;
    io::write_ldp_csv(&rep, create(out, "ldp.csv")?)?;
    println!(
        "monotone within error: {}; rows below the rate bound: {:?}",
        rep.monotone_within_error(),
        rep.lower_bound_violations()
    );
    Ok(())
}

fn tci(cfg: &Config, out: &Path) -> Result<(), Failure> {
    let suite = cfg.drift_suite()?;
    let e = &cfg.spec.experiment;
    let rep = tci_sweep(&cfg.params, &suite, e.m, e.base_seed, &cfg.u0, &cfg.grid, &cfg.newton)?;
    io::write_tci_csv(&rep, create(out, "tci.csv")?)?;
    match rep.c_emp {
        Some(c) => println!("C_emp = {c}"),
        None => println!("C_emp undefined (no drift with positive entropy)"),
    }
    Ok(())
}

fn contraction(cfg: &Config, out: &Path) -> Result<(), Failure> {
    let h = cfg.control()?;
    let rep = analysis::l1_contraction_experiment(&cfg.params, &cfg.u0, &cfg.initial_b()?, &h, &cfg.grid, &cfg.newton)?;
    io::write_contraction_csv(&rep, create(out, "contraction.csv")?)?;
    println!(
        "largest one-step gap increase {}, largest envelope excess {}",
        rep.max_step_increase(),
        rep.max_envelope_excess()
    );
    Ok(())
}

fn validate(cfg: &Config, out: &Path) -> Result<(), Failure> {
    let checks = validate::run_all(cfg.base_seed())?;
    let mut w = create(out, "validate.csv")?;
    writeln!(w, "check,passed,value,tolerance,detail")?;
    for c in &checks {
        writeln!(
            w,
            "{},{},{},{},\"{}\"",
            c.name, c.passed, c.value, c.tolerance, c.detail
        )?;
        println!(
            "{} {:<26} value {:<12.4e} tolerance {:.1e}  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance,
            c.detail
        );
    }
    w.flush()?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}
