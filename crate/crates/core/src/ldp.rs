//! Rate-function estimation and rare-event Monte Carlo.
//!
//! The rate of a terminal state `f` is `inf { ½∫h² : u_h(T) = f }` over
//! skeleton trajectories. The hard constraint is relaxed to a quadratic
//! terminal penalty,
//!
//! ```text
//! J(h) = ½ τ Σ h_k² + (λ/2) ‖u_h(T) - target‖²
//! ```
//!
//! minimized by BFGS with Armijo backtracking and central finite-difference
//! gradients, with λ raised along a continuation ladder.

use rayon::prelude::*;

use crate::control::{control_energy, sample_brownian_indexed, Control};
use crate::grid::{Field, Grid};
use crate::rng::mix_seed;
use crate::stats::{wilson_interval, Z95};
use crate::stepper::{run_sde, run_skeleton, ModelParams, NewtonSettings};
use crate::{Error, Result, Scalar};

/// Penalty weights of the continuation ladder.
pub const LAMBDA_LADDER: [f64; 3] = [10.0, 100.0, 1000.0];

/// Flag attached to zero-hit rows.
pub const BELOW_FLOOR: &str = "below Monte Carlo floor";

/// Model, initial datum, grid and solver settings shared by every run of an experiment.
#[derive(Clone, Debug)]
pub struct LdpSetup<T> {
    pub params: ModelParams<T>,
    pub u0: Field<T>,
    pub grid: Grid<T>,
    pub newton: NewtonSettings<T>,
}

impl<T: Scalar> LdpSetup<T> {
    /// Uses a residual tolerance of `1e-12` so finite-difference gradients stay clean.
    pub fn new(params: ModelParams<T>, u0: Field<T>, grid: Grid<T>) -> Result<Self> {
        if u0.len() != grid.n_interior() {
            return Err(Error::SizeMismatch {
                expected: grid.n_interior(),
                found: u0.len(),
            });
        }
        Ok(Self {
            params,
            u0,
            grid,
            newton: NewtonSettings::default().with_tol(T::lit(1e-12)),
        })
    }

    pub fn with_params(&self, params: ModelParams<T>) -> Self {
        Self { params, ..self.clone() }
    }

    /// Terminal state of the skeleton equation driven by `h`.
    pub fn skeleton_terminal(&self, h: &Control<T>) -> Result<Field<T>> {
        let traj = run_skeleton(&self.params, h, &self.u0, &self.grid, &self.newton)?;
        Ok(traj
            .fields
            .into_iter()
            .next_back()
            .expect("trajectory has a terminal state"))
    }

    /// Terminal state of the uncontrolled skeleton equation.
    pub fn deterministic_terminal(&self) -> Result<Field<T>> {
        self.skeleton_terminal(&Control::zeros(self.params.n_steps(), self.params.tau()))
    }

    fn control(&self, h: &[f64]) -> Result<Control<T>> {
        Control::new(h.iter().map(|&v| T::lit(v)).collect(), self.params.tau())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerSettings {
    pub max_iters: usize,
    /// Stop when `‖∇J‖_∞ ≤ grad_tol · max(1, J)`, with the gradient taken in
    /// `L²(0,T)` for controls (`∂J/∂h_k / τ`) and in the discrete `L²` of the
    /// grid for boundary directions (`∂J/∂d_i / h`), so the test does not
    /// weaken as the partition is refined.
    pub grad_tol: f64,
    /// Finite-difference step, relative to `max(1, |x_i|)`.
    pub fd_step: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_iters: 500,
            grad_tol: 1e-6,
            fd_step: 1e-4,
            armijo: 1e-4,
            max_backtracks: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateResult<T> {
    /// `control_energy(optimal_control)`
    pub i_value: T,
    pub optimal_control: Control<T>,
    /// `‖u_h(T) - target‖` for the optimal control.
    pub terminal_gap: T,
    /// Final value of the penalized objective.
    pub objective: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Penalized minimization from `h ≡ 0`.
pub fn rate_function_estimate<T: Scalar>(
    setup: &LdpSetup<T>,
    target: &Field<T>,
    lambda: f64,
    n_ctrl: usize,
    opt: &OptimizerSettings,
) -> Result<RateResult<T>> {
    check_n_ctrl(setup, n_ctrl)?;
    rate_function_from(setup, target, lambda, &vec![0.0; n_ctrl], opt)
}

/// Penalized minimization from an arbitrary starting control.
pub fn rate_function_from<T: Scalar>(
    setup: &LdpSetup<T>,
    target: &Field<T>,
    lambda: f64,
    start: &[f64],
    opt: &OptimizerSettings,
) -> Result<RateResult<T>> {
    check_n_ctrl(setup, start.len())?;
    check_lambda(lambda)?;
    if target.len() != setup.grid.n_interior() {
        return Err(Error::SizeMismatch {
            expected: setup.grid.n_interior(),
            found: target.len(),
        });
    }
    let objective = Objective {
        setup,
        goal: Goal::Point(target),
        lambda,
    };
    let out = objective.minimize(start.to_vec(), opt)?;
    objective.finish(out, start.len())
}

/// Runs the penalty ladder, warm-starting each weight from the previous optimum.
/// Returns one result per weight; the last is the estimate.
pub fn rate_function_continuation<T: Scalar>(
    setup: &LdpSetup<T>,
    target: &Field<T>,
    ladder: &[f64],
    opt: &OptimizerSettings,
) -> Result<Vec<RateResult<T>>> {
    check_ladder(ladder)?;
    let mut start = vec![0.0; setup.params.n_steps()];
    let mut out = Vec::with_capacity(ladder.len());
    for &lambda in ladder {
        let r = rate_function_from(setup, target, lambda, &start, opt)?;
        start = r.optimal_control.values().iter().map(|v| v.as_f64()).collect();
        out.push(r);
    }
    Ok(out)
}

/// Complement of an open terminal L² ball: `‖u(T) - center‖ ≥ radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct EventSpec<T> {
    pub center: Field<T>,
    pub radius: T,
}

impl<T: Scalar> EventSpec<T> {
    pub fn new(center: Field<T>, radius: T) -> Result<Self> {
        if !(radius >= T::zero()) || !radius.is_finite() {
            return Err(Error::config(
                "event.radius",
                format!("must be finite and non-negative, got {radius}"),
            ));
        }
        Ok(Self { center, radius })
    }

    /// Centered at the uncontrolled skeleton terminal state.
    pub fn around_deterministic(setup: &LdpSetup<T>, radius: T) -> Result<Self> {
        Self::new(setup.deterministic_terminal()?, radius)
    }

    pub fn contains(&self, u: &Field<T>, grid: &Grid<T>) -> bool {
        (u - &self.center).l2(grid) >= self.radius
    }
}

/// Cheapest point of the event boundary: the rate result and the boundary point it targets.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryRate<T> {
    pub rate: RateResult<T>,
    pub boundary_point: Field<T>,
}

/// Minimizes over controls `h` and boundary points `center + radius · d/‖d‖`
/// jointly, for each weight of the ladder. The direction starts at `±center`
/// (or the first sine mode if the center vanishes); the cheaper branch wins.
pub fn event_rate_estimate<T: Scalar>(
    setup: &LdpSetup<T>,
    event: &EventSpec<T>,
    ladder: &[f64],
    opt: &OptimizerSettings,
) -> Result<BoundaryRate<T>> {
    check_ladder(ladder)?;
    let grid = &setup.grid;
    let n = setup.params.n_steps();
    let seed_dir: Vec<f64> = if event.center.l2(grid) > T::zero() {
        event.center.iter().map(|v| v.as_f64()).collect()
    } else {
        let pi = std::f64::consts::PI;
        grid.nodes()
            .skip(1)
            .take(grid.n_interior())
            .map(|x| (pi * x.as_f64() / grid.length().as_f64()).sin())
            .collect()
    };
    let norm = l2(&seed_dir, grid.spacing().as_f64());
    let mut best: Option<(f64, BoundaryRate<T>)> = None;
    for sign in [1.0, -1.0] {
        let mut x = vec![0.0; n];
        x.extend(seed_dir.iter().map(|v| sign * v / norm));
        let mut last = None;
        for &lambda in ladder {
            let objective = Objective {
                setup,
                goal: Goal::Sphere(event),
                lambda,
            };
            let out = objective.minimize(x, opt)?;
            x = out.x.clone();
            let f = out.f;
            last = Some((f, objective.finish(out, n)?));
        }
        let (f, rate) = last.expect("ladder is non-empty");
        let boundary_point = sphere_point(event, &x[n..], grid)?;
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, BoundaryRate { rate, boundary_point }));
        }
    }
    Ok(best.expect("two branches were tried").1)
}

/// Hit frequency with a Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbEstimate {
    pub p_hat: f64,
    pub n_hits: usize,
    pub n_samples: usize,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl ProbEstimate {
    pub fn from_counts(n_hits: usize, n_samples: usize) -> Self {
        let (wilson_low, wilson_high) = wilson_interval(n_hits, n_samples, Z95);
        Self {
            p_hat: n_hits as f64 / n_samples as f64,
            n_hits,
            n_samples,
            wilson_low,
            wilson_high,
        }
    }
}

/// Fraction of `m` independent small-noise trajectories whose terminal state
/// lies in the event. Trajectory `i` uses the Brownian stream `mix_seed(base_seed, i)`.
pub fn rare_event_probability<T: Scalar>(
    setup: &LdpSetup<T>,
    event: &EventSpec<T>,
    m: usize,
    base_seed: u64,
) -> Result<ProbEstimate> {
    if m == 0 {
        return Err(Error::config("experiment.M", "must be at least 1"));
    }
    if event.center.len() != setup.grid.n_interior() {
        return Err(Error::SizeMismatch {
            expected: setup.grid.n_interior(),
            found: event.center.len(),
        });
    }
    let p = &setup.params;
    let hits = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let seed = mix_seed(base_seed, i);
            let hit = sample_brownian_indexed(p.n_steps(), p.tau(), base_seed, i)
                .and_then(|w| run_sde(p, &w, &setup.u0, &setup.grid, &setup.newton))
                .map(|traj| event.contains(traj.terminal(), &setup.grid))
                .map_err(|e| Error::Sample {
                    seed,
                    source: Box::new(e),
                })?;
            Ok(usize::from(hit))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(ProbEstimate::from_counts(hits, m))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LdpRow {
    pub epsilon: f64,
    pub estimate: ProbEstimate,
    /// `ε² log p̂`; `None` for zero-hit rows.
    pub eps2_log_p: Option<f64>,
    pub flag: Option<&'static str>,
}

impl LdpRow {
    fn new(epsilon: f64, estimate: ProbEstimate) -> Self {
        let e2 = epsilon * epsilon;
        let (eps2_log_p, flag) = if estimate.n_hits == 0 {
            (None, Some(BELOW_FLOOR))
        } else {
            (Some(e2 * estimate.p_hat.ln()), None)
        };
        Self {
            epsilon,
            estimate,
            eps2_log_p,
            flag,
        }
    }

    /// `[ε² log wilson_low, ε² log wilson_high]`; the lower end is `-∞` when the interval reaches 0.
    pub fn log_interval(&self) -> (f64, f64) {
        let e2 = self.epsilon * self.epsilon;
        let lo = if self.estimate.wilson_low > 0.0 {
            e2 * self.estimate.wilson_low.ln()
        } else {
            f64::NEG_INFINITY
        };
        (lo, e2 * self.estimate.wilson_high.ln())
    }

    /// `ε² (log p̂ - log wilson_low)`.
    pub fn lower_margin(&self) -> f64 {
        match self.eps2_log_p {
            Some(v) => v - self.log_interval().0,
            None => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LdpReport<T> {
    pub rows: Vec<LdpRow>,
    /// `-Î`; `None` when the event cannot be reached by any control.
    pub rate_bound: Option<f64>,
    pub boundary: Option<BoundaryRate<T>>,
}

impl<T: Scalar> LdpReport<T> {
    /// Whether some monotone sequence (in either direction) passes through
    /// every row's log-interval. Zero-hit rows fail.
    pub fn monotone_within_error(&self) -> bool {
        if self.rows.iter().any(|r| r.eps2_log_p.is_none()) {
            return false;
        }
        let iv: Vec<(f64, f64)> = self.rows.iter().map(LdpRow::log_interval).collect();
        let fits = |ivs: &[(f64, f64)]| {
            let mut floor = f64::NEG_INFINITY;
            ivs.iter().all(|&(lo, hi)| {
                floor = floor.max(lo);
                floor <= hi
            })
        };
        let rev: Vec<(f64, f64)> = iv.iter().rev().copied().collect();
        fits(&iv) || fits(&rev)
    }

    /// Rows violating `ε² log p̂ ≥ -Î - margin`.
    pub fn lower_bound_violations(&self) -> Vec<usize> {
        let Some(bound) = self.rate_bound else {
            return Vec::new();
        };
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| match r.eps2_log_p {
                Some(v) => v < bound - r.lower_margin(),
                None => true,
            })
            .map(|(i, _)| i)
            .collect()
    }
}

/// Estimates `P(u^ε(T) ∈ event)` for each `ε` and the rate bound `-Î` from
/// the cheapest boundary point. All rows share `base_seed`.
pub fn ldp_diagnostic<T: Scalar>(
    setup: &LdpSetup<T>,
    epsilons: &[f64],
    event: &EventSpec<T>,
    m: usize,
    base_seed: u64,
    ladder: &[f64],
    opt: &OptimizerSettings,
) -> Result<LdpReport<T>> {
    if epsilons.is_empty() || epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::config(
            "experiment.epsilons",
            "must be non-empty and strictly decreasing",
        ));
    }
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let params = setup.params.with_epsilon(T::lit(eps))?;
        let est = rare_event_probability(&setup.with_params(params), event, m, base_seed)?;
        rows.push(LdpRow::new(eps, est));
    }
    let (rate_bound, boundary) = if event.radius == T::zero() {
        (Some(0.0), None)
    } else if setup.params.diffusion().is_zero() {
        (None, None)
    } else {
        let b = event_rate_estimate(setup, event, ladder, opt)?;
        (Some(-b.rate.i_value.as_f64()), Some(b))
    };
    Ok(LdpReport {
        rows,
        rate_bound,
        boundary,
    })
}

fn check_n_ctrl<T: Scalar>(setup: &LdpSetup<T>, n_ctrl: usize) -> Result<()> {
    if n_ctrl != setup.params.n_steps() {
        return Err(Error::config(
            "rate.n_ctrl",
            format!("must equal model.n_steps = {}, got {n_ctrl}", setup.params.n_steps()),
        ));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::config(
            "experiment.lambda_ladder",
            format!("penalty weight must be positive, got {lambda}"),
        ));
    }
    Ok(())
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::config("experiment.lambda_ladder", "must be non-empty"));
    }
    ladder.iter().try_for_each(|&l| check_lambda(l))
}

fn l2(v: &[f64], h: f64) -> f64 {
    (h * v.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

fn sphere_point<T: Scalar>(event: &EventSpec<T>, d: &[f64], grid: &Grid<T>) -> Result<Field<T>> {
    let norm = l2(d, grid.spacing().as_f64());
    if !(norm > 0.0) {
        return Err(Error::NonFinite { step: None });
    }
    let r = event.radius.as_f64();
    Field::new(
        event
            .center
            .iter()
            .zip(d)
            .map(|(&c, &di)| c + T::lit(r * di / norm))
            .collect(),
    )
}

enum Goal<'a, T> {
    Point(&'a Field<T>),
    /// Decision vector is `[h; d]`; the target is `center + radius · d/‖d‖`.
    Sphere(&'a EventSpec<T>),
}

struct Objective<'a, T> {
    setup: &'a LdpSetup<T>,
    goal: Goal<'a, T>,
    lambda: f64,
}

struct Outcome {
    x: Vec<f64>,
    f: f64,
    iterations: usize,
    converged: bool,
}

impl<T: Scalar> Objective<'_, T> {
    fn n_ctrl(&self) -> usize {
        self.setup.params.n_steps()
    }

    fn terminal(&self, h: &[f64]) -> Result<Field<T>> {
        self.setup.skeleton_terminal(&self.setup.control(h)?)
    }

    /// Objective given the terminal state of the control part of `x`.
    fn cost_with(&self, x: &[f64], terminal: &Field<T>) -> Result<f64> {
        let n = self.n_ctrl();
        let tau = self.setup.params.tau().as_f64();
        let energy = 0.5 * tau * x[..n].iter().map(|v| v * v).sum::<f64>();
        let gap = self.gap(x, terminal)?;
        Ok(energy + 0.5 * self.lambda * gap * gap)
    }

    fn gap(&self, x: &[f64], terminal: &Field<T>) -> Result<f64> {
        let grid = &self.setup.grid;
        let target = match self.goal {
            Goal::Point(t) => t.clone(),
            Goal::Sphere(ev) => sphere_point(ev, &x[self.n_ctrl()..], grid)?,
        };
        Ok((terminal - &target).l2(grid).as_f64())
    }

    fn cost(&self, x: &[f64]) -> Result<f64> {
        let u = self.terminal(&x[..self.n_ctrl()])?;
        self.cost_with(x, &u)
    }

    fn gradient(&self, x: &[f64], opt: &OptimizerSettings) -> Result<Vec<f64>> {
        let n = self.n_ctrl();
        let central = |i: usize, f: &dyn Fn(&[f64]) -> Result<f64>| -> Result<f64> {
            let step = opt.fd_step * x[i].abs().max(1.0);
            let mut xp = x.to_vec();
            xp[i] = x[i] + step;
            let fp = f(&xp)?;
            xp[i] = x[i] - step;
            let fm = f(&xp)?;
            Ok((fp - fm) / (2.0 * step))
        };
        let mut g = (0..n)
            .into_par_iter()
            .map(|i| central(i, &|y| self.cost(y)))
            .collect::<Result<Vec<f64>>>()?;
        if x.len() > n {
            let u = self.terminal(&x[..n])?;
            for i in n..x.len() {
                g.push(central(i, &|y| self.cost_with(y, &u))?);
            }
        }
        Ok(g)
    }

    /// Diagonal of the initial inverse Hessian: `1/τ` on controls, the
    /// inverse penalty curvature on direction coordinates.
    fn initial_inverse(&self, dim: usize) -> Vec<f64> {
        let n = self.n_ctrl();
        let tau = self.setup.params.tau().as_f64();
        let mut d = vec![1.0 / tau; n];
        if let Goal::Sphere(ev) = self.goal {
            let r = ev.radius.as_f64();
            let h = self.setup.grid.spacing().as_f64();
            d.resize(dim, 1.0 / (self.lambda * (r * r).max(1e-12) * h));
        }
        d
    }

    /// Quadrature weights of the decision vector.
    fn weights(&self, dim: usize) -> Vec<f64> {
        let mut w = vec![self.setup.params.tau().as_f64(); self.n_ctrl()];
        w.resize(dim, self.setup.grid.spacing().as_f64());
        w
    }

    fn minimize(&self, x0: Vec<f64>, opt: &OptimizerSettings) -> Result<Outcome> {
        let dim = x0.len();
        let h0 = self.initial_inverse(dim);
        bfgs(
            x0,
            |x| self.cost(x),
            |x| self.gradient(x, opt),
            &h0,
            &self.weights(dim),
            opt,
        )
    }

    fn finish(&self, out: Outcome, n: usize) -> Result<RateResult<T>> {
        let control = self.setup.control(&out.x[..n])?;
        let u = self.setup.skeleton_terminal(&control)?;
        let terminal_gap = T::lit(self.gap(&out.x, &u)?);
        Ok(RateResult {
            i_value: control_energy(&control),
            optimal_control: control,
            terminal_gap,
            objective: out.f,
            lambda: self.lambda,
            iterations: out.iterations,
            converged: out.converged,
        })
    }
}

/// BFGS on the inverse Hessian with Armijo backtracking. The inverse is reset
/// to `diag(h0)` whenever it stops producing descent directions. The
/// convergence test measures `g_i / weights_i`.
fn bfgs(
    mut x: Vec<f64>,
    f: impl Fn(&[f64]) -> Result<f64>,
    grad: impl Fn(&[f64]) -> Result<Vec<f64>>,
    h0: &[f64],
    weights: &[f64],
    opt: &OptimizerSettings,
) -> Result<Outcome> {
    let n = x.len();
    let reset = |hm: &mut Vec<f64>| {
        hm.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            hm[i * n + i] = h0[i];
        }
    };
    let mut hinv = vec![0.0; n * n];
    reset(&mut hinv);
    let mut fx = f(&x)?;
    let mut g = grad(&x)?;
    let mut fresh = true;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let gmax = g.iter().zip(weights).fold(0.0f64, |m, (v, w)| m.max(v.abs() / w));
        if gmax <= opt.grad_tol * fx.abs().max(1.0) {
            converged = true;
            break;
        }
        if iterations >= opt.max_iters {
            break;
        }
        let mut d = matvec(&hinv, &g, n);
        d.iter_mut().for_each(|v| *v = -*v);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            reset(&mut hinv);
            fresh = true;
            d = (0..n).map(|i| -h0[i] * g[i]).collect();
            slope = dot(&g, &d);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opt.max_backtracks {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            // Failed solves on a trial point only shorten the step.
            if let Ok(fn_) = f(&xn) {
                if fn_.is_finite() && fn_ <= fx + opt.armijo * alpha * slope {
                    accepted = Some((xn, fn_));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            if fresh {
                break;
            }
            reset(&mut hinv);
            fresh = true;
            continue;
        };
        let gn = grad(&xn)?;
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            let rho = 1.0 / sy;
            let hy = matvec(&hinv, &y, n);
            let yhy = dot(&y, &hy);
            let c = rho * rho * yhy + rho;
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += c * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
            fresh = false;
        }
        x = xn;
        fx = fn_;
        g = gn;
        iterations += 1;
    }
    Ok(Outcome {
        x,
        f: fx,
        iterations,
        converged,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn matvec(m: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
}
