//! Semi-implicit time stepping.
//!
//! One step solves the nonlinear elliptic problem
//!
//! ```text
//! u - τ div(|∇u|^{p-2}∇u + f(u)) = u_prev + forcing
//! ```
//!
//! where the forcing is assembled explicitly from the previous state by the
//! driver: `τ H(u_k) h_{k+1}` for the skeleton equation, `ε H(u_k) ΔW_{k+1}`
//! for the stochastic equation, and the sum of both for the drift-shifted
//! equation used in the coupling experiments.
//!
//! The solve is a Newton iteration on the tridiagonal Jacobian, warm-started
//! at `u_prev`, with a halving line search on the discrete L² residual. If
//! Newton stalls the solver falls back to a damped frozen-coefficient
//! fixed-point iteration.

use crate::control::{BrownianPath, Control};
use crate::family::{DiffusionFamily, FluxFamily};
use crate::grid::{
    check_p, divergence_into, edge_average_f_into, gradient_into, inner, l2_norm, p_flux_scalar, w1p_power, Field, Grid,
};
use crate::tridiag::Tridiagonal;
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    p: T,
    flux: FluxFamily<T>,
    diffusion: DiffusionFamily<T>,
    horizon: T,
    n_steps: usize,
    epsilon: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(
        p: T,
        flux: FluxFamily<T>,
        diffusion: DiffusionFamily<T>,
        horizon: T,
        n_steps: usize,
        epsilon: T,
    ) -> Result<Self> {
        check_p(p)?;
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::config(
                "model.T",
                format!("horizon must be positive, got {horizon}"),
            ));
        }
        if n_steps == 0 {
            return Err(Error::config("model.n_steps", "must be at least 1"));
        }
        if !(epsilon >= T::zero()) || !epsilon.is_finite() {
            return Err(Error::config(
                "model.epsilon",
                format!("noise level must be non-negative, got {epsilon}"),
            ));
        }
        for (key, v) in [("model.f_param", flux.param()), ("model.h_param", diffusion.param())] {
            if !v.is_finite() {
                return Err(Error::config(key, "family parameter must be finite"));
            }
        }
        Ok(Self {
            p,
            flux,
            diffusion,
            horizon,
            n_steps,
            epsilon,
        })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn flux(&self) -> &FluxFamily<T> {
        &self.flux
    }

    pub fn diffusion(&self) -> &DiffusionFamily<T> {
        &self.diffusion
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn tau(&self) -> T {
        self.horizon / T::from_usize(self.n_steps).unwrap()
    }

    pub fn with_epsilon(mut self, epsilon: T) -> Result<Self> {
        if !(epsilon >= T::zero()) {
            return Err(Error::config("model.epsilon", "noise level must be non-negative"));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn with_diffusion(mut self, diffusion: DiffusionFamily<T>) -> Self {
        self.diffusion = diffusion;
        self
    }

    pub fn with_flux(mut self, flux: FluxFamily<T>) -> Self {
        self.flux = flux;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonSettings<T> {
    /// Stopping tolerance on the discrete L² norm of the residual.
    pub residual_tol: T,
    pub max_iters: usize,
    pub max_halvings: usize,
    /// `δ` in the Jacobian diffusivity `(p-1)(|g|² + δ²)^{(p-2)/2}`. Only the
    /// linearization is smoothed; the residual is always the exact scheme.
    pub jacobian_smoothing: T,
    /// Relative residual reduction below which a Newton iteration counts as stalled.
    pub stall_reduction: T,
    pub fallback_iters: usize,
    pub fallback_damping: T,
}

impl<T: Scalar> Default for NewtonSettings<T> {
    fn default() -> Self {
        Self {
            residual_tol: T::lit(1e-10),
            max_iters: 50,
            max_halvings: 30,
            jacobian_smoothing: T::zero(),
            stall_reduction: T::lit(1e-3),
            fallback_iters: 200,
            fallback_damping: T::lit(0.5),
        }
    }
}

impl<T: Scalar> NewtonSettings<T> {
    pub fn with_tol(mut self, tol: T) -> Self {
        self.residual_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > T::zero()) {
            return Err(Error::config("newton.residual_tol", "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::config("newton.max_iters", "must be at least 1"));
        }
        if !(self.jacobian_smoothing >= T::zero()) || !self.jacobian_smoothing.is_finite() {
            return Err(Error::config(
                "newton.jacobian_smoothing",
                "must be finite and non-negative",
            ));
        }
        if !(self.fallback_damping > T::zero() && self.fallback_damping <= T::one()) {
            return Err(Error::config("newton.fallback_damping", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Terms of the per-step energy balance
/// `½‖u_{k+1}‖² - ½‖u_k‖² + ½‖u_{k+1} - u_k‖² + τ‖∇u_{k+1}‖_p^p ≤ (forcing, u_{k+1})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord<T> {
    pub l2_before: T,
    pub l2_after: T,
    pub increment_l2: T,
    /// `τ ‖∇u_{k+1}‖_p^p`
    pub w1p_term: T,
    /// `(forcing, u_{k+1})`
    pub forcing_inner_product: T,
    pub newton_iters: usize,
    pub newton_residual: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    /// `fields[k]` is the state at `t_k = k τ`; `fields[0]` is the regularized datum.
    pub fields: Vec<Field<T>>,
    pub ledger: Vec<StepRecord<T>>,
    pub tau: T,
}

impl<T: Scalar> Trajectory<T> {
    pub fn terminal(&self) -> &Field<T> {
        self.fields.last().expect("trajectory has at least one field")
    }

    pub fn n_steps(&self) -> usize {
        self.ledger.len()
    }

    pub fn time(&self, k: usize) -> T {
        self.tau * T::from_usize(k).unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats<T> {
    pub iters: usize,
    pub residual: T,
    pub used_fallback: bool,
}

/// The map `u ↦ u - τ div(|∇u|^{p-2}∇u + f(u))` on one grid.
struct StepOperator<'a, T> {
    grid: &'a Grid<T>,
    p: T,
    flux: &'a FluxFamily<T>,
    tau: T,
}

impl<T: Scalar> StepOperator<'_, T> {
    /// `out = 𝒯(u) - rhs`; returns its discrete L² norm.
    fn residual(&self, u: &[T], rhs: &[T], edges: &mut [T], tmp: &mut [T], out: &mut [T]) -> T {
        let h = self.grid.spacing();
        gradient_into(u, h, edges);
        for g in edges.iter_mut() {
            *g = p_flux_scalar(*g, self.p);
        }
        if !self.flux.is_zero() {
            edge_average_f_into(u, self.flux, tmp);
            for (e, fa) in edges.iter_mut().zip(tmp.iter()) {
                *e += *fa;
            }
        }
        divergence_into(edges, h, out);
        for ((o, &ui), &bi) in out.iter_mut().zip(u).zip(rhs) {
            *o = ui - self.tau * *o - bi;
        }
        l2_norm(out, h)
    }

    fn jacobian(&self, u: &[T], smoothing: T, edges: &mut [T], jac: &mut Tridiagonal<T>) {
        let h = self.grid.spacing();
        let n = u.len();
        let half = T::lit(0.5);
        gradient_into(u, h, edges);
        for g in edges.iter_mut() {
            *g = self.diffusivity(*g, smoothing, true) / h;
        }
        let c = self.tau / h;
        for j in 0..n {
            let (a_left, a_right) = (edges[j], edges[j + 1]);
            jac.diag[j] = T::one() + c * (a_left + a_right);
            jac.upper[j] = if j + 1 < n {
                -c * (a_right + half * self.flux.derivative(u[j + 1]))
            } else {
                T::zero()
            };
            jac.lower[j] = if j > 0 {
                -c * (a_left - half * self.flux.derivative(u[j - 1]))
            } else {
                T::zero()
            };
        }
    }

    /// `(p-1)|g|^{p-2}` for the Newton linearization, `|g|^{p-2}` for the
    /// frozen-coefficient iteration.
    #[inline]
    fn diffusivity(&self, g: T, smoothing: T, derivative: bool) -> T {
        let two = T::lit(2.0);
        let factor = if derivative { self.p - T::one() } else { T::one() };
        if self.p == two {
            return factor;
        }
        let mag2 = g * g + smoothing * smoothing;
        if mag2 == T::zero() {
            return T::zero();
        }
        let pow = if self.p == T::lit(3.0) {
            mag2.sqrt()
        } else {
            mag2.powf((self.p - two) / two)
        };
        factor * pow
    }

    /// Linear system `u - τ div(κ ∇u) = rhs + τ div(f̄(u_frozen))` with `κ`
    /// frozen at `frozen`.
    fn frozen_solve(&self, frozen: &[T], rhs: &[T], edges: &mut [T], tmp: &mut [T]) -> Option<Vec<T>> {
        let h = self.grid.spacing();
        let n = frozen.len();
        gradient_into(frozen, h, edges);
        for g in edges.iter_mut() {
            *g = self.diffusivity(*g, T::zero(), false) / h;
        }
        let c = self.tau / h;
        let mut jac = Tridiagonal::zeros(n);
        for j in 0..n {
            jac.diag[j] = T::one() + c * (edges[j] + edges[j + 1]);
            jac.upper[j] = if j + 1 < n { -c * edges[j + 1] } else { T::zero() };
            jac.lower[j] = if j > 0 { -c * edges[j] } else { T::zero() };
        }
        let mut b = rhs.to_vec();
        if !self.flux.is_zero() {
            edge_average_f_into(frozen, self.flux, tmp);
            let mut div = vec![T::zero(); n];
            divergence_into(tmp, h, &mut div);
            for (bi, di) in b.iter_mut().zip(&div) {
                *bi += self.tau * *di;
            }
        }
        jac.solve(&b)
    }

    fn solve(&self, start: &[T], rhs: &[T], s: &NewtonSettings<T>) -> Result<(Vec<T>, SolveStats<T>)> {
        let n = start.len();
        let ne = n + 1;
        let mut u = start.to_vec();
        let mut edges = vec![T::zero(); ne];
        let mut tmp = vec![T::zero(); ne];
        let mut r = vec![T::zero(); n];
        let mut r_try = vec![T::zero(); n];
        let mut u_try = vec![T::zero(); n];
        let mut jac = Tridiagonal::zeros(n);

        let mut rn = self.residual(&u, rhs, &mut edges, &mut tmp, &mut r);
        if !rn.is_finite() {
            return Err(Error::NonFinite { step: None });
        }
        let mut iters = 0;
        while rn > s.residual_tol && iters < s.max_iters {
            self.jacobian(&u, s.jacobian_smoothing, &mut edges, &mut jac);
            let neg_r: Vec<T> = r.iter().map(|&x| -x).collect();
            let Some(dir) = jac.solve(&neg_r) else {
                break;
            };
            let mut alpha = T::one();
            let mut reduction = None;
            for _ in 0..=s.max_halvings {
                for ((t, &ui), &di) in u_try.iter_mut().zip(&u).zip(&dir) {
                    *t = ui + alpha * di;
                }
                let rn_try = self.residual(&u_try, rhs, &mut edges, &mut tmp, &mut r_try);
                if rn_try.is_finite() && rn_try < rn {
                    std::mem::swap(&mut u, &mut u_try);
                    std::mem::swap(&mut r, &mut r_try);
                    reduction = Some((rn - rn_try) / rn);
                    rn = rn_try;
                    break;
                }
                alpha *= T::lit(0.5);
            }
            let Some(reduction) = reduction else {
                break;
            };
            iters += 1;
            if reduction < s.stall_reduction && rn > s.residual_tol {
                break;
            }
        }
        if rn <= s.residual_tol {
            return Ok((
                u,
                SolveStats {
                    iters,
                    residual: rn,
                    used_fallback: false,
                },
            ));
        }
        // Damped frozen-coefficient fixed point, started from the best Newton iterate.
        let omega = s.fallback_damping;
        for _ in 0..s.fallback_iters {
            let Some(next) = self.frozen_solve(&u, rhs, &mut edges, &mut tmp) else {
                break;
            };
            for (ui, &vi) in u.iter_mut().zip(&next) {
                *ui = (T::one() - omega) * *ui + omega * vi;
            }
            iters += 1;
            rn = self.residual(&u, rhs, &mut edges, &mut tmp, &mut r);
            if !rn.is_finite() {
                return Err(Error::NonFinite { step: None });
            }
            if rn <= s.residual_tol {
                return Ok((
                    u,
                    SolveStats {
                        iters,
                        residual: rn,
                        used_fallback: true,
                    },
                ));
            }
        }
        Err(Error::NewtonFailure {
            step: None,
            residual: rn.as_f64(),
            iters,
        })
    }
}

/// Regularized initial datum: solves `u - τ Δ_p u = u0`.
pub fn regularize_initial<T: Scalar>(
    u0: &Field<T>,
    tau: T,
    p: T,
    grid: &Grid<T>,
    s: &NewtonSettings<T>,
) -> Result<Field<T>> {
    if !(tau > T::zero()) {
        return Err(Error::config("model.T", "time step must be positive"));
    }
    check_p(p)?;
    check_len(u0, grid)?;
    let op = StepOperator {
        grid,
        p,
        flux: &FluxFamily::Zero,
        tau,
    };
    let (u, _) = op.solve(u0.values(), u0.values(), s)?;
    Ok(Field::from_vec(u))
}

/// One semi-implicit step; `forcing` is the fully assembled explicit increment.
pub fn implicit_step<T: Scalar>(
    u_prev: &Field<T>,
    forcing: &Field<T>,
    params: &ModelParams<T>,
    grid: &Grid<T>,
    s: &NewtonSettings<T>,
) -> Result<Field<T>> {
    implicit_step_with_stats(u_prev, forcing, params, grid, s).map(|(u, _)| u)
}

pub fn implicit_step_with_stats<T: Scalar>(
    u_prev: &Field<T>,
    forcing: &Field<T>,
    params: &ModelParams<T>,
    grid: &Grid<T>,
    s: &NewtonSettings<T>,
) -> Result<(Field<T>, SolveStats<T>)> {
    check_len(u_prev, grid)?;
    check_len(forcing, grid)?;
    let rhs: Vec<T> = u_prev.iter().zip(forcing.iter()).map(|(&a, &b)| a + b).collect();
    if !rhs.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { step: None });
    }
    let op = StepOperator {
        grid,
        p: params.p,
        flux: &params.flux,
        tau: params.tau(),
    };
    let (u, stats) = op.solve(u_prev.values(), &rhs, s)?;
    Ok((Field::from_vec(u), stats))
}

fn check_len<T: Scalar>(u: &Field<T>, grid: &Grid<T>) -> Result<()> {
    if u.len() != grid.n_interior() {
        return Err(Error::SizeMismatch {
            expected: grid.n_interior(),
            found: u.len(),
        });
    }
    Ok(())
}

/// Runs the scheme with forcing `H(u_k) · coeff(k)`.
fn drive<T: Scalar>(
    params: &ModelParams<T>,
    u0: &Field<T>,
    grid: &Grid<T>,
    s: &NewtonSettings<T>,
    coeff: impl Fn(usize) -> T,
) -> Result<Trajectory<T>> {
    s.validate()?;
    let n = params.n_steps;
    let tau = params.tau();
    let h = grid.spacing();
    let start = regularize_initial(u0, tau, params.p, grid, s).map_err(|e| e.at_step(0))?;
    let mut fields = Vec::with_capacity(n + 1);
    let mut ledger = Vec::with_capacity(n);
    fields.push(start);
    for k in 0..n {
        let prev = &fields[k];
        let c = coeff(k);
        let forcing =
            Field::new(prev.iter().map(|&v| params.diffusion.eval(v) * c).collect()).map_err(|e| e.at_step(k + 1))?;
        let (next, stats) = implicit_step_with_stats(prev, &forcing, params, grid, s).map_err(|e| e.at_step(k + 1))?;
        let increment: Vec<T> = next.iter().zip(prev.iter()).map(|(&a, &b)| a - b).collect();
        ledger.push(StepRecord {
            l2_before: prev.l2(grid),
            l2_after: next.l2(grid),
            increment_l2: l2_norm(&increment, h),
            w1p_term: tau * w1p_power(next.values(), h, params.p),
            forcing_inner_product: inner(forcing.values(), next.values(), h),
            newton_iters: stats.iters,
            newton_residual: stats.residual,
        });
        fields.push(next);
    }
    Ok(Trajectory { fields, ledger, tau })
}

fn check_steps<T>(len: usize, params: &ModelParams<T>, what: &str) -> Result<()> {
    if len != params.n_steps {
        return Err(Error::config(
            what,
            format!("expected {} entries, found {len}", params.n_steps),
        ));
    }
    Ok(())
}

/// Skeleton equation: `du - div(...) dt = H(u) h(t) dt`.
pub fn run_skeleton<T: Scalar>(
    params: &ModelParams<T>,
    h: &Control<T>,
    u0: &Field<T>,
    grid: &Grid<T>,
    s: &NewtonSettings<T>,
) -> Result<Trajectory<T>> {
    check_steps(h.len(), params, "control")?;
    let tau = params.tau();
    drive(params, u0, grid, s, |k| tau * h.values()[k])
}

/// Small-noise equation: `du - div(...) dt = ε H(u) dW`.
pub fn run_sde<T: Scalar>(
    params: &ModelParams<T>,
    w: &BrownianPath<T>,
    u0: &Field<T>,
    grid: &Grid<T>,
    s: &NewtonSettings<T>,
) -> Result<Trajectory<T>> {
    check_steps(w.len(), params, "brownian")?;
    let eps = params.epsilon;
    drive(params, u0, grid, s, |k| eps * w.increments()[k])
}

/// Drift-shifted equation `du - div(...) dt = ε H(u) dW* + H(u) g dt`,
/// driven by the increments of `W*`. Sharing `w` with [`run_sde`] realizes
/// the coupling of the two laws.
pub fn run_girsanov<T: Scalar>(
    params: &ModelParams<T>,
    gdrift: &Control<T>,
    w: &BrownianPath<T>,
    u0: &Field<T>,
    grid: &Grid<T>,
    s: &NewtonSettings<T>,
) -> Result<Trajectory<T>> {
    check_steps(gdrift.len(), params, "drift")?;
    check_steps(w.len(), params, "brownian")?;
    let eps = params.epsilon;
    let tau = params.tau();
    drive(params, u0, grid, s, |k| {
        eps * w.increments()[k] + tau * gdrift.values()[k]
    })
}
