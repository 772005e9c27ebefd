//! Diagnostics built on the stepper: the convex regularizer of `|r|`, the
//! L¹ contraction experiment, the energy-ledger auditor, a stability
//! envelope and the sampler for the p-flux monotonicity inequality.

use crate::control::Control;
use crate::grid::{grad_l2, l1_norm, p_flux_scalar, Field, Grid};
use crate::rng::GaussianStream;
use crate::stepper::{run_skeleton, ModelParams, NewtonSettings, Trajectory};
use crate::{Error, Result, Scalar};

/// Width `ϑ` of the quadratic core of [`zeta`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaParams<T> {
    vartheta: T,
}

impl<T: Scalar> ZetaParams<T> {
    /// `sup_{|r|≤1} ||r| - ζ(r)|` for the piecewise-quadratic profile.
    pub const K1: f64 = 0.5;
    /// `sup_{|r|≤1} |ζ''(r)|`.
    pub const K2: f64 = 1.0;

    pub fn new(vartheta: T) -> Result<Self> {
        if vartheta > T::zero() && vartheta.is_finite() {
            Ok(Self { vartheta })
        } else {
            Err(Error::config("vartheta", "must be positive"))
        }
    }

    pub fn vartheta(&self) -> T {
        self.vartheta
    }
}

/// `ζ_ϑ(r) = r²/(2ϑ)` for `|r| ≤ ϑ`, `|r| - ϑ/2` otherwise.
pub fn zeta<T: Scalar>(r: T, zp: &ZetaParams<T>) -> T {
    let t = zp.vartheta;
    if r.abs() <= t {
        r * r / (T::lit(2.0) * t)
    } else {
        r.abs() - t / T::lit(2.0)
    }
}

pub fn zeta_prime<T: Scalar>(r: T, zp: &ZetaParams<T>) -> T {
    (r / zp.vartheta).max(-T::one()).min(T::one())
}

pub fn zeta_second<T: Scalar>(r: T, zp: &ZetaParams<T>) -> T {
    if r.abs() <= zp.vartheta {
        zp.vartheta.recip()
    } else {
        T::zero()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport<T> {
    pub times: Vec<T>,
    /// `‖u_a(t_k) - u_b(t_k)‖_{L¹}`
    pub gap: Vec<T>,
    /// `gap[0] · exp(Lip(H) τ Σ_{j≤k} |h_j|)`
    pub envelope: Vec<T>,
}

impl<T: Scalar> ContractionReport<T> {
    /// Largest one-step growth `max_k (gap[k+1] - gap[k])`.
    pub fn max_step_increase(&self) -> T {
        self.gap.windows(2).map(|w| w[1] - w[0]).fold(T::neg_infinity(), T::max)
    }

    /// Largest excess of the gap over the Grönwall envelope.
    pub fn max_envelope_excess(&self) -> T {
        self.gap
            .iter()
            .zip(&self.envelope)
            .map(|(&g, &e)| g - e)
            .fold(T::neg_infinity(), T::max)
    }
}

/// Runs two skeleton trajectories with the same control from different data
/// and records their L¹ distance.
pub fn l1_contraction_experiment<T: Scalar>(
    params: &ModelParams<T>,
    u0_a: &Field<T>,
    u0_b: &Field<T>,
    h: &Control<T>,
    grid: &Grid<T>,
    s: &NewtonSettings<T>,
) -> Result<ContractionReport<T>> {
    if u0_a.len() != u0_b.len() {
        return Err(Error::SizeMismatch {
            expected: u0_a.len(),
            found: u0_b.len(),
        });
    }
    let (a, b) = rayon::join(
        || run_skeleton(params, h, u0_a, grid, s),
        || run_skeleton(params, h, u0_b, grid, s),
    );
    let (a, b) = (a?, b?);
    let hs = grid.spacing();
    let gap: Vec<T> = a
        .fields
        .iter()
        .zip(&b.fields)
        .map(|(x, y)| l1_norm((x - y).values(), hs))
        .collect();
    let lip = params.diffusion().lipschitz();
    let tau = params.tau();
    let mut acc = T::zero();
    let mut envelope = Vec::with_capacity(gap.len());
    envelope.push(gap[0]);
    for &hk in h.values() {
        acc += tau * hk.abs();
        envelope.push(gap[0] * (lip * acc).exp());
    }
    Ok(ContractionReport {
        times: (0..gap.len()).map(|k| a.time(k)).collect(),
        gap,
        envelope,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyViolation<T> {
    /// 1-based step index (the step producing `u_k` from `u_{k-1}`).
    pub step: usize,
    pub lhs: T,
    pub rhs: T,
    pub tolerance: T,
}

/// Checks every ledger row against the discrete energy balance
///
/// ```text
/// ½(‖u_{k+1}‖² - ‖u_k‖²) + ½‖u_{k+1} - u_k‖² + τ‖∇u_{k+1}‖_p^p ≤ (forcing, u_{k+1}) + tol
/// ```
///
/// with `tol = 10·residual_tol`, plus `Lip(f)/4 · τ h ‖∇u_{k+1}‖²` when the
/// flux is nonzero: the trapezoidal edge average of `f` makes
/// `Σ_e f̄_e (u_{e+1} - u_e)` vanish only up to that amount.
pub fn audit_energy_ledger<T: Scalar>(
    traj: &Trajectory<T>,
    params: &ModelParams<T>,
    grid: &Grid<T>,
    residual_tol: T,
) -> Vec<EnergyViolation<T>> {
    let half = T::lit(0.5);
    let base_tol = T::lit(10.0) * residual_tol;
    let cf = params.flux().lipschitz() / T::lit(4.0);
    let tau = params.tau();
    traj.ledger
        .iter()
        .enumerate()
        .filter_map(|(k, r)| {
            let lhs = half * (r.l2_after * r.l2_after - r.l2_before * r.l2_before)
                + half * r.increment_l2 * r.increment_l2
                + r.w1p_term;
            let mut tolerance = base_tol;
            if cf > T::zero() {
                if let Some(next) = traj.fields.get(k + 1) {
                    let g = grad_l2(next.values(), grid.spacing());
                    tolerance += cf * tau * grid.spacing() * g * g;
                }
            }
            let ok = lhs <= r.forcing_inner_product + tolerance;
            (!ok).then_some(EnergyViolation {
                step: k + 1,
                lhs,
                rhs: r.forcing_inner_product,
                tolerance,
            })
        })
        .collect()
}

/// Grönwall envelope for the skeleton driver with `f` affine:
/// `‖u_k‖² ≤ ‖u_0‖² exp(2 Lip(H) τ Σ_{j<k} |h_j|)`.
///
/// Follows from the per-step balance `‖u_{k+1}‖² - ‖u_k‖² ≤ 2τ|h| Lip(H) ‖u_k‖ ‖u_{k+1}‖`.
pub fn stability_envelope<T: Scalar>(u0_l2: T, h: &Control<T>, lipschitz_h: T) -> Vec<T> {
    let mut acc = T::zero();
    let mut out = Vec::with_capacity(h.len() + 1);
    out.push(u0_l2 * u0_l2);
    for &hk in h.values() {
        acc += h.tau() * hk.abs();
        out.push(u0_l2 * u0_l2 * (T::lit(2.0) * lipschitz_h * acc).exp());
    }
    out
}

/// `(|a|^{p-2}a - |b|^{p-2}b)(a - b) - 2^{2-p}|a - b|^p`
pub fn monotonicity_slack<T: Scalar>(a: T, b: T, p: T) -> T {
    let two = T::lit(2.0);
    let rhs = (p_flux_scalar(a, p) - p_flux_scalar(b, p)) * (a - b);
    let lhs = two.powf(two - p) * (a - b).abs().powf(p);
    rhs - lhs
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotonicityCheck<T> {
    pub worst_slack: T,
    pub worst_pair: (T, T),
    pub n_samples: usize,
}

/// Samples pairs uniformly in `[-10, 10]²` and returns the smallest slack.
pub fn monotonicity_sample_check<T: Scalar>(p: T, n_samples: usize, seed: u64) -> Result<MonotonicityCheck<T>> {
    crate::grid::check_p(p)?;
    let mut stream = GaussianStream::new(seed);
    let mut worst = MonotonicityCheck {
        worst_slack: T::infinity(),
        worst_pair: (T::zero(), T::zero()),
        n_samples,
    };
    for _ in 0..n_samples {
        let a = T::lit(20.0 * stream.uniform_open0() - 10.0);
        let b = T::lit(20.0 * stream.uniform_open0() - 10.0);
        let slack = monotonicity_slack(a, b, p);
        if slack < worst.worst_slack {
            worst.worst_slack = slack;
            worst.worst_pair = (a, b);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{DiffusionFamily, FluxFamily};
    use crate::stepper::StepRecord;
    use proptest::prelude::*;

    fn zp(t: f64) -> ZetaParams<f64> {
        ZetaParams::new(t).unwrap()
    }

    #[test]
    fn zeta_examples() {
        assert!((zeta(0.05, &zp(0.1)) - 0.0125).abs() < 1e-15);
        let z = zeta(1.0, &zp(0.1));
        assert!((z - 0.95).abs() < 1e-15);
        assert!(1.0 - 0.5 * 0.1 <= z + 1e-15 && z <= 1.0);
        assert_eq!(zeta(0.0, &zp(0.3)), 0.0);
        assert_eq!(zeta_prime(0.0, &zp(0.3)), 0.0);
        assert_eq!(zeta_second(0.0, &zp(0.25)), 4.0);
        assert_eq!(zeta_prime(-5.0, &zp(0.3)), -1.0);
        assert_eq!(zeta_prime(5.0, &zp(0.3)), 1.0);
        assert!(ZetaParams::new(0.0).is_err());
    }

    proptest! {
        #[test]
        fn zeta_bounds_and_symmetry(r in -50.0f64..50.0, t in 1e-3f64..10.0) {
            let p = zp(t);
            let z = zeta(r, &p);
            prop_assert!(r.abs() - ZetaParams::<f64>::K1 * t <= z + 1e-12);
            prop_assert!(z <= r.abs() + 1e-12);
            prop_assert!(zeta_second(r, &p) <= ZetaParams::<f64>::K2 / t);
            if r.abs() > t { prop_assert_eq!(zeta_second(r, &p), 0.0); }
            prop_assert_eq!(zeta(-r, &p), z);
            prop_assert_eq!(zeta_prime(-r, &p), -zeta_prime(r, &p));
        }

        #[test]
        fn zeta_prime_matches_finite_difference(r in -3.0f64..3.0, t in 0.05f64..2.0) {
            let p = zp(t);
            let d = 1e-6;
            let fd = (zeta(r + d, &p) - zeta(r - d, &p)) / (2.0 * d);
            prop_assert!((fd - zeta_prime(r, &p)).abs() < 1e-5);
        }
    }

    #[test]
    fn monotonicity_examples() {
        assert_eq!(monotonicity_slack(1.0, -1.0, 3.0), 0.0);
        assert_eq!(monotonicity_slack(2.5, 2.5, 4.0), 0.0);
        let check = monotonicity_sample_check(2.0f64, 1000, 3).unwrap();
        assert!(check.worst_slack.abs() < 1e-12);
        assert!(monotonicity_sample_check(1.5f64, 10, 3).is_err());
    }

    fn record(before: f64, after: f64, inc: f64, w: f64, fip: f64) -> StepRecord<f64> {
        StepRecord {
            l2_before: before,
            l2_after: after,
            increment_l2: inc,
            w1p_term: w,
            forcing_inner_product: fip,
            newton_iters: 1,
            newton_residual: 0.0,
        }
    }

    #[test]
    fn auditor_flags_corrupted_row() {
        let grid = Grid::<f64>::new(1.0, 4).unwrap();
        let prm = ModelParams::new(3.0, FluxFamily::Zero, DiffusionFamily::Zero, 1.0, 3, 0.0).unwrap();
        let z = Field::zeros(&grid);
        let mut traj = Trajectory {
            fields: vec![z.clone(), z.clone(), z.clone(), z],
            ledger: vec![record(0.0, 0.0, 0.0, 0.0, 0.0); 3],
            tau: prm.tau(),
        };
        assert!(audit_energy_ledger(&traj, &prm, &grid, 1e-10).is_empty());
        traj.ledger[1] = record(1.0, 1.0, 0.5, 0.0, 0.0);
        let v = audit_energy_ledger(&traj, &prm, &grid, 1e-10);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].step, 2);
    }

    #[test]
    fn contraction_identical_data() {
        let grid = Grid::<f64>::new(1.0, 16).unwrap();
        let prm = ModelParams::new(3.0, FluxFamily::Linear(1.0), DiffusionFamily::Linear(1.0), 0.2, 20, 0.0).unwrap();
        let u0 = Field::from_fn(&grid, |x| (3.0 * x).sin()).unwrap();
        let h = Control::constant(0.7, 20, prm.tau());
        let rep = l1_contraction_experiment(&prm, &u0, &u0, &h, &grid, &NewtonSettings::default()).unwrap();
        assert!(rep.gap.iter().all(|&g| g == 0.0));
        assert_eq!(rep.gap.len(), 21);
    }

    #[test]
    fn contraction_symmetric_in_data() {
        let grid = Grid::<f64>::new(1.0, 16).unwrap();
        let prm = ModelParams::new(3.0, FluxFamily::Linear(1.0), DiffusionFamily::Zero, 0.2, 20, 0.0).unwrap();
        let a = Field::from_fn(&grid, |x| (3.0 * x).sin()).unwrap();
        let b = Field::from_fn(&grid, |x| x * (1.0 - x)).unwrap();
        let h = Control::zeros(20, prm.tau());
        let s = NewtonSettings::default();
        let ab = l1_contraction_experiment(&prm, &a, &b, &h, &grid, &s).unwrap();
        let ba = l1_contraction_experiment(&prm, &b, &a, &h, &grid, &s).unwrap();
        assert_eq!(ab, ba);
    }
}
