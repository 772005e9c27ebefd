//! Shared-noise coupling estimates for the quadratic transport cost.
//!
//! For a deterministic drift `g`, the law `ν` of the drift-shifted solution
//! has relative entropy `½∫g²` with respect to the law `μ` of the unshifted
//! one. Driving both equations with the same increments gives a coupling, so
//! `E[d(u, u^g)²]` in `L²(0,T; L¹)` bounds `W₂(ν, μ)²` from above. The
//! reports compare that upper bound with `2 · entropy`.

use rayon::prelude::*;

use crate::control::{control_energy, project_control, sample_brownian_indexed, Control, FineTable};
use crate::grid::{l1_norm, Field, Grid};
use crate::rng::mix_seed;
use crate::stats::mean_stderr;
use crate::stepper::{run_girsanov, run_sde, ModelParams, NewtonSettings, Trajectory};
use crate::{Error, Result, Scalar};

/// Stated in every report header.
pub const UPPER_BOUND_CAVEAT: &str =
    "mean_sq_distance is a shared-noise coupling estimate and only bounds the squared Wasserstein distance from above";

/// `τ Σ_{k<N} (h Σ_i |a_{k,i} - b_{k,i}|)²`: squared `L²(0,T; L¹)` distance, left-endpoint rule.
pub fn path_distance_sq<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>, grid: &Grid<T>) -> Result<T> {
    if a.fields.len() != b.fields.len() {
        return Err(Error::SizeMismatch {
            expected: a.fields.len(),
            found: b.fields.len(),
        });
    }
    if a.tau != b.tau {
        return Err(Error::config("model.n_steps", "trajectories use different time steps"));
    }
    let h = grid.spacing();
    let mut acc = T::zero();
    for (x, y) in a.fields.iter().zip(&b.fields).take(a.fields.len().saturating_sub(1)) {
        if x.len() != y.len() || x.len() != grid.n_interior() {
            return Err(Error::SizeMismatch {
                expected: grid.n_interior(),
                found: if x.len() != grid.n_interior() { x.len() } else { y.len() },
            });
        }
        let d = l1_norm((x - y).values(), h);
        acc += d * d;
    }
    Ok(a.tau * acc)
}

/// `½ τ Σ g_k²`, the relative entropy of the shifted law.
pub fn relative_entropy<T: Scalar>(gdrift: &Control<T>) -> T {
    control_energy(gdrift)
}

/// Rejects models outside the hypotheses of the transport inequality.
pub fn check_coupling_params<T: Scalar>(params: &ModelParams<T>) -> Result<()> {
    if !params.diffusion().is_bounded() {
        return Err(Error::config(
            "model.h_family",
            format!(
                "the transport cost inequality requires a bounded noise coefficient; `{}` is unbounded (use bounded_sine or zero)",
                params.diffusion().name()
            ),
        ));
    }
    if params.epsilon() != T::one() {
        return Err(Error::config(
            "model.epsilon",
            format!("coupling experiments run at unit noise level, got {}", params.epsilon()),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TciRow {
    pub g_id: String,
    pub scale: f64,
    pub entropy: f64,
    pub mean_sq_distance: f64,
    /// `mean_sq_distance / (2 · entropy)`, defined when the entropy is positive.
    pub ratio: Option<f64>,
    pub stderr: f64,
    pub n_samples: usize,
}

/// Runs `m` coupled pairs `(u, u^g)`; pair `i` shares the increments of stream `mix_seed(base_seed, i)`.
pub fn coupled_simulate<T: Scalar>(
    params: &ModelParams<T>,
    gdrift: &Control<T>,
    m: usize,
    base_seed: u64,
    u0: &Field<T>,
    grid: &Grid<T>,
    s: &NewtonSettings<T>,
) -> Result<TciRow> {
    check_coupling_params(params)?;
    if m < 2 {
        return Err(Error::config(
            "experiment.M",
            "coupling estimates need at least 2 samples",
        ));
    }
    let distances = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let pair = || -> Result<f64> {
                let w = sample_brownian_indexed(params.n_steps(), params.tau(), base_seed, i)?;
                let (a, b) = rayon::join(
                    || run_sde(params, &w, u0, grid, s),
                    || run_girsanov(params, gdrift, &w, u0, grid, s),
                );
                Ok(path_distance_sq(&a?, &b?, grid)?.as_f64())
            };
            pair().map_err(|e| Error::Sample {
                seed: mix_seed(base_seed, i),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_stderr(&distances);
    let entropy = relative_entropy(gdrift).as_f64();
    Ok(TciRow {
        g_id: String::new(),
        scale: 1.0,
        entropy,
        mean_sq_distance: mean,
        ratio: (entropy > 0.0).then(|| mean / (2.0 * entropy)),
        stderr,
        n_samples: m,
    })
}

/// Named drift profiles on `[0, T]`, all of unit size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriftShape {
    Zero,
    Constant,
    Ramp,
    Sine,
    Step,
    Decay,
}

impl DriftShape {
    pub const STANDARD: [DriftShape; 5] = [
        DriftShape::Constant,
        DriftShape::Ramp,
        DriftShape::Sine,
        DriftShape::Step,
        DriftShape::Decay,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DriftShape::Zero => "zero",
            DriftShape::Constant => "constant",
            DriftShape::Ramp => "ramp",
            DriftShape::Sine => "sine",
            DriftShape::Step => "step",
            DriftShape::Decay => "decay",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        [DriftShape::Zero]
            .into_iter()
            .chain(Self::STANDARD)
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::UnknownFamily {
                kind: "drift",
                name: name.to_string(),
            })
    }

    /// Profile at time `t` of a horizon `horizon`.
    pub fn eval(&self, t: f64, horizon: f64) -> f64 {
        let s = t / horizon;
        match self {
            DriftShape::Zero => 0.0,
            DriftShape::Constant => 1.0,
            DriftShape::Ramp => 2.0 * s,
            DriftShape::Sine => (2.0 * std::f64::consts::PI * s).sin(),
            DriftShape::Step => {
                if s < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            DriftShape::Decay => 2.0 * (-3.0 * s).exp(),
        }
    }

    /// The profile projected onto the simulation partition.
    pub fn control<T: Scalar>(&self, horizon: T, n_steps: usize) -> Result<Control<T>> {
        let hz = horizon.as_f64();
        let table = FineTable::sample(|t: T| T::lit(self.eval(t.as_f64(), hz)), horizon, 20 * n_steps);
        project_control(&table, n_steps)
    }
}

/// One entry of a sweep: a drift and the scales it is run at.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftCase<T> {
    pub id: String,
    pub drift: Control<T>,
    pub scales: Vec<f64>,
}

impl<T: Scalar> DriftCase<T> {
    pub fn from_shape(shape: DriftShape, params: &ModelParams<T>, scales: &[f64]) -> Result<Self> {
        Ok(Self {
            id: shape.name().to_string(),
            drift: shape.control(params.horizon(), params.n_steps())?,
            scales: scales.to_vec(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TciReport {
    pub rows: Vec<TciRow>,
    /// Largest ratio over rows with positive entropy.
    pub c_emp: Option<f64>,
    pub n_cells: usize,
    pub n_steps: usize,
    pub m: usize,
    pub h_family: String,
}

impl TciReport {
    /// Spread `max/min` of `mean_sq_distance(λg)/λ²` over the scales of drift `id`.
    pub fn scale_spread(&self, id: &str) -> Option<f64> {
        let v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.g_id == id && r.scale != 0.0)
            .map(|r| r.mean_sq_distance / (r.scale * r.scale))
            .collect();
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        (!v.is_empty() && min > 0.0).then(|| max / min)
    }

    /// Standard error of the row attaining `c_emp`, on the ratio scale.
    pub fn c_emp_stderr(&self) -> Option<f64> {
        let c = self.c_emp?;
        self.rows
            .iter()
            .find(|r| r.ratio == Some(c))
            .map(|r| r.stderr / (2.0 * r.entropy))
    }
}

/// One row per (drift, scale); every row reuses `base_seed`.
pub fn tci_sweep<T: Scalar>(
    params: &ModelParams<T>,
    suite: &[DriftCase<T>],
    m: usize,
    base_seed: u64,
    u0: &Field<T>,
    grid: &Grid<T>,
    s: &NewtonSettings<T>,
) -> Result<TciReport> {
    if suite.is_empty() {
        return Err(Error::config("experiment.drift_suite", "must be non-empty"));
    }
    check_coupling_params(params)?;
    let mut rows = Vec::new();
    for case in suite {
        if case.scales.is_empty() {
            return Err(Error::config(
                "experiment.drift_suite",
                format!("drift `{}` has no scales", case.id),
            ));
        }
        for &scale in &case.scales {
            let g = case.drift.scale(T::lit(scale));
            let mut row = coupled_simulate(params, &g, m, base_seed, u0, grid, s)?;
            row.g_id = case.id.clone();
            row.scale = scale;
            rows.push(row);
        }
    }
    let c_emp = rows
        .iter()
        .filter_map(|r| r.ratio)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    Ok(TciReport {
        rows,
        c_emp,
        n_cells: grid.n_cells(),
        n_steps: params.n_steps(),
        m,
        h_family: params.diffusion().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{DiffusionFamily, FluxFamily};
    use crate::stepper::run_skeleton;

    fn params(h: DiffusionFamily<f64>, eps: f64) -> ModelParams<f64> {
        ModelParams::new(3.0, FluxFamily::Zero, h, 0.1, 20, eps).unwrap()
    }

    fn sine(grid: &Grid<f64>) -> Field<f64> {
        Field::from_fn(grid, |x| (std::f64::consts::PI * x).sin()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let grid = Grid::new(1.0, 4).unwrap();
        let s = NewtonSettings::default();
        let p = params(DiffusionFamily::Zero, 1.0);
        let a = run_skeleton(&p, &Control::zeros(20, p.tau()), &sine(&grid), &grid, &s).unwrap();
        assert_eq!(path_distance_sq(&a, &a, &grid).unwrap(), 0.0);
        // constant gap c on every interior node: (c · 3h)² · T
        let mut b = a.clone();
        for f in &mut b.fields {
            *f = f.map(|v| v + 2.0);
        }
        let d = path_distance_sq(&a, &b, &grid).unwrap();
        assert!((d - (2.0f64 * 0.75).powi(2) * 0.1).abs() < 1e-12);
        assert_eq!(d, path_distance_sq(&b, &a, &grid).unwrap());
        let mut c = a.clone();
        c.fields.pop();
        assert!(path_distance_sq(&a, &c, &grid).is_err());
    }

    #[test]
    fn constant_gap_approaches_c2_t() {
        // Dirichlet nodes carry no gap, so the discrete value is (c (ℓ - h))² T.
        let grid = Grid::new(1.0, 1000).unwrap();
        let n = 4;
        let mk = |c: f64| Trajectory {
            fields: vec![Field::zeros(&grid).map(|_| c); n + 1],
            ledger: Vec::new(),
            tau: 0.25 / n as f64,
        };
        let d = path_distance_sq(&mk(0.0), &mk(2.0), &grid).unwrap();
        assert!((d - (2.0f64 * 0.999).powi(2) * 0.25).abs() < 1e-12);
        assert!((d - 1.0).abs() < 3e-3);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(relative_entropy(&Control::zeros(10, 0.1)), 0.0);
        assert_eq!(relative_entropy(&Control::constant(1.0, 10, 0.1)), 0.5);
        let g = Control::new(vec![0.3, -1.2, 2.5], 0.2).unwrap();
        for l in [2.0, 4.0, 0.5] {
            assert_eq!(relative_entropy(&g.scale(l)), l * l * relative_entropy(&g));
        }
    }

    #[test]
    fn zero_drift_gives_zero_distance() {
        let grid = Grid::new(1.0, 8).unwrap();
        let p = params(DiffusionFamily::BoundedSine(1.0), 1.0);
        let s = NewtonSettings::default();
        let row = coupled_simulate(&p, &Control::zeros(20, p.tau()), 8, 5, &sine(&grid), &grid, &s).unwrap();
        assert_eq!(row.mean_sq_distance, 0.0);
        assert_eq!(row.ratio, None);
        let g = Control::constant(1.0, 20, p.tau());
        let row = coupled_simulate(&p, &g, 8, 5, &Field::zeros(&grid), &grid, &s).unwrap();
        assert_eq!(row.mean_sq_distance, 0.0);
        assert_eq!(row.entropy, 0.05);
    }

    #[test]
    fn hypotheses_enforced() {
        let grid = Grid::new(1.0, 8).unwrap();
        let s = NewtonSettings::default();
        let g = Control::zeros(20, 0.005);
        let err = coupled_simulate(
            &params(DiffusionFamily::Linear(1.0), 1.0),
            &g,
            4,
            1,
            &sine(&grid),
            &grid,
            &s,
        )
        .unwrap_err();
        assert!(err.to_string().contains("model.h_family") && err.to_string().contains("bounded"));
        assert!(coupled_simulate(
            &params(DiffusionFamily::BoundedSine(1.0), 0.5),
            &g,
            4,
            1,
            &sine(&grid),
            &grid,
            &s
        )
        .is_err());
        assert!(coupled_simulate(
            &params(DiffusionFamily::BoundedSine(1.0), 1.0),
            &g,
            1,
            1,
            &sine(&grid),
            &grid,
            &s
        )
        .is_err());
    }

    #[test]
    fn sweep_rows_and_determinism() {
        let grid = Grid::new(1.0, 8).unwrap();
        let p = params(DiffusionFamily::BoundedSine(1.0), 1.0);
        let s = NewtonSettings::default();
        let case = DriftCase::from_shape(DriftShape::Sine, &p, &[1.0, 2.0]).unwrap();
        let suite = vec![case.clone(), case];
        let rep = tci_sweep(&p, &suite, 6, 9, &sine(&grid), &grid, &s).unwrap();
        assert_eq!(rep.rows.len(), 4);
        assert_eq!(rep.rows[0], rep.rows[2]);
        assert!(rep.rows.iter().all(|r| r.ratio.is_some_and(f64::is_finite)));
        assert_eq!(rep.c_emp, rep.rows.iter().filter_map(|r| r.ratio).reduce(f64::max));
        let zero = DriftCase::from_shape(DriftShape::Zero, &p, &[1.0]).unwrap();
        let rep = tci_sweep(&p, &[zero], 6, 9, &sine(&grid), &grid, &s).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.c_emp, None);
        assert!(tci_sweep(&p, &[], 6, 9, &sine(&grid), &grid, &s).is_err());
    }

    #[test]
    fn shapes() {
        for s in DriftShape::STANDARD {
            assert_eq!(DriftShape::from_name(s.name()).unwrap(), s);
            let c = s.control(1.0f64, 10).unwrap();
            assert!(!c.is_zero());
        }
        assert!(DriftShape::from_name("wobble").is_err());
        let c = DriftShape::Constant.control(0.5f64, 4).unwrap();
        assert!(c.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }
}
