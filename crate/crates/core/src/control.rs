//! Piecewise-constant controls on the uniform time partition and Brownian
//! increments.
//!
//! Continuous controls enter only through [`project_control`], the L²
//! projection onto functions constant on each `(t_k, t_{k+1}]`.

use crate::rng::{mix_seed, GaussianStream};
use crate::{Error, Result, Scalar};

/// Control value `values[k]` on `(t_k, t_{k+1}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Control<T> {
    values: Vec<T>,
    tau: T,
}

impl<T: Scalar> Control<T> {
    pub fn new(values: Vec<T>, tau: T) -> Result<Self> {
        if !(tau > T::zero()) {
            return Err(Error::config("control.tau", "time step must be positive"));
        }
        if values.is_empty() {
            return Err(Error::config("control", "a control needs at least one step"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { step: None });
        }
        Ok(Self { values, tau })
    }

    pub fn zeros(n_steps: usize, tau: T) -> Self {
        Self {
            values: vec![T::zero(); n_steps],
            tau,
        }
    }

    pub fn constant(c: T, n_steps: usize, tau: T) -> Self {
        Self {
            values: vec![c; n_steps],
            tau,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn horizon(&self) -> T {
        self.tau * T::from_usize(self.len()).unwrap()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * s).collect(),
            tau: self.tau,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }

    /// `τ Σ |h_k|`
    pub fn l1_time(&self) -> T {
        self.tau * self.values.iter().map(|v| v.abs()).sum::<T>()
    }

    /// Replays the control as a fine table with `per_step ≥ 10` sub-intervals
    /// per step. Jumps are encoded as repeated time stamps.
    pub fn to_fine_table(&self, per_step: usize) -> FineTable<T> {
        let per_step = per_step.max(1);
        let mut t = Vec::with_capacity(self.len() * (per_step + 1));
        let mut v = Vec::with_capacity(t.capacity());
        let step = T::from_usize(per_step).unwrap();
        for (k, &hk) in self.values.iter().enumerate() {
            let t0 = self.tau * T::from_usize(k).unwrap();
            for j in 0..=per_step {
                t.push(t0 + self.tau * T::from_usize(j).unwrap() / step);
                v.push(hk);
            }
        }
        FineTable { t, v }
    }
}

/// `½ τ Σ h_k²`
pub fn control_energy<T: Scalar>(h: &Control<T>) -> T {
    T::lit(0.5) * h.tau * h.values.iter().map(|&v| v * v).sum::<T>()
}

/// A control sampled on a fine, non-decreasing time grid starting at 0.
///
/// Repeated time stamps mark jump discontinuities; between samples the
/// control is linearly interpolated.
#[derive(Clone, Debug, PartialEq)]
pub struct FineTable<T> {
    pub t: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> FineTable<T> {
    pub fn new(t: Vec<T>, v: Vec<T>) -> Result<Self> {
        if t.len() != v.len() {
            return Err(Error::SizeMismatch {
                expected: t.len(),
                found: v.len(),
            });
        }
        if t.len() < 2 {
            return Err(Error::config("control.samples", "need at least two samples"));
        }
        if t[0].abs() > T::epsilon() * T::lit(16.0) * t[t.len() - 1].abs() {
            return Err(Error::config("control.samples", "samples must start at t = 0"));
        }
        if t.windows(2).any(|w| !(w[1] >= w[0])) || t[t.len() - 1] <= t[0] {
            return Err(Error::config("control.samples", "time stamps must be non-decreasing"));
        }
        if !t.iter().chain(&v).all(|x| x.is_finite()) {
            return Err(Error::NonFinite { step: None });
        }
        Ok(Self { t, v })
    }

    /// Samples `h` on a uniform grid of `n_samples` intervals over `[0, horizon]`.
    pub fn sample(h: impl Fn(T) -> T, horizon: T, n_samples: usize) -> Self {
        let n = T::from_usize(n_samples).unwrap();
        let t: Vec<T> = (0..=n_samples)
            .map(|i| horizon * T::from_usize(i).unwrap() / n)
            .collect();
        let v = t.iter().map(|&s| h(s)).collect();
        Self { t, v }
    }

    pub fn horizon(&self) -> T {
        self.t[self.t.len() - 1]
    }

    /// Trapezoidal `∫ h²`, the squared L² norm of the table.
    pub fn l2_squared(&self) -> T {
        let half = T::lit(0.5);
        self.t
            .windows(2)
            .zip(self.v.windows(2))
            .map(|(t, v)| half * (t[1] - t[0]) * (v[0] * v[0] + v[1] * v[1]))
            .sum()
    }

    fn max_gap(&self) -> T {
        self.t.windows(2).map(|w| w[1] - w[0]).fold(T::zero(), T::max)
    }
}

/// Time projection `Π_τ h`: the average of `h` over each partition interval,
/// integrating the piecewise-linear interpolant of the table exactly.
pub fn project_control<T: Scalar>(samples: &FineTable<T>, n_steps: usize) -> Result<Control<T>> {
    if n_steps == 0 {
        return Err(Error::config("model.n_steps", "must be at least 1"));
    }
    let horizon = samples.horizon();
    let tau = horizon / T::from_usize(n_steps).unwrap();
    let slack = T::one() + T::lit(1e-9);
    if samples.max_gap() > tau / T::lit(10.0) * slack {
        return Err(Error::config(
            "control.samples",
            format!(
                "table spacing {} is coarser than a tenth of the time step {}",
                samples.max_gap(),
                tau
            ),
        ));
    }
    let half = T::lit(0.5);
    // Non-degenerate linear pieces; repeated stamps (jumps) carry no mass.
    // Stamps within round-off of a partition point are moved onto it.
    let node = |k: usize| {
        if k >= n_steps {
            horizon
        } else {
            tau * T::from_usize(k).unwrap()
        }
    };
    let snap_tol = tau * T::lit(1e-9);
    let t: Vec<T> = samples
        .t
        .iter()
        .map(|&s| {
            let k = (s / tau).round().to_usize().unwrap_or(0);
            if (s - node(k)).abs() <= snap_tol {
                node(k)
            } else {
                s
            }
        })
        .collect();
    let segments: Vec<(T, T, T, T)> = (0..t.len() - 1)
        .filter(|&i| t[i + 1] > t[i])
        .map(|i| (t[i], t[i + 1], samples.v[i], samples.v[i + 1]))
        .collect();
    let eval = |s: &(T, T, T, T), x: T| s.2 + (s.3 - s.2) * ((x - s.0) / (s.1 - s.0));
    let mut values = Vec::with_capacity(n_steps);
    let mut first = 0usize;
    for k in 0..n_steps {
        let (a, b) = (node(k), node(k + 1));
        while first + 1 < segments.len() && segments[first].1 <= a {
            first += 1;
        }
        // Integrate h - h(a+) so constant pieces reproduce their value exactly.
        let reference = eval(&segments[first], a);
        let mut integral = T::zero();
        for s in segments[first..].iter().take_while(|s| s.0 < b) {
            let lo = s.0.max(a);
            let hi = s.1.min(b);
            if hi > lo {
                integral += half * (hi - lo) * ((eval(s, lo) - reference) + (eval(s, hi) - reference));
            }
        }
        values.push(reference + integral / (b - a));
    }
    Control::new(values, tau)
}

/// Brownian increments `ΔW_k ~ N(0, τ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianPath<T> {
    increments: Vec<T>,
    tau: T,
    seed: u64,
}

impl<T: Scalar> BrownianPath<T> {
    pub fn from_increments(increments: Vec<T>, tau: T, seed: u64) -> Self {
        Self { increments, tau, seed }
    }

    pub fn increments(&self) -> &[T] {
        &self.increments
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    /// `W(t_N)`
    pub fn terminal(&self) -> T {
        self.increments.iter().copied().sum()
    }
}

pub fn sample_brownian<T: Scalar>(n_steps: usize, tau: T, seed: u64) -> Result<BrownianPath<T>> {
    if n_steps == 0 {
        return Err(Error::config("model.n_steps", "must be at least 1"));
    }
    if !(tau > T::zero()) {
        return Err(Error::config("model.T", "time step must be positive"));
    }
    let mut stream = GaussianStream::new(seed);
    let sd = tau.as_f64().sqrt();
    let increments = (0..n_steps).map(|_| T::lit(sd * stream.next_normal())).collect();
    Ok(BrownianPath { increments, tau, seed })
}

/// Path number `index` of an ensemble rooted at `base_seed`.
pub fn sample_brownian_indexed<T: Scalar>(
    n_steps: usize,
    tau: T,
    base_seed: u64,
    index: u64,
) -> Result<BrownianPath<T>> {
    sample_brownian(n_steps, tau, mix_seed(base_seed, index))
}
