//! Reference computations shared by the integration suites.

use splap::ldp::LdpSetup;
use splap::{DiffusionFamily, Field, FluxFamily, Grid64, ModelParams};

/// Single interior node on (0, 1) with p = 3: `u + 16τ|u|u = rhs`.
pub fn single_node_solve(rhs: f64, tau: f64) -> f64 {
    let c = 32.0 * tau;
    rhs.signum() * ((1.0 + 2.0 * c * rhs.abs()).sqrt() - 1.0) / c
}

/// Backward dynamic programming over `h_k ∈ {-3, -2.9, …, 3}` with linear
/// interpolation of the value function on a fine state grid. Returns the
/// control energy of the resulting policy.
pub fn dp_rate(n_steps: usize, horizon: f64, target: f64, lambda: f64) -> f64 {
    let tau = horizon / n_steps as f64;
    let controls: Vec<f64> = (-30..=30).map(|i| i as f64 / 10.0).collect();
    let (lo, hi, m) = (0.0, 1.5, 6001);
    let du = (hi - lo) / (m - 1) as f64;
    let states: Vec<f64> = (0..m).map(|i| lo + i as f64 * du).collect();
    let interp = |v: &[f64], u: f64| {
        let x = ((u - lo) / du).clamp(0.0, (m - 1) as f64);
        let i = (x.floor() as usize).min(m - 2);
        let w = x - i as f64;
        v[i] * (1.0 - w) + v[i + 1] * w
    };
    let step = |u: f64, h: f64| single_node_solve(u + tau * u * h, tau);
    // ‖v‖² on one node of width 0.5
    let mut values = vec![states
        .iter()
        .map(|&u| 0.5 * lambda * 0.5 * (u - target).powi(2))
        .collect::<Vec<_>>()];
    for _ in 0..n_steps {
        let next = values.last().unwrap();
        let v: Vec<f64> = states
            .iter()
            .map(|&u| {
                controls
                    .iter()
                    .map(|&h| 0.5 * tau * h * h + interp(next, step(u, h)))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        values.push(v);
    }
    values.reverse();
    let mut u = single_node_solve(1.0, tau);
    let mut energy = 0.0;
    for k in 0..n_steps {
        let next = &values[k + 1];
        let (h, _) = controls
            .iter()
            .map(|&h| (h, 0.5 * tau * h * h + interp(next, step(u, h))))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        energy += 0.5 * tau * h * h;
        u = step(u, h);
    }
    energy
}

/// One interior node, p = 3, linear H, `u₀ = 1`.
pub fn single_node_setup(n_steps: usize, horizon: f64) -> LdpSetup<f64> {
    let grid = Grid64::new(1.0, 2).unwrap();
    let params = ModelParams::new(
        3.0,
        FluxFamily::Zero,
        DiffusionFamily::Linear(1.0),
        horizon,
        n_steps,
        0.0,
    )
    .unwrap();
    LdpSetup::new(params, Field::new(vec![1.0]).unwrap(), grid).unwrap()
}
