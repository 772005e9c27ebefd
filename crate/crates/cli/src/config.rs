//! JSON configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use splap::ldp::{EventSpec, LdpSetup, LAMBDA_LADDER};
use splap::tci::{DriftCase, DriftShape};
use splap::{
    control::project_control, io::read_fine_table, Control64, DiffusionFamily, Error, Field64, FluxFamily, Grid64,
    ModelParams64, NewtonSettings64, Result,
};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub grid: GridSpec,
    pub model: ModelSpec,
    #[serde(default)]
    pub newton: NewtonSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub experiment: ExperimentSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub length: f64,
    pub n_cells: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub p: f64,
    #[serde(default = "zero_name")]
    pub f_family: String,
    #[serde(default)]
    pub f_param: f64,
    #[serde(default = "zero_name")]
    pub h_family: String,
    #[serde(default)]
    pub h_param: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n_steps: usize,
    #[serde(default)]
    pub epsilon: f64,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSpec {
    pub residual_tol: Option<f64>,
    pub max_iters: Option<usize>,
    /// `δ` in the Jacobian smoothing `|g|² → |g|² + δ²`.
    pub jacobian_smoothing: Option<f64>,
}

/// Initial datum: `sine` is `A sin(πx/ℓ)`, `parabola` is `4A x(ℓ-x)/ℓ²`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default = "sine_name")]
    pub shape: String,
    #[serde(default = "one")]
    pub amplitude: f64,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            shape: sine_name(),
            amplitude: 1.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default)]
    pub control: ControlSpec,
    #[serde(default)]
    pub event: EventCfg,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
    #[serde(default = "default_ladder")]
    pub lambda_ladder: Vec<f64>,
    #[serde(default = "default_suite")]
    pub drift_suite: Vec<DriftSpec>,
    /// Second initial datum of the contraction experiment.
    #[serde(default = "default_initial_b")]
    pub initial_b: InitialSpec,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all experiment fields have defaults")
    }
}

/// Either a named drift profile times `scale`, or a `t,value` CSV table.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    #[serde(default = "constant_name")]
    pub shape: String,
    #[serde(default = "one")]
    pub scale: f64,
    pub csv: Option<PathBuf>,
}

impl Default for ControlSpec {
    fn default() -> Self {
        Self {
            shape: constant_name(),
            scale: 1.0,
            csv: None,
        }
    }
}

/// Event radius, absolute or relative to the norm of the deterministic terminal state.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventCfg {
    pub radius: Option<f64>,
    pub radius_rel: Option<f64>,
}

impl Default for EventCfg {
    fn default() -> Self {
        Self {
            radius: None,
            radius_rel: Some(0.15),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSpec {
    pub shape: String,
    pub scales: Vec<f64>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn zero_name() -> String {
    "zero".into()
}
fn sine_name() -> String {
    "sine".into()
}
fn constant_name() -> String {
    "constant".into()
}
fn one() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    1
}
fn default_epsilons() -> Vec<f64> {
    vec![0.5, 0.35, 0.25]
}
fn default_m() -> usize {
    2000
}
fn default_ladder() -> Vec<f64> {
    LAMBDA_LADDER.to_vec()
}
fn default_suite() -> Vec<DriftSpec> {
    DriftShape::STANDARD
        .iter()
        .map(|s| DriftSpec {
            shape: s.name().into(),
            scales: vec![1.0, 2.0, 4.0],
        })
        .chain([DriftSpec {
            shape: "zero".into(),
            scales: vec![1.0],
        }])
        .collect()
}
fn default_initial_b() -> InitialSpec {
    InitialSpec {
        shape: "parabola".into(),
        amplitude: 0.5,
    }
}

/// A parsed and validated configuration with its core objects built.
#[derive(Clone, Debug)]
pub struct Config {
    pub spec: ConfigSpec,
    pub base_dir: PathBuf,
    pub grid: Grid64,
    pub params: ModelParams64,
    pub newton: NewtonSettings64,
    pub u0: Field64,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        let spec: ConfigSpec =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_spec(spec, base_dir)
    }

    pub fn from_spec(spec: ConfigSpec, base_dir: PathBuf) -> Result<Self> {
        let grid = Grid64::new(spec.grid.length, spec.grid.n_cells)?;
        let m = &spec.model;
        let flux = FluxFamily::from_name(&m.f_family, m.f_param).map_err(|e| keyed("model.f_family", e))?;
        let diffusion = DiffusionFamily::from_name(&m.h_family, m.h_param).map_err(|e| keyed("model.h_family", e))?;
        let params = ModelParams64::new(m.p, flux, diffusion, m.horizon, m.n_steps, m.epsilon)?;
        let mut newton = NewtonSettings64::default();
        if let Some(tol) = spec.newton.residual_tol {
            newton.residual_tol = tol;
        }
        if let Some(it) = spec.newton.max_iters {
            newton.max_iters = it;
        }
        if let Some(d) = spec.newton.jacobian_smoothing {
            newton.jacobian_smoothing = d;
        }
        newton.validate()?;
        let u0 = initial_field(&spec.initial, &grid, "initial")?;
        let e = &spec.experiment;
        if e.epsilons.is_empty()
            || e.epsilons.iter().any(|&x| !(x > 0.0))
            || e.epsilons.windows(2).any(|w| !(w[1] < w[0]))
        {
            return Err(Error::config(
                "experiment.epsilons",
                "must be positive and strictly decreasing",
            ));
        }
        if e.m == 0 {
            return Err(Error::config("experiment.M", "must be at least 1"));
        }
        if e.lambda_ladder.is_empty() || e.lambda_ladder.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::config(
                "experiment.lambda_ladder",
                "weights must be positive and finite",
            ));
        }
        if e.event.radius.is_some() == e.event.radius_rel.is_some() {
            return Err(Error::config(
                "experiment.event",
                "set exactly one of `radius` and `radius_rel`",
            ));
        }
        Ok(Self {
            spec,
            base_dir,
            grid,
            params,
            newton,
            u0,
        })
    }

    pub fn base_seed(&self) -> u64 {
        self.spec.experiment.base_seed
    }

    pub fn control(&self) -> Result<Control64> {
        let c = &self.spec.experiment.control;
        let n = self.params.n_steps();
        let base = match &c.csv {
            Some(path) => {
                let path = self.base_dir.join(path);
                let file = fs::File::open(&path).map_err(|e| {
                    Error::config("experiment.control.csv", format!("cannot open {}: {e}", path.display()))
                })?;
                let table = read_fine_table(std::io::BufReader::new(file))?;
                project_control(&table, n).map_err(|e| rekey("experiment.control.csv", e))?
            }
            None => DriftShape::from_name(&c.shape)
                .map_err(|e| keyed("experiment.control.shape", e))?
                .control(self.params.horizon(), n)?,
        };
        Ok(base.scale(c.scale))
    }

    pub fn initial_b(&self) -> Result<Field64> {
        initial_field(&self.spec.experiment.initial_b, &self.grid, "experiment.initial_b")
    }

    pub fn ldp_setup(&self) -> Result<LdpSetup<f64>> {
        LdpSetup::new(self.params, self.u0.clone(), self.grid)
    }

    pub fn event(&self, setup: &LdpSetup<f64>) -> Result<EventSpec<f64>> {
        let center = setup.deterministic_terminal()?;
        let ev = &self.spec.experiment.event;
        let radius = match (ev.radius, ev.radius_rel) {
            (Some(r), _) => r,
            (None, Some(rel)) => rel * center.l2(&self.grid),
            (None, None) => unreachable!("checked at load"),
        };
        EventSpec::new(center, radius).map_err(|e| keyed("experiment.event", e))
    }

    pub fn drift_suite(&self) -> Result<Vec<DriftCase<f64>>> {
        self.spec
            .experiment
            .drift_suite
            .iter()
            .map(|d| {
                let shape = DriftShape::from_name(&d.shape).map_err(|e| keyed("experiment.drift_suite", e))?;
                DriftCase::from_shape(shape, &self.params, &d.scales)
            })
            .collect()
    }
}

fn initial_field(spec: &InitialSpec, grid: &Grid64, key: &str) -> Result<Field64> {
    let l = grid.length();
    let a = spec.amplitude;
    if !a.is_finite() {
        return Err(Error::config(format!("{key}.amplitude"), "must be finite"));
    }
    let f: Box<dyn Fn(f64) -> f64> = match spec.shape.as_str() {
        "sine" => Box::new(move |x| a * (std::f64::consts::PI * x / l).sin()),
        "parabola" => Box::new(move |x| 4.0 * a * x * (l - x) / (l * l)),
        "zero" => Box::new(|_| 0.0),
        other => {
            return Err(Error::config(
                format!("{key}.shape"),
                format!("unknown shape `{other}` (expected sine, parabola or zero)"),
            ))
        }
    };
    Field64::from_fn(grid, f)
}

/// Attaches a config key to errors that do not name one.
fn keyed(key: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        other => Error::config(key, other.to_string()),
    }
}

/// Replaces the key of a configuration error with the config-file key.
fn rekey(key: &str, e: Error) -> Error {
    match e {
        Error::Config { msg, .. } => Error::config(key, msg),
        other => keyed(key, other),
    }
}
