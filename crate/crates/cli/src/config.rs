//! Run configuration: JSON schema, defaults and validation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use sabi_core::dynamics::{Closure, Model};
use sabi_core::integrators::{IntegratorConfig, Scheme};
use sabi_core::noise::ModeSpec;
use sabi_core::{Grid, GridSpec, Real, VectorField};

use crate::error::{CliError, CliResult};
use crate::system::{build_system, initial_state};

pub const SCHEMA: &str = "sabi.run/1";

fn schema() -> String {
    SCHEMA.to_string()
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn two() -> usize {
    2
}

fn one_u64() -> u64 {
    1
}

fn one_usize() -> usize {
    1
}

fn default_directory() -> PathBuf {
    PathBuf::from("sabi-out")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    F32,
}

/// Named initial-condition presets.
///
/// For the electromagnetic models `taylor-green` and `abc` set `D` to the
/// preset field and `B` to its curl; `random-band-limited` draws `D` from
/// `seed` and `B` from `seed + 1`. For Euler the presets give the vorticity.
/// The MHD models accept only `random-band-limited`, which builds
/// `B = (0, cos x, sin x)` and a random `P` projected normal to `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    PlaneWave {
        #[serde(default = "one")]
        amplitude: f64,
    },
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
    },
    Abc {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        shift: f64,
    },
    RandomBandLimited {
        #[serde(default)]
        seed: u64,
        #[serde(default = "half")]
        amplitude: f64,
        #[serde(default = "two")]
        kmax: usize,
    },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::RandomBandLimited {
            seed: 0,
            amplitude: 0.5,
            kmax: 2,
        }
    }
}

impl InitialCondition {
    pub fn name(&self) -> &'static str {
        match self {
            InitialCondition::PlaneWave { .. } => "plane-wave",
            InitialCondition::TaylorGreen { .. } => "taylor-green",
            InitialCondition::Abc { .. } => "abc",
            InitialCondition::RandomBandLimited { .. } => "random-band-limited",
        }
    }
}

/// One term `a cos(k·x + phase)` of a custom noise field. `a` is used as
/// given, so the field is only accepted if it is divergence-free.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub k: [i64; 3],
    pub a: [f64; 3],
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseMode {
    Constant {
        a: [f64; 3],
        #[serde(default = "one")]
        amplitude: f64,
    },
    Harmonic {
        k: [i64; 3],
        a: [f64; 3],
        #[serde(default)]
        phase: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Custom {
        terms: Vec<FourierTerm>,
    },
}

impl NoiseMode {
    pub fn build<T: Real>(&self, grid: &Grid<T>) -> sabi_core::Result<VectorField<T>> {
        let spec = *grid.spec();
        match self {
            NoiseMode::Constant { a, amplitude } => ModeSpec::Constant {
                a: *a,
                amplitude: *amplitude,
            }
            .build(spec),
            NoiseMode::Harmonic {
                k,
                a,
                phase,
                amplitude,
            } => ModeSpec::Harmonic {
                k: *k,
                a: *a,
                phase: *phase,
                amplitude: *amplitude,
            }
            .build(spec),
            NoiseMode::Custom { terms } => {
                let two_pi = 2.0 * std::f64::consts::PI;
                let l = spec.lengths();
                Ok(VectorField::from_fn(spec, |x: T, y: T, z: T| {
                    let p = [x.as_f64(), y.as_f64(), z.as_f64()];
                    let mut v = [0.0; 3];
                    for t in terms {
                        let arg: f64 =
                            (0..3).map(|i| two_pi * t.k[i] as f64 * p[i] / l[i]).sum::<f64>() + t.phase;
                        for (vc, ac) in v.iter_mut().zip(&t.a) {
                            *vc += ac * arg.cos();
                        }
                    }
                    v.map(T::lit)
                }))
            }
        }
    }
}

/// Integrator settings; `scheme` and `dt` are filled in by [`load_config`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "half")]
    pub cfl_guard: f64,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            scheme: None,
            dt: None,
            t_end: 1.0,
            cfl_guard: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default = "one_usize")]
    pub members: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self { members: 1, seed: 0 }
    }
}

/// Output settings. Intervals count steps; a snapshot interval of zero writes
/// only the initial and final states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default)]
    pub snapshot_interval: u64,
    #[serde(default = "one_u64")]
    pub diagnostics_interval: u64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            snapshot_interval: 0,
            diagnostics_interval: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema")]
    pub schema: String,
    pub model: Model,
    #[serde(deserialize_with = "grid_spec")]
    pub grid: GridSpec,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub noise: Vec<NoiseMode>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Steps between checkpoints; zero disables checkpointing.
    #[serde(default)]
    pub checkpoint_interval: u64,
}

/// A grid given either as `N` (an `N³` box of side 2π) or as a full spec,
/// optionally with `n` in place of `nx`, `ny`, `nz`.
fn grid_spec<'de, D: Deserializer<'de>>(de: D) -> Result<GridSpec, D::Error> {
    use serde::de::Error as _;
    let v = serde_json::Value::deserialize(de)?;
    match v {
        serde_json::Value::Number(n) => {
            let n = n
                .as_u64()
                .ok_or_else(|| D::Error::custom("grid size must be a positive integer"))?;
            Ok(GridSpec::cube(n as usize))
        }
        serde_json::Value::Object(mut map) => {
            if let Some(n) = map.remove("n") {
                for key in ["nx", "ny", "nz"] {
                    if map.contains_key(key) {
                        return Err(D::Error::custom(format!("grid: `n` and `{key}` are exclusive")));
                    }
                    map.insert(key.to_string(), n.clone());
                }
            }
            GridSpec::deserialize(serde_json::Value::Object(map)).map_err(D::Error::custom)
        }
        _ => Err(D::Error::custom("grid must be an integer or an object")),
    }
}

impl RunConfig {
    /// Minimal configuration with every default applied except the derived
    /// integrator fields.
    pub fn minimal(model: Model, n: usize) -> Self {
        Self {
            schema: schema(),
            model,
            grid: GridSpec::cube(n),
            precision: Precision::default(),
            initial: InitialCondition::default(),
            noise: Vec::new(),
            integrator: IntegratorSpec::default(),
            ensemble: EnsembleSpec::default(),
            output: OutputSpec::default(),
            checkpoint_interval: 0,
        }
    }

    pub fn closure(&self) -> Closure {
        match self.model {
            Model::Maxwell | Model::MaxwellExpectation => Closure::Maxwell,
            _ => Closure::BornInfeld,
        }
    }

    /// The resolved integrator; only valid after [`RunConfig::finalize`].
    pub fn integrator_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            scheme: self.integrator.scheme.expect("finalized config"),
            dt: self.integrator.dt.expect("finalized config"),
            t_end: self.integrator.t_end,
            cfl_guard: self.integrator.cfl_guard,
        }
    }

    pub fn steps(&self) -> u64 {
        self.integrator_config().steps()
    }

    pub fn default_scheme(model: Model) -> Scheme {
        match model {
            Model::BiIto => Scheme::EulerMaruyama,
            Model::BiStratonovich | Model::EulerVorticity | Model::MhdStratonovich => Scheme::Heun,
            Model::Bi | Model::Maxwell | Model::MaxwellExpectation | Model::Mhd => Scheme::Rk4,
        }
    }

    /// Checks every field that does not need the initial state.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if self.schema != SCHEMA {
            return bad("schema", format!("unsupported schema {:?}, expected {SCHEMA:?}", self.schema));
        }
        if let Err(e) = self.grid.validate() {
            return bad("grid", e.to_string());
        }
        if self.ensemble.members < 1 {
            return bad("ensemble.members", "must be at least 1".into());
        }
        let it = &self.integrator;
        if !(it.t_end.is_finite() && it.t_end > 0.0) {
            return bad("integrator.t_end", format!("{} must be positive", it.t_end));
        }
        if !(it.cfl_guard.is_finite() && it.cfl_guard > 0.0) {
            return bad("integrator.cfl_guard", format!("{} must be positive", it.cfl_guard));
        }
        if let Some(dt) = it.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return bad("integrator.dt", format!("{dt} must be positive"));
            }
        }
        if let Some(scheme) = it.scheme {
            let ok = match self.model {
                Model::BiIto => scheme == Scheme::EulerMaruyama,
                Model::BiStratonovich | Model::EulerVorticity | Model::MhdStratonovich => {
                    scheme == Scheme::Heun || (self.noise.is_empty() && scheme == Scheme::Rk4)
                }
                Model::Bi | Model::Maxwell | Model::MaxwellExpectation | Model::Mhd => {
                    scheme != Scheme::EulerMaruyama
                }
            };
            if !ok {
                return bad(
                    "integrator.scheme",
                    format!("{scheme:?} is not consistent with model {}", self.model),
                );
            }
        }
        let deterministic = matches!(self.model, Model::Bi | Model::Maxwell | Model::Mhd);
        if deterministic && !self.noise.is_empty() {
            return bad("noise", format!("model {} takes no noise", self.model));
        }
        let preset_ok = match (&self.initial, self.model) {
            (InitialCondition::RandomBandLimited { .. }, _) => true,
            (_, m) if m.is_mhd() => false,
            (InitialCondition::PlaneWave { .. }, Model::EulerVorticity) => false,
            _ => true,
        };
        if !preset_ok {
            return bad(
                "initial.preset",
                format!("{} is not available for model {}", self.initial.name(), self.model),
            );
        }
        if self.output.diagnostics_interval == 0 {
            return bad("output.diagnostics_interval", "must be at least 1".into());
        }
        if self.output.directory.as_os_str().is_empty() {
            return bad("output.directory", "must not be empty".into());
        }
        Ok(())
    }

    /// Validates, builds the initial state to check it, and fills in the
    /// default scheme and the CFL-derived step.
    pub fn finalize(mut self) -> CliResult<Self> {
        self.validate()?;
        if self.integrator.scheme.is_none() {
            self.integrator.scheme = Some(Self::default_scheme(self.model));
        }
        let dt = match self.precision {
            Precision::F64 => self.check_state::<f64>()?,
            Precision::F32 => self.check_state::<f32>()?,
        };
        if self.integrator.dt.is_none() {
            self.integrator.dt = Some(dt);
        }
        Ok(self)
    }

    /// Builds the system and initial state, returning the default step:
    /// half the CFL limit of the initial state, shortened so that `t_end` is
    /// a whole number of steps.
    fn check_state<T: Real>(&self) -> CliResult<f64> {
        let grid = Grid::<T>::new(self.grid).map_err(|e| CliError::Config(format!("grid: {e}")))?;
        let sys = build_system(self, grid).map_err(|e| CliError::Config(noise_message(e)))?;
        let x0 = initial_state(self, sys.grid())
            .map_err(|e| CliError::Config(format!("initial: {e}")))?;
        let speed = sys.max_speed(&x0);
        let limit = self.integrator.cfl_guard * self.grid.min_spacing() / speed.max(1e-12);
        let t_end = self.integrator.t_end;
        let steps = (t_end / (0.5 * limit)).ceil().max(1.0);
        Ok(t_end / steps)
    }
}

fn noise_message(e: sabi_core::Error) -> String {
    format!("noise: {e}")
}

/// Reads, validates and finalizes a configuration file.
pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
        .map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            e => e,
        })
}

pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let raw: RunConfig = serde_json::from_str(text).map_err(|e| {
        CliError::Config(format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    raw.finalize()
}

/// Canonical JSON of a configuration, the text hashed into the manifest.
pub fn to_canonical_json(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes") + "\n"
}
