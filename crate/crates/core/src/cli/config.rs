use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gp::WaveFunction;
use crate::grid::GridSpec;
use crate::potential::{born_coupling, born_coupling_1d, PotentialModel, TrapModel};
use crate::scattering::{default_r_max, solve_zero_energy, DEFAULT_TOL};
use crate::Complex64;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Scatter,
    GpEvolve,
    GpGroundstate,
    Manybody,
    Hierarchy,
    PowerCounting,
    Report,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Scatter => "scatter",
            Experiment::GpEvolve => "gp_evolve",
            Experiment::GpGroundstate => "gp_groundstate",
            Experiment::Manybody => "manybody",
            Experiment::Hierarchy => "hierarchy",
            Experiment::PowerCounting => "power_counting",
            Experiment::Report => "report",
        }
    }
}

/// Radial pair potential as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Barrier {
        height: f64,
        radius: f64,
    },
    Gaussian {
        height: f64,
        width: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
    },
    /// Either inline `radii`/`values` or a `radius,value` CSV at `path`,
    /// relative to the config file.
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radii: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
    },
}

impl PotentialSpec {
    pub fn build(&self, base_dir: &Path) -> Result<PotentialModel> {
        match self {
            PotentialSpec::Zero => Ok(PotentialModel::zero()),
            PotentialSpec::Barrier { height, radius } => PotentialModel::barrier(*height, *radius),
            PotentialSpec::Gaussian { height, width, cutoff } => PotentialModel::gaussian(*height, *width, *cutoff),
            PotentialSpec::Table { path, radii, values } => match (path, radii, values) {
                (Some(p), None, None) => PotentialModel::table_from_csv(base_dir.join(p)),
                (None, Some(r), Some(v)) => PotentialModel::table(r, v),
                _ => Err(Error::config("table potential needs either `path` or both `radii` and `values`")),
            },
        }
    }

    /// Short identifier used in result tables.
    pub fn id(&self) -> String {
        match self {
            PotentialSpec::Zero => "zero".into(),
            PotentialSpec::Barrier { height, radius } => format!("barrier;height={height};radius={radius}"),
            PotentialSpec::Gaussian { height, width, cutoff } => match cutoff {
                Some(c) => format!("gaussian;height={height};width={width};cutoff={c}"),
                None => format!("gaussian;height={height};width={width}"),
            },
            PotentialSpec::Table { path: Some(p), .. } => format!("table;path={}", p.display()),
            PotentialSpec::Table { radii, .. } => format!("table;nodes={}", radii.as_ref().map_or(0, Vec::len)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_final: f64,
    pub dt: f64,
    /// Steps between result rows; defaults to about 100 rows per run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
}

impl TimeSpec {
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite() && self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::config(format!("need dt > 0 and t_final >= 0, got dt = {}, t_final = {}", self.dt, self.t_final)));
        }
        let n = (self.t_final / self.dt).round();
        if (n * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(self.dt) {
            return Err(Error::config(format!("t_final = {} is not a multiple of dt = {}", self.t_final, self.dt)));
        }
        Ok(n as usize)
    }

    pub fn stride(&self) -> Result<usize> {
        let steps = self.steps()?;
        match self.record_every {
            Some(0) => Err(Error::config("record_every must be >= 1")),
            Some(r) => Ok(r),
            None => Ok((steps / 100).max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// `σ = 8π a0` from the zero-energy scattering solution.
    FromScattering,
    /// `σ = b0`: `∫ V d³r` on three-dimensional grids, `∫ V dx` in the
    /// one-dimensional analog mode.
    Born,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub mode: CouplingMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub prefix: String,
    #[serde(default)]
    pub binary_snapshots: bool,
}

/// Single-particle orbital.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OrbitalSpec {
    Gaussian {
        width: f64,
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default)]
        momentum: Vec<f64>,
    },
    PlaneWave {
        modes: Vec<i64>,
    },
    Constant,
    /// Uniform random amplitudes from the config seed.
    Random,
    /// GP ground state in the configured trap and coupling.
    GroundState {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSpec {
    pub orbital: OrbitalSpec,
    /// Many-body runs only: multiply by `∏ f_N(r_i - r_j)`.
    #[serde(default)]
    pub jastrow: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySpec {
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Largest partial-sum length `n`; 0 skips the Dyson rows.
    #[serde(default = "default_dyson_terms")]
    pub dyson_terms: usize,
    #[serde(default = "default_quad_points")]
    pub quad_points: usize,
    /// Step of the GP oracle used for the Dyson comparison.
    #[serde(default = "default_oracle_dt")]
    pub oracle_dt: f64,
}

fn default_k_max() -> usize {
    2
}
fn default_dyson_terms() -> usize {
    3
}
fn default_quad_points() -> usize {
    16
}
fn default_oracle_dt() -> f64 {
    1e-4
}

impl Default for HierarchySpec {
    fn default() -> Self {
        Self {
            k_max: default_k_max(),
            dyson_terms: default_dyson_terms(),
            quad_points: default_quad_points(),
            oracle_dt: default_oracle_dt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerCountingSpec {
    pub k_max: u64,
    pub m_max: u64,
}

impl Default for PowerCountingSpec {
    fn default() -> Self {
        Self { k_max: 100, m_max: 100 }
    }
}

/// A scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default = "default_trap")]
    pub trap: TrapModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(rename = "scaling_N", default, skip_serializing_if = "Option::is_none")]
    pub scaling_n: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingSpec>,
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialStateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<HierarchySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_counting: Option<PowerCountingSpec>,
    /// Run directories merged by the `report` experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<PathBuf>>,
}

fn default_trap() -> TrapModel {
    TrapModel::None
}

/// A parsed config together with the directory relative paths refer to.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub base_dir: PathBuf,
    pub hash: String,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema_version {:?}, expected {SCHEMA_VERSION:?}",
                self.schema_version
            )));
        }
        if let Some(c) = &self.coupling {
            match c.mode {
                CouplingMode::FromScattering | CouplingMode::Born if self.potential.is_none() => {
                    return Err(Error::config("coupling mode from_scattering/born requires a potential"));
                }
                CouplingMode::Explicit if c.value.is_none() => {
                    return Err(Error::config("coupling mode explicit requires a value"));
                }
                _ => {}
            }
        }
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        if self.output.prefix.is_empty() || self.output.prefix.contains(['/', '\\']) {
            return Err(Error::config("output.prefix must be a non-empty file name"));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn require_grid(&self) -> Result<GridSpec> {
        self.grid.ok_or_else(|| Error::config("this experiment needs a `grid`"))
    }

    pub fn require_time(&self) -> Result<TimeSpec> {
        self.time.ok_or_else(|| Error::config("this experiment needs `time`"))
    }

    pub fn potential_model(&self, base_dir: &Path) -> Result<Option<PotentialModel>> {
        self.potential.as_ref().map(|p| p.build(base_dir)).transpose()
    }

    pub fn require_potential(&self, base_dir: &Path) -> Result<PotentialModel> {
        self.potential_model(base_dir)?.ok_or_else(|| Error::config("this experiment needs a `potential`"))
    }

    /// Coupling `σ` for grids of dimension `dim`.
    pub fn sigma(&self, base_dir: &Path, dim: usize) -> Result<f64> {
        let c = self.coupling.ok_or_else(|| Error::config("this experiment needs a `coupling`"))?;
        match c.mode {
            CouplingMode::Explicit => Ok(c.value.expect("validated")),
            CouplingMode::FromScattering => {
                let v = self.require_potential(base_dir)?;
                let sol = solve_zero_energy(&v, default_r_max(&v), DEFAULT_TOL)?;
                Ok(8.0 * std::f64::consts::PI * sol.a0())
            }
            CouplingMode::Born => {
                let v = self.require_potential(base_dir)?;
                match dim {
                    1 => Ok(born_coupling_1d(&v)),
                    3 => Ok(born_coupling(&v)),
                    _ => Err(Error::config("born coupling is defined for d = 1 (analog) and d = 3")),
                }
            }
        }
    }

    pub fn orbital(&self) -> Result<&OrbitalSpec> {
        self.initial_state
            .as_ref()
            .map(|s| &s.orbital)
            .ok_or_else(|| Error::config("this experiment needs an `initial_state`"))
    }
}

impl OrbitalSpec {
    /// Build the orbital; `ground_state` needs the trap and `a0`.
    pub fn build(&self, grid: GridSpec, seed: u64, trap: &TrapModel, a0: f64) -> Result<WaveFunction> {
        match self {
            OrbitalSpec::Gaussian { width, center, momentum } => {
                if center.len() > grid.dim || momentum.len() > grid.dim {
                    return Err(Error::config("gaussian center/momentum longer than the grid dimension"));
                }
                WaveFunction::gaussian(grid, *width, center, momentum)
            }
            OrbitalSpec::PlaneWave { modes } => {
                if modes.len() > grid.dim {
                    return Err(Error::config("plane_wave modes longer than the grid dimension"));
                }
                WaveFunction::plane_wave(grid, modes)
            }
            OrbitalSpec::Constant => WaveFunction::constant(grid),
            OrbitalSpec::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let values = (0..grid.len())
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                WaveFunction::from_values(grid, values)
            }
            OrbitalSpec::GroundState { tolerance } => {
                Ok(crate::gp::minimize_gp(trap, a0, grid, tolerance.unwrap_or(1e-10))?.0)
            }
        }
    }
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    let config = ScenarioConfig::from_json(&text)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let hash = config.hash();
    Ok(LoadedConfig { config, base_dir, hash })
}
