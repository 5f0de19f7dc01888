//! Experiment plans: a TOML document whose keys mirror the struct fields.
//!
//! ```toml
//! preset = "heisenberg"
//! h_values = [0.5, 5.0]
//! sizes = [10]
//! states = 10
//! state_kind = "random_ghz"
//! master_seed = 42
//!
//! [time_grid]
//! t_min = 0.1
//! t_max = 1e4
//! points_per_decade = 60
//! ```

use std::path::{Path, PathBuf};

use macrospin::dynamics::TimeGrid;
use macrospin::models::{Boundary, ModelParams, Preset};
use macrospin::seed::{derive_seed, stream};
use macrospin::macroscopicity::MaximizeOptions;
use serde::{Deserialize, Serialize};

use crate::error::{ExpError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    #[default]
    Heisenberg,
    XxAnderson,
}

impl From<PresetName> for Preset {
    fn from(p: PresetName) -> Self {
        match p {
            PresetName::Heisenberg => Preset::Heisenberg,
            PresetName::XxAnderson => Preset::XxAnderson,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    Periodic,
    Open,
}

/// Per-field overrides of the preset couplings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ModelOverrides {
    pub j_perp: Option<f64>,
    pub j_z: Option<f64>,
    pub gamma: Option<f64>,
    pub boundary: Option<BoundaryName>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    #[default]
    RandomGhz,
    Ghz,
    /// One state per angle; `states` is ignored.
    RotatedNeel,
}

/// Named realization-count tables used when `realizations` is unset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RealizationScale {
    /// 50 for N <= 8, 20 for N = 10, 10 above.
    #[default]
    Desk,
    /// 10000 for N <= 6, 1000 for N = 8 and 10, 200 above.
    PaperScale,
}

impl RealizationScale {
    pub fn count(self, n: usize) -> usize {
        match self {
            RealizationScale::Desk => match n {
                0..=8 => 50,
                9..=10 => 20,
                _ => 10,
            },
            RealizationScale::PaperScale => match n {
                0..=6 => 10_000,
                7..=10 => 1_000,
                _ => 200,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
}

impl Default for TimeGridSpec {
    fn default() -> Self {
        let g = TimeGrid::default();
        Self {
            t_min: g.t_min,
            t_max: g.t_max,
            points_per_decade: g.points_per_decade,
        }
    }
}

impl From<TimeGridSpec> for TimeGrid {
    fn from(s: TimeGridSpec) -> Self {
        TimeGrid {
            t_min: s.t_min,
            t_max: s.t_max,
            points_per_decade: s.points_per_decade,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSpec {
    pub restarts: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub random_pool: usize,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        let o = MaximizeOptions::default();
        Self {
            restarts: o.restarts,
            tol: o.tol,
            max_iters: o.max_iters,
            random_pool: o.random_pool,
        }
    }
}

impl OptimizerSpec {
    pub fn options(&self, seed: u64) -> MaximizeOptions {
        MaximizeOptions {
            restarts: self.restarts,
            tol: self.tol,
            max_iters: self.max_iters,
            random_pool: self.random_pool,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Base path; `.csv`, `_summary.csv` and `.json` are appended.
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Parameters of the synthetic l-bit model used by `lbit-demo`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LbitSpec {
    pub xi2: f64,
    pub energy_scale: f64,
    pub coupling_scale: f64,
}

impl Default for LbitSpec {
    fn default() -> Self {
        Self {
            xi2: 1.0,
            energy_scale: 1.0,
            coupling_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    #[serde(default)]
    pub preset: PresetName,
    #[serde(default)]
    pub params: ModelOverrides,
    pub h_values: Vec<f64>,
    pub sizes: Vec<usize>,
    /// Fixed count for every size; falls back to `realization_scale`.
    #[serde(default)]
    pub realizations: Option<usize>,
    #[serde(default)]
    pub realization_scale: RealizationScale,
    #[serde(default = "one")]
    pub states: usize,
    #[serde(default)]
    pub state_kind: StateKind,
    /// Rotation angles of rotated Néel states.
    #[serde(default)]
    pub thetas: Vec<f64>,
    /// Alternative to `thetas`: v = cos θ.
    #[serde(default)]
    pub v_values: Vec<f64>,
    #[serde(default)]
    pub time_grid: TimeGridSpec,
    /// Explicit evaluation times, replacing the grid.
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    /// [start, end] of the saturation window; defaults to the last decade.
    #[serde(default)]
    pub saturation_window: Option<[f64; 2]>,
    #[serde(default)]
    pub master_seed: u64,
    /// Reuse the same disorder draws (rescaled) for every h.
    #[serde(default)]
    pub shared_disorder: bool,
    /// Lowers the size limit below the library default.
    #[serde(default = "default_max_sites")]
    pub max_sites: usize,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub lbit: LbitSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> usize {
    1
}

fn default_max_sites() -> usize {
    macrospin::DEFAULT_MAX_SITES
}

impl ExperimentPlan {
    pub fn new(h_values: Vec<f64>, sizes: Vec<usize>) -> Self {
        Self {
            preset: PresetName::default(),
            params: ModelOverrides::default(),
            h_values,
            sizes,
            realizations: None,
            realization_scale: RealizationScale::default(),
            states: 1,
            state_kind: StateKind::default(),
            thetas: Vec::new(),
            v_values: Vec::new(),
            time_grid: TimeGridSpec::default(),
            times: None,
            saturation_window: None,
            master_seed: 0,
            shared_disorder: false,
            max_sites: default_max_sites(),
            optimizer: OptimizerSpec::default(),
            lbit: LbitSpec::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| ExpError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExpError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plan fields are TOML-representable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(ExpError::plan("sizes", "at least one size is required"));
        }
        if self.h_values.is_empty() {
            return Err(ExpError::plan("h_values", "at least one disorder strength is required"));
        }
        if let Some(&h) = self.h_values.iter().find(|h| !(h.is_finite() && **h >= 0.0)) {
            return Err(ExpError::plan("h_values", format!("{h} is not a finite non-negative number")));
        }
        let limit = self.max_sites.min(macrospin::DEFAULT_MAX_SITES);
        for &n in &self.sizes {
            if n > limit {
                return Err(ExpError::Capacity {
                    what: "n_sites",
                    value: n,
                    limit,
                });
            }
            if n < 2 {
                return Err(ExpError::plan("sizes", format!("chains need at least 2 sites, got {n}")));
            }
            if self.state_kind == StateKind::RotatedNeel && n % 2 == 1 {
                return Err(ExpError::plan("sizes", format!("rotated Néel states need even N, got {n}")));
            }
        }
        if self.realizations == Some(0) {
            return Err(ExpError::plan("realizations", "must be at least 1"));
        }
        if self.states == 0 {
            return Err(ExpError::plan("states", "must be at least 1"));
        }
        if self.state_kind == StateKind::RotatedNeel {
            if self.thetas.is_empty() == self.v_values.is_empty() {
                return Err(ExpError::plan(
                    "thetas",
                    "rotated_neel needs exactly one of `thetas` or `v_values`",
                ));
            }
            if let Some(v) = self.v_values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
                return Err(ExpError::plan("v_values", format!("{v} outside [-1, 1]")));
            }
            if let Some(t) = self.thetas.iter().find(|t| !(0.0..=std::f64::consts::PI).contains(*t)) {
                return Err(ExpError::plan("thetas", format!("{t} outside [0, π]")));
            }
        } else if !self.thetas.is_empty() || !self.v_values.is_empty() {
            return Err(ExpError::plan("thetas", "angles are only used with state_kind = \"rotated_neel\""));
        }
        TimeGrid::from(self.time_grid)
            .validate()
            .map_err(|e| ExpError::plan("time_grid", e.to_string()))?;
        if let Some(times) = &self.times {
            if times.is_empty() {
                return Err(ExpError::plan("times", "explicit time list is empty"));
            }
            if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                return Err(ExpError::plan("times", format!("{t} is not a finite non-negative time")));
            }
        }
        if let Some([a, b]) = self.saturation_window {
            if !(a >= 0.0 && b >= a) {
                return Err(ExpError::plan("saturation_window", format!("[{a}, {b}] is not an interval")));
            }
        }
        if self.optimizer.restarts == 0 {
            return Err(ExpError::plan("optimizer", "restarts must be at least 1"));
        }
        for (name, v) in [
            ("j_perp", self.params.j_perp),
            ("j_z", self.params.j_z),
            ("gamma", self.params.gamma),
        ] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(ExpError::plan("params", format!("{name} = {v} is not finite")));
                }
            }
        }
        Ok(())
    }

    pub fn realizations_for(&self, n: usize) -> usize {
        self.realizations.unwrap_or_else(|| self.realization_scale.count(n))
    }

    /// Rotation angles of the initial states, empty unless rotated Néel.
    pub fn angles(&self) -> Vec<f64> {
        if !self.thetas.is_empty() {
            self.thetas.clone()
        } else {
            self.v_values.iter().map(|v| v.acos()).collect()
        }
    }

    pub fn states_per_realization(&self) -> usize {
        match self.state_kind {
            StateKind::RotatedNeel => self.angles().len(),
            _ => self.states,
        }
    }

    pub fn model_params(&self, n: usize, h: f64) -> Result<ModelParams<f64>> {
        let base = ModelParams::<f64>::preset(self.preset.into(), n, h)?;
        let o = &self.params;
        Ok(ModelParams::new(
            n,
            o.j_perp.unwrap_or(base.j_perp),
            o.j_z.unwrap_or(base.j_z),
            h,
            o.gamma.unwrap_or(base.gamma),
            match o.boundary {
                Some(BoundaryName::Open) => Boundary::Open,
                Some(BoundaryName::Periodic) => Boundary::Periodic,
                None => base.boundary,
            },
        )?)
    }

    /// Parent seed of the disorder draws at size `n` and strength index `h_idx`.
    pub fn disorder_parent(&self, n: usize, h_idx: usize) -> u64 {
        let by_size = derive_seed(self.master_seed, stream::SIZE, n as u64);
        if self.shared_disorder {
            by_size
        } else {
            derive_seed(by_size, stream::FIELD_STRENGTH, h_idx as u64)
        }
    }

    pub fn full_times(&self) -> Vec<f64> {
        match &self.times {
            Some(t) => t.clone(),
            None => TimeGrid::from(self.time_grid).points(),
        }
    }

    pub fn window(&self) -> [f64; 2] {
        self.saturation_window
            .unwrap_or([self.time_grid.t_max / 10.0, self.time_grid.t_max])
    }

    /// Grid (or explicit) times inside the saturation window.
    pub fn window_times(&self) -> Vec<f64> {
        let [a, b] = self.window();
        let tol = 1e-12 * b.max(1.0);
        self.full_times()
            .into_iter()
            .filter(|&t| t >= a - tol && t <= b + tol)
            .collect()
    }
}
