//! Run configuration: TOML with one table per section. Every key has a
//! default; unknown keys and sections are rejected.

use std::sync::Arc;

use radial_dirac::dynamics::{InitialData, SimOptions, DEFAULT_CFL};
use radial_dirac::{Error, ModelSpec, Nonlinearity, RadialGrid, Result, WeightFamily};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub rmax: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 4096, rmax: 40.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    Zero,
    Honeycomb,
    Soler,
    PurePower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub mass: f64,
    pub vorticity: i64,
    pub nonlinearity: NonlinearityKind,
    pub beta1: f64,
    pub beta2: f64,
    pub g: f64,
    pub power: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            mass: 0.0,
            vorticity: 1,
            nonlinearity: NonlinearityKind::Zero,
            beta1: 2.0,
            beta2: 1.0,
            g: 1.0,
            power: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSection {
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    /// Coefficients of p11, p12, p21, p22.
    pub components: [f64; 4],
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            amplitude: 0.01,
            width: 0.7,
            center: 2.0,
            components: [1.0, 0.0, 0.0, -0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub dt_factor: f64,
    pub tmax: f64,
    pub record_every: usize,
    pub cfl: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            dt_factor: 0.25,
            tmax: 5.0,
            record_every: 1,
            cfl: DEFAULT_CFL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Strong,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightSection {
    pub family: WeightKind,
    pub delta: f64,
}

impl Default for WeightSection {
    fn default() -> Self {
        Self {
            family: WeightKind::Strong,
            delta: radial_dirac::weights::DEFAULT_DELTA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    /// Steps between snapshots; 0 disables them.
    pub snapshot_every: usize,
    pub radii: Vec<f64>,
    /// Angular samples for the Cartesian reconstruction in snapshots; 0 disables it.
    pub theta_samples: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            snapshot_every: 64,
            radii: vec![5.0],
            theta_samples: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub weight_tol: f64,
    pub cl1_tol: f64,
    pub int0_tol: f64,
    pub virial_rel_tol: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            weight_tol: 1e-10,
            cl1_tol: 1e-6,
            int0_tol: 1e-8,
            virial_rel_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StaticSection {
    pub n: usize,
    pub rmax: f64,
    pub vorticity: i64,
    pub lambda: f64,
    pub tol: f64,
    pub separation: f64,
}

impl Default for StaticSection {
    fn default() -> Self {
        Self {
            n: 2048,
            rmax: 60.0,
            vorticity: 1,
            lambda: 1.0,
            tol: 1e-4,
            separation: 1e3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridSection,
    pub model: ModelSection,
    pub init: InitSection,
    pub time: TimeSection,
    pub weight: WeightSection,
    pub output: OutputSection,
    pub verify: VerifySection,
    #[serde(rename = "static")]
    pub static_: StaticSection,
}

/// Line number (1-based) of `key` inside `[section]`, for error messages.
fn line_of(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        let Some((k, _)) = line.split_once('=') else { continue };
        let k = k.trim();
        if (current == section && k == key) || (current.is_empty() && k == format!("{section}.{key}")) {
            return Some(i + 1);
        }
    }
    None
}

fn at_line(text: &str, section: &str, key: &str, msg: String) -> Error {
    match line_of(text, section, key) {
        Some(l) => Error::Config(format!("line {l}: {section}.{key}: {msg}")),
        None => Error::Config(format!("{section}.{key}: {msg}")),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        let msg = e.message().to_string();
        match line {
            Some(l) => Error::Config(format!("line {l}: {msg}")),
            None => Error::Config(msg),
        }
    })?;
    cfg.validate(text)?;
    Ok(cfg)
}

impl RunConfig {
    fn validate(&self, text: &str) -> Result<()> {
        let err = |s: &str, k: &str, m: String| at_line(text, s, k, m);
        if let Err(Error::Config(m)) = RadialGrid::new(self.grid.rmax, self.grid.n) {
            let key = if self.grid.n < radial_dirac::grid::MIN_NODES { "n" } else { "rmax" };
            return Err(err("grid", key, m));
        }
        if let Err(Error::Config(m)) = self.model_spec() {
            let key = if self.model.vorticity == 0 || self.model.vorticity == -1 {
                "vorticity"
            } else if !self.model.mass.is_finite() {
                "mass"
            } else {
                "power"
            };
            return Err(err("model", key, m));
        }
        if let Err(Error::Config(m)) = self.initial_data().validate() {
            let key = if m.starts_with("amplitude") {
                "amplitude"
            } else if m.starts_with("width") {
                "width"
            } else {
                "components"
            };
            return Err(err("init", key, m));
        }
        if !(self.time.dt_factor > 0.0) {
            return Err(err("time", "dt_factor", "must be positive".into()));
        }
        if self.time.dt_factor > self.time.cfl {
            return Err(err(
                "time",
                "dt_factor",
                format!("{} exceeds the CFL limit {}", self.time.dt_factor, self.time.cfl),
            ));
        }
        if !(self.time.tmax > 0.0) {
            return Err(err("time", "tmax", "must be positive".into()));
        }
        if self.time.record_every == 0 {
            return Err(err("time", "record_every", "must be >= 1".into()));
        }
        if self.weight.family == WeightKind::Delta && !(self.weight.delta > 0.0) {
            return Err(err("weight", "delta", "the delta weight needs delta > 0".into()));
        }
        if !(self.weight.delta >= 0.0) {
            return Err(err("weight", "delta", "must be >= 0".into()));
        }
        for &r in &self.output.radii {
            if !(r > 0.0 && r <= self.grid.rmax) {
                return Err(err("output", "radii", format!("radius {r} outside (0, rmax]")));
            }
        }
        if self.output.theta_samples != 0 && self.output.theta_samples < 4 {
            return Err(err("output", "theta_samples", "must be 0 or >= 4".into()));
        }
        if let Err(Error::Config(m)) = RadialGrid::new(self.static_.rmax, self.static_.n) {
            return Err(err("static", "n", m));
        }
        if let Err(Error::Config(m)) =
            radial_dirac::oracles::BFProfile::new(self.static_.vorticity, self.static_.lambda)
        {
            return Err(err("static", "vorticity", m));
        }
        Ok(())
    }

    pub fn grid(&self) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(self.grid.rmax, self.grid.n).expect("validated"))
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        let m = &self.model;
        match m.nonlinearity {
            NonlinearityKind::Zero => Nonlinearity::Zero,
            NonlinearityKind::Honeycomb => Nonlinearity::Honeycomb {
                beta1: m.beta1,
                beta2: m.beta2,
                g: m.g,
            },
            NonlinearityKind::Soler => Nonlinearity::Soler { g: m.g },
            NonlinearityKind::PurePower => Nonlinearity::PurePower { g: m.g, p: m.power },
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        ModelSpec::new(self.model.mass, self.model.vorticity, self.nonlinearity())
    }

    pub fn initial_data(&self) -> InitialData {
        InitialData {
            amplitude: self.init.amplitude,
            width: self.init.width,
            center: self.init.center,
            components: self.init.components,
        }
    }

    pub fn weight_family(&self) -> WeightFamily {
        match self.weight.family {
            WeightKind::Strong => WeightFamily::Strong,
            WeightKind::Delta => WeightFamily::delta(self.weight.delta),
        }
    }

    pub fn dt(&self) -> f64 {
        self.time.dt_factor * self.grid.rmax / self.grid.n as f64
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            record_every: self.time.record_every,
            snapshot_every: self.output.snapshot_every,
            cfl: self.time.cfl,
            weight: self.weight_family(),
            delta: self.weight.delta,
            radii: self.output.radii.clone(),
        }
    }
}
