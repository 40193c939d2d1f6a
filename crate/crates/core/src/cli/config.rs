//! TOML run configuration with `[scenario]`, `[grids]` and `[output]` tables.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::invariant::Scenario;
use crate::profiles::Profile;
use crate::quadrature::TimeGrid;
use crate::wavepacket::PacketParams;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub grids: GridConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Profile spec such as `constant:1`, `cosine:1,1`, `polynomial:1,0.2`
    /// or `table:mass.csv` (relative to the config file).
    pub mass: String,
    pub drive: String,
    pub a0: f64,
    pub b0: f64,
    pub d: f64,
    pub x0: f64,
    pub p0: f64,
    /// Derived from `x0`, `p0` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i0: Option<f64>,
    pub alpha0: f64,
    pub beta0: f64,
    pub t_max: f64,
    pub override_consistency: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mass: "constant:1".into(),
            drive: "cosine:1,1".into(),
            a0: 1.0,
            b0: 2.0,
            d: 1.0,
            x0: 1.0,
            p0: 1.0,
            c0: None,
            d0: None,
            i0: None,
            alpha0: 0.0,
            beta0: 0.0,
            t_max: Scenario::DEFAULT_HORIZON,
            override_consistency: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Steps of the time grid carrying every cumulative integral.
    pub time_steps: usize,
    /// Points of the x-mesh used for snapshots and the density map.
    pub space_points: usize,
    /// Rows per unit time in moments and figure series.
    pub output_rate: u32,
    /// Rows per unit time in the density map.
    pub density_rate: u32,
    /// Crank–Nicolson spacing and step used by `verify`.
    pub propagation_dx: f64,
    pub propagation_dt: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            time_steps: TimeGrid::DEFAULT_STEPS,
            space_points: 641,
            output_rate: 100,
            density_rate: 20,
            propagation_dx: 0.01,
            propagation_dt: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Times of the `psi_t*.csv` snapshots; those past `t_max` are skipped.
    pub snapshots: Vec<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, snapshots: vec![0.0, 0.5, 1.0, 1.5, 1.8] }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Builds the scenario. Table profiles resolve relative to `base`.
    pub fn scenario(&self, base: Option<&Path>) -> Result<Scenario> {
        let s = &self.scenario;
        let d0 = s.d0.unwrap_or(s.x0);
        let scenario = Scenario {
            mass: Profile::parse(&s.mass, base)?,
            drive: Profile::parse(&s.drive, base)?,
            a0: s.a0,
            b0: s.b0,
            c0: s.c0.unwrap_or(-s.p0 * s.b0),
            alpha0: s.alpha0,
            beta0: s.beta0,
            x0: s.x0,
            p0: s.p0,
            packet: PacketParams { d: s.d, d0, i0: s.i0.unwrap_or(s.a0 * d0) },
            grid: TimeGrid::new(0.0, s.t_max, self.grids.time_steps)?,
            override_consistency: s.override_consistency,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}
