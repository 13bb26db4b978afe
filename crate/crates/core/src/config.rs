//! Experiment configuration in interface units (km, GHz, MHz, kbps, W).
//!
//! A config file is a single JSON object with the fields of [`SpecConfig`];
//! omitted fields take their defaults. A sweep file instead holds a `base`
//! object, an optional `grid` of field → value lists whose Cartesian product
//! is expanded in key order (first key outermost), and an optional `specs`
//! list of explicit overrides appended after the grid.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::allocation::AllocationAlgorithm;
use crate::error::{Error, Result};
use crate::geometry::ConstellationConfig;
use crate::linkbudget::{AccessScheme, Antenna, RadioConfig, ResourceSet};
use crate::matching::MatchingAlgorithm;
use crate::sim::ExperimentSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AntennaName {
    Narrow,
    Isotropic,
}

impl AntennaName {
    pub fn name(self) -> &'static str {
        match self {
            AntennaName::Narrow => "narrow",
            AntennaName::Isotropic => "isotropic",
        }
    }
}

impl From<AntennaName> for Antenna {
    fn from(a: AntennaName) -> Self {
        match a {
            AntennaName::Narrow => Antenna::NarrowBeam,
            AntennaName::Isotropic => Antenna::Isotropic,
        }
    }
}

impl From<Antenna> for AntennaName {
    fn from(a: Antenna) -> Self {
        match a {
            Antenna::NarrowBeam => AntennaName::Narrow,
            Antenna::Isotropic => AntennaName::Isotropic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecConfig {
    pub planes: usize,
    pub sats_per_plane: usize,
    pub base_altitude_km: f64,
    pub delta_altitude_km: f64,
    /// Initial phase of plane `p` is `p` times this step (degrees).
    pub phase_step_deg: f64,
    pub freq_ghz: f64,
    pub bandwidth_mhz: f64,
    pub noise_temp_k: f64,
    pub eirpg_w: f64,
    pub rmin_kbps: f64,
    pub antenna: AntennaName,
    pub transceivers: usize,
    pub matching: MatchingAlgorithm,
    pub allocation: AllocationAlgorithm,
    pub resources: usize,
    pub scheme: AccessScheme,
    pub period_s: f64,
    pub nsim: usize,
    pub seed: u64,
}

impl Default for SpecConfig {
    fn default() -> Self {
        Self {
            planes: 7,
            sats_per_plane: 40,
            base_altitude_km: 600.0,
            delta_altitude_km: 10.0,
            phase_step_deg: 0.0,
            freq_ghz: 2.4,
            bandwidth_mhz: 20.0,
            noise_temp_k: 354.81,
            eirpg_w: 3.74,
            rmin_kbps: 10.0,
            antenna: AntennaName::Narrow,
            transceivers: 2,
            matching: MatchingAlgorithm::Giem,
            allocation: AllocationAlgorithm::None,
            resources: 1,
            scheme: AccessScheme::Ofdma,
            period_s: 30.0,
            nsim: 1000,
            seed: 0,
        }
    }
}

impl SpecConfig {
    pub fn constellation(&self) -> ConstellationConfig {
        let mut c = ConstellationConfig::walker_star(
            self.planes,
            self.sats_per_plane,
            self.base_altitude_km * 1e3,
            self.delta_altitude_km * 1e3,
        );
        if self.phase_step_deg != 0.0 {
            let step = self.phase_step_deg.to_radians();
            c.phase_offsets = (0..self.planes).map(|p| step * p as f64).collect();
        }
        c
    }

    pub fn radio(&self) -> RadioConfig {
        RadioConfig {
            frequency_hz: self.freq_ghz * 1e9,
            bandwidth_hz: self.bandwidth_mhz * 1e6,
            noise_temp_k: self.noise_temp_k,
            eirpg_w: self.eirpg_w,
            r_min_bps: self.rmin_kbps * 1e3,
            antenna: self.antenna.into(),
        }
    }

    /// Converts to SI units and validates the result.
    pub fn to_spec(&self) -> Result<ExperimentSpec> {
        let spec = ExperimentSpec {
            constellation: self.constellation(),
            radio: self.radio(),
            transceivers: self.transceivers,
            matching_algo: self.matching,
            allocation_algo: self.allocation,
            resource_set: ResourceSet::new(self.resources, self.scheme)?,
            period_s: self.period_s,
            n_sim: self.nsim,
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        serde_json::from_str(&text).map_err(|source| Error::ParseConfig {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Overlays the fields present in `patch` onto `self`.
    pub fn merged(&self, patch: &Map<String, Value>) -> Result<Self> {
        let mut v = serde_json::to_value(self)?;
        let obj = v.as_object_mut().expect("config is an object");
        for (k, x) in patch {
            obj.insert(k.clone(), x.clone());
        }
        Ok(serde_json::from_value(v)?)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::ReadFile {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub base: Map<String, Value>,
    pub grid: Map<String, Value>,
    pub specs: Vec<Map<String, Value>>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        serde_json::from_str(&text).map_err(|source| Error::ParseConfig {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Expands into one config per grid point, then the explicit specs.
    /// `base` fields override `defaults`; grid and spec fields override both.
    pub fn expand(&self, defaults: &SpecConfig) -> Result<Vec<SpecConfig>> {
        let base = defaults
            .merged(&self.base)
            .map_err(|e| Error::InvalidConfig(format!("sweep base: {e}")))?;
        let mut axes: Vec<(&String, &Vec<Value>)> = Vec::new();
        for (k, v) in &self.grid {
            let list = v
                .as_array()
                .ok_or_else(|| Error::InvalidConfig(format!("grid entry '{k}' must be a list")))?;
            if list.is_empty() {
                return Err(Error::InvalidConfig(format!("grid entry '{k}' is empty")));
            }
            axes.push((k, list));
        }
        let mut out = Vec::new();
        let points: usize = if axes.is_empty() {
            0
        } else {
            axes.iter().map(|(_, l)| l.len()).product()
        };
        for point in 0..points {
            // mixed-radix digits, last axis fastest
            let mut rest = point;
            let mut patch = Map::new();
            for (k, list) in axes.iter().rev() {
                patch.insert((*k).clone(), list[rest % list.len()].clone());
                rest /= list.len();
            }
            out.push(
                base.merged(&patch)
                    .map_err(|e| Error::InvalidConfig(format!("grid point {point}: {e}")))?,
            );
        }
        for (i, patch) in self.specs.iter().enumerate() {
            out.push(
                base.merged(patch)
                    .map_err(|e| Error::InvalidConfig(format!("spec {i}: {e}")))?,
            );
        }
        if out.is_empty() {
            out.push(base);
        }
        Ok(out)
    }
}
