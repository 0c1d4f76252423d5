use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DeviceSpec;
use crate::error::{Error, Result};

const DEFAULT_CATALOG: &str = include_str!("../../data/devices.toml");

/// Published full-scale benchmark figures kept alongside a device entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportedMetrics {
    pub area_mm2: f64,
    pub memory_utilization: f64,
    pub training_accuracy: f64,
    pub latency_s: f64,
    pub dynamic_energy_j: f64,
    pub peak_latency_s: f64,
    pub peak_dynamic_energy_j: f64,
    pub throughput_tops: f64,
    pub energy_efficiency_tops_per_w: f64,
    pub peak_throughput_tops: f64,
    pub peak_energy_efficiency_tops_per_w: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DeviceCatalog {
    #[serde(default)]
    pub device: Vec<DeviceSpec>,
}

impl DeviceCatalog {
    pub fn parse(text: &str) -> Result<Self> {
        let catalog: DeviceCatalog =
            toml::from_str(text).map_err(|e| Error::Config(format!("device catalog: {e}")))?;
        for d in &catalog.device {
            d.validate()
                .map_err(|e| Error::Config(format!("device catalog entry `{}`: {e}", d.name)))?;
        }
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("catalog serializes")
    }

    /// Case-insensitive lookup by name.
    pub fn get(&self, name: &str) -> Option<&DeviceSpec> {
        self.device
            .iter()
            .find(|d| d.name.eq_ignore_ascii_case(name))
    }

    pub fn names(&self) -> Vec<&str> {
        self.device.iter().map(|d| d.name.as_str()).collect()
    }
}

pub fn default_catalog() -> DeviceCatalog {
    DeviceCatalog::parse(DEFAULT_CATALOG).expect("shipped catalog is valid")
}
