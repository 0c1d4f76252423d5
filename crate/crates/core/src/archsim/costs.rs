use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_COSTS: &str = include_str!("../../data/costs.toml");
const DEVICE_OVERLAYS: &str = include_str!("../../data/cost_overlays.toml");

/// Per-component unit costs. See `data/costs.toml` for units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostTable {
    pub adc_energy: f64,
    pub adc_latency_base: f64,
    pub adc_current_coefficient: f64,
    pub adc_latency_ceiling: f64,
    pub adc_area: f64,
    pub adc_columns_per_unit: usize,
    pub switch_matrix_energy: f64,
    pub switch_matrix_latency: f64,
    pub switch_matrix_area: f64,
    pub decoder_energy: f64,
    pub decoder_latency: f64,
    pub decoder_area: f64,
    pub adder_energy: f64,
    pub adder_latency: f64,
    pub adder_area: f64,
    pub shift_add_energy: f64,
    pub shift_add_area: f64,
    pub buffer_read_energy: f64,
    pub buffer_write_energy: f64,
    pub buffer_read_latency: f64,
    pub buffer_write_latency: f64,
    pub buffer_access_bits: usize,
    pub buffer_area: f64,
    pub htree_energy: f64,
    pub htree_latency: f64,
    pub htree_bus_bits: usize,
    pub htree_area: f64,
    pub dram_energy: f64,
    pub dram_bandwidth: f64,
    pub read_voltage: f64,
    pub read_pulse_width: f64,
    pub envm_cell_area: f64,
    pub sram_cell_area: f64,
    pub sram_write_energy: f64,
    pub sram_write_latency: f64,
    pub sram_read_voltage: f64,
    pub r_ref: f64,
    pub accumulator_bits: u32,
    pub leakage_per_array: f64,
    pub leakage_per_adc: f64,
    pub leakage_per_buffer_bit: f64,
    pub leakage_per_sram_cell: f64,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable::parse(DEFAULT_COSTS).expect("shipped cost table parses")
    }
}

impl CostTable {
    pub fn parse(text: &str) -> Result<Self> {
        let t: CostTable =
            toml::from_str(text).map_err(|e| Error::Config(format!("cost table: {e}")))?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("cost table serializes")
    }

    /// Replaces the fields named in `overrides`, keeping the rest.
    pub fn with_overrides(&self, overrides: &toml::Table) -> Result<Self> {
        let mut base: toml::Table = toml::from_str(&self.to_toml()).expect("round trip");
        for (k, v) in overrides {
            if !base.contains_key(k) {
                return Err(Error::validation(
                    format!("costs.{k}"),
                    "unknown cost field",
                ));
            }
            base.insert(k.clone(), v.clone());
        }
        let t: CostTable = base
            .try_into()
            .map_err(|e| Error::Config(format!("cost overrides: {e}")))?;
        t.validate()?;
        Ok(t)
    }

    /// Default table with the shipped overlay for `device`, if any.
    pub fn for_device(device: &str) -> Result<Self> {
        let overlays: toml::Table =
            toml::from_str(DEVICE_OVERLAYS).expect("shipped overlays parse");
        let base = CostTable::default();
        match overlays.get(device).and_then(|v| v.as_table()) {
            Some(o) => base.with_overrides(o),
            None => Ok(base),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = toml::Table::try_from(self).expect("serializes");
        for (k, val) in &v {
            let x = val
                .as_float()
                .or_else(|| val.as_integer().map(|i| i as f64));
            if let Some(x) = x {
                if !(x >= 0.0) || !x.is_finite() {
                    return Err(Error::validation(
                        format!("costs.{k}"),
                        "must be finite and >= 0",
                    ));
                }
            }
        }
        for (k, n) in [
            ("adc_columns_per_unit", self.adc_columns_per_unit),
            ("buffer_access_bits", self.buffer_access_bits),
            ("htree_bus_bits", self.htree_bus_bits),
        ] {
            if n == 0 {
                return Err(Error::validation(format!("costs.{k}"), "must be positive"));
            }
        }
        if !(self.dram_bandwidth > 0.0) {
            return Err(Error::validation(
                "costs.dram_bandwidth",
                "must be positive",
            ));
        }
        Ok(())
    }

    /// ADC conversion time at mean column current `i_col` (amperes).
    pub fn adc_latency(&self, i_col: f64) -> f64 {
        let term = if i_col > 0.0 {
            (self.adc_current_coefficient / i_col).min(self.adc_latency_ceiling)
        } else {
            self.adc_latency_ceiling
        };
        self.adc_latency_base + term
    }

    /// Area multiplier for drivers that must source the on-state current.
    pub fn r_on_factor(&self, r_on: f64) -> f64 {
        1.0 + self.r_ref / r_on
    }
}
