//! Behavioral models of analog synaptic devices.
//!
//! A [`DeviceSpec`] describes one technology. Its nonlinearity labels are
//! turned into an [`UpdateCurve`]; a [`SynapticArrayState`] holds one
//! conductance per cell plus the per-cell curve shape sampled once for
//! device-to-device variation. Cycle-to-cycle noise is added to every
//! conductance change in [`apply_pulses`].

mod array;
mod catalog;
mod curve;

pub use array::{
    apply_pulses, init_array, pulses_for_delta, C2cMode, CellState, SynapticArrayState, WeightMap,
};
pub use catalog::{default_catalog, DeviceCatalog, ReportedMetrics};
pub use curve::{
    a_to_nl_label, chord_deviation, nl_label_to_a, UpdateCurve, NL_LABEL_MAX, NL_LABEL_SCALE,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// SRAM has no analog conductance; arrays built from it use the read-port
/// equivalent of a stored one (on) and zero (off).
pub const SRAM_ON_RESISTANCE: f64 = 20e3;
pub const SRAM_ON_OFF_RATIO: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    AnalogEnvm,
    Sram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutMode {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub name: String,
    pub kind: DeviceKind,
    /// On-state resistance in ohms (analog devices only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_on: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_off_ratio: Option<f64>,
    pub num_states: u32,
    #[serde(default)]
    pub nl_ltp: f64,
    /// Magnitude of the depression label; see `nl_ltd_negative`.
    #[serde(default)]
    pub nl_ltd: f64,
    #[serde(default)]
    pub nl_ltd_negative: bool,
    /// Per-pulse conductance noise, as a fraction of `g_max - g_min`.
    #[serde(default)]
    pub c2c_sigma: f64,
    /// Spread of the nonlinearity label across cells.
    #[serde(default)]
    pub d2d_sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub write_voltage_ltp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub write_voltage_ltd: Option<f64>,
    /// Seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub write_pulse_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sram_cells_per_weight: Option<u32>,
    #[serde(default)]
    pub readout: ReadoutMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub technology_nm: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_bits: Option<u32>,
    /// Free-form annotation, e.g. the published "<1%" for a bounded C2C value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported: Option<ReportedMetrics>,
}

impl DeviceSpec {
    /// An ideal analog device: linear, symmetric, no variation.
    pub fn ideal(num_states: u32) -> Self {
        DeviceSpec {
            name: "ideal".into(),
            kind: DeviceKind::AnalogEnvm,
            r_on: Some(100e3),
            on_off_ratio: Some(100.0),
            num_states,
            nl_ltp: 0.0,
            nl_ltd: 0.0,
            nl_ltd_negative: false,
            c2c_sigma: 0.0,
            d2d_sigma: 0.0,
            write_voltage_ltp: Some(2.0),
            write_voltage_ltd: Some(-2.0),
            write_pulse_width: Some(100e-9),
            sram_cells_per_weight: None,
            readout: ReadoutMode::Parallel,
            technology_nm: Some(32),
            weight_bits: None,
            note: None,
            reported: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_states < 2 {
            return Err(Error::validation("num_states", "must be at least 2"));
        }
        match self.kind {
            DeviceKind::AnalogEnvm => {
                match self.r_on {
                    Some(r) if r > 0.0 && r.is_finite() => {}
                    _ => return Err(Error::validation("r_on", "must be a positive resistance")),
                }
                match self.on_off_ratio {
                    Some(r) if r >= 1.0 => {}
                    _ => return Err(Error::validation("on_off_ratio", "must be >= 1")),
                }
                if !(self.c2c_sigma >= 0.0) {
                    return Err(Error::validation("c2c_sigma", "must be >= 0"));
                }
                if !(self.d2d_sigma >= 0.0) {
                    return Err(Error::validation("d2d_sigma", "must be >= 0"));
                }
                for (field, label) in [("nl_ltp", self.nl_ltp), ("nl_ltd", self.nl_ltd)] {
                    if !(0.0..=NL_LABEL_MAX).contains(&label) {
                        return Err(Error::validation(
                            field,
                            format!("label magnitude must lie in [0, {NL_LABEL_MAX}]"),
                        ));
                    }
                }
            }
            DeviceKind::Sram => match self.sram_cells_per_weight {
                Some(n) if n >= 1 => {}
                _ => {
                    return Err(Error::validation(
                        "sram_cells_per_weight",
                        "required (>= 1) for SRAM devices",
                    ))
                }
            },
        }
        Ok(())
    }

    /// Maximum pulse count `P_max = num_states - 1`.
    pub fn p_max(&self) -> u32 {
        self.num_states - 1
    }

    pub fn is_sram(&self) -> bool {
        self.kind == DeviceKind::Sram
    }

    /// Physical cells occupied by one weight.
    pub fn cells_per_weight(&self) -> usize {
        match self.kind {
            DeviceKind::AnalogEnvm => 1,
            DeviceKind::Sram => self.sram_cells_per_weight.unwrap_or(1) as usize,
        }
    }

    /// Effective on-resistance used for currents and driver sizing.
    pub fn effective_r_on(&self) -> f64 {
        match self.kind {
            DeviceKind::AnalogEnvm => self.r_on.unwrap_or(SRAM_ON_RESISTANCE),
            DeviceKind::Sram => SRAM_ON_RESISTANCE,
        }
    }

    /// The curve shared by every cell before device-to-device variation.
    pub fn nominal_curve(&self) -> Result<UpdateCurve> {
        let (g_min, g_max) = conductance_bounds(self)?;
        let p_max = self.p_max();
        if self.is_sram() {
            return UpdateCurve::linear(g_min, g_max, p_max);
        }
        UpdateCurve::new(
            curve::shape_for_label(self.nl_ltp, p_max),
            curve::shape_for_label(self.nl_ltd, p_max),
            g_min,
            g_max,
            p_max,
        )
    }
}

/// `g_max = 1 / r_on`, `g_min = g_max / on_off_ratio`.
pub fn conductance_bounds(spec: &DeviceSpec) -> Result<(f64, f64)> {
    let (r_on, ratio) = match spec.kind {
        DeviceKind::AnalogEnvm => (
            spec.r_on
                .ok_or_else(|| Error::validation("r_on", "missing for analog device"))?,
            spec.on_off_ratio
                .ok_or_else(|| Error::validation("on_off_ratio", "missing for analog device"))?,
        ),
        DeviceKind::Sram => (SRAM_ON_RESISTANCE, SRAM_ON_OFF_RATIO),
    };
    let g_max = 1.0 / r_on;
    Ok((g_max / ratio, g_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn analog(r_on: f64, ratio: f64) -> DeviceSpec {
        DeviceSpec {
            r_on: Some(r_on),
            on_off_ratio: Some(ratio),
            ..DeviceSpec::ideal(64)
        }
    }

    #[test]
    fn fefet_bounds() {
        let (g_min, g_max) = conductance_bounds(&analog(500e3, 100.0)).unwrap();
        assert!((g_max - 2.0e-6).abs() < 1e-18);
        assert!((g_min - 2.0e-8).abs() < 1e-20);
    }

    #[test]
    fn epiram_bounds() {
        let (g_min, g_max) = conductance_bounds(&analog(81e3, 50.2)).unwrap();
        assert!((g_max - 1.2346e-5).abs() / 1.2346e-5 < 1e-4);
        assert!((g_min - 2.4593e-7).abs() / 2.4593e-7 < 1e-4);
    }

    #[test]
    fn huge_ratio_drives_g_min_to_zero() {
        let (g_min, _) = conductance_bounds(&analog(1e5, 1e15)).unwrap();
        assert!(g_min < 1e-19);
    }

    #[test]
    fn validation_rejects_bad_fields() {
        assert!(analog(-1.0, 10.0).validate().is_err());
        assert!(analog(1e5, 0.5).validate().is_err());
        let mut d = DeviceSpec::ideal(1);
        assert!(d.validate().is_err());
        d.num_states = 2;
        d.c2c_sigma = -0.1;
        assert!(d.validate().is_err());
    }

    #[test]
    fn sram_ignores_analog_fields() {
        let d = DeviceSpec {
            kind: DeviceKind::Sram,
            r_on: None,
            on_off_ratio: None,
            nl_ltp: 5.0,
            c2c_sigma: 0.3,
            sram_cells_per_weight: Some(5),
            ..DeviceSpec::ideal(32)
        };
        d.validate().unwrap();
        let c = d.nominal_curve().unwrap();
        assert!(c.a_ltp.is_infinite());
        assert_eq!(d.cells_per_weight(), 5);
    }
}
