use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::curve::{shape_for_label, UpdateCurve};
use super::{DeviceSpec, ReadoutMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellState {
    pub conductance: f64,
    pub a_ltp: f64,
    pub a_ltd: f64,
}

/// How cycle-to-cycle noise is drawn for a burst of `n` pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C2cMode {
    /// One draw with standard deviation scaled by `sqrt(n)`.
    #[default]
    Aggregated,
    /// `n` independent draws, one per pulse.
    PerPulse,
}

/// Affine map between the weight interval and the conductance interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightMap {
    pub w_min: f64,
    pub w_max: f64,
    pub g_min: f64,
    pub g_max: f64,
}

impl WeightMap {
    pub fn new(w_min: f64, w_max: f64, g_min: f64, g_max: f64) -> Result<Self> {
        if !(w_max > w_min) || !(g_max > g_min) {
            return Err(Error::Device(format!(
                "degenerate weight map [{w_min}, {w_max}] -> [{g_min}, {g_max}]"
            )));
        }
        Ok(Self {
            w_min,
            w_max,
            g_min,
            g_max,
        })
    }

    pub fn weight_range(&self) -> f64 {
        self.w_max - self.w_min
    }

    pub fn weight_to_conductance(&self, w: f64) -> Result<f64> {
        if !(w >= self.w_min && w <= self.w_max) {
            return Err(Error::Domain {
                what: "weight",
                value: w,
                lo: self.w_min,
                hi: self.w_max,
            });
        }
        Ok(self.g_of(w))
    }

    pub fn conductance_to_weight(&self, g: f64) -> Result<f64> {
        if !(g >= self.g_min && g <= self.g_max) {
            return Err(Error::Domain {
                what: "conductance",
                value: g,
                lo: self.g_min,
                hi: self.g_max,
            });
        }
        Ok(self.w_of(g))
    }

    #[inline]
    pub(crate) fn g_of(&self, w: f64) -> f64 {
        self.g_min + (w - self.w_min) * (self.g_max - self.g_min) / (self.w_max - self.w_min)
    }

    #[inline]
    pub(crate) fn w_of(&self, g: f64) -> f64 {
        self.w_min + (g - self.g_min) * (self.w_max - self.w_min) / (self.g_max - self.g_min)
    }
}

/// Pulse count realizing `delta_w`: rounded half away from zero, clamped to
/// `+-p_max`. Positive counts potentiate.
pub fn pulses_for_delta(delta_w: f64, weight_range: f64, p_max: u32) -> i64 {
    if p_max == 0 || delta_w == 0.0 || !delta_w.is_finite() {
        return 0;
    }
    let quantum = weight_range / p_max as f64;
    let n = (delta_w / quantum).round();
    n.clamp(-(p_max as f64), p_max as f64) as i64
}

/// Applies `n` identical pulses to one cell along its own curve.
pub fn apply_pulses<R: Rng + ?Sized>(
    cell: &CellState,
    n: i64,
    curve: &UpdateCurve,
    c2c_sigma: f64,
    mode: C2cMode,
    rng: &mut R,
) -> CellState {
    if n == 0 {
        return *cell;
    }
    let own = curve.with_shape(cell.a_ltp, cell.a_ltd);
    let p_max = curve.p_max as f64;
    let mut g = if n > 0 {
        let p = own.ltp_index(cell.conductance);
        own.ltp_at((p + n as f64).min(p_max))
    } else {
        let p = own.ltd_index(cell.conductance);
        own.ltd_at((p + n as f64).max(0.0))
    };
    if c2c_sigma > 0.0 {
        let std = c2c_sigma * curve.range();
        let k = n.unsigned_abs();
        g += match mode {
            C2cMode::Aggregated => {
                let z: f64 = StandardNormal.sample(rng);
                z * std * (k as f64).sqrt()
            }
            C2cMode::PerPulse => (0..k)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    z * std
                })
                .sum(),
        };
    }
    CellState {
        conductance: g.clamp(curve.g_min, curve.g_max),
        ..*cell
    }
}

/// Conductance state of a (logical) synaptic array, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SynapticArrayState {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<CellState>,
    pub readout: ReadoutMode,
    pub transposable: bool,
    pub curve: UpdateCurve,
    pub c2c_sigma: f64,
    pub c2c_mode: C2cMode,
}

/// Samples per-cell curve shapes and programs the initial weights.
///
/// Each cell's potentiation and depression labels are drawn once from
/// `Normal(spec label, d2d_sigma)`; draws at or below zero make that branch
/// linear. SRAM arrays get exact linear curves and no variation.
pub fn init_array(
    rows: usize,
    cols: usize,
    spec: &DeviceSpec,
    map: &WeightMap,
    initial_weights: &[f64],
    seed: u64,
) -> Result<SynapticArrayState> {
    if rows == 0 || cols == 0 {
        return Err(Error::Device("array dimensions must be positive".into()));
    }
    if initial_weights.len() != rows * cols {
        return Err(Error::Device(format!(
            "expected {} initial weights, got {}",
            rows * cols,
            initial_weights.len()
        )));
    }
    let curve = spec.nominal_curve()?;
    let p_max = spec.p_max();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vary = !spec.is_sram() && spec.d2d_sigma > 0.0;
    let label_ltp = Normal::new(spec.nl_ltp, spec.d2d_sigma.max(0.0))
        .map_err(|e| Error::Device(e.to_string()))?;
    let label_ltd = Normal::new(spec.nl_ltd, spec.d2d_sigma.max(0.0))
        .map_err(|e| Error::Device(e.to_string()))?;

    let mut cells = Vec::with_capacity(rows * cols);
    for &w in initial_weights {
        let g = map.weight_to_conductance(w.clamp(map.w_min, map.w_max))?;
        let (a_ltp, a_ltd) = if vary {
            (
                shape_for_label(label_ltp.sample(&mut rng), p_max),
                shape_for_label(label_ltd.sample(&mut rng), p_max),
            )
        } else {
            (curve.a_ltp, curve.a_ltd)
        };
        cells.push(CellState {
            conductance: g,
            a_ltp,
            a_ltd,
        });
    }
    Ok(SynapticArrayState {
        rows,
        cols,
        cells,
        readout: spec.readout,
        transposable: true,
        curve,
        c2c_sigma: if spec.is_sram() { 0.0 } else { spec.c2c_sigma },
        c2c_mode: C2cMode::Aggregated,
    })
}

impl SynapticArrayState {
    pub fn cell(&self, row: usize, col: usize) -> &CellState {
        &self.cells[row * self.cols + col]
    }

    pub fn conductances(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.conductance).collect()
    }

    pub fn weights(&self, map: &WeightMap) -> Vec<f64> {
        self.cells.iter().map(|c| map.w_of(c.conductance)).collect()
    }

    /// Applies a signed pulse count to every cell, in row-major order.
    pub fn apply_update<R: Rng + ?Sized>(&mut self, pulses: &[i64], rng: &mut R) -> Result<()> {
        if pulses.len() != self.cells.len() {
            return Err(Error::Device(format!(
                "pulse vector has {} entries for {} cells",
                pulses.len(),
                self.cells.len()
            )));
        }
        let curve = self.curve;
        for (cell, &n) in self.cells.iter_mut().zip(pulses) {
            *cell = apply_pulses(cell, n, &curve, self.c2c_sigma, self.c2c_mode, rng);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_map() -> WeightMap {
        WeightMap::new(-1.0, 1.0, 1e-6, 2e-6).unwrap()
    }

    #[test]
    fn map_endpoints_and_midpoint() {
        let m = unit_map();
        assert_eq!(m.weight_to_conductance(-1.0).unwrap(), 1e-6);
        assert_eq!(m.weight_to_conductance(1.0).unwrap(), 2e-6);
        assert!((m.weight_to_conductance(0.0).unwrap() - 1.5e-6).abs() < 1e-20);
        assert!(m.weight_to_conductance(1.5).is_err());
        assert!(m.conductance_to_weight(0.5e-6).is_err());
    }

    #[test]
    fn pulse_rounding() {
        assert_eq!(pulses_for_delta(0.0, 2.0, 100), 0);
        assert_eq!(pulses_for_delta(0.05, 2.0, 100), 3);
        assert_eq!(pulses_for_delta(-0.05, 2.0, 100), -3);
        assert_eq!(pulses_for_delta(0.029, 2.0, 100), 1);
        assert_eq!(pulses_for_delta(5.0, 2.0, 100), 100);
        assert_eq!(pulses_for_delta(-5.0, 2.0, 100), -100);
    }

    #[test]
    fn full_potentiation_reaches_g_max() {
        let curve = UpdateCurve::new(20.0, 35.0, 1e-9, 1.0, 100).unwrap();
        let cell = CellState {
            conductance: curve.g_min,
            a_ltp: 20.0,
            a_ltd: 35.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = apply_pulses(&cell, 100, &curve, 0.0, C2cMode::Aggregated, &mut rng);
        assert!((out.conductance - 1.0).abs() < 1e-12);
        let back = apply_pulses(&out, -100, &curve, 0.0, C2cMode::Aggregated, &mut rng);
        assert!((back.conductance - curve.g_min).abs() < 1e-12);
    }

    #[test]
    fn noise_never_escapes_range() {
        let curve = UpdateCurve::new(20.0, 20.0, 0.1, 1.0, 50).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut cell = CellState {
            conductance: 0.95,
            a_ltp: 20.0,
            a_ltd: 20.0,
        };
        for i in 0..2000 {
            let n = if i % 3 == 0 { -7 } else { 5 };
            cell = apply_pulses(&cell, n, &curve, 0.5, C2cMode::PerPulse, &mut rng);
            assert!(cell.conductance >= 0.1 && cell.conductance <= 1.0);
        }
    }

    #[test]
    fn d2d_zero_gives_identical_cells() {
        let spec = DeviceSpec {
            nl_ltp: 3.0,
            nl_ltd: 3.0,
            ..DeviceSpec::ideal(256)
        };
        let (g0, g1) = super::super::conductance_bounds(&spec).unwrap();
        let map = WeightMap::new(-1.0, 1.0, g0, g1).unwrap();
        let arr = init_array(8, 8, &spec, &map, &[0.0; 64], 3).unwrap();
        assert!(arr.cells.iter().all(|c| c.a_ltp == arr.cells[0].a_ltp));
        assert!(arr.cells.iter().all(|c| c.a_ltd == arr.cells[0].a_ltd));
    }

    #[test]
    fn init_rejects_bad_shape() {
        let spec = DeviceSpec::ideal(16);
        let map = unit_map();
        assert!(init_array(0, 3, &spec, &map, &[], 1).is_err());
        assert!(init_array(2, 3, &spec, &map, &[0.0; 5], 1).is_err());
    }
}
