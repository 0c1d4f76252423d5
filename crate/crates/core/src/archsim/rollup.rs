use super::breakdown::{Breakdown, Step, StepCost};
use super::model::{step_cost, ArchContext};
use crate::error::{Error, Result};
use crate::report::EpochTrace;

/// Costs of one epoch of training.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpochCost {
    /// Per image for the first three steps, per batch for the update.
    pub steps: [StepCost; 4],
    pub per_batch: StepCost,
    pub epoch: StepCost,
    pub batch_size: usize,
    pub batches: usize,
}

impl EpochCost {
    pub fn step(&self, s: Step) -> &StepCost {
        &self.steps[Step::ALL.iter().position(|x| *x == s).unwrap()]
    }

    /// Each step's share of the epoch; these sum to `epoch`.
    pub fn epoch_by_step(&self) -> [StepCost; 4] {
        let b = self.batch_size as f64;
        let n = self.batches as f64;
        [
            self.steps[0] * (b * n),
            self.steps[1] * (b * n),
            self.steps[2] * (b * n),
            self.steps[3] * n,
        ]
    }

    pub fn peak(&self) -> PeakMetrics {
        peak_metrics(&self.epoch)
    }
}

/// Each batch runs feed-forward, error and weight-gradient once per image,
/// then one weight update.
pub fn epoch_rollup(trace: &EpochTrace, ctx: &ArchContext) -> Result<EpochCost> {
    trace.check()?;
    if trace.batch_size == 0 || trace.batches == 0 {
        return Err(Error::Trace("epoch has no batches".into()));
    }
    let mut steps = [StepCost::default(); 4];
    for (i, s) in Step::ALL.iter().enumerate() {
        steps[i] = step_cost(*s, trace, ctx)?;
    }
    let b = trace.batch_size as f64;
    let per_batch = (steps[0] + steps[1] + steps[2]) * b + steps[3];
    Ok(EpochCost {
        steps,
        per_batch,
        epoch: per_batch * trace.batches as f64,
        batch_size: trace.batch_size,
        batches: trace.batches,
    })
}

/// Headline metrics of an accumulated cost.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PeakMetrics {
    pub latency: f64,
    /// Dynamic plus leakage.
    pub energy: f64,
    pub dynamic_energy: f64,
    pub leakage_energy: f64,
    pub peak_latency: f64,
    pub peak_energy: f64,
    pub tops: f64,
    pub tops_per_w: f64,
    pub peak_tops: f64,
    pub peak_tops_per_w: f64,
}

fn ratio(ops: f64, d: f64) -> f64 {
    if d > 0.0 {
        ops / d / 1e12
    } else {
        0.0
    }
}

pub fn peak_metrics(c: &StepCost) -> PeakMetrics {
    let latency = c.latency.total();
    let dynamic = c.dynamic_energy.total();
    let energy = dynamic + c.leakage_energy;
    let peak_latency = c.latency.peak();
    let peak_energy = c.dynamic_energy.peak();
    PeakMetrics {
        latency,
        energy,
        dynamic_energy: dynamic,
        leakage_energy: c.leakage_energy,
        peak_latency,
        peak_energy,
        tops: ratio(c.ops, latency),
        tops_per_w: ratio(c.ops, energy),
        peak_tops: ratio(c.ops, peak_latency),
        peak_tops_per_w: ratio(c.ops, peak_energy),
    }
}

/// Chip area (mm^2) by component.
pub fn area_rollup(ctx: &ArchContext) -> Breakdown {
    let c = ctx.costs;
    let fp = ctx.floorplan;
    let p = &fp.params;
    let arrays = fp.total_arrays as f64;
    let r_factor = c.r_on_factor(ctx.device.effective_r_on());
    let cell_area = if ctx.device.is_sram() {
        c.sram_cell_area
    } else {
        c.envm_cell_area * r_factor
    };
    let adcs_per_array = p.array_cols.div_ceil(c.adc_columns_per_unit) as f64;
    let per_array = Breakdown {
        array: p.array_cells() as f64 * cell_area,
        adc: adcs_per_array * c.adc_area,
        accumulation: adcs_per_array * c.shift_add_area,
        other: (p.array_rows + p.array_cols) as f64 * c.switch_matrix_area * r_factor
            + c.decoder_area,
        ..Breakdown::default()
    };
    let sram_arrays = ctx.sram.arrays as f64;
    let sram_unit = Breakdown {
        array: ctx.sram.capacity_cells() as f64 * c.sram_cell_area,
        adc: sram_arrays * ctx.sram.array_cols.div_ceil(c.adc_columns_per_unit) as f64 * c.adc_area,
        other: sram_arrays
            * (ctx.sram.array_rows + ctx.sram.array_cols) as f64
            * c.switch_matrix_area
            + sram_arrays * c.decoder_area,
        ..Breakdown::default()
    };
    let mut a = per_array * arrays + sram_unit;
    a.accumulation += fp.total_pes as f64 * p.array_cols as f64 * c.adder_area;
    a.buffer = ctx.buffer_bits * c.buffer_area;
    a.interconnect = fp.total_tiles as f64 * c.htree_area;
    a
}
