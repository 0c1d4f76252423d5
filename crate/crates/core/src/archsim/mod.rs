//! Hardware cost model: latency, energy and area of training on a mapped
//! chip, priced from a unit-cost table and the activity recorded in an
//! epoch trace.

mod breakdown;
mod costs;
mod model;
mod rollup;

pub use breakdown::{Breakdown, Step, StepCost};
pub use costs::CostTable;
pub use model::{
    accumulation_schedule, array_read_cost, buffer_requirement, concurrent_arrays, step_cost,
    uniform_read_cost, write_pulse_energy, AccumulationCost, AccumulationGroup, ArchContext,
    BufferSizes, ReadCost,
};
pub use rollup::{area_rollup, epoch_rollup, peak_metrics, EpochCost, PeakMetrics};
