//! Latency and energy of the four training steps.
//!
//! Activity comes from the epoch trace (pseudo-trace): each layer's
//! ones-fraction of binarized activations and errors stands in for the
//! per-cycle fraction of driven lines, and its mean conductance for the cell
//! state. Costs per image are computed for feed-forward, error and
//! weight-gradient steps; the weight update is per batch.

use super::breakdown::{Breakdown, Step, StepCost};
use super::costs::CostTable;
use crate::device::{
    pulses_for_delta, DeviceSpec, ReadoutMode, SRAM_ON_OFF_RATIO, SRAM_ON_RESISTANCE,
};
use crate::error::{Error, Result};
use crate::mapping::{partition_matrix, Floorplan, LayerPlacement, SramCimSpec};
use crate::net::{BitWidths, ConvGeometry, NetworkTopology};
use crate::quant::magnitude_bits;
use crate::report::{EpochTrace, LayerTrace};

/// Cost of one input cycle of one array read.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReadCost {
    pub latency: Breakdown,
    pub energy: Breakdown,
    pub ops: f64,
}

fn check_activity(a: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::Domain {
            what: "input activity",
            value: a,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// One input bit-cycle on an array with row-major `conductances`, where
/// `activity[r]` is the fraction of cycles in which row `r` is driven.
///
/// Parallel read-out drives every active row at once and converts each
/// column; sequential read-out reads one row per cycle.
pub fn array_read_cost(
    conductances: &[f64],
    rows: usize,
    cols: usize,
    activity: &[f64],
    readout: ReadoutMode,
    v_read: f64,
    costs: &CostTable,
) -> Result<ReadCost> {
    if conductances.len() != rows * cols || activity.len() != rows {
        return Err(Error::Mapping("array read: shape mismatch".into()));
    }
    for &a in activity {
        check_activity(a)?;
    }
    let active: f64 = activity.iter().sum();
    let mut c = ReadCost::default();
    if active == 0.0 || cols == 0 {
        return Ok(c);
    }
    let per_adc = costs.adc_columns_per_unit.min(cols) as f64;
    let mut cell_energy = 0.0;
    for r in 0..rows {
        let row_g: f64 = conductances[r * cols..(r + 1) * cols].iter().sum();
        cell_energy += v_read * v_read * row_g * activity[r] * costs.read_pulse_width;
    }
    c.energy.array = cell_energy;
    c.ops = 2.0 * active * cols as f64;
    match readout {
        ReadoutMode::Parallel => {
            let mut i_total = 0.0;
            for r in 0..rows {
                let row_g: f64 = conductances[r * cols..(r + 1) * cols].iter().sum();
                i_total += v_read * row_g * activity[r];
            }
            let i_mean = i_total / cols as f64;
            c.latency.adc = per_adc * costs.adc_latency(i_mean);
            c.latency.array = costs.switch_matrix_latency;
            c.latency.other = costs.decoder_latency;
            c.energy.adc = cols as f64 * costs.adc_energy;
            c.energy.array += active * costs.switch_matrix_energy;
            c.energy.other = costs.decoder_energy;
            c.energy.accumulation = cols as f64 * costs.shift_add_energy;
        }
        ReadoutMode::Sequential => {
            for (r, &a) in activity.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let row_g: f64 = conductances[r * cols..(r + 1) * cols].iter().sum();
                let i_row = v_read * row_g / cols as f64;
                c.latency.adc += a * per_adc * costs.adc_latency(i_row);
                c.latency.array += a * costs.switch_matrix_latency;
                c.latency.other += a * costs.decoder_latency;
                c.energy.adc += a * cols as f64 * costs.adc_energy;
                c.energy.array += a * costs.switch_matrix_energy;
                c.energy.other += a * costs.decoder_energy;
                c.energy.accumulation += a * cols as f64 * costs.shift_add_energy;
            }
        }
    }
    Ok(c)
}

/// [`array_read_cost`] for an array whose cells all hold `g` and whose rows
/// all have activity `a`, with fractional average dimensions.
pub fn uniform_read_cost(
    rows: f64,
    cols: f64,
    g: f64,
    a: f64,
    readout: ReadoutMode,
    v_read: f64,
    costs: &CostTable,
) -> ReadCost {
    let mut c = ReadCost::default();
    let active = rows * a;
    if active == 0.0 || cols == 0.0 {
        return c;
    }
    let per_adc = (costs.adc_columns_per_unit as f64).min(cols);
    c.energy.array = v_read * v_read * g * cols * active * costs.read_pulse_width;
    c.ops = 2.0 * active * cols;
    match readout {
        ReadoutMode::Parallel => {
            c.latency.adc = per_adc * costs.adc_latency(v_read * g * active);
            c.latency.array = costs.switch_matrix_latency;
            c.latency.other = costs.decoder_latency;
            c.energy.adc = cols * costs.adc_energy;
            c.energy.array += active * costs.switch_matrix_energy;
            c.energy.other = costs.decoder_energy;
            c.energy.accumulation = cols * costs.shift_add_energy;
        }
        ReadoutMode::Sequential => {
            c.latency.adc = active * per_adc * costs.adc_latency(v_read * g);
            c.latency.array = active * costs.switch_matrix_latency;
            c.latency.other = active * costs.decoder_latency;
            c.energy.adc = active * cols * costs.adc_energy;
            c.energy.array += active * costs.switch_matrix_energy;
            c.energy.other = active * costs.decoder_energy;
            c.energy.accumulation = active * cols * costs.shift_add_energy;
        }
    }
    c
}

/// Energy of one programming pulse on a cell of conductance `g_mean`:
/// `V^2 * G * t_pulse`.
pub fn write_pulse_energy(device: &DeviceSpec, g_mean: f64, potentiate: bool) -> f64 {
    let v = if potentiate {
        device.write_voltage_ltp
    } else {
        device.write_voltage_ltd.or(device.write_voltage_ltp)
    }
    .unwrap_or(0.0);
    v * v * g_mean * device.write_pulse_width.unwrap_or(0.0)
}

/// Result of [`accumulation_schedule`], split into buffer and adder parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AccumulationCost {
    pub buffer_latency: f64,
    pub add_latency: f64,
    pub buffer_energy: f64,
    pub add_energy: f64,
}

impl AccumulationCost {
    pub fn latency(&self) -> f64 {
        self.buffer_latency + self.add_latency
    }

    pub fn energy(&self) -> f64 {
        self.buffer_energy + self.add_energy
    }
}

/// Arrays updated concurrently for constraint ratio `c`.
pub fn concurrent_arrays(c: f64) -> usize {
    (c.floor() as usize).max(1)
}

/// One array's worth of accumulated gradients: `cells` values summed by
/// `adders` parallel adders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccumulationGroup {
    pub cells: usize,
    pub adders: usize,
}

impl AccumulationGroup {
    /// Buffer read, add and buffer write time of one group.
    pub fn times(&self, costs: &CostTable) -> (f64, f64, f64) {
        let bits = self.cells * costs.accumulator_bits as usize;
        let accesses = bits.div_ceil(costs.buffer_access_bits) as f64;
        (
            accesses * costs.buffer_read_latency,
            self.cells.div_ceil(self.adders.max(1)) as f64 * costs.adder_latency,
            accesses * costs.buffer_write_latency,
        )
    }
}

/// Gradient accumulation for one layer over `b` images. Each group of
/// concurrently handled arrays takes `b * (read + add + write)`; groups run
/// in `ceil(n_arrays / c)` rounds.
pub fn accumulation_schedule(
    b: usize,
    n_arrays: usize,
    c: f64,
    group: &AccumulationGroup,
    costs: &CostTable,
) -> AccumulationCost {
    let rounds = n_arrays.div_ceil(concurrent_arrays(c)) as f64;
    let b = b as f64;
    let (t_read, t_add, t_write) = group.times(costs);
    let values = (n_arrays * group.cells) as f64;
    let bits = values * costs.accumulator_bits as f64;
    AccumulationCost {
        buffer_latency: b * rounds * (t_read + t_write),
        add_latency: b * rounds * t_add,
        buffer_energy: b * bits * (costs.buffer_read_energy + costs.buffer_write_energy),
        add_energy: b * values * costs.adder_energy,
    }
}

/// Element counts entering the global-buffer sizing rule.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BufferSizes {
    pub activations: Vec<usize>,
    pub errors: Vec<usize>,
    pub gradients: Vec<usize>,
}

impl BufferSizes {
    pub fn from_topology(net: &NetworkTopology) -> Result<Self> {
        let g = net.weighted_geometries()?;
        Ok(BufferSizes {
            activations: g.iter().map(|g| g.in_len()).collect(),
            errors: g.iter().map(|g| g.out_len()).collect(),
            gradients: g.iter().map(|g| g.weight_count()).collect(),
        })
    }
}

/// Global buffer bits: the largest activation, error or weight-gradient
/// tensor at its bit width, plus the accumulation buffer
/// `2 * array_cells * accumulator_bits * c`.
pub fn buffer_requirement(
    sizes: &BufferSizes,
    bits: &BitWidths,
    array_cells: usize,
    accumulator_bits: u32,
    c: f64,
) -> f64 {
    let largest = |v: &[usize], b: u32| v.iter().max().copied().unwrap_or(0) as f64 * b as f64;
    let tensors = largest(&sizes.activations, bits.activation)
        .max(largest(&sizes.errors, bits.error))
        .max(largest(&sizes.gradients, bits.gradient));
    tensors + 2.0 * array_cells as f64 * accumulator_bits as f64 * c
}

/// Everything the step model needs besides the trace.
#[derive(Debug, Clone)]
pub struct ArchContext<'a> {
    pub floorplan: &'a Floorplan,
    pub device: &'a DeviceSpec,
    pub costs: &'a CostTable,
    pub bits: BitWidths,
    pub sram: SramCimSpec,
    pub constraint_ratio: f64,
    pub buffer_bits: f64,
}

impl<'a> ArchContext<'a> {
    pub fn new(
        net: &NetworkTopology,
        floorplan: &'a Floorplan,
        device: &'a DeviceSpec,
        costs: &'a CostTable,
        constraint_ratio: f64,
    ) -> Result<Self> {
        if !(constraint_ratio >= 1.0) {
            return Err(Error::validation(
                "buffer_overhead_constraint",
                "must be >= 1",
            ));
        }
        let p = &floorplan.params;
        let geoms = net.weighted_geometries()?;
        let sram = SramCimSpec::sized_for(&geoms, p.array_rows, p.array_cols, net.bits.error);
        let buffer_bits = buffer_requirement(
            &BufferSizes::from_topology(net)?,
            &net.bits,
            p.array_cells(),
            costs.accumulator_bits,
            constraint_ratio,
        );
        Ok(ArchContext {
            floorplan,
            device,
            costs,
            bits: net.bits,
            sram,
            constraint_ratio,
            buffer_bits,
        })
    }

    /// Binary H-tree depth over the tile grid.
    pub fn htree_hops(&self) -> f64 {
        let t = self.floorplan.total_tiles.max(2);
        (t as f64).log2().ceil()
    }

    pub fn adc_count(&self) -> usize {
        let p = &self.floorplan.params;
        let per_array = p.array_cols.div_ceil(self.costs.adc_columns_per_unit);
        (self.floorplan.total_arrays + self.sram.arrays) * per_array
    }

    /// Standby power of everything instantiated.
    pub fn leakage_power(&self) -> f64 {
        let c = self.costs;
        let p = &self.floorplan.params;
        let mut sram_cells = self.sram.capacity_cells();
        if self.device.is_sram() {
            sram_cells += self.floorplan.total_arrays * p.array_cells();
        }
        self.floorplan.total_arrays as f64 * c.leakage_per_array
            + self.adc_count() as f64 * c.leakage_per_adc
            + self.buffer_bits * c.leakage_per_buffer_bit
            + sram_cells as f64 * c.leakage_per_sram_cell
    }

    fn v_read(&self) -> f64 {
        self.costs.read_voltage
    }

    fn buffer_traffic(&self, read_bits: f64, write_bits: f64) -> (f64, f64) {
        let c = self.costs;
        let acc = c.buffer_access_bits as f64;
        let lat = (read_bits / acc).ceil() * c.buffer_read_latency
            + (write_bits / acc).ceil() * c.buffer_write_latency;
        let en = read_bits * c.buffer_read_energy + write_bits * c.buffer_write_energy;
        (lat, en)
    }

    fn htree_traffic(&self, bits: f64) -> (f64, f64) {
        let c = self.costs;
        let hops = self.htree_hops();
        (
            (bits / c.htree_bus_bits as f64).ceil() * hops * c.htree_latency,
            bits * hops * c.htree_energy,
        )
    }

    fn dram_traffic(&self, bits: f64) -> (f64, f64) {
        (
            bits / self.costs.dram_bandwidth,
            bits * self.costs.dram_energy,
        )
    }

    /// Data movement shared by every read step: buffer in/out, H-tree, DRAM.
    fn movement(&self, cost: &mut StepCost, buf_read: f64, buf_write: f64, dram_bits: f64) {
        let (l, e) = self.buffer_traffic(buf_read, buf_write);
        cost.latency.buffer += l;
        cost.dynamic_energy.buffer += e;
        let (l, e) = self.htree_traffic(buf_read + buf_write);
        cost.latency.interconnect += l;
        cost.dynamic_energy.interconnect += e;
        let (l, e) = self.dram_traffic(dram_bits);
        cost.latency.dram += l;
        cost.dynamic_energy.dram += e;
    }

    fn feed_forward_layer(&self, l: &LayerTrace, p: &LayerPlacement) -> StepCost {
        let g = &l.geometry;
        let mut cost = StepCost::default();
        let rows = p.sub_rows as f64 / p.grid_rows as f64;
        let cols = p.sub_cols as f64 / p.grid_cols as f64;
        let rc = uniform_read_cost(
            rows,
            cols,
            l.mean_conductance,
            l.act_ones_fraction,
            self.device.readout,
            self.v_read(),
            self.costs,
        );
        let cycles = magnitude_bits(self.bits.activation) as f64;
        let positions = g.out_positions() as f64;
        let reads = positions * p.arrays as f64 * cycles;
        let seq = (positions / p.duplication as f64).ceil() * cycles;
        cost.latency = rc.latency * seq;
        cost.dynamic_energy = rc.energy * reads;
        if rc.ops > 0.0 {
            // Sum K*K*grid_rows partial results per output through an adder tree.
            let inputs = (p.submatrices * p.grid_rows) as f64;
            cost.latency.accumulation += (positions / p.duplication as f64).ceil()
                * inputs.log2().ceil()
                * self.costs.adder_latency;
            cost.dynamic_energy.accumulation +=
                positions * g.out_channels as f64 * (inputs - 1.0) * self.costs.adder_energy;
            cost.ops = 2.0 * g.macs() as f64;
        }
        let in_bits = (g.in_len() as u64 * self.bits.activation as u64) as f64;
        let out_bits = (g.out_len() as u64 * self.bits.activation as u64) as f64;
        // Inputs are kept in DRAM for the weight-gradient step.
        self.movement(&mut cost, in_bits, out_bits, in_bits);
        cost
    }

    fn error_layer(&self, l: &LayerTrace, p: &LayerPlacement) -> StepCost {
        let g = &l.geometry;
        let mut cost = StepCost::default();
        let err_bits = self.bits.error as f64;
        let out_bits = g.out_len() as f64 * err_bits;
        if l.layer > 0 {
            // Transposed read: error drives the columns, rows are sensed.
            let lines = p.sub_cols as f64 / p.grid_cols as f64;
            let outputs = p.sub_rows as f64 / p.grid_rows as f64;
            let rc = uniform_read_cost(
                lines,
                outputs,
                l.mean_conductance,
                l.err_ones_fraction,
                self.device.readout,
                self.v_read(),
                self.costs,
            );
            let cycles = 2.0 * magnitude_bits(self.bits.error) as f64;
            let positions = g.out_positions() as f64;
            // Block-diagonal copies serve transposed reads as they do forward ones.
            let seq = (positions / p.duplication as f64).ceil();
            cost.latency = rc.latency * (seq * cycles);
            cost.dynamic_energy = rc.energy * (positions * p.arrays as f64 * cycles);
            if rc.ops > 0.0 {
                let inputs = p.grid_cols as f64;
                cost.latency.accumulation +=
                    seq * (inputs.log2().ceil() + 1.0) * self.costs.adder_latency;
                cost.dynamic_energy.accumulation += positions
                    * (p.submatrices * g.in_channels) as f64
                    * inputs
                    * self.costs.adder_energy;
                cost.ops = 2.0 * g.macs() as f64;
            }
            let in_bits = g.in_len() as f64 * err_bits;
            self.movement(&mut cost, out_bits, in_bits, out_bits);
        } else {
            self.movement(&mut cost, out_bits, 0.0, out_bits);
        }
        cost
    }

    pub fn accumulation_group(&self) -> AccumulationGroup {
        let p = &self.floorplan.params;
        AccumulationGroup {
            cells: p.array_cells(),
            adders: p.array_cols,
        }
    }

    /// Number of physical arrays a layer's gradient accumulation covers.
    fn gradient_arrays(&self, p: &LayerPlacement) -> usize {
        p.arrays
    }

    fn weight_gradient_layer(&self, l: &LayerTrace, p: &LayerPlacement) -> StepCost {
        let g = &l.geometry;
        let c = self.costs;
        let mut cost = StepCost::default();
        let positions = g.out_positions();
        let err_bits = self.bits.error as usize;
        let sram_rows = self.sram.array_rows;
        // Fetch the stored activations and errors.
        let act_bits = g.in_len() as f64 * self.bits.activation as f64;
        let e_bits = g.out_len() as f64 * err_bits as f64;
        self.movement(&mut cost, act_bits + e_bits, e_bits, act_bits + e_bits);

        // Write the unrolled error matrix into the SRAM unit.
        let written = (positions * g.out_channels * err_bits) as f64;
        cost.dynamic_energy.array += written * c.sram_write_energy;
        cost.latency.array += positions.min(sram_rows) as f64 * c.sram_write_latency;

        // Apply the K*K*D shifted activation vectors, bit-serially.
        let blocks = positions.div_ceil(sram_rows) as f64;
        let rows = positions as f64 / blocks;
        let cols = g.out_channels as f64 * err_bits as f64;
        let g_on = 1.0 / SRAM_ON_RESISTANCE;
        let g_off = g_on / SRAM_ON_OFF_RATIO;
        let f = l.err_ones_fraction;
        let g_cell = f * g_on + (1.0 - f) * g_off;
        let rc = uniform_read_cost(
            rows,
            cols,
            g_cell,
            l.act_ones_fraction,
            ReadoutMode::Parallel,
            c.sram_read_voltage,
            c,
        );
        let cycles = magnitude_bits(self.bits.activation) as f64;
        let vectors = (g.kernel * g.kernel * g.in_channels) as f64;
        let duplication =
            self.sram.capacity_cells() / (positions * g.out_channels * err_bits).max(1);
        let duplication = duplication.max(1) as f64;
        cost.latency += rc.latency * ((vectors / duplication).ceil() * cycles);
        cost.dynamic_energy += rc.energy * (vectors * blocks * cycles);
        if rc.ops > 0.0 {
            // Shift-add over the error bit columns and the row blocks.
            let adds = vectors * g.out_channels as f64 * (err_bits as f64 - 1.0 + blocks - 1.0);
            cost.dynamic_energy.accumulation += adds * c.adder_energy;
            cost.latency.accumulation += (vectors / duplication).ceil()
                * ((err_bits as f64).log2().ceil() + blocks.log2().ceil())
                * c.adder_latency;
            cost.ops = 2.0 * g.macs() as f64;
        }

        // Accumulate this image's gradient into the buffer.
        let acc = accumulation_schedule(
            1,
            self.gradient_arrays(p),
            self.constraint_ratio,
            &self.accumulation_group(),
            c,
        );
        cost.latency.buffer += acc.buffer_latency;
        cost.latency.accumulation += acc.add_latency;
        cost.dynamic_energy.buffer += acc.buffer_energy;
        cost.dynamic_energy.accumulation += acc.add_energy;
        cost
    }

    fn weight_update_layer(&self, l: &LayerTrace, p: &LayerPlacement) -> StepCost {
        let g = &l.geometry;
        let c = self.costs;
        let params = &self.floorplan.params;
        let mut cost = StepCost::default();
        let n = g.cols();
        let p_max = self.device.p_max();
        let pulses: Vec<i64> = l
            .delta_weights
            .iter()
            .map(|d| pulses_for_delta(*d, 2.0, p_max))
            .collect();
        let cpw = self.floorplan.cells_per_weight;
        let dup = p.duplication as f64;
        let sram = self.device.is_sram();
        let e_ltp = write_pulse_energy(self.device, l.mean_conductance, true);
        let e_ltd = write_pulse_energy(self.device, l.mean_conductance, false);
        let pw = self.device.write_pulse_width.unwrap_or(0.0);

        // Per physical array: rows are written one group at a time.
        let grid = partition_matrix(p.sub_rows, p.sub_cols, params.array_rows, params.array_cols);
        let mut array_latency = Vec::with_capacity(p.arrays);
        for s in 0..p.submatrices {
            let base = s * g.in_channels;
            for t in &grid.tiles {
                let mut lat = 0.0;
                for r in t.row0..t.row0 + t.rows {
                    let row = &pulses[(base + r) * n..(base + r + 1) * n];
                    let (mut up, mut down, mut any) = (0i64, 0i64, false);
                    for pc in t.col0..t.col0 + t.cols {
                        let v = row[pc / cpw];
                        up = up.max(v);
                        down = down.max(-v);
                        any |= v != 0;
                    }
                    lat += if sram {
                        if any {
                            c.sram_write_latency
                        } else {
                            0.0
                        }
                    } else {
                        pw * (up + down) as f64
                    };
                }
                array_latency.push(lat * dup);
            }
        }
        let per_round = concurrent_arrays(self.constraint_ratio);
        cost.latency.array = array_latency
            .chunks(per_round)
            .map(|ch| ch.iter().cloned().fold(0.0, f64::max))
            .sum();

        let (mut ltp, mut ltd, mut cells) = (0.0, 0.0, 0.0);
        for &v in &pulses {
            if v > 0 {
                ltp += v as f64;
            } else {
                ltd += (-v) as f64;
            }
            if v != 0 {
                cells += cpw as f64;
            }
        }
        cost.dynamic_energy.array = if sram {
            cells * dup * c.sram_write_energy
        } else {
            (ltp * e_ltp + ltd * e_ltd) * dup
        };
        // Accumulated gradients leave the buffer once per batch.
        let bits = g.weight_count() as f64 * c.accumulator_bits as f64;
        let (lb, eb) = self.buffer_traffic(bits, 0.0);
        cost.latency.buffer += lb;
        cost.dynamic_energy.buffer += eb;
        cost
    }
}

/// Cost of one step: per image for the first three steps, per batch for the
/// weight update.
pub fn step_cost(step: Step, trace: &EpochTrace, ctx: &ArchContext) -> Result<StepCost> {
    let fp = ctx.floorplan;
    if trace.layers.len() != fp.layers.len() {
        return Err(Error::Trace(format!(
            "trace has {} layers, floorplan {}",
            trace.layers.len(),
            fp.layers.len()
        )));
    }
    let mut total = StepCost::default();
    for (l, p) in trace.layers.iter().zip(&fp.layers) {
        check_layer(l, p)?;
        total += match step {
            Step::FeedForward => ctx.feed_forward_layer(l, p),
            Step::Error => ctx.error_layer(l, p),
            Step::WeightGradient => ctx.weight_gradient_layer(l, p),
            Step::WeightUpdate => ctx.weight_update_layer(l, p),
        };
    }
    total.leakage_energy = ctx.leakage_power() * total.latency.total();
    Ok(total)
}

fn check_layer(l: &LayerTrace, p: &LayerPlacement) -> Result<()> {
    let g: &ConvGeometry = &l.geometry;
    if g.in_channels != p.sub_rows || g.kernel * g.kernel != p.submatrices {
        return Err(Error::Trace(format!(
            "layer {} does not match its placement",
            l.layer
        )));
    }
    if l.delta_weights.len() != g.weight_count() {
        return Err(Error::Trace(format!(
            "layer {}: delta weights missing",
            l.layer
        )));
    }
    for f in [l.act_ones_fraction, l.err_ones_fraction] {
        check_activity(f).map_err(|e| Error::Trace(format!("layer {}: {e}", l.layer)))?;
    }
    if !(l.mean_conductance >= 0.0) {
        return Err(Error::Trace(format!(
            "layer {}: mean conductance missing",
            l.layer
        )));
    }
    Ok(())
}
