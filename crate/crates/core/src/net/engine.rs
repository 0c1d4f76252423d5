//! Training engine: a CNN whose weights live in synaptic arrays.
//!
//! Every weighted layer computes `y = alpha * (W x)` where `W` is read from
//! the array (device weights in `[-1, 1]`) and `alpha` is a fixed
//! power-of-two layer scale. Per batch the engine runs forward, error and
//! per-sample weight-gradient passes, averages the gradients digitally, runs
//! them through momentum and converts the resulting weight deltas into
//! programming pulses for each cell.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adc::{AdcModel, PsumProbe};
use super::dataset::Dataset;
use super::momentum::MomentumState;
use super::ops;
use super::topology::{ConvGeometry, NetworkTopology, ResolvedLayer};
use crate::device::{
    conductance_bounds, init_array, pulses_for_delta, C2cMode, DeviceSpec, SynapticArrayState,
    WeightMap,
};
use crate::error::{Error, Result};
use crate::mapping::{mapped_forward, mapped_input_error, Operand, ReadSetup};
use crate::quant::{max_abs, pow2_range, quantize, quantize_nearest, QuantTensor, Rounding};
use crate::report::{EpochTrace, LayerTrace};
use crate::seed;

/// Arithmetic used by the passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Numerics {
    /// Fixed-point activations, weights, errors and gradients.
    #[default]
    Quantized,
    /// Real-valued passes; devices still apply their update behavior.
    FullPrecision,
}

/// How array reads are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComputePath {
    /// Exact dense convolution (bypass).
    Direct,
    /// Mapped arrays with bit-serial inputs and column ADCs.
    #[default]
    Cim,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOptions {
    pub numerics: Numerics,
    pub path: ComputePath,
    /// ADC resolution for the CIM path; `None` reads partial sums exactly.
    pub adc_bits: Option<u32>,
    pub array_rows: usize,
    pub array_cols: usize,
    /// Momentum coefficient; 0 gives plain SGD.
    pub beta: f64,
    pub lr: f64,
    /// Initial weights are uniform in `[-init_range, init_range]`.
    pub init_range: f64,
    pub c2c_mode: C2cMode,
    pub seed: u64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            numerics: Numerics::Quantized,
            path: ComputePath::Cim,
            adc_bits: Some(6),
            array_rows: 128,
            array_cols: 128,
            beta: 0.9,
            lr: 0.1,
            init_range: 0.5,
            c2c_mode: C2cMode::Aggregated,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightedLayer {
    pub geometry: ConvGeometry,
    pub is_fc: bool,
    /// Output scale applied after the array read.
    pub alpha: f64,
    pub array: SynapticArrayState,
    pub momentum: MomentumState,
    w_real: Vec<f64>,
    w_q: Option<QuantTensor>,
    w_codes: Vec<f64>,
    w_qvals: Vec<f64>,
    adc_fwd: Option<AdcModel>,
    adc_bwd: Option<AdcModel>,
    update_rng: ChaCha8Rng,
}

impl WeightedLayer {
    /// Current device weights.
    pub fn weights(&self) -> &[f64] {
        &self.w_real
    }
}

enum StageData {
    Weighted {
        x: Vec<f64>,
        xq: Option<QuantTensor>,
    },
    Relu {
        mask: Vec<bool>,
    },
    Pool {
        arg: Vec<usize>,
        in_len: usize,
    },
}

struct SampleResult {
    loss: f64,
    correct: bool,
    grads: Vec<Vec<f64>>,
    acts: Vec<QuantTensor>,
    errs: Vec<QuantTensor>,
}

#[derive(Debug, Clone)]
pub struct Network {
    topology: NetworkTopology,
    stages: Vec<ResolvedLayer>,
    layers: Vec<WeightedLayer>,
    map: WeightMap,
    p_max: u32,
    opts: EngineOptions,
}

/// `2^round(log2(2 sqrt(6 / fan_in)))`: keeps the effective initial weights
/// near the He-uniform scale with `init_range = 0.5`.
pub fn layer_scale(fan_in: usize) -> f64 {
    let target = 2.0 * (6.0 / fan_in as f64).sqrt();
    2f64.powi(target.log2().round() as i32)
}

impl Network {
    pub fn new(
        topology: &NetworkTopology,
        device: &DeviceSpec,
        opts: EngineOptions,
    ) -> Result<Self> {
        device.validate()?;
        let stages = topology.resolve()?;
        if !(opts.lr > 0.0) || !(0.0..1.0).contains(&opts.beta) {
            return Err(Error::validation(
                "lr/beta",
                "need lr > 0 and 0 <= beta < 1",
            ));
        }
        if !(opts.init_range > 0.0 && opts.init_range <= 1.0) {
            return Err(Error::validation("init_range", "must lie in (0, 1]"));
        }
        let (g_min, g_max) = conductance_bounds(device)?;
        let map = WeightMap::new(-1.0, 1.0, g_min, g_max)?;
        let mut layers = Vec::new();
        for s in &stages {
            let ResolvedLayer::Weighted {
                index,
                geometry: g,
                is_fc,
            } = *s
            else {
                continue;
            };
            let i = index as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(opts.seed, &[1, i]));
            let init: Vec<f64> = (0..g.weight_count())
                .map(|_| rng.random_range(-opts.init_range..=opts.init_range))
                .collect();
            let mut array = init_array(
                g.rows(),
                g.cols(),
                device,
                &map,
                &init,
                seed::derive(opts.seed, &[2, i]),
            )?;
            array.c2c_mode = opts.c2c_mode;
            layers.push(WeightedLayer {
                geometry: g,
                is_fc,
                alpha: layer_scale(g.rows()),
                array,
                momentum: MomentumState::new(g.weight_count(), opts.beta, opts.lr),
                w_real: Vec::new(),
                w_q: None,
                w_codes: Vec::new(),
                w_qvals: Vec::new(),
                adc_fwd: None,
                adc_bwd: None,
                update_rng: ChaCha8Rng::seed_from_u64(seed::derive(opts.seed, &[3, i])),
            });
        }
        let mut net = Network {
            topology: topology.clone(),
            stages,
            layers,
            map,
            p_max: device.p_max(),
            opts,
        };
        for i in 0..net.layers.len() {
            net.refresh(i);
        }
        Ok(net)
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn layers(&self) -> &[WeightedLayer] {
        &self.layers
    }

    pub fn options(&self) -> &EngineOptions {
        &self.opts
    }

    pub fn weight_map(&self) -> &WeightMap {
        &self.map
    }

    /// Changes the learning rate of every layer from the next update on.
    pub fn set_lr(&mut self, lr: f64) {
        self.opts.lr = lr;
        for l in &mut self.layers {
            l.momentum.lr = lr;
        }
    }

    /// Overwrites a layer's cell conductances with the given weights.
    pub fn set_layer_weights(&mut self, layer: usize, weights: &[f64]) -> Result<()> {
        let l = self
            .layers
            .get_mut(layer)
            .ok_or_else(|| Error::Topology(format!("no weighted layer {layer}")))?;
        if weights.len() != l.array.cells.len() {
            return Err(Error::Topology(format!(
                "layer {layer} holds {} weights, got {}",
                l.array.cells.len(),
                weights.len()
            )));
        }
        for (c, &w) in l.array.cells.iter_mut().zip(weights) {
            c.conductance = self.map.weight_to_conductance(w)?;
        }
        self.refresh(layer);
        Ok(())
    }

    fn refresh(&mut self, i: usize) {
        let bits = self.topology.bits.weight;
        let quantized = self.opts.numerics == Numerics::Quantized;
        let l = &mut self.layers[i];
        l.w_real = l.array.weights(&self.map);
        if quantized {
            let q = quantize_nearest(
                &l.w_real,
                &[l.geometry.rows(), l.geometry.cols()],
                bits,
                1.0,
            );
            l.w_codes = q.codes.iter().map(|&c| c as f64).collect();
            l.w_qvals = q.values();
            l.w_q = Some(q);
        }
    }

    fn fwd_setup<'a>(&self, l: &'a WeightedLayer) -> ReadSetup<'a> {
        ReadSetup {
            block: self.opts.array_rows,
            adc: l.adc_fwd.as_ref(),
        }
    }

    fn bwd_setup<'a>(&self, l: &'a WeightedLayer) -> ReadSetup<'a> {
        ReadSetup {
            block: self.opts.array_cols,
            adc: l.adc_bwd.as_ref(),
        }
    }

    fn quantize_act(&self, x: &[f64]) -> QuantTensor {
        quantize_nearest(
            x,
            &[x.len()],
            self.topology.bits.activation,
            pow2_range(max_abs(x)),
        )
    }

    fn quantize_err(&self, e: &[f64]) -> QuantTensor {
        quantize_nearest(
            e,
            &[e.len()],
            self.topology.bits.error,
            pow2_range(max_abs(e)),
        )
    }

    fn layer_forward(
        &self,
        l: &WeightedLayer,
        x: Vec<f64>,
        probe: Option<&mut PsumProbe>,
    ) -> (Vec<f64>, StageData) {
        let g = &l.geometry;
        let (mut y, data) = match self.opts.numerics {
            Numerics::Quantized => {
                let xq = self.quantize_act(&x);
                let wq = l.w_q.as_ref().expect("quantized weights cached");
                let y = match self.opts.path {
                    ComputePath::Direct => ops::conv_forward(g, &l.w_qvals, &xq.values()),
                    ComputePath::Cim => {
                        let op = Operand::Codes {
                            codes: &xq.codes,
                            bits: xq.bits,
                        };
                        let scale = wq.step * xq.step;
                        let mut y = mapped_forward(g, &l.w_codes, op, self.fwd_setup(l), probe);
                        y.iter_mut().for_each(|v| *v *= scale);
                        y
                    }
                };
                let xv = xq.values();
                (
                    y,
                    StageData::Weighted {
                        x: xv,
                        xq: Some(xq),
                    },
                )
            }
            Numerics::FullPrecision => {
                let y = match self.opts.path {
                    ComputePath::Direct => ops::conv_forward(g, &l.w_real, &x),
                    ComputePath::Cim => {
                        mapped_forward(g, &l.w_real, Operand::Real(&x), self.fwd_setup(l), probe)
                    }
                };
                (y, StageData::Weighted { x, xq: None })
            }
        };
        y.iter_mut().for_each(|v| *v *= l.alpha);
        (y, data)
    }

    fn forward_sample(
        &self,
        input: &[f64],
        mut probes: Option<&mut [PsumProbe]>,
    ) -> Result<(Vec<f64>, Vec<StageData>)> {
        if input.len() != self.topology.input_len() {
            return Err(Error::Topology(format!(
                "input has {} values, network expects {}",
                input.len(),
                self.topology.input_len()
            )));
        }
        let mut x = input.to_vec();
        let mut cache = Vec::with_capacity(self.stages.len());
        for s in &self.stages {
            match *s {
                ResolvedLayer::Weighted { index, .. } => {
                    let probe = probes.as_deref_mut().map(|p| &mut p[index]);
                    let (y, data) = self.layer_forward(&self.layers[index], x, probe);
                    cache.push(data);
                    x = y;
                }
                ResolvedLayer::Relu { .. } => {
                    let mask: Vec<bool> = x.iter().map(|v| *v > 0.0).collect();
                    ops::relu(&mut x);
                    cache.push(StageData::Relu { mask });
                }
                ResolvedLayer::MaxPool { size, in_shape, .. } => {
                    let (y, arg) = ops::max_pool(&x, in_shape, size);
                    cache.push(StageData::Pool {
                        arg,
                        in_len: x.len(),
                    });
                    x = y;
                }
            }
        }
        Ok((x, cache))
    }

    /// Logits for one sample.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_sample(input, None)?.0)
    }

    pub fn predict(&self, input: &[f64]) -> Result<usize> {
        Ok(ops::argmax(&self.forward(input)?))
    }

    pub fn loss(&self, input: &[f64], label: usize) -> Result<f64> {
        Ok(ops::cross_entropy(&self.forward(input)?, label).0)
    }

    /// Per-layer input errors given the error at the network output, walking
    /// the stages backwards. Also returns per-layer weight gradients.
    fn backward_sample(
        &self,
        cache: &[StageData],
        dlogits: Vec<f64>,
        mut probes: Option<&mut [PsumProbe]>,
        rng: &mut ChaCha8Rng,
    ) -> (Vec<Vec<f64>>, Vec<QuantTensor>) {
        let n = self.layers.len();
        let mut grads = vec![Vec::new(); n];
        let mut errs: Vec<Option<QuantTensor>> = vec![None; n];
        let quantized = self.opts.numerics == Numerics::Quantized;
        let mut e = dlogits;
        for (s, data) in self.stages.iter().zip(cache).rev() {
            match (s, data) {
                (
                    ResolvedLayer::Weighted {
                        index, geometry: g, ..
                    },
                    StageData::Weighted { x, .. },
                ) => {
                    let l = &self.layers[*index];
                    let eq = self.quantize_err(&e);
                    let e_used = if quantized {
                        eq.values()
                    } else {
                        std::mem::take(&mut e)
                    };
                    let mut grad = ops::conv_weight_grad(g, x, &e_used);
                    grad.iter_mut().for_each(|v| *v *= l.alpha);
                    if quantized {
                        let range = pow2_range(max_abs(&grad));
                        let q = quantize(
                            &grad,
                            &[grad.len()],
                            self.topology.bits.gradient,
                            range,
                            Rounding::Stochastic,
                            rng,
                        );
                        grad = q.values();
                    }
                    grads[*index] = grad;
                    if *index == 0 {
                        errs[0] = Some(eq);
                        break;
                    }
                    let probe = probes.as_deref_mut().map(|p| &mut p[*index]);
                    e = match (self.opts.numerics, self.opts.path) {
                        (Numerics::Quantized, ComputePath::Direct) => {
                            ops::conv_input_error(g, &l.w_qvals, &e_used)
                        }
                        (Numerics::Quantized, ComputePath::Cim) => {
                            let op = Operand::Codes {
                                codes: &eq.codes,
                                bits: eq.bits,
                            };
                            let scale =
                                l.w_q.as_ref().expect("quantized weights cached").step * eq.step;
                            let mut v =
                                mapped_input_error(g, &l.w_codes, op, self.bwd_setup(l), probe);
                            v.iter_mut().for_each(|v| *v *= scale);
                            v
                        }
                        (Numerics::FullPrecision, ComputePath::Direct) => {
                            ops::conv_input_error(g, &l.w_real, &e_used)
                        }
                        (Numerics::FullPrecision, ComputePath::Cim) => mapped_input_error(
                            g,
                            &l.w_real,
                            Operand::Real(&e_used),
                            self.bwd_setup(l),
                            probe,
                        ),
                    };
                    e.iter_mut().for_each(|v| *v *= l.alpha);
                    errs[*index] = Some(eq);
                }
                (ResolvedLayer::Relu { .. }, StageData::Relu { mask }) => {
                    for (v, m) in e.iter_mut().zip(mask) {
                        if !m {
                            *v = 0.0;
                        }
                    }
                }
                (ResolvedLayer::MaxPool { .. }, StageData::Pool { arg, in_len }) => {
                    e = ops::max_pool_backward(&e, arg, *in_len);
                }
                _ => unreachable!("cache out of step with stages"),
            }
        }
        (
            grads,
            errs.into_iter()
                .map(|e| e.expect("every layer visited"))
                .collect(),
        )
    }

    fn sample_step(&self, input: &[f64], label: usize, stream: u64) -> Result<SampleResult> {
        let (logits, cache) = self.forward_sample(input, None)?;
        let (loss, dlogits) = ops::cross_entropy(&logits, label);
        let correct = ops::argmax(&logits) == label;
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        let (grads, errs) = self.backward_sample(&cache, dlogits, None, &mut rng);
        let acts = cache
            .into_iter()
            .filter_map(|d| match d {
                StageData::Weighted { xq: Some(q), .. } => Some(q),
                StageData::Weighted { x, xq: None } => Some(self.quantize_act(&x)),
                _ => None,
            })
            .collect();
        Ok(SampleResult {
            loss,
            correct,
            grads,
            acts,
            errs,
        })
    }

    /// Loss and per-layer weight gradients for one sample, without updating.
    pub fn loss_and_gradients(&self, input: &[f64], label: usize) -> Result<(f64, Vec<Vec<f64>>)> {
        let r = self.sample_step(input, label, seed::derive(self.opts.seed, &[99]))?;
        Ok((r.loss, r.grads))
    }

    /// Profiles partial sums on `samples` with exact reads and places the
    /// ADC levels of every layer.
    pub fn calibrate_adc(&mut self, data: &Dataset, samples: &[usize]) -> Result<()> {
        let Some(bits) = self.opts.adc_bits else {
            return Ok(());
        };
        if self.opts.path != ComputePath::Cim {
            return Ok(());
        }
        for l in &mut self.layers {
            l.adc_fwd = None;
            l.adc_bwd = None;
        }
        let n = self.layers.len();
        let mut fwd: Vec<PsumProbe> = (0..n).map(|_| PsumProbe::new(200_000)).collect();
        let mut bwd: Vec<PsumProbe> = (0..n).map(|_| PsumProbe::new(200_000)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for &i in samples {
            let (logits, cache) = self.forward_sample(data.sample(i), Some(&mut fwd))?;
            let (_, dlogits) = ops::cross_entropy(&logits, data.labels[i]);
            self.backward_sample(&cache, dlogits, Some(&mut bwd), &mut rng);
        }
        for (l, (f, b)) in self.layers.iter_mut().zip(fwd.iter().zip(&bwd)) {
            l.adc_fwd = Some(AdcModel::calibrate(bits, &f.samples));
            l.adc_bwd = Some(AdcModel::calibrate(bits, &b.samples));
        }
        Ok(())
    }

    /// Trains one epoch (1-based `epoch`) and returns the trace of its last
    /// iteration. Samples beyond the last full batch are skipped.
    pub fn train_epoch(
        &mut self,
        data: &Dataset,
        batch_size: usize,
        epoch: usize,
    ) -> Result<EpochTrace> {
        if data.is_empty() {
            return Err(Error::Config("training set is empty".into()));
        }
        if batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if data.sample_len() != self.topology.input_len() || data.classes != self.topology.classes {
            return Err(Error::Config(format!(
                "dataset shape {:?} / {} classes does not match the network",
                data.shape, data.classes
            )));
        }
        let b = batch_size.min(data.len());
        let batches = data.len() / b;
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(self.opts.seed, &[10, epoch as u64]));
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        self.calibrate_adc(data, &order[..b])?;

        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        let mut trace_layers = Vec::new();
        for bi in 0..batches {
            let idx = &order[bi * b..(bi + 1) * b];
            let this = &*self;
            let results: Vec<SampleResult> = idx
                .par_iter()
                .enumerate()
                .map(|(k, &i)| {
                    let stream =
                        seed::derive(this.opts.seed, &[11, epoch as u64, bi as u64, k as u64]);
                    this.sample_step(data.sample(i), data.labels[i], stream)
                })
                .collect::<Result<_>>()?;
            let mut sums: Vec<Vec<f64>> = self
                .layers
                .iter()
                .map(|l| vec![0.0; l.w_real.len()])
                .collect();
            for r in &results {
                loss_sum += r.loss;
                correct += r.correct as usize;
                for (s, g) in sums.iter_mut().zip(&r.grads) {
                    for (a, v) in s.iter_mut().zip(g) {
                        *a += v;
                    }
                }
            }
            let last = bi + 1 == batches;
            let old: Vec<Vec<f64>> = if last {
                self.layers.iter().map(|l| l.w_real.clone()).collect()
            } else {
                Vec::new()
            };
            self.apply_gradients(&sums, b)?;
            if last {
                trace_layers = self.build_trace(&results, old);
            }
        }
        let seen = (batches * b) as f64;
        Ok(EpochTrace {
            epoch,
            layers: trace_layers,
            batch_size: b,
            batches,
            train_loss: loss_sum / seen,
            train_accuracy: correct as f64 / seen,
            accuracy: f64::NAN,
        })
    }

    /// Momentum step on the batch-mean gradient and the matching pulses.
    fn apply_gradients(&mut self, sums: &[Vec<f64>], batch: usize) -> Result<()> {
        let range = self.map.weight_range();
        for i in 0..self.layers.len() {
            let l = &mut self.layers[i];
            let g: Vec<f64> = sums[i].iter().map(|v| v / batch as f64).collect();
            let step = l.momentum.update(&g);
            let pulses: Vec<i64> = step
                .iter()
                .map(|s| pulses_for_delta(-s, range, self.p_max))
                .collect();
            l.array.apply_update(&pulses, &mut l.update_rng)?;
            self.refresh(i);
        }
        Ok(())
    }

    fn build_trace(&self, results: &[SampleResult], old: Vec<Vec<f64>>) -> Vec<LayerTrace> {
        let last = results.last().expect("non-empty batch");
        let n = results.len() as f64;
        self.layers
            .iter()
            .zip(old)
            .enumerate()
            .map(|(i, (l, old))| {
                let new = l.w_real.clone();
                let delta = new.iter().zip(&old).map(|(a, b)| a - b).collect();
                let act = results
                    .iter()
                    .map(|r| r.acts[i].ones_fraction())
                    .sum::<f64>()
                    / n;
                let err = results
                    .iter()
                    .map(|r| r.errs[i].ones_fraction())
                    .sum::<f64>()
                    / n;
                let g = l.array.conductances();
                LayerTrace {
                    layer: i,
                    geometry: l.geometry,
                    is_fc: l.is_fc,
                    activations: last.acts[i].clone(),
                    errors: last.errs[i].clone(),
                    act_ones_fraction: act,
                    err_ones_fraction: err,
                    old_weights: old,
                    new_weights: new,
                    delta_weights: delta,
                    mean_conductance: g.iter().sum::<f64>() / g.len() as f64,
                }
            })
            .collect()
    }

    /// Fraction of correctly classified samples.
    pub fn evaluate(&self, data: &Dataset) -> Result<f64> {
        if data.is_empty() {
            return Ok(0.0);
        }
        let correct = (0..data.len())
            .into_par_iter()
            .map(|i| Ok((self.predict(data.sample(i))? == data.labels[i]) as usize))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum::<usize>();
        Ok(correct as f64 / data.len() as f64)
    }
}
