use crate::net::ConvGeometry;
use crate::quant::QuantTensor;

/// What one weighted layer looked like in the last iteration of an epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    pub layer: usize,
    pub geometry: ConvGeometry,
    pub is_fc: bool,
    /// Layer input of the last sample, on the activation grid.
    pub activations: QuantTensor,
    /// Error at the layer output of the last sample, on the error grid.
    pub errors: QuantTensor,
    /// Ones-fraction of the binarized activations, averaged over the batch.
    pub act_ones_fraction: f64,
    /// Ones-fraction of the binarized errors, averaged over the batch.
    pub err_ones_fraction: f64,
    pub old_weights: Vec<f64>,
    pub new_weights: Vec<f64>,
    pub delta_weights: Vec<f64>,
    /// Mean cell conductance after the update (siemens).
    pub mean_conductance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochTrace {
    /// 1-based.
    pub epoch: usize,
    pub layers: Vec<LayerTrace>,
    pub batch_size: usize,
    pub batches: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    /// Held-out accuracy, filled in by the caller after evaluation.
    pub accuracy: f64,
}

impl EpochTrace {
    /// Checks the trace invariants: fractions in `[0, 1]` and
    /// `delta = new - old`.
    pub fn check(&self) -> crate::Result<()> {
        use crate::Error;
        for l in &self.layers {
            for (name, f) in [
                ("activation", l.act_ones_fraction),
                ("error", l.err_ones_fraction),
            ] {
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::Trace(format!(
                        "layer {}: {name} ones-fraction {f} outside [0, 1]",
                        l.layer
                    )));
                }
            }
            let n = l.geometry.weight_count();
            if l.old_weights.len() != n || l.new_weights.len() != n || l.delta_weights.len() != n {
                return Err(Error::Trace(format!(
                    "layer {}: weight snapshots have wrong size",
                    l.layer
                )));
            }
            for i in 0..n {
                if l.delta_weights[i] != l.new_weights[i] - l.old_weights[i] {
                    return Err(Error::Trace(format!(
                        "layer {}: delta != new - old at {i}",
                        l.layer
                    )));
                }
            }
        }
        Ok(())
    }
}
