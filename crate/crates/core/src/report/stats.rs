use crate::quant::QuantTensor;

use super::trace::EpochTrace;

/// Fraction of one-bits in the magnitude codes of a quantized tensor.
pub fn input_activity(activations: &QuantTensor) -> f64 {
    activations.ones_fraction()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerDistribution {
    pub layer: usize,
    pub weight_mean: f64,
    pub weight_std: f64,
    pub delta_mean: f64,
    pub delta_std: f64,
    /// Elements of the layer input.
    pub activation_size: usize,
    pub weight_size: usize,
}

impl LayerDistribution {
    pub fn scale(&self) -> f64 {
        self.activation_size as f64 * self.weight_size as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSummary {
    pub layers: Vec<LayerDistribution>,
    /// Sum over layers of mean x activation size x weight size.
    pub normalized_weight_mean: f64,
    pub normalized_delta_mean: f64,
}

/// Population mean and standard deviation of the updated weights and of the
/// weight deltas, per layer.
pub fn distribution_summary(trace: &EpochTrace) -> DistributionSummary {
    let layers: Vec<LayerDistribution> = trace
        .layers
        .iter()
        .map(|l| {
            let (weight_mean, weight_std) = mean_std(&l.new_weights);
            let (delta_mean, delta_std) = mean_std(&l.delta_weights);
            LayerDistribution {
                layer: l.layer,
                weight_mean,
                weight_std,
                delta_mean,
                delta_std,
                activation_size: l.geometry.in_len(),
                weight_size: l.geometry.weight_count(),
            }
        })
        .collect();
    DistributionSummary {
        normalized_weight_mean: layers.iter().map(|l| l.weight_mean * l.scale()).sum(),
        normalized_delta_mean: layers.iter().map(|l| l.delta_mean * l.scale()).sum(),
        layers,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::ConvGeometry;
    use crate::quant::{quantize_nearest, QuantTensor};
    use crate::report::LayerTrace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn layer(i: usize, g: ConvGeometry, old: Vec<f64>, new: Vec<f64>) -> LayerTrace {
        let q = quantize_nearest(&[0.0], &[1], 8, 1.0);
        LayerTrace {
            layer: i,
            geometry: g,
            is_fc: false,
            activations: q.clone(),
            errors: q,
            act_ones_fraction: 0.0,
            err_ones_fraction: 0.0,
            delta_weights: new.iter().zip(&old).map(|(n, o)| n - o).collect(),
            old_weights: old,
            new_weights: new,
            mean_conductance: 0.0,
        }
    }

    fn trace(layers: Vec<LayerTrace>) -> EpochTrace {
        EpochTrace {
            epoch: 1,
            layers,
            batch_size: 1,
            batches: 1,
            train_loss: 0.0,
            train_accuracy: 0.0,
            accuracy: 0.0,
        }
    }

    #[test]
    fn activity_extremes() {
        let zero = quantize_nearest(&[0.0; 16], &[16], 8, 1.0);
        assert_eq!(input_activity(&zero), 0.0);
        let full = quantize_nearest(&[1.0; 16], &[16], 8, 1.0);
        assert_eq!(input_activity(&full), 1.0);
    }

    #[test]
    fn activity_of_uniform_codes_is_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let codes: Vec<i32> = (0..1_000_000).map(|_| rng.random_range(0..128)).collect();
        let t = QuantTensor { shape: vec![codes.len()], codes, step: 1.0 / 127.0, bits: 8 };
        assert!((input_activity(&t) - 0.5).abs() < 0.01);
    }

    #[test]
    fn activity_matches_bit_enumeration() {
        // Every 4-bit code once: count magnitude bits by hand.
        let codes: Vec<i32> = (-7..=7).collect();
        let mut ones = 0;
        for c in &codes {
            for b in 0..3 {
                ones += (c.unsigned_abs() >> b) & 1;
            }
        }
        let t = QuantTensor { shape: vec![15], codes, step: 1.0, bits: 4 };
        assert_eq!(input_activity(&t), ones as f64 / 45.0);
    }

    #[test]
    fn constant_and_converged_layers() {
        let g = ConvGeometry::fc(2, 2).unwrap();
        let s = distribution_summary(&trace(vec![layer(0, g, vec![0.25; 4], vec![0.25; 4])]));
        let l = &s.layers[0];
        assert_eq!((l.weight_mean, l.weight_std, l.delta_mean, l.delta_std), (0.25, 0.0, 0.0, 0.0));
    }

    #[test]
    fn normalized_mean_by_hand() {
        let a = ConvGeometry::fc(2, 1).unwrap();
        let b = ConvGeometry::fc(1, 3).unwrap();
        let t = trace(vec![
            layer(0, a, vec![0.0, 0.0], vec![0.5, 0.1]),
            layer(1, b, vec![0.0; 3], vec![-0.3, 0.0, 0.0]),
        ]);
        let s = distribution_summary(&t);
        // Layer 0: mean 0.3, input 2, weights 2. Layer 1: mean -0.1, input 1, weights 3.
        assert!((s.normalized_weight_mean - (0.3 * 4.0 - 0.1 * 3.0)).abs() < 1e-12);
        assert!((s.layers[0].weight_std - 0.2).abs() < 1e-12);
    }
}
