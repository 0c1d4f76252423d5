//! Low-precision CNN training through synaptic arrays.

mod adc;
mod dataset;
mod engine;
mod momentum;
pub mod ops;
mod topology;

pub use adc::{AdcModel, PsumProbe};
pub use dataset::{Dataset, SyntheticTask};
pub use engine::{layer_scale, ComputePath, EngineOptions, Network, Numerics, WeightedLayer};
pub use momentum::MomentumState;
pub use topology::{BitWidths, ConvGeometry, LayerSpec, NetworkTopology, ResolvedLayer};

/// Mini-batch schedule of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchSchedule {
    pub batch_size: usize,
    pub epochs: usize,
    pub batches_per_epoch: usize,
}
