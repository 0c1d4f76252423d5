//! Placement of network weights onto arrays and the array-level views of the
//! three training computations.

mod cim;
mod floorplan;
mod kernels;

pub use cim::{
    forward_read, mapped_forward, mapped_input_error, transposed_read, unroll_gradient_matrices,
    GradientMatrixPlan, Operand, ReadSetup, SramCimSpec,
};
pub use floorplan::{build_floorplan, Floorplan, HierarchyParams, LayerPlacement};
pub use kernels::{
    compute_duplication, map_kernels, partition_matrix, ArrayTile, PartitionGrid, SubmatrixMap,
};
