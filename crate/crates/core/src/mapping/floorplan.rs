//! Greedy placement of mapped layers onto the chip / tile / PE / array
//! hierarchy.
//!
//! Layers are placed in topology order. Every layer gets its own arrays, PEs
//! and tiles; nothing is shared between layers, so unused cells in partly
//! filled arrays, PEs and tiles count against utilization.

use serde::{Deserialize, Serialize};

use super::kernels::{compute_duplication, partition_matrix};
use crate::error::{Error, Result};
use crate::net::{NetworkTopology, ResolvedLayer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyParams {
    pub array_rows: usize,
    pub array_cols: usize,
    #[serde(default = "default_arrays_per_pe")]
    pub arrays_per_pe: usize,
    #[serde(default = "default_pes_per_tile")]
    pub pes_per_tile: usize,
    /// Chip capacity; `None` sizes the chip to fit the network.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tiles: Option<usize>,
}

fn default_arrays_per_pe() -> usize {
    9
}

fn default_pes_per_tile() -> usize {
    4
}

impl Default for HierarchyParams {
    fn default() -> Self {
        HierarchyParams {
            array_rows: 128,
            array_cols: 128,
            arrays_per_pe: default_arrays_per_pe(),
            pes_per_tile: default_pes_per_tile(),
            max_tiles: None,
        }
    }
}

impl HierarchyParams {
    pub fn array_cells(&self) -> usize {
        self.array_rows * self.array_cols
    }

    pub fn tile_cells(&self) -> usize {
        self.array_cells() * self.arrays_per_pe * self.pes_per_tile
    }

    pub fn validate(&self) -> Result<()> {
        for (f, v) in [
            ("array_rows", self.array_rows),
            ("array_cols", self.array_cols),
            ("arrays_per_pe", self.arrays_per_pe),
            ("pes_per_tile", self.pes_per_tile),
        ] {
            if v == 0 {
                return Err(Error::validation(f, "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerPlacement {
    /// Index among weighted layers.
    pub layer: usize,
    pub submatrices: usize,
    /// Logical rows of one submatrix.
    pub sub_rows: usize,
    /// Physical columns of one submatrix (logical columns x cells per weight).
    pub sub_cols: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub arrays: usize,
    pub duplication: usize,
    pub pes: usize,
    pub tiles: usize,
    pub first_tile: usize,
    /// Cells holding weights, duplicates included.
    pub used_cells: usize,
    pub allocated_cells: usize,
}

impl LayerPlacement {
    pub fn utilization(&self) -> f64 {
        self.used_cells as f64 / self.allocated_cells as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Floorplan {
    pub params: HierarchyParams,
    pub cells_per_weight: usize,
    pub layers: Vec<LayerPlacement>,
    pub total_arrays: usize,
    pub total_pes: usize,
    pub total_tiles: usize,
    pub memory_utilization: f64,
}

impl Floorplan {
    pub fn total_cells(&self) -> usize {
        self.total_tiles * self.params.tile_cells()
    }
}

pub fn build_floorplan(
    net: &NetworkTopology,
    params: &HierarchyParams,
    cells_per_weight: usize,
) -> Result<Floorplan> {
    params.validate()?;
    let cpw = cells_per_weight.max(1);
    let mut layers = Vec::new();
    let mut tile_cursor = 0;
    for resolved in net.resolve()? {
        let ResolvedLayer::Weighted {
            index, geometry: g, ..
        } = resolved
        else {
            continue;
        };
        let sub_rows = g.in_channels;
        let sub_cols = g.out_channels * cpw;
        let submatrices = g.kernel * g.kernel;
        let grid = partition_matrix(sub_rows, sub_cols, params.array_rows, params.array_cols);
        let duplication = if grid.grid_rows == 1 {
            compute_duplication(sub_rows, params.array_rows)
        } else {
            1
        };
        let arrays = submatrices * grid.arrays();
        let pes = arrays.div_ceil(params.arrays_per_pe);
        let tiles = pes.div_ceil(params.pes_per_tile);
        let used_cells = submatrices * sub_rows * sub_cols * duplication;
        layers.push(LayerPlacement {
            layer: index,
            submatrices,
            sub_rows,
            sub_cols,
            grid_rows: grid.grid_rows,
            grid_cols: grid.grid_cols,
            arrays,
            duplication,
            pes,
            tiles,
            first_tile: tile_cursor,
            used_cells,
            allocated_cells: tiles * params.tile_cells(),
        });
        tile_cursor += tiles;
    }
    if let Some(max) = params.max_tiles {
        if tile_cursor > max {
            return Err(Error::Capacity(format!(
                "network needs {tile_cursor} tiles, chip has {max} (short by {})",
                tile_cursor - max
            )));
        }
    }
    let used: usize = layers.iter().map(|l| l.used_cells).sum();
    let total = tile_cursor * params.tile_cells();
    Ok(Floorplan {
        params: *params,
        cells_per_weight: cpw,
        total_arrays: layers.iter().map(|l| l.arrays).sum(),
        total_pes: layers.iter().map(|l| l.pes).sum(),
        total_tiles: tile_cursor,
        memory_utilization: used as f64 / total as f64,
        layers,
    })
}
