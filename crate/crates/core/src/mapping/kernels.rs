use crate::error::{Error, Result};
use crate::net::LayerSpec;

/// A layer's weights split into one `D x N` matrix per kernel position.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmatrixMap {
    pub kernel: usize,
    pub rows: usize,
    pub cols: usize,
    /// Indexed by `kh * kernel + kw`, each row-major `rows x cols`.
    pub submatrices: Vec<Vec<f64>>,
}

impl SubmatrixMap {
    /// Inverse of [`map_kernels`]: the unrolled `(K*K*D) x N` weight matrix.
    pub fn reassemble(&self) -> Vec<f64> {
        self.submatrices.concat()
    }

    pub fn submatrix(&self, kh: usize, kw: usize) -> &[f64] {
        &self.submatrices[kh * self.kernel + kw]
    }
}

/// Splits unrolled weights (see `ConvGeometry`) into `K x K` submatrices.
/// Fully-connected layers produce a single matrix.
pub fn map_kernels(layer: &LayerSpec, weights: &[f64]) -> Result<SubmatrixMap> {
    let (kernel, rows, cols) = match *layer {
        LayerSpec::Conv {
            kernel,
            in_channels,
            out_channels,
            ..
        } => (kernel, in_channels, out_channels),
        LayerSpec::Fc { inputs, outputs } => (1, inputs, outputs),
        other => return Err(Error::Mapping(format!("{other:?} has no weights to map"))),
    };
    let block = rows * cols;
    if weights.len() != kernel * kernel * block {
        return Err(Error::Mapping(format!(
            "expected {} weights, got {}",
            kernel * kernel * block,
            weights.len()
        )));
    }
    Ok(SubmatrixMap {
        kernel,
        rows,
        cols,
        submatrices: weights.chunks_exact(block).map(<[f64]>::to_vec).collect(),
    })
}

/// One physical array's window onto a logical matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayTile {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionGrid {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub array_rows: usize,
    pub array_cols: usize,
    pub tiles: Vec<ArrayTile>,
}

impl PartitionGrid {
    pub fn arrays(&self) -> usize {
        self.tiles.len()
    }

    /// Fraction of the allocated cells holding matrix entries.
    pub fn utilization(&self) -> f64 {
        let used: usize = self.tiles.iter().map(|t| t.rows * t.cols).sum();
        used as f64 / (self.arrays() * self.array_rows * self.array_cols) as f64
    }
}

/// Cuts a `rows x cols` matrix into `array_rows x array_cols` pieces, with
/// partially-filled pieces along the bottom and right edges.
pub fn partition_matrix(
    rows: usize,
    cols: usize,
    array_rows: usize,
    array_cols: usize,
) -> PartitionGrid {
    assert!(rows > 0 && cols > 0 && array_rows > 0 && array_cols > 0);
    let grid_rows = rows.div_ceil(array_rows);
    let grid_cols = cols.div_ceil(array_cols);
    let mut tiles = Vec::with_capacity(grid_rows * grid_cols);
    for i in 0..grid_rows {
        for j in 0..grid_cols {
            let row0 = i * array_rows;
            let col0 = j * array_cols;
            tiles.push(ArrayTile {
                row0,
                col0,
                rows: array_rows.min(rows - row0),
                cols: array_cols.min(cols - col0),
            });
        }
    }
    PartitionGrid {
        grid_rows,
        grid_cols,
        array_rows,
        array_cols,
        tiles,
    }
}

/// Copies of a submatrix that fit along an array's rows.
pub fn compute_duplication(sub_rows: usize, array_rows: usize) -> usize {
    if sub_rows == 0 || sub_rows > array_rows {
        1
    } else {
        array_rows / sub_rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_submatrices_for_3x3() {
        let layer = LayerSpec::Conv {
            kernel: 3,
            in_channels: 64,
            out_channels: 128,
            stride: 1,
            padding: 1,
        };
        let w: Vec<f64> = (0..9 * 64 * 128).map(|i| i as f64).collect();
        let m = map_kernels(&layer, &w).unwrap();
        assert_eq!(m.submatrices.len(), 9);
        assert!(m.submatrices.iter().all(|s| s.len() == 64 * 128));
        assert_eq!(m.reassemble(), w);
        assert_eq!(m.submatrix(1, 0)[0], (3 * 64 * 128) as f64);
    }

    #[test]
    fn pooling_has_nothing_to_map() {
        assert!(matches!(
            map_kernels(&LayerSpec::MaxPool { size: 2 }, &[]),
            Err(Error::Mapping(_))
        ));
    }

    #[test]
    fn partition_counts() {
        let p = partition_matrix(256, 256, 128, 128);
        assert_eq!((p.grid_rows, p.grid_cols), (2, 2));
        assert_eq!(p.utilization(), 1.0);
        let p = partition_matrix(100, 100, 128, 128);
        assert_eq!(p.arrays(), 1);
        assert_eq!(p.utilization(), 10000.0 / 16384.0);
        let p = partition_matrix(130, 10, 128, 128);
        assert_eq!(p.tiles[1].rows, 2);
    }

    #[test]
    fn duplication_factors() {
        assert_eq!(compute_duplication(3, 128), 42);
        assert_eq!(compute_duplication(128, 128), 1);
        assert_eq!(compute_duplication(300, 128), 1);
    }
}
