//! Layer computations carried out the way the arrays see them: per kernel
//! position submatrices, array-sized input blocks, bit-serial inputs with a
//! positive and a negative phase, one ADC conversion per output line per
//! cycle, and digital shift-add across cycles.

use crate::device::SynapticArrayState;
use crate::error::{Error, Result};
use crate::net::{AdcModel, ConvGeometry, PsumProbe};
use crate::quant::magnitude_bits;

/// Input vector applied to the array lines.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    /// Analog single-shot read.
    Real(&'a [f64]),
    /// Sign-magnitude integer codes applied one magnitude bit per cycle.
    /// Results are in code units; the caller applies the step size.
    Codes { codes: &'a [i32], bits: u32 },
}

impl Operand<'_> {
    fn len(&self) -> usize {
        match self {
            Operand::Real(v) => v.len(),
            Operand::Codes { codes, .. } => codes.len(),
        }
    }
}

#[derive(Clone, Copy)]
enum Line {
    Real(f64),
    Code(i32),
}

/// Read-out settings shared by every array of a layer.
#[derive(Debug, Clone, Copy)]
pub struct ReadSetup<'a> {
    /// Lines driven at once: array rows for forward reads, array columns for
    /// transposed reads.
    pub block: usize,
    pub adc: Option<&'a AdcModel>,
}

struct Reader<'a, 'p> {
    setup: ReadSetup<'a>,
    mag_bits: u32,
    probe: Option<&'p mut PsumProbe>,
    psum: Vec<f64>,
}

impl Reader<'_, '_> {
    #[inline]
    fn convert(&mut self, v: f64) -> f64 {
        if let Some(p) = self.probe.as_deref_mut() {
            p.push(v);
        }
        match self.setup.adc {
            Some(adc) => adc.convert(v),
            None => v,
        }
    }

    /// Drives `lines` (matrix row, input) into columns `[col0, col0 + n)` of
    /// a row-major matrix with leading dimension `ld`, adding the converted
    /// results into `out`.
    fn read(
        &mut self,
        mat: &[f64],
        ld: usize,
        col0: usize,
        lines: &[(usize, Line)],
        out: &mut [f64],
    ) {
        let n = out.len();
        self.psum.resize(n, 0.0);
        let analog = matches!(lines.first(), Some((_, Line::Real(_))));
        if analog {
            self.psum.iter_mut().for_each(|p| *p = 0.0);
            for &(r, v) in lines {
                let Line::Real(x) = v else { unreachable!() };
                let row = &mat[r * ld + col0..r * ld + col0 + n];
                for (p, w) in self.psum.iter_mut().zip(row) {
                    *p += w * x;
                }
            }
            for j in 0..n {
                let q = self.convert(self.psum[j]);
                out[j] += q;
            }
            return;
        }
        for sign in [1i32, -1] {
            for b in 0..self.mag_bits {
                let mut active = false;
                self.psum.iter_mut().for_each(|p| *p = 0.0);
                for &(r, v) in lines {
                    let Line::Code(c) = v else { unreachable!() };
                    if c.signum() != sign || (c.unsigned_abs() >> b) & 1 == 0 {
                        continue;
                    }
                    active = true;
                    let row = &mat[r * ld + col0..r * ld + col0 + n];
                    for (p, w) in self.psum.iter_mut().zip(row) {
                        *p += w;
                    }
                }
                if !active {
                    continue;
                }
                let scale = sign as f64 * (1u64 << b) as f64;
                for j in 0..n {
                    let q = self.convert(self.psum[j]);
                    out[j] += scale * q;
                }
            }
        }
    }
}

fn line_at(op: &Operand, i: usize) -> Option<Line> {
    match op {
        Operand::Real(v) => (v[i] != 0.0).then_some(Line::Real(v[i])),
        Operand::Codes { codes, .. } => (codes[i] != 0).then_some(Line::Code(codes[i])),
    }
}

fn mag_bits(op: &Operand) -> u32 {
    match op {
        Operand::Real(_) => 0,
        Operand::Codes { bits, .. } => magnitude_bits(*bits),
    }
}

/// Forward pass of a layer through its mapped arrays. `weights` is the
/// unrolled `(K*K*D) x N` matrix in whatever units the cells hold.
pub fn mapped_forward(
    g: &ConvGeometry,
    weights: &[f64],
    input: Operand,
    setup: ReadSetup,
    probe: Option<&mut PsumProbe>,
) -> Vec<f64> {
    assert_eq!(input.len(), g.in_len());
    assert_eq!(weights.len(), g.weight_count());
    let n_out = g.cols();
    let plane = g.in_h * g.in_w;
    let positions = g.out_positions();
    let mut reader = Reader {
        setup,
        mag_bits: mag_bits(&input),
        probe,
        psum: Vec::new(),
    };
    let block = setup.block.max(1);
    let mut out = vec![0.0; g.out_len()];
    let mut acc = vec![0.0; n_out];
    let mut lines = Vec::with_capacity(block);
    for oh in 0..g.out_h {
        for ow in 0..g.out_w {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for kh in 0..g.kernel {
                for kw in 0..g.kernel {
                    let Some((y, x)) = g.input_coord(oh, ow, kh, kw) else {
                        continue;
                    };
                    for d0 in (0..g.in_channels).step_by(block) {
                        lines.clear();
                        for d in d0..(d0 + block).min(g.in_channels) {
                            if let Some(l) = line_at(&input, d * plane + y * g.in_w + x) {
                                lines.push((g.row_index(kh, kw, d), l));
                            }
                        }
                        if !lines.is_empty() {
                            reader.read(weights, n_out, 0, &lines, &mut acc);
                        }
                    }
                }
            }
            let pos = oh * g.out_w + ow;
            for (n, a) in acc.iter().enumerate() {
                out[n * positions + pos] = *a;
            }
        }
    }
    out
}

fn transpose(m: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut t = vec![0.0; m.len()];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = m[r * cols + c];
        }
    }
    t
}

/// Error propagated to a layer's input through transposed reads: the output
/// error drives the array columns and each row is read back.
pub fn mapped_input_error(
    g: &ConvGeometry,
    weights: &[f64],
    out_err: Operand,
    setup: ReadSetup,
    probe: Option<&mut PsumProbe>,
) -> Vec<f64> {
    assert_eq!(out_err.len(), g.out_len());
    let rows = g.rows();
    let n_out = g.cols();
    let wt = transpose(weights, rows, n_out);
    let plane = g.in_h * g.in_w;
    let positions = g.out_positions();
    let mut reader = Reader {
        setup,
        mag_bits: mag_bits(&out_err),
        probe,
        psum: Vec::new(),
    };
    let block = setup.block.max(1);
    let mut dx = vec![0.0; g.in_len()];
    let mut part = vec![0.0; g.in_channels];
    let mut lines = Vec::with_capacity(block);
    for oh in 0..g.out_h {
        for ow in 0..g.out_w {
            let pos = oh * g.out_w + ow;
            for kh in 0..g.kernel {
                for kw in 0..g.kernel {
                    let Some((y, x)) = g.input_coord(oh, ow, kh, kw) else {
                        continue;
                    };
                    part.iter_mut().for_each(|p| *p = 0.0);
                    let col0 = g.row_index(kh, kw, 0);
                    for n0 in (0..n_out).step_by(block) {
                        lines.clear();
                        for n in n0..(n0 + block).min(n_out) {
                            if let Some(l) = line_at(&out_err, n * positions + pos) {
                                lines.push((n, l));
                            }
                        }
                        if !lines.is_empty() {
                            reader.read(&wt, rows, col0, &lines, &mut part);
                        }
                    }
                    for (d, p) in part.iter().enumerate() {
                        dx[d * plane + y * g.in_w + x] += p;
                    }
                }
            }
        }
    }
    dx
}

/// `out[c] = sum_r G[r, c] v[r]`: inputs on the rows, sums on the columns.
pub fn forward_read(array: &SynapticArrayState, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != array.rows {
        return Err(Error::Mapping(format!(
            "input has {} entries for {} rows",
            v.len(),
            array.rows
        )));
    }
    let mut out = vec![0.0; array.cols];
    for (r, x) in v.iter().enumerate() {
        for (c, o) in out.iter_mut().enumerate() {
            *o += array.cell(r, c).conductance * x;
        }
    }
    Ok(out)
}

/// `out[r] = sum_c G[r, c] v[c]`: inputs on the columns, sums on the rows.
pub fn transposed_read(array: &SynapticArrayState, v: &[f64]) -> Result<Vec<f64>> {
    if !array.transposable {
        return Err(Error::Capability(
            "array does not support transposed reads".into(),
        ));
    }
    if v.len() != array.cols {
        return Err(Error::Mapping(format!(
            "input has {} entries for {} columns",
            v.len(),
            array.cols
        )));
    }
    Ok((0..array.rows)
        .map(|r| {
            (0..array.cols)
                .map(|c| array.cell(r, c).conductance * v[c])
                .sum()
        })
        .collect())
}

/// SRAM compute-in-memory unit used for weight gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SramCimSpec {
    pub array_rows: usize,
    pub array_cols: usize,
    pub arrays: usize,
    /// One SRAM cell per bit of each stored error.
    pub error_bits: u32,
}

impl SramCimSpec {
    pub fn capacity_cells(&self) -> usize {
        self.array_rows * self.array_cols * self.arrays
    }

    /// Smallest unit that holds the unrolled error of every layer.
    pub fn sized_for(
        geometries: &[ConvGeometry],
        array_rows: usize,
        array_cols: usize,
        error_bits: u32,
    ) -> Self {
        let need = geometries
            .iter()
            .map(|g| g.out_positions() * g.out_channels * error_bits as usize)
            .max()
            .unwrap_or(0);
        SramCimSpec {
            array_rows,
            array_cols,
            arrays: need.div_ceil(array_rows * array_cols).max(1),
            error_bits,
        }
    }
}

/// The output error of a layer stored as one column per error channel, plus
/// the sequence of shifted activation vectors applied to it.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMatrixPlan {
    /// Spatial size of the error map (column length).
    pub error_rows: usize,
    /// Channels of the error map (one column each).
    pub error_channels: usize,
    /// Row-major `error_rows x error_channels`.
    pub error_matrix: Vec<f64>,
    /// `(kh, kw, activation channel)` for each applied vector.
    pub schedule: Vec<(usize, usize, usize)>,
    /// Copies of the error matrix the SRAM unit holds at once.
    pub duplication: usize,
    pub sram_rows: usize,
}

pub fn unroll_gradient_matrices(
    out_err: &[f64],
    g: &ConvGeometry,
    sram: &SramCimSpec,
) -> Result<GradientMatrixPlan> {
    if out_err.len() != g.out_len() {
        return Err(Error::Mapping(format!(
            "error has {} entries, layer output has {}",
            out_err.len(),
            g.out_len()
        )));
    }
    let rows = g.out_positions();
    let chans = g.out_channels;
    let need = rows * chans * sram.error_bits as usize;
    let cap = sram.capacity_cells();
    if need > cap {
        return Err(Error::Capacity(format!(
            "unrolled error needs {need} SRAM cells, unit holds {cap} (short by {})",
            need - cap
        )));
    }
    let mut m = vec![0.0; rows * chans];
    for n in 0..chans {
        for p in 0..rows {
            m[p * chans + n] = out_err[n * rows + p];
        }
    }
    let mut schedule = Vec::with_capacity(g.kernel * g.kernel * g.in_channels);
    for kh in 0..g.kernel {
        for kw in 0..g.kernel {
            for d in 0..g.in_channels {
                schedule.push((kh, kw, d));
            }
        }
    }
    Ok(GradientMatrixPlan {
        error_rows: rows,
        error_channels: chans,
        error_matrix: m,
        schedule,
        duplication: (cap / need.max(1)).max(1),
        sram_rows: sram.array_rows,
    })
}

impl GradientMatrixPlan {
    /// Weight gradient obtained by applying each scheduled activation vector
    /// to the stored error matrix, in array-row-sized blocks whose partial
    /// results are summed digitally.
    pub fn weight_gradient(&self, g: &ConvGeometry, input: &[f64]) -> Vec<f64> {
        let chans = self.error_channels;
        let plane = g.in_h * g.in_w;
        let mut grad = vec![0.0; g.weight_count()];
        let mut act = vec![0.0; self.error_rows];
        let mut part = vec![0.0; chans];
        for &(kh, kw, d) in &self.schedule {
            for oh in 0..g.out_h {
                for ow in 0..g.out_w {
                    act[oh * g.out_w + ow] = match g.input_coord(oh, ow, kh, kw) {
                        Some((y, x)) => input[d * plane + y * g.in_w + x],
                        None => 0.0,
                    };
                }
            }
            let row = g.row_index(kh, kw, d) * chans;
            for p0 in (0..self.error_rows).step_by(self.sram_rows.max(1)) {
                part.iter_mut().for_each(|v| *v = 0.0);
                for p in p0..(p0 + self.sram_rows).min(self.error_rows) {
                    let a = act[p];
                    if a == 0.0 {
                        continue;
                    }
                    for (v, e) in part
                        .iter_mut()
                        .zip(&self.error_matrix[p * chans..(p + 1) * chans])
                    {
                        *v += a * e;
                    }
                }
                for (gw, v) in grad[row..row + chans].iter_mut().zip(&part) {
                    *gw += v;
                }
            }
        }
        grad
    }
}
