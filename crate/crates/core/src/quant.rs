//! Symmetric uniform fixed-point quantization.
//!
//! A `bits`-wide grid over `[-range, range]` has the levels
//! `k * range / L` for `k` in `-L..=L`, where `L = max(2^(bits-1) - 1, 1)`.
//! Zero and both endpoints are always on the grid. Ranges are usually chosen
//! as the power of two just above the tensor's largest magnitude.

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    #[default]
    Nearest,
    /// Rounds up with probability equal to the fractional part, so the
    /// expected value of the result equals the (clipped) input.
    Stochastic,
}

/// Largest positive integer code for a `bits`-wide symmetric grid.
pub fn max_code(bits: u32) -> i32 {
    let bits = bits.clamp(1, 31);
    ((1i64 << (bits - 1)) - 1).max(1) as i32
}

/// Number of magnitude bits in a code (the sign is carried separately).
pub fn magnitude_bits(bits: u32) -> u32 {
    bits.saturating_sub(1).max(1)
}

/// Smallest power of two `>= max_abs`; `1.0` for an all-zero tensor.
pub fn pow2_range(max_abs: f64) -> f64 {
    if !(max_abs > 0.0) || !max_abs.is_finite() {
        return 1.0;
    }
    2f64.powi(max_abs.log2().ceil() as i32)
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantTensor {
    pub codes: Vec<i32>,
    pub step: f64,
    pub bits: u32,
    pub shape: Vec<usize>,
}

impl QuantTensor {
    pub fn range(&self) -> f64 {
        self.step * max_code(self.bits) as f64
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.codes.iter().map(|&c| c as f64 * self.step).collect()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.codes[i] as f64 * self.step
    }

    /// One-bit count of the magnitude codes divided by the number of bits.
    pub fn ones_fraction(&self) -> f64 {
        if self.codes.is_empty() {
            return 0.0;
        }
        let mag = magnitude_bits(self.bits);
        let ones: u64 = self
            .codes
            .iter()
            .map(|c| c.unsigned_abs().count_ones() as u64)
            .sum();
        ones as f64 / (self.codes.len() as f64 * mag as f64)
    }
}

/// Snaps every element onto the grid. Inputs are clipped to `[-range, range]`.
pub fn quantize<R: Rng + ?Sized>(
    values: &[f64],
    shape: &[usize],
    bits: u32,
    range: f64,
    mode: Rounding,
    rng: &mut R,
) -> QuantTensor {
    snap(values, shape, bits, range, mode, || rng.random::<f64>())
}

fn snap(
    values: &[f64],
    shape: &[usize],
    bits: u32,
    range: f64,
    mode: Rounding,
    mut uniform: impl FnMut() -> f64,
) -> QuantTensor {
    let top = max_code(bits);
    let range = if range > 0.0 && range.is_finite() {
        range
    } else {
        1.0
    };
    let step = range / top as f64;
    let codes = values
        .iter()
        .map(|&v| {
            let x = v.clamp(-range, range) / step;
            let k = match mode {
                Rounding::Nearest => x.round(),
                Rounding::Stochastic => {
                    let lo = x.floor();
                    if uniform() < x - lo {
                        lo + 1.0
                    } else {
                        lo
                    }
                }
            };
            (k as i32).clamp(-top, top)
        })
        .collect();
    QuantTensor {
        codes,
        step,
        bits,
        shape: shape.to_vec(),
    }
}

/// Deterministic round-to-nearest quantization.
pub fn quantize_nearest(values: &[f64], shape: &[usize], bits: u32, range: f64) -> QuantTensor {
    snap(values, shape, bits, range, Rounding::Nearest, || 0.0)
}
