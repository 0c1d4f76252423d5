//! Direct (bypass) tensor operations on `(C, H, W)` row-major buffers.
//!
//! These compute exact convolutions with the unrolled weight layout of
//! [`ConvGeometry`] and double as the oracles for the mapped-array path.

use super::topology::ConvGeometry;

/// `out[n, oh, ow] = sum_{kh, kw, d} W[row(kh, kw, d), n] * x[d, ih, iw]`.
pub fn conv_forward(g: &ConvGeometry, weights: &[f64], input: &[f64]) -> Vec<f64> {
    debug_assert_eq!(weights.len(), g.weight_count());
    debug_assert_eq!(input.len(), g.in_len());
    let n_out = g.cols();
    let plane = g.in_h * g.in_w;
    let positions = g.out_positions();
    let mut out = vec![0.0; g.out_len()];
    let mut acc = vec![0.0; n_out];
    for oh in 0..g.out_h {
        for ow in 0..g.out_w {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for kh in 0..g.kernel {
                for kw in 0..g.kernel {
                    let Some((y, x)) = g.input_coord(oh, ow, kh, kw) else {
                        continue;
                    };
                    for d in 0..g.in_channels {
                        let v = input[d * plane + y * g.in_w + x];
                        if v == 0.0 {
                            continue;
                        }
                        let row = g.row_index(kh, kw, d) * n_out;
                        for (a, w) in acc.iter_mut().zip(&weights[row..row + n_out]) {
                            *a += w * v;
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

/// Error at the layer input given the error at its output (transposed
/// convolution).
pub fn conv_input_error(g: &ConvGeometry, weights: &[f64], out_err: &[f64]) -> Vec<f64> {
    debug_assert_eq!(out_err.len(), g.out_len());
    let n_out = g.cols();
    let plane = g.in_h * g.in_w;
    let positions = g.out_positions();
    let mut dx = vec![0.0; g.in_len()];
    let mut e = vec![0.0; n_out];
    for oh in 0..g.out_h {
        for ow in 0..g.out_w {
            let pos = oh * g.out_w + ow;
            let mut any = false;
            for (n, v) in e.iter_mut().enumerate() {
                *v = out_err[n * positions + pos];
                any |= *v != 0.0;
            }
            if !any {
                continue;
            }
            for kh in 0..g.kernel {
                for kw in 0..g.kernel {
                    let Some((y, x)) = g.input_coord(oh, ow, kh, kw) else {
                        continue;
                    };
                    for d in 0..g.in_channels {
                        let row = g.row_index(kh, kw, d) * n_out;
                        let s: f64 = weights[row..row + n_out]
                            .iter()
                            .zip(&e)
                            .map(|(w, v)| w * v)
                            .sum();
                        dx[d * plane + y * g.in_w + x] += s;
                    }
                }
            }
        }
    }
    dx
}

/// `dW[row(kh, kw, d), n] = sum_{oh, ow} x[d, ih, iw] * e[n, oh, ow]`.
pub fn conv_weight_grad(g: &ConvGeometry, input: &[f64], out_err: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; g.weight_count()];
    accumulate_weight_grad(g, input, out_err, &mut grad);
    grad
}

/// Adds this sample's weight gradient into `grad`.
pub fn accumulate_weight_grad(g: &ConvGeometry, input: &[f64], out_err: &[f64], grad: &mut [f64]) {
    debug_assert_eq!(grad.len(), g.weight_count());
    let n_out = g.cols();
    let plane = g.in_h * g.in_w;
    let positions = g.out_positions();
    let mut e = vec![0.0; n_out];
    for oh in 0..g.out_h {
        for ow in 0..g.out_w {
            let pos = oh * g.out_w + ow;
            let mut any = false;
            for (n, v) in e.iter_mut().enumerate() {
                *v = out_err[n * positions + pos];
                any |= *v != 0.0;
            }
            if !any {
                continue;
            }
            for kh in 0..g.kernel {
                for kw in 0..g.kernel {
                    let Some((y, x)) = g.input_coord(oh, ow, kh, kw) else {
                        continue;
                    };
                    for d in 0..g.in_channels {
                        let a = input[d * plane + y * g.in_w + x];
                        if a == 0.0 {
                            continue;
                        }
                        let row = g.row_index(kh, kw, d) * n_out;
                        for (gw, v) in grad[row..row + n_out].iter_mut().zip(&e) {
                            *gw += a * v;
                        }
                    }
                }
            }
        }
    }
}

pub fn relu(x: &mut [f64]) {
    for v in x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Max pooling with a `size x size` window and equal stride. Returns the
/// pooled tensor and, per output, the flat index of the selected input.
pub fn max_pool(
    input: &[f64],
    (c, h, w): (usize, usize, usize),
    size: usize,
) -> (Vec<f64>, Vec<usize>) {
    let (oh, ow) = (h / size, w / size);
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut arg = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for y in 0..oh {
            for x in 0..ow {
                let mut best = usize::MAX;
                let mut best_v = f64::NEG_INFINITY;
                for dy in 0..size {
                    for dx in 0..size {
                        let i = ch * h * w + (y * size + dy) * w + x * size + dx;
                        if input[i] > best_v {
                            best_v = input[i];
                            best = i;
                        }
                    }
                }
                out.push(best_v);
                arg.push(best);
            }
        }
    }
    (out, arg)
}

/// Routes pooled errors back to the selected inputs.
pub fn max_pool_backward(out_err: &[f64], argmax: &[usize], in_len: usize) -> Vec<f64> {
    let mut dx = vec![0.0; in_len];
    for (e, &i) in out_err.iter().zip(argmax) {
        dx[i] += e;
    }
    dx
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Cross-entropy loss and its gradient with respect to the logits.
pub fn cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let mut p = softmax(logits);
    let loss = -p[label].max(1e-300).ln();
    p[label] -= 1.0;
    (loss, p)
}

pub fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if *v > x[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Textbook 7-loop convolution over a `[n][d][kh][kw]` kernel.
    fn naive_conv(g: &ConvGeometry, kern: &[f64], x: &[f64]) -> Vec<f64> {
        let k = g.kernel;
        let mut out = vec![0.0; g.out_len()];
        for n in 0..g.out_channels {
            for oh in 0..g.out_h {
                for ow in 0..g.out_w {
                    let mut s = 0.0;
                    for d in 0..g.in_channels {
                        for kh in 0..k {
                            for kw in 0..k {
                                let y = (oh * g.stride + kh) as isize - g.padding as isize;
                                let xx = (ow * g.stride + kw) as isize - g.padding as isize;
                                if y < 0 || xx < 0 || y >= g.in_h as isize || xx >= g.in_w as isize
                                {
                                    continue;
                                }
                                let xi = d * g.in_h * g.in_w + y as usize * g.in_w + xx as usize;
                                s += kern[((n * g.in_channels + d) * k + kh) * k + kw] * x[xi];
                            }
                        }
                    }
                    out[(n * g.out_h + oh) * g.out_w + ow] = s;
                }
            }
        }
        out
    }

    fn unroll(g: &ConvGeometry, kern: &[f64]) -> Vec<f64> {
        let k = g.kernel;
        let mut w = vec![0.0; g.weight_count()];
        for n in 0..g.out_channels {
            for d in 0..g.in_channels {
                for kh in 0..k {
                    for kw in 0..k {
                        w[g.row_index(kh, kw, d) * g.cols() + n] =
                            kern[((n * g.in_channels + d) * k + kh) * k + kw];
                    }
                }
            }
        }
        w
    }

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn forward_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (stride, pad) in [(1, 0), (1, 1), (2, 1)] {
            let g = ConvGeometry::conv(3, 4, 8, 7, 6, stride, pad).unwrap();
            let kern = rand_vec(&mut rng, g.weight_count());
            let x = rand_vec(&mut rng, g.in_len());
            let a = conv_forward(&g, &unroll(&g, &kern), &x);
            let b = naive_conv(&g, &kern, &x);
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_1x1() {
        let g = ConvGeometry::conv(1, 1, 1, 3, 3, 1, 0).unwrap();
        let x: Vec<f64> = (0..9).map(|i| i as f64).collect();
        assert_eq!(conv_forward(&g, &[1.0], &x), x);
    }

    #[test]
    fn backward_is_adjoint_of_forward() {
        // <conv(x), e> = <x, conv^T(e)> and <conv(x), e> = <W, dW>
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = ConvGeometry::conv(3, 3, 5, 6, 6, 2, 1).unwrap();
        let w = rand_vec(&mut rng, g.weight_count());
        let x = rand_vec(&mut rng, g.in_len());
        let e = rand_vec(&mut rng, g.out_len());
        let y = conv_forward(&g, &w, &x);
        let lhs: f64 = y.iter().zip(&e).map(|(a, b)| a * b).sum();
        let dx = conv_input_error(&g, &w, &e);
        let rhs: f64 = x.iter().zip(&dx).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10);
        let dw = conv_weight_grad(&g, &x, &e);
        let rhs2: f64 = w.iter().zip(&dw).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs2).abs() < 1e-10);
    }

    #[test]
    fn one_by_one_gradient_by_hand() {
        let g = ConvGeometry::conv(1, 1, 1, 2, 2, 1, 0).unwrap();
        let dw = conv_weight_grad(&g, &[1.0, 2.0, 3.0, 4.0], &[0.5, -1.0, 2.0, 0.25]);
        assert_eq!(dw, vec![0.5 - 2.0 + 6.0 + 1.0]);
        assert_eq!(conv_weight_grad(&g, &[1.0; 4], &[0.0; 4]), vec![0.0]);
    }

    #[test]
    fn pool_routes_errors() {
        let x = [1.0, 5.0, 2.0, 0.0, 3.0, 4.0, 9.0, 8.0];
        let (y, arg) = max_pool(&x, (2, 2, 2), 2);
        assert_eq!(y, vec![5.0, 9.0]);
        let dx = max_pool_backward(&[1.0, 2.0], &arg, 8);
        assert_eq!(dx, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn cross_entropy_gradient_sums_to_zero() {
        let (loss, g) = cross_entropy(&[1.0, 2.0, 0.5], 1);
        assert!(loss > 0.0);
        assert!(g.iter().sum::<f64>().abs() < 1e-12);
        assert!(g[1] < 0.0);
    }
}
