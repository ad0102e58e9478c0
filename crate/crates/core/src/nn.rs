//! Scalar nonlinearities and tensor-backed vector ops shared by the
//! synthesizer and vocoder, all written for exact hand-derived backprop.

use crate::tensor::Tensor;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `w * x` for a rank-2 tensor `w` of dims [out, in].
pub fn matvec(w: &Tensor, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(w.dims.len(), 2);
    let (out, inp) = (w.dims[0], w.dims[1]);
    debug_assert_eq!(inp, x.len());
    let mut y = vec![0.0; out];
    for i in 0..out {
        y[i] = crate::linalg::dot(&w.data[i * inp..(i + 1) * inp], x);
    }
    y
}

/// `w^T * y` for a rank-2 tensor `w` of dims [out, in].
pub fn matvec_transpose(w: &Tensor, y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(w.dims.len(), 2);
    let (out, inp) = (w.dims[0], w.dims[1]);
    debug_assert_eq!(out, y.len());
    let mut x = vec![0.0; inp];
    for i in 0..out {
        let yi = y[i];
        if yi == 0.0 {
            continue;
        }
        let row = &w.data[i * inp..(i + 1) * inp];
        for (xj, &wij) in x.iter_mut().zip(row) {
            *xj += wij * yi;
        }
    }
    x
}

/// Accumulates the outer product: `grad += y (x)^T` into dims [len(y), len(x)].
pub fn outer_acc(grad: &mut Tensor, y: &[f64], x: &[f64]) {
    debug_assert_eq!(grad.dims, vec![y.len(), x.len()]);
    let inp = x.len();
    for (i, &yi) in y.iter().enumerate() {
        if yi == 0.0 {
            continue;
        }
        let row = &mut grad.data[i * inp..(i + 1) * inp];
        for (g, &xj) in row.iter_mut().zip(x) {
            *g += yi * xj;
        }
    }
}

pub fn add_assign(acc: &mut [f64], x: &[f64]) {
    debug_assert_eq!(acc.len(), x.len());
    for (a, &b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

/// Numerically stable softmax.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Backprop through softmax: given y = softmax(x) and dL/dy, returns dL/dx.
pub fn softmax_backward(y: &[f64], g_y: &[f64]) -> Vec<f64> {
    let s: f64 = y.iter().zip(g_y).map(|(a, b)| a * b).sum();
    y.iter().zip(g_y).map(|(&yi, &gi)| yi * (gi - s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_sums_to_one_and_saturates() {
        let y = softmax(&[0.0, 0.0, 0.0]);
        assert!(y.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-12));
        let y = softmax(&[100.0, 0.0, 0.0]);
        assert!((y[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn matvec_agrees_with_transpose_identity() {
        // y^T (W x) == x^T (W^T y)
        let w = Tensor {
            dims: vec![2, 3],
            data: vec![1.0, 2.0, 3.0, -1.0, 0.5, 4.0],
        };
        let x = [0.3, -0.7, 1.1];
        let y = [0.9, -0.2];
        let wx = matvec(&w, &x);
        let wty = matvec_transpose(&w, &y);
        let lhs: f64 = y.iter().zip(&wx).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&wty).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
