//! ReLU and softmax.

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

/// Elementwise `max(0, x)`, shape preserved.
pub fn relu(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| v.max(0.0)).collect();
    Tensor::new(x.shape().to_vec(), data).expect("shape preserved")
}

/// Backward of ReLU: passes the upstream gradient where the pre-activation
/// was strictly positive.
pub fn relu_backward(pre: &Tensor, dy: &Tensor) -> Tensor {
    debug_assert_eq!(pre.shape(), dy.shape());
    let data = pre
        .data()
        .iter()
        .zip(dy.data())
        .map(|(&z, &g)| if z > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(pre.shape().to_vec(), data).expect("shape preserved")
}

/// Numerically stable softmax of one vector (max-subtraction), so the result
/// is invariant under adding a constant to all inputs.
///
/// Errors on empty or non-finite input.
pub fn softmax(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::EmptyInput("softmax of empty vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("softmax input contains NaN/Inf".into()));
    }
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Softmax applied independently to each row of a rank-2 tensor.
pub fn softmax_rows(x: &Tensor) -> Result<Tensor> {
    let mut out = Tensor::zeros(x.shape().to_vec());
    for b in 0..x.rows() {
        let s = softmax(x.row(b))?;
        out.row_mut(b).copy_from_slice(&s);
    }
    Ok(out)
}
