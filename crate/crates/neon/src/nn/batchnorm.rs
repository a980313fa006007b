//! Batch normalization with exact train-mode backward pass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

/// Whether a pass uses batch statistics (training) or running statistics
/// (inference).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Per-feature batch normalization.
///
/// Train mode standardizes by the batch mean and (biased) batch variance and
/// folds the batch statistics into the running estimates with `momentum`.
/// Infer mode is a deterministic affine map built from the running estimates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchNormLayer {
    pub gamma: Tensor,
    pub beta: Tensor,
    pub running_mean: Tensor,
    pub running_var: Tensor,
    pub eps: f64,
    pub momentum: f64,
}

/// Values cached by a train-mode forward pass, needed for backward.
#[derive(Debug, Clone)]
pub struct BatchNormCache {
    /// Standardized activations x̂.
    pub x_hat: Tensor,
    /// 1/√(σ²+ε) per feature.
    pub inv_std: Vec<f64>,
}

/// Gradients for gamma and beta.
#[derive(Debug, Clone)]
pub struct BatchNormGrads {
    pub gamma: Tensor,
    pub beta: Tensor,
}

impl BatchNormLayer {
    pub fn new(dim: usize) -> Self {
        BatchNormLayer {
            gamma: Tensor::new(vec![dim], vec![1.0; dim]).expect("sized"),
            beta: Tensor::zeros(vec![dim]),
            running_mean: Tensor::zeros(vec![dim]),
            running_var: Tensor::new(vec![dim], vec![1.0; dim]).expect("sized"),
            eps: 1e-5,
            momentum: 0.1,
        }
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.cols() != self.dim() {
            return Err(Error::shape(
                "batchnorm input",
                &[x.rows(), self.dim()],
                x.shape(),
            ));
        }
        Ok(())
    }

    /// Train-mode forward. Updates the running statistics and returns the
    /// cache needed by [`BatchNormLayer::backward`].
    ///
    /// Errors when the batch has fewer than two rows (variance undefined).
    pub fn forward_train(&mut self, x: &Tensor) -> Result<(Tensor, BatchNormCache)> {
        self.check_input(x)?;
        let (batch, dim) = (x.rows(), self.dim());
        if batch < 2 {
            return Err(Error::Validation(format!(
                "batchnorm train mode needs batch >= 2, got {batch}"
            )));
        }

        let mut mean = vec![0.0; dim];
        for b in 0..batch {
            for (m, &v) in mean.iter_mut().zip(x.row(b)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= batch as f64;
        }

        let mut var = vec![0.0; dim];
        for b in 0..batch {
            for ((vv, &v), &m) in var.iter_mut().zip(x.row(b)).zip(&mean) {
                let d = v - m;
                *vv += d * d;
            }
        }
        for v in &mut var {
            *v /= batch as f64;
        }

        let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + self.eps).sqrt()).collect();

        let mut x_hat = Tensor::zeros(vec![batch, dim]);
        let mut y = Tensor::zeros(vec![batch, dim]);
        for b in 0..batch {
            let xr = x.row(b);
            let hr = x_hat.row_mut(b);
            for j in 0..dim {
                hr[j] = (xr[j] - mean[j]) * inv_std[j];
            }
        }
        for b in 0..batch {
            let hr = x_hat.row(b).to_vec();
            let yr = y.row_mut(b);
            for j in 0..dim {
                yr[j] = self.gamma.data()[j] * hr[j] + self.beta.data()[j];
            }
        }

        for j in 0..dim {
            let rm = self.running_mean.data_mut();
            rm[j] = (1.0 - self.momentum) * rm[j] + self.momentum * mean[j];
            let rv = self.running_var.data_mut();
            rv[j] = (1.0 - self.momentum) * rv[j] + self.momentum * var[j];
        }

        Ok((y, BatchNormCache { x_hat, inv_std }))
    }

    /// Infer-mode forward: standardize by running statistics.
    pub fn forward_infer(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let (batch, dim) = (x.rows(), self.dim());
        let mut y = Tensor::zeros(vec![batch, dim]);
        let inv_std: Vec<f64> = self
            .running_var
            .data()
            .iter()
            .map(|&v| 1.0 / (v + self.eps).sqrt())
            .collect();
        for b in 0..batch {
            let xr = x.row(b);
            let yr = y.row_mut(b);
            for j in 0..dim {
                yr[j] = self.gamma.data()[j] * (xr[j] - self.running_mean.data()[j]) * inv_std[j]
                    + self.beta.data()[j];
            }
        }
        Ok(y)
    }

    /// Train-mode backward through the batch statistics.
    pub fn backward(
        &self,
        cache: &BatchNormCache,
        dy: &Tensor,
    ) -> Result<(Tensor, BatchNormGrads)> {
        let (batch, dim) = (dy.rows(), self.dim());
        if dy.cols() != dim || cache.x_hat.rows() != batch {
            return Err(Error::shape(
                "batchnorm backward upstream",
                cache.x_hat.shape(),
                dy.shape(),
            ));
        }

        let mut d_gamma = Tensor::zeros(vec![dim]);
        let mut d_beta = Tensor::zeros(vec![dim]);
        for b in 0..batch {
            let dyr = dy.row(b);
            let hr = cache.x_hat.row(b);
            for j in 0..dim {
                d_gamma.data_mut()[j] += dyr[j] * hr[j];
                d_beta.data_mut()[j] += dyr[j];
            }
        }

        // dx = inv_std/B * (B·dx̂ − Σ_b dx̂ − x̂·Σ_b dx̂·x̂), dx̂ = γ·dy
        let mut sum_dxhat = vec![0.0; dim];
        let mut sum_dxhat_xhat = vec![0.0; dim];
        for b in 0..batch {
            let dyr = dy.row(b);
            let hr = cache.x_hat.row(b);
            for j in 0..dim {
                let dxh = self.gamma.data()[j] * dyr[j];
                sum_dxhat[j] += dxh;
                sum_dxhat_xhat[j] += dxh * hr[j];
            }
        }

        let mut dx = Tensor::zeros(vec![batch, dim]);
        let n = batch as f64;
        for b in 0..batch {
            let dyr = dy.row(b).to_vec();
            let hr = cache.x_hat.row(b).to_vec();
            let dxr = dx.row_mut(b);
            for j in 0..dim {
                let dxh = self.gamma.data()[j] * dyr[j];
                dxr[j] =
                    cache.inv_std[j] / n * (n * dxh - sum_dxhat[j] - hr[j] * sum_dxhat_xhat[j]);
            }
        }

        Ok((dx, BatchNormGrads { gamma: d_gamma, beta: d_beta }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_batch_outputs_beta() {
        let mut bn = BatchNormLayer::new(3);
        bn.beta = Tensor::new(vec![3], vec![0.7, -0.2, 1.5]).unwrap();
        let x = Tensor::new(vec![4, 3], vec![2.0, -1.0, 0.5].repeat(4)).unwrap();
        let (y, _) = bn.forward_train(&x).unwrap();
        for b in 0..4 {
            for j in 0..3 {
                assert!((y.row(b)[j] - bn.beta.data()[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_point_column_matches_hand_evaluation() {
        // column [0, 2]: mean 1, biased var 1 -> ±1/sqrt(1+1e-5)
        let mut bn = BatchNormLayer::new(1);
        let x = Tensor::new(vec![2, 1], vec![0.0, 2.0]).unwrap();
        let (y, _) = bn.forward_train(&x).unwrap();
        let expected = 1.0 / (1.0f64 + 1e-5).sqrt();
        assert!((y.data()[0] + expected).abs() < 1e-12);
        assert!((y.data()[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn batch_of_one_is_rejected_in_train_mode() {
        let mut bn = BatchNormLayer::new(2);
        let x = Tensor::new(vec![1, 2], vec![1.0, 2.0]).unwrap();
        assert!(bn.forward_train(&x).is_err());
    }

    #[test]
    fn infer_with_unit_stats_is_near_identity() {
        let bn = BatchNormLayer::new(2);
        let x = Tensor::new(vec![2, 2], vec![0.3, -1.4, 2.0, 0.0]).unwrap();
        let y = bn.forward_infer(&x).unwrap();
        for (a, b) in y.data().iter().zip(x.data()) {
            assert!((a - b).abs() < 1e-4); // eps-scaled shrink only
        }
    }

    #[test]
    fn infer_mode_is_affine() {
        // f(a·x + c·1) == a·f'(x)-style linearity of the affine map:
        // check f(x) + f(z) - f(0) == f(x + z) elementwise for the linear part.
        let mut bn = BatchNormLayer::new(3);
        bn.gamma = Tensor::new(vec![3], vec![1.3, 0.5, 2.0]).unwrap();
        bn.beta = Tensor::new(vec![3], vec![0.1, -0.4, 0.0]).unwrap();
        bn.running_mean = Tensor::new(vec![3], vec![0.2, -1.0, 3.0]).unwrap();
        bn.running_var = Tensor::new(vec![3], vec![0.5, 2.0, 1.2]).unwrap();

        let x = Tensor::new(vec![1, 3], vec![0.7, 0.1, -0.3]).unwrap();
        let z = Tensor::new(vec![1, 3], vec![-1.1, 0.9, 2.2]).unwrap();
        let xz = Tensor::new(vec![1, 3], vec![0.7 - 1.1, 0.1 + 0.9, -0.3 + 2.2]).unwrap();
        let zero = Tensor::zeros(vec![1, 3]);

        let fx = bn.forward_infer(&x).unwrap();
        let fz = bn.forward_infer(&z).unwrap();
        let fxz = bn.forward_infer(&xz).unwrap();
        let f0 = bn.forward_infer(&zero).unwrap();
        for j in 0..3 {
            let lhs = fx.data()[j] + fz.data()[j] - f0.data()[j];
            assert!((lhs - fxz.data()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn running_stats_update_by_momentum() {
        let mut bn = BatchNormLayer::new(1);
        let x = Tensor::new(vec![2, 1], vec![0.0, 2.0]).unwrap();
        bn.forward_train(&x).unwrap();
        // mean 1, var 1: running = 0.9*prev + 0.1*batch
        assert!((bn.running_mean.data()[0] - 0.1).abs() < 1e-12);
        assert!((bn.running_var.data()[0] - (0.9 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn backward_matches_central_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let dim = 4;
        let batch = 6;
        let mut bn = BatchNormLayer::new(dim);
        for g in bn.gamma.data_mut() {
            *g = rng.gen_range(0.5..1.5);
        }
        for b in bn.beta.data_mut() {
            *b = rng.gen_range(-0.5..0.5);
        }
        let x_data: Vec<f64> = (0..batch * dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x = Tensor::new(vec![batch, dim], x_data).unwrap();

        // loss = 0.5 sum(y^2); running-stat updates do not affect the loss.
        let (y, cache) = bn.clone().forward_train(&x).unwrap();
        let dy = Tensor::new(vec![batch, dim], y.data().to_vec()).unwrap();
        let (dx, grads) = bn.backward(&cache, &dy).unwrap();

        let loss = |bn: &BatchNormLayer, x: &Tensor| -> f64 {
            let (y, _) = bn.clone().forward_train(x).unwrap();
            y.data().iter().map(|v| 0.5 * v * v).sum()
        };

        let h = 1e-5;
        let check = |analytic: f64, numeric: f64, what: &str| {
            let rel = (analytic - numeric).abs() / numeric.abs().max(1e-6);
            assert!(rel < 1e-4, "{what}: {analytic} vs {numeric}");
        };

        for p in 0..dim {
            let orig = bn.gamma.data()[p];
            bn.gamma.data_mut()[p] = orig + h;
            let up = loss(&bn, &x);
            bn.gamma.data_mut()[p] = orig - h;
            let down = loss(&bn, &x);
            bn.gamma.data_mut()[p] = orig;
            check(grads.gamma.data()[p], (up - down) / (2.0 * h), "gamma");

            let orig = bn.beta.data()[p];
            bn.beta.data_mut()[p] = orig + h;
            let up = loss(&bn, &x);
            bn.beta.data_mut()[p] = orig - h;
            let down = loss(&bn, &x);
            bn.beta.data_mut()[p] = orig;
            check(grads.beta.data()[p], (up - down) / (2.0 * h), "beta");
        }
        for p in 0..batch * dim {
            let mut xp = x.clone();
            xp.data_mut()[p] += h;
            let up = loss(&bn, &xp);
            xp.data_mut()[p] -= 2.0 * h;
            let down = loss(&bn, &xp);
            check(dx.data()[p], (up - down) / (2.0 * h), "input");
        }
    }
}
