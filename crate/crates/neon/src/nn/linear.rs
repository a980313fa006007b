//! Fully-connected layer with exact backward pass.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::kernels;
use crate::nn::tensor::Tensor;

/// A dense affine layer `y = x·Wᵀ + b`.
///
/// `weight` is `out_dim × in_dim` row-major, `bias` is `out_dim`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearLayer {
    pub weight: Tensor,
    pub bias: Tensor,
}

/// Gradients of a linear layer, same shapes as the parameters.
#[derive(Debug, Clone)]
pub struct LinearGrads {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl LinearLayer {
    /// Uniform fan-scaled init (±√(6/(in+out))) for the weight, zeros for the bias.
    pub fn init<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let data = (0..in_dim * out_dim)
            .map(|_| rng.gen_range(-limit..limit))
            .collect();
        LinearLayer {
            weight: Tensor::new(vec![out_dim, in_dim], data).expect("sized buffer"),
            bias: Tensor::zeros(vec![out_dim]),
        }
    }

    pub fn from_parts(weight: Tensor, bias: Tensor) -> Result<Self> {
        if weight.shape().len() != 2 {
            return Err(Error::Validation(format!(
                "linear weight must be rank 2, got {:?}",
                weight.shape()
            )));
        }
        if bias.shape() != [weight.shape()[0]] {
            return Err(Error::shape(
                "linear bias",
                &[weight.shape()[0]],
                bias.shape(),
            ));
        }
        Ok(LinearLayer { weight, bias })
    }

    pub fn in_dim(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn out_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    /// Forward pass over a batch: `y[b] = x[b]·Wᵀ + b`.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        if x.cols() != self.in_dim() {
            return Err(Error::shape(
                "linear forward input",
                &[x.rows(), self.in_dim()],
                x.shape(),
            ));
        }
        let batch = x.rows();
        let (in_dim, out_dim) = (self.in_dim(), self.out_dim());
        let mut y = Tensor::zeros(vec![batch, out_dim]);
        for row in 0..batch {
            y.row_mut(row).copy_from_slice(self.bias.data());
        }
        let mut wt = vec![0.0; in_dim * out_dim];
        kernels::transpose(self.weight.data(), &mut wt, out_dim, in_dim);
        kernels::matmul_xt_accum(x.data(), &wt, y.data_mut(), in_dim, out_dim);
        Ok(y)
    }

    /// Backward pass: given the forward input and `dL/dy`, returns `dL/dx`
    /// and fills the parameter gradients.
    pub fn backward(&self, x: &Tensor, dy: &Tensor) -> Result<(Tensor, LinearGrads)> {
        let batch = x.rows();
        if dy.rows() != batch || dy.cols() != self.out_dim() {
            return Err(Error::shape(
                "linear backward upstream",
                &[batch, self.out_dim()],
                dy.shape(),
            ));
        }
        let (in_dim, out_dim) = (self.in_dim(), self.out_dim());

        let mut dx = Tensor::zeros(vec![batch, in_dim]);
        kernels::matmul_accum(dy.data(), self.weight.data(), dx.data_mut(), out_dim, in_dim);

        let mut dw = Tensor::zeros(vec![out_dim, in_dim]);
        kernels::grad_weight_accum(dy.data(), x.data(), dw.data_mut(), batch, out_dim, in_dim);

        let mut db = Tensor::zeros(vec![out_dim]);
        for b in 0..batch {
            for (dbv, &g) in db.data_mut().iter_mut().zip(dy.row(b)) {
                *dbv += g;
            }
        }

        Ok((dx, LinearGrads { weight: dw, bias: db }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(weight: Vec<f64>, bias: Vec<f64>, out_dim: usize, in_dim: usize) -> LinearLayer {
        LinearLayer::from_parts(
            Tensor::new(vec![out_dim, in_dim], weight).unwrap(),
            Tensor::new(vec![out_dim], bias).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identity_weight_passes_input_through() {
        let l = layer(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 2, 2);
        let x = Tensor::new(vec![1, 2], vec![5.0, -3.0]).unwrap();
        let y = l.forward(&x).unwrap();
        assert_eq!(y.data(), &[5.0, -3.0]);
    }

    #[test]
    fn direct_arithmetic_case() {
        // W = [[1,2],[3,4]], b = 0, x = [1,1] -> [3, 7]
        let l = layer(vec![1.0, 2.0, 3.0, 4.0], vec![0.0, 0.0], 2, 2);
        let x = Tensor::new(vec![1, 2], vec![1.0, 1.0]).unwrap();
        let y = l.forward(&x).unwrap();
        assert_eq!(y.data(), &[3.0, 7.0]);
    }

    #[test]
    fn seeded_forward_matches_triple_loop_oracle() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let l = LinearLayer::init(4, 3, &mut rng);
        let x_data: Vec<f64> = (0..3 * 4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = Tensor::new(vec![3, 4], x_data).unwrap();
        let y = l.forward(&x).unwrap();

        // Independent naive matrix multiply.
        for b in 0..3 {
            for o in 0..3 {
                let mut acc = l.bias.data()[o];
                for i in 0..4 {
                    acc += x.row(b)[i] * l.weight.row(o)[i];
                }
                assert!((y.row(b)[o] - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch_names_both_shapes() {
        let l = layer(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 2, 2);
        let x = Tensor::new(vec![1, 3], vec![1.0, 2.0, 3.0]).unwrap();
        let err = l.forward(&x).unwrap_err().to_string();
        assert!(err.contains("[1, 2]") && err.contains("[1, 3]"), "{err}");
    }

    #[test]
    fn bias_grad_of_sum_loss_is_batch_count() {
        // loss = sum(y) => dL/dy = ones => dL/db = batch-size * ones
        let l = layer(vec![0.5, -0.25, 1.5, 2.0], vec![0.1, -0.2], 2, 2);
        let x = Tensor::new(vec![3, 2], vec![1.0, 2.0, 0.0, -1.0, 4.0, 0.5]).unwrap();
        let dy = Tensor::new(vec![3, 2], vec![1.0; 6]).unwrap();
        let (_, grads) = l.backward(&x, &dy).unwrap();
        assert_eq!(grads.bias.data(), &[3.0, 3.0]);
    }

    #[test]
    fn backward_matches_central_differences() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut l = LinearLayer::init(5, 4, &mut rng);
        let x_data: Vec<f64> = (0..2 * 5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = Tensor::new(vec![2, 5], x_data).unwrap();

        // loss = 0.5 * sum(y^2)
        let y = l.forward(&x).unwrap();
        let dy = Tensor::new(vec![2, 4], y.data().to_vec()).unwrap();
        let (dx, grads) = l.backward(&x, &dy).unwrap();

        let h = 1e-5;
        let loss = |l: &LinearLayer, x: &Tensor| -> f64 {
            l.forward(x).unwrap().data().iter().map(|v| 0.5 * v * v).sum()
        };

        for p in 0..l.weight.len() {
            let orig = l.weight.data()[p];
            l.weight.data_mut()[p] = orig + h;
            let up = loss(&l, &x);
            l.weight.data_mut()[p] = orig - h;
            let down = loss(&l, &x);
            l.weight.data_mut()[p] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.weight.data()[p];
            let rel = (analytic - numeric).abs() / numeric.abs().max(1e-8);
            assert!(rel < 1e-4, "weight {p}: {analytic} vs {numeric}");
        }
        for p in 0..x.len() {
            let mut xp = x.clone();
            xp.data_mut()[p] += h;
            let up = loss(&l, &xp);
            xp.data_mut()[p] -= 2.0 * h;
            let down = loss(&l, &xp);
            let numeric = (up - down) / (2.0 * h);
            let analytic = dx.data()[p];
            let rel = (analytic - numeric).abs() / numeric.abs().max(1e-8);
            assert!(rel < 1e-4, "input {p}: {analytic} vs {numeric}");
        }
    }
}
