//! Adaptive-moment optimizer over named parameter sets.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

/// Gradients keyed by parameter name. Keys must exactly match the owning
/// model's parameter names.
pub type GradientSet = BTreeMap<String, Tensor>;

/// First/second moment estimates for one parameter.
#[derive(Debug, Clone)]
struct Moments {
    m: Tensor,
    v: Tensor,
}

/// Optimizer state: per-parameter moments plus the step counter and
/// hyperparameters.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    moments: BTreeMap<String, Moments>,
    pub step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl OptimizerState {
    pub fn new(learning_rate: f64) -> Self {
        OptimizerState {
            moments: BTreeMap::new(),
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// Applies one adaptive-moment update to every named parameter and
    /// increments the step counter.
    ///
    /// Parameters not mentioned in `grads` are treated as having zero
    /// gradient (their moments still decay).
    pub fn step(
        &mut self,
        params: &mut BTreeMap<String, &mut Tensor>,
        grads: &GradientSet,
    ) -> Result<()> {
        for (name, grad) in grads {
            let param = params.get(name).ok_or_else(|| {
                Error::Validation(format!("gradient for unknown parameter '{name}'"))
            })?;
            if param.shape() != grad.shape() {
                return Err(Error::shape(
                    format!("gradient of '{name}'"),
                    param.shape(),
                    grad.shape(),
                ));
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2 = 1.0 - self.beta2.powi(t);

        for (name, param) in params.iter_mut() {
            let moments = self.moments.entry(name.clone()).or_insert_with(|| Moments {
                m: Tensor::zeros_like(param),
                v: Tensor::zeros_like(param),
            });
            let zero = Tensor::zeros_like(param);
            let grad = grads.get(name).unwrap_or(&zero);

            let pdata = param.data_mut();
            let mdata = moments.m.data_mut();
            let vdata = moments.v.data_mut();
            for i in 0..pdata.len() {
                let g = grad.data()[i];
                mdata[i] = self.beta1 * mdata[i] + (1.0 - self.beta1) * g;
                vdata[i] = self.beta2 * vdata[i] + (1.0 - self.beta2) * g * g;
                let m_hat = mdata[i] / bias1;
                let v_hat = vdata[i] / bias2;
                pdata[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
