//! Kullback–Leibler divergence between need distributions.

use serde::{Deserialize, Serialize};

use crate::data::{PurchaseRecord, TimePeriod, NEED_COUNT};
use crate::error::{Error, Result};
use crate::simplex::validate_simplex;

/// A distribution over the ten need categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionVector(pub [f64; NEED_COUNT]);

impl DistributionVector {
    pub fn new(values: [f64; NEED_COUNT]) -> Result<Self> {
        validate_simplex(&values, crate::simplex::SIMPLEX_TOL, "distribution vector")?;
        Ok(DistributionVector(values))
    }

    pub fn uniform() -> Self {
        DistributionVector([1.0 / NEED_COUNT as f64; NEED_COUNT])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// KL divergence `Σ p·ln(p/q)` in nats. `q` is smoothed by adding 1e-9 to
/// every slot and renormalizing before division; zero-mass `p` slots
/// contribute nothing.
pub fn kld(p: &DistributionVector, q: &DistributionVector) -> Result<f64> {
    validate_simplex(p.as_slice(), crate::simplex::SIMPLEX_TOL, "kld p")?;
    validate_simplex(q.as_slice(), crate::simplex::SIMPLEX_TOL, "kld q")?;

    let mut q_smooth = q.0;
    for v in &mut q_smooth {
        *v += 1e-9;
    }
    let total: f64 = q_smooth.iter().sum();
    for v in &mut q_smooth {
        *v /= total;
    }

    let mut div = 0.0;
    for (pi, qi) in p.0.iter().zip(&q_smooth) {
        if *pi > 0.0 {
            div += pi * (pi / qi).ln();
        }
    }
    Ok(div)
}

/// Empirical need distribution of records, optionally restricted to one time
/// period. Errors when the filtered set is empty.
pub fn order_distribution(
    records: &[PurchaseRecord],
    period: Option<TimePeriod>,
) -> Result<DistributionVector> {
    let mut counts = [0.0f64; NEED_COUNT];
    let mut n = 0usize;
    for r in records {
        if let Some(p) = period {
            if r.context.time_period != p {
                continue;
            }
        }
        counts[r.need.code()] += 1.0;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyInput(format!(
            "no records in period {period:?}"
        )));
    }
    for c in &mut counts {
        *c /= n as f64;
    }
    DistributionVector::new(counts)
}

/// Convenience constructor from per-need counts.
pub fn distribution_from_counts(counts: &[usize; NEED_COUNT]) -> Result<DistributionVector> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyInput("distribution from zero counts".into()));
    }
    let mut values = [0.0; NEED_COUNT];
    for (v, &c) in values.iter_mut().zip(counts) {
        *v = c as f64 / total as f64;
    }
    DistributionVector::new(values)
}
