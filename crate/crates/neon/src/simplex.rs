//! Helpers for vectors on the probability simplex.

use crate::error::{Error, Result};

/// Default tolerance on the sum of a stored simplex.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Errors unless `v` has non-negative entries summing to 1 within `tol`.
pub fn validate_simplex(v: &[f64], tol: f64, context: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::simplex(context, "empty vector"));
    }
    let mut sum = 0.0;
    for (i, &x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::simplex(context, format!("entry {i} is not finite")));
        }
        if x < 0.0 {
            return Err(Error::simplex(context, format!("entry {i} is negative ({x})")));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > tol {
        return Err(Error::simplex(context, format!("sums to {sum}, not 1")));
    }
    Ok(())
}

/// Scales `v` to sum to 1. Errors when the total mass is zero or non-finite.
pub fn normalize(v: &mut [f64], context: &str) -> Result<()> {
    let sum: f64 = v.iter().sum();
    if !(sum.is_finite() && sum > 0.0) {
        return Err(Error::simplex(context, format!("cannot normalize mass {sum}")));
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_valid_simplex() {
        validate_simplex(&[0.25, 0.75], SIMPLEX_TOL, "test").unwrap();
    }

    #[test]
    fn rejects_negative_and_bad_sum() {
        assert!(validate_simplex(&[-0.1, 1.1], SIMPLEX_TOL, "test").is_err());
        assert!(validate_simplex(&[0.3, 0.3], SIMPLEX_TOL, "test").is_err());
    }

    #[test]
    fn normalize_zero_mass_is_error() {
        let mut v = [0.0, 0.0];
        assert!(normalize(&mut v, "test").is_err());
    }
}
