//! Focal need loss, two-class way loss, and their exact score gradients.

use crate::data::{NeedCategory, NeedsMeetingWay, NEED_COUNT, WAY_COUNT};
use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::simplex::validate_simplex;

/// Probabilities are clamped to at least this before any logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

fn check_rows(q: &Tensor, width: usize, labels: usize, what: &str) -> Result<()> {
    if q.cols() != width {
        return Err(Error::shape(what, &[q.rows(), width], q.shape()));
    }
    if q.rows() != labels {
        return Err(Error::Validation(format!(
            "{what}: {} rows but {labels} labels",
            q.rows()
        )));
    }
    for b in 0..q.rows() {
        validate_simplex(q.row(b), 1e-6, what)?;
    }
    Ok(())
}

/// Multi-class focal loss over a batch: `−Σᵢ (1−q_true)^γ · ln(q_true)`.
///
/// With one-hot labels only the true-class term contributes. `gamma = 0`
/// reduces to cross-entropy.
pub fn focal_loss(q_need: &Tensor, labels: &[NeedCategory], gamma: f64) -> Result<f64> {
    if gamma < 0.0 {
        return Err(Error::Validation(format!("gamma must be >= 0, got {gamma}")));
    }
    check_rows(q_need, NEED_COUNT, labels.len(), "focal loss probabilities")?;
    let mut total = 0.0;
    for (b, label) in labels.iter().enumerate() {
        let q_true = q_need.row(b)[label.code()];
        total += focal_term(q_true, gamma);
    }
    Ok(total)
}

/// Loss contribution of one sample's true-class probability.
pub(crate) fn focal_term(q_true: f64, gamma: f64) -> f64 {
    let clamped = q_true.max(PROB_FLOOR);
    let miss = 1.0 - q_true;
    let weight = if gamma == 0.0 {
        1.0
    } else if miss <= 0.0 {
        0.0
    } else {
        miss.powf(gamma)
    };
    -weight * clamped.ln()
}

/// d(focal_term)/d(q_true), consistent with the clamped loss.
fn focal_term_grad(q_true: f64, gamma: f64) -> f64 {
    let clamped = q_true.max(PROB_FLOOR);
    let miss = 1.0 - q_true;
    let pass = if q_true > PROB_FLOOR { 1.0 } else { 0.0 };
    if gamma == 0.0 {
        return -pass / clamped;
    }
    if miss <= 0.0 {
        return 0.0;
    }
    gamma * miss.powf(gamma - 1.0) * clamped.ln() - miss.powf(gamma) * pass / clamped
}

/// Gradient of the focal loss at the raw need scores (through the softmax),
/// scaled by `weight`.
pub fn focal_loss_grad(
    q_need: &Tensor,
    labels: &[NeedCategory],
    gamma: f64,
    weight: f64,
) -> Result<Tensor> {
    check_rows(q_need, NEED_COUNT, labels.len(), "focal loss probabilities")?;
    let mut d_s = Tensor::zeros(vec![q_need.rows(), NEED_COUNT]);
    for (b, label) in labels.iter().enumerate() {
        let t = label.code();
        let q_true = q_need.row(b)[t];
        let df = focal_term_grad(q_true, gamma);
        let q_row = q_need.row(b).to_vec();
        let out = d_s.row_mut(b);
        for (j, &qj) in q_row.iter().enumerate() {
            // dq_t/ds_j = q_t (δ_tj − q_j)
            let delta = if j == t { 1.0 } else { 0.0 };
            out[j] = weight * df * q_true * (delta - qj);
        }
    }
    Ok(d_s)
}

/// Two-class cross-entropy over softmax way probabilities:
/// `−Σᵢ ln(q_way_true)`.
pub fn way_loss(q_way: &Tensor, labels: &[NeedsMeetingWay]) -> Result<f64> {
    check_rows(q_way, WAY_COUNT, labels.len(), "way loss probabilities")?;
    let mut total = 0.0;
    for (b, label) in labels.iter().enumerate() {
        let q_true = q_way.row(b)[label.code()].max(PROB_FLOOR);
        total -= q_true.ln();
    }
    Ok(total)
}

/// Gradient of the way loss at the raw way scores, scaled by `weight`:
/// the classic `q − one_hot` form.
pub fn way_loss_grad(q_way: &Tensor, labels: &[NeedsMeetingWay], weight: f64) -> Result<Tensor> {
    check_rows(q_way, WAY_COUNT, labels.len(), "way loss probabilities")?;
    let mut d_s = Tensor::zeros(vec![q_way.rows(), WAY_COUNT]);
    for (b, label) in labels.iter().enumerate() {
        let t = label.code();
        let q_row = q_way.row(b).to_vec();
        let out = d_s.row_mut(b);
        for (j, &qj) in q_row.iter().enumerate() {
            let delta = if j == t { 1.0 } else { 0.0 };
            out[j] = weight * (qj - delta);
        }
    }
    Ok(d_s)
}

/// Weighted combination of the two task losses.
pub fn total_loss(need_loss: f64, way_loss: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    for (name, v) in [("need_loss", need_loss), ("way_loss", way_loss)] {
        if !v.is_finite() {
            return Err(Error::Numerical(format!("{name} is not finite: {v}")));
        }
    }
    Ok(lambda1 * need_loss + lambda2 * way_loss)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex_rows(rows: Vec<Vec<f64>>) -> Tensor {
        let cols = rows[0].len();
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Tensor::new(vec![rows.len(), cols], data).unwrap()
    }

    fn uniform10() -> Vec<f64> {
        vec![0.1; 10]
    }

    fn one_hot10(code: usize) -> Vec<f64> {
        let mut v = vec![0.0; 10];
        v[code] = 1.0;
        v
    }

    #[test]
    fn perfect_prediction_contributes_zero() {
        let q = simplex_rows(vec![one_hot10(3)]);
        let loss = focal_loss(&q, &[NeedCategory::BuyingMedicine], 2.0).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn gamma_zero_on_uniform_is_ln_ten() {
        let q = simplex_rows(vec![uniform10()]);
        let loss = focal_loss(&q, &[NeedCategory::Beauty], 0.0).unwrap();
        assert!((loss - 10.0f64.ln()).abs() < 1e-12, "{loss}");
        // ln 10 ≈ 2.302585
        assert!((loss - 2.302585).abs() < 1e-6);
    }

    #[test]
    fn gamma_two_low_confidence_hand_value() {
        // (0.9)² · (−ln 0.1) = 0.81 · 2.302585… ≈ 1.865094
        let q = simplex_rows(vec![uniform10()]);
        let loss = focal_loss(&q, &[NeedCategory::Beauty], 2.0).unwrap();
        let oracle = 0.81 * -(0.1f64.ln());
        assert!((loss - oracle).abs() < 1e-12);
        assert!((loss - 1.865094).abs() < 1e-6);
    }

    #[test]
    fn gamma_zero_equals_cross_entropy_on_random_simplices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let mut row: Vec<f64> = (0..10).map(|_| rng.gen_range(0.01..1.0)).collect();
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= sum);
            let label = NeedCategory::from_code(rng.gen_range(0..10)).unwrap();
            let q = simplex_rows(vec![row.clone()]);
            let focal = focal_loss(&q, &[label], 0.0).unwrap();
            let ce = -row[label.code()].ln();
            assert!((focal - ce).abs() < 1e-12);
        }
    }

    #[test]
    fn focal_is_monotone_nonincreasing_in_true_probability() {
        let gamma = 2.0;
        let mut prev = f64::INFINITY;
        for i in 1..100 {
            let q = i as f64 / 100.0;
            let term = focal_term(q, gamma);
            assert!(term <= prev + 1e-15, "not monotone at q={q}");
            prev = term;
        }
    }

    #[test]
    fn focusing_weight_ratio_is_nine_to_gamma() {
        for gamma in [0.5, 1.0, 2.0, 3.0] {
            let hard: f64 = (1.0f64 - 0.1).powf(gamma);
            let easy: f64 = (1.0f64 - 0.9).powf(gamma);
            assert!((hard / easy - 9.0f64.powf(gamma)).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_simplex_is_rejected() {
        let q = simplex_rows(vec![vec![0.3; 10]]); // sums to 3
        assert!(focal_loss(&q, &[NeedCategory::Beauty], 2.0).is_err());
    }

    #[test]
    fn way_loss_values() {
        // Perfect prediction: 0.
        let q = simplex_rows(vec![vec![1.0, 0.0]]);
        assert_eq!(way_loss(&q, &[NeedsMeetingWay::ViaDelivery]).unwrap(), 0.0);

        // Symmetric half: ln 2 per sample.
        let q = simplex_rows(vec![vec![0.5, 0.5]]);
        let l = way_loss(&q, &[NeedsMeetingWay::InStore]).unwrap();
        assert!((l - 2.0f64.ln()).abs() < 1e-12);

        // Hand sum over a batch of three: −(ln .9 + ln .8 + ln .6).
        let q = simplex_rows(vec![vec![0.9, 0.1], vec![0.8, 0.2], vec![0.4, 0.6]]);
        let labels = [
            NeedsMeetingWay::ViaDelivery,
            NeedsMeetingWay::ViaDelivery,
            NeedsMeetingWay::InStore,
        ];
        let l = way_loss(&q, &labels).unwrap();
        let oracle = -(0.9f64.ln() + 0.8f64.ln() + 0.6f64.ln());
        assert!((l - oracle).abs() < 1e-12);
        assert!((l - 0.839_329_69).abs() < 1e-7);
    }

    #[test]
    fn total_loss_is_an_exact_weighted_sum() {
        assert_eq!(total_loss(2.0, 3.0, 1.0, 1.0).unwrap(), 5.0);
        assert_eq!(total_loss(2.0, 3.0, 1.5, 0.0).unwrap(), 3.0);
        assert!(total_loss(f64::NAN, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn focal_grad_matches_finite_differences_through_softmax() {
        use crate::nn::softmax;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let gamma = 2.0;
        let label = NeedCategory::Tourism;
        let scores: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let loss_of = |s: &[f64]| -> f64 {
            let q = softmax(s).unwrap();
            focal_term(q[label.code()], gamma)
        };

        let q = Tensor::new(vec![1, 10], softmax(&scores).unwrap()).unwrap();
        let grad = focal_loss_grad(&q, &[label], gamma, 1.0).unwrap();

        let h = 1e-6;
        for j in 0..10 {
            let mut up = scores.clone();
            up[j] += h;
            let mut down = scores.clone();
            down[j] -= h;
            let numeric = (loss_of(&up) - loss_of(&down)) / (2.0 * h);
            let analytic = grad.row(0)[j];
            assert!(
                (analytic - numeric).abs() < 1e-6,
                "slot {j}: {analytic} vs {numeric}"
            );
        }
    }
}
