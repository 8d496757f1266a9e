//! Frame-level training objectives.
//!
//! Both losses take one raw score per frame and return the loss value in nats
//! together with its gradient with respect to those scores. The binary head
//! reads scores as logits; the Poisson head reads them as log-intensities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::{EventLabels, FrameGrid, LOG_RATE_CLAMP};

/// Per-frame raw scores produced by a projection head.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScores {
    values: Vec<f64>,
    grid: FrameGrid,
}

impl FrameScores {
    pub fn new(values: Vec<f64>, grid: FrameGrid) -> Result<Self> {
        if values.len() != grid.num_frames() {
            return Err(Error::Shape(format!(
                "expected {} scores, got {}",
                grid.num_frames(),
                values.len()
            )));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "score at frame {k} is not finite: {v}"
            )));
        }
        Ok(Self { values, grid })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> FrameGrid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Positive-class weight for the binary loss. Serialized as `"auto"` or a number.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightRepr", into = "WeightRepr")]
pub enum ClassWeight {
    /// Ratio of negative to positive frames in the example being scored.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WeightRepr {
    Fixed(f64),
    Named(String),
}

impl TryFrom<WeightRepr> for ClassWeight {
    type Error = String;

    fn try_from(r: WeightRepr) -> std::result::Result<Self, String> {
        match r {
            WeightRepr::Fixed(w) => Ok(ClassWeight::Fixed(w)),
            WeightRepr::Named(s) if s == "auto" => Ok(ClassWeight::Auto),
            WeightRepr::Named(s) => Err(format!(
                "class weight must be \"auto\" or a number, got {s:?}"
            )),
        }
    }
}

impl From<ClassWeight> for WeightRepr {
    fn from(w: ClassWeight) -> Self {
        match w {
            ClassWeight::Auto => WeightRepr::Named("auto".into()),
            ClassWeight::Fixed(v) => WeightRepr::Fixed(v),
        }
    }
}

impl std::str::FromStr for ClassWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(ClassWeight::Auto);
        }
        s.parse::<f64>().map(ClassWeight::Fixed).map_err(|_| {
            Error::Config(format!(
                "class weight must be \"auto\" or a number, got {s:?}"
            ))
        })
    }
}

impl ClassWeight {
    /// Resolves the weight for a given mark sequence.
    pub fn resolve(self, marks: &[u8]) -> Result<f64> {
        match self {
            ClassWeight::Fixed(w) if w.is_finite() && w > 0.0 => Ok(w),
            ClassWeight::Fixed(w) => Err(Error::Config(format!(
                "class weight must be positive, got {w}"
            ))),
            ClassWeight::Auto => {
                let positives = marks.iter().filter(|&&m| m != 0).count();
                let negatives = marks.len() - positives;
                if positives == 0 || negatives == 0 {
                    return Err(Error::Config(format!(
                        "automatic class weight needs both classes, got {positives} positive and {negatives} negative frames"
                    )));
                }
                Ok(negatives as f64 / positives as f64)
            }
        }
    }
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Class-reweighted binary cross-entropy summed over frames.
///
/// `value = Σ_t −[w·y_t·log p_t + (1−y_t)·log(1−p_t)]` with `p_t = sigmoid(score_t)`.
pub fn binary_loss(
    scores: &FrameScores,
    labels: &EventLabels,
    weight: ClassWeight,
) -> Result<LossResult> {
    let marks = labels.marks();
    if marks.len() != scores.len() {
        return Err(Error::Shape(format!(
            "{} marks for {} frames",
            marks.len(),
            scores.len()
        )));
    }
    let w = weight.resolve(marks)?;
    let mut value = 0.0;
    let mut gradient = Vec::with_capacity(scores.len());
    for (&s, &y) in scores.values().iter().zip(marks) {
        let p = sigmoid(s);
        if y != 0 {
            // −log σ(s) = softplus(−s)
            value += w * softplus(-s);
            gradient.push(w * (p - 1.0));
        } else {
            // −log(1 − σ(s)) = softplus(s)
            value += softplus(s);
            gradient.push(p);
        }
    }
    Ok(LossResult { value, gradient })
}

/// Negative log-likelihood of the event times under the inhomogeneous Poisson
/// process conditioned on the event count.
///
/// With `λ_k = exp(score_k)`: `value = −Σ_j log λ(t_j) + n·log Λ(T)` and
/// `∂value/∂score_k = −m_k + n·λ_k/Λ(T)`. Scores are clamped to
/// `[-LOG_RATE_CLAMP, LOG_RATE_CLAMP]`; clamped entries get zero gradient.
pub fn poisson_nll(scores: &FrameScores, labels: &EventLabels) -> Result<LossResult> {
    if labels.grid().num_frames() != scores.len() {
        return Err(Error::Shape(format!(
            "labels cover {} frames, scores {}",
            labels.grid().num_frames(),
            scores.len()
        )));
    }
    let n = labels.count();
    if n == 0 {
        return Err(Error::Domain(
            "Poisson loss requires at least one event".into(),
        ));
    }
    let counts = labels.frame_counts();
    let clamped: Vec<f64> = scores
        .values()
        .iter()
        .map(|s| s.clamp(-LOG_RATE_CLAMP, LOG_RATE_CLAMP))
        .collect();
    let rates: Vec<f64> = clamped.iter().map(|s| s.exp()).collect();
    let total: f64 = rates.iter().sum();
    let n_f = n as f64;

    let event_term: f64 = counts
        .iter()
        .zip(&clamped)
        .filter(|(&m, _)| m > 0)
        .map(|(&m, &s)| m as f64 * s)
        .sum();
    let value = -event_term + n_f * total.ln();

    let gradient = scores
        .values()
        .iter()
        .zip(rates.iter().zip(&counts))
        .map(|(&raw, (&rate, &m))| {
            if raw.abs() > LOG_RATE_CLAMP {
                0.0
            } else {
                -(m as f64) + n_f * rate / total
            }
        })
        .collect();
    Ok(LossResult { value, gradient })
}

/// Log of the conditional event-time density `n!·Π λ(t_i) / Λ(T)^n`.
pub fn poisson_log_density(scores: &FrameScores, labels: &EventLabels) -> Result<f64> {
    let nll = poisson_nll(scores, labels)?;
    let log_factorial: f64 = (2..=labels.count()).map(|k| (k as f64).ln()).sum();
    Ok(log_factorial - nll.value)
}

/// `primary + coefficient · auxiliary`, applied to values and gradients.
pub fn interpolated_loss(
    primary: &LossResult,
    auxiliary: &LossResult,
    coefficient: f64,
) -> Result<LossResult> {
    if primary.gradient.len() != auxiliary.gradient.len() {
        return Err(Error::Shape(format!(
            "cannot combine losses over {} and {} frames",
            primary.gradient.len(),
            auxiliary.gradient.len()
        )));
    }
    if !(coefficient.is_finite() && coefficient >= 0.0) {
        return Err(Error::Config(format!(
            "interpolation coefficient must be nonnegative, got {coefficient}"
        )));
    }
    Ok(LossResult {
        value: primary.value + coefficient * auxiliary.value,
        gradient: primary
            .gradient
            .iter()
            .zip(&auxiliary.gradient)
            .map(|(p, a)| p + coefficient * a)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::{central_difference, max_relative_error};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(t: usize) -> FrameGrid {
        FrameGrid::with_frames(t).unwrap()
    }

    fn scores(v: &[f64]) -> FrameScores {
        FrameScores::new(v.to_vec(), grid(v.len())).unwrap()
    }

    fn labels(t: usize, times: &[f64]) -> EventLabels {
        EventLabels::from_frames(grid(t), times.to_vec()).unwrap()
    }

    #[test]
    fn binary_symmetric_case() {
        let l = labels(4, &[1.5]);
        let r = binary_loss(&scores(&[0.0; 4]), &l, ClassWeight::Fixed(3.0)).unwrap();
        assert_relative_eq!(r.value, 6.0 * std::f64::consts::LN_2, epsilon = 1e-12);
        assert_relative_eq!(r.value, 4.1589, epsilon = 1e-4);
        assert_eq!(r.gradient, vec![0.5, 3.0 * -0.5, 0.5, 0.5]);
    }

    #[test]
    fn auto_weight_two_events_in_750_frames() {
        let l = labels(750, &[10.2, 400.7]);
        assert_eq!(ClassWeight::Auto.resolve(l.marks()).unwrap(), 374.0);
    }

    #[test]
    fn auto_weight_rejects_single_class() {
        let all_neg = [0u8; 5];
        assert!(matches!(
            ClassWeight::Auto.resolve(&all_neg),
            Err(Error::Config(_))
        ));
        let all_pos = [1u8; 3];
        assert!(matches!(
            ClassWeight::Auto.resolve(&all_pos),
            Err(Error::Config(_))
        ));
        assert!(ClassWeight::Fixed(-1.0).resolve(&all_pos).is_err());
    }

    #[test]
    fn binary_matches_finite_differences() {
        let l = labels(4, &[1.5]);
        let x = [-1.0, 2.0, 0.0, 1.0];
        let r = binary_loss(&scores(&x), &l, ClassWeight::Fixed(3.0)).unwrap();
        let f = |v: &[f64]| {
            binary_loss(&scores(v), &l, ClassWeight::Fixed(3.0))
                .unwrap()
                .value
        };
        let fd = central_difference(f, &x, 1e-5);
        assert!(max_relative_error(&r.gradient, &fd) < 1e-6);
    }

    #[test]
    fn binary_saturates_without_nan() {
        let l = labels(3, &[1.5]);
        let r = binary_loss(
            &scores(&[-800.0, 800.0, -800.0]),
            &l,
            ClassWeight::Fixed(2.0),
        )
        .unwrap();
        assert!(r.value.is_finite() && r.value < 1e-12);
        let r = binary_loss(
            &scores(&[800.0, -800.0, 800.0]),
            &l,
            ClassWeight::Fixed(2.0),
        )
        .unwrap();
        assert!(r.value.is_finite() && r.value > 1000.0);
        assert!(r.gradient.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn binary_minimum_at_labels() {
        let l = labels(6, &[0.5, 4.1]);
        let x: Vec<f64> = l
            .marks()
            .iter()
            .map(|&m| if m == 1 { 20.0 } else { -20.0 })
            .collect();
        let r = binary_loss(&scores(&x), &l, ClassWeight::Auto).unwrap();
        assert!(r.value < 1e-6, "{}", r.value);
    }

    #[test]
    fn auto_weight_balances_classes_at_equal_probabilities() {
        let l = labels(10, &[2.5, 7.5]);
        let w = ClassWeight::Auto.resolve(l.marks()).unwrap();
        let pos = l.marks().iter().filter(|&&m| m == 1).count() as f64;
        let neg = 10.0 - pos;
        assert_relative_eq!(w * pos, neg, epsilon = 1e-12);
        // with logits 0, both terms contribute ln 2 per unit weight
        let r = binary_loss(&scores(&[0.0; 10]), &l, ClassWeight::Auto).unwrap();
        assert_relative_eq!(r.value, 2.0 * neg * std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn poisson_uniform_case() {
        let r = poisson_nll(&scores(&[0.0; 4]), &labels(4, &[1.5])).unwrap();
        assert_relative_eq!(r.value, 4f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(r.value, 1.3863, epsilon = 1e-4);
        assert_eq!(r.gradient, vec![0.25, -0.75, 0.25, 0.25]);
    }

    #[test]
    fn poisson_two_events() {
        let s = scores(&[2f64.ln(), 0.0, 0.0, 0.0]);
        let r = poisson_nll(&s, &labels(4, &[0.25, 2.5])).unwrap();
        // −(log 2 + log 1) + 2 log 5
        let expected = -(2f64.ln()) + 2.0 * 5f64.ln();
        assert_relative_eq!(r.value, expected, epsilon = 1e-12);
        assert_relative_eq!(r.value, 2.5258, epsilon = 1e-4);
    }

    #[test]
    fn poisson_rejects_empty_events() {
        let l = labels(4, &[]);
        assert!(matches!(
            poisson_nll(&scores(&[0.0; 4]), &l),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn poisson_shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let t = rng.random_range(1..40);
            let x: Vec<f64> = (0..t).map(|_| rng.random_range(-2.0..2.0)).collect();
            let n = rng.random_range(1..6);
            let ev: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..t as f64)).collect();
            let l = labels(t, &ev);
            let base = poisson_nll(&scores(&x), &l).unwrap();
            let c = rng.random_range(-5.0..5.0);
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let moved = poisson_nll(&scores(&shifted), &l).unwrap();
            assert!((base.value - moved.value).abs() < 1e-9);
            assert!(base.gradient.iter().sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn poisson_multiplicity_counts_each_event() {
        let l = labels(3, &[1.1, 1.6, 1.9]);
        let r = poisson_nll(&scores(&[0.0, 1.0, 0.0]), &l).unwrap();
        let total = 2.0 + 1f64.exp();
        assert_relative_eq!(r.value, -3.0 + 3.0 * total.ln(), epsilon = 1e-12);
        assert_relative_eq!(
            r.gradient[1],
            -3.0 + 3.0 * 1f64.exp() / total,
            epsilon = 1e-12
        );
    }

    #[test]
    fn poisson_clamps_extreme_scores() {
        let l = labels(3, &[0.5]);
        let r = poisson_nll(&scores(&[500.0, 0.0, -500.0]), &l).unwrap();
        assert!(r.value.is_finite());
        assert_eq!(r.gradient[0], 0.0);
        assert_eq!(r.gradient[2], 0.0);
    }

    #[test]
    fn interpolation_identity_and_arithmetic() {
        let a = LossResult {
            value: 1.0,
            gradient: vec![1.0, -2.0],
        };
        let b = LossResult {
            value: 2.0,
            gradient: vec![4.0, 8.0],
        };
        assert_eq!(interpolated_loss(&a, &b, 0.0).unwrap(), a);
        let r = interpolated_loss(&a, &b, 0.05).unwrap();
        assert_relative_eq!(r.value, 1.1, epsilon = 1e-15);
        assert_relative_eq!(r.gradient[0], 1.2, epsilon = 1e-15);
        let c = LossResult {
            value: 0.0,
            gradient: vec![0.0],
        };
        assert!(matches!(
            interpolated_loss(&a, &c, 1.0),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn interpolation_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let t = rng.random_range(2..16);
            let x: Vec<f64> = (0..t).map(|_| rng.random_range(-2.0..2.0)).collect();
            let ev = vec![rng.random_range(0.0..t as f64)];
            let l = labels(t, &ev);
            let coef = rng.random_range(0.0..2.0);
            let f = |v: &[f64]| {
                let s = scores(v);
                let a = binary_loss(&s, &l, ClassWeight::Fixed(2.0)).unwrap();
                let b = poisson_nll(&s, &l).unwrap();
                interpolated_loss(&a, &b, coef).unwrap().value
            };
            let s = scores(&x);
            let a = binary_loss(&s, &l, ClassWeight::Fixed(2.0)).unwrap();
            let b = poisson_nll(&s, &l).unwrap();
            let g = interpolated_loss(&a, &b, coef).unwrap().gradient;
            let fd = central_difference(f, &x, 1e-5);
            assert!(max_relative_error(&g, &fd) < 1e-6);
        }
    }

    #[test]
    fn log_density_uniform_single_event() {
        let l = labels(4, &[2.2]);
        let d = poisson_log_density(&scores(&[0.0; 4]), &l).unwrap();
        assert_relative_eq!(d, -(4f64.ln()), epsilon = 1e-12);
    }

    #[test]
    fn class_weight_serde_forms() {
        let w: ClassWeight = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(w, ClassWeight::Auto);
        let w: ClassWeight = serde_json::from_str("2.5").unwrap();
        assert_eq!(w, ClassWeight::Fixed(2.5));
        assert!(serde_json::from_str::<ClassWeight>("\"big\"").is_err());
        assert_eq!("auto".parse::<ClassWeight>().unwrap(), ClassWeight::Auto);
    }

    #[test]
    fn scores_reject_bad_input() {
        assert!(matches!(
            FrameScores::new(vec![0.0; 2], grid(3)),
            Err(Error::Shape(_))
        ));
        assert!(FrameScores::new(vec![0.0, f64::NAN], grid(2)).is_err());
    }
}
