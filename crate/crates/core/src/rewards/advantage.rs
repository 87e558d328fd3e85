use serde::{Deserialize, Serialize};

use super::RewardError;

pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageGroup {
    pub rewards: Vec<f64>,
    pub advantages: Vec<f64>,
    pub epsilon: f64,
}

/// Group-normalized advantages `(r_i - mean) / std` with the population
/// standard deviation. The divisor is floored at `epsilon`, so an
/// all-equal group yields zeros.
pub fn grpo_advantages(rewards: &[f64], epsilon: f64) -> Result<AdvantageGroup, RewardError> {
    if rewards.len() < 2 {
        return Err(RewardError::GroupTooSmall(rewards.len()));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(RewardError::InvalidEpsilon(epsilon));
    }
    if let Some(&bad) = rewards.iter().find(|r| !r.is_finite()) {
        return Err(RewardError::NonFiniteReward(bad));
    }
    // The rounded mean of identical values can miss them by an ulp, which
    // the epsilon floor would blow up into a spurious advantage.
    if rewards.iter().all(|&r| r == rewards[0]) {
        return Ok(AdvantageGroup {
            rewards: rewards.to_vec(),
            advantages: vec![0.0; rewards.len()],
            epsilon,
        });
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let denom = var.sqrt().max(epsilon);
    Ok(AdvantageGroup {
        rewards: rewards.to_vec(),
        advantages: rewards.iter().map(|r| (r - mean) / denom).collect(),
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adv(r: &[f64]) -> Vec<f64> {
        grpo_advantages(r, DEFAULT_EPSILON).unwrap().advantages
    }

    #[test]
    fn worked_group() {
        let a = adv(&[2.0, 1.0, 1.0, 0.0]);
        let s = std::f64::consts::SQRT_2;
        for (x, y) in a.iter().zip([s, 0.0, 0.0, -s]) {
            assert!((x - y).abs() < 1e-7, "{a:?}");
        }
    }

    #[test]
    fn constant_group_is_zero() {
        assert_eq!(adv(&[1.0, 1.0, 1.0, 1.0]), vec![0.0; 4]);
        // (3x)/3 != x for this x; the mean must not leak an ulp through the epsilon floor.
        let x = 94.430_801;
        assert_eq!(adv(&[x, x, x]), vec![0.0; 3]);
    }

    #[test]
    fn two_point_group() {
        let a = adv(&[0.0, 1.0]);
        assert!((a[0] + 1.0).abs() < 1e-7 && (a[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn errors() {
        assert_eq!(grpo_advantages(&[1.0], 1e-8), Err(RewardError::GroupTooSmall(1)));
        assert_eq!(grpo_advantages(&[], 1e-8), Err(RewardError::GroupTooSmall(0)));
        assert!(matches!(grpo_advantages(&[1.0, f64::NAN], 1e-8), Err(RewardError::NonFiniteReward(_))));
        assert_eq!(grpo_advantages(&[1.0, 2.0], 0.0), Err(RewardError::InvalidEpsilon(0.0)));
    }
}
