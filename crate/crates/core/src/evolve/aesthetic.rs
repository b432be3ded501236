//! Optional layout penalties for model placements: how far each model's
//! count is from a target, and how far each placement's nearest same-model
//! neighbor is from a target spacing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::genome::Placement;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelTarget {
    #[serde(default)]
    pub count: Option<usize>,
    /// Desired distance from each placement to its nearest neighbor of the
    /// same model.
    #[serde(default)]
    pub nn_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AestheticConfig {
    pub weight_quantity: f64,
    pub weight_spacing: f64,
    /// Share of the sub-unit fitness band given to the penalty term; must be
    /// in `[0, 1)` so that constraint counts still dominate.
    pub share: f64,
    pub targets: BTreeMap<String, ModelTarget>,
}

impl Default for AestheticConfig {
    fn default() -> Self {
        AestheticConfig {
            weight_quantity: 0.0,
            weight_spacing: 0.0,
            share: 0.5,
            targets: BTreeMap::new(),
        }
    }
}

/// Non-negative penalty; zero when every target is hit exactly.
pub fn aesthetic_score(placements: &[Placement], config: &AestheticConfig) -> f64 {
    let mut penalty = 0.0;
    for (model, target) in &config.targets {
        let group: Vec<[f64; 2]> = placements.iter().filter(|p| &p.model == model).map(|p| p.pos).collect();
        if let Some(count) = target.count {
            penalty += config.weight_quantity * (group.len() as f64 - count as f64).abs();
        }
        if let (Some(want), true) = (target.nn_distance, group.len() >= 2) {
            let deviation: f64 = group
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let nearest = group
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
                        .fold(f64::INFINITY, f64::min);
                    (nearest - want).abs()
                })
                .sum();
            penalty += config.weight_spacing * deviation;
        }
    }
    penalty
}

/// Sub-unit term in `[0, 1)` blending the visibility shaping term with the
/// layout penalty.
pub fn blended_shaping(shaping: f64, penalty: f64, share: f64) -> f64 {
    (1.0 - share) * shaping + share / (1.0 + penalty) * (1.0 - f64::EPSILON)
}
