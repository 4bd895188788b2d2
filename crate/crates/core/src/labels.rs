//! Pseudo-label selection: thresholding detections on their confidence parts
//! and weighting the survivors by relative mask area.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{from_json, to_json, write_text, DetectionRecord};
use crate::reasoning::{ConfidenceParts, DetectedObject};

/// Which detections set the area normalizer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalizer {
    /// Largest mask among the selected detections.
    #[default]
    Selected,
    /// Largest mask among all detections of the scene.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelSelectionConfig {
    pub tau_e_conf: f64,
    pub tau_c_conf: f64,
    pub tau_b_conf: f64,
    pub normalizer: Normalizer,
}

impl Default for LabelSelectionConfig {
    fn default() -> Self {
        LabelSelectionConfig {
            tau_e_conf: 0.5,
            tau_c_conf: 0.8,
            tau_b_conf: 0.75,
            normalizer: Normalizer::Selected,
        }
    }
}

impl LabelSelectionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau_e_conf", self.tau_e_conf),
            ("tau_c_conf", self.tau_c_conf),
            ("tau_b_conf", self.tau_b_conf),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Invalid(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn accepts(&self, parts: &ConfidenceParts) -> bool {
        parts.existence >= self.tau_e_conf
            && parts.max_center_norm >= self.tau_c_conf
            && parts.max_boundary >= self.tau_b_conf
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLabel {
    pub detection: DetectedObject,
    /// `(area / max_area)^0.25`, in (0, 1].
    pub weight: f64,
}

/// Detections of one scene that pass all three thresholds, in input order,
/// with their area weights. Detections with empty masks are never selected.
pub fn select(
    detections: &[DetectedObject],
    config: &LabelSelectionConfig,
) -> Result<Vec<WeightedLabel>> {
    config.validate()?;
    let kept: Vec<&DetectedObject> = detections
        .iter()
        .filter(|d| config.accepts(&d.parts) && d.mask.any())
        .collect();
    let pool: Box<dyn Iterator<Item = &DetectedObject>> = match config.normalizer {
        Normalizer::Selected => Box::new(kept.iter().copied()),
        Normalizer::All => Box::new(detections.iter()),
    };
    let max_area = pool.map(|d| d.mask.count()).max().unwrap_or(0);
    Ok(kept
        .into_iter()
        .map(|d| WeightedLabel {
            weight: (d.mask.count() as f64 / max_area as f64).powf(0.25),
            detection: d.clone(),
        })
        .collect())
}

pub fn labels_to_string(scene_id: &str, labels: &[WeightedLabel]) -> String {
    let records: Vec<DetectionRecord> = labels
        .iter()
        .map(|l| DetectionRecord {
            weight: Some(l.weight),
            ..DetectionRecord::from_detection(scene_id, &l.detection)
        })
        .collect();
    to_json(&records)
}

pub fn export(path: &Path, scene_id: &str, labels: &[WeightedLabel]) -> Result<()> {
    write_text(path, &labels_to_string(scene_id, labels))
}

/// Inverse of [`labels_to_string`]: `(scene id, label)` pairs in file order.
pub fn parse_labels(text: &str, origin: &str) -> Result<Vec<(String, WeightedLabel)>> {
    let records: Vec<DetectionRecord> = from_json(text, origin)?;
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let weight = r
                .weight
                .ok_or_else(|| Error::parse(origin, format!("record {i} has no weight")))?;
            Ok((
                r.scene_id.clone(),
                WeightedLabel {
                    detection: r.to_detection()?,
                    weight,
                },
            ))
        })
        .collect()
}
