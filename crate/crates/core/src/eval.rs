//! Class-agnostic COCO-style average precision and recall for boxes and masks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, PixelBox};

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub fn iou_thresholds() -> Vec<f64> {
    (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

/// Number of recall points used by the interpolated precision average.
pub const RECALL_POINTS: usize = 101;

/// IoU of two boxes with inclusive pixel extents.
pub fn box_iou(a: &PixelBox, b: &PixelBox) -> f64 {
    let inter = a.intersection(b).map_or(0, |i| i.area());
    inter as f64 / (a.area() + b.area() - inter) as f64
}

pub fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::Shape {
            expected: a.dims(),
            actual: b.dims(),
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        return Err(Error::EmptyUnion);
    }
    Ok(inter as f64 / union as f64)
}

/// Scores of one scene's detections and their IoUs with its ground truths
/// (`ious[d][g]`).
#[derive(Debug, Clone, PartialEq)]
pub struct SceneMatches {
    pub scores: Vec<f64>,
    pub ious: Vec<Vec<f64>>,
    pub num_gt: usize,
}

impl SceneMatches {
    pub fn new(scores: Vec<f64>, ious: Vec<Vec<f64>>, num_gt: usize) -> Result<Self> {
        if scores.len() != ious.len() || ious.iter().any(|row| row.len() != num_gt) {
            return Err(Error::Invalid(
                "IoU matrix does not match detection and ground-truth counts".into(),
            ));
        }
        Ok(SceneMatches {
            scores,
            ious,
            num_gt,
        })
    }

    /// Detection indices by descending score, ties in input order, cut to `max_dets`.
    pub fn ranked(&self, max_dets: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        order.truncate(max_dets);
        order
    }

    /// True-positive flags of the ranked detections at `threshold`: each
    /// detection takes the highest-IoU unmatched ground truth with IoU at
    /// least `threshold` (lowest index on ties).
    pub fn greedy_matches(&self, threshold: f64, max_dets: usize) -> Vec<(f64, bool)> {
        let mut taken = vec![false; self.num_gt];
        self.ranked(max_dets)
            .into_iter()
            .map(|d| {
                let mut best: Option<(usize, f64)> = None;
                for (g, &iou) in self.ious[d].iter().enumerate() {
                    if taken[g] || iou < threshold {
                        continue;
                    }
                    if best.is_none_or(|(_, b)| iou > b) {
                        best = Some((g, iou));
                    }
                }
                if let Some((g, _)) = best {
                    taken[g] = true;
                }
                (self.scores[d], best.is_some())
            })
            .collect()
    }
}

/// Interpolated average precision and final recall of pooled, scored
/// true-positive flags against `num_gt` ground truths. Both are 0 without
/// ground truth.
pub fn precision_recall_summary(mut flags: Vec<(f64, bool)>, num_gt: usize) -> (f64, f64) {
    if num_gt == 0 {
        return (0.0, 0.0);
    }
    // stable: pooled order (scene order, then rank) breaks score ties
    flags.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut precision = Vec::with_capacity(flags.len());
    let mut recall = Vec::with_capacity(flags.len());
    let mut tp = 0usize;
    for (i, &(_, hit)) in flags.iter().enumerate() {
        tp += hit as usize;
        precision.push(tp as f64 / (i + 1) as f64);
        recall.push(tp as f64 / num_gt as f64);
    }
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let mut sum = 0.0;
    for k in 0..RECALL_POINTS {
        let r = k as f64 / (RECALL_POINTS - 1) as f64;
        let idx = recall.partition_point(|&x| x < r);
        if idx < precision.len() {
            sum += precision[idx];
        }
    }
    (
        sum / RECALL_POINTS as f64,
        recall.last().copied().unwrap_or(0.0),
    )
}

/// Metric values for one representation (boxes or masks).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub ap: f64,
    pub ap50: f64,
    pub ap75: f64,
    pub ar100: f64,
}

impl Metrics {
    pub fn values(&self) -> [(&'static str, f64); 4] {
        [
            ("AP", self.ap),
            ("AP50", self.ap50),
            ("AP75", self.ap75),
            ("AR100", self.ar100),
        ]
    }
}

/// AP per threshold, their mean, and mean recall with at most `max_dets`
/// detections per scene.
pub fn evaluate_matches(scenes: &[SceneMatches], thresholds: &[f64], max_dets: usize) -> Metrics {
    let num_gt: usize = scenes.iter().map(|s| s.num_gt).sum();
    let mut aps = Vec::with_capacity(thresholds.len());
    let mut recalls = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let flags: Vec<(f64, bool)> = scenes
            .iter()
            .flat_map(|s| s.greedy_matches(t, max_dets))
            .collect();
        let (ap, rec) = precision_recall_summary(flags, num_gt);
        aps.push(ap);
        recalls.push(rec);
    }
    let at = |target: f64| {
        thresholds
            .iter()
            .position(|&t| (t - target).abs() < 1e-9)
            .map_or(f64::NAN, |i| aps[i])
    };
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    Metrics {
        ap: mean(&aps),
        ap50: at(0.5),
        ap75: at(0.75),
        ar100: mean(&recalls),
    }
}

/// A scored detection as seen by the evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredInstance {
    pub bbox: PixelBox,
    pub mask: BinaryMask,
    pub score: f64,
}

/// Ground truth of one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub bbox: PixelBox,
    pub mask: BinaryMask,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub bbox: Metrics,
    pub mask: Metrics,
}

impl Report {
    /// Flat `name → value` view, e.g. `AP50_box`.
    pub fn flat(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for (suffix, m) in [("box", &self.bbox), ("mask", &self.mask)] {
            for (name, v) in m.values() {
                out.insert(format!("{name}_{suffix}"), v);
            }
        }
        out
    }
}

/// Box and mask metrics over scenes given as `(detections, ground truths)` pairs.
pub fn evaluate(
    scenes: &[(Vec<ScoredInstance>, Vec<GroundTruth>)],
    max_dets: usize,
) -> Result<Report> {
    let thresholds = iou_thresholds();
    let mut boxes = Vec::with_capacity(scenes.len());
    let mut masks = Vec::with_capacity(scenes.len());
    for (dets, gts) in scenes {
        let scores: Vec<f64> = dets.iter().map(|d| d.score).collect();
        let box_ious = dets
            .iter()
            .map(|d| gts.iter().map(|g| box_iou(&d.bbox, &g.bbox)).collect())
            .collect();
        let mask_ious = dets
            .iter()
            .map(|d| {
                gts.iter()
                    .map(|g| mask_iou(&d.mask, &g.mask))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        boxes.push(SceneMatches::new(scores.clone(), box_ious, gts.len())?);
        masks.push(SceneMatches::new(scores, mask_ious, gts.len())?);
    }
    Ok(Report {
        bbox: evaluate_matches(&boxes, &thresholds, max_dets),
        mask: evaluate_matches(&masks, &thresholds, max_dets),
    })
}
