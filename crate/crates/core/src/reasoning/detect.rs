//! Turning converged proposals into masks, scores and a deduplicated list.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::box_iou;
use crate::grid::{BinaryMask, PixelBox};
use crate::provider::{FieldBundle, CROP};
use crate::resize::nearest_index;

use super::center::SUPPORT_NORM;

/// Factors whose product is the detection confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceParts {
    pub existence: f64,
    pub max_center_norm: f64,
    pub max_boundary: f64,
    pub area_factor: f64,
}

impl ConfidenceParts {
    pub fn product(&self) -> f64 {
        self.existence * self.max_center_norm * self.max_boundary * self.area_factor
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectedObject {
    pub bbox: PixelBox,
    pub mask: BinaryMask,
    pub confidence: f64,
    pub parts: ConfidenceParts,
    /// Boundary-update steps the proposal took before converging.
    pub iterations: usize,
    pub proposal_id: usize,
}

/// Crop-space mask `|f^c| ≥ 0.5 ∪ σ(f^b) ≥ 0.5`.
pub fn crop_mask(bundle: &FieldBundle) -> BinaryMask {
    BinaryMask::from_fn(CROP, CROP, |r, c| {
        let v = bundle.center.get(r, c);
        v[0] * v[0] + v[1] * v[1] >= SUPPORT_NORM * SUPPORT_NORM
            || *bundle.boundary.get(r, c) >= 0.0
    })
}

/// The crop mask resampled to the box extent and pasted into a scene-sized mask.
pub fn extract_mask(bundle: &FieldBundle, bbox: PixelBox, scene: (usize, usize)) -> BinaryMask {
    let crop = crop_mask(bundle);
    let (bh, bw) = (bbox.height(), bbox.width());
    let mut out = BinaryMask::filled(scene.0, scene.1, false);
    for r in 0..bh {
        let cr = nearest_index(r, CROP, bh);
        for c in 0..bw {
            if *crop.get(cr, nearest_index(c, CROP, bw)) {
                out.set(bbox.u1 + r, bbox.v1 + c, true);
            }
        }
    }
    out
}

/// Largest center-field norm (capped at 1: unit vectors stored as `f32`
/// can overshoot by rounding) and largest boundary value of a bundle.
pub fn field_maxima(bundle: &FieldBundle) -> (f64, f64) {
    let max_center_norm = bundle
        .center
        .data()
        .iter()
        .map(|v| (v[0] as f64 * v[0] as f64 + v[1] as f64 * v[1] as f64).sqrt())
        .fold(0.0, f64::max)
        .min(1.0);
    let max_boundary = bundle
        .boundary
        .data()
        .iter()
        .map(|&v| v as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    (max_center_norm, max_boundary)
}

/// Factors for a mask of `area` pixels when the largest mask in the scene has `max_area`.
pub fn confidence_parts(
    existence: f64,
    (max_center_norm, max_boundary): (f64, f64),
    area: usize,
    max_area: usize,
) -> Result<ConfidenceParts> {
    if area == 0 || max_area == 0 {
        return Err(Error::EmptyMask);
    }
    if area > max_area {
        return Err(Error::Invalid(format!(
            "area {area} exceeds the scene maximum {max_area}"
        )));
    }
    Ok(ConfidenceParts {
        existence,
        max_center_norm,
        max_boundary,
        area_factor: (area as f64 / max_area as f64).powf(0.25),
    })
}

/// `f^e · max|f^c| · max f^b · (area / max_area)^0.25`.
pub fn confidence(
    bundle: &FieldBundle,
    area: usize,
    max_area: usize,
) -> Result<(f64, ConfidenceParts)> {
    let parts = confidence_parts(
        bundle.existence as f64,
        field_maxima(bundle),
        area,
        max_area,
    )?;
    Ok((parts.product(), parts))
}

/// Greedy suppression in descending confidence; a detection is dropped when
/// its box IoU with an already kept one exceeds `iou_thr`. Ties keep input order.
pub fn nms(detections: Vec<DetectedObject>, iou_thr: f64) -> Vec<DetectedObject> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        detections[b]
            .confidence
            .total_cmp(&detections[a].confidence)
    });
    let mut keep: Vec<usize> = Vec::new();
    for i in order {
        let b = detections[i].bbox;
        if keep
            .iter()
            .all(|&k| box_iou(&detections[k].bbox, &b) <= iou_thr)
        {
            keep.push(i);
        }
    }
    let mut slots: Vec<Option<DetectedObject>> = detections.into_iter().map(Some).collect();
    keep.into_iter()
        .map(|i| slots[i].take().expect("kept once"))
        .collect()
}
