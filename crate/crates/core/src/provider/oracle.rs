use crate::edt::distance_to_zero;
use crate::error::{Error, Result};
use crate::fields::{center_field, foreground_boundary};
use crate::grid::{BinaryMask, PixelBox, ScalarField, VectorField};
use crate::resize::nearest_index;

use super::{FieldBundle, FieldProvider, Scene, CROP};

/// Perfect objectness: fields computed exactly from the scene's instance
/// masks clipped to the query box and resampled to the working crop.
#[derive(Debug, Clone)]
pub struct OracleProvider<'a> {
    scene: &'a Scene,
    min_pixels: usize,
}

impl<'a> OracleProvider<'a> {
    pub fn new(scene: &'a Scene) -> Self {
        OracleProvider {
            scene,
            min_pixels: 1,
        }
    }

    /// Clipped objects smaller than `min_pixels` (after resampling) do not
    /// count towards existence.
    pub fn with_min_pixels(mut self, min_pixels: usize) -> Self {
        self.min_pixels = min_pixels.max(1);
        self
    }

    pub fn scene(&self) -> &Scene {
        self.scene
    }

    /// Per-instance masks clipped to `bbox` and resampled to the crop,
    /// dropping instances with no pixel left. Keeps instance order.
    pub fn clipped_masks(&self, bbox: PixelBox) -> Vec<(usize, BinaryMask)> {
        let rows: Vec<usize> = (0..CROP)
            .map(|r| bbox.u1 + nearest_index(r, bbox.height(), CROP))
            .collect();
        let cols: Vec<usize> = (0..CROP)
            .map(|c| bbox.v1 + nearest_index(c, bbox.width(), CROP))
            .collect();
        let mut out = Vec::new();
        for (id, (mask, ibox)) in self
            .scene
            .instances()
            .iter()
            .zip(self.scene.bboxes())
            .enumerate()
        {
            if ibox.intersection(&bbox).is_none() {
                continue;
            }
            let clipped = BinaryMask::from_fn(CROP, CROP, |r, c| *mask.get(rows[r], cols[c]));
            if clipped.any() {
                out.push((id, clipped));
            }
        }
        out
    }
}

impl FieldProvider for OracleProvider<'_> {
    fn scene_size(&self) -> (usize, usize) {
        self.scene.size()
    }

    fn query(&self, bbox: PixelBox) -> Result<FieldBundle> {
        let (h, w) = self.scene.size();
        if !bbox.fits_in(h, w) {
            return Err(Error::Invalid(format!("{bbox:?} outside {h}x{w} scene")));
        }
        let objects = self.clipped_masks(bbox);
        if objects.is_empty() {
            return Ok(FieldBundle::empty());
        }
        let existence = if objects.iter().any(|(_, m)| m.count() >= self.min_pixels) {
            1.0
        } else {
            0.0
        };

        // Lowest instance id owns overlapping pixels.
        let mut owner: Vec<Option<usize>> = vec![None; CROP * CROP];
        for (k, (_, m)) in objects.iter().enumerate() {
            for (slot, &b) in owner.iter_mut().zip(m.data()) {
                if b && slot.is_none() {
                    *slot = Some(k);
                }
            }
        }

        let mut center = VectorField::filled(CROP, CROP, [0.0, 0.0]);
        let mut boundary = ScalarField::filled(CROP, CROP, 0.0);
        for (k, (_, m)) in objects.iter().enumerate() {
            let cf = center_field(m)?;
            let bf = foreground_boundary(m)?;
            for (i, o) in owner.iter().enumerate() {
                if *o == Some(k) {
                    center.data_mut()[i] = cf.data()[i];
                    boundary.data_mut()[i] = bf.data()[i];
                }
            }
        }

        let union = BinaryMask::from_vec(CROP, CROP, owner.iter().map(Option::is_some).collect())?;
        if !union.all() {
            let outside = distance_to_zero(&union.invert())?;
            let bg_max = outside.data().iter().cloned().fold(0.0f32, f32::max);
            for ((v, &u), &d) in boundary
                .data_mut()
                .iter_mut()
                .zip(union.data())
                .zip(outside.data())
            {
                if !u {
                    *v = -d / bg_max;
                }
            }
        }
        FieldBundle::new(existence, center, boundary)
    }
}
