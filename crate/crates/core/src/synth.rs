//! Seeded synthetic scenes: instance masks of simple shapes placed by
//! rejection sampling, plus controlled adjacent pairs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edt::squared_distance_to_zero;
use crate::error::{Error, Result};
use crate::grid::{BinaryMask, PixelBox};
use crate::provider::Scene;

/// Placement attempts per object before giving up on it.
pub const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Rectangle,
    Disk,
    Ellipse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub scene_size: (usize, usize),
    /// Inclusive range of object counts.
    pub n_objects: (usize, usize),
    pub shapes: Vec<Shape>,
    /// Inclusive range of object extents (bounding-box sides) in pixels.
    pub size_range: (usize, usize),
    /// Minimum Euclidean distance between pixels of different objects;
    /// negative values allow contact and overlap.
    pub min_gap: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            scene_size: (256, 256),
            n_objects: (1, 1),
            shapes: vec![Shape::Rectangle, Shape::Disk, Shape::Ellipse],
            size_range: (24, 96),
            min_gap: 12,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let (h, w) = self.scene_size;
        let (lo, hi) = self.size_range;
        if h == 0 || w == 0 {
            return Err(Error::Invalid("scene size must be positive".into()));
        }
        if lo == 0 || lo > hi || hi > h.min(w) {
            return Err(Error::Invalid(format!(
                "size range {lo}..={hi} must be non-empty and fit in a {h}x{w} scene"
            )));
        }
        if self.n_objects.0 > self.n_objects.1 {
            return Err(Error::Invalid(format!(
                "object count range {:?} is empty",
                self.n_objects
            )));
        }
        if self.shapes.is_empty() {
            return Err(Error::Invalid("at least one shape is required".into()));
        }
        Ok(())
    }
}

/// A generated scene and how many requested objects could not be placed.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    pub scene: Scene,
    pub requested: usize,
    pub shortfall: usize,
}

/// Mask of `shape` filling the box `(top, left, height, width)`.
pub fn rasterize(
    shape: Shape,
    scene: (usize, usize),
    top: usize,
    left: usize,
    height: usize,
    width: usize,
) -> BinaryMask {
    let cr = top as f64 + (height as f64 - 1.0) / 2.0;
    let cc = left as f64 + (width as f64 - 1.0) / 2.0;
    let (ry, rx) = (height as f64 / 2.0, width as f64 / 2.0);
    let inside_box =
        |r: usize, c: usize| r >= top && r < top + height && c >= left && c < left + width;
    BinaryMask::from_fn(scene.0, scene.1, |r, c| {
        if !inside_box(r, c) {
            return false;
        }
        match shape {
            Shape::Rectangle => true,
            Shape::Disk | Shape::Ellipse => {
                let (dy, dx) = ((r as f64 - cr) / ry, (c as f64 - cc) / rx);
                dy * dy + dx * dx <= 1.0
            }
        }
    })
}

fn sample_shape(
    rng: &mut ChaCha8Rng,
    shapes: &[Shape],
    size: (usize, usize),
) -> (Shape, usize, usize) {
    let shape = *shapes.choose(rng).expect("shapes validated non-empty");
    let a = rng.gen_range(size.0..=size.1);
    let b = match shape {
        Shape::Disk => a,
        _ => rng.gen_range(size.0..=size.1),
    };
    (shape, a, b)
}

/// Places objects one at a time; each gets up to [`MAX_ATTEMPTS`] tries.
pub fn generate(config: &SynthConfig, id: impl Into<String>) -> Result<SynthScene> {
    config.validate()?;
    let (h, w) = config.scene_size;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let requested = rng.gen_range(config.n_objects.0..=config.n_objects.1);
    let mut masks: Vec<BinaryMask> = Vec::with_capacity(requested);
    let mut union = BinaryMask::filled(h, w, false);
    let mut shortfall = 0;
    let required = if config.min_gap >= 0 {
        config.min_gap.max(1) as u64
    } else {
        0
    };
    for _ in 0..requested {
        // squared distance of every pixel to the nearest placed object
        let clearance = if masks.is_empty() || required == 0 {
            None
        } else {
            Some(squared_distance_to_zero(&union.invert())?)
        };
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let (shape, oh, ow) = sample_shape(&mut rng, &config.shapes, config.size_range);
            let top = rng.gen_range(0..=h - oh);
            let left = rng.gen_range(0..=w - ow);
            let mask = rasterize(shape, (h, w), top, left, oh, ow);
            let ok = match &clearance {
                None => true,
                Some(d2) => mask
                    .data()
                    .iter()
                    .zip(d2.data())
                    .all(|(&m, &d)| !m || d >= required * required),
            };
            if ok {
                for (u, &m) in union.data_mut().iter_mut().zip(mask.data()) {
                    *u |= m;
                }
                masks.push(mask);
                placed = true;
                break;
            }
        }
        if !placed {
            shortfall += 1;
        }
    }
    Ok(SynthScene {
        scene: Scene::new(id, (h, w), masks)?,
        requested,
        shortfall,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdjacencyConfig {
    pub scene_size: (usize, usize),
    pub shapes: Vec<Shape>,
    pub size_range: (usize, usize),
    /// Inclusive range of background pixels between the two objects.
    pub gap_range: (usize, usize),
    pub seed: u64,
}

impl Default for AdjacencyConfig {
    fn default() -> Self {
        AdjacencyConfig {
            scene_size: (256, 256),
            shapes: vec![Shape::Rectangle, Shape::Disk, Shape::Ellipse],
            size_range: (48, 72),
            gap_range: (0, 4),
            seed: 0,
        }
    }
}

/// Where [`adjacency_pair`] put its objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairLayout {
    pub gap: usize,
    /// `true` when the objects sit side by side (separated along columns).
    pub horizontal: bool,
    /// Background band between the two object boxes (empty when `gap` is 0).
    pub gap_band: Option<PixelBox>,
}

/// Two same-shape, same-size objects whose boxes are `gap` pixels apart
/// along one axis, centered on a shared line at a random position.
pub fn adjacency_pair(
    config: &AdjacencyConfig,
    id: impl Into<String>,
) -> Result<(Scene, PairLayout)> {
    let (h, w) = config.scene_size;
    let (lo, hi) = config.size_range;
    if config.shapes.is_empty() || lo == 0 || lo > hi || config.gap_range.0 > config.gap_range.1 {
        return Err(Error::Invalid("invalid adjacency configuration".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (shape, oh, ow) = sample_shape(&mut rng, &config.shapes, config.size_range);
    let gap = rng.gen_range(config.gap_range.0..=config.gap_range.1);
    let horizontal = rng.gen_bool(0.5);
    let (span_h, span_w) = if horizontal {
        (oh, 2 * ow + gap)
    } else {
        (2 * oh + gap, ow)
    };
    if span_h > h || span_w > w {
        return Err(Error::Invalid(format!(
            "pair of {oh}x{ow} objects does not fit in {h}x{w}"
        )));
    }
    let top = rng.gen_range(0..=h - span_h);
    let left = rng.gen_range(0..=w - span_w);
    let (second_top, second_left) = if horizontal {
        (top, left + ow + gap)
    } else {
        (top + oh + gap, left)
    };
    let a = rasterize(shape, (h, w), top, left, oh, ow);
    let b = rasterize(shape, (h, w), second_top, second_left, oh, ow);
    let gap_band = (gap > 0).then(|| {
        if horizontal {
            PixelBox::new(top, left + ow, top + oh - 1, left + ow + gap - 1)
        } else {
            PixelBox::new(top + oh, left, top + oh + gap - 1, left + ow - 1)
        }
    });
    Ok((
        Scene::new(id, (h, w), vec![a, b])?,
        PairLayout {
            gap,
            horizontal,
            gap_band,
        },
    ))
}
