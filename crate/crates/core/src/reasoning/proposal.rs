use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::PixelBox;

use super::ReasoningConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposalState {
    Pending,
    Discarded,
    Split,
    Converged,
}

/// A candidate box tracked in scene coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub id: usize,
    pub parent_id: Option<usize>,
    pub bbox: PixelBox,
    pub iteration: usize,
    pub state: ProposalState,
}

impl Proposal {
    pub fn new(id: usize, parent_id: Option<usize>, bbox: PixelBox) -> Self {
        Proposal {
            id,
            parent_id,
            bbox,
            iteration: 0,
            state: ProposalState::Pending,
        }
    }
}

/// Box of side `s·sqrt(r)` by `s/sqrt(r)` centered on a real-valued anchor,
/// clamped to the scene and widened to at least 2×2 where the scene allows.
pub fn anchor_box(center: (f64, f64), scale: f64, ratio: f64, scene: (usize, usize)) -> PixelBox {
    let (h, w) = scene;
    let half_h = scale * ratio.sqrt() / 2.0;
    let half_w = scale / ratio.sqrt() / 2.0;
    let b = PixelBox::clamped(
        center.0 - half_h,
        center.1 - half_w,
        center.0 + half_h - 1.0,
        center.1 + half_w - 1.0,
        h,
        w,
    );
    ensure_min_size(b, scene)
}

/// Grows a box to 2×2 (when the scene is large enough) keeping it inside the scene.
pub(crate) fn ensure_min_size(b: PixelBox, scene: (usize, usize)) -> PixelBox {
    let grow = |lo: usize, hi: usize, limit: usize| -> (usize, usize) {
        if hi > lo || limit < 2 {
            (lo, hi)
        } else if hi + 1 < limit {
            (lo, hi + 1)
        } else {
            (lo - 1, hi)
        }
    };
    let (u1, u2) = grow(b.u1, b.u2, scene.0);
    let (v1, v2) = grow(b.v1, b.v2, scene.1);
    PixelBox::new(u1, v1, u2, v2)
}

/// Anchor centers for one scale: a stride-`s` grid with seeded uniform
/// jitter of up to `jitter·s` per axis, clamped inside the scene.
pub fn anchor_centers(
    scene: (usize, usize),
    scale: f64,
    jitter: f64,
    rng: &mut impl Rng,
) -> Vec<(f64, f64)> {
    let (h, w) = scene;
    let rows = (h as f64 / scale).ceil().max(1.0) as usize;
    let cols = (w as f64 / scale).ceil().max(1.0) as usize;
    let amp = jitter * scale;
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut cr = (i as f64 + 0.5) * scale;
            let mut cc = (j as f64 + 0.5) * scale;
            if amp > 0.0 {
                cr += rng.gen_range(-amp..=amp);
                cc += rng.gen_range(-amp..=amp);
            }
            out.push((cr.clamp(0.0, (h - 1) as f64), cc.clamp(0.0, (w - 1) as f64)));
        }
    }
    out
}

/// Initial proposals over all scales and aspect ratios, deduplicated in
/// generation order. Deterministic for a given seed.
pub fn generate_initial_proposals(
    scene: (usize, usize),
    config: &ReasoningConfig,
) -> Vec<Proposal> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for &scale in &config.scales {
        for center in anchor_centers(scene, scale, config.jitter, &mut rng) {
            for &ratio in &config.aspect_ratios {
                let b = anchor_box(center, scale, ratio, scene);
                if seen.insert(b) {
                    out.push(Proposal::new(out.len(), None, b));
                }
            }
        }
    }
    out
}
