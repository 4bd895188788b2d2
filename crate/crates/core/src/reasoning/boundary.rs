//! Boundary reasoning: per-border box updates driven by the boundary field.

use crate::fields::gradient_norm;
use crate::grid::{PixelBox, ScalarField};
use crate::provider::CROP;

use super::proposal::ensure_min_size;
use super::ReasoningConfig;

/// Gradient norms below this are floored before dividing.
pub const GRADIENT_FLOOR: f64 = 1e-6;

/// Sub-pixel noise tolerated before an expansion rounds up to the next pixel.
const STEP_SLACK: f64 = 1e-4;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Gradient norm averaged separately over the soft foreground `σ(f^b)` and
/// soft background `1 - σ(f^b)`, then re-blended per pixel with the same
/// weights. When one soft region has (numerically) no mass, the other
/// region's mean is used everywhere.
pub fn averaged_gradient_norm(boundary: &ScalarField) -> ScalarField {
    let g = gradient_norm(boundary);
    let (mut wf, mut wb, mut gf, mut gb) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (&f, &n) in boundary.data().iter().zip(g.data()) {
        let s = sigmoid(f as f64);
        wf += s;
        wb += 1.0 - s;
        gf += s * n as f64;
        gb += (1.0 - s) * n as f64;
    }
    let fg_ok = wf >= 1e-9;
    let bg_ok = wb >= 1e-9;
    let fg_mean = if fg_ok { gf / wf } else { gb / wb };
    let bg_mean = if bg_ok { gb / wb } else { fg_mean };
    boundary.map(|&f| {
        let s = sigmoid(f as f64);
        (fg_mean * s + bg_mean * (1.0 - s)) as f32
    })
}

/// Border order used in step reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Border {
    Top,
    Left,
    Bottom,
    Right,
}

pub const BORDERS: [Border; 4] = [Border::Top, Border::Left, Border::Bottom, Border::Right];

/// Borders (in [`BORDERS`] order) that may contract but never expand.
pub type Frozen = [bool; 4];

pub const NONE_FROZEN: Frozen = [false; 4];

/// Raw (unadjusted) border steps in scene pixels; positive values expand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub raw: [f64; 4],
    /// Applied steps after the expansion/contraction adjustment.
    pub adjusted: [f64; 4],
}

impl StepReport {
    pub fn max_expansion(&self) -> f64 {
        self.raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_contraction(&self) -> f64 {
        self.raw
            .iter()
            .filter(|&&r| r < 0.0)
            .map(|r| -r)
            .fold(0.0, f64::max)
    }
}

/// Max of the boundary field along one border and the first pixel attaining it.
fn border_max(boundary: &ScalarField, border: Border) -> (f32, (usize, usize)) {
    let (h, w) = boundary.dims();
    let cells: Box<dyn Iterator<Item = (usize, usize)>> = match border {
        Border::Top => Box::new((0..w).map(|c| (0, c))),
        Border::Bottom => Box::new((0..w).map(move |c| (h - 1, c))),
        Border::Left => Box::new((0..h).map(|r| (r, 0))),
        Border::Right => Box::new((0..h).map(move |r| (r, w - 1))),
    };
    let mut best = (f32::NEG_INFINITY, (0, 0));
    for (r, c) in cells {
        let v = *boundary.get(r, c);
        if v > best.0 {
            best = (v, (r, c));
        }
    }
    best
}

/// Crop-pixel raw steps `max(f^b border) / AVG|grad f^b|` for the four borders.
pub fn raw_crop_steps(boundary: &ScalarField) -> [f64; 4] {
    let avg = averaged_gradient_norm(boundary);
    BORDERS.map(|b| {
        let (m, (r, c)) = border_max(boundary, b);
        let g = (*avg.get(r, c) as f64).max(GRADIENT_FLOOR);
        m as f64 / g
    })
}

/// One boundary-reasoning step for `bbox`. Expansions are scaled by
/// `1 + tau_adjust` and contractions by `1 - tau_adjust`; crop steps convert
/// to scene pixels with the box's per-axis scale. Expansions round up and
/// contractions round toward zero so the box always moves outward when asked.
pub fn boundary_update(
    bbox: PixelBox,
    boundary: &ScalarField,
    config: &ReasoningConfig,
    scene: (usize, usize),
) -> (PixelBox, StepReport) {
    boundary_update_frozen(bbox, boundary, config, scene, NONE_FROZEN)
}

/// [`boundary_update`] where frozen borders skip their expansions; their
/// adjusted step is reported as 0 in that case.
pub fn boundary_update_frozen(
    bbox: PixelBox,
    boundary: &ScalarField,
    config: &ReasoningConfig,
    scene: (usize, usize),
    frozen: Frozen,
) -> (PixelBox, StepReport) {
    let crop = raw_crop_steps(boundary);
    let sy = bbox.height() as f64 / CROP as f64;
    let sx = bbox.width() as f64 / CROP as f64;
    let raw = [crop[0] * sy, crop[1] * sx, crop[2] * sy, crop[3] * sx];
    let mut adjusted = raw.map(|r| r + config.tau_adjust * r.abs());
    for (a, &f) in adjusted.iter_mut().zip(&frozen) {
        if f && *a > 0.0 {
            *a = 0.0;
        }
    }
    let px = adjusted.map(|a| {
        if a > 0.0 {
            (a - STEP_SLACK).ceil()
        } else {
            a.trunc()
        }
    });

    let (h, w) = scene;
    let u1 = bbox.u1 as f64 - px[0];
    let v1 = bbox.v1 as f64 - px[1];
    let u2 = bbox.u2 as f64 + px[2];
    let v2 = bbox.v2 as f64 + px[3];
    let clamp = |x: f64, hi: usize| x.clamp(0.0, (hi - 1) as f64) as usize;
    let (mut a, mut b) = (clamp(u1, h), clamp(u2, h));
    let (mut c, mut d) = (clamp(v1, w), clamp(v2, w));
    // Opposite borders crossed: collapse onto the midpoint of the crossing.
    if a > b {
        let mid = ((u1 + u2) / 2.0).clamp(0.0, (h - 1) as f64) as usize;
        a = mid;
        b = mid;
    }
    if c > d {
        let mid = ((v1 + v2) / 2.0).clamp(0.0, (w - 1) as f64) as usize;
        c = mid;
        d = mid;
    }
    let next = ensure_min_size(PixelBox::new(a, c, b, d), scene);
    (next, StepReport { raw, adjusted })
}

/// No border wants to expand and no contraction reaches `shrink_margin`.
pub fn has_converged(report: &StepReport, config: &ReasoningConfig) -> bool {
    has_converged_frozen(report, config, NONE_FROZEN)
}

/// [`has_converged`] ignoring the expansion wishes of frozen borders.
pub fn has_converged_frozen(report: &StepReport, config: &ReasoningConfig, frozen: Frozen) -> bool {
    let expands = report
        .raw
        .iter()
        .zip(&frozen)
        .any(|(&r, &f)| !f && r >= 0.0);
    !expands && report.max_contraction() < config.shrink_margin
}
