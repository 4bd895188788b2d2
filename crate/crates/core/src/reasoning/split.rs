//! Mapping center-reasoning decisions from crop pixels back to scene boxes.

use crate::grid::PixelBox;
use crate::provider::CROP;

use super::boundary::Border;

/// Children smaller than this on either side are dropped.
const MIN_SIDE: usize = 2;

/// A cut closer than this many crop pixels to the parent's edge, the
/// anti-center kernel footprint, produces no children along its axis.
const MIN_CROP_EXTENT: usize = 5;

/// Scene coordinate of the start edge of crop pixel `t` along an axis that
/// starts at `lo` and spans `len` scene pixels.
fn edge(lo: usize, len: usize, t: usize) -> f64 {
    lo as f64 + t as f64 * len as f64 / CROP as f64
}

/// Left, right, upper and lower halves of `bbox` cut at crop pixel
/// `(row, col)`. The cut line sits on the pixel's start edge: the left child
/// ends just before it and the right child starts on it (rounded outward so
/// the children tile the parent). Children below 2×2 or equal to the parent
/// are dropped, and so is the pair along an axis where one of them is
/// thinner than the kernel footprint: the other is then nearly the parent.
pub fn split_at(bbox: PixelBox, pixel: (usize, usize)) -> Vec<PixelBox> {
    split_children(bbox, pixel)
        .into_iter()
        .map(|(_, b)| b)
        .collect()
}

/// [`split_at`] with the border of each child that lies on the cut line.
pub fn split_children(bbox: PixelBox, pixel: (usize, usize)) -> Vec<(Border, PixelBox)> {
    let y = edge(bbox.u1, bbox.height(), pixel.0);
    let x = edge(bbox.v1, bbox.width(), pixel.1);
    let left_end = x.ceil() as isize - 1;
    let right_start = x.floor() as usize;
    let upper_end = y.ceil() as isize - 1;
    let lower_start = y.floor() as usize;
    let mut out = Vec::with_capacity(4);
    if left_end >= bbox.v1 as isize {
        out.push((
            Border::Right,
            PixelBox::new(bbox.u1, bbox.v1, bbox.u2, left_end as usize),
        ));
    }
    out.push((
        Border::Left,
        PixelBox::new(bbox.u1, right_start, bbox.u2, bbox.v2),
    ));
    if upper_end >= bbox.u1 as isize {
        out.push((
            Border::Bottom,
            PixelBox::new(bbox.u1, bbox.v1, upper_end as usize, bbox.v2),
        ));
    }
    out.push((
        Border::Top,
        PixelBox::new(lower_start, bbox.v1, bbox.u2, bbox.v2),
    ));
    let thick = |len: usize, parent: usize| len * CROP >= MIN_CROP_EXTENT * parent;
    let cols_ok = thick(x.ceil() as usize - bbox.v1, bbox.width())
        && thick(bbox.v2 + 1 - right_start, bbox.width());
    let rows_ok = thick(y.ceil() as usize - bbox.u1, bbox.height())
        && thick(bbox.u2 + 1 - lower_start, bbox.height());
    out.retain(|(cut, b)| {
        let axis_ok = match cut {
            Border::Left | Border::Right => cols_ok,
            Border::Top | Border::Bottom => rows_ok,
        };
        axis_ok && b.height() >= MIN_SIDE && b.width() >= MIN_SIDE && *b != bbox
    });
    out
}

/// Scene box covering every scene pixel sampled by the crop box `comp`.
pub fn crop_box_to_scene(bbox: PixelBox, comp: PixelBox) -> PixelBox {
    let span = |lo: usize, len: usize, a: usize, b: usize| {
        let start = edge(lo, len, a).floor() as usize;
        let end = (edge(lo, len, b + 1).ceil() as usize)
            .saturating_sub(1)
            .max(start);
        (start, end.min(lo + len - 1))
    };
    let (u1, u2) = span(bbox.u1, bbox.height(), comp.u1, comp.u2);
    let (v1, v2) = span(bbox.v1, bbox.width(), comp.v1, comp.v2);
    PixelBox::new(u1, v1, u2, v2)
}

/// Scene boxes of connected components, deduplicated in order, without the parent itself.
pub fn component_boxes(bbox: PixelBox, comps: &[PixelBox], scene: (usize, usize)) -> Vec<PixelBox> {
    let mut out: Vec<PixelBox> = Vec::with_capacity(comps.len());
    for &c in comps {
        let b = super::proposal::ensure_min_size(crop_box_to_scene(bbox, c), scene);
        if b != bbox && !out.contains(&b) {
            out.push(b);
        }
    }
    out
}
