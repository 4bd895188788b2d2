//! Grid resampling between scene and crop resolutions.

use crate::grid::Grid;

/// Values that can be blended linearly, component-wise.
pub trait Lerp: Copy {
    fn lerp(a: Self, b: Self, t: f64) -> Self;
}

impl Lerp for f32 {
    #[inline]
    fn lerp(a: f32, b: f32, t: f64) -> f32 {
        (a as f64 + (b as f64 - a as f64) * t) as f32
    }
}

impl Lerp for [f32; 2] {
    #[inline]
    fn lerp(a: [f32; 2], b: [f32; 2], t: f64) -> [f32; 2] {
        [f32::lerp(a[0], b[0], t), f32::lerp(a[1], b[1], t)]
    }
}

/// Corner-aligned source coordinate of target index `t`.
fn aligned(t: usize, src: usize, dst: usize) -> f64 {
    if dst == 1 {
        (src - 1) as f64 / 2.0
    } else {
        t as f64 * (src - 1) as f64 / (dst - 1) as f64
    }
}

/// Bilinear interpolation with corner-aligned sampling; vectors are
/// interpolated per component without renormalization.
pub fn resize_bilinear<T: Lerp>(grid: &Grid<T>, height: usize, width: usize) -> Grid<T> {
    let (sh, sw) = grid.dims();
    Grid::from_fn(height, width, |r, c| {
        let y = aligned(r, sh, height);
        let x = aligned(c, sw, width);
        let (y0, x0) = (y.floor() as usize, x.floor() as usize);
        let (y1, x1) = ((y0 + 1).min(sh - 1), (x0 + 1).min(sw - 1));
        let (ty, tx) = (y - y0 as f64, x - x0 as f64);
        let top = T::lerp(*grid.get(y0, x0), *grid.get(y0, x1), tx);
        let bottom = T::lerp(*grid.get(y1, x0), *grid.get(y1, x1), tx);
        T::lerp(top, bottom, ty)
    })
}

/// Index of the source cell whose span contains the center of target cell `t`.
#[inline]
pub fn nearest_index(t: usize, src: usize, dst: usize) -> usize {
    (((2 * t + 1) * src) / (2 * dst)).min(src - 1)
}

/// Nearest-neighbor resampling; keeps binary masks binary.
pub fn resize_nearest<T: Clone>(grid: &Grid<T>, height: usize, width: usize) -> Grid<T> {
    let (sh, sw) = grid.dims();
    Grid::from_fn(height, width, |r, c| {
        grid.get(nearest_index(r, sh, height), nearest_index(c, sw, width))
            .clone()
    })
}
