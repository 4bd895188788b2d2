//! Center reasoning: anti-center evidence for crowded objects and
//! connected-component splitting of the center field.

use crate::grid::{BinaryMask, Grid, PixelBox, ScalarField, VectorField};

/// 5×5 kernel of unit vectors; `kernel[i][j]` is the `(row, col)` vector of cell `(i, j)`.
pub type Kernel = [[[f32; 2]; 5]; 5];

/// Center-field vectors with at least this norm count as object support.
pub const SUPPORT_NORM: f32 = 0.5;

/// Half-width of the square structuring element used to find narrow gaps
/// between supports; gaps up to `2 * GAP_RADIUS` pixels wide are bridged.
pub const GAP_RADIUS: usize = 3;

/// `K[i][j] = ([2,2] - [i,j]) / |[2,2] - [i,j]|`, zero at the center cell.
///
/// Center-field vectors point from the object center to the pixel, so
/// vectors on two sides of a seam between adjacent objects both point into
/// the seam; this kernel scores that pattern positively.
pub fn anti_center_kernel() -> Kernel {
    let mut k = [[[0.0f32; 2]; 5]; 5];
    for (i, row) in k.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (di, dj) = (2.0 - i as f64, 2.0 - j as f64);
            let n = di.hypot(dj);
            if n > 0.0 {
                *cell = [(di / n) as f32, (dj / n) as f32];
            }
        }
    }
    k
}

/// Average of `dot(K[i][j], f^c[h+i-2, w+j-2])` over the 24 non-center
/// kernel cells, with zero padding outside the field. Values lie in `[-1, 1]`.
pub fn anti_center_raw(center: &VectorField) -> ScalarField {
    let k = anti_center_kernel();
    let (h, w) = center.dims();
    // zero-padded planar copies so every window is in bounds
    let (ph, pw) = (h + 4, w + 4);
    let mut ys = vec![0.0f32; ph * pw];
    let mut xs = vec![0.0f32; ph * pw];
    for (i, v) in center.data().iter().enumerate() {
        let at = (i / w + 2) * pw + i % w + 2;
        ys[at] = v[0];
        xs[at] = v[1];
    }
    let mut out = vec![0.0f32; h * w];
    for r in 0..h {
        for (i, krow) in k.iter().enumerate() {
            let base = (r + i) * pw;
            for (j, kv) in krow.iter().enumerate() {
                if i == 2 && j == 2 {
                    continue;
                }
                let (ky, kx) = (kv[0], kv[1]);
                let yrow = &ys[base + j..base + j + w];
                let xrow = &xs[base + j..base + j + w];
                for ((o, &y), &x) in out[r * w..(r + 1) * w].iter_mut().zip(yrow).zip(xrow) {
                    *o += ky * y + kx * x;
                }
            }
        }
    }
    for o in &mut out {
        *o = (*o / 24.0).clamp(-1.0, 1.0);
    }
    ScalarField::from_vec(h, w, out).expect("same dimensions")
}

/// Whether the cut on the start edge of `pixel`'s column (`vertical`) or
/// row leaves every supported object on one side. Wherever the field is
/// supported a little before and after the cut, the two vectors must both
/// point into it, as they do across a seam between adjacent objects; an
/// object straddling the cut shows parallel or diverging vectors instead.
pub fn cut_is_seam(center: &VectorField, pixel: (usize, usize), vertical: bool) -> bool {
    let (h, w) = center.dims();
    let (along, across, at) = if vertical {
        (h, w, pixel.1)
    } else {
        (w, h, pixel.0)
    };
    let (before, after) = (at.saturating_sub(2), (at + 1).min(across - 1));
    if before >= after {
        return true;
    }
    let axis = vertical as usize;
    let supported = |v: [f32; 2]| v[0] * v[0] + v[1] * v[1] >= SUPPORT_NORM * SUPPORT_NORM;
    (0..along).all(|t| {
        let (p, q) = if vertical {
            (*center.get(t, before), *center.get(t, after))
        } else {
            (*center.get(before, t), *center.get(after, t))
        };
        !(supported(p) && supported(q)) || (p[axis] > 0.0 && q[axis] < 0.0)
    })
}

pub fn support(center: &VectorField) -> BinaryMask {
    center.map(|v| v[0] * v[0] + v[1] * v[1] >= SUPPORT_NORM * SUPPORT_NORM)
}

/// Pixels whose anti-center value is ignored: support pixels with a 4-neighbor
/// outside the support (or outside the frame), and background pixels within
/// kernel reach of the support that do not lie in a narrow gap between
/// supports. A lone convex object therefore contributes no one-sided edge
/// response, while seams and gaps up to `2 * GAP_RADIUS` wide stay visible.
pub fn support_boundary(center: &VectorField) -> BinaryMask {
    let s = support(center);
    let (h, w) = s.dims();
    let closed = closing(&s, GAP_RADIUS);
    let near = dilate(&s, 2);
    let (sd, cd, nd) = (s.data(), closed.data(), near.data());
    let mut out = vec![false; h * w];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            out[i] = if sd[i] {
                let interior = r > 0
                    && r + 1 < h
                    && c > 0
                    && c + 1 < w
                    && sd[i - w]
                    && sd[i + w]
                    && sd[i - 1]
                    && sd[i + 1];
                !interior
            } else {
                nd[i] && !cd[i]
            };
        }
    }
    BinaryMask::from_vec(h, w, out).expect("same dimensions")
}

/// Anti-center map with [`support_boundary`] pixels set to -1.
pub fn anti_center_map(center: &VectorField) -> ScalarField {
    let mut map = anti_center_raw(center);
    let masked = support_boundary(center);
    for (v, &m) in map.data_mut().iter_mut().zip(masked.data()) {
        if m {
            *v = -1.0;
        }
    }
    map
}

/// Sliding max (dilate) or min (erode) along one axis with window `2r+1`;
/// pixels outside the frame count as background.
fn filter_1d(mask: &BinaryMask, r: usize, rows: bool, dilate: bool) -> BinaryMask {
    let (h, w) = mask.dims();
    let src = mask.data();
    let full = (2 * r + 1) as u32;
    let keep = |count: u32| if dilate { count > 0 } else { count == full };
    let mut out = vec![false; h * w];
    if rows {
        // prefix[t][c]: foreground count in rows < t of column c
        let mut prefix = vec![0u32; (h + 1) * w];
        for t in 0..h {
            let (done, rest) = prefix.split_at_mut((t + 1) * w);
            for ((p, &q), &m) in rest[..w]
                .iter_mut()
                .zip(&done[t * w..])
                .zip(&src[t * w..(t + 1) * w])
            {
                *p = q + m as u32;
            }
        }
        for t in 0..h {
            let hi = &prefix[(t + r + 1).min(h) * w..][..w];
            let lo = &prefix[t.saturating_sub(r) * w..][..w];
            for ((o, &a), &b) in out[t * w..(t + 1) * w].iter_mut().zip(hi).zip(lo) {
                *o = keep(a - b);
            }
        }
    } else {
        let mut prefix = vec![0u32; w + 1];
        for t in 0..h {
            let line = &src[t * w..(t + 1) * w];
            for (c, &m) in line.iter().enumerate() {
                prefix[c + 1] = prefix[c] + m as u32;
            }
            for (c, o) in out[t * w..(t + 1) * w].iter_mut().enumerate() {
                *o = keep(prefix[(c + r + 1).min(w)] - prefix[c.saturating_sub(r)]);
            }
        }
    }
    BinaryMask::from_vec(h, w, out).expect("same dimensions")
}

pub fn dilate(mask: &BinaryMask, r: usize) -> BinaryMask {
    filter_1d(&filter_1d(mask, r, true, true), r, false, true)
}

pub fn erode(mask: &BinaryMask, r: usize) -> BinaryMask {
    filter_1d(&filter_1d(mask, r, true, false), r, false, false)
}

/// Morphological closing with a `(2r+1)²` square.
pub fn closing(mask: &BinaryMask, r: usize) -> BinaryMask {
    erode(&dilate(mask, r), r)
}

/// 4-connected components of `mask`, as tight boxes in scan order of their
/// first pixel, together with their pixel counts.
pub fn connected_components(mask: &BinaryMask) -> Vec<(PixelBox, usize)> {
    let (h, w) = mask.dims();
    let mut label: Grid<bool> = Grid::filled(h, w, false);
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..h * w {
        if label.data()[start] || !mask.data()[start] {
            continue;
        }
        label.data_mut()[start] = true;
        stack.push(start);
        let (mut u1, mut v1, mut u2, mut v2) = (h, w, 0, 0);
        let mut count = 0;
        while let Some(i) = stack.pop() {
            let (r, c) = (i / w, i % w);
            count += 1;
            u1 = u1.min(r);
            u2 = u2.max(r);
            v1 = v1.min(c);
            v2 = v2.max(c);
            let mut visit = |j: usize| {
                if !label.data()[j] && mask.data()[j] {
                    label.data_mut()[j] = true;
                    stack.push(j);
                }
            };
            if r > 0 {
                visit(i - w);
            }
            if r + 1 < h {
                visit(i + w);
            }
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < w {
                visit(i + 1);
            }
        }
        out.push((PixelBox::new(u1, v1, u2, v2), count));
    }
    out
}

/// Outcome of center reasoning on one crop.
#[derive(Debug, Clone, PartialEq)]
pub enum CenterDecision {
    SingleObject,
    /// Split at this crop pixel `(row, col)`.
    SplitAt((usize, usize)),
    /// Pairwise-disjoint component boxes in crop coordinates.
    Components(Vec<PixelBox>),
}

/// Splits at the anti-center argmax when it exceeds `tau_c`; otherwise
/// separates pairwise-disjoint connected components of the support.
pub fn center_reasoning(center: &VectorField, tau_c: f64) -> CenterDecision {
    let map = anti_center_map(center);
    let mut best: Option<(usize, f32)> = None;
    for (i, &v) in map.data().iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    if let Some((i, v)) = best {
        if v as f64 > tau_c {
            return CenterDecision::SplitAt((i / map.width(), i % map.width()));
        }
    }
    let comps: Vec<PixelBox> = connected_components(&support(center))
        .into_iter()
        .map(|(b, _)| b)
        .collect();
    if comps.len() >= 2 {
        let disjoint = comps
            .iter()
            .enumerate()
            .all(|(i, a)| comps[i + 1..].iter().all(|b| a.intersection(b).is_none()));
        if disjoint {
            return CenterDecision::Components(comps);
        }
    }
    CenterDecision::SingleObject
}
