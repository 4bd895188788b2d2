//! Exact Euclidean distance transform.
//!
//! Separable lower-envelope-of-parabolas construction (Felzenszwalb and
//! Huttenlocher): a column pass computes squared vertical distances, then a
//! row pass takes the lower envelope of the parabolas `(x - q)^2 + f(q)`.
//! Squared distances stay integral throughout, so results are exact.

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, Grid, ScalarField};

/// Marks a pixel with no zero in its column.
const NONE: u64 = u64::MAX;

/// Squared Euclidean distance from each pixel to the nearest `false` pixel.
pub fn squared_distance_to_zero(mask: &BinaryMask) -> Result<Grid<u64>> {
    if mask.all() {
        return Err(Error::AllOnes);
    }
    let (h, w) = mask.dims();
    let m = mask.data();

    // Column pass: squared distance to the nearest zero in the same column,
    // swept row by row with one running state per column.
    let mut column = vec![NONE; h * w];
    let mut last = vec![usize::MAX; w];
    for r in 0..h {
        let (row, out) = (&m[r * w..(r + 1) * w], &mut column[r * w..(r + 1) * w]);
        for c in 0..w {
            if !row[c] {
                last[c] = r;
            }
            if last[c] != usize::MAX {
                let d = (r - last[c]) as u64;
                out[c] = d * d;
            }
        }
    }
    let mut next = vec![usize::MAX; w];
    for r in (0..h).rev() {
        let (row, out) = (&m[r * w..(r + 1) * w], &mut column[r * w..(r + 1) * w]);
        for c in 0..w {
            if !row[c] {
                next[c] = r;
            }
            if next[c] != usize::MAX {
                let d = (next[c] - r) as u64;
                out[c] = out[c].min(d * d);
            }
        }
    }

    let mut out = vec![0u64; h * w];
    let mut sites = Vec::with_capacity(w);
    let mut starts = Vec::with_capacity(w);
    for r in 0..h {
        let row = &column[r * w..(r + 1) * w];
        lower_envelope(row, &mut out[r * w..(r + 1) * w], &mut sites, &mut starts);
    }
    Grid::from_vec(h, w, out)
}

/// Lower envelope of the parabolas `(x - q)^2 + f[q]` over the finite
/// entries of `f`, sampled at every `x`.
fn lower_envelope(f: &[u64], out: &mut [u64], sites: &mut Vec<usize>, starts: &mut Vec<f64>) {
    sites.clear();
    starts.clear();
    let key = |q: usize, fq: u64| (fq + (q * q) as u64) as f64;
    for (q, &fq) in f.iter().enumerate() {
        if fq == NONE {
            continue;
        }
        loop {
            let Some(&p) = sites.last() else {
                sites.push(q);
                starts.push(f64::NEG_INFINITY);
                break;
            };
            let s = (key(q, fq) - key(p, f[p])) / (2.0 * (q - p) as f64);
            if s <= *starts.last().expect("parallel stacks") {
                sites.pop();
                starts.pop();
            } else {
                sites.push(q);
                starts.push(s);
                break;
            }
        }
    }
    // Every row has a finite site: the column pass reaches some zero pixel.
    let mut k = 0;
    for (x, slot) in out.iter_mut().enumerate() {
        while k + 1 < sites.len() && starts[k + 1] < x as f64 {
            k += 1;
        }
        let q = sites[k];
        let dx = x.abs_diff(q) as u64;
        *slot = dx * dx + f[q];
    }
}

/// Exact Euclidean distance to the nearest zero pixel; zero pixels map to 0.
pub fn distance_to_zero(mask: &BinaryMask) -> Result<ScalarField> {
    Ok(squared_distance_to_zero(mask)?.map(|&d| (d as f64).sqrt() as f32))
}
