//! Object-centric representations computed from a binary instance mask:
//! signed distance, the separately normalized boundary distance field, the
//! unit center field, and helpers around them.

use crate::edt::distance_to_zero;
use crate::error::{Error, Result};
use crate::grid::{BinaryMask, PixelBox, ScalarField, VectorField};

/// Center-field vectors whose offset from the center is shorter than this are zero.
pub const CENTER_EPS: f64 = 1e-9;

/// `+d` inside the mask, `-d` outside, where `d` is the distance to the
/// nearest pixel of the opposite class.
pub fn signed_distance(mask: &BinaryMask) -> Result<ScalarField> {
    if !mask.any() || mask.all() {
        return Err(Error::DegenerateMask);
    }
    let inside = distance_to_zero(mask)?;
    let outside = distance_to_zero(&mask.invert())?;
    let mut out = inside;
    for (s, &o) in out.data_mut().iter_mut().zip(outside.data()) {
        *s -= o;
    }
    Ok(out)
}

/// Signed distance with the foreground divided by its maximum and the
/// background divided by the magnitude of its minimum, so values span
/// `[-1, 1]` with `+1` at the innermost pixel and `-1` at the farthest
/// background pixel.
///
/// An all-foreground mask has no zero pixel; its distances are then measured
/// to the nearest pixel outside the frame.
pub fn boundary_field(mask: &BinaryMask) -> Result<ScalarField> {
    if !mask.any() {
        return Err(Error::EmptyMask);
    }
    if mask.all() {
        return foreground_boundary(mask);
    }
    let mut out = foreground_boundary(mask)?;
    let outside = distance_to_zero(&mask.invert())?;
    let bg_max = outside.data().iter().cloned().fold(0.0f32, f32::max);
    for ((v, &m), &o) in out
        .data_mut()
        .iter_mut()
        .zip(mask.data())
        .zip(outside.data())
    {
        if !m {
            *v = -o / bg_max;
        }
    }
    Ok(out)
}

/// Foreground half of [`boundary_field`]: interior distance over its maximum
/// on the foreground, zero on the background.
pub fn foreground_boundary(mask: &BinaryMask) -> Result<ScalarField> {
    if !mask.any() {
        return Err(Error::EmptyMask);
    }
    let inside = if mask.all() {
        let (h, w) = mask.dims();
        ScalarField::from_fn(h, w, |r, c| (r + 1).min(h - r).min(c + 1).min(w - c) as f32)
    } else {
        distance_to_zero(mask)?
    };
    let max = inside.data().iter().cloned().fold(0.0f32, f32::max);
    Ok(inside.map(|&d| d / max))
}

/// Unit vectors `([h, w] - center) / norm` on the foreground, where the
/// center is the midpoint of the tightest bounding box. Background pixels
/// and a pixel sitting on the center carry `(0, 0)`.
pub fn center_field(mask: &BinaryMask) -> Result<VectorField> {
    let bbox = tightest_bbox(mask)?;
    let (ch, cw) = bbox.center();
    Ok(VectorField::from_fn(mask.height(), mask.width(), |r, c| {
        if !*mask.get(r, c) {
            return [0.0, 0.0];
        }
        let (dh, dw) = (r as f64 - ch, c as f64 - cw);
        let n = (dh * dh + dw * dw).sqrt();
        if n < CENTER_EPS {
            [0.0, 0.0]
        } else {
            [(dh / n) as f32, (dw / n) as f32]
        }
    }))
}

/// Central-difference gradient `(d/drow, d/dcol)` with unit spacing;
/// one-sided differences on the border.
pub fn gradient(field: &ScalarField) -> VectorField {
    let (h, w) = field.dims();
    let at = |r: usize, c: usize| *field.get(r, c) as f64;
    let diff = |lo: f64, hi: f64, span: usize| {
        if span == 0 {
            0.0
        } else {
            (hi - lo) / span as f64
        }
    };
    VectorField::from_fn(h, w, |r, c| {
        let (r0, r1) = (r.saturating_sub(1), (r + 1).min(h - 1));
        let (c0, c1) = (c.saturating_sub(1), (c + 1).min(w - 1));
        [
            diff(at(r0, c), at(r1, c), r1 - r0) as f32,
            diff(at(r, c0), at(r, c1), c1 - c0) as f32,
        ]
    })
}

/// Norm of [`gradient`] at every pixel.
pub fn gradient_norm(field: &ScalarField) -> ScalarField {
    gradient(field).map(|g| (g[0] as f64 * g[0] as f64 + g[1] as f64 * g[1] as f64).sqrt() as f32)
}

/// Recovers the maximum interior distance of the object from the boundary
/// field at one foreground pixel: `1 / |grad f^b|`.
pub fn recover_max_distance(field: &ScalarField, pixel: (usize, usize)) -> Result<f64> {
    let (h, w) = field.dims();
    let (r, c) = pixel;
    if r == 0 || c == 0 || r + 1 >= h || c + 1 >= w {
        return Err(Error::Invalid(format!(
            "pixel {pixel:?} is on the field border"
        )));
    }
    if *field.get(r, c) <= 0.0 {
        return Err(Error::Invalid(format!(
            "pixel {pixel:?} is not inside the object"
        )));
    }
    let gr = (*field.get(r + 1, c) as f64 - *field.get(r - 1, c) as f64) / 2.0;
    let gc = (*field.get(r, c + 1) as f64 - *field.get(r, c - 1) as f64) / 2.0;
    let norm = gr.hypot(gc);
    if norm < 1e-9 {
        return Err(Error::ZeroGradient { row: r, col: c });
    }
    Ok(1.0 / norm)
}

/// Minimal box containing every foreground pixel.
pub fn tightest_bbox(mask: &BinaryMask) -> Result<PixelBox> {
    let mut bounds: Option<(usize, usize, usize, usize)> = None;
    for ((r, c), _) in mask.indexed().filter(|(_, &b)| b) {
        bounds = Some(match bounds {
            None => (r, c, r, c),
            Some((u1, v1, u2, v2)) => (u1.min(r), v1.min(c), u2.max(r), v2.max(c)),
        });
    }
    let (u1, v1, u2, v2) = bounds.ok_or(Error::EmptyMask)?;
    Ok(PixelBox::new(u1, v1, u2, v2))
}

/// Largest of the four full-width/full-height strips above, below, left of
/// and right of `object`; ties resolve in that order.
pub fn negative_twin_crop(image_size: (usize, usize), object: PixelBox) -> Result<PixelBox> {
    let (h, w) = image_size;
    if !object.fits_in(h, w) {
        return Err(Error::Invalid(format!("{object:?} outside {h}x{w} image")));
    }
    let candidates = [
        (object.u1 > 0).then(|| PixelBox::new(0, 0, object.u1 - 1, w - 1)),
        (object.u2 + 1 < h).then(|| PixelBox::new(object.u2 + 1, 0, h - 1, w - 1)),
        (object.v1 > 0).then(|| PixelBox::new(0, 0, h - 1, object.v1 - 1)),
        (object.v2 + 1 < w).then(|| PixelBox::new(0, object.v2 + 1, h - 1, w - 1)),
    ];
    let mut best: Option<PixelBox> = None;
    for cand in candidates.into_iter().flatten() {
        if best.is_none_or(|b| cand.area() > b.area()) {
            best = Some(cand);
        }
    }
    best.ok_or(Error::NoBackground)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edt::squared_distance_to_zero;
    use rand::{Rng, SeedableRng};

    fn square_5x5() -> BinaryMask {
        BinaryMask::from_fn(5, 5, |r, c| (1..=3).contains(&r) && (1..=3).contains(&c))
    }

    pub(crate) fn disk(size: usize, radius: f64) -> BinaryMask {
        let c = (size as f64 - 1.0) / 2.0;
        BinaryMask::from_fn(size, size, |r, col| {
            (r as f64 - c).hypot(col as f64 - c) <= radius
        })
    }

    fn random_blob(rng: &mut impl Rng, size: usize) -> BinaryMask {
        let (cr, cc) = (
            rng.gen_range(4.0..size as f64 - 4.0),
            rng.gen_range(4.0..size as f64 - 4.0),
        );
        let (a, b) = (rng.gen_range(2.0..10.0), rng.gen_range(2.0..10.0));
        let noise: Vec<bool> = (0..size * size).map(|_| rng.gen_bool(0.05)).collect();
        BinaryMask::from_fn(size, size, |r, c| {
            let e = ((r as f64 - cr) / a).powi(2) + ((c as f64 - cc) / b).powi(2) <= 1.0;
            e || noise[r * size + c]
        })
    }

    fn brute_signed(mask: &BinaryMask, r: usize, c: usize) -> f64 {
        let me = *mask.get(r, c);
        let best = mask
            .indexed()
            .filter(|(_, &b)| b != me)
            .map(|((r0, c0), _)| (r.abs_diff(r0).pow(2) + c.abs_diff(c0).pow(2)) as f64)
            .fold(f64::INFINITY, f64::min)
            .sqrt();
        if me {
            best
        } else {
            -best
        }
    }

    #[test]
    fn signed_distance_of_centered_square() {
        let s = signed_distance(&square_5x5()).unwrap();
        assert_eq!(*s.get(2, 2), 2.0);
        assert_eq!(*s.get(1, 1), 1.0);
        assert!((*s.get(0, 0) as f64 + 2f64.sqrt()).abs() < 1e-6);
        let m = square_5x5();
        for ((r, c), &v) in s.indexed() {
            assert!((v as f64 - brute_signed(&m, r, c)).abs() < 1e-6);
            assert_eq!(v > 0.0, *m.get(r, c));
        }
    }

    #[test]
    fn signed_distance_single_pixel() {
        let mut m = BinaryMask::filled(3, 3, false);
        m.set(1, 1, true);
        let s = signed_distance(&m).unwrap();
        assert_eq!(*s.get(1, 1), 1.0);
        for ((r, c), &v) in s.indexed().filter(|(p, _)| *p != (1, 1)) {
            let d = ((r as f64 - 1.0).powi(2) + (c as f64 - 1.0).powi(2)).sqrt();
            assert!((v as f64 + d).abs() < 1e-6);
        }
    }

    #[test]
    fn signed_distance_rejects_degenerate() {
        assert!(matches!(
            signed_distance(&BinaryMask::filled(3, 3, true)),
            Err(Error::DegenerateMask)
        ));
        assert!(matches!(
            signed_distance(&BinaryMask::filled(3, 3, false)),
            Err(Error::DegenerateMask)
        ));
    }

    #[test]
    fn boundary_field_of_centered_square() {
        let f = boundary_field(&square_5x5()).unwrap();
        assert_eq!(*f.get(2, 2), 1.0);
        assert_eq!(*f.get(1, 1), 0.5);
        assert!((*f.get(0, 0) + 1.0).abs() < 1e-6);
    }

    #[test]
    fn boundary_field_single_pixel_and_full_mask() {
        let mut m = BinaryMask::filled(3, 3, false);
        m.set(1, 1, true);
        assert_eq!(*boundary_field(&m).unwrap().get(1, 1), 1.0);

        let full = boundary_field(&BinaryMask::filled(5, 7, true)).unwrap();
        assert_eq!(*full.get(2, 3), 1.0);
        assert!(full.data().iter().all(|&v| v > 0.0 && v <= 1.0));
        assert!(matches!(
            boundary_field(&BinaryMask::filled(2, 2, false)),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn boundary_field_is_radially_monotone_on_disk() {
        let m = disk(64, 20.0);
        let f = boundary_field(&m).unwrap();
        let c = 31.5f64;
        // rays from the boundary inward along the eight compass directions
        for (dr, dc) in [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (-1, -1),
            (1, -1),
            (-1, 1),
        ] {
            let mut prev = f32::INFINITY;
            for step in 0..=20 {
                let r = (c + (dr * step) as f64).round() as usize;
                let col = (c + (dc * step) as f64).round() as usize;
                if !*m.get(r, col) {
                    break;
                }
                let v = *f.get(r, col);
                assert!(v <= prev, "not monotone along ({dr},{dc}) at step {step}");
                prev = v;
            }
        }
    }

    #[test]
    fn center_field_on_bar() {
        let m = BinaryMask::from_fn(3, 3, |r, _| r == 1);
        let f = center_field(&m).unwrap();
        assert_eq!(*f.get(1, 0), [0.0, -1.0]);
        assert_eq!(*f.get(1, 1), [0.0, 0.0]);
        assert_eq!(*f.get(1, 2), [0.0, 1.0]);
        assert_eq!(*f.get(0, 0), [0.0, 0.0]);
    }

    #[test]
    fn center_field_single_pixel_is_zero() {
        let mut m = BinaryMask::filled(4, 4, false);
        m.set(2, 1, true);
        assert!(center_field(&m)
            .unwrap()
            .data()
            .iter()
            .all(|v| *v == [0.0, 0.0]));
        assert!(matches!(
            center_field(&BinaryMask::filled(2, 2, false)),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn center_field_rays_pass_through_bbox_center() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_blob(&mut rng, 32);
            let f = center_field(&m).unwrap();
            let (ch, cw) = tightest_bbox(&m).unwrap().center();
            for ((r, c), v) in f.indexed() {
                let n = (v[0] as f64).hypot(v[1] as f64);
                if n == 0.0 {
                    assert!(!*m.get(r, c) || (r as f64 - ch).hypot(c as f64 - cw) < CENTER_EPS);
                    continue;
                }
                assert!((n - 1.0).abs() < 1e-6);
                // perpendicular distance from the center to the line through the pixel along v
                let (dh, dw) = (ch - r as f64, cw - c as f64);
                let perp = (dh * v[1] as f64 - dw * v[0] as f64).abs();
                assert!(perp < 0.5, "ray misses center by {perp}");
                // the center lies in the -v direction
                assert!(dh * v[0] as f64 + dw * v[1] as f64 <= 0.0);
            }
        }
    }

    #[test]
    fn recover_on_linear_ramp() {
        let f = ScalarField::from_fn(10, 10, |_, c| c as f32 / 50.0 + 0.01);
        let d = recover_max_distance(&f, (5, 5)).unwrap();
        assert!((d - 50.0).abs() < 1e-3);
    }

    #[test]
    fn recover_at_disk_center_is_zero_gradient() {
        let m = disk(65, 20.0);
        let f = boundary_field(&m).unwrap();
        assert!(matches!(
            recover_max_distance(&f, (32, 32)),
            Err(Error::ZeroGradient { .. })
        ));
    }

    #[test]
    fn recover_on_disk_annulus() {
        let m = disk(128, 40.0);
        let f = boundary_field(&m).unwrap();
        let mut errs: Vec<f64> = f
            .indexed()
            .filter(|(_, &v)| (0.2..=0.8).contains(&v))
            .filter_map(|(p, _)| recover_max_distance(&f, p).ok())
            .map(|d| (d - 40.0).abs() / 40.0)
            .collect();
        errs.sort_by(f64::total_cmp);
        assert!(errs[errs.len() / 2] <= 0.15);
    }

    #[test]
    fn tightest_bbox_cases() {
        let mut m = BinaryMask::filled(8, 8, false);
        m.set(3, 5, true);
        assert_eq!(tightest_bbox(&m).unwrap(), PixelBox::new(3, 5, 3, 5));
        assert_eq!(
            tightest_bbox(&BinaryMask::filled(4, 6, true)).unwrap(),
            PixelBox::new(0, 0, 3, 5)
        );
        assert!(matches!(
            tightest_bbox(&BinaryMask::filled(4, 6, false)),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn tightest_bbox_touches_every_side() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let m = random_blob(&mut rng, 32);
            let b = tightest_bbox(&m).unwrap();
            let fg: Vec<_> = m.indexed().filter(|(_, &x)| x).map(|(p, _)| p).collect();
            assert!(fg.iter().all(|&(r, c)| b.contains(r, c)));
            assert!(fg.iter().any(|&(r, _)| r == b.u1));
            assert!(fg.iter().any(|&(r, _)| r == b.u2));
            assert!(fg.iter().any(|&(_, c)| c == b.v1));
            assert!(fg.iter().any(|&(_, c)| c == b.v2));
        }
    }

    #[test]
    fn negative_twin_examples() {
        let b = negative_twin_crop((100, 100), PixelBox::new(40, 40, 59, 59)).unwrap();
        assert_eq!(b, PixelBox::new(0, 0, 39, 99));
        assert_eq!(b.area(), 4000);
        let b = negative_twin_crop((100, 100), PixelBox::new(0, 0, 9, 99)).unwrap();
        assert_eq!(b, PixelBox::new(10, 0, 99, 99));
        assert!(matches!(
            negative_twin_crop((10, 10), PixelBox::full(10, 10)),
            Err(Error::NoBackground)
        ));
    }

    #[test]
    fn negative_twin_is_disjoint_and_maximal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (h, w) = (rng.gen_range(2..60), rng.gen_range(2..60));
            let (a, b) = (rng.gen_range(0..h), rng.gen_range(0..h));
            let (c, d) = (rng.gen_range(0..w), rng.gen_range(0..w));
            let obj = PixelBox::new(a.min(b), c.min(d), a.max(b), c.max(d));
            match negative_twin_crop((h, w), obj) {
                Ok(crop) => {
                    assert!(crop.intersection(&obj).is_none());
                    let strips = [
                        obj.u1 * w,
                        (h - 1 - obj.u2) * w,
                        obj.v1 * h,
                        (w - 1 - obj.v2) * h,
                    ];
                    assert_eq!(crop.area(), *strips.iter().max().unwrap());
                }
                Err(Error::NoBackground) => assert_eq!(obj, PixelBox::full(h, w)),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn boundary_field_normalization_extremes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let m = random_blob(&mut rng, 24);
            if m.all() {
                continue;
            }
            let f = boundary_field(&m).unwrap();
            let fg_max = f
                .data()
                .iter()
                .zip(m.data())
                .filter(|(_, &b)| b)
                .map(|(&v, _)| v)
                .fold(f32::MIN, f32::max);
            let bg_min = f
                .data()
                .iter()
                .zip(m.data())
                .filter(|(_, &b)| !b)
                .map(|(&v, _)| v)
                .fold(f32::MAX, f32::min);
            assert!((fg_max - 1.0).abs() < 1e-6 && (bg_min + 1.0).abs() < 1e-6);
            assert!(f.data().iter().all(|v| (-1.0..=1.0).contains(v)));
            // squared distances are exact integers
            let sq = squared_distance_to_zero(&m).unwrap();
            assert!(sq.data().iter().zip(m.data()).all(|(&d, &b)| (d > 0) == b));
        }
    }
}
