//! PNG visualization of fields and masks.

use std::path::Path;

use image::{GrayImage, Luma, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, ScalarField, VectorField};

/// Diverging blue-white-red palette over `[-1, 1]`; values outside are clamped.
pub fn diverging(value: f32) -> [u8; 3] {
    let t = value.clamp(-1.0, 1.0);
    let fade = |x: f32| (255.0 * (1.0 - x.abs())).round() as u8;
    if t >= 0.0 {
        [255, fade(t), fade(t)]
    } else {
        [fade(t), fade(t), 255]
    }
}

/// Hue from the vector angle, saturation from its norm (clamped to 1), full value.
pub fn angle_color(v: [f32; 2]) -> [u8; 3] {
    let (dr, dc) = (v[0] as f64, v[1] as f64);
    let sat = dr.hypot(dc).min(1.0);
    let hue = (dr.atan2(dc).to_degrees() + 360.0) % 360.0;
    hsv_to_rgb(hue, sat, 1.0)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let x = c * (1.0 - ((h / 60.0) % 2.0 - 1.0).abs());
    let m = v - c;
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let byte = |u: f64| ((u + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [byte(r), byte(g), byte(b)]
}

pub fn scalar_image(field: &ScalarField) -> RgbImage {
    RgbImage::from_fn(field.width() as u32, field.height() as u32, |x, y| {
        Rgb(diverging(*field.get(y as usize, x as usize)))
    })
}

pub fn vector_image(field: &VectorField) -> RgbImage {
    RgbImage::from_fn(field.width() as u32, field.height() as u32, |x, y| {
        Rgb(angle_color(*field.get(y as usize, x as usize)))
    })
}

pub fn mask_image(mask: &BinaryMask) -> GrayImage {
    GrayImage::from_fn(mask.width() as u32, mask.height() as u32, |x, y| {
        Luma([if *mask.get(y as usize, x as usize) {
            255
        } else {
            0
        }])
    })
}

fn save(img: impl Into<image::DynamicImage>, path: &Path) -> Result<()> {
    img.into()
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::parse(path.display().to_string(), other),
        })
}

pub fn write_scalar_png(path: &Path, field: &ScalarField) -> Result<()> {
    save(scalar_image(field), path)
}

pub fn write_vector_png(path: &Path, field: &VectorField) -> Result<()> {
    save(vector_image(field), path)
}

pub fn write_mask_png(path: &Path, mask: &BinaryMask) -> Result<()> {
    save(mask_image(mask), path)
}

/// Loads a mask image, binarizing luminance at 128.
pub fn read_mask_png(path: &Path) -> Result<BinaryMask> {
    let img = image::open(path)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::parse(path.display().to_string(), other),
        })?
        .to_luma8();
    let (w, h) = img.dimensions();
    if w == 0 || h == 0 {
        return Err(Error::Invalid(format!("{} is empty", path.display())));
    }
    Ok(BinaryMask::from_fn(h as usize, w as usize, |r, c| {
        img.get_pixel(c as u32, r as u32)[0] >= 128
    }))
}
