//! Row-major 2-D grids and the axis-aligned pixel box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense row-major `height × width` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

/// Per-pixel instance occupancy.
pub type BinaryMask = Grid<bool>;
/// Per-pixel real value (distances, boundary field, anti-center map).
pub type ScalarField = Grid<f32>;
/// Per-pixel `(row, col)` vector (center field, gradients).
pub type VectorField = Grid<[f32; 2]>;

impl<T: Clone> Grid<T> {
    pub fn filled(height: usize, width: usize, value: T) -> Self {
        assert!(height >= 1 && width >= 1, "grid must be at least 1x1");
        Grid {
            height,
            width,
            data: vec![value; height * width],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_vec(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Invalid(format!("empty grid {height}x{width}")));
        }
        if data.len() != height * width {
            return Err(Error::Invalid(format!(
                "{} values for a {height}x{width} grid",
                data.len()
            )));
        }
        Ok(Grid {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(height >= 1 && width >= 1, "grid must be at least 1x1");
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Grid {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.width + col] = value;
    }

    /// Out-of-range signed coordinates yield `None`.
    #[inline]
    pub fn get_signed(&self, row: isize, col: isize) -> Option<&T> {
        if row < 0 || col < 0 || row as usize >= self.height || col as usize >= self.width {
            None
        } else {
            Some(&self.data[row as usize * self.width + col as usize])
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn indexed(&self) -> impl Iterator<Item = ((usize, usize), &T)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| ((i / w, i % w), v))
    }

    /// Copies the inclusive sub-window `bbox`.
    pub fn crop(&self, bbox: PixelBox) -> Grid<T>
    where
        T: Clone,
    {
        assert!(
            bbox.u2 < self.height && bbox.v2 < self.width,
            "crop outside grid"
        );
        Grid::from_fn(bbox.height(), bbox.width(), |r, c| {
            self.get(bbox.u1 + r, bbox.v1 + c).clone()
        })
    }
}

impl BinaryMask {
    pub fn from_u8(height: usize, width: usize, values: &[u8]) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v > 1) {
            return Err(Error::Invalid(format!("mask value {v} is not 0 or 1")));
        }
        Grid::from_vec(height, width, values.iter().map(|&v| v == 1).collect())
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.data.iter().any(|&b| b)
    }

    pub fn all(&self) -> bool {
        self.data.iter().all(|&b| b)
    }

    pub fn invert(&self) -> BinaryMask {
        self.map(|&b| !b)
    }
}

/// Inclusive axis-aligned box: rows `u1..=u2`, columns `v1..=v2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelBox {
    pub u1: usize,
    pub v1: usize,
    pub u2: usize,
    pub v2: usize,
}

impl PixelBox {
    pub fn new(u1: usize, v1: usize, u2: usize, v2: usize) -> Self {
        assert!(u1 <= u2 && v1 <= v2, "inverted box ({u1},{v1},{u2},{v2})");
        PixelBox { u1, v1, u2, v2 }
    }

    pub fn full(height: usize, width: usize) -> Self {
        PixelBox::new(0, 0, height - 1, width - 1)
    }

    /// Clamps real-valued corners into a `height × width` frame, keeping `u1 ≤ u2`.
    pub fn clamped(u1: f64, v1: f64, u2: f64, v2: f64, height: usize, width: usize) -> Self {
        let clamp = |x: f64, hi: usize| x.round().clamp(0.0, (hi - 1) as f64) as usize;
        let (a, b) = (clamp(u1, height), clamp(u2, height));
        let (c, d) = (clamp(v1, width), clamp(v2, width));
        PixelBox::new(a.min(b), c.min(d), a.max(b), c.max(d))
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.u2 - self.u1 + 1
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.v2 - self.v1 + 1
    }

    #[inline]
    pub fn area(&self) -> usize {
        self.height() * self.width()
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.u1, self.v1, self.u2, self.v2]
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.u1..=self.u2).contains(&row) && (self.v1..=self.v2).contains(&col)
    }

    pub fn contains_box(&self, other: &PixelBox) -> bool {
        self.u1 <= other.u1 && self.v1 <= other.v1 && self.u2 >= other.u2 && self.v2 >= other.v2
    }

    pub fn intersection(&self, other: &PixelBox) -> Option<PixelBox> {
        let u1 = self.u1.max(other.u1);
        let v1 = self.v1.max(other.v1);
        let u2 = self.u2.min(other.u2);
        let v2 = self.v2.min(other.v2);
        (u1 <= u2 && v1 <= v2).then(|| PixelBox::new(u1, v1, u2, v2))
    }

    pub fn fits_in(&self, height: usize, width: usize) -> bool {
        self.u2 < height && self.v2 < width
    }

    /// Real-valued midpoint `((u1+u2)/2, (v1+v2)/2)`.
    pub fn center(&self) -> (f64, f64) {
        (
            (self.u1 + self.u2) as f64 / 2.0,
            (self.v1 + self.v2) as f64 / 2.0,
        )
    }
}
