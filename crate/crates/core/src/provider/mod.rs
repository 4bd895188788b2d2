//! Field providers: the query interface standing in for the objectness
//! network, with an oracle driven by ground-truth masks and a replay
//! implementation driven by recorded `CBF1` files.

mod oracle;
mod replay;

pub use oracle::OracleProvider;
pub use replay::{
    read_manifest, record_session, ManifestEntry, Recorder, ReplayProvider, MANIFEST_NAME,
};

use crate::error::{Error, Result};
use crate::fields::tightest_bbox;
use crate::grid::{BinaryMask, PixelBox, ScalarField, VectorField};

/// Side length of the working crop every proposal is resampled to.
pub const CROP: usize = 128;

/// Existence score, center field and boundary field for one crop.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBundle {
    pub existence: f32,
    pub center: VectorField,
    pub boundary: ScalarField,
}

impl FieldBundle {
    pub fn new(existence: f32, center: VectorField, boundary: ScalarField) -> Result<Self> {
        if !(0.0..=1.0).contains(&existence) {
            return Err(Error::Invalid(format!(
                "existence {existence} outside [0, 1]"
            )));
        }
        for dims in [center.dims(), boundary.dims()] {
            if dims != (CROP, CROP) {
                return Err(Error::Shape {
                    expected: (CROP, CROP),
                    actual: dims,
                });
            }
        }
        Ok(FieldBundle {
            existence,
            center,
            boundary,
        })
    }

    /// Bundle for a crop without any object.
    pub fn empty() -> Self {
        FieldBundle {
            existence: 0.0,
            center: VectorField::filled(CROP, CROP, [0.0, 0.0]),
            boundary: ScalarField::filled(CROP, CROP, -1.0),
        }
    }
}

/// Ground-truth instance masks sharing one frame; instance ids are list indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub id: String,
    height: usize,
    width: usize,
    instances: Vec<BinaryMask>,
    bboxes: Vec<PixelBox>,
}

impl Scene {
    pub fn new(
        id: impl Into<String>,
        size: (usize, usize),
        instances: Vec<BinaryMask>,
    ) -> Result<Self> {
        let (height, width) = size;
        if height == 0 || width == 0 {
            return Err(Error::Invalid("scene must be at least 1x1".into()));
        }
        let mut bboxes = Vec::with_capacity(instances.len());
        for (i, m) in instances.iter().enumerate() {
            if m.dims() != size {
                return Err(Error::Shape {
                    expected: size,
                    actual: m.dims(),
                });
            }
            bboxes.push(
                tightest_bbox(m).map_err(|_| Error::Invalid(format!("instance {i} is empty")))?,
            );
        }
        Ok(Scene {
            id: id.into(),
            height,
            width,
            instances,
            bboxes,
        })
    }

    pub fn size(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn instances(&self) -> &[BinaryMask] {
        &self.instances
    }

    /// Tightest box of every instance, in instance order.
    pub fn bboxes(&self) -> &[PixelBox] {
        &self.bboxes
    }
}

/// Answers objectness queries for boxes of one scene. Implementations must be
/// deterministic and tolerate concurrent queries.
pub trait FieldProvider: Sync {
    fn scene_size(&self) -> (usize, usize);

    fn query(&self, bbox: PixelBox) -> Result<FieldBundle>;
}

impl<P: FieldProvider + ?Sized> FieldProvider for &P {
    fn scene_size(&self) -> (usize, usize) {
        (**self).scene_size()
    }

    fn query(&self, bbox: PixelBox) -> Result<FieldBundle> {
        (**self).query(bbox)
    }
}
