//! Text formats: run-length masks, detection records, scene files and
//! metric reports. Everything is JSON; floats survive a round trip exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Report;
use crate::grid::{BinaryMask, PixelBox};
use crate::provider::Scene;
use crate::reasoning::{ConfidenceParts, DetectedObject};

/// Uncompressed run-length mask. Runs scan columns top to bottom, left to
/// right, alternate background/foreground and start with background (the
/// first count may be 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rle {
    /// `[height, width]`.
    pub size: [usize; 2],
    pub counts: Vec<usize>,
}

pub fn rle_encode(mask: &BinaryMask) -> Rle {
    let (h, w) = mask.dims();
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0usize;
    for c in 0..w {
        for r in 0..h {
            let v = *mask.get(r, c);
            if v != current {
                counts.push(run);
                run = 0;
                current = v;
            }
            run += 1;
        }
    }
    counts.push(run);
    Rle {
        size: [h, w],
        counts,
    }
}

pub fn rle_decode(rle: &Rle) -> Result<BinaryMask> {
    let [h, w] = rle.size;
    let total: usize = rle.counts.iter().sum();
    if total != h * w {
        return Err(Error::Invalid(format!(
            "run lengths sum to {total}, expected {h}x{w} = {}",
            h * w
        )));
    }
    let mut mask = BinaryMask::filled(h, w, false);
    let mut pos = 0usize;
    for (i, &n) in rle.counts.iter().enumerate() {
        if i % 2 == 1 {
            for k in pos..pos + n {
                mask.set(k % h, k / h, true);
            }
        }
        pos += n;
    }
    Ok(mask)
}

/// One detected object as written to disk. `weight` is present only in
/// pseudo-label files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub scene_id: String,
    /// `[u1, v1, u2, v2]`, inclusive.
    pub bbox: [usize; 4],
    pub confidence: f64,
    pub parts: ConfidenceParts,
    pub iterations: usize,
    pub proposal_id: usize,
    pub segmentation: Rle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

impl DetectionRecord {
    pub fn from_detection(scene_id: &str, det: &DetectedObject) -> Self {
        DetectionRecord {
            scene_id: scene_id.to_string(),
            bbox: det.bbox.as_array(),
            confidence: det.confidence,
            parts: det.parts,
            iterations: det.iterations,
            proposal_id: det.proposal_id,
            segmentation: rle_encode(&det.mask),
            weight: None,
        }
    }

    pub fn to_detection(&self) -> Result<DetectedObject> {
        let [u1, v1, u2, v2] = self.bbox;
        if u1 > u2 || v1 > v2 {
            return Err(Error::Invalid(format!("inverted box {:?}", self.bbox)));
        }
        Ok(DetectedObject {
            bbox: PixelBox::new(u1, v1, u2, v2),
            mask: rle_decode(&self.segmentation)?,
            confidence: self.confidence,
            parts: self.parts,
            iterations: self.iterations,
            proposal_id: self.proposal_id,
        })
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory serialization");
    s.push('\n');
    s
}

pub fn from_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(origin, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text, &path.display().to_string())
}

pub fn write_detections(path: &Path, records: &[DetectionRecord]) -> Result<()> {
    write_text(path, &to_json(records))
}

pub fn read_detections(path: &Path) -> Result<Vec<DetectionRecord>> {
    read_json(path)
}

/// A scene with its instance masks run-length encoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub id: String,
    /// `[height, width]`.
    pub size: [usize; 2],
    pub instances: Vec<Rle>,
}

impl SceneFile {
    pub fn from_scene(scene: &Scene) -> Self {
        let (h, w) = scene.size();
        SceneFile {
            id: scene.id.clone(),
            size: [h, w],
            instances: scene.instances().iter().map(rle_encode).collect(),
        }
    }

    pub fn to_scene(&self) -> Result<Scene> {
        let masks = self
            .instances
            .iter()
            .map(rle_decode)
            .collect::<Result<Vec<_>>>()?;
        Scene::new(self.id.clone(), (self.size[0], self.size[1]), masks)
    }
}

pub fn write_scene(path: &Path, scene: &Scene) -> Result<()> {
    write_text(path, &to_json(&SceneFile::from_scene(scene)))
}

pub fn read_scene(path: &Path) -> Result<Scene> {
    read_json::<SceneFile>(path)?.to_scene()
}

/// Flat `metric → value` document.
pub fn report_to_string(report: &Report) -> String {
    let flat: BTreeMap<String, f64> = report.flat();
    to_json(&flat)
}
