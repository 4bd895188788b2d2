use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::cbf;
use crate::error::{Error, Result};
use crate::grid::{PixelBox, ScalarField};

use super::{FieldBundle, FieldProvider, CROP};

pub const MANIFEST_NAME: &str = "manifest.tsv";

/// One manifest line: the query box and three payload paths relative to the manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub bbox: PixelBox,
    pub existence: PathBuf,
    pub center: PathBuf,
    pub boundary: PathBuf,
}

impl ManifestEntry {
    fn to_line(&self) -> String {
        let b = self.bbox;
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            b.u1,
            b.v1,
            b.u2,
            b.v2,
            self.existence.display(),
            self.center.display(),
            self.boundary.display()
        )
    }

    fn parse(line: &str, origin: &Path, lineno: usize) -> Result<Self> {
        let ctx = || format!("{}:{}", origin.display(), lineno + 1);
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            return Err(Error::parse(
                ctx(),
                format!("expected 7 fields, found {}", fields.len()),
            ));
        }
        let mut coords = [0usize; 4];
        for (slot, f) in coords.iter_mut().zip(&fields[..4]) {
            *slot = f.parse().map_err(|e| Error::parse(ctx(), e))?;
        }
        let [u1, v1, u2, v2] = coords;
        if u1 > u2 || v1 > v2 {
            return Err(Error::parse(ctx(), "inverted box"));
        }
        Ok(ManifestEntry {
            bbox: PixelBox::new(u1, v1, u2, v2),
            existence: fields[4].into(),
            center: fields[5].into(),
            boundary: fields[6].into(),
        })
    }
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| ManifestEntry::parse(l, path, i))
        .collect()
}

/// Queries `provider` for every box and writes the bundles as `CBF1` files
/// plus a tab-separated manifest under `out_dir`. Returns the manifest path.
pub fn record_session(
    provider: &dyn FieldProvider,
    queries: &[PixelBox],
    out_dir: &Path,
) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut manifest = String::new();
    for (i, &bbox) in queries.iter().enumerate() {
        let bundle = provider.query(bbox)?;
        let entry = ManifestEntry {
            bbox,
            existence: format!("q{i:06}_existence.cbf").into(),
            center: format!("q{i:06}_center.cbf").into(),
            boundary: format!("q{i:06}_boundary.cbf").into(),
        };
        let existence = ScalarField::filled(1, 1, bundle.existence);
        cbf::write_scalar(&out_dir.join(&entry.existence), &existence)?;
        cbf::write_vector(&out_dir.join(&entry.center), &bundle.center)?;
        cbf::write_scalar(&out_dir.join(&entry.boundary), &bundle.boundary)?;
        manifest.push_str(&entry.to_line());
    }
    let path = out_dir.join(MANIFEST_NAME);
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Serves bundles recorded by [`record_session`].
#[derive(Debug, Clone)]
pub struct ReplayProvider {
    root: PathBuf,
    scene_size: (usize, usize),
    entries: HashMap<PixelBox, ManifestEntry>,
}

impl ReplayProvider {
    pub fn open(manifest: &Path, scene_size: (usize, usize)) -> Result<Self> {
        let root = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut entries = HashMap::new();
        for e in read_manifest(manifest)? {
            entries.entry(e.bbox).or_insert(e);
        }
        Ok(ReplayProvider {
            root,
            scene_size,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FieldProvider for ReplayProvider {
    fn scene_size(&self) -> (usize, usize) {
        self.scene_size
    }

    fn query(&self, bbox: PixelBox) -> Result<FieldBundle> {
        let entry = self
            .entries
            .get(&bbox)
            .ok_or(Error::MissingEntry(bbox.as_array()))?;
        let corrupt = |path: &Path, reason: String| Error::CorruptFile {
            path: path.to_path_buf(),
            reason,
        };
        let epath = self.root.join(&entry.existence);
        let existence = cbf::read_scalar(&epath)?;
        if existence.dims() != (1, 1) {
            return Err(corrupt(
                &epath,
                format!("existence has shape {:?}", existence.dims()),
            ));
        }
        let cpath = self.root.join(&entry.center);
        let center = cbf::read_vector(&cpath)?;
        if center.dims() != (CROP, CROP) {
            return Err(corrupt(
                &cpath,
                format!("center has shape {:?}", center.dims()),
            ));
        }
        let bpath = self.root.join(&entry.boundary);
        let boundary = cbf::read_scalar(&bpath)?;
        if boundary.dims() != (CROP, CROP) {
            return Err(corrupt(
                &bpath,
                format!("boundary has shape {:?}", boundary.dims()),
            ));
        }
        FieldBundle::new(existence.data()[0], center, boundary)
            .map_err(|e| corrupt(&epath, e.to_string()))
    }
}

/// Wraps a provider and remembers every distinct box it was asked for.
pub struct Recorder<P> {
    inner: P,
    seen: Mutex<BTreeSet<PixelBox>>,
}

impl<P: FieldProvider> Recorder<P> {
    pub fn new(inner: P) -> Self {
        Recorder {
            inner,
            seen: Mutex::new(BTreeSet::new()),
        }
    }

    /// Queried boxes in sorted order.
    pub fn queries(&self) -> Vec<PixelBox> {
        self.seen
            .lock()
            .expect("recorder lock")
            .iter()
            .copied()
            .collect()
    }

    pub fn into_inner(self) -> P {
        self.inner
    }
}

impl<P: FieldProvider> FieldProvider for Recorder<P> {
    fn scene_size(&self) -> (usize, usize) {
        self.inner.scene_size()
    }

    fn query(&self, bbox: PixelBox) -> Result<FieldBundle> {
        self.seen.lock().expect("recorder lock").insert(bbox);
        self.inner.query(bbox)
    }
}
