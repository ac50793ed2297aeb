use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use handforge::dataset::{
    polygon_to_mask, rle_encode, Annotation, DatasetError, DatasetManifest, Provenance, Record,
    Ring, Split,
};
use handforge::render::{bbox_from_mask, BBox};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },
    #[error("unknown image {0:?}")]
    NotFound(String),
    #[error("invalid ring {ring}: {message}")]
    InvalidRing { ring: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Conflict(String),
    #[error("no committed annotations to export")]
    NothingToExport,
    #[error("stored annotation {}: {message}", path.display())]
    Corrupt { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationState {
    Unannotated,
    Draft,
    Committed,
}

/// Request body for saving an annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonDocument {
    pub image_id: String,
    pub rings: Vec<Ring>,
}

/// What is persisted per image: the rings plus the derived mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredAnnotation {
    pub image_id: String,
    pub state: AnnotationState,
    pub rings: Vec<Ring>,
    pub width: u32,
    pub height: u32,
    pub bbox: Option<BBox>,
    pub area: u64,
    /// Row-major RLE counts, starting with a zero run.
    pub counts: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub state: AnnotationState,
}

#[derive(Debug, Clone)]
struct ImageInfo {
    path: PathBuf,
    width: u32,
    height: u32,
}

/// One directory of images and the annotations drawn on them.
#[derive(Debug)]
pub struct AnnotationSession {
    image_dir: PathBuf,
    store_dir: PathBuf,
    export_path: PathBuf,
    images: BTreeMap<String, ImageInfo>,
    annotations: RwLock<BTreeMap<String, StoredAnnotation>>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> SessionError + '_ {
    move |source| SessionError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl AnnotationSession {
    /// Scan `image_dir` and reload any annotations saved in `store_dir`.
    /// The exported manifest goes to `export_path`.
    pub fn open(image_dir: &Path, store_dir: &Path, export_path: &Path) -> Result<Self, SessionError> {
        let image_dir = std::fs::canonicalize(image_dir).map_err(io(image_dir))?;
        let mut images = BTreeMap::new();
        for entry in std::fs::read_dir(&image_dir).map_err(io(&image_dir))? {
            let path = entry.map_err(io(&image_dir))?.path();
            let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
            if !path.is_file() || !ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
                continue;
            };
            let (width, height) = image::image_dimensions(&path).map_err(|e| SessionError::Image {
                path: path.clone(),
                message: e.to_string(),
            })?;
            if let Some(prev) = images.insert(id.clone(), ImageInfo { path: path.clone(), width, height }) {
                return Err(SessionError::Invalid(format!(
                    "image id {id:?} is used by both {} and {}",
                    prev.path.display(),
                    path.display()
                )));
            }
        }
        std::fs::create_dir_all(store_dir).map_err(io(store_dir))?;
        let mut annotations = BTreeMap::new();
        for id in images.keys() {
            let path = store_dir.join(format!("{id}.json"));
            if !path.exists() {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(io(&path))?;
            let stored: StoredAnnotation = serde_json::from_str(&text).map_err(|e| SessionError::Corrupt {
                path: path.clone(),
                message: e.to_string(),
            })?;
            annotations.insert(id.clone(), stored);
        }
        Ok(AnnotationSession {
            image_dir,
            store_dir: store_dir.to_path_buf(),
            export_path: export_path.to_path_buf(),
            images,
            annotations: RwLock::new(annotations),
        })
    }

    pub fn image_dir(&self) -> &Path {
        &self.image_dir
    }

    pub fn export_path(&self) -> &Path {
        &self.export_path
    }

    /// Sorted by id.
    pub fn list_images(&self) -> Vec<ImageEntry> {
        let ann = self.annotations.read().unwrap();
        self.images
            .iter()
            .map(|(id, info)| ImageEntry {
                id: id.clone(),
                width: info.width,
                height: info.height,
                state: ann.get(id).map_or(AnnotationState::Unannotated, |a| a.state),
            })
            .collect()
    }

    pub fn image_path(&self, id: &str) -> Result<&Path, SessionError> {
        self.images
            .get(id)
            .map(|i| i.path.as_path())
            .ok_or_else(|| SessionError::NotFound(id.to_string()))
    }

    /// The image re-encoded as PNG unless it already is one.
    pub fn image_png(&self, id: &str) -> Result<Vec<u8>, SessionError> {
        let path = self.image_path(id)?;
        let is_png = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png {
            return std::fs::read(path).map_err(io(path));
        }
        let img = image::open(path).map_err(|e| SessionError::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut out = std::io::Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png).map_err(|e| SessionError::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(out.into_inner())
    }

    /// `None` for an image with nothing saved yet.
    pub fn get_annotation(&self, id: &str) -> Result<Option<StoredAnnotation>, SessionError> {
        self.image_path(id)?;
        Ok(self.annotations.read().unwrap().get(id).cloned())
    }

    /// Rasterize and persist `rings` for `id`. Saving a draft over a
    /// committed annotation is a conflict; otherwise the last write wins.
    pub fn put_annotation(
        &self,
        id: &str,
        rings: Vec<Ring>,
        state: AnnotationState,
    ) -> Result<StoredAnnotation, SessionError> {
        let info = self.images.get(id).ok_or_else(|| SessionError::NotFound(id.to_string()))?;
        if state == AnnotationState::Unannotated {
            return Err(SessionError::Invalid("cannot save in state unannotated".into()));
        }
        if state == AnnotationState::Committed && rings.is_empty() {
            return Err(SessionError::Invalid("a committed annotation needs at least one ring".into()));
        }
        let mask = polygon_to_mask(&rings, info.width, info.height).map_err(|e| match e {
            DatasetError::InvalidPolygon { ring, message } => SessionError::InvalidRing { ring, message },
            other => SessionError::Invalid(other.to_string()),
        })?;
        let rle = rle_encode(&mask);
        let stored = StoredAnnotation {
            image_id: id.to_string(),
            state,
            rings,
            width: info.width,
            height: info.height,
            bbox: bbox_from_mask(&mask),
            area: rle.area(),
            counts: rle.counts,
        };
        let mut ann = self.annotations.write().unwrap();
        if state == AnnotationState::Draft && ann.get(id).is_some_and(|a| a.state == AnnotationState::Committed) {
            return Err(SessionError::Conflict(format!("{id} is already committed; save as committed to edit")));
        }
        let path = self.store_dir.join(format!("{id}.json"));
        write_atomic(&path, serde_json::to_string_pretty(&stored).unwrap().as_bytes())?;
        ann.insert(id.to_string(), stored.clone());
        Ok(stored)
    }

    /// Manifest of committed annotations in id order, all in the test split,
    /// with absolute image paths.
    pub fn build_manifest(&self) -> Result<DatasetManifest, SessionError> {
        let ann = self.annotations.read().unwrap();
        let name = self
            .image_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "real".into());
        let root = self.export_path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut manifest = DatasetManifest::new(name, Provenance::Real, root);
        for (id, a) in ann.iter().filter(|(_, a)| a.state == AnnotationState::Committed) {
            let info = &self.images[id];
            let mask = polygon_to_mask(&a.rings, info.width, info.height)
                .map_err(|e| SessionError::Invalid(format!("{id}: {e}")))?;
            let mut annotation = Annotation::from_mask(id, &mask);
            annotation.polygons = Some(a.rings.clone());
            manifest.records.push(Record {
                id: id.clone(),
                image_path: info.path.clone(),
                width: info.width,
                height: info.height,
                split: Split::Test,
                scene: None,
                annotation,
            });
        }
        if manifest.records.is_empty() {
            return Err(SessionError::NothingToExport);
        }
        Ok(manifest)
    }

    /// Write the manifest to the export path.
    pub fn export(&self) -> Result<DatasetManifest, SessionError> {
        let manifest = self.build_manifest()?;
        if let Some(dir) = self.export_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io(dir))?;
        }
        write_atomic(&self.export_path, manifest.to_json().as_bytes())?;
        Ok(manifest)
    }
}

/// Write to a temporary file in the target directory, then rename over `path`.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SessionError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
    tmp.write_all(bytes).map_err(io(path))?;
    tmp.persist(path).map_err(|e| SessionError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}
