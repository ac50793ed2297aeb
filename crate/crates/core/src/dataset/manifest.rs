use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{polygon::Ring, rle_decode, DatasetError, RleMask};
use crate::randomizer::{DatasetPreset, SceneSummary};
use crate::render::{bbox_from_mask, BBox, BinaryMask};

pub const ANNOTATIONS_FILE: &str = "annotations.json";
pub const FORMAT_VERSION: u32 = 1;
pub const CATEGORY: &str = "hand";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(DatasetError::InvalidArgument(format!("unknown split {other:?}"))),
        }
    }
}

/// Where a dataset's images came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Synthetic(DatasetPreset),
    Real,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Synthetic(p) => write!(f, "{p}"),
            Provenance::Real => f.write_str("real"),
        }
    }
}

impl FromStr for Provenance {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "real" {
            return Ok(Provenance::Real);
        }
        s.parse::<DatasetPreset>()
            .map(Provenance::Synthetic)
            .map_err(|_| DatasetError::InvalidArgument(format!("unknown provenance {s:?}")))
    }
}

impl Serialize for Provenance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Provenance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub image_id: String,
    /// `None` when the mask is empty.
    pub bbox: Option<BBox>,
    pub mask: RleMask,
    /// Source rings for human annotations.
    pub polygons: Option<Vec<Ring>>,
}

impl Annotation {
    pub fn from_mask(image_id: &str, mask: &BinaryMask) -> Self {
        Annotation {
            image_id: image_id.to_string(),
            bbox: bbox_from_mask(mask),
            mask: super::rle_encode(mask),
            polygons: None,
        }
    }

    pub fn decode_mask(&self) -> Result<BinaryMask, DatasetError> {
        rle_decode(&self.mask)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    /// Relative to the dataset root, or absolute.
    pub image_path: PathBuf,
    pub width: u32,
    pub height: u32,
    pub split: Split,
    pub scene: Option<SceneSummary>,
    pub annotation: Annotation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub provenance: Provenance,
    pub seed: Option<u64>,
    /// Directory that relative image paths resolve against. Not stored.
    pub root: PathBuf,
    pub records: Vec<Record>,
}

// On-disk document.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    info: DocInfo,
    categories: Vec<DocCategory>,
    images: Vec<DocImage>,
    annotations: Vec<DocAnnotation>,
}

#[derive(Serialize, Deserialize)]
struct DocInfo {
    name: String,
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    format_version: u32,
}

#[derive(Serialize, Deserialize)]
struct DocCategory {
    id: u32,
    name: String,
}

#[derive(Serialize, Deserialize)]
struct DocImage {
    id: String,
    file_name: String,
    width: u32,
    height: u32,
    split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scene: Option<SceneSummary>,
}

#[derive(Serialize, Deserialize)]
struct DocAnnotation {
    image_id: String,
    category_id: u32,
    bbox: Option<[u32; 4]>,
    area: u64,
    segmentation: DocRle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polygons: Option<Vec<Ring>>,
}

#[derive(Serialize, Deserialize)]
struct DocRle {
    /// `[height, width]`
    size: [u32; 2],
    counts: Vec<u32>,
}

impl DatasetManifest {
    pub fn new(name: impl Into<String>, provenance: Provenance, root: impl Into<PathBuf>) -> Self {
        DatasetManifest {
            name: name.into(),
            provenance,
            seed: None,
            root: root.into(),
            records: Vec::new(),
        }
    }

    pub fn image_path(&self, record: &Record) -> PathBuf {
        self.root.join(&record.image_path)
    }

    pub fn records_in(&self, split: Split) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.split == split)
    }

    pub fn count(&self, split: Split) -> usize {
        self.records_in(split).count()
    }

    pub fn get(&self, id: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn load_image(&self, record: &Record) -> Result<image::RgbImage, DatasetError> {
        let path = self.image_path(record);
        let img = image::open(&path).map_err(|e| DatasetError::Image {
            path: path.clone(),
            message: e.to_string(),
        })?;
        Ok(img.to_rgb8())
    }

    pub fn to_json(&self) -> String {
        let doc = Doc {
            info: DocInfo {
                name: self.name.clone(),
                provenance: self.provenance,
                seed: self.seed,
                format_version: FORMAT_VERSION,
            },
            categories: vec![DocCategory {
                id: 1,
                name: CATEGORY.into(),
            }],
            images: self
                .records
                .iter()
                .map(|r| DocImage {
                    id: r.id.clone(),
                    file_name: r.image_path.to_string_lossy().replace('\\', "/"),
                    width: r.width,
                    height: r.height,
                    split: r.split,
                    scene: r.scene,
                })
                .collect(),
            annotations: self
                .records
                .iter()
                .map(|r| {
                    let a = &r.annotation;
                    DocAnnotation {
                        image_id: r.id.clone(),
                        category_id: 1,
                        bbox: a.bbox.map(|b| b.to_xywh()),
                        area: a.mask.area(),
                        segmentation: DocRle {
                            size: [a.mask.height, a.mask.width],
                            counts: a.mask.counts.clone(),
                        },
                        polygons: a.polygons.clone(),
                    }
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Parse without touching the filesystem; see [`DatasetManifest::read`]
    /// for the checked load.
    pub fn from_json(text: &str, root: impl Into<PathBuf>) -> Result<Self, DatasetError> {
        let doc: Doc = serde_json::from_str(text).map_err(|e| DatasetError::Corrupt(e.to_string()))?;
        if doc.info.format_version != FORMAT_VERSION {
            return Err(DatasetError::Corrupt(format!(
                "unsupported format_version {}",
                doc.info.format_version
            )));
        }
        if doc.annotations.len() != doc.images.len() {
            return Err(DatasetError::Corrupt(format!(
                "{} images but {} annotations",
                doc.images.len(),
                doc.annotations.len()
            )));
        }
        let mut records = Vec::with_capacity(doc.images.len());
        for (img, ann) in doc.images.into_iter().zip(doc.annotations) {
            if ann.image_id != img.id {
                return Err(DatasetError::Corrupt(format!(
                    "annotation for {:?} found where {:?} expected",
                    ann.image_id, img.id
                )));
            }
            let [h, w] = ann.segmentation.size;
            let bbox = match ann.bbox {
                None => None,
                Some(xywh) => Some(BBox::from_xywh(xywh).ok_or_else(|| {
                    DatasetError::Corrupt(format!("{}: zero-sized bbox", img.id))
                })?),
            };
            records.push(Record {
                id: img.id.clone(),
                image_path: PathBuf::from(img.file_name),
                width: img.width,
                height: img.height,
                split: img.split,
                scene: img.scene,
                annotation: Annotation {
                    image_id: img.id,
                    bbox,
                    mask: RleMask {
                        width: w,
                        height: h,
                        counts: ann.segmentation.counts,
                    },
                    polygons: ann.polygons,
                },
            });
        }
        Ok(DatasetManifest {
            name: doc.info.name,
            provenance: doc.info.provenance,
            seed: doc.info.seed,
            root: root.into(),
            records,
        })
    }

    /// Structural checks that need no filesystem access: unique ids, masks
    /// that decode to the image size, and bboxes that agree with the masks.
    pub fn check(&self) -> Result<(), DatasetError> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(r.id.as_str()) {
                return Err(DatasetError::Corrupt(format!("duplicate image id {:?}", r.id)));
            }
            let a = &r.annotation;
            if (a.mask.width, a.mask.height) != (r.width, r.height) {
                return Err(DatasetError::Corrupt(format!(
                    "{}: mask is {}x{}, image is {}x{}",
                    r.id, a.mask.width, a.mask.height, r.width, r.height
                )));
            }
            let mask = a.decode_mask().map_err(|e| DatasetError::Corrupt(format!("{}: {e}", r.id)))?;
            if bbox_from_mask(&mask) != a.bbox {
                return Err(DatasetError::Corrupt(format!("{}: bbox disagrees with mask", r.id)));
            }
        }
        Ok(())
    }

    /// Load `annotations.json` from a dataset directory (or the file itself)
    /// and verify it, including that every image exists.
    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let file = if path.is_dir() {
            path.join(ANNOTATIONS_FILE)
        } else {
            path.to_path_buf()
        };
        let text = std::fs::read_to_string(&file).map_err(|source| DatasetError::Io {
            path: file.clone(),
            source,
        })?;
        let root = file.parent().map(Path::to_path_buf).unwrap_or_default();
        let manifest = Self::from_json(&text, root).map_err(|e| match e {
            DatasetError::Corrupt(m) => DatasetError::Corrupt(format!("{}: {m}", file.display())),
            other => other,
        })?;
        manifest.check()?;
        for r in &manifest.records {
            let p = manifest.image_path(r);
            if !p.is_file() {
                return Err(DatasetError::MissingImage { id: r.id.clone(), path: p });
            }
        }
        Ok(manifest)
    }

    /// Write `annotations.json` into `self.root`.
    pub fn write(&self) -> Result<PathBuf, DatasetError> {
        let file = self.root.join(ANNOTATIONS_FILE);
        std::fs::create_dir_all(&self.root).map_err(|source| DatasetError::Io {
            path: self.root.clone(),
            source,
        })?;
        std::fs::write(&file, self.to_json()).map_err(|source| DatasetError::Io {
            path: file.clone(),
            source,
        })?;
        Ok(file)
    }
}
