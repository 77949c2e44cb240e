//! Canonical page files and the corpus manifest.
//!
//! One JSON file per page:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "id": "jebb_0012",
//!   "image_path": "images/jebb_0012.png",
//!   "image_width_px": 1600,
//!   "image_height_px": 2400,
//!   "words": [
//!     {"id": "w0", "order_index": 0, "box": {"x_min": 10, "y_min": 12, "x_max": 40.5, "y_max": 30}, "text": "AIAS"}
//!   ],
//!   "regions": [
//!     {"id": "r0", "box": {...}, "fine_class": "page_number", "coarse_class": "number",
//!      "word_ids": ["w0"], "source": "manual"}
//!   ]
//! }
//! ```
//!
//! `fine_class` and `score` are omitted when absent. A `coarse_class` of
//! `"region"` marks a mono-collapsed region.
//!
//! The manifest lists documents, their metadata and their page files
//! (paths relative to the manifest), plus an optional page-level split:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "documents": [
//!     {"id": "jebb", "title": "Jebb", "year": 1896, "languages": ["en"],
//!      "public_domain": true, "corpus": "internal", "pages": ["jebb/jebb_0012.json"]}
//!   ],
//!   "splits": {"train": ["jebb_0012"], "test": []}
//! }
//! ```
//!
//! Parsing checks the schema only (field types, class names, well-formed
//! boxes); cross-field invariants are the business of [`crate::stats::validate`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::num::{ser_f64, ser_opt_f64};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::model::{
    CoarseClass, Corpus, CorpusKind, Document, FineClass, Page, Region, Source, Split, SplitManifest,
    Word, MONO_CLASS_NAME,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub(crate) struct BoxRec {
    #[serde(serialize_with = "ser_f64")]
    pub x_min: f64,
    #[serde(serialize_with = "ser_f64")]
    pub y_min: f64,
    #[serde(serialize_with = "ser_f64")]
    pub x_max: f64,
    #[serde(serialize_with = "ser_f64")]
    pub y_max: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl TryFrom<RawBox> for BoxRec {
    type Error = String;

    fn try_from(r: RawBox) -> std::result::Result<Self, String> {
        BBox::new(r.x_min, r.y_min, r.x_max, r.y_max)
            .map(BoxRec::from)
            .map_err(|e| e.to_string())
    }
}

impl From<BBox> for BoxRec {
    fn from(b: BBox) -> Self {
        BoxRec {
            x_min: b.x_min,
            y_min: b.y_min,
            x_max: b.x_max,
            y_max: b.y_max,
        }
    }
}

impl From<BoxRec> for BBox {
    fn from(b: BoxRec) -> Self {
        BBox {
            x_min: b.x_min,
            y_min: b.y_min,
            x_max: b.x_max,
            y_max: b.y_max,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WordRec {
    id: String,
    order_index: usize,
    #[serde(rename = "box")]
    bbox: BoxRec,
    #[serde(default)]
    text: String,
}

/// `coarse_class` field: a coarse class or the mono class name.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CoarseOrMono(Option<CoarseClass>);

impl Serialize for CoarseOrMono {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.0.map_or(MONO_CLASS_NAME, |c| c.as_str()))
    }
}

impl<'de> Deserialize<'de> for CoarseOrMono {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.trim().eq_ignore_ascii_case(MONO_CLASS_NAME) {
            return Ok(CoarseOrMono(None));
        }
        s.parse()
            .map(|c| CoarseOrMono(Some(c)))
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionRec {
    id: String,
    #[serde(rename = "box")]
    bbox: BoxRec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fine_class: Option<FineClass>,
    coarse_class: CoarseOrMono,
    #[serde(default)]
    word_ids: Vec<String>,
    source: Source,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_opt_f64"
    )]
    score: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PageFile {
    schema_version: u32,
    id: String,
    image_path: String,
    image_width_px: u32,
    image_height_px: u32,
    #[serde(default)]
    words: Vec<WordRec>,
    #[serde(default)]
    regions: Vec<RegionRec>,
}

impl From<&Page> for PageFile {
    fn from(p: &Page) -> Self {
        PageFile {
            schema_version: SCHEMA_VERSION,
            id: p.id.clone(),
            image_path: p.image_path.clone(),
            image_width_px: p.image_width_px,
            image_height_px: p.image_height_px,
            words: p
                .words
                .iter()
                .map(|w| WordRec {
                    id: w.id.clone(),
                    order_index: w.order_index,
                    bbox: w.bbox.into(),
                    text: w.text.clone(),
                })
                .collect(),
            regions: p
                .regions
                .iter()
                .map(|r| RegionRec {
                    id: r.id.clone(),
                    bbox: r.bbox.into(),
                    fine_class: r.fine_class,
                    coarse_class: CoarseOrMono(r.coarse_class),
                    word_ids: r.word_ids.clone(),
                    source: r.source,
                    score: r.score,
                })
                .collect(),
        }
    }
}

impl From<PageFile> for Page {
    fn from(f: PageFile) -> Self {
        Page {
            id: f.id,
            image_path: f.image_path,
            image_width_px: f.image_width_px,
            image_height_px: f.image_height_px,
            words: f
                .words
                .into_iter()
                .map(|w| Word {
                    id: w.id,
                    order_index: w.order_index,
                    bbox: w.bbox.into(),
                    text: w.text,
                })
                .collect(),
            regions: f
                .regions
                .into_iter()
                .map(|r| Region {
                    id: r.id,
                    bbox: r.bbox.into(),
                    fine_class: r.fine_class,
                    coarse_class: r.coarse_class.0,
                    word_ids: r.word_ids,
                    source: r.source,
                    score: r.score,
                })
                .collect(),
        }
    }
}

fn schema_error(err: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = err.path().to_string();
    Error::Schema {
        path: if path == "." { "<root>".to_string() } else { path },
        message: err.into_inner().to_string(),
    }
}

pub(crate) fn deserialize_with_path<'de, T: Deserialize<'de>>(bytes: &'de [u8]) -> Result<T> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(schema_error)?;
    de.end().map_err(|e| Error::Schema {
        path: "<root>".into(),
        message: e.to_string(),
    })?;
    Ok(value)
}

fn check_version(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::Schema {
            path: "schema_version".into(),
            message: format!("unsupported schema version {version}, expected {SCHEMA_VERSION}"),
        });
    }
    Ok(())
}

pub fn read_canonical(bytes: &[u8]) -> Result<Page> {
    let file: PageFile = deserialize_with_path(bytes)?;
    check_version(file.schema_version)?;
    Ok(file.into())
}

/// Serializes a page. Output is deterministic; reals are rounded to 6
/// fractional digits.
pub fn write_canonical(page: &Page) -> Result<Vec<u8>> {
    super::to_json_bytes(&PageFile::from(page))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentEntry {
    pub id: String,
    pub title: String,
    pub year: i32,
    #[serde(default)]
    pub languages: Vec<String>,
    pub public_domain: bool,
    pub corpus: CorpusKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    pub pages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub documents: Vec<DocumentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<SplitManifest>,
}

pub fn read_manifest(bytes: &[u8]) -> Result<Manifest> {
    let m: Manifest = deserialize_with_path(bytes)?;
    check_version(m.schema_version)?;
    Ok(m)
}

/// Loads a manifest and every page file it lists.
pub fn load_corpus(manifest_path: &Path) -> Result<Corpus> {
    let read = |p: &Path| {
        std::fs::read(p).map_err(|e| Error::parse(p.display(), e))
    };
    let manifest = read_manifest(&read(manifest_path)?)
        .map_err(|e| Error::parse(manifest_path.display(), e))?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let mut documents = Vec::with_capacity(manifest.documents.len());
    for entry in manifest.documents {
        let mut pages = Vec::with_capacity(entry.pages.len());
        for rel in &entry.pages {
            let path = root.join(rel);
            let page = read_canonical(&read(&path)?).map_err(|e| Error::parse(path.display(), e))?;
            pages.push(page);
        }
        documents.push(Document {
            id: entry.id,
            title: entry.title,
            year: entry.year,
            languages: entry.languages,
            public_domain: entry.public_domain,
            corpus: entry.corpus,
            pages,
            split: entry.split,
        });
    }
    Ok(Corpus {
        documents,
        splits: manifest.splits,
    })
}

/// Files making up a serialized corpus, paths relative to the output root.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusFiles {
    pub manifest: Vec<u8>,
    pub pages: Vec<(PathBuf, Vec<u8>)>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Serializes a corpus as `manifest.json` plus `<doc_id>/<page_id>.json`.
pub fn write_corpus(corpus: &Corpus) -> Result<CorpusFiles> {
    let mut pages = Vec::new();
    let mut documents = Vec::new();
    for doc in &corpus.documents {
        let mut rels = Vec::new();
        for page in &doc.pages {
            let rel = PathBuf::from(&doc.id).join(format!("{}.json", page.id));
            rels.push(rel.to_string_lossy().replace('\\', "/"));
            pages.push((rel, write_canonical(page)?));
        }
        documents.push(DocumentEntry {
            id: doc.id.clone(),
            title: doc.title.clone(),
            year: doc.year,
            languages: doc.languages.clone(),
            public_domain: doc.public_domain,
            corpus: doc.corpus,
            split: doc.split,
            pages: rels,
        });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        documents,
        splits: corpus.splits.clone(),
    };
    Ok(CorpusFiles {
        manifest: super::to_json_bytes(&manifest)?,
        pages,
    })
}

impl CorpusFiles {
    /// Writes every file under `root`, returning the manifest path.
    pub fn write_to(&self, root: &Path) -> Result<PathBuf> {
        for (rel, bytes) in &self.pages {
            let path = root.join(rel);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, bytes)?;
        }
        std::fs::create_dir_all(root)?;
        let manifest = root.join(MANIFEST_FILE);
        std::fs::write(&manifest, &self.manifest)?;
        Ok(manifest)
    }
}
