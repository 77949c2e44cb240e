//! Line-delimited prediction files, one page per line.
//!
//! Token predictions:
//!
//! ```text
//! {"page_id": "p1", "labels": [{"word_id": "w0", "label": "commentary", "confidence": 0.93}, {"word_id": "w1", "label": null}]}
//! ```
//!
//! `label` is a coarse class, `null` or `"none"`. Words a record leaves out
//! are `none`.
//!
//! Detections start with a header line declaring the class scheme, followed
//! by one record per page:
//!
//! ```text
//! {"scheme": "mono"}
//! {"page_id": "p1", "detections": [{"box": {"x_min": 0, "y_min": 0, "x_max": 10, "y_max": 10}, "class_id": 0, "score": 0.87}]}
//! ```
//!
//! Detections may also carry `id`, `word_ids` and `source`
//! (`detected` | `fused` | `rebuilt`); `score` is optional for rebuilt
//! regions only.
//!
//! Word lists hold OCR words for pages whose annotation source has none:
//!
//! ```text
//! {"page_id": "p1", "words": [{"id": "w0", "box": {...}, "text": "AIAS"}]}
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::canonical::{deserialize_with_path, BoxRec};
use super::{to_json_line, Fixed};
use crate::error::{Error, Result};
use crate::model::{class_index, ClassScheme, Page, Region, RegionClass, Source, Word};
use crate::regions::{LabelMap, TokenLabel, WordLabel};

/// Non-blank lines with their 1-based line numbers.
fn records(bytes: &[u8]) -> Result<Vec<(usize, &[u8])>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse("prediction file", e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.as_bytes()))
        .collect())
}

fn record_ctx(index: usize, line: usize) -> String {
    format!("record {index} (line {line})")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenRecord {
    page_id: String,
    labels: Vec<TokenEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenEntry {
    word_id: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    confidence: Option<f64>,
}

/// Per-page word labels for every page in `pages`; words absent from the
/// file map to `none`.
pub fn parse_token_predictions(bytes: &[u8], pages: &[Page]) -> Result<BTreeMap<String, LabelMap>> {
    let by_id: HashMap<&str, &Page> = pages.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut out: BTreeMap<String, LabelMap> = pages
        .iter()
        .map(|p| {
            (
                p.id.clone(),
                p.words.iter().map(|w| (w.id.clone(), None)).collect(),
            )
        })
        .collect();
    let mut seen_pages = HashSet::new();
    for (index, (line, raw)) in records(bytes)?.into_iter().enumerate() {
        let ctx = record_ctx(index, line);
        let rec: TokenRecord = deserialize_with_path(raw).map_err(|e| Error::parse(&ctx, e))?;
        let page = by_id
            .get(rec.page_id.as_str())
            .ok_or_else(|| Error::parse(&ctx, format!("unknown page_id {:?}", rec.page_id)))?;
        if !seen_pages.insert(rec.page_id.clone()) {
            return Err(Error::parse(&ctx, format!("page {} listed twice", rec.page_id)));
        }
        let words: HashSet<&str> = page.words.iter().map(|w| w.id.as_str()).collect();
        let map = out.get_mut(&rec.page_id).expect("initialized for every page");
        let mut labeled = HashSet::new();
        for entry in rec.labels {
            if !words.contains(entry.word_id.as_str()) {
                return Err(Error::parse(
                    &ctx,
                    format!("word_id {:?} not on page {}", entry.word_id, rec.page_id),
                ));
            }
            if !labeled.insert(entry.word_id.clone()) {
                return Err(Error::parse(&ctx, format!("word {} labeled twice", entry.word_id)));
            }
            if let Some(c) = entry.confidence {
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::parse(&ctx, format!("confidence {c} outside [0, 1]")));
                }
            }
            let label = match entry.label.as_deref() {
                None => TokenLabel::None,
                Some(s) => s.parse().map_err(|e| Error::parse(&ctx, e))?,
            };
            if matches!(label, TokenLabel::Begin(_) | TokenLabel::Inside(_)) {
                return Err(Error::parse(
                    &ctx,
                    format!("prefixed label {label} in a flat prediction file"),
                ));
            }
            map.insert(entry.word_id, label.class());
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct TokenOut<'a> {
    page_id: &'a str,
    labels: Vec<TokenOutEntry<'a>>,
}

#[derive(Serialize)]
struct TokenOutEntry<'a> {
    word_id: &'a str,
    label: Option<String>,
}

/// Writes word labels (flat or BEGIN/INSIDE), one page per line.
pub fn write_token_labels(pages: &[(String, Vec<WordLabel>)]) -> Result<Vec<u8>> {
    let mut out = String::new();
    for (page_id, labels) in pages {
        let rec = TokenOut {
            page_id,
            labels: labels
                .iter()
                .map(|l| TokenOutEntry {
                    word_id: &l.word_id,
                    label: (l.label != TokenLabel::None).then(|| l.label.to_string()),
                })
                .collect(),
        };
        out.push_str(&to_json_line(&rec)?);
        out.push('\n');
    }
    Ok(out.into_bytes())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionHeader {
    scheme: ClassScheme,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionRecord {
    page_id: String,
    detections: Vec<DetectionEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionEntry {
    #[serde(default)]
    id: Option<String>,
    #[serde(rename = "box")]
    bbox: BoxRec,
    class_id: usize,
    #[serde(default)]
    score: Option<f64>,
    #[serde(default)]
    word_ids: Vec<String>,
    #[serde(default)]
    source: Option<Source>,
}

/// Parsed detection file.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSet {
    pub scheme: ClassScheme,
    /// Regions per page, sorted by descending score.
    pub pages: BTreeMap<String, Vec<Region>>,
}

pub fn parse_detections(bytes: &[u8], pages: &[Page]) -> Result<DetectionSet> {
    let by_id: HashMap<&str, &Page> = pages.iter().map(|p| (p.id.as_str(), p)).collect();
    let recs = records(bytes)?;
    let Some(((header_line, header_raw), body)) = recs.split_first() else {
        return Err(Error::parse("detection file", "missing header line"));
    };
    let header: DetectionHeader = deserialize_with_path(header_raw)
        .map_err(|e| Error::parse(format!("header (line {header_line})"), e))?;
    let scheme = header.scheme;

    let mut out: BTreeMap<String, Vec<Region>> = BTreeMap::new();
    for (index, (line, raw)) in body.iter().enumerate() {
        let ctx = record_ctx(index, *line);
        let rec: DetectionRecord = deserialize_with_path(raw).map_err(|e| Error::parse(&ctx, e))?;
        let page = by_id
            .get(rec.page_id.as_str())
            .ok_or_else(|| Error::parse(&ctx, format!("unknown page_id {:?}", rec.page_id)))?;
        if out.contains_key(&rec.page_id) {
            return Err(Error::parse(&ctx, format!("page {} listed twice", rec.page_id)));
        }
        let (w, h) = (page.image_width_px as f64, page.image_height_px as f64);
        let words: HashSet<&str> = page.words.iter().map(|w| w.id.as_str()).collect();
        let mut regions = Vec::with_capacity(rec.detections.len());
        for (di, det) in rec.detections.into_iter().enumerate() {
            let dctx = format!("{ctx} detection {di}");
            let class = scheme.class_at(det.class_id).map_err(|e| Error::parse(&dctx, e))?;
            let source = det.source.unwrap_or(Source::Detected);
            if source == Source::Manual {
                return Err(Error::parse(&dctx, "manual regions do not belong in a detection file"));
            }
            let score = match (det.score, source) {
                (Some(s), _) if !(0.0..=1.0).contains(&s) => {
                    return Err(Error::parse(&dctx, format!("score {s} outside [0, 1]")));
                }
                (_, Source::Rebuilt) => None,
                (Some(s), _) => Some(s),
                (None, _) => return Err(Error::parse(&dctx, "missing score")),
            };
            let bbox = det.bbox.into();
            if !crate::geometry::BBox::within(&bbox, w, h) {
                return Err(Error::parse(&dctx, format!("box {bbox} outside page {}", page.id)));
            }
            if let Some(bad) = det.word_ids.iter().find(|id| !words.contains(id.as_str())) {
                return Err(Error::parse(&dctx, format!("word_id {bad:?} not on page {}", page.id)));
            }
            let (fine_class, coarse_class) = match class {
                RegionClass::Fine(f) => (Some(f), Some(f.coarse())),
                RegionClass::Coarse(c) => (None, Some(c)),
                RegionClass::Mono => (None, None),
            };
            regions.push(Region {
                id: det.id.unwrap_or_else(|| format!("d{di}")),
                bbox,
                fine_class,
                coarse_class,
                word_ids: det.word_ids,
                source,
                score,
            });
        }
        regions.sort_by(|a, b| b.rank_score().total_cmp(&a.rank_score()));
        out.insert(rec.page_id, regions);
    }
    Ok(DetectionSet { scheme, pages: out })
}

#[derive(Serialize)]
struct DetectionOut<'a> {
    page_id: &'a str,
    detections: Vec<DetectionOutEntry<'a>>,
}

#[derive(Serialize)]
struct DetectionOutEntry<'a> {
    id: &'a str,
    #[serde(rename = "box")]
    bbox: BoxRec,
    class_id: usize,
    score: Fixed,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    word_ids: &'a [String],
    source: Source,
}

/// Writes region predictions as a detection file. Unscored (rebuilt)
/// regions are written with score 1.
pub fn write_detections(scheme: ClassScheme, pages: &BTreeMap<String, Vec<Region>>) -> Result<Vec<u8>> {
    let mut out = to_json_line(&DetectionHeader { scheme })?;
    out.push('\n');
    for (page_id, regions) in pages {
        let mut detections = Vec::with_capacity(regions.len());
        for r in regions {
            let class = scheme.class_of(r).ok_or_else(|| {
                Error::data(format!("page {page_id} region {}: no {scheme} class", r.id))
            })?;
            detections.push(DetectionOutEntry {
                id: &r.id,
                bbox: r.bbox.into(),
                class_id: class_index(scheme, class)?,
                score: Fixed(r.rank_score()),
                word_ids: &r.word_ids,
                source: r.source,
            });
        }
        out.push_str(&to_json_line(&DetectionOut { page_id, detections })?);
        out.push('\n');
    }
    Ok(out.into_bytes())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WordListRecord {
    page_id: String,
    words: Vec<WordListEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WordListEntry {
    id: String,
    #[serde(rename = "box")]
    bbox: BoxRec,
    #[serde(default)]
    text: String,
}

/// Words per page; reading order is the order of the file.
pub fn parse_word_list(bytes: &[u8]) -> Result<BTreeMap<String, Vec<Word>>> {
    let mut out = BTreeMap::new();
    for (index, (line, raw)) in records(bytes)?.into_iter().enumerate() {
        let ctx = record_ctx(index, line);
        let rec: WordListRecord = deserialize_with_path(raw).map_err(|e| Error::parse(&ctx, e))?;
        let mut ids = HashSet::new();
        let words: Vec<Word> = rec
            .words
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                if !ids.insert(w.id.clone()) {
                    return Err(Error::parse(&ctx, format!("duplicate word id {}", w.id)));
                }
                Ok(Word {
                    id: w.id,
                    order_index: i,
                    bbox: w.bbox.into(),
                    text: w.text,
                })
            })
            .collect::<Result<_>>()?;
        if out.insert(rec.page_id.clone(), words).is_some() {
            return Err(Error::parse(&ctx, format!("page {} listed twice", rec.page_id)));
        }
    }
    Ok(out)
}
