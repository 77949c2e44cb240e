//! VGG Image Annotator 2.x project files (read-only).
//!
//! Accepts both the full project file (images under `_via_img_metadata`)
//! and the bare annotation export (images at top level). Only rectangle
//! shapes are supported. The class lives in a region attribute whose name is
//! configurable; its value is either a string or a checkbox/dropdown object
//! with exactly one `true` entry.
//!
//! VIA does not record image dimensions. They come from
//! [`ViaOptions::dimensions`] or from `width`/`height` file attributes.
//! Rectangles spilling over the image edge are clamped to the page.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{Map, Value};

use super::byte_offset;
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::model::{FineClass, Page, Region};

#[derive(Debug, Clone)]
pub struct ViaOptions {
    /// Region attribute holding the class name.
    pub class_attr: String,
    /// Image dimensions (width, height) keyed by filename or page id.
    pub dimensions: BTreeMap<String, (u32, u32)>,
}

impl Default for ViaOptions {
    fn default() -> Self {
        ViaOptions {
            class_attr: "type".to_string(),
            dimensions: BTreeMap::new(),
        }
    }
}

#[derive(Deserialize)]
struct ViaImage {
    filename: String,
    #[serde(default)]
    regions: ViaRegions,
    #[serde(default)]
    file_attributes: Map<String, Value>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ViaRegions {
    List(Vec<ViaRegion>),
    // VIA 1.x keyed regions by index
    Keyed(BTreeMap<String, ViaRegion>),
}

impl Default for ViaRegions {
    fn default() -> Self {
        ViaRegions::List(Vec::new())
    }
}

impl ViaRegions {
    fn into_vec(self) -> Vec<ViaRegion> {
        match self {
            ViaRegions::List(v) => v,
            ViaRegions::Keyed(m) => {
                let mut entries: Vec<_> = m.into_iter().collect();
                entries.sort_by_key(|(k, _)| k.parse::<u64>().unwrap_or(u64::MAX));
                entries.into_iter().map(|(_, r)| r).collect()
            }
        }
    }
}

#[derive(Deserialize)]
struct ViaRegion {
    shape_attributes: Map<String, Value>,
    #[serde(default)]
    region_attributes: Map<String, Value>,
}

#[derive(Deserialize)]
struct ViaProject {
    #[serde(rename = "_via_img_metadata")]
    img_metadata: BTreeMap<String, ViaImage>,
}

fn json_error(src: &[u8], e: serde_json::Error) -> Error {
    let offset = byte_offset(src, e.line(), e.column());
    Error::parse(format!("VIA project at byte offset {offset}"), e)
}

fn page_id_of(filename: &str) -> String {
    let base = filename.rsplit(['/', '\\']).next().unwrap_or(filename);
    match base.rsplit_once('.') {
        Some((stem, _)) if !stem.is_empty() => stem.to_string(),
        _ => base.to_string(),
    }
}

fn number(v: Option<&Value>) -> Option<f64> {
    match v? {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn dimensions(image: &ViaImage, page_id: &str, opts: &ViaOptions) -> Result<(u32, u32)> {
    if let Some(&d) = opts
        .dimensions
        .get(&image.filename)
        .or_else(|| opts.dimensions.get(page_id))
    {
        return Ok(d);
    }
    let attrs = &image.file_attributes;
    let w = number(attrs.get("width").or_else(|| attrs.get("image_width")));
    let h = number(attrs.get("height").or_else(|| attrs.get("image_height")));
    match (w, h) {
        (Some(w), Some(h)) if w >= 1.0 && h >= 1.0 => Ok((w.round() as u32, h.round() as u32)),
        _ => Err(Error::parse(
            format!("image {}", image.filename),
            "no image dimensions: supply them in the options or as width/height file attributes",
        )),
    }
}

fn class_name(attrs: &Map<String, Value>, class_attr: &str) -> std::result::Result<String, String> {
    match attrs.get(class_attr) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Object(o)) => {
            let on: Vec<_> = o
                .iter()
                .filter(|(_, v)| matches!(v, Value::Bool(true)) || v.as_str() == Some("true"))
                .map(|(k, _)| k.clone())
                .collect();
            match on.as_slice() {
                [one] => Ok(one.clone()),
                [] => Err(format!("attribute {class_attr:?} has no selected value")),
                _ => Err(format!("attribute {class_attr:?} has several selected values: {on:?}")),
            }
        }
        Some(other) => Err(format!("attribute {class_attr:?} has unsupported value {other}")),
        None => Err(format!("missing class attribute {class_attr:?}")),
    }
}

fn convert_image(image: ViaImage, opts: &ViaOptions) -> Result<Page> {
    let page_id = page_id_of(&image.filename);
    let (width, height) = dimensions(&image, &page_id, opts)?;
    let ViaImage {
        filename,
        regions: source_regions,
        ..
    } = image;
    let ctx = |i: usize| format!("image {filename} region {i}");
    let mut regions = Vec::new();
    for (i, region) in source_regions.into_vec().into_iter().enumerate() {
        let shape = region.shape_attributes.get("name").and_then(Value::as_str).unwrap_or("");
        if shape != "rect" {
            return Err(Error::parse(
                ctx(i),
                format!("unsupported shape {shape:?}, only rectangles are accepted"),
            ));
        }
        let coord = |k: &str| {
            number(region.shape_attributes.get(k))
                .ok_or_else(|| Error::parse(ctx(i), format!("rectangle lacks numeric {k:?}")))
        };
        let (x, y, w, h) = (coord("x")?, coord("y")?, coord("width")?, coord("height")?);
        if w < 0.0 || h < 0.0 || ![x, y, w, h].iter().all(|v| v.is_finite()) {
            return Err(Error::parse(ctx(i), "rectangle with negative or non-finite size"));
        }
        let raw = BBox {
            x_min: x,
            y_min: y,
            x_max: x + w,
            y_max: y + h,
        };
        let bbox = raw.clamped(width as f64, height as f64);
        let name = class_name(&region.region_attributes, &opts.class_attr)
            .map_err(|m| Error::parse(ctx(i), m))?;
        let fine: FineClass = name
            .parse()
            .map_err(|e| Error::parse(format!("image {filename}"), e))?;
        regions.push(Region::manual_fine(format!("r{i}"), bbox, fine));
    }
    Ok(Page {
        id: page_id,
        image_path: filename,
        image_width_px: width,
        image_height_px: height,
        words: Vec::new(),
        regions,
    })
}

/// Parses a VIA project into pages (regions only, no words), ordered by
/// image key.
pub fn parse_via(bytes: &[u8], opts: &ViaOptions) -> Result<Vec<Page>> {
    let probe: Value = serde_json::from_slice(bytes).map_err(|e| json_error(bytes, e))?;
    let obj = probe
        .as_object()
        .ok_or_else(|| Error::parse("VIA project at byte offset 0", "top level is not an object"))?;
    let images: BTreeMap<String, ViaImage> = if obj.contains_key("_via_img_metadata") {
        serde_json::from_slice::<ViaProject>(bytes)
            .map_err(|e| json_error(bytes, e))?
            .img_metadata
    } else {
        serde_json::from_slice(bytes).map_err(|e| json_error(bytes, e))?
    };
    let mut pages: Vec<Page> = Vec::with_capacity(images.len());
    for (_, image) in images {
        let page = convert_image(image, opts)?;
        if pages.iter().any(|p| p.id == page.id) {
            return Err(Error::parse(
                format!("image {}", page.image_path),
                format!("duplicate page id {}", page.id),
            ));
        }
        pages.push(page);
    }
    Ok(pages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CoarseClass;

    fn project(region_attr: &str, shape: &str) -> String {
        format!(
            r#"{{
  "_via_settings": {{}},
  "_via_img_metadata": {{
    "p1.png12345": {{
      "filename": "p1.png",
      "size": 12345,
      "regions": [
        {{"shape_attributes": {shape},
          "region_attributes": {region_attr}}}
      ],
      "file_attributes": {{"width": "1000", "height": 1500}}
    }}
  }},
  "_via_attributes": {{}}
}}"#
        )
    }

    const RECT: &str = r#"{"name": "rect", "x": 10, "y": 20, "width": 30, "height": 40}"#;

    #[test]
    fn one_image_one_rect() {
        let src = project(r#"{"type": "page number"}"#, RECT);
        let pages = parse_via(src.as_bytes(), &ViaOptions::default()).unwrap();
        assert_eq!(pages.len(), 1);
        let p = &pages[0];
        assert_eq!((p.id.as_str(), p.image_width_px, p.image_height_px), ("p1", 1000, 1500));
        assert!(p.words.is_empty());
        let r = &p.regions[0];
        assert_eq!(r.fine_class, Some(FineClass::PageNumber));
        assert_eq!(r.coarse_class, Some(CoarseClass::Number));
        assert_eq!(r.bbox, BBox::new(10.0, 20.0, 40.0, 60.0).unwrap());
    }

    #[test]
    fn empty_project() {
        let src = r#"{"_via_settings": {}, "_via_img_metadata": {}}"#;
        assert!(parse_via(src.as_bytes(), &ViaOptions::default()).unwrap().is_empty());
        assert!(parse_via(b"{}", &ViaOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn unknown_class_lists_valid_ones() {
        let src = project(r#"{"type": "marginalia"}"#, RECT);
        let err = parse_via(src.as_bytes(), &ViaOptions::default()).unwrap_err().to_string();
        assert!(err.contains("marginalia") && err.contains("p1.png"), "{err}");
        assert!(err.contains("printed_marginalia"), "{err}");
    }

    #[test]
    fn non_rect_rejected() {
        let src = project(
            r#"{"type": "title"}"#,
            r#"{"name": "polygon", "all_points_x": [1,2,3], "all_points_y": [1,2,3]}"#,
        );
        let err = parse_via(src.as_bytes(), &ViaOptions::default()).unwrap_err().to_string();
        assert!(err.contains("polygon"), "{err}");
    }

    #[test]
    fn malformed_json_reports_offset() {
        let src = "{\n  \"_via_img_metadata\": {\n    \"a\": [\n";
        let err = parse_via(src.as_bytes(), &ViaOptions::default()).unwrap_err().to_string();
        assert!(err.contains("byte offset"), "{err}");
        let structural = r#"{"_via_img_metadata": {"a": {"regions": []}}}"#;
        let err = parse_via(structural.as_bytes(), &ViaOptions::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("byte offset") && err.contains("filename"), "{err}");
    }

    #[test]
    fn configurable_attribute_and_checkbox_values() {
        let src = project(r#"{"region_type": {"commentary": true, "title": false}}"#, RECT);
        let opts = ViaOptions {
            class_attr: "region_type".into(),
            ..Default::default()
        };
        let pages = parse_via(src.as_bytes(), &opts).unwrap();
        assert_eq!(pages[0].regions[0].fine_class, Some(FineClass::Commentary));
    }

    #[test]
    fn bare_export_with_external_dimensions() {
        let src = format!(
            r#"{{"p2.jpg1": {{"filename": "scans/p2.jpg", "regions": [{{"shape_attributes": {RECT}, "region_attributes": {{"type": "running header"}}}}]}}}}"#
        );
        assert!(parse_via(src.as_bytes(), &ViaOptions::default()).is_err());
        let mut opts = ViaOptions::default();
        opts.dimensions.insert("p2".into(), (35, 2000));
        let pages = parse_via(src.as_bytes(), &opts).unwrap();
        // clamped to the 35 px page width
        assert_eq!(pages[0].regions[0].bbox.x_max, 35.0);
        assert_eq!(pages[0].id, "p2");
    }
}
