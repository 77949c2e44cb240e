//! COCO detection dataset export.

use std::collections::HashSet;

use serde::Serialize;

use super::Fixed;
use crate::error::{Error, Result};
use crate::model::{class_index, ClassScheme, Document};

#[derive(Serialize)]
struct CocoImage<'a> {
    id: usize,
    file_name: &'a str,
    width: u32,
    height: u32,
}

#[derive(Serialize)]
struct CocoAnnotation {
    id: usize,
    image_id: usize,
    category_id: usize,
    bbox: [Fixed; 4],
    area: Fixed,
    iscrowd: u8,
}

#[derive(Serialize)]
struct CocoCategory {
    id: usize,
    name: &'static str,
    supercategory: &'static str,
}

#[derive(Serialize)]
struct CocoDataset<'a> {
    images: Vec<CocoImage<'a>>,
    annotations: Vec<CocoAnnotation>,
    categories: Vec<CocoCategory>,
}

/// One COCO file for all pages of `documents`. Image and annotation ids are
/// 1-based in document/page/region order; category ids are
/// `class_index + 1`.
pub fn export_coco(documents: &[Document], scheme: ClassScheme) -> Result<Vec<u8>> {
    let mut seen = HashSet::new();
    let mut images = Vec::new();
    let mut annotations = Vec::new();
    for page in documents.iter().flat_map(|d| &d.pages) {
        if !seen.insert(page.id.as_str()) {
            return Err(Error::data(format!("duplicate page id {} across documents", page.id)));
        }
        if page.image_width_px == 0 || page.image_height_px == 0 {
            return Err(Error::data(format!("page {}: missing image dimensions", page.id)));
        }
        let image_id = images.len() + 1;
        images.push(CocoImage {
            id: image_id,
            file_name: &page.image_path,
            width: page.image_width_px,
            height: page.image_height_px,
        });
        for region in &page.regions {
            let class = scheme.class_of(region).ok_or_else(|| {
                Error::data(format!(
                    "page {} region {}: no {scheme} class",
                    page.id, region.id
                ))
            })?;
            let b = region.bbox;
            annotations.push(CocoAnnotation {
                id: annotations.len() + 1,
                image_id,
                category_id: class_index(scheme, class)? + 1,
                bbox: [Fixed(b.x_min), Fixed(b.y_min), Fixed(b.width()), Fixed(b.height())],
                area: Fixed(b.area()),
                iscrowd: 0,
            });
        }
    }
    let categories = scheme
        .classes()
        .into_iter()
        .enumerate()
        .map(|(i, c)| CocoCategory {
            id: i + 1,
            name: c.as_str(),
            supercategory: "region",
        })
        .collect();
    super::to_json_bytes(&CocoDataset {
        images,
        annotations,
        categories,
    })
}
