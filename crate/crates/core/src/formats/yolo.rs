//! YOLO label text: one `class_id x_center y_center width height` line per
//! region, coordinates normalized by the image size, 6 decimal places.
//! A sixth column, when present, is read as a detection score.

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::model::{class_index, ClassScheme, Page, Region, RegionClass, Source};

pub fn export_yolo(page: &Page, scheme: ClassScheme) -> Result<String> {
    let (w, h) = (page.image_width_px as f64, page.image_height_px as f64);
    if w <= 0.0 || h <= 0.0 {
        return Err(Error::data(format!("page {}: image dimensions must be positive", page.id)));
    }
    let mut out = String::new();
    for region in &page.regions {
        let ctx = || format!("page {} region {}", page.id, region.id);
        let class = scheme.class_of(region).ok_or_else(|| {
            Error::data(format!("{}: no {} class", ctx(), scheme))
        })?;
        let id = class_index(scheme, class)?;
        let b = &region.bbox;
        if !b.within(w, h) {
            return Err(Error::data(format!("{}: box {b} exceeds page bounds", ctx())));
        }
        let values = [
            (b.x_min + b.x_max) / 2.0 / w,
            (b.y_min + b.y_max) / 2.0 / h,
            b.width() / w,
            b.height() / h,
        ];
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::data(format!("{}: normalized value outside [0, 1]", ctx())));
        }
        out.push_str(&format!(
            "{id} {:.6} {:.6} {:.6} {:.6}\n",
            values[0], values[1], values[2], values[3]
        ));
    }
    Ok(out)
}

/// Parses YOLO label lines back into regions on a `width` x `height` page.
/// Rows with a score column become detected regions, others manual ones.
pub fn parse_yolo(text: &str, width: u32, height: u32, scheme: ClassScheme) -> Result<Vec<Region>> {
    let (w, h) = (width as f64, height as f64);
    if width == 0 || height == 0 {
        return Err(Error::data("image dimensions must be positive"));
    }
    let mut regions = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let ctx = format!("line {}", lineno + 1);
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 && fields.len() != 6 {
            return Err(Error::parse(&ctx, format!("expected 5 or 6 fields, found {}", fields.len())));
        }
        let class_id: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(&ctx, format!("bad class id {:?}", fields[0])))?;
        let class = scheme.class_at(class_id).map_err(|e| Error::parse(&ctx, e))?;
        let mut nums = [0.0f64; 5];
        for (slot, f) in nums.iter_mut().zip(&fields[1..]) {
            *slot = f
                .parse()
                .map_err(|_| Error::parse(&ctx, format!("bad number {f:?}")))?;
            if !(0.0..=1.0).contains(slot) {
                return Err(Error::parse(&ctx, format!("value {f} outside [0, 1]")));
            }
        }
        let [xc, yc, bw, bh, score] = nums;
        let bbox = BBox {
            x_min: (xc - bw / 2.0) * w,
            y_min: (yc - bh / 2.0) * h,
            x_max: (xc + bw / 2.0) * w,
            y_max: (yc + bh / 2.0) * h,
        }
        // quantization can push edges a hair past the page
        .clamped(w, h);
        let (fine, coarse) = match class {
            RegionClass::Fine(f) => (Some(f), Some(f.coarse())),
            RegionClass::Coarse(c) => (None, Some(c)),
            RegionClass::Mono => (None, None),
        };
        let scored = fields.len() == 6;
        regions.push(Region {
            id: format!("y{lineno}"),
            bbox,
            fine_class: fine,
            coarse_class: coarse,
            word_ids: Vec::new(),
            source: if scored { Source::Detected } else { Source::Manual },
            score: scored.then_some(score),
        });
    }
    Ok(regions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoarseClass, FineClass};

    fn page(regions: Vec<Region>) -> Page {
        Page {
            id: "p".into(),
            image_path: "p.png".into(),
            image_width_px: 1000,
            image_height_px: 1600,
            words: vec![],
            regions,
        }
    }

    #[test]
    fn full_page_box_mono() {
        let p = page(vec![Region::manual(
            "r",
            BBox::new(0.0, 0.0, 1000.0, 1600.0).unwrap(),
            CoarseClass::Commentary,
        )]);
        assert_eq!(
            export_yolo(&p, ClassScheme::Mono).unwrap(),
            "0 0.500000 0.500000 1.000000 1.000000\n"
        );
    }

    #[test]
    fn empty_page_empty_output() {
        assert_eq!(export_yolo(&page(vec![]), ClassScheme::Coarse).unwrap(), "");
    }

    #[test]
    fn out_of_bounds_rejected() {
        let p = page(vec![Region::manual(
            "r",
            BBox::new(0.0, 0.0, 1001.0, 10.0).unwrap(),
            CoarseClass::Number,
        )]);
        assert!(export_yolo(&p, ClassScheme::Coarse).is_err());
    }

    #[test]
    fn coarse_round_trip_within_quantization() {
        let regions = vec![
            Region::manual_fine("a", BBox::new(13.3, 17.7, 503.1, 99.9).unwrap(), FineClass::Preface),
            Region::manual("b", BBox::new(0.0, 1500.0, 1000.0, 1600.0).unwrap(), CoarseClass::RunningHeader),
        ];
        let p = page(regions.clone());
        let text = export_yolo(&p, ClassScheme::Coarse).unwrap();
        let back = parse_yolo(&text, 1000, 1600, ClassScheme::Coarse).unwrap();
        assert_eq!(back.len(), 2);
        for (orig, parsed) in regions.iter().zip(&back) {
            assert_eq!(orig.coarse_class, parsed.coarse_class);
            let tol = 1e-6 * 1600.0;
            for (a, b) in [
                (orig.bbox.x_min, parsed.bbox.x_min),
                (orig.bbox.y_min, parsed.bbox.y_min),
                (orig.bbox.x_max, parsed.bbox.x_max),
                (orig.bbox.y_max, parsed.bbox.y_max),
            ] {
                assert!((a - b).abs() < tol, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn parse_errors_and_scores() {
        assert!(parse_yolo("9 0.5 0.5 0.1 0.1", 10, 10, ClassScheme::Coarse).is_err());
        assert!(parse_yolo("0 1.5 0.5 0.1 0.1", 10, 10, ClassScheme::Coarse).is_err());
        assert!(parse_yolo("0 0.5 0.5 0.1", 10, 10, ClassScheme::Coarse).is_err());
        let r = parse_yolo("0 0.5 0.5 0.2 0.2 0.75\n\n", 10, 10, ClassScheme::Mono).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].source, Source::Detected);
        assert_eq!(r[0].score, Some(0.75));
        assert!(r[0].is_mono());
    }
}
