//! Page generators shared by the integration tests.
#![allow(dead_code)]

use pagelayout::{BBox, CoarseClass, FineClass, Page, Region, Source, Word};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
    BBox::new(x0, y0, x1, y1).unwrap()
}

fn push_word(words: &mut Vec<Word>, bbox: BBox) -> String {
    let id = format!("w{}", words.len());
    words.push(Word {
        id: id.clone(),
        order_index: words.len(),
        bbox,
        text: format!("t{}", words.len()),
    });
    id
}

/// A page laid out as horizontal bands, one region per band, words in
/// reading order band after band. Region boxes are the bounding rectangles
/// of their words, and two neighbouring regions of the same class are
/// always separated by an unassigned word, so flat labels group back into
/// exactly the original regions.
pub fn layout_page(rng: &mut impl Rng, id: &str) -> Page {
    let mut words = Vec::new();
    let mut regions = Vec::new();
    let mut y = 10.0;
    let mut prev: Option<CoarseClass> = None;
    for r in 0..rng.gen_range(0..=6) {
        let class = CoarseClass::ALL[rng.gen_range(0..CoarseClass::ALL.len())];
        if prev == Some(class) || (r > 0 && rng.gen_bool(0.2)) {
            let w = rng.gen_range(10..60) as f64;
            push_word(&mut words, bb(10.0, y + 4.0, 10.0 + w, y + 16.0));
        }
        y += 20.0;
        let n_words = rng.gen_range(1..=8);
        let mut ids = Vec::new();
        let mut boxes = Vec::new();
        let mut placed = 0;
        while placed < n_words {
            let mut x = 10.0 + rng.gen_range(0..20) as f64;
            for _ in 0..rng.gen_range(1..=4).min(n_words - placed) {
                let w = rng.gen_range(10..60) as f64;
                let h = rng.gen_range(8..=12) as f64;
                let b = bb(x, y, x + w, y + h);
                ids.push(push_word(&mut words, b));
                boxes.push(b);
                x += w + rng.gen_range(3..10) as f64;
                placed += 1;
            }
            y += 16.0;
        }
        let bbox = pagelayout::geometry::minimal_bounding_rect(&boxes).unwrap();
        y = bbox.y_max;
        regions.push(Region::manual(format!("r{r}"), bbox, class).with_words(ids));
        prev = Some(class);
    }
    if rng.gen_bool(0.3) {
        push_word(&mut words, bb(10.0, y + 4.0, 40.0, y + 16.0));
        y += 20.0;
    }
    Page {
        id: id.to_string(),
        image_path: format!("{id}.png"),
        image_width_px: 400,
        image_height_px: (y + 10.0).ceil() as u32,
        words,
        regions,
    }
}

const TEXTS: &[&str] = &["", "AIAS", "τοῦ", "\"quoted\"", "a\\b", "ἀλλ᾽", "l'homme", "tab\there"];

/// Coordinate in thousandths, so that it survives 6-digit output exactly.
fn milli(rng: &mut impl Rng, max: u32) -> f64 {
    rng.gen_range(0..=max * 1000) as f64 / 1000.0
}

fn random_box(rng: &mut impl Rng, w: u32, h: u32) -> BBox {
    let (a, b) = (milli(rng, w), milli(rng, w));
    let (c, d) = (milli(rng, h), milli(rng, h));
    bb(a.min(b), c.min(d), a.max(b), c.max(d))
}

/// An arbitrary well-formed page exercising every optional field.
pub fn random_page(rng: &mut impl Rng, id: &str) -> Page {
    let (w, h) = (rng.gen_range(50..4000), rng.gen_range(50..4000));
    let words: Vec<Word> = (0..rng.gen_range(0..15))
        .map(|i| Word {
            id: format!("w{i}"),
            order_index: i,
            bbox: random_box(rng, w, h),
            text: TEXTS[rng.gen_range(0..TEXTS.len())].to_string(),
        })
        .collect();
    let regions = (0..rng.gen_range(0..8))
        .map(|i| {
            let bbox = random_box(rng, w, h);
            let fine = FineClass::ALL[rng.gen_range(0..FineClass::ALL.len())];
            let coarse = CoarseClass::ALL[rng.gen_range(0..CoarseClass::ALL.len())];
            let score = rng.gen_range(0..=1000) as f64 / 1000.0;
            let mut region = match rng.gen_range(0..6) {
                0 => Region::manual_fine(format!("r{i}"), bbox, fine),
                1 => Region::manual(format!("r{i}"), bbox, coarse),
                2 => pagelayout::model::collapse_mono(&Region::manual(format!("r{i}"), bbox, coarse)),
                3 => Region::detected(format!("r{i}"), bbox, rng.gen_bool(0.5).then_some(coarse), score),
                4 => Region {
                    source: Source::Fused,
                    ..Region::detected(format!("r{i}"), bbox, Some(coarse), score)
                },
                _ => Region {
                    source: Source::Rebuilt,
                    ..Region::manual(format!("r{i}"), bbox, coarse)
                },
            };
            region.word_ids = words
                .iter()
                .filter(|_| rng.gen_bool(0.3))
                .map(|w| w.id.clone())
                .collect();
            region
        })
        .collect();
    Page {
        id: id.to_string(),
        image_path: format!("scans/{id}.png"),
        image_width_px: w,
        image_height_px: h,
        words,
        regions,
    }
}
