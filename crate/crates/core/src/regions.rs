//! Word/region procedures.
//!
//! * assigning words to regions by overlap,
//! * labeling words from the regions they fall in (flat or BEGIN/INSIDE),
//! * shrinking a region to the minimal rectangle around its words,
//! * rebuilding regions from runs of identical token labels,
//! * fusing detected regions with token labels by majority vote.
//!
//! Reading order is always the order of `Page::words`; nothing here re-sorts
//! words geometrically.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{self, BBox};
use crate::model::{CoarseClass, Page, Region, Source, Word};

/// Minimum share of a word's area that must fall inside a region for the
/// word to count as contained.
pub const DEFAULT_WORD_OVERLAP: f64 = 0.5;

/// Per-word coarse label (`None` = the word belongs to no region).
pub type LabelMap = BTreeMap<String, Option<CoarseClass>>;

/// Share of `word` covered by `region`. Zero-area words count as fully
/// covered when they lie inside the region, and not covered otherwise.
pub fn containment_ratio(word: &BBox, region: &BBox) -> f64 {
    let a = word.area();
    if a > 0.0 {
        geometry::intersection_area(word, region) / a
    } else if region.contains(word) {
        1.0
    } else {
        0.0
    }
}

/// For each word, the index of the target box that contains the largest
/// share of it, provided that share reaches `min_overlap`. Ties go to the
/// smaller target, then to the lexicographically smaller id.
pub fn assign_to_boxes(words: &[Word], targets: &[(&str, BBox)], min_overlap: f64) -> Vec<Option<usize>> {
    words
        .iter()
        .map(|word| {
            let mut best: Option<(usize, f64)> = None;
            for (i, (id, bbox)) in targets.iter().enumerate() {
                let ratio = containment_ratio(&word.bbox, bbox);
                if ratio < min_overlap || ratio <= 0.0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((j, best_ratio)) => {
                        let (bid, bbox_j) = targets[j];
                        ratio > best_ratio
                            || (ratio == best_ratio
                                && (bbox.area() < bbox_j.area()
                                    || (bbox.area() == bbox_j.area() && *id < bid)))
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            best.map(|(i, _)| i)
        })
        .collect()
}

/// Word → region assignment for one page, aligned with `page.words`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordAssignment {
    slots: Vec<Option<usize>>,
}

impl WordAssignment {
    /// Index into `page.regions` of the region holding word `word_index`.
    pub fn region_index(&self, word_index: usize) -> Option<usize> {
        self.slots.get(word_index).copied().flatten()
    }

    pub fn region_of<'p>(&self, page: &'p Page, word_id: &str) -> Option<&'p str> {
        let i = page.words.iter().position(|w| w.id == word_id)?;
        self.region_index(i).map(|r| page.regions[r].id.as_str())
    }

    /// Word indices assigned to region `region_index`, in reading order.
    pub fn words_of(&self, region_index: usize) -> Vec<usize> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == Some(region_index))
            .map(|(w, _)| w)
            .collect()
    }

    pub fn to_map(&self, page: &Page) -> BTreeMap<String, Option<String>> {
        page.words
            .iter()
            .zip(&self.slots)
            .map(|(w, r)| (w.id.clone(), r.map(|r| page.regions[r].id.clone())))
            .collect()
    }
}

pub fn assign_words(page: &Page, min_overlap: f64) -> WordAssignment {
    let targets: Vec<(&str, BBox)> = page.regions.iter().map(|r| (r.id.as_str(), r.bbox)).collect();
    WordAssignment {
        slots: assign_to_boxes(&page.words, &targets, min_overlap),
    }
}

/// Copy of the page whose regions list the words assigned to them.
pub fn attach_assigned_words(page: &Page, min_overlap: f64) -> Page {
    let assignment = assign_words(page, min_overlap);
    let mut out = page.clone();
    for (ri, region) in out.regions.iter_mut().enumerate() {
        region.word_ids = assignment
            .words_of(ri)
            .into_iter()
            .map(|w| page.words[w].id.clone())
            .collect();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LabelingScheme {
    /// Every word of a region carries the region's class.
    #[default]
    Flat,
    /// First word BEGIN-class, following words INSIDE-class.
    Bio,
}

impl FromStr for LabelingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flat" => Ok(LabelingScheme::Flat),
            "bio" => Ok(LabelingScheme::Bio),
            other => Err(Error::parse("labeling scheme", format!("unknown scheme {other:?}"))),
        }
    }
}

/// A token label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenLabel {
    None,
    Class(CoarseClass),
    Begin(CoarseClass),
    Inside(CoarseClass),
}

impl TokenLabel {
    /// The class with any BEGIN/INSIDE prefix stripped.
    pub fn class(self) -> Option<CoarseClass> {
        match self {
            TokenLabel::None => None,
            TokenLabel::Class(c) | TokenLabel::Begin(c) | TokenLabel::Inside(c) => Some(c),
        }
    }

    pub fn flat(self) -> TokenLabel {
        self.class().map_or(TokenLabel::None, TokenLabel::Class)
    }
}

impl fmt::Display for TokenLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenLabel::None => f.write_str("none"),
            TokenLabel::Class(c) => write!(f, "{c}"),
            TokenLabel::Begin(c) => write!(f, "BEGIN-{c}"),
            TokenLabel::Inside(c) => write!(f, "INSIDE-{c}"),
        }
    }
}

impl FromStr for TokenLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("none") || s == "O" {
            return Ok(TokenLabel::None);
        }
        if let Some(rest) = s.strip_prefix("BEGIN-") {
            return Ok(TokenLabel::Begin(rest.parse()?));
        }
        if let Some(rest) = s.strip_prefix("INSIDE-") {
            return Ok(TokenLabel::Inside(rest.parse()?));
        }
        Ok(TokenLabel::Class(s.parse()?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordLabel {
    pub word_id: String,
    pub label: TokenLabel,
}

/// Labels every word of the page from the region it is assigned to.
///
/// Words of mono-collapsed regions carry no class and stay `none`.
pub fn label_words(page: &Page, scheme: LabelingScheme, assignment: &WordAssignment) -> Vec<WordLabel> {
    let mut seen_region = vec![false; page.regions.len()];
    page.words
        .iter()
        .enumerate()
        .map(|(wi, word)| {
            let label = match assignment.region_index(wi) {
                None => TokenLabel::None,
                Some(ri) => match page.regions[ri].coarse_class {
                    None => TokenLabel::None,
                    Some(c) => match scheme {
                        LabelingScheme::Flat => TokenLabel::Class(c),
                        LabelingScheme::Bio if !seen_region[ri] => {
                            seen_region[ri] = true;
                            TokenLabel::Begin(c)
                        }
                        LabelingScheme::Bio => TokenLabel::Inside(c),
                    },
                },
            };
            WordLabel {
                word_id: word.id.clone(),
                label,
            }
        })
        .collect()
}

/// Flat labels of a page as a word-id → class map.
pub fn flat_label_map(page: &Page, min_overlap: f64) -> LabelMap {
    let assignment = assign_words(page, min_overlap);
    label_words(page, LabelingScheme::Flat, &assignment)
        .into_iter()
        .map(|wl| (wl.word_id, wl.label.class()))
        .collect()
}

/// Result of fitting a region to its words.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub region: Region,
    /// Set when the region had no resolvable member words and was left as is.
    pub no_words: bool,
}

/// Replaces the region box by the minimal rectangle around its member words.
pub fn fit_region(region: &Region, page: &Page) -> FitOutcome {
    let boxes: Vec<BBox> = region
        .word_ids
        .iter()
        .filter_map(|id| page.word(id).map(|w| w.bbox))
        .collect();
    match geometry::minimal_bounding_rect(&boxes) {
        Ok(bbox) => FitOutcome {
            region: Region {
                bbox,
                ..region.clone()
            },
            no_words: false,
        },
        Err(_) => FitOutcome {
            region: region.clone(),
            no_words: true,
        },
    }
}

/// Fits every region of the page; returns the page and the ids of regions
/// left unchanged for lack of words.
pub fn fit_page(page: &Page) -> (Page, Vec<String>) {
    let mut flagged = Vec::new();
    let regions = page
        .regions
        .iter()
        .map(|r| {
            let out = fit_region(r, page);
            if out.no_words {
                flagged.push(r.id.clone());
            }
            out.region
        })
        .collect();
    (
        Page {
            regions,
            ..page.clone()
        },
        flagged,
    )
}

/// Groups maximal runs of consecutive words sharing a non-none label into
/// regions. Words missing from `labels` count as `none`.
pub fn rebuild_regions(words: &[Word], labels: &LabelMap) -> Vec<Region> {
    let label_of = |w: &Word| labels.get(&w.id).copied().flatten();
    let mut out: Vec<Region> = Vec::new();
    let mut run: Vec<&Word> = Vec::new();
    let mut run_class: Option<CoarseClass> = None;

    let close = |run: &mut Vec<&Word>, class: Option<CoarseClass>, out: &mut Vec<Region>| {
        if let (Some(class), false) = (class, run.is_empty()) {
            let bbox = geometry::minimal_bounding_rect(run.iter().map(|w| &w.bbox))
                .expect("non-empty run");
            out.push(Region {
                id: format!("rb{}", out.len()),
                bbox,
                fine_class: None,
                coarse_class: Some(class),
                word_ids: run.iter().map(|w| w.id.clone()).collect(),
                source: Source::Rebuilt,
                score: None,
            });
        }
        run.clear();
    };

    for word in words {
        let label = label_of(word);
        if label != run_class {
            close(&mut run, run_class, &mut out);
            run_class = label;
        }
        if label.is_some() {
            run.push(word);
        }
    }
    close(&mut run, run_class, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuseOptions {
    pub min_overlap: f64,
    /// Score fused regions by the majority's share of labeled words instead
    /// of keeping the detector score.
    pub vote_fraction: bool,
}

impl Default for FuseOptions {
    fn default() -> Self {
        FuseOptions {
            min_overlap: DEFAULT_WORD_OVERLAP,
            vote_fraction: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuseOutcome {
    pub regions: Vec<Region>,
    /// Ids of detections that contained no labeled word and fell back to
    /// `others`.
    pub flagged: Vec<String>,
}

/// Labels each detection with the majority token label of the words it
/// contains. Ties go to the class of the earliest tied word in reading order.
pub fn fuse(detections: &[Region], words: &[Word], labels: &LabelMap, opts: FuseOptions) -> FuseOutcome {
    let targets: Vec<(&str, BBox)> = detections.iter().map(|d| (d.id.as_str(), d.bbox)).collect();
    let slots = assign_to_boxes(words, &targets, opts.min_overlap);

    let mut regions = Vec::with_capacity(detections.len());
    let mut flagged = Vec::new();
    for (di, det) in detections.iter().enumerate() {
        // class -> (count, first reading-order position)
        let mut votes: BTreeMap<CoarseClass, (usize, usize)> = BTreeMap::new();
        let mut labeled = 0usize;
        let mut members = Vec::new();
        for (wi, word) in words.iter().enumerate() {
            if slots[wi] != Some(di) {
                continue;
            }
            members.push(word.id.clone());
            if let Some(class) = labels.get(&word.id).copied().flatten() {
                labeled += 1;
                votes.entry(class).or_insert((0, wi)).0 += 1;
            }
        }
        let winner = votes
            .iter()
            .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
            .map(|(&c, &(n, _))| (c, n));
        let det_score = det.rank_score();
        let (class, score) = match winner {
            Some((class, n)) => {
                let score = if opts.vote_fraction {
                    n as f64 / labeled as f64
                } else {
                    det_score
                };
                (class, score)
            }
            None => {
                flagged.push(det.id.clone());
                (
                    CoarseClass::Others,
                    if opts.vote_fraction { 0.0 } else { det_score },
                )
            }
        };
        regions.push(Region {
            id: det.id.clone(),
            bbox: det.bbox,
            fine_class: None,
            coarse_class: Some(class),
            word_ids: members,
            source: Source::Fused,
            score: Some(score),
        });
    }
    FuseOutcome { regions, flagged }
}
