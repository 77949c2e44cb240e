//! Domain types and the region taxonomy.
//!
//! Fine classes are the 18 annotation classes; each maps onto one of 8
//! coarse classes (the ones used for training and evaluation) and onto a
//! SegmOnto `ZoneType[:subtype]` label. Class names are lowercase snake_case
//! internally; parsing also accepts the prose spellings used in annotation
//! files ("critical apparatus", "Page Number", ...).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::BBox;

fn normalize_class_name(s: &str) -> String {
    s.trim()
        .chars()
        .map(|c| match c {
            ' ' | '-' => '_',
            c => c.to_ascii_lowercase(),
        })
        .collect::<String>()
        .split('_')
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

macro_rules! class_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal, [$($variant:ident => $snake:literal),+ $(,)?]) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            /// Every class, in canonical enumeration order.
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $snake),+
                }
            }

            /// Prose spelling as used in annotation files.
            pub fn display_name(self) -> String {
                self.as_str().replace('_', " ")
            }

            /// Dense 0-based position in [`Self::ALL`].
            pub fn index(self) -> usize {
                self as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let norm = normalize_class_name(s);
                $name::ALL
                    .iter()
                    .copied()
                    .find(|c| c.as_str() == norm)
                    .ok_or_else(|| Error::UnknownClass {
                        kind: $kind,
                        value: s.to_string(),
                        valid: $name::ALL
                            .iter()
                            .map(|c| c.as_str())
                            .collect::<Vec<_>>()
                            .join(", "),
                    })
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

class_enum!(
    /// The 18 fine-grained annotation classes.
    FineClass, "fine", [
        Commentary => "commentary",
        CriticalApparatus => "critical_apparatus",
        Footnotes => "footnotes",
        PageNumber => "page_number",
        TextNumber => "text_number",
        Bibliography => "bibliography",
        HandwrittenMarginalia => "handwritten_marginalia",
        Index => "index",
        Others => "others",
        PrintedMarginalia => "printed_marginalia",
        TableOfContents => "table_of_contents",
        Title => "title",
        Translation => "translation",
        Appendix => "appendix",
        Introduction => "introduction",
        Preface => "preface",
        PrimaryText => "primary_text",
        RunningHeader => "running_header",
    ]
);

class_enum!(
    /// The 8 coarse classes used for training and evaluation.
    CoarseClass, "coarse", [
        Commentary => "commentary",
        CriticalApparatus => "critical_apparatus",
        Footnotes => "footnotes",
        Number => "number",
        Others => "others",
        Paratext => "paratext",
        PrimaryText => "primary_text",
        RunningHeader => "running_header",
    ]
);

impl FineClass {
    pub fn coarse(self) -> CoarseClass {
        coarse_of(self)
    }

    pub fn segmonto(self) -> SegmOntoLabel {
        segmonto_of(self)
    }
}

pub fn coarse_of(fine: FineClass) -> CoarseClass {
    use CoarseClass as C;
    use FineClass as F;
    match fine {
        F::Commentary => C::Commentary,
        F::CriticalApparatus => C::CriticalApparatus,
        F::Footnotes => C::Footnotes,
        F::PageNumber | F::TextNumber => C::Number,
        F::Bibliography
        | F::HandwrittenMarginalia
        | F::Index
        | F::Others
        | F::PrintedMarginalia
        | F::TableOfContents
        | F::Title
        | F::Translation => C::Others,
        F::Appendix | F::Introduction | F::Preface => C::Paratext,
        F::PrimaryText => C::PrimaryText,
        F::RunningHeader => C::RunningHeader,
    }
}

/// SegmOnto zone for a fine class. Commentary is always a `MainZone`.
pub fn segmonto_of(fine: FineClass) -> SegmOntoLabel {
    use FineClass as F;
    let (zone, subtype) = match fine {
        F::Commentary => ("MainZone", Some("commentary")),
        F::CriticalApparatus => ("MarginTextZone", Some("criticalApparatus")),
        F::Footnotes => ("MarginTextZone", Some("footnotes")),
        F::PageNumber => ("NumberingZone", Some("pageNumber")),
        F::TextNumber => ("NumberingZone", Some("textNumber")),
        F::Bibliography => ("MainZone", Some("bibliography")),
        F::HandwrittenMarginalia => ("MarginTextZone", Some("handwrittenNote")),
        F::Index => ("MainZone", Some("index")),
        F::Others => ("CustomZone", None),
        F::PrintedMarginalia => ("MarginTextZone", Some("printedNote")),
        F::TableOfContents => ("MainZone", Some("ToC")),
        F::Title => ("TitlePageZone", None),
        F::Translation => ("MainZone", Some("translation")),
        F::Appendix => ("MainZone", Some("appendix")),
        F::Introduction => ("MainZone", Some("introduction")),
        F::Preface => ("MainZone", Some("preface")),
        F::PrimaryText => ("MainZone", Some("primaryText")),
        F::RunningHeader => ("RunningTitleZone", None),
    };
    SegmOntoLabel {
        zone_type: zone.to_string(),
        subtype: subtype.map(str::to_string),
    }
}

/// A SegmOnto controlled-vocabulary label, serialized `ZoneType[:subtype]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmOntoLabel {
    pub zone_type: String,
    pub subtype: Option<String>,
}

impl fmt::Display for SegmOntoLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subtype {
            Some(sub) => write!(f, "{}:{}", self.zone_type, sub),
            None => f.write_str(&self.zone_type),
        }
    }
}

impl FromStr for SegmOntoLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::parse(format!("SegmOnto label {s:?}"), why);
        let (zone, sub) = match s.split_once(':') {
            Some((z, sub)) => (z, Some(sub)),
            None => (s, None),
        };
        if zone.is_empty() || zone.chars().any(char::is_whitespace) {
            return Err(bad("empty or malformed zone type"));
        }
        if let Some(sub) = sub {
            if sub.is_empty() || sub.contains(':') || sub.chars().any(char::is_whitespace) {
                return Err(bad("empty or malformed subtype"));
            }
        }
        Ok(SegmOntoLabel {
            zone_type: zone.to_string(),
            subtype: sub.map(str::to_string),
        })
    }
}

/// Class granularity used for export and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassScheme {
    Fine,
    Coarse,
    Mono,
}

impl ClassScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassScheme::Fine => "fine",
            ClassScheme::Coarse => "coarse",
            ClassScheme::Mono => "mono",
        }
    }

    pub fn class_count(self) -> usize {
        match self {
            ClassScheme::Fine => FineClass::ALL.len(),
            ClassScheme::Coarse => CoarseClass::ALL.len(),
            ClassScheme::Mono => 1,
        }
    }

    /// Every class of the scheme in index order.
    pub fn classes(self) -> Vec<RegionClass> {
        match self {
            ClassScheme::Fine => FineClass::ALL.iter().map(|&f| RegionClass::Fine(f)).collect(),
            ClassScheme::Coarse => CoarseClass::ALL
                .iter()
                .map(|&c| RegionClass::Coarse(c))
                .collect(),
            ClassScheme::Mono => vec![RegionClass::Mono],
        }
    }

    pub fn class_at(self, index: usize) -> Result<RegionClass> {
        self.classes().get(index).copied().ok_or_else(|| {
            Error::data(format!(
                "class id {index} out of range for the {} scheme ({} classes)",
                self,
                self.class_count()
            ))
        })
    }

    /// The class a region falls under in this scheme, if it carries enough
    /// information (a fine class for `Fine`, a coarse class for `Coarse`).
    pub fn class_of(self, region: &Region) -> Option<RegionClass> {
        match self {
            ClassScheme::Fine => region.fine_class.map(RegionClass::Fine),
            ClassScheme::Coarse => region.coarse_class.map(RegionClass::Coarse),
            ClassScheme::Mono => Some(RegionClass::Mono),
        }
    }

    pub fn parse_class(self, s: &str) -> Result<RegionClass> {
        match self {
            ClassScheme::Fine => s.parse().map(RegionClass::Fine),
            ClassScheme::Coarse => s.parse().map(RegionClass::Coarse),
            ClassScheme::Mono if normalize_class_name(s) == MONO_CLASS_NAME => {
                Ok(RegionClass::Mono)
            }
            ClassScheme::Mono => Err(Error::UnknownClass {
                kind: "mono",
                value: s.to_string(),
                valid: MONO_CLASS_NAME.to_string(),
            }),
        }
    }
}

impl fmt::Display for ClassScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fine" => Ok(ClassScheme::Fine),
            "coarse" => Ok(ClassScheme::Coarse),
            "mono" => Ok(ClassScheme::Mono),
            other => Err(Error::parse("class scheme", format!("unknown scheme {other:?}"))),
        }
    }
}

/// Name of the single class of the mono scheme.
pub const MONO_CLASS_NAME: &str = "region";

/// A class under some scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionClass {
    Fine(FineClass),
    Coarse(CoarseClass),
    Mono,
}

impl RegionClass {
    pub fn scheme(self) -> ClassScheme {
        match self {
            RegionClass::Fine(_) => ClassScheme::Fine,
            RegionClass::Coarse(_) => ClassScheme::Coarse,
            RegionClass::Mono => ClassScheme::Mono,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegionClass::Fine(f) => f.as_str(),
            RegionClass::Coarse(c) => c.as_str(),
            RegionClass::Mono => MONO_CLASS_NAME,
        }
    }
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stable, dense 0-based id of `class` within `scheme`.
pub fn class_index(scheme: ClassScheme, class: RegionClass) -> Result<usize> {
    match (scheme, class) {
        (ClassScheme::Fine, RegionClass::Fine(f)) => Ok(f.index()),
        (ClassScheme::Coarse, RegionClass::Coarse(c)) => Ok(c.index()),
        (ClassScheme::Mono, RegionClass::Mono) => Ok(0),
        (scheme, class) => Err(Error::SchemeMismatch {
            scheme: scheme.to_string(),
            class: format!("{}:{}", class.scheme(), class),
        }),
    }
}

/// A single OCR token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Word {
    pub id: String,
    pub order_index: usize,
    #[serde(rename = "box")]
    pub bbox: BBox,
    #[serde(default)]
    pub text: String,
}

/// Where a region came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Manual,
    Rebuilt,
    Detected,
    Fused,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Manual => "manual",
            Source::Rebuilt => "rebuilt",
            Source::Detected => "detected",
            Source::Fused => "fused",
        }
    }

    /// Detected and fused regions carry a confidence score.
    pub fn is_scored(self) -> bool {
        matches!(self, Source::Detected | Source::Fused)
    }
}

/// A labeled page zone.
///
/// `coarse_class == None` marks a region collapsed to the single mono class;
/// such a region never carries a fine class.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: String,
    pub bbox: BBox,
    pub fine_class: Option<FineClass>,
    pub coarse_class: Option<CoarseClass>,
    pub word_ids: Vec<String>,
    pub source: Source,
    pub score: Option<f64>,
}

impl Region {
    pub fn manual_fine(id: impl Into<String>, bbox: BBox, fine: FineClass) -> Self {
        Region {
            id: id.into(),
            bbox,
            fine_class: Some(fine),
            coarse_class: Some(fine.coarse()),
            word_ids: Vec::new(),
            source: Source::Manual,
            score: None,
        }
    }

    pub fn manual(id: impl Into<String>, bbox: BBox, coarse: CoarseClass) -> Self {
        Region {
            id: id.into(),
            bbox,
            fine_class: None,
            coarse_class: Some(coarse),
            word_ids: Vec::new(),
            source: Source::Manual,
            score: None,
        }
    }

    pub fn detected(
        id: impl Into<String>,
        bbox: BBox,
        coarse: Option<CoarseClass>,
        score: f64,
    ) -> Self {
        Region {
            id: id.into(),
            bbox,
            fine_class: None,
            coarse_class: coarse,
            word_ids: Vec::new(),
            source: Source::Detected,
            score: Some(score),
        }
    }

    pub fn with_words(mut self, word_ids: Vec<String>) -> Self {
        self.word_ids = word_ids;
        self
    }

    pub fn is_mono(&self) -> bool {
        self.coarse_class.is_none()
    }

    /// Score used to rank the region during evaluation; unscored regions
    /// rank as fully confident.
    pub fn rank_score(&self) -> f64 {
        self.score.unwrap_or(1.0)
    }

    /// Checks class consistency and the score/provenance contract.
    pub fn check(&self) -> Result<()> {
        self.check_classes()?;
        self.check_score()
    }

    pub fn check_classes(&self) -> Result<()> {
        if let Some(fine) = self.fine_class {
            if self.coarse_class != Some(fine.coarse()) {
                return Err(Error::data(format!(
                    "region {}: fine class {} maps to {}, found {}",
                    self.id,
                    fine,
                    fine.coarse(),
                    self.coarse_class.map_or(MONO_CLASS_NAME, |c| c.as_str())
                )));
            }
        }
        Ok(())
    }

    pub fn check_score(&self) -> Result<()> {
        match (self.source.is_scored(), self.score) {
            (true, None) => Err(Error::data(format!(
                "region {}: {} region without score",
                self.id,
                self.source.as_str()
            ))),
            (false, Some(_)) => Err(Error::data(format!(
                "region {}: {} region must not carry a score",
                self.id,
                self.source.as_str()
            ))),
            (true, Some(s)) if !(0.0..=1.0).contains(&s) => Err(Error::data(format!(
                "region {}: score {s} outside [0, 1]",
                self.id
            ))),
            _ => Ok(()),
        }
    }
}

/// Copy of `region` with its class replaced by the single mono class.
pub fn collapse_mono(region: &Region) -> Region {
    Region {
        fine_class: None,
        coarse_class: None,
        ..region.clone()
    }
}

/// One annotated page image.
#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub id: String,
    pub image_path: String,
    pub image_width_px: u32,
    pub image_height_px: u32,
    pub words: Vec<Word>,
    pub regions: Vec<Region>,
}

impl Page {
    pub fn word(&self, id: &str) -> Option<&Word> {
        self.words.iter().find(|w| w.id == id)
    }

    pub fn word_index(&self) -> BTreeMap<&str, usize> {
        self.words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.id.as_str(), i))
            .collect()
    }

    /// Checks every page-level invariant, reporting the first failure.
    pub fn check(&self) -> Result<()> {
        let ctx = |msg: String| Error::data(format!("page {}: {msg}", self.id));
        if self.image_width_px == 0 || self.image_height_px == 0 {
            return Err(ctx("image dimensions must be positive".into()));
        }
        let (w, h) = (self.image_width_px as f64, self.image_height_px as f64);
        let mut seen = std::collections::HashSet::new();
        for (i, word) in self.words.iter().enumerate() {
            word.bbox.check().map_err(|e| ctx(format!("word {}: {e}", word.id)))?;
            if !word.bbox.within(w, h) {
                return Err(ctx(format!("word {} box {} outside page", word.id, word.bbox)));
            }
            if word.order_index != i {
                return Err(ctx(format!(
                    "word {} has order_index {}, expected {i}",
                    word.id, word.order_index
                )));
            }
            if !seen.insert(word.id.as_str()) {
                return Err(ctx(format!("duplicate word id {}", word.id)));
            }
        }
        let mut region_ids = std::collections::HashSet::new();
        for region in &self.regions {
            region.bbox.check().map_err(|e| ctx(format!("region {}: {e}", region.id)))?;
            if !region.bbox.within(w, h) {
                return Err(ctx(format!(
                    "region {} box {} outside page",
                    region.id, region.bbox
                )));
            }
            if !region_ids.insert(region.id.as_str()) {
                return Err(ctx(format!("duplicate region id {}", region.id)));
            }
            region.check().map_err(|e| ctx(e.to_string()))?;
            if let Some(missing) = region.word_ids.iter().find(|id| !seen.contains(id.as_str())) {
                return Err(ctx(format!(
                    "region {} references unknown word {missing}",
                    region.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    Internal,
    External,
}

/// One commentary: metadata plus its annotated pages.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub year: i32,
    pub languages: Vec<String>,
    pub public_domain: bool,
    pub corpus: CorpusKind,
    pub pages: Vec<Page>,
    pub split: Option<Split>,
}

/// Page-level train/test assignment, keyed by page id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    #[serde(default)]
    pub train: Vec<String>,
    #[serde(default)]
    pub test: Vec<String>,
}

/// A set of documents with an optional page-level split.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub splits: Option<SplitManifest>,
}

impl Corpus {
    pub fn pages(&self) -> impl Iterator<Item = &Page> {
        self.documents.iter().flat_map(|d| d.pages.iter())
    }

    /// Split of a page: the page-level manifest entry wins over the
    /// document default.
    pub fn split_of(&self, page_id: &str) -> Option<Split> {
        if let Some(s) = &self.splits {
            if s.train.iter().any(|p| p == page_id) {
                return Some(Split::Train);
            }
            if s.test.iter().any(|p| p == page_id) {
                return Some(Split::Test);
            }
        }
        self.documents
            .iter()
            .find(|d| d.pages.iter().any(|p| p.id == page_id))
            .and_then(|d| d.split)
    }
}
