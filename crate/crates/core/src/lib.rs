//! Layout-analysis toolkit for text-heavy historical documents.
//!
//! The crate covers the region taxonomy of scholarly commentaries
//! ([`model`]), rectangle arithmetic ([`geometry`]), the file formats the
//! toolchain reads and writes ([`formats`]), the word/region procedures
//! used to turn token labels into regions and to fuse detections with
//! token labels ([`regions`]), region- and word-level evaluation
//! ([`eval`]) and corpus statistics and validation ([`stats`]).

pub mod error;
pub mod eval;
pub mod formats;
pub mod geometry;
pub mod model;
pub mod regions;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::BBox;
pub use model::{
    ClassScheme, CoarseClass, Corpus, CorpusKind, Document, FineClass, Page, Region, RegionClass,
    SegmOntoLabel, Source, Split, Word,
};
