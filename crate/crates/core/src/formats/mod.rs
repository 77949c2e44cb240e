//! Readers and writers for every file format the toolchain touches.
//!
//! | format | direction | module |
//! |---|---|---|
//! | canonical page file + corpus manifest | read/write | [`canonical`] |
//! | VIA 2.x project | read | [`via`] |
//! | YOLO label text | read/write | [`yolo`] |
//! | COCO dataset | write | [`coco`] |
//! | token predictions, detections, word lists (JSON lines) | read/write | [`predictions`] |
//!
//! All writers are deterministic and write reals with at most 6 fractional
//! digits.

pub mod canonical;
pub mod coco;
pub mod num;
pub mod predictions;
pub mod via;
pub mod yolo;

pub use canonical::{
    load_corpus, read_canonical, read_manifest, write_canonical, write_corpus, CorpusFiles, Manifest,
    SCHEMA_VERSION,
};
pub use coco::export_coco;
pub use predictions::{
    parse_detections, parse_token_predictions, parse_word_list, write_detections, write_token_labels,
    DetectionSet,
};
pub use via::{parse_via, ViaOptions};
pub use yolo::{export_yolo, parse_yolo};

use serde::Serialize;

/// A real written with the fixed-point rule of [`num::fixed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Fixed(pub f64);

impl Serialize for Fixed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        num::ser_f64(&self.0, s)
    }
}

/// Converts a serde_json line/column position into a byte offset.
pub(crate) fn byte_offset(src: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut offset = 0;
    for (i, l) in src.split(|&b| b == b'\n').enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1).min(l.len());
        }
        offset += l.len() + 1;
    }
    src.len()
}

/// Pretty JSON followed by a newline.
pub(crate) fn to_json_bytes<T: Serialize>(value: &T) -> crate::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)
        .map_err(|e| crate::Error::data(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// Single-line JSON.
pub(crate) fn to_json_line<T: Serialize>(value: &T) -> crate::Result<String> {
    serde_json::to_string(value).map_err(|e| crate::Error::data(format!("serialization failed: {e}")))
}
