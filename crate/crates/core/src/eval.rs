//! Region-level mAP and word-level F1.
//!
//! Region scoring follows the usual detection protocol: within one class,
//! predictions are visited by descending score (ties by page id, then
//! region id), each claims the best-overlapping still-unmatched ground
//! truth on its page if the IoU reaches the threshold, and AP is the area
//! under the precision envelope. Classes without ground truth are left out
//! of the mean.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formats::num::{ser_f64, ser_opt_f64};
use crate::geometry;
use crate::model::{ClassScheme, CoarseClass, Page, Region, RegionClass};
use crate::regions::{self, LabelMap};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Area under the full precision envelope.
    #[default]
    Allpoint,
    /// Mean envelope precision at recall 0.0, 0.1, ..., 1.0.
    Pascal11,
}

impl Interpolation {
    pub fn as_str(self) -> &'static str {
        match self {
            Interpolation::Allpoint => "allpoint",
            Interpolation::Pascal11 => "pascal11",
        }
    }
}

impl fmt::Display for Interpolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "allpoint" => Ok(Interpolation::Allpoint),
            "pascal11" => Ok(Interpolation::Pascal11),
            other => Err(Error::parse("interpolation", format!("unknown mode {other:?}"))),
        }
    }
}

/// Outcome of one prediction during matching.
#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub prediction_id: String,
    pub score: f64,
    pub gt_id: Option<String>,
    /// Best IoU against the ground truth still unmatched when the prediction
    /// was visited.
    pub iou: f64,
    pub is_true_positive: bool,
}

fn by_score_then_id(a: &Region, b: &Region) -> std::cmp::Ordering {
    b.rank_score()
        .total_cmp(&a.rank_score())
        .then_with(|| a.id.cmp(&b.id))
}

/// Greedy matching of same-class predictions against ground truth on one
/// page. Returns matches in visiting order.
pub fn match_detections(preds: &[Region], gts: &[Region], iou_thr: f64) -> Vec<Match> {
    let mut order: Vec<&Region> = preds.iter().collect();
    order.sort_by(|a, b| by_score_then_id(a, b));
    let mut gt_order: Vec<&Region> = gts.iter().collect();
    gt_order.sort_by(|a, b| a.id.cmp(&b.id));
    let mut taken = vec![false; gt_order.len()];

    order
        .into_iter()
        .map(|pred| {
            let mut best: Option<(usize, f64)> = None;
            for (gi, gt) in gt_order.iter().enumerate() {
                if taken[gi] {
                    continue;
                }
                let iou = geometry::iou(&pred.bbox, &gt.bbox);
                if best.is_none_or(|(_, b)| iou > b) {
                    best = Some((gi, iou));
                }
            }
            let (gt_id, iou, tp) = match best {
                Some((gi, iou)) if iou >= iou_thr => {
                    taken[gi] = true;
                    (Some(gt_order[gi].id.clone()), iou, true)
                }
                Some((_, iou)) => (None, iou, false),
                None => (None, 0.0, false),
            };
            Match {
                prediction_id: pred.id.clone(),
                score: pred.rank_score(),
                gt_id,
                iou,
                is_true_positive: tp,
            }
        })
        .collect()
}

/// Precision/recall after each prediction, in ranking order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

pub fn pr_curve(tp_flags: &[bool], n_gt: usize) -> Vec<PrPoint> {
    let mut tp = 0usize;
    tp_flags
        .iter()
        .enumerate()
        .map(|(i, &hit)| {
            tp += hit as usize;
            PrPoint {
                recall: if n_gt == 0 { 0.0 } else { tp as f64 / n_gt as f64 },
                precision: tp as f64 / (i + 1) as f64,
            }
        })
        .collect()
}

/// Average precision of a ranked list of hits (`true` = true positive).
/// Returns 0 when `n_gt` is 0.
pub fn average_precision(tp_flags: &[bool], n_gt: usize, interp: Interpolation) -> f64 {
    if n_gt == 0 || tp_flags.is_empty() {
        return 0.0;
    }
    let curve = pr_curve(tp_flags, n_gt);
    // envelope[i] = max precision at rank >= i
    let mut envelope: Vec<f64> = curve.iter().map(|p| p.precision).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let ap = match interp {
        Interpolation::Allpoint => {
            // recall steps are 1/n_gt per hit; summing envelope values over
            // hits and dividing once keeps a perfect ranking at exactly 1
            let area = tp_flags
                .iter()
                .zip(&envelope)
                .filter(|(&hit, _)| hit)
                .fold(0.0, |acc, (_, env)| acc + env);
            area / n_gt as f64
        }
        Interpolation::Pascal11 => {
            let total: f64 = (0..=10)
                .map(|t| {
                    let r = t as f64 / 10.0;
                    curve
                        .iter()
                        .position(|p| p.recall >= r)
                        .map_or(0.0, |i| envelope[i])
                })
                .sum();
            total / 11.0
        }
    };
    ap.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub iou_thr: f64,
    pub interp: Interpolation,
    pub scheme: ClassScheme,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            iou_thr: DEFAULT_IOU_THRESHOLD,
            interp: Interpolation::Allpoint,
            scheme: ClassScheme::Coarse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportConfig {
    pub mode: String,
    #[serde(serialize_with = "ser_f64")]
    pub iou_thr: f64,
    pub interp: Interpolation,
    pub scheme: ClassScheme,
    #[serde(serialize_with = "ser_opt_f64", skip_serializing_if = "Option::is_none")]
    pub word_overlap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassAp {
    pub class: String,
    pub n_gt: usize,
    pub n_pred: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    /// `None` for classes without ground truth.
    #[serde(serialize_with = "ser_opt_f64")]
    pub ap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassPrf {
    pub class: String,
    /// Number of words with this gt label.
    pub support: usize,
    /// Number of words predicted with this label.
    pub predicted: usize,
    pub true_positives: usize,
    #[serde(serialize_with = "ser_f64")]
    pub precision: f64,
    #[serde(serialize_with = "ser_f64")]
    pub recall: f64,
    #[serde(serialize_with = "ser_f64")]
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordScores {
    pub n_words: usize,
    /// Coarse classes in enumeration order.
    pub per_class: Vec<ClassPrf>,
    /// Reported, but outside both averages.
    pub none: ClassPrf,
    /// Mean F1 over coarse classes occurring in gt or predictions.
    #[serde(serialize_with = "ser_f64")]
    pub macro_f1: f64,
    /// Pooled F1 over words with a non-none gt label.
    #[serde(serialize_with = "ser_f64")]
    pub micro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    /// Row/column labels: the coarse classes, then `none`.
    pub labels: Vec<String>,
    /// `counts[gt][pred]`.
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub config: ReportConfig,
    #[serde(serialize_with = "ser_f64")]
    pub map: f64,
    pub included_classes: Vec<String>,
    pub classes: Vec<ClassAp>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub words: Option<WordScores>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionMatrix>,
}

impl EvalReport {
    pub fn class_ap(&self, class: &str) -> Option<f64> {
        self.classes.iter().find(|c| c.class == class).and_then(|c| c.ap)
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        crate::formats::to_json_bytes(self)
    }

    /// Aligned plain-text rendering.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        s.push_str(&format!(
            "mode={} scheme={} iou_thr={:.6} interp={}",
            c.mode, c.scheme, c.iou_thr, c.interp
        ));
        if let Some(t) = c.word_overlap {
            s.push_str(&format!(" word_overlap={t:.6}"));
        }
        s.push('\n');
        if !self.classes.is_empty() {
            s.push_str(&format!(
                "{:<20} {:>6} {:>6} {:>6} {:>6} {:>10}\n",
                "class", "gt", "pred", "tp", "fp", "AP"
            ));
            for row in &self.classes {
                let ap = row.ap.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
                s.push_str(&format!(
                    "{:<20} {:>6} {:>6} {:>6} {:>6} {:>10}\n",
                    row.class, row.n_gt, row.n_pred, row.true_positives, row.false_positives, ap
                ));
            }
            s.push_str(&format!("{:<20} {:>38.6}\n", "mAP", self.map));
        }
        if let Some(w) = &self.words {
            s.push_str(&format!(
                "{:<20} {:>8} {:>8} {:>10} {:>10} {:>10}\n",
                "class", "support", "pred", "precision", "recall", "F1"
            ));
            for row in w.per_class.iter().chain(std::iter::once(&w.none)) {
                s.push_str(&format!(
                    "{:<20} {:>8} {:>8} {:>10.6} {:>10.6} {:>10.6}\n",
                    row.class, row.support, row.predicted, row.precision, row.recall, row.f1
                ));
            }
            s.push_str(&format!("macro F1 {:.6}\nmicro F1 {:.6}\n", w.macro_f1, w.micro_f1));
        }
        if let Some(cm) = &self.confusion {
            s.push_str("confusion (rows = gt, columns = predicted)\n");
            s.push_str(&format!("{:<20}", ""));
            for (i, _) in cm.labels.iter().enumerate() {
                s.push_str(&format!(" {:>6}", format!("[{i}]")));
            }
            s.push('\n');
            for (i, row) in cm.counts.iter().enumerate() {
                s.push_str(&format!("{:<20}", format!("[{i}] {}", cm.labels[i])));
                for v in row {
                    s.push_str(&format!(" {v:>6}"));
                }
                s.push('\n');
            }
        }
        s
    }
}

fn class_key(scheme: ClassScheme, region: &Region, page_id: &str, what: &str) -> Result<RegionClass> {
    scheme.class_of(region).ok_or_else(|| {
        Error::data(format!(
            "page {page_id}: {what} region {} has no {scheme} class",
            region.id
        ))
    })
}

/// mAP over a set of pages. `preds` maps page id to predicted regions;
/// pages without an entry have no predictions.
pub fn map_at(
    preds: &BTreeMap<String, Vec<Region>>,
    gts: &[Page],
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    map_with_mode(preds, gts, cfg, "regions")
}

fn map_with_mode(
    preds: &BTreeMap<String, Vec<Region>>,
    gts: &[Page],
    cfg: &EvalConfig,
    mode: &str,
) -> Result<EvalReport> {
    if !(cfg.iou_thr > 0.0 && cfg.iou_thr <= 1.0) {
        return Err(Error::data(format!("IoU threshold {} outside (0, 1]", cfg.iou_thr)));
    }
    let gt_by_id: BTreeMap<&str, &Page> = gts.iter().map(|p| (p.id.as_str(), p)).collect();
    if gt_by_id.len() != gts.len() {
        return Err(Error::data("duplicate page ids in ground truth"));
    }
    if let Some(unknown) = preds.keys().find(|k| !gt_by_id.contains_key(k.as_str())) {
        return Err(Error::data(format!("unknown page id {unknown} in predictions")));
    }

    let classes = cfg.scheme.classes();
    // class -> [(score, page id, pred id, tp)]
    let mut ranked: BTreeMap<RegionClass, Vec<(f64, String, String, bool)>> = BTreeMap::new();
    let mut n_gt: BTreeMap<RegionClass, usize> = BTreeMap::new();
    let empty = Vec::new();
    for (page_id, page) in &gt_by_id {
        let page_preds = preds.get(*page_id).unwrap_or(&empty);
        let mut gt_split: BTreeMap<RegionClass, Vec<Region>> = BTreeMap::new();
        for r in &page.regions {
            gt_split
                .entry(class_key(cfg.scheme, r, page_id, "ground-truth")?)
                .or_default()
                .push(r.clone());
        }
        let mut pred_split: BTreeMap<RegionClass, Vec<Region>> = BTreeMap::new();
        for r in page_preds {
            pred_split
                .entry(class_key(cfg.scheme, r, page_id, "predicted")?)
                .or_default()
                .push(r.clone());
        }
        for class in &classes {
            let g = gt_split.get(class).map_or(&[][..], Vec::as_slice);
            *n_gt.entry(*class).or_default() += g.len();
            let Some(p) = pred_split.get(class) else { continue };
            let entry = ranked.entry(*class).or_default();
            for m in match_detections(p, g, cfg.iou_thr) {
                entry.push((m.score, page_id.to_string(), m.prediction_id, m.is_true_positive));
            }
        }
    }

    let mut rows = Vec::with_capacity(classes.len());
    let mut included = Vec::new();
    let mut ap_sum = 0.0;
    for class in &classes {
        let mut list = ranked.remove(class).unwrap_or_default();
        list.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)).then_with(|| a.2.cmp(&b.2)));
        let flags: Vec<bool> = list.iter().map(|e| e.3).collect();
        let gt_count = n_gt.get(class).copied().unwrap_or(0);
        let tp = flags.iter().filter(|&&t| t).count();
        let ap = (gt_count > 0).then(|| average_precision(&flags, gt_count, cfg.interp));
        if let Some(ap) = ap {
            included.push(class.to_string());
            ap_sum += ap;
        }
        rows.push(ClassAp {
            class: class.to_string(),
            n_gt: gt_count,
            n_pred: flags.len(),
            true_positives: tp,
            false_positives: flags.len() - tp,
            ap,
        });
    }
    let map = if included.is_empty() {
        0.0
    } else {
        ap_sum / included.len() as f64
    };
    Ok(EvalReport {
        config: ReportConfig {
            mode: mode.to_string(),
            iou_thr: cfg.iou_thr,
            interp: cfg.interp,
            scheme: cfg.scheme,
            word_overlap: None,
        },
        map,
        included_classes: included,
        classes: rows,
        words: None,
        confusion: None,
    })
}

/// Scores token predictions as regions: consecutive identical labels are
/// grouped into regions (score 1), then evaluated with [`map_at`].
pub fn evaluate_rebuilt(
    token_preds: &BTreeMap<String, LabelMap>,
    gts: &[Page],
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    if cfg.scheme == ClassScheme::Fine {
        return Err(Error::data("rebuilt regions carry coarse classes only; use the coarse or mono scheme"));
    }
    if let Some(unknown) = token_preds.keys().find(|k| !gts.iter().any(|p| &p.id == *k)) {
        return Err(Error::data(format!("unknown page id {unknown} in token predictions")));
    }
    let empty = LabelMap::new();
    let preds: BTreeMap<String, Vec<Region>> = gts
        .iter()
        .map(|page| {
            let labels = token_preds.get(&page.id).unwrap_or(&empty);
            (page.id.clone(), regions::rebuild_regions(&page.words, labels))
        })
        .collect();
    map_with_mode(&preds, gts, cfg, "rebuilt")
}

fn check_same_words(pred: &LabelMap, gt: &LabelMap) -> Result<()> {
    if let Some(k) = gt.keys().find(|k| !pred.contains_key(*k)) {
        return Err(Error::data(format!("word {k} has a gt label but no prediction")));
    }
    if let Some(k) = pred.keys().find(|k| !gt.contains_key(*k)) {
        return Err(Error::data(format!("word {k} has a prediction but no gt label")));
    }
    Ok(())
}

fn label_slot(l: Option<CoarseClass>) -> usize {
    l.map_or(CoarseClass::ALL.len(), |c| c.index())
}

pub fn confusion_matrix(pred: &LabelMap, gt: &LabelMap) -> Result<ConfusionMatrix> {
    check_same_words(pred, gt)?;
    let n = CoarseClass::ALL.len() + 1;
    let mut counts = vec![vec![0usize; n]; n];
    for (word, g) in gt {
        counts[label_slot(*g)][label_slot(pred[word])] += 1;
    }
    let labels = CoarseClass::ALL
        .iter()
        .map(|c| c.to_string())
        .chain(std::iter::once("none".to_string()))
        .collect();
    Ok(ConfusionMatrix { labels, counts })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn word_f1(pred: &LabelMap, gt: &LabelMap) -> Result<WordScores> {
    let cm = confusion_matrix(pred, gt)?;
    let n = cm.labels.len();
    let prf = |i: usize| {
        let tp = cm.counts[i][i];
        let support: usize = cm.counts[i].iter().sum();
        let predicted: usize = (0..n).map(|g| cm.counts[g][i]).sum();
        let (p, r) = (ratio(tp, predicted), ratio(tp, support));
        ClassPrf {
            class: cm.labels[i].clone(),
            support,
            predicted,
            true_positives: tp,
            precision: p,
            recall: r,
            f1: f1(p, r),
        }
    };
    let per_class: Vec<ClassPrf> = (0..n - 1).map(prf).collect();
    let none = prf(n - 1);
    let active: Vec<&ClassPrf> = per_class
        .iter()
        .filter(|c| c.support > 0 || c.predicted > 0)
        .collect();
    let macro_f1 = if active.is_empty() {
        0.0
    } else {
        active.iter().map(|c| c.f1).sum::<f64>() / active.len() as f64
    };
    // Over non-none gt words every word is either a hit or a miss, so the
    // pooled precision, recall and F1 coincide.
    let labeled: usize = (0..n - 1).map(|g| cm.counts[g].iter().sum::<usize>()).sum();
    let hits: usize = (0..n - 1).map(|g| cm.counts[g][g]).sum();
    let micro = ratio(hits, labeled);
    Ok(WordScores {
        n_words: gt.len(),
        per_class,
        none,
        macro_f1,
        micro_f1: f1(micro, micro),
    })
}

/// Word-level scores over a set of pages. Gt labels come from the flat
/// labeling of each gt page; keys are prefixed with the page id.
pub fn evaluate_words(
    token_preds: &BTreeMap<String, LabelMap>,
    gts: &[Page],
    min_overlap: f64,
) -> Result<EvalReport> {
    if let Some(unknown) = token_preds.keys().find(|k| !gts.iter().any(|p| &p.id == *k)) {
        return Err(Error::data(format!("unknown page id {unknown} in token predictions")));
    }
    let mut pred_all = LabelMap::new();
    let mut gt_all = LabelMap::new();
    for page in gts {
        let gt = regions::flat_label_map(page, min_overlap);
        for word in &page.words {
            let key = format!("{}/{}", page.id, word.id);
            gt_all.insert(key.clone(), gt.get(&word.id).copied().flatten());
            let p = token_preds
                .get(&page.id)
                .and_then(|m| m.get(&word.id))
                .copied()
                .flatten();
            pred_all.insert(key, p);
        }
    }
    let words = word_f1(&pred_all, &gt_all)?;
    let confusion = confusion_matrix(&pred_all, &gt_all)?;
    Ok(EvalReport {
        config: ReportConfig {
            mode: "words".into(),
            iou_thr: DEFAULT_IOU_THRESHOLD,
            interp: Interpolation::Allpoint,
            scheme: ClassScheme::Coarse,
            word_overlap: Some(min_overlap),
        },
        map: 0.0,
        included_classes: Vec::new(),
        classes: Vec::new(),
        words: Some(words),
        confusion: Some(confusion),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;
    use CoarseClass::*;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    fn det(id: &str, b: BBox, score: f64) -> Region {
        Region::detected(id, b, Some(Commentary), score)
    }

    #[test]
    fn matching_examples() {
        let gt = Region::manual("g", bb(0.0, 0.0, 10.0, 10.0), Commentary);
        let m = match_detections(&[det("p", gt.bbox, 0.9)], std::slice::from_ref(&gt), 0.5);
        assert!(m[0].is_true_positive);
        assert_eq!(m[0].gt_id.as_deref(), Some("g"));

        // two predictions over the same gt: higher score wins
        let preds = [
            det("lo", bb(0.0, 0.0, 10.0, 8.0), 0.3),
            det("hi", bb(0.0, 0.0, 10.0, 9.0), 0.8),
        ];
        let m = match_detections(&preds, std::slice::from_ref(&gt), 0.5);
        assert_eq!(m[0].prediction_id, "hi");
        assert!(m[0].is_true_positive);
        assert!(!m[1].is_true_positive);
    }

    #[test]
    fn threshold_boundary() {
        let gt = Region::manual("g", bb(0.0, 0.0, 100.0, 1.0), Commentary);
        // iou 0.49
        let m = match_detections(&[det("p", bb(0.0, 0.0, 49.0, 1.0), 1.0)], std::slice::from_ref(&gt), 0.5);
        assert!(!m[0].is_true_positive);
        // iou exactly 0.5
        let m = match_detections(&[det("p", bb(0.0, 0.0, 50.0, 1.0), 1.0)], &[gt], 0.5);
        assert_eq!(m[0].iou, 0.5);
        assert!(m[0].is_true_positive);
    }

    #[test]
    fn ap_examples() {
        assert_eq!(average_precision(&[true, true], 2, Interpolation::Allpoint), 1.0);
        assert_eq!(average_precision(&[], 3, Interpolation::Allpoint), 0.0);
        let ap = average_precision(&[true, false, true], 2, Interpolation::Allpoint);
        assert!((ap - 0.833_333_333_333_333_4).abs() < 1e-12);
        // envelope is 1 up to recall .5, 2/3 above: 6/11 + 5/11 * 2/3
        let ap11 = average_precision(&[true, false, true], 2, Interpolation::Pascal11);
        assert!((ap11 - (6.0 + 10.0 / 3.0) / 11.0).abs() < 1e-12);
    }

    fn gt_page() -> Page {
        Page {
            id: "p".into(),
            image_path: "p.png".into(),
            image_width_px: 200,
            image_height_px: 200,
            words: vec![],
            regions: vec![
                Region::manual("a", bb(0.0, 0.0, 50.0, 50.0), Commentary),
                Region::manual("b", bb(60.0, 60.0, 90.0, 90.0), Number),
            ],
        }
    }

    #[test]
    fn map_bounds() {
        let page = gt_page();
        let mut preds = BTreeMap::new();
        preds.insert(
            "p".to_string(),
            page.regions
                .iter()
                .map(|r| Region {
                    score: Some(1.0),
                    source: crate::model::Source::Detected,
                    ..r.clone()
                })
                .collect(),
        );
        let cfg = EvalConfig::default();
        let report = map_at(&preds, std::slice::from_ref(&page), &cfg).unwrap();
        assert_eq!(report.map, 1.0);
        assert_eq!(report.included_classes, ["commentary", "number"]);
        assert_eq!(report.class_ap("footnotes"), None);

        let report = map_at(&BTreeMap::new(), std::slice::from_ref(&page), &cfg).unwrap();
        assert_eq!(report.map, 0.0);

        let mut bad = BTreeMap::new();
        bad.insert("nope".to_string(), vec![]);
        assert!(map_at(&bad, &[page], &cfg).is_err());
    }

    #[test]
    fn single_class_map_equals_class_ap() {
        let mut page = gt_page();
        page.regions.truncate(1);
        let mut preds = BTreeMap::new();
        preds.insert(
            "p".to_string(),
            vec![
                det("x", bb(100.0, 100.0, 120.0, 120.0), 0.9),
                det("y", bb(0.0, 0.0, 50.0, 50.0), 0.5),
            ],
        );
        let report = map_at(&preds, &[page], &EvalConfig::default()).unwrap();
        assert_eq!(report.map, report.class_ap("commentary").unwrap());
        assert!((report.map - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mono_scheme_collapses_classes() {
        let page = gt_page();
        let mut preds = BTreeMap::new();
        preds.insert(
            "p".to_string(),
            vec![
                Region::detected("1", bb(0.0, 0.0, 50.0, 50.0), None, 0.9),
                Region::detected("2", bb(60.0, 60.0, 90.0, 90.0), None, 0.8),
            ],
        );
        let cfg = EvalConfig {
            scheme: ClassScheme::Mono,
            ..Default::default()
        };
        let report = map_at(&preds, std::slice::from_ref(&page), &cfg).unwrap();
        assert_eq!(report.map, 1.0);
        // mono predictions cannot be scored per coarse class
        assert!(map_at(&preds, &[page], &EvalConfig::default()).is_err());
    }

    fn lm(pairs: &[(&str, Option<CoarseClass>)]) -> LabelMap {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn word_f1_examples() {
        let gt = lm(&[("1", Some(Commentary)), ("2", Some(Commentary)), ("3", Some(Number)), ("4", Some(Number))]);
        let same = word_f1(&gt, &gt).unwrap();
        assert_eq!(same.macro_f1, 1.0);
        assert_eq!(same.micro_f1, 1.0);

        let nothing = lm(&[("1", None), ("2", None), ("3", None), ("4", None)]);
        assert_eq!(word_f1(&nothing, &gt).unwrap().macro_f1, 0.0);

        // gt [A,A,B,B], pred [A,B,B,B]; frozen from confusion counts:
        // A: tp 1, fp 0, fn 1; B: tp 2, fp 1, fn 0
        let pred = lm(&[("1", Some(Commentary)), ("2", Some(Number)), ("3", Some(Number)), ("4", Some(Number))]);
        let s = word_f1(&pred, &gt).unwrap();
        let a = &s.per_class[Commentary.index()];
        let b = &s.per_class[Number.index()];
        assert_eq!((a.precision, a.recall), (1.0, 0.5));
        assert!((a.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((b.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(b.recall, 1.0);
        assert!((b.f1 - 0.8).abs() < 1e-12);
        assert!((s.macro_f1 - 0.733_333_333_333_333_3).abs() < 1e-12);
        assert!((s.micro_f1 - 0.75).abs() < 1e-12);

        let short = lm(&[("1", None)]);
        assert!(word_f1(&short, &gt).is_err());
    }

    #[test]
    fn confusion_examples() {
        let gt = lm(&[("1", Some(Commentary)), ("2", None), ("3", Some(Number))]);
        let cm = confusion_matrix(&gt, &gt).unwrap();
        for (i, row) in cm.counts.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    assert_eq!(v, 0);
                }
            }
        }
        assert_eq!(cm.total(), 3);
        let cm = confusion_matrix(&lm(&[("x", Some(Number))]), &lm(&[("x", Some(Commentary))])).unwrap();
        assert_eq!(cm.counts[Commentary.index()][Number.index()], 1);
        assert_eq!(cm.total(), 1);
        assert_eq!(cm.labels.len(), 9);
    }

    #[test]
    fn report_serializes_with_fixed_decimals() {
        let report = map_at(&BTreeMap::new(), &[gt_page()], &EvalConfig::default()).unwrap();
        let text = String::from_utf8(report.to_json().unwrap()).unwrap();
        assert!(text.contains("\"iou_thr\": 0.5"));
        assert!(text.contains("\"interp\": \"allpoint\""));
        assert!(text.contains("\"map\": 0"));
        assert!(report.to_table().contains("iou_thr=0.500000"));
    }
}
