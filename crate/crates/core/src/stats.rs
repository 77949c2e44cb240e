//! Corpus statistics and integrity checks.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CoarseClass, Corpus, CorpusKind, Document, Page};
use crate::regions;

/// Coarse classes in the column order of the published statistics table.
pub const TABLE_COLUMNS: [CoarseClass; 8] = [
    CoarseClass::CriticalApparatus,
    CoarseClass::Commentary,
    CoarseClass::Footnotes,
    CoarseClass::Number,
    CoarseClass::Others,
    CoarseClass::Paratext,
    CoarseClass::PrimaryText,
    CoarseClass::RunningHeader,
];

const COLUMN_HEADERS: [&str; 8] = [
    "AppCrit", "Comm.", "Footn.", "Num.", "Others", "Parat.", "Primary t.", "Running h.",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusGroup {
    InternalPublicDomain,
    InternalCopyrighted,
    External,
}

impl CorpusGroup {
    pub const ALL: [CorpusGroup; 3] = [
        CorpusGroup::InternalPublicDomain,
        CorpusGroup::InternalCopyrighted,
        CorpusGroup::External,
    ];

    pub fn of(doc: &Document) -> CorpusGroup {
        match (doc.corpus, doc.public_domain) {
            (CorpusKind::External, _) => CorpusGroup::External,
            (CorpusKind::Internal, true) => CorpusGroup::InternalPublicDomain,
            (CorpusKind::Internal, false) => CorpusGroup::InternalCopyrighted,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CorpusGroup::InternalPublicDomain => "Internal (public domain)",
            CorpusGroup::InternalCopyrighted => "Internal (copyrighted)",
            CorpusGroup::External => "External",
        }
    }
}

/// Page and per-class region counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub pages: usize,
    /// Keyed by coarse class; every class present, zero or not.
    pub regions: BTreeMap<CoarseClass, usize>,
    /// Regions without a coarse class (mono-collapsed).
    pub unclassified: usize,
}

impl Counts {
    fn zero() -> Counts {
        Counts {
            pages: 0,
            regions: CoarseClass::ALL.iter().map(|&c| (c, 0)).collect(),
            unclassified: 0,
        }
    }

    pub fn get(&self, class: CoarseClass) -> usize {
        self.regions.get(&class).copied().unwrap_or(0)
    }

    pub fn total_regions(&self) -> usize {
        self.regions.values().sum::<usize>() + self.unclassified
    }

    fn add_page(&mut self, page: &Page) {
        self.pages += 1;
        for r in &page.regions {
            match r.coarse_class {
                Some(c) => *self.regions.entry(c).or_default() += 1,
                None => self.unclassified += 1,
            }
        }
    }

    fn add(&mut self, other: &Counts) {
        self.pages += other.pages;
        for (c, n) in &other.regions {
            *self.regions.entry(*c).or_default() += n;
        }
        self.unclassified += other.unclassified;
    }

    /// Pages followed by region counts in table column order.
    pub fn table_row(&self) -> [usize; 9] {
        let mut row = [self.pages; 9];
        for (slot, c) in row[1..].iter_mut().zip(TABLE_COLUMNS) {
            *slot = self.get(c);
        }
        row
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DocumentStats {
    pub id: String,
    /// `"<title> <year>"`.
    pub label: String,
    pub group: CorpusGroup,
    pub public_domain: bool,
    #[serde(flatten)]
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupStats {
    pub group: CorpusGroup,
    pub rows: Vec<DocumentStats>,
    pub subtotal: Counts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub groups: Vec<GroupStats>,
    pub total_public_domain: Counts,
    pub total: Counts,
}

impl CorpusStats {
    pub fn rows(&self) -> impl Iterator<Item = &DocumentStats> {
        self.groups.iter().flat_map(|g| &g.rows)
    }

    pub fn row(&self, label: &str) -> Option<&DocumentStats> {
        self.rows().find(|r| r.label == label)
    }

    pub fn group(&self, group: CorpusGroup) -> &GroupStats {
        self.groups
            .iter()
            .find(|g| g.group == group)
            .expect("all groups present")
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        crate::formats::to_json_bytes(self)
    }

    /// Aligned text table in the column order of the published statistics.
    pub fn to_table(&self) -> String {
        let mut lines: Vec<(String, [usize; 9])> = Vec::new();
        for g in &self.groups {
            for r in &g.rows {
                lines.push((r.label.clone(), r.counts.table_row()));
            }
            lines.push((format!("Total {}", g.group.label()), g.subtotal.table_row()));
        }
        lines.push(("Total (public domain)".into(), self.total_public_domain.table_row()));
        lines.push(("Total".into(), self.total.table_row()));

        let name_w = lines
            .iter()
            .map(|(l, _)| l.chars().count())
            .chain(std::iter::once("Commentary".len()))
            .max()
            .unwrap_or(10);
        let headers: Vec<&str> = std::iter::once("Pages").chain(COLUMN_HEADERS).collect();
        let mut out = format!("{:<name_w$}", "Commentary");
        for h in &headers {
            out.push_str(&format!("  {h:>10}"));
        }
        out.push('\n');
        for (label, row) in &lines {
            out.push_str(&format!("{label:<name_w$}"));
            for v in row {
                out.push_str(&format!("  {v:>10}"));
            }
            out.push('\n');
        }
        if self.total.unclassified > 0 {
            out.push_str(&format!("unclassified regions: {}\n", self.total.unclassified));
        }
        out
    }
}

/// Page and region counts per document, grouped by corpus and licence.
/// Rows are ordered by document id within each group.
pub fn corpus_stats(documents: &[Document]) -> CorpusStats {
    let mut groups: Vec<GroupStats> = CorpusGroup::ALL
        .iter()
        .map(|&group| GroupStats {
            group,
            rows: Vec::new(),
            subtotal: Counts::zero(),
        })
        .collect();
    let mut total_pd = Counts::zero();
    let mut total = Counts::zero();
    for doc in documents {
        let mut counts = Counts::zero();
        for page in &doc.pages {
            counts.add_page(page);
        }
        let group = CorpusGroup::of(doc);
        let g = groups.iter_mut().find(|g| g.group == group).expect("group");
        g.subtotal.add(&counts);
        if doc.public_domain {
            total_pd.add(&counts);
        }
        total.add(&counts);
        g.rows.push(DocumentStats {
            id: doc.id.clone(),
            label: format!("{} {}", doc.title, doc.year),
            group,
            public_domain: doc.public_domain,
            counts,
        });
    }
    for g in &mut groups {
        g.rows.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.label.cmp(&b.label)));
    }
    CorpusStats {
        groups,
        total_public_domain: total_pd,
        total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Boxes inside the page, positive page dimensions.
    Bounds,
    /// Fine class maps to the stored coarse class; score matches source.
    ClassConsistency,
    /// Region boxes equal the bounding rectangle of their words.
    MinimalRect,
    /// Unique document, page, region and word ids; contiguous word order.
    UniqueIds,
    /// Region word lists agree with geometric word assignment.
    WordAssignment,
    /// The split covers every page exactly once.
    SplitCoverage,
}

impl Rule {
    pub const ALL: [Rule; 6] = [
        Rule::Bounds,
        Rule::ClassConsistency,
        Rule::MinimalRect,
        Rule::UniqueIds,
        Rule::WordAssignment,
        Rule::SplitCoverage,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Bounds => "bounds",
            Rule::ClassConsistency => "class-consistency",
            Rule::MinimalRect => "minimal-rect",
            Rule::UniqueIds => "unique-ids",
            Rule::WordAssignment => "word-assignment",
            Rule::SplitCoverage => "split-coverage",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| {
                let valid: Vec<_> = Rule::ALL.iter().map(|r| r.as_str()).collect();
                Error::parse("rule", format!("unknown rule {s:?}; valid rules: {}", valid.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRules {
    pub enabled: BTreeSet<Rule>,
    /// Absolute tolerance in pixels for the minimal-rectangle check.
    pub min_rect_tolerance: f64,
    pub word_overlap: f64,
}

impl Default for ValidationRules {
    fn default() -> Self {
        ValidationRules {
            enabled: Rule::ALL.into_iter().collect(),
            min_rect_tolerance: 0.5,
            word_overlap: regions::DEFAULT_WORD_OVERLAP,
        }
    }
}

impl ValidationRules {
    pub fn without(mut self, rule: Rule) -> Self {
        self.enabled.remove(&rule);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    /// `None` for corpus-level problems.
    pub page_id: Option<String>,
    pub rule: Rule,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub counts: BTreeMap<Rule, usize>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.counts.get(&rule).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        crate::formats::to_json_bytes(self)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.violations {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                v.page_id.as_deref().unwrap_or("-"),
                v.rule,
                v.detail
            ));
        }
        out.push_str(&format!("{} violation(s)\n", self.violations.len()));
        out
    }
}

struct Collector<'a> {
    rules: &'a ValidationRules,
    out: Vec<Violation>,
}

impl Collector<'_> {
    fn push(&mut self, page: Option<&str>, rule: Rule, detail: String) {
        if self.rules.enabled.contains(&rule) {
            self.out.push(Violation {
                page_id: page.map(str::to_string),
                rule,
                detail,
            });
        }
    }

    fn on(&self, rule: Rule) -> bool {
        self.rules.enabled.contains(&rule)
    }
}

fn duplicates<'a>(ids: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = HashMap::new();
    let mut dups = Vec::new();
    for id in ids {
        let n = seen.entry(id).or_insert(0usize);
        *n += 1;
        if *n == 2 {
            dups.push(id);
        }
    }
    dups
}

fn check_page(page: &Page, c: &mut Collector) {
    let pid = Some(page.id.as_str());
    let (w, h) = (page.image_width_px as f64, page.image_height_px as f64);

    if page.image_width_px == 0 || page.image_height_px == 0 {
        c.push(pid, Rule::Bounds, "image dimensions must be positive".into());
    }
    for word in &page.words {
        if !word.bbox.within(w, h) {
            c.push(pid, Rule::Bounds, format!("word {} box {} outside page", word.id, word.bbox));
        }
    }
    for region in &page.regions {
        if !region.bbox.within(w, h) {
            c.push(pid, Rule::Bounds, format!("region {} box {} outside page", region.id, region.bbox));
        }
        if let Err(e) = region.check_classes() {
            c.push(pid, Rule::ClassConsistency, e.to_string());
        }
        if let Err(e) = region.check_score() {
            c.push(pid, Rule::ClassConsistency, e.to_string());
        }
    }

    for id in duplicates(page.words.iter().map(|w| w.id.as_str())) {
        c.push(pid, Rule::UniqueIds, format!("duplicate word id {id}"));
    }
    for id in duplicates(page.regions.iter().map(|r| r.id.as_str())) {
        c.push(pid, Rule::UniqueIds, format!("duplicate region id {id}"));
    }
    for (i, word) in page.words.iter().enumerate() {
        if word.order_index != i {
            c.push(
                pid,
                Rule::UniqueIds,
                format!("word {} has order_index {}, expected {i}", word.id, word.order_index),
            );
        }
    }

    if c.on(Rule::MinimalRect) {
        for region in &page.regions {
            if region.word_ids.is_empty() {
                continue;
            }
            let fit = regions::fit_region(region, page);
            if fit.no_words {
                continue;
            }
            let (a, b) = (region.bbox, fit.region.bbox);
            let dev = [
                (a.x_min - b.x_min).abs(),
                (a.y_min - b.y_min).abs(),
                (a.x_max - b.x_max).abs(),
                (a.y_max - b.y_max).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            if dev > c.rules.min_rect_tolerance {
                c.push(
                    pid,
                    Rule::MinimalRect,
                    format!("region {} box {a} differs from word bounds {b} by {dev}px", region.id),
                );
            }
        }
    }

    if c.on(Rule::WordAssignment) {
        let known: BTreeSet<&str> = page.words.iter().map(|w| w.id.as_str()).collect();
        let assignment = regions::assign_words(page, c.rules.word_overlap);
        for (ri, region) in page.regions.iter().enumerate() {
            let listed: BTreeSet<&str> = region.word_ids.iter().map(String::as_str).collect();
            for missing in listed.iter().filter(|id| !known.contains(*id)) {
                c.push(pid, Rule::WordAssignment, format!("region {} references unknown word {missing}", region.id));
            }
            let expected: BTreeSet<&str> = assignment
                .words_of(ri)
                .into_iter()
                .map(|w| page.words[w].id.as_str())
                .collect();
            let listed_known: BTreeSet<&str> = listed.intersection(&known).copied().collect();
            if listed_known != expected {
                let extra: Vec<_> = listed_known.difference(&expected).collect();
                let absent: Vec<_> = expected.difference(&listed_known).collect();
                c.push(
                    pid,
                    Rule::WordAssignment,
                    format!(
                        "region {} word list disagrees with assignment (listed only: {extra:?}, assigned only: {absent:?})",
                        region.id
                    ),
                );
            }
        }
    }
}

fn check_split(corpus: &Corpus, c: &mut Collector) {
    let declared = corpus.splits.is_some() || corpus.documents.iter().any(|d| d.split.is_some());
    if !declared {
        return;
    }
    let pages: BTreeSet<&str> = corpus.pages().map(|p| p.id.as_str()).collect();
    let mut listed: BTreeMap<&str, usize> = BTreeMap::new();
    if let Some(s) = &corpus.splits {
        for id in s.train.iter().chain(&s.test) {
            *listed.entry(id.as_str()).or_default() += 1;
        }
    }
    for (id, n) in &listed {
        if !pages.contains(id) {
            c.push(None, Rule::SplitCoverage, format!("split lists unknown page {id}"));
        } else if *n > 1 {
            c.push(Some(id), Rule::SplitCoverage, format!("page listed {n} times in the split"));
        }
    }
    for doc in &corpus.documents {
        for page in &doc.pages {
            if doc.split.is_none() && !listed.contains_key(page.id.as_str()) {
                c.push(Some(&page.id), Rule::SplitCoverage, "page not covered by the split".into());
            }
        }
    }
}

/// Runs every enabled rule. Violations are sorted by page id, rule and
/// detail.
pub fn validate(corpus: &Corpus, rules: &ValidationRules) -> ValidationReport {
    let mut c = Collector { rules, out: Vec::new() };
    for id in duplicates(corpus.documents.iter().map(|d| d.id.as_str())) {
        c.push(None, Rule::UniqueIds, format!("duplicate document id {id}"));
    }
    for id in duplicates(corpus.pages().map(|p| p.id.as_str())) {
        c.push(Some(id), Rule::UniqueIds, format!("duplicate page id {id}"));
    }
    for page in corpus.pages() {
        check_page(page, &mut c);
    }
    if c.on(Rule::SplitCoverage) {
        check_split(corpus, &mut c);
    }
    let mut violations = c.out;
    violations.sort();
    let mut counts = BTreeMap::new();
    for v in &violations {
        *counts.entry(v.rule).or_insert(0) += 1;
    }
    ValidationReport { violations, counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;
    use crate::model::{FineClass, Region, SplitManifest, Word};

    fn word(id: &str, i: usize, b: BBox) -> Word {
        Word {
            id: id.into(),
            order_index: i,
            bbox: b,
            text: String::new(),
        }
    }

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    fn page(id: &str) -> Page {
        let words = vec![
            word("w0", 0, bb(10.0, 10.0, 50.0, 20.0)),
            word("w1", 1, bb(60.0, 10.0, 90.0, 20.0)),
        ];
        let region = Region::manual_fine("r0", bb(10.0, 10.0, 90.0, 20.0), FineClass::Commentary)
            .with_words(vec!["w0".into(), "w1".into()]);
        Page {
            id: id.into(),
            image_path: format!("{id}.png"),
            image_width_px: 100,
            image_height_px: 100,
            words,
            regions: vec![region],
        }
    }

    fn doc(id: &str, kind: CorpusKind, pd: bool, pages: Vec<Page>) -> Document {
        Document {
            id: id.into(),
            title: id.to_uppercase(),
            year: 1900,
            languages: vec!["en".into()],
            public_domain: pd,
            corpus: kind,
            pages,
            split: None,
        }
    }

    fn corpus(docs: Vec<Document>) -> Corpus {
        Corpus {
            documents: docs,
            splits: None,
        }
    }

    #[test]
    fn pristine_corpus_is_clean() {
        let c = corpus(vec![doc("a", CorpusKind::Internal, true, vec![page("p1"), page("p2")])]);
        let report = validate(&c, &ValidationRules::default());
        assert!(report.is_empty(), "{report:?}");
    }

    #[test]
    fn widened_box_breaks_minimality() {
        let mut p = page("p1");
        p.regions[0].bbox.x_max += 5.0;
        let report = validate(&corpus(vec![doc("a", CorpusKind::Internal, true, vec![p])]), &ValidationRules::default());
        assert_eq!(report.count(Rule::MinimalRect), 1);
        assert_eq!(report.violations.len(), 1, "{report:?}");
    }

    #[test]
    fn subpixel_drift_tolerated() {
        let mut p = page("p1");
        p.regions[0].bbox.x_max += 0.4;
        let report = validate(&corpus(vec![doc("a", CorpusKind::Internal, true, vec![p])]), &ValidationRules::default());
        assert!(report.is_empty());
    }

    #[test]
    fn shared_region_id() {
        let mut p = page("p1");
        let mut twin = Region::manual_fine("r0", bb(0.0, 50.0, 10.0, 60.0), FineClass::Title);
        twin.word_ids.clear();
        p.regions.push(twin);
        let report = validate(&corpus(vec![doc("a", CorpusKind::Internal, true, vec![p])]), &ValidationRules::default());
        assert_eq!(report.count(Rule::UniqueIds), 1);
        assert_eq!(report.violations.len(), 1, "{report:?}");
    }

    #[test]
    fn rules_are_toggleable() {
        let mut p = page("p1");
        p.regions[0].bbox.x_max += 5.0;
        let c = corpus(vec![doc("a", CorpusKind::Internal, true, vec![p])]);
        let rules = ValidationRules::default().without(Rule::MinimalRect);
        assert!(validate(&c, &rules).is_empty());
    }

    #[test]
    fn other_rules_fire() {
        let mut p = page("p1");
        p.regions[0].coarse_class = Some(CoarseClass::Number);
        p.regions[0].word_ids.pop();
        p.words.push(word("w2", 2, bb(95.0, 95.0, 105.0, 99.0)));
        let report = validate(&corpus(vec![doc("a", CorpusKind::Internal, true, vec![p])]), &ValidationRules::default());
        assert_eq!(report.count(Rule::ClassConsistency), 1);
        assert_eq!(report.count(Rule::Bounds), 1);
        assert_eq!(report.count(Rule::WordAssignment), 1);
    }

    #[test]
    fn split_coverage() {
        let mut c = corpus(vec![doc("a", CorpusKind::Internal, true, vec![page("p1"), page("p2")])]);
        assert!(validate(&c, &ValidationRules::default()).is_empty());
        c.splits = Some(SplitManifest {
            train: vec!["p1".into(), "ghost".into()],
            test: vec!["p1".into()],
        });
        let report = validate(&c, &ValidationRules::default());
        // p1 twice, ghost unknown, p2 uncovered
        assert_eq!(report.count(Rule::SplitCoverage), 3, "{report:?}");
    }

    #[test]
    fn stats_grouping_and_totals() {
        let docs = vec![
            doc("b", CorpusKind::External, true, vec![page("x1")]),
            doc("a", CorpusKind::Internal, true, vec![page("p1"), page("p2")]),
            doc("c", CorpusKind::Internal, false, vec![page("q1")]),
        ];
        let s = corpus_stats(&docs);
        assert_eq!(s.total.pages, 4);
        assert_eq!(s.total_public_domain.pages, 3);
        assert_eq!(s.total.get(CoarseClass::Commentary), 4);
        assert_eq!(s.group(CorpusGroup::External).subtotal.pages, 1);
        assert_eq!(s.row("A 1900").unwrap().counts.pages, 2);
        let sum: usize = s.groups.iter().map(|g| g.subtotal.pages).sum();
        assert_eq!(sum, s.total.pages);
        assert_eq!(s.total.total_regions(), 4);

        let mut rev = docs.clone();
        rev.reverse();
        assert_eq!(corpus_stats(&rev), s);

        let table = s.to_table();
        assert!(table.lines().next().unwrap().contains("AppCrit"));
        assert!(table.contains("Total (public domain)"));
    }

    #[test]
    fn empty_corpus_all_zero() {
        let s = corpus_stats(&[]);
        assert_eq!(s.total, Counts::zero());
        assert_eq!(s.total.table_row(), [0; 9]);
    }
}
