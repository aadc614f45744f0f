//! Publication records, award-code normalization, eligibility filtering and
//! per-award aggregation.
//!
//! FWCI values are consumed exactly as exported; nothing here recomputes them
//! from citation counts.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A normalized grant identifier of the form `YY/IA/XXXX`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AwardCode(String);

impl AwardCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AwardCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for AwardCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        normalize_award_code(s)
    }
}

/// Normalizes a raw award code.
///
/// Only two repairs are made: a leading `SFI/` prefix is stripped and a
/// `1A` middle segment (digit one for the letter I) becomes `IA`. Anything
/// else that fails the `YY/IA/XXXX` pattern is rejected, since guessed
/// repairs would create phantom awards.
pub fn normalize_award_code(raw: &str) -> Result<AwardCode> {
    let trimmed = raw.trim();
    let body = trimmed.strip_prefix("SFI/").unwrap_or(trimmed).trim();

    let mut parts = body.split('/');
    let (Some(year), Some(scheme), Some(serial), None) = (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(Error::InvalidAwardCode(raw.to_string()));
    };
    let scheme = if scheme == "1A" { "IA" } else { scheme };

    let digits = |s: &str, len: usize| s.len() == len && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(year, 2) || scheme != "IA" || !digits(serial, 4) {
        return Err(Error::InvalidAwardCode(raw.to_string()));
    }
    Ok(AwardCode(format!("{year}/IA/{serial}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PubType {
    Article,
    ConferencePaper,
    Letter,
    Note,
    Review,
    Editorial,
    ShortSurvey,
    BookChapter,
    Other,
}

impl PubType {
    pub fn as_str(self) -> &'static str {
        match self {
            PubType::Article => "article",
            PubType::ConferencePaper => "conference_paper",
            PubType::Letter => "letter",
            PubType::Note => "note",
            PubType::Review => "review",
            PubType::Editorial => "editorial",
            PubType::ShortSurvey => "short_survey",
            PubType::BookChapter => "book_chapter",
            PubType::Other => "other",
        }
    }
}

impl FromStr for PubType {
    type Err = Error;

    /// Accepts both the snake_case names and export labels such as
    /// `Conference Paper` or `Short Survey`. Unrecognized labels map to
    /// [`PubType::Other`]; only an empty label is an error.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .map(|c| match c {
                ' ' | '-' => '_',
                c => c.to_ascii_lowercase(),
            })
            .collect();
        Ok(match key.as_str() {
            "" => return Err(Error::InvalidArgument("empty publication type".into())),
            "article" => PubType::Article,
            "conference_paper" => PubType::ConferencePaper,
            "letter" => PubType::Letter,
            "note" => PubType::Note,
            "review" => PubType::Review,
            "editorial" => PubType::Editorial,
            "short_survey" => PubType::ShortSurvey,
            "book_chapter" => PubType::BookChapter,
            _ => PubType::Other,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub award_code: AwardCode,
    pub year: i32,
    pub pub_type: PubType,
    /// Absent when the export carries no FWCI; zero is a genuine value.
    pub fwci: Option<f64>,
    pub citations: Option<u64>,
    pub title: String,
    pub source_id: String,
}

/// A row that could not become a [`PublicationRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number in the input stream.
    pub row: u64,
    pub reason: String,
    pub raw_award_code: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputFormat {
    /// Comma-separated with a header row.
    Delimited,
    /// One JSON object per line.
    JsonLines,
}

impl InputFormat {
    /// Guesses the format from the extension, falling back to `Delimited`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson" | "json") => InputFormat::JsonLines,
            _ => InputFormat::Delimited,
        }
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ParseOutcome {
    pub records: Vec<PublicationRecord>,
    pub rejections: Vec<Rejection>,
}

const COLUMNS: [&str; 7] = ["award_code", "year", "pub_type", "fwci", "citations", "title", "source_id"];

/// One row with every field as text; empty means absent.
#[derive(Debug, Default)]
struct RawRow {
    fields: [String; 7],
}

impl RawRow {
    fn get(&self, column: usize) -> &str {
        self.fields[column].trim()
    }

    fn into_record(self) -> std::result::Result<PublicationRecord, String> {
        let award_code =
            normalize_award_code(self.get(0)).map_err(|_| format!("invalid award code {:?}", self.get(0)))?;
        let year = self.get(1).parse::<i32>().map_err(|_| format!("invalid year {:?}", self.get(1)))?;
        let pub_type = self.get(2).parse::<PubType>().map_err(|_| "missing publication type".to_string())?;
        let fwci = match self.get(3) {
            "" => None,
            s => {
                let v: f64 = s.parse().map_err(|_| format!("invalid fwci {s:?}"))?;
                if !v.is_finite() || v < 0.0 {
                    return Err(format!("fwci must be finite and non-negative, got {s}"));
                }
                Some(v)
            }
        };
        let citations = match self.get(4) {
            "" => None,
            s => Some(s.parse::<u64>().map_err(|_| format!("citations must be a non-negative integer, got {s:?}"))?),
        };
        let [_, _, _, _, _, title, source_id] = self.fields;
        Ok(PublicationRecord {
            award_code,
            year,
            pub_type,
            fwci,
            citations,
            title,
            source_id: source_id.trim().to_string(),
        })
    }
}

/// Parses an export. Bad rows become rejections and never abort the parse;
/// only an unreadable stream is fatal.
///
/// A `source_id` repeated within one award keeps its first occurrence and
/// rejects the rest. The same publication under two awards is legitimate.
pub fn parse_records<R: Read>(input: R, format: InputFormat) -> Result<ParseOutcome> {
    let rows = match format {
        InputFormat::Delimited => read_delimited(input)?,
        InputFormat::JsonLines => read_json_lines(input)?,
    };

    let mut outcome = ParseOutcome::default();
    let mut seen: HashSet<(AwardCode, String)> = HashSet::new();
    for (line, row) in rows {
        let raw_award_code = row.get(0).to_string();
        let row = match row {
            Ok(row) => row,
            Err(reason) => {
                outcome.rejections.push(Rejection { row: line, reason, raw_award_code });
                continue;
            }
        };
        match row.into_record() {
            Ok(record) => {
                if !record.source_id.is_empty() && !seen.insert((record.award_code.clone(), record.source_id.clone())) {
                    log::warn!(
                        "line {line}: duplicate source_id {} within award {}; keeping the first",
                        record.source_id,
                        record.award_code
                    );
                    outcome.rejections.push(Rejection {
                        row: line,
                        reason: format!("duplicate source_id {} within award", record.source_id),
                        raw_award_code,
                    });
                    continue;
                }
                outcome.records.push(record);
            }
            Err(reason) => outcome.rejections.push(Rejection { row: line, reason, raw_award_code }),
        }
    }
    Ok(outcome)
}

type Rows = Vec<(u64, std::result::Result<RawRow, String>)>;

trait RowAccess {
    fn get(&self, column: usize) -> &str;
}

impl RowAccess for std::result::Result<RawRow, String> {
    fn get(&self, column: usize) -> &str {
        self.as_ref().map(|r| r.get(column)).unwrap_or("")
    }
}

fn read_delimited<R: Read>(input: R) -> Result<Rows> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader.headers().map_err(|e| Error::Format(format!("unreadable header: {e}")))?.clone();
    let index: Vec<Option<usize>> =
        COLUMNS.iter().map(|name| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name))).collect();
    if index[0].is_none() {
        return Err(Error::Format("header lacks an award_code column".into()));
    }

    let mut rows = Vec::new();
    for result in reader.records() {
        match result {
            Ok(record) => {
                let line = record.position().map_or(0, |p| p.line());
                let mut row = RawRow::default();
                for (slot, column) in row.fields.iter_mut().zip(&index) {
                    if let Some(c) = column {
                        *slot = record.get(*c).unwrap_or("").to_string();
                    }
                }
                rows.push((line, Ok(row)));
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                if matches!(e.kind(), csv::ErrorKind::Io(_) | csv::ErrorKind::Utf8 { .. }) {
                    return Err(Error::Format(format!("line {line}: {e}")));
                }
                rows.push((line, Err(e.to_string())));
            }
        }
    }
    Ok(rows)
}

fn read_json_lines<R: Read>(input: R) -> Result<Rows> {
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::Format(format!("line {line_no}: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = match serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(&line) {
            Ok(object) => {
                let mut row = RawRow::default();
                for (slot, name) in row.fields.iter_mut().zip(COLUMNS) {
                    *slot = match object.get(name) {
                        None | Some(serde_json::Value::Null) => String::new(),
                        Some(serde_json::Value::String(s)) => s.clone(),
                        Some(other) => other.to_string(),
                    };
                }
                Ok(row)
            }
            Err(e) => Err(format!("not a JSON object: {e}")),
        };
        rows.push((line_no, row));
    }
    Ok(rows)
}

/// Reads a budget file with columns `award_code,budget_eur`.
///
/// Codes are normalized the same way as publication codes; rows that fail are
/// returned as rejections.
pub fn parse_budgets<R: Read>(input: R) -> Result<(BTreeMap<AwardCode, f64>, Vec<Rejection>)> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader.headers().map_err(|e| Error::Format(format!("unreadable budget header: {e}")))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let (Some(code_col), Some(budget_col)) = (find("award_code"), find("budget_eur")) else {
        return Err(Error::Format("budget file needs award_code and budget_eur columns".into()));
    };

    let mut budgets = BTreeMap::new();
    let mut rejections = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| Error::Format(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let raw = record.get(code_col).unwrap_or("").to_string();
        let amount = record.get(budget_col).unwrap_or("").trim().replace(',', "");
        let parsed =
            normalize_award_code(&raw).map_err(|e| e.to_string()).and_then(|code| match amount.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => Ok((code, v)),
                _ => Err(format!("invalid budget {amount:?}")),
            });
        match parsed {
            Ok((code, v)) => {
                if budgets.insert(code.clone(), v).is_some() {
                    log::warn!("line {line}: budget for {code} given twice; keeping the last");
                }
            }
            Err(reason) => rejections.push(Rejection { row: line, reason, raw_award_code: raw }),
        }
    }
    Ok((budgets, rejections))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EligibilityPolicy {
    included_types: BTreeSet<PubType>,
    require_fwci: bool,
    low_fwci_threshold: f64,
}

impl EligibilityPolicy {
    pub fn new(
        included_types: impl IntoIterator<Item = PubType>,
        require_fwci: bool,
        low_fwci_threshold: f64,
    ) -> Result<Self> {
        let included_types: BTreeSet<_> = included_types.into_iter().collect();
        if included_types.is_empty() {
            return Err(Error::InvalidArgument("eligibility policy includes no publication types".into()));
        }
        if !(low_fwci_threshold >= 0.0 && low_fwci_threshold.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "low FWCI threshold must be finite and >= 0, got {low_fwci_threshold}"
            )));
        }
        Ok(Self { included_types, require_fwci, low_fwci_threshold })
    }

    pub fn included_types(&self) -> &BTreeSet<PubType> {
        &self.included_types
    }

    pub fn require_fwci(&self) -> bool {
        self.require_fwci
    }

    pub fn low_fwci_threshold(&self) -> f64 {
        self.low_fwci_threshold
    }

    pub fn admits(&self, record: &PublicationRecord) -> bool {
        self.included_types.contains(&record.pub_type) && (!self.require_fwci || record.fwci.is_some())
    }
}

impl Default for EligibilityPolicy {
    /// Original research only: articles, conference papers, letters and
    /// notes that carry an FWCI value.
    fn default() -> Self {
        Self {
            included_types: [PubType::Article, PubType::ConferencePaper, PubType::Letter, PubType::Note]
                .into_iter()
                .collect(),
            require_fwci: true,
            low_fwci_threshold: 0.1,
        }
    }
}

pub fn filter_eligible(records: &[PublicationRecord], policy: &EligibilityPolicy) -> Vec<PublicationRecord> {
    records.iter().filter(|r| policy.admits(r)).cloned().collect()
}

/// Splits records into `(low, main)` around `threshold`.
///
/// Records without an FWCI value cannot be compared and land in `main`.
pub fn split_low_fwci(
    records: &[PublicationRecord],
    threshold: f64,
) -> (Vec<PublicationRecord>, Vec<PublicationRecord>) {
    records.iter().cloned().partition(|r| r.fwci.is_some_and(|v| v < threshold))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwardSummary {
    pub award_code: AwardCode,
    pub n_papers: usize,
    pub mean_fwci: Option<f64>,
    pub budget: Option<f64>,
    pub cost_per_paper: Option<f64>,
}

impl AwardSummary {
    pub fn new(award_code: AwardCode, fwci: &[f64], n_papers: usize, budget: Option<f64>) -> Self {
        let mean_fwci = (!fwci.is_empty()).then(|| fwci.iter().sum::<f64>() / fwci.len() as f64);
        let cost_per_paper = budget.filter(|_| n_papers > 0).map(|b| b / n_papers as f64);
        Self { award_code, n_papers, mean_fwci, budget, cost_per_paper }
    }
}

/// One summary per distinct award, sorted by award code. The mean is the
/// plain arithmetic mean of the FWCI values present.
pub fn summarize_awards(records: &[PublicationRecord], budgets: &BTreeMap<AwardCode, f64>) -> Vec<AwardSummary> {
    let mut groups: BTreeMap<&AwardCode, (usize, Vec<f64>)> = BTreeMap::new();
    for record in records {
        let entry = groups.entry(&record.award_code).or_default();
        entry.0 += 1;
        entry.1.extend(record.fwci);
    }
    groups
        .into_iter()
        .map(|(code, (n, fwci))| AwardSummary::new(code.clone(), &fwci, n, budgets.get(code).copied()))
        .collect()
}

/// Portfolio-wide totals over a set of award summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioTotals {
    pub n_awards: usize,
    pub n_papers: usize,
    /// Sum over awards that have a budget.
    pub total_budget: Option<f64>,
    /// Papers counted only for awards with a budget.
    pub cost_per_paper: Option<f64>,
}

pub fn portfolio_totals(summaries: &[AwardSummary]) -> PortfolioTotals {
    let n_papers = summaries.iter().map(|s| s.n_papers).sum();
    let budgeted: Vec<_> = summaries.iter().filter_map(|s| s.budget.map(|b| (b, s.n_papers))).collect();
    let total_budget = (!budgeted.is_empty()).then(|| budgeted.iter().map(|(b, _)| b).sum::<f64>());
    let budgeted_papers: usize = budgeted.iter().map(|(_, n)| n).sum();
    let cost_per_paper = total_budget.filter(|_| budgeted_papers > 0).map(|b| b / budgeted_papers as f64);
    PortfolioTotals { n_awards: summaries.len(), n_papers, total_budget, cost_per_paper }
}
