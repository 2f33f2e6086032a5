//! Lexical richness: TTR, NDW (NDW-ER50 for samples of 50+ words), lexical
//! density, word count and average word length, plus per-severity means and
//! the comparison report against the human baseline.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::{Read, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ciu::CiuScore;
use crate::corpus::{id_key, TranscriptRecord};
use crate::defaults;
use crate::text::{tokenize, SeverityLevel, Token};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexError {
    #[error("metric needs at least one token")]
    EmptyInput,
    #[error("NDW needs at least one trial")]
    ZeroTrials,
    #[error("record `{0}` has no words")]
    EmptyRecord(String),
}

/// Sample size of the NDW-ER50 estimator.
pub const ER50_SAMPLE: usize = 50;
pub const DEFAULT_NDW_TRIALS: usize = 10;

fn non_empty(tokens: &[Token]) -> Result<(), LexError> {
    if tokens.is_empty() {
        Err(LexError::EmptyInput)
    } else {
        Ok(())
    }
}

fn distinct<'a>(tokens: impl IntoIterator<Item = &'a Token>) -> usize {
    tokens.into_iter().collect::<HashSet<_>>().len()
}

pub fn ttr(tokens: &[Token]) -> Result<f64, LexError> {
    non_empty(tokens)?;
    Ok(distinct(tokens) as f64 / tokens.len() as f64)
}

/// Distinct types for fewer than 50 tokens; otherwise the mean distinct-type
/// count over `trials` random 50-token samples drawn without replacement.
pub fn ndw<R: Rng + ?Sized>(tokens: &[Token], trials: usize, rng: &mut R) -> Result<f64, LexError> {
    non_empty(tokens)?;
    if trials == 0 {
        return Err(LexError::ZeroTrials);
    }
    if tokens.len() < ER50_SAMPLE {
        return Ok(distinct(tokens) as f64);
    }
    let total: usize = (0..trials)
        .map(|_| {
            distinct(
                index::sample(rng, tokens.len(), ER50_SAMPLE)
                    .iter()
                    .map(|i| &tokens[i]),
            )
        })
        .sum();
    Ok(total as f64 / trials as f64)
}

pub fn lexical_density(
    tokens: &[Token],
    function_words: &BTreeSet<Token>,
) -> Result<f64, LexError> {
    non_empty(tokens)?;
    let content = tokens
        .iter()
        .filter(|t| !function_words.contains(*t))
        .count();
    Ok(content as f64 / tokens.len() as f64)
}

pub fn avg_word_length(tokens: &[Token]) -> Result<f64, LexError> {
    non_empty(tokens)?;
    let letters: usize = tokens.iter().map(Token::letter_count).sum();
    Ok(letters as f64 / tokens.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSettings {
    pub ndw_trials: usize,
    pub function_words: BTreeSet<Token>,
}

impl Default for ProfileSettings {
    fn default() -> Self {
        ProfileSettings {
            ndw_trials: DEFAULT_NDW_TRIALS,
            function_words: defaults::function_words(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexicalProfile {
    pub ttr: f64,
    pub ndw: f64,
    pub ld: f64,
    pub words: usize,
    pub avg_len: f64,
}

pub fn profile_tokens<R: Rng + ?Sized>(
    tokens: &[Token],
    settings: &ProfileSettings,
    rng: &mut R,
) -> Result<LexicalProfile, LexError> {
    Ok(LexicalProfile {
        ttr: ttr(tokens)?,
        ndw: ndw(tokens, settings.ndw_trials, rng)?,
        ld: lexical_density(tokens, &settings.function_words)?,
        words: tokens.len(),
        avg_len: avg_word_length(tokens)?,
    })
}

pub fn profile_transcript<R: Rng + ?Sized>(
    text: &str,
    settings: &ProfileSettings,
    rng: &mut R,
) -> Result<LexicalProfile, LexError> {
    profile_tokens(&tokenize(text), settings, rng)
}

/// Profiles every record in parallel. NDW sampling for each record is seeded
/// from `(seed, id)`, so the result does not depend on thread count or order.
pub fn profile_records(
    records: &[TranscriptRecord],
    settings: &ProfileSettings,
    seed: u64,
) -> Result<Vec<ProfiledRecord>, LexError> {
    records
        .par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(id_key(seed, &r.id));
            let profile =
                profile_transcript(&r.transcript, settings, &mut rng).map_err(|e| match e {
                    LexError::EmptyInput => LexError::EmptyRecord(r.id.clone()),
                    other => other,
                })?;
            Ok(ProfiledRecord {
                severity: r.severity,
                profile,
                ciu: CiuScore::new(r.word_count, r.ciu_count),
            })
        })
        .collect()
}

/// A transcript's lexical profile together with its severity and CIU score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfiledRecord {
    pub severity: SeverityLevel,
    pub profile: LexicalProfile,
    pub ciu: CiuScore,
}

/// The five lexical measures plus CIU means. Used both for one severity and
/// for the average over severities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasureRow {
    pub ttr: f64,
    pub ndw: f64,
    pub ld: f64,
    pub words: f64,
    pub avg_len: f64,
    pub ciu_count: f64,
    pub ciu_percentage: f64,
}

impl MeasureRow {
    fn fields_mut(&mut self) -> [&mut f64; 7] {
        [
            &mut self.ttr,
            &mut self.ndw,
            &mut self.ld,
            &mut self.words,
            &mut self.avg_len,
            &mut self.ciu_count,
            &mut self.ciu_percentage,
        ]
    }

    fn fields(&self) -> [f64; 7] {
        [
            self.ttr,
            self.ndw,
            self.ld,
            self.words,
            self.avg_len,
            self.ciu_count,
            self.ciu_percentage,
        ]
    }

    fn mean<'a>(rows: impl IntoIterator<Item = &'a MeasureRow>) -> Option<MeasureRow> {
        let mut sum = MeasureRow::default();
        let mut n = 0usize;
        for row in rows {
            for (acc, v) in sum.fields_mut().into_iter().zip(row.fields()) {
                *acc += v;
            }
            n += 1;
        }
        if n == 0 {
            return None;
        }
        for acc in sum.fields_mut() {
            *acc /= n as f64;
        }
        Some(sum)
    }

    fn from_record(r: &ProfiledRecord) -> MeasureRow {
        MeasureRow {
            ttr: r.profile.ttr,
            ndw: r.profile.ndw,
            ld: r.profile.ld,
            words: r.profile.words as f64,
            avg_len: r.profile.avg_len,
            ciu_count: r.ciu.ciu_count as f64,
            ciu_percentage: r.ciu.ciu_percentage,
        }
    }

    /// Value of one of the five lexical measures.
    pub fn measure(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Ttr => self.ttr,
            Measure::Ndw => self.ndw,
            Measure::Ld => self.ld,
            Measure::Words => self.words,
            Measure::Avg => self.avg_len,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeverityMeans {
    pub severity: SeverityLevel,
    pub means: MeasureRow,
    pub sample_n: usize,
}

/// Arithmetic means per severity, Mild first. Severities with no records
/// are left out.
pub fn aggregate_by_severity(records: &[ProfiledRecord]) -> Vec<SeverityMeans> {
    let mut buckets: BTreeMap<SeverityLevel, Vec<MeasureRow>> = BTreeMap::new();
    for r in records {
        buckets
            .entry(r.severity)
            .or_default()
            .push(MeasureRow::from_record(r));
    }
    SeverityLevel::ALL
        .iter()
        .filter_map(|&severity| match buckets.get(&severity) {
            Some(rows) => Some(SeverityMeans {
                severity,
                means: MeasureRow::mean(rows).expect("bucket is non-empty"),
                sample_n: rows.len(),
            }),
            None => {
                log::warn!("no records for severity {severity}; omitted from summary");
                None
            }
        })
        .collect()
}

/// Unweighted mean of the per-severity means. `None` for no rows.
pub fn average_of_means(rows: &[SeverityMeans]) -> Option<MeasureRow> {
    MeasureRow::mean(rows.iter().map(|r| &r.means))
}

/// The lexical measures reported in comparisons, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Measure {
    Ttr,
    Ndw,
    Ld,
    Words,
    Avg,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::Ttr,
        Measure::Ndw,
        Measure::Ld,
        Measure::Words,
        Measure::Avg,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Measure::Ttr => "TTR",
            Measure::Ndw => "NDW",
            Measure::Ld => "LD",
            Measure::Words => "Words",
            Measure::Avg => "Avg",
        }
    }
}

/// Lexical richness of human-elicited transcripts, shipped as constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineRow {
    pub label: &'static str,
    pub ttr: f64,
    pub ndw: f64,
    pub ld: f64,
    pub words: f64,
    pub avg_len: f64,
}

impl BaselineRow {
    pub fn measure(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Ttr => self.ttr,
            Measure::Ndw => self.ndw,
            Measure::Ld => self.ld,
            Measure::Words => self.words,
            Measure::Avg => self.avg_len,
        }
    }
}

pub const HEALTHY_BASELINE: BaselineRow = BaselineRow {
    label: "Healthy",
    ttr: 0.52,
    ndw: 37.53,
    ld: 0.58,
    words: 220.75,
    avg_len: 3.83,
};

pub const APHASIC_BASELINE: BaselineRow = BaselineRow {
    label: "Aphasic",
    ttr: 0.56,
    ndw: 29.32,
    ld: 0.54,
    words: 76.38,
    avg_len: 3.58,
};

// ---------------------------------------------------------------------------
// Summary and comparison tables
// ---------------------------------------------------------------------------

pub const SUMMARY_COLUMNS: [&str; 9] = [
    "severity",
    "n",
    "ttr",
    "ndw",
    "ld",
    "words",
    "avg_len",
    "ciu_count",
    "ciu_percentage",
];

/// Label of the average-of-means row in summary tables.
pub const AVERAGE_ROW: &str = "average";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("summary has columns {found:?}, expected {expected:?}")]
    ColumnMismatch {
        found: Vec<String>,
        expected: Vec<String>,
    },
    #[error("summary has no `{AVERAGE_ROW}` row")]
    MissingAverage,
    #[error("bad number `{value}` in column `{column}`")]
    BadNumber { column: String, value: String },
    #[error("no corpora to compare")]
    NothingToCompare,
}

/// Per-severity means followed by the average-of-means row.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSummary {
    pub rows: Vec<SeverityMeans>,
    pub average: MeasureRow,
}

impl CorpusSummary {
    pub fn from_records(records: &[ProfiledRecord]) -> Option<CorpusSummary> {
        let rows = aggregate_by_severity(records);
        let average = average_of_means(&rows)?;
        Some(CorpusSummary { rows, average })
    }

    fn table_rows(&self) -> Vec<(String, usize, MeasureRow)> {
        let total: usize = self.rows.iter().map(|r| r.sample_n).sum();
        self.rows
            .iter()
            .map(|r| (r.severity.key().to_string(), r.sample_n, r.means))
            .chain(std::iter::once((
                AVERAGE_ROW.to_string(),
                total,
                self.average,
            )))
            .collect()
    }

    /// Full-precision CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ReportError> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(SUMMARY_COLUMNS)?;
        for (label, n, m) in self.table_rows() {
            let mut row = vec![label, n.to_string()];
            row.extend(m.fields().iter().map(|v| v.to_string()));
            out.write_record(&row)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Aligned text with two decimals.
    pub fn to_text(&self) -> String {
        let header = [
            "Severity", "N", "TTR", "NDW", "LD", "Words", "Avg", "CIUs", "% CIUs",
        ];
        let mut cells = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
        for (label, n, m) in self.table_rows() {
            let label = match label.parse::<SeverityLevel>() {
                Ok(s) => s.label().to_string(),
                Err(_) => "Average of means".to_string(),
            };
            let mut row = vec![label, n.to_string()];
            row.extend(m.fields().iter().map(|v| format!("{v:.2}")));
            cells.push(row);
        }
        align(&cells)
    }

    /// Reads back the average row of a summary CSV, checking the header.
    pub fn read_average<R: Read>(reader: R) -> Result<MeasureRow, ReportError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if headers != SUMMARY_COLUMNS {
            return Err(ReportError::ColumnMismatch {
                found: headers,
                expected: SUMMARY_COLUMNS.iter().map(|s| s.to_string()).collect(),
            });
        }
        for row in rdr.records() {
            let row = row?;
            if &row[0] != AVERAGE_ROW {
                continue;
            }
            let num = |i: usize| -> Result<f64, ReportError> {
                row[i].trim().parse().map_err(|_| ReportError::BadNumber {
                    column: SUMMARY_COLUMNS[i].to_string(),
                    value: row[i].to_string(),
                })
            };
            return Ok(MeasureRow {
                ttr: num(2)?,
                ndw: num(3)?,
                ld: num(4)?,
                words: num(5)?,
                avg_len: num(6)?,
                ciu_count: num(7)?,
                ciu_percentage: num(8)?,
            });
        }
        Err(ReportError::MissingAverage)
    }
}

/// Average-of-means comparison: the aphasic baseline first, then one column
/// per analyzed corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub corpora: Vec<(String, MeasureRow)>,
}

impl ComparisonReport {
    pub fn new(corpora: Vec<(String, MeasureRow)>) -> Result<Self, ReportError> {
        if corpora.is_empty() {
            return Err(ReportError::NothingToCompare);
        }
        Ok(ComparisonReport { corpora })
    }

    pub fn header(&self) -> Vec<String> {
        ["measure".to_string(), "aphasic_actual".to_string()]
            .into_iter()
            .chain(self.corpora.iter().map(|(name, _)| name.clone()))
            .collect()
    }

    fn values(&self, measure: Measure) -> Vec<f64> {
        std::iter::once(APHASIC_BASELINE.measure(measure))
            .chain(self.corpora.iter().map(|(_, row)| row.measure(measure)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ReportError> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(self.header())?;
        for m in Measure::ALL {
            let mut row = vec![m.label().to_string()];
            row.extend(self.values(m).iter().map(|v| v.to_string()));
            out.write_record(&row)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut cells = vec![self.header()];
        for m in Measure::ALL {
            let mut row = vec![m.label().to_string()];
            row.extend(self.values(m).iter().map(|v| format!("{v:.2}")));
            cells.push(row);
        }
        align(&cells)
    }
}

fn align(cells: &[Vec<String>]) -> String {
    let cols = cells.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            cells
                .iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in cells {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                if i == 0 {
                    format!("{cell:<w$}", w = widths[i])
                } else {
                    format!("{cell:>w$}", w = widths[i])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}
