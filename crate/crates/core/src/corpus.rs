//! Transcript records, JSONL/CSV persistence and stratified splitting.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::text::SeverityLevel;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
}

impl CorpusError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Procedural,
    Llm,
}

/// One synthetic transcript with provenance and CIU metadata. Field order
/// is the JSONL key order and the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptRecord {
    pub id: String,
    pub method: Method,
    #[serde(default)]
    pub model: Option<String>,
    pub severity: SeverityLevel,
    #[serde(default)]
    pub template_id: Option<u8>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub transcript: String,
    pub word_count: usize,
    pub ciu_count: usize,
    pub ciu_percentage: f64,
    pub created_at: DateTime<Utc>,
}

pub const FIELDS: [&str; 11] = [
    "id",
    "method",
    "model",
    "severity",
    "template_id",
    "seed",
    "transcript",
    "word_count",
    "ciu_count",
    "ciu_percentage",
    "created_at",
];

impl TranscriptRecord {
    fn check_invariants(&self) -> Result<(), String> {
        if self.ciu_count > self.word_count {
            return Err(format!(
                "ciu_count {} exceeds word_count {}",
                self.ciu_count, self.word_count
            ));
        }
        let expected = if self.word_count == 0 {
            0.0
        } else {
            100.0 * self.ciu_count as f64 / self.word_count as f64
        };
        if (self.ciu_percentage - expected).abs() > 1e-6 {
            return Err(format!(
                "ciu_percentage {} does not match {}/{}",
                self.ciu_percentage, self.ciu_count, self.word_count
            ));
        }
        Ok(())
    }
}

pub fn write_jsonl_to<W: Write>(records: &[TranscriptRecord], mut writer: W) -> io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn write_jsonl(records: &[TranscriptRecord], path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    write_jsonl_to(records, BufWriter::new(file)).map_err(|e| CorpusError::io(path, e))
}

/// Reads records, one JSON object per non-blank line. Unknown or missing
/// fields, broken CIU invariants and duplicate ids are schema errors.
pub fn read_jsonl_from<R: Read>(reader: R) -> Result<Vec<TranscriptRecord>, CorpusError> {
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::Schema {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| CorpusError::Schema {
            line: line_no,
            message,
        };
        let record: TranscriptRecord =
            serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        record.check_invariants().map_err(schema)?;
        if !ids.insert(record.id.clone()) {
            return Err(schema(format!("duplicate id `{}`", record.id)));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<TranscriptRecord>, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    read_jsonl_from(file)
}

pub fn write_csv_to<W: Write>(records: &[TranscriptRecord], writer: W) -> Result<(), CorpusError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(FIELDS)?;
    for r in records {
        let opt = |v: Option<String>| v.unwrap_or_default();
        out.write_record([
            r.id.clone(),
            format!("{:?}", r.method).to_lowercase(),
            opt(r.model.clone()),
            r.severity.key().to_string(),
            opt(r.template_id.map(|t| t.to_string())),
            opt(r.seed.map(|s| s.to_string())),
            r.transcript.clone(),
            r.word_count.to_string(),
            r.ciu_count.to_string(),
            r.ciu_percentage.to_string(),
            r.created_at
                .to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_csv(records: &[TranscriptRecord], path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    write_csv_to(records, BufWriter::new(file))
}

/// Train/validation/test fractions and the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub split_seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64, split_seed: u64) -> Result<Self, CorpusError> {
        let spec = SplitSpec {
            train_fraction: train,
            val_fraction: val,
            test_fraction: test,
            split_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let f = self.fractions();
        if f.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(CorpusError::InvalidSplit(format!(
                "fractions must be positive, got {f:?}"
            )));
        }
        let sum: f64 = f.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::InvalidSplit(format!(
                "fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    fn fractions(&self) -> [f64; 3] {
        [self.train_fraction, self.val_fraction, self.test_fraction]
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            val_fraction: 0.1,
            test_fraction: 0.1,
            split_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusSplit {
    pub train: Vec<TranscriptRecord>,
    pub val: Vec<TranscriptRecord>,
    pub test: Vec<TranscriptRecord>,
}

/// Splits `n` items by largest remainder; ties go to the earlier part.
pub fn largest_remainder(n: usize, fractions: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    // tolerate representation error such as 0.1 * 2500 = 250.00000000000003
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q + 1e-9).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - counts[a] as f64;
        let rb = quotas[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Deterministic shuffle key for a record id.
pub(crate) fn id_key(seed: u64, id: &str) -> u64 {
    let mut bytes = seed.to_le_bytes().to_vec();
    bytes.extend_from_slice(id.as_bytes());
    fnv1a(&bytes)
}

/// Stratified split: within each severity, records are ordered by a hash of
/// (split seed, id) and cut by the fractions. Output order follows severity,
/// then that hash, so the result does not depend on input order.
pub fn split_corpus(
    records: &[TranscriptRecord],
    spec: &SplitSpec,
) -> Result<CorpusSplit, CorpusError> {
    spec.validate()?;
    let mut strata: BTreeMap<SeverityLevel, Vec<&TranscriptRecord>> = BTreeMap::new();
    for r in records {
        strata.entry(r.severity).or_default().push(r);
    }
    let mut split = CorpusSplit::default();
    for (_, mut stratum) in strata {
        stratum.sort_by(|a, b| {
            id_key(spec.split_seed, &a.id)
                .cmp(&id_key(spec.split_seed, &b.id))
                .then_with(|| a.id.cmp(&b.id))
        });
        let counts = largest_remainder(stratum.len(), &spec.fractions());
        let mut rest = stratum.into_iter();
        split.train.extend(rest.by_ref().take(counts[0]).cloned());
        split.val.extend(rest.by_ref().take(counts[1]).cloned());
        split.test.extend(rest.cloned());
    }
    Ok(split)
}

/// Paths `<stem>.train.jsonl`, `<stem>.val.jsonl`, `<stem>.test.jsonl`.
pub fn split_paths(stem: &Path) -> [PathBuf; 3] {
    ["train", "val", "test"].map(|part| {
        let mut name = stem.as_os_str().to_owned();
        name.push(format!(".{part}.jsonl"));
        PathBuf::from(name)
    })
}

pub fn write_split(split: &CorpusSplit, stem: &Path) -> Result<[PathBuf; 3], CorpusError> {
    let paths = split_paths(stem);
    for (records, path) in [&split.train, &split.val, &split.test]
        .into_iter()
        .zip(&paths)
    {
        write_jsonl(records, path)?;
    }
    Ok(paths)
}
