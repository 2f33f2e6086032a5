use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use aphasia_synth::corpus::{read_jsonl, split_corpus, write_csv, write_jsonl, write_split};
use aphasia_synth::lexstats::{profile_records, ComparisonReport, CorpusSummary};
use aphasia_synth::llm::{generate_llm_corpus, API_KEY_ENV};
use aphasia_synth::{
    generate_corpus, load_config, Settings, SeverityLevel, SplitSpec, TranscriptRecord,
};
use log::info;

use crate::failure::Failure;

pub fn load_settings(path: Option<&Path>) -> Result<Settings, Failure> {
    match path {
        Some(p) => Ok(load_config(p)?),
        None => Ok(Settings::default()),
    }
}

/// `<stem>.<ext>`, tolerating a stem given with a trailing `.jsonl`.
fn with_suffix(stem: &Path, ext: &str) -> PathBuf {
    let stem = match stem.to_str().and_then(|s| s.strip_suffix(".jsonl")) {
        Some(s) => Path::new(s),
        None => stem,
    };
    let mut name = OsString::from(stem.as_os_str());
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

fn ensure_parent(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))
        }
        _ => Ok(()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    ensure_parent(path)?;
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), Failure> {
    w.flush()
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn print_counts(records: &[TranscriptRecord]) {
    for s in SeverityLevel::ALL {
        let n = records.iter().filter(|r| r.severity == s).count();
        println!("  {:<12} {n}", s.key());
    }
}

fn read_records(input: &Path) -> Result<Vec<TranscriptRecord>, Failure> {
    let records = read_jsonl(input)?;
    if records.is_empty() {
        return Err(Failure::config(format!("{}: no records", input.display())));
    }
    Ok(records)
}

pub fn gen_proc(
    settings: Settings,
    out: &Path,
    seed: Option<u64>,
    per_severity: Option<usize>,
) -> Result<(), Failure> {
    let mut config = settings.generation;
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    if let Some(n) = per_severity {
        config.per_severity_count = n;
    }
    let records = generate_corpus(&config)?;
    let path = with_suffix(out, "jsonl");
    ensure_parent(&path)?;
    write_jsonl(&records, &path)?;
    println!("wrote {} records to {}", records.len(), path.display());
    print_counts(&records);
    Ok(())
}

pub fn gen_llm(
    settings: Settings,
    out: &Path,
    repeats: Option<u32>,
    endpoint_url: Option<String>,
    model: Option<String>,
) -> Result<(), Failure> {
    let mut plan = settings.llm;
    let mut endpoint = settings.endpoint;
    if let Some(r) = repeats {
        if r == 0 {
            return Err(Failure::config("--repeats must be at least 1"));
        }
        plan.repeats_per_template = r;
    }
    if let Some(url) = endpoint_url {
        endpoint.base_url = url;
    }
    if let Some(m) = model {
        endpoint.model_name = m;
    }
    endpoint.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
    endpoint.validate()?;
    plan.sampling.validate()?;
    info!(
        "requesting {} completions from {}",
        plan.planned_count(),
        endpoint.completions_url()
    );

    let outcome = generate_llm_corpus(&plan, &endpoint)?;
    let jsonl = with_suffix(out, "jsonl");
    let csv = with_suffix(out, "csv");
    let skipped = with_suffix(out, "skipped.jsonl");
    ensure_parent(&jsonl)?;
    write_jsonl(&outcome.records, &jsonl)?;
    write_csv(&outcome.records, &csv)?;
    let mut w = create(&skipped)?;
    for s in &outcome.skipped {
        let line = serde_json::to_string(s).expect("skip entries serialize");
        writeln!(w, "{line}").map_err(|e| Failure::io(format!("{}: {e}", skipped.display())))?;
    }
    finish(w, &skipped)?;

    println!(
        "wrote {} records to {} ({} skipped)",
        outcome.records.len(),
        jsonl.display(),
        outcome.skipped.len()
    );
    print_counts(&outcome.records);
    Ok(())
}

pub fn score(settings: &Settings, input: &Path, out: &Path) -> Result<(), Failure> {
    let mut records = read_jsonl(input)?;
    let scorer = &settings.generation.scorer;
    for r in &mut records {
        let s = scorer.score_transcript(&r.transcript);
        r.word_count = s.word_count;
        r.ciu_count = s.ciu_count;
        r.ciu_percentage = s.ciu_percentage;
    }
    let jsonl = with_suffix(out, "jsonl");
    ensure_parent(&jsonl)?;
    write_jsonl(&records, &jsonl)?;
    write_csv(&records, &with_suffix(out, "csv"))?;
    println!("scored {} records into {}", records.len(), jsonl.display());
    Ok(())
}

pub fn analyze(
    settings: Settings,
    input: &Path,
    out: &Path,
    trials: Option<usize>,
    seed: u64,
) -> Result<(), Failure> {
    let mut profiling = settings.profiling;
    if let Some(t) = trials {
        if t == 0 {
            return Err(Failure::config("--trials must be at least 1"));
        }
        profiling.ndw_trials = t;
    }
    let records = read_records(input)?;
    let profiled = profile_records(&records, &profiling, seed)?;
    let summary = CorpusSummary::from_records(&profiled)
        .ok_or_else(|| Failure::config(format!("{}: no records", input.display())))?;
    let mut w = create(out)?;
    summary.write_csv(&mut w)?;
    finish(w, out)?;
    print!("{}", summary.to_text());
    Ok(())
}

fn parse_fractions(text: &str) -> Result<[f64; 3], Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || {
        Failure::config(format!(
            "--fractions expects three numbers a,b,c; got {text:?}"
        ))
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut f = [0.0; 3];
    for (slot, p) in f.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| bad())?;
    }
    Ok(f)
}

pub fn split(input: &Path, out: &Path, fractions: &str, seed: Option<u64>) -> Result<(), Failure> {
    let [a, b, c] = parse_fractions(fractions)?;
    let seed = seed.unwrap_or(SplitSpec::default().split_seed);
    let spec = SplitSpec::new(a, b, c, seed)?;
    let records = read_records(input)?;
    let split = split_corpus(&records, &spec)?;
    ensure_parent(&with_suffix(out, "train.jsonl"))?;
    let paths = write_split(&split, out)?;
    for (path, n) in paths
        .iter()
        .zip([split.train.len(), split.val.len(), split.test.len()])
    {
        println!("wrote {n} records to {}", path.display());
    }
    Ok(())
}

pub fn compare(summaries: &[PathBuf], out: &Path) -> Result<(), Failure> {
    if summaries.is_empty() {
        return Err(Failure::config("compare needs at least one summary CSV"));
    }
    let mut corpora = Vec::with_capacity(summaries.len());
    for path in summaries {
        let file = File::open(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        let row = CorpusSummary::read_average(file).map_err(|e| {
            let f = Failure::from(e);
            Failure::new(
                f.code,
                format!("{}: {}", path.display(), f.message.unwrap_or_default()),
            )
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        corpora.push((name, row));
    }
    let report = ComparisonReport::new(corpora)?;
    let mut w = create(out)?;
    report.write_csv(&mut w)?;
    finish(w, out)?;
    print!("{}", report.to_text());
    Ok(())
}
