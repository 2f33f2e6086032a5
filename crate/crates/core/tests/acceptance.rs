//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported but do not fail the process unless
//! `APHASYNTH_ACCEPTANCE_STRICT=1` is set, so that one unmet calibration
//! target does not stop cargo from running the remaining suites.

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use aphasia_synth::corpus::{
    split_corpus, write_jsonl_to, CorpusSplit, SplitSpec, TranscriptRecord,
};
use aphasia_synth::lexstats::{
    average_of_means, ndw, profile_records, profile_transcript, CorpusSummary, MeasureRow,
    ProfileSettings, SeverityMeans,
};
use aphasia_synth::llm::{generate_llm_corpus, EndpointConfig, LlmError, LlmRunPlan, PromptPack};
use aphasia_synth::procgen::{generate_corpus, GenerationConfig};
use aphasia_synth::text::tokenize;
use aphasia_synth::{ciu::score_transcript, SeverityLevel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{chat_body, oracle, system_text, user_text, StubServer};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let held: bool = $cond;
        if !held {
            return Err(format!($($msg)+));
        }
    };
}

fn jsonl(records: &[TranscriptRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_jsonl_to(records, &mut buf).unwrap();
    buf
}

fn ids(split: &CorpusSplit) -> [Vec<String>; 3] {
    [&split.train, &split.val, &split.test].map(|p| p.iter().map(|r| r.id.clone()).collect())
}

fn per_severity(records: &[TranscriptRecord]) -> BTreeMap<SeverityLevel, usize> {
    let mut m = BTreeMap::new();
    for r in records {
        *m.entry(r.severity).or_insert(0) += 1;
    }
    m
}

fn corpus_shape() -> Outcome {
    let start = Instant::now();
    let records = generate_corpus(&GenerationConfig::default()).map_err(|e| e.to_string())?;
    let _ = jsonl(&records);
    let split = split_corpus(&records, &SplitSpec::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    ensure!(records.len() == 10_000, "{} records", records.len());
    for (s, n) in per_severity(&records) {
        ensure!(n == 2_500, "{s}: {n}");
    }
    let parts = [(&split.train, 2_000), (&split.val, 250), (&split.test, 250)];
    for (part, each) in parts {
        ensure!(
            part.len() == each * 4,
            "split part has {} records",
            part.len()
        );
        for (s, n) in per_severity(part) {
            ensure!(n == each, "{s}: {n} in a split part, expected {each}");
        }
    }
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "10000 records, 8000/1000/1000 split, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn determinism() -> Outcome {
    let config = GenerationConfig::default();
    let a = generate_corpus(&config).unwrap();
    let b = generate_corpus(&config).unwrap();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| generate_corpus(&config).unwrap());
    let (ja, jb, js) = (jsonl(&a), jsonl(&b), jsonl(&single));
    ensure!(ja == jb, "two runs differ");
    ensure!(ja == js, "single-threaded run differs");

    let spec = SplitSpec::default();
    let s1 = split_corpus(&a, &spec).unwrap();
    let s2 = split_corpus(&b, &spec).unwrap();
    let mut reversed = a.clone();
    reversed.reverse();
    let s3 = split_corpus(&reversed, &spec).unwrap();
    ensure!(ids(&s1) == ids(&s2), "splits differ");
    ensure!(ids(&s1) == ids(&s3), "split depends on input order");
    Ok(format!(
        "{} identical JSONL bytes across 3 runs, splits identical",
        ja.len()
    ))
}

const TABLE_WORDS: [f64; 4] = [36.52, 34.55, 31.99, 29.96];
const TABLE_CIU_PCT: [f64; 4] = [91.26, 83.81, 77.76, 71.56];

fn calibration() -> Outcome {
    let start = Instant::now();
    let config = GenerationConfig {
        per_severity_count: 250,
        ..GenerationConfig::default()
    };
    let records = generate_corpus(&config).unwrap();
    let mut words = [0.0; 4];
    let mut pct = [0.0; 4];
    for r in &records {
        words[r.severity.index()] += r.word_count as f64 / 250.0;
        pct[r.severity.index()] += r.ciu_percentage / 250.0;
    }
    let elapsed = start.elapsed();
    let mut detail = Vec::new();
    for s in SeverityLevel::ALL {
        let i = s.index();
        detail.push(format!(
            "{} words {:.2} CIU% {:.2}",
            s.key(),
            words[i],
            pct[i]
        ));
        ensure!(
            (words[i] / TABLE_WORDS[i] - 1.0).abs() <= 0.15,
            "{s} mean words {:.2} outside 15% of {}",
            words[i],
            TABLE_WORDS[i]
        );
        ensure!(
            (pct[i] - TABLE_CIU_PCT[i]).abs() <= 5.0,
            "{s} mean CIU% {:.2} outside 5 points of {}",
            pct[i],
            TABLE_CIU_PCT[i]
        );
    }
    ensure!(
        pct.windows(2).all(|w| w[0] > w[1]),
        "CIU% not strictly decreasing: {pct:?}"
    );
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(detail.join("; "))
}

fn table_row(
    severity: SeverityLevel,
    ttr: f64,
    ndw: f64,
    ld: f64,
    words: f64,
    avg_len: f64,
) -> SeverityMeans {
    SeverityMeans {
        severity,
        means: MeasureRow {
            ttr,
            ndw,
            ld,
            words,
            avg_len,
            ciu_count: 0.0,
            ciu_percentage: 0.0,
        },
        sample_n: 250,
    }
}

fn average_arithmetic() -> Outcome {
    let rows = [
        table_row(SeverityLevel::Mild, 0.62, 22.73, 0.52, 36.52, 3.74),
        table_row(SeverityLevel::Moderate, 0.63, 21.82, 0.53, 34.55, 3.76),
        table_row(SeverityLevel::Severe, 0.64, 20.58, 0.54, 31.99, 3.78),
        table_row(SeverityLevel::VerySevere, 0.65, 19.51, 0.55, 29.96, 3.80),
    ];
    let avg = average_of_means(&rows).unwrap();
    ensure!((avg.ttr - 0.635).abs() < 1e-12, "TTR mean {}", avg.ttr);
    ensure!(
        (avg.words - 33.255).abs() < 1e-12,
        "Words mean {}",
        avg.words
    );
    Ok(format!("TTR {:.3}, Words {:.3}", avg.ttr, avg.words))
}

fn average_of_corpus() -> Outcome {
    let records = generate_corpus(&GenerationConfig::default()).unwrap();
    let profiled = profile_records(&records, &ProfileSettings::default(), 7).unwrap();
    let avg = CorpusSummary::from_records(&profiled).unwrap().average;
    let checks = [
        ("TTR", avg.ttr, 0.64, 0.03),
        ("NDW", avg.ndw, 21.0, 3.0),
        ("LD", avg.ld, 0.54, 0.03),
        ("Words", avg.words, 33.0, 5.0),
        ("Avg", avg.avg_len, 3.77, 0.10),
    ];
    let detail: Vec<String> = checks
        .iter()
        .map(|(name, got, want, tol)| {
            let mark = if (got - want).abs() <= *tol {
                "ok"
            } else {
                "OUT"
            };
            format!("{name} {got:.3} (target {want}±{tol} {mark})")
        })
        .collect();
    let detail = detail.join(", ");
    ensure!(
        checks
            .iter()
            .all(|(_, got, want, tol)| (got - want).abs() <= *tol),
        "{detail}"
    );
    Ok(detail)
}

const CIU_VOCAB: &[&str] = &[
    "the", "cat", "tree", "ladder", "fell", "girl", "boy", "dog", "mother", "ledder", "um", "uh",
    "uh-huh", "so", "and", "then", "but", "or", "yup", "fire", "it's",
];

fn ciu_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let cases = 2_000;
    for case in 0..cases {
        let len = rng.random_range(0..50);
        let words: Vec<String> = (0..len)
            .map(|_| CIU_VOCAB[rng.random_range(0..CIU_VOCAB.len())].to_string())
            .collect();
        let text = words.join(if rng.random_bool(0.5) { " " } else { ", " });
        let score = score_transcript(&text);
        ensure!(score.word_count == words.len(), "case {case}: word count");
        ensure!(
            score.ciu_count == oracle::ciu_count(&words),
            "case {case}: {} vs oracle {} for {text:?}",
            score.ciu_count,
            oracle::ciu_count(&words)
        );
    }
    Ok(format!("{cases} random sequences match"))
}

fn std_dev(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn metric_properties() -> Outcome {
    let settings = ProfileSettings::default();
    let config = GenerationConfig {
        per_severity_count: 100,
        ..GenerationConfig::default()
    };
    let records = generate_corpus(&config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    // single transcripts are short; pairs and triples cross the 50-word line
    let mut texts: Vec<String> = records.iter().map(|r| r.transcript.clone()).collect();
    for chunk in records.chunks(3) {
        texts.push(
            chunk
                .iter()
                .map(|r| r.transcript.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        );
    }
    let (mut basic, mut er50) = (0, 0);
    for text in &texts {
        let words = oracle::tokenize(text);
        let p = profile_transcript(text, &settings, &mut rng).unwrap();
        ensure!(p.ttr > 0.0 && p.ttr <= 1.0, "TTR {}", p.ttr);
        ensure!((0.0..=1.0).contains(&p.ld), "LD {}", p.ld);
        if words.len() < 50 {
            basic += 1;
            ensure!(
                p.ndw == oracle::distinct(&words) as f64,
                "basic NDW path not taken"
            );
        } else {
            er50 += 1;
            ensure!(
                p.ndw <= 50.0 && p.ndw <= words.len() as f64,
                "NDW {} above bound",
                p.ndw
            );
            ensure!(
                p.ndw <= oracle::distinct(&words) as f64,
                "ER50 above type count"
            );
        }
    }
    // boundary: all-distinct words give the type count below 50, 50 at and above
    let distinct_words = |n: usize| -> Vec<_> { (0..n).map(|i| format!("w{}", i)).collect() };
    for (n, want) in [(49, 49.0), (50, 50.0), (80, 50.0)] {
        let text = distinct_words(n).join(" ");
        let got = ndw(&tokenize(&text), 10, &mut rng).unwrap();
        ensure!(
            got == want,
            "{n} distinct words: NDW {got}, expected {want}"
        );
    }

    // ER50 spread shrinks as trials grow
    let long = records[..4]
        .iter()
        .map(|r| r.transcript.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    let tokens = tokenize(&long);
    ensure!(tokens.len() >= 100, "sample text too short");
    let mut spreads = Vec::new();
    for trials in [2, 10, 100] {
        let runs: Vec<f64> = (0..30u64)
            .map(|rep| {
                let mut r = ChaCha8Rng::seed_from_u64(1_000 * trials as u64 + rep);
                ndw(&tokens, trials, &mut r).unwrap()
            })
            .collect();
        spreads.push(std_dev(&runs));
    }
    ensure!(
        spreads[0] > spreads[1] && spreads[1] > spreads[2],
        "std over trials 2/10/100: {spreads:?}"
    );
    Ok(format!(
        "{basic} basic, {er50} ER50 texts; NDW-ER50 std {:.3} > {:.3} > {:.3}",
        spreads[0], spreads[1], spreads[2]
    ))
}

fn llm_stub() -> Outcome {
    let text = "Um the cat, up the tree. Ladder fell.";
    let stub = StubServer::start(
        Box::new(move |_| (200, chat_body(text))),
        8,
        Duration::from_millis(5),
    );
    let endpoint = EndpointConfig {
        base_url: stub.url.clone(),
        max_parallel: 4,
        retry_backoff: Duration::from_millis(1),
        max_retries: 0,
        ..EndpointConfig::default()
    };
    let plan = LlmRunPlan::new(PromptPack::builtin());
    let out = generate_llm_corpus(&plan, &endpoint).map_err(|e| e.to_string())?;
    ensure!(out.records.len() == 32, "{} records", out.records.len());
    for (s, n) in per_severity(&out.records) {
        ensure!(n == 8, "{s}: {n}");
    }
    let captured = stub.captured();
    ensure!(captured.len() == 32, "{} requests", captured.len());
    for c in &captured {
        let p = &c.payload;
        ensure!(
            p["temperature"] == 0.7 && p["top_p"] == 0.9 && p["repetition_penalty"] == 1.0,
            "payload sampling params: {p}"
        );
    }
    ensure!(
        stub.max_in_flight() <= 4,
        "concurrency {}",
        stub.max_in_flight()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut patterns = 0;
    for _ in 0..6 {
        let failing: BTreeSet<(usize, u8)> = (0..rng.random_range(0..=16))
            .map(|_| (rng.random_range(0..4), rng.random_range(1..=4)))
            .collect();
        let pack = PromptPack::builtin();
        let fail = failing.clone();
        let stub = StubServer::simple(Box::new(move |p| {
            let t = pack
                .templates()
                .iter()
                .find(|t| t.system_text == system_text(p) && t.user_text == user_text(p))
                .unwrap();
            if fail.contains(&(t.severity.index(), t.template_id)) {
                (500, String::new())
            } else {
                (200, chat_body(text))
            }
        }));
        let ep = EndpointConfig {
            base_url: stub.url.clone(),
            ..endpoint.clone()
        };
        let (records, skipped) = match generate_llm_corpus(&plan, &ep) {
            Ok(out) => (out.records.len(), out.skipped.len()),
            Err(LlmError::AllRequestsFailed { attempted, .. }) => (0, attempted),
            Err(e) => return Err(e.to_string()),
        };
        ensure!(
            records + skipped == 32,
            "{records} + {skipped} with {} failing templates",
            failing.len()
        );
        ensure!(
            skipped == failing.len() * 2,
            "{skipped} skipped for {} failing templates",
            failing.len()
        );
        patterns += 1;
    }
    Ok(format!(
        "32 records (8 per severity), params ok, {patterns} fault patterns sum to plan"
    ))
}

fn example_transcripts() -> Outcome {
    let text = "The um cat is stuck yup up tree. The little girl called her father to use a ladder. \
                But the ladder fell uh-huh. They called the fire department nope. The fire department \
                came to rescue so the uh cat.";
    let score = score_transcript(text);
    ensure!(
        (score.word_count, score.ciu_count) == (39, 32),
        "score {score:?}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = profile_transcript(text, &ProfileSettings::default(), &mut rng).unwrap();
    ensure!(p.words == 39, "words {}", p.words);
    ensure!(p.ttr == 28.0 / 39.0, "TTR {}", p.ttr);
    ensure!(p.ndw == 28.0, "NDW {}", p.ndw);
    ensure!(p.ld == 19.0 / 39.0, "LD {}", p.ld);
    ensure!(p.avg_len == 155.0 / 39.0, "Avg {}", p.avg_len);
    Ok(format!(
        "39 words, 32 CIUs ({:.2}%), TTR {:.3}, NDW 28, LD {:.3}, Avg {:.3}",
        score.ciu_percentage, p.ttr, p.ld, p.avg_len
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 corpus shape and runtime", corpus_shape),
        ("2 determinism", determinism),
        ("3 calibration of words and CIU%", calibration),
        ("4a average-of-means arithmetic", average_arithmetic),
        (
            "4b average-of-means on the default corpus",
            average_of_corpus,
        ),
        ("5 CIU oracle equivalence", ciu_oracle),
        ("6 metric properties", metric_properties),
        ("7 LLM pipeline against stub", llm_stub),
        ("8 example transcript fixtures", example_transcripts),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 && std::env::var("APHASYNTH_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
