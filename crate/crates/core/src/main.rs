//! Command-line front end: each subcommand wraps one library stage, reads and
//! writes JSON Lines, and leaves a manifest sidecar next to every file output.

use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use vstext::corpus::{read_corpus, write_corpus, Comment, Corpus};
use vstext::diacritics::{strip_partial, StripPlan};
use vstext::error::{Error, Result};
use vstext::masking::{plan_masks, MaskConfig, MaskPlan};
use vstext::metrics::{classification_report, paired_t_test, span_report, EvalReport};
use vstext::normalize::{
    clean_corpus, emojis_to_text, normalize_teencode, remove_emojis, EmojiLexicon,
    TeencodeLexicon,
};
use vstext::pipeline::{atomic_write, PipelineConfig, RunManifest};
use vstext::span::{remap_spans, RemapOptions, SpanLabeledSeq};
use vstext::unigram::{
    token_length_stats, train_with_stats, Encoding, UnigramVocab, MARKER,
};

#[derive(Parser)]
#[command(
    name = "vstext",
    version,
    about = "Vietnamese social-media text pipeline: clean, normalize, perturb, tokenize, mask, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonIo {
    /// TOML pipeline config; flags override individual fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input file ("-" or omitted = stdin)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file (omitted = stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Drop link/handle-only/spam/low-content comments per the cleaning rules
    Clean {
        #[command(flatten)]
        io: CommonIo,
    },
    /// Apply teencode and emoji text transforms to every comment
    Normalize {
        #[command(flatten)]
        io: CommonIo,
        /// Teencode lexicon TSV; collapses letter runs and standardizes tokens
        #[arg(long)]
        teencode: Option<PathBuf>,
        /// Emoji lexicon TSV; replaces each covered emoji with its words
        #[arg(long, value_name = "LEXICON")]
        emojis_to_text: Option<PathBuf>,
        /// Remove all emoji instead of expanding them
        #[arg(long, conflicts_with = "emojis_to_text")]
        remove_emojis: bool,
    },
    /// Strip diacritics from a seeded percentage of diacritic-bearing words
    Perturb {
        #[command(flatten)]
        io: CommonIo,
        /// Percentage of diacritic-bearing words to strip
        #[arg(long, value_parser = ["25", "50", "75", "100"])]
        diacritics: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a unigram subword vocabulary on a corpus
    TrainTokenizer {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        vocab_size: Option<usize>,
        #[arg(long)]
        coverage: Option<f64>,
        #[arg(long)]
        max_piece_length: Option<usize>,
    },
    /// Encode a corpus into subword ids with a trained vocabulary
    Encode {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Display pieces without the word-boundary marker
        #[arg(long)]
        strip_marker: bool,
    },
    /// Token-length statistics per dataset for a trained vocabulary
    Stats {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Datasets as name=path, repeatable
        #[arg(long, value_name = "NAME=PATH", num_args = 1..)]
        inputs: Vec<String>,
    },
    /// Generate masked-LM plans from encoded sequences
    Mask {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        epoch: u64,
    },
    /// Rewrite span labels across emoji expansion or deletion
    RemapSpans {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Delete emoji words instead of expanding them
        #[arg(long, conflicts_with = "expand")]
        delete: bool,
        /// Expand emoji words via the lexicon (default)
        #[arg(long)]
        expand: bool,
    },
    /// Score predictions against gold labels or spans
    Evaluate {
        #[arg(long, global = true)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = ["classification", "spans"])]
        task: String,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Second prediction file for a paired significance test
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn read_input_corpus(input: &Option<PathBuf>) -> Result<Corpus> {
    match input {
        Some(p) if p.as_os_str() != "-" => {
            let file = std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
            read_corpus(BufReader::new(file), p.display().to_string())
        }
        _ => read_corpus(std::io::stdin().lock(), "stdin"),
    }
}

fn read_input_lines(input: &Option<PathBuf>) -> Result<Vec<String>> {
    let mut text = String::new();
    match input {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::File::open(p)
                .and_then(|mut f| f.read_to_string(&mut text))
                .map_err(|e| Error::io(p, e))?;
        }
        _ => {
            std::io::stdin()
                .lock()
                .read_to_string(&mut text)
                .map_err(|e| Error::io(Path::new("stdin"), e))?;
        }
    }
    Ok(text.lines().map(str::to_string).collect())
}

/// Write `bytes` to `--out` atomically with a manifest sidecar, or to stdout.
fn emit(
    out: &Option<PathBuf>,
    bytes: &[u8],
    manifest: &mut RunManifest,
    started: Instant,
) -> Result<()> {
    manifest
        .timings_ms
        .insert(manifest.subcommand.clone(), started.elapsed().as_millis() as u64);
    match out {
        Some(path) => {
            atomic_write(path, bytes)?;
            manifest.record_output(path)?;
            manifest.save_beside(path)?;
        }
        None => {
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| Error::io(Path::new("stdout"), e))?;
        }
    }
    Ok(())
}

fn manifest_for(subcommand: &str, cfg: &PipelineConfig, input: &Option<PathBuf>) -> RunManifest {
    let mut m = RunManifest::new(subcommand, cfg.config_hash());
    if let Some(p) = input {
        if p.as_os_str() != "-" {
            let _ = m.record_input(p);
        }
    }
    m
}

fn corpus_bytes(corpus: &Corpus) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_corpus(corpus, &mut buf).map_err(|e| Error::io(Path::new("buffer"), e))?;
    Ok(buf)
}

fn json_lines<T: Serialize>(records: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        buf.push(b'\n');
    }
    Ok(buf)
}

/// One encoded comment; the `encode` output and `mask` input schema.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EncodedRecord {
    id: String,
    ids: Vec<u32>,
    pieces: Vec<String>,
    offsets: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MaskRecord {
    id: String,
    epoch: u64,
    #[serde(flatten)]
    plan: MaskPlan,
}

#[derive(Debug, Serialize)]
struct PlanRecord<'a> {
    id: &'a str,
    #[serde(flatten)]
    plan: &'a StripPlan,
}

fn run(command: Command) -> Result<()> {
    let started = Instant::now();
    match command {
        Command::Clean { io } => {
            let cfg = load_config(&io.config)?;
            let corpus = read_input_corpus(&io.input)?;
            let (cleaned, stats) = clean_corpus(&corpus, &cfg.clean)?;
            let mut manifest = manifest_for("clean", &cfg, &io.input);
            let stats_json = serde_json::to_string_pretty(&stats)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            emit(&io.out, &corpus_bytes(&cleaned)?, &mut manifest, started)?;
            // stats go wherever the corpus did not
            if io.out.is_some() {
                println!("{stats_json}");
            } else {
                eprintln!("{stats_json}");
            }
            Ok(())
        }
        Command::Normalize {
            io,
            teencode,
            emojis_to_text: emoji_lex_path,
            remove_emojis: drop_emojis,
        } => {
            let cfg = load_config(&io.config)?;
            let teencode = teencode.or(cfg.paths.teencode_lexicon.clone());
            let emoji_lex_path = emoji_lex_path.or_else(|| {
                if drop_emojis { None } else { cfg.paths.emoji_lexicon.clone() }
            });
            if teencode.is_none() && emoji_lex_path.is_none() && !drop_emojis {
                return Err(Error::InvalidConfig(
                    "normalize needs --teencode, --emojis-to-text or --remove-emojis".into(),
                ));
            }
            let teencode_lex = teencode.as_deref().map(TeencodeLexicon::from_tsv_path).transpose()?;
            let emoji_lex = emoji_lex_path.as_deref().map(EmojiLexicon::from_tsv_path).transpose()?;
            let corpus = read_input_corpus(&io.input)?;
            let mut manifest = manifest_for("normalize", &cfg, &io.input);
            for p in [&teencode, &emoji_lex_path].into_iter().flatten() {
                manifest.record_input(p)?;
            }
            let comments = corpus
                .iter()
                .map(|c| {
                    let mut text = c.text.clone();
                    if let Some(lex) = &teencode_lex {
                        text = normalize_teencode(&text, lex);
                    }
                    if let Some(lex) = &emoji_lex {
                        text = emojis_to_text(&text, lex);
                    }
                    if drop_emojis {
                        text = remove_emojis(&text);
                    }
                    Comment { text, ..c.clone() }
                })
                .collect();
            let out = Corpus::from_comments(corpus.name.clone(), comments)?;
            emit(&io.out, &corpus_bytes(&out)?, &mut manifest, started)
        }
        Command::Perturb { io, diacritics, seed } => {
            let cfg = load_config(&io.config)?;
            let percentage = match diacritics {
                Some(p) => p.parse::<u8>().unwrap(),
                None => cfg.perturb.diacritics_percentage,
            };
            let seed = seed.unwrap_or(cfg.seed);
            let corpus = read_input_corpus(&io.input)?;
            let mut manifest = manifest_for("perturb", &cfg, &io.input);
            let mut comments = Vec::with_capacity(corpus.len());
            let mut plans = Vec::with_capacity(corpus.len());
            for c in corpus.iter() {
                let (text, plan) = strip_partial(&c.text, percentage, seed, &c.id)?;
                plans.push((c.id.clone(), plan));
                comments.push(Comment { text, ..c.clone() });
            }
            let out = Corpus::from_comments(corpus.name.clone(), comments)?;
            emit(&io.out, &corpus_bytes(&out)?, &mut manifest, started)?;
            // plan sidecar for auditing which words each realization stripped
            if let Some(path) = &io.out {
                let records: Vec<PlanRecord> = plans
                    .iter()
                    .map(|(id, plan)| PlanRecord { id, plan })
                    .collect();
                let mut name = path.file_name().unwrap_or_default().to_os_string();
                name.push(".plan.json");
                let plan_path = path.with_file_name(name);
                let json = serde_json::to_vec_pretty(&records)
                    .map_err(|e| Error::InvalidConfig(e.to_string()))?;
                atomic_write(&plan_path, &json)?;
            }
            Ok(())
        }
        Command::TrainTokenizer {
            io,
            vocab_size,
            coverage,
            max_piece_length,
        } => {
            let cfg = load_config(&io.config)?;
            let mut tcfg = cfg.tokenizer.clone();
            if let Some(v) = vocab_size {
                tcfg.target_vocab_size = v;
            }
            if let Some(c) = coverage {
                tcfg.character_coverage = c;
            }
            if let Some(m) = max_piece_length {
                tcfg.max_piece_length = m;
            }
            let corpus = read_input_corpus(&io.input)?;
            let mut manifest = manifest_for("train-tokenizer", &cfg, &io.input);
            let (vocab, _stats): (UnigramVocab<f64>, _) = train_with_stats(&corpus, &tcfg)?;
            let mut buf = Vec::new();
            vocab
                .write(&mut buf)
                .map_err(|e| Error::io(Path::new("buffer"), e))?;
            emit(&io.out, &buf, &mut manifest, started)
        }
        Command::Encode { io, vocab, strip_marker } => {
            let cfg = load_config(&io.config)?;
            let vocab_path = vocab
                .or(cfg.paths.vocab.clone())
                .ok_or_else(|| Error::InvalidConfig("encode needs --vocab".into()))?;
            let vocab: UnigramVocab<f64> = UnigramVocab::load(&vocab_path)?;
            let corpus = read_input_corpus(&io.input)?;
            let mut manifest = manifest_for("encode", &cfg, &io.input);
            manifest.record_input(&vocab_path)?;
            let records: Vec<EncodedRecord> = corpus
                .iter()
                .map(|c| {
                    let enc = vocab.encode(&c.text);
                    let pieces = if strip_marker {
                        enc.pieces
                            .iter()
                            .map(|p| p.replace(MARKER, ""))
                            .collect()
                    } else {
                        enc.pieces
                    };
                    EncodedRecord {
                        id: c.id.clone(),
                        ids: enc.ids,
                        pieces,
                        offsets: enc.offsets,
                    }
                })
                .collect();
            emit(&io.out, &json_lines(&records)?, &mut manifest, started)
        }
        Command::Stats { io, vocab, inputs } => {
            let cfg = load_config(&io.config)?;
            let vocab_path = vocab
                .or(cfg.paths.vocab.clone())
                .ok_or_else(|| Error::InvalidConfig("stats needs --vocab".into()))?;
            if inputs.is_empty() {
                return Err(Error::InvalidConfig("stats needs --inputs name=path".into()));
            }
            let vocab: UnigramVocab<f64> = UnigramVocab::load(&vocab_path)?;
            let mut manifest = manifest_for("stats", &cfg, &io.input);
            manifest.record_input(&vocab_path)?;
            let mut corpora = Vec::new();
            for spec in &inputs {
                let (name, path) = spec.split_once('=').ok_or_else(|| {
                    Error::InvalidConfig(format!("bad --inputs entry {spec:?}, want name=path"))
                })?;
                let path = PathBuf::from(path);
                manifest.record_input(&path)?;
                let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
                corpora.push((name.to_string(), read_corpus(BufReader::new(file), name)?));
            }
            let refs: Vec<(String, &Corpus)> =
                corpora.iter().map(|(n, c)| (n.clone(), c)).collect();
            let report = token_length_stats(&vocab, &refs)?;
            let mut json = serde_json::to_vec_pretty(&report)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            json.push(b'\n');
            emit(&io.out, &json, &mut manifest, started)
        }
        Command::Mask { io, vocab, rate, seed, epoch } => {
            let cfg = load_config(&io.config)?;
            let vocab_path = vocab
                .or(cfg.paths.vocab.clone())
                .ok_or_else(|| Error::InvalidConfig("mask needs --vocab".into()))?;
            let vocab: UnigramVocab<f64> = UnigramVocab::load(&vocab_path)?;
            let mut mcfg = MaskConfig {
                rate: rate.unwrap_or(cfg.mask.rate),
                seed: seed.unwrap_or(cfg.mask.seed),
                ..cfg.mask.clone()
            };
            if mcfg.seed == 0 {
                mcfg.seed = cfg.seed;
            }
            let mut manifest = manifest_for("mask", &cfg, &io.input);
            manifest.record_input(&vocab_path)?;
            let mut records = Vec::new();
            for (lineno, line) in read_input_lines(&io.input)?.into_iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let rec: EncodedRecord = serde_json::from_str(&line).map_err(|e| {
                    Error::MalformedLine { line: lineno + 1, source: e }
                })?;
                let enc = Encoding {
                    ids: rec.ids,
                    pieces: rec.pieces,
                    offsets: rec.offsets,
                };
                let plan = plan_masks(&enc, &vocab, &mcfg, &rec.id, epoch)?;
                records.push(MaskRecord { id: rec.id, epoch, plan });
            }
            emit(&io.out, &json_lines(&records)?, &mut manifest, started)
        }
        Command::RemapSpans { io, lexicon, delete, expand: _ } => {
            let cfg = load_config(&io.config)?;
            let lexicon_path = lexicon
                .or(cfg.paths.emoji_lexicon.clone())
                .ok_or_else(|| Error::InvalidConfig("remap-spans needs --lexicon".into()))?;
            let lex = EmojiLexicon::from_tsv_path(&lexicon_path)?;
            let corpus = read_input_corpus(&io.input)?;
            let mut manifest = manifest_for("remap-spans", &cfg, &io.input);
            manifest.record_input(&lexicon_path)?;
            let opts = RemapOptions { delete };
            let comments = corpus
                .iter()
                .map(|c| {
                    let spans = c.spans.clone().unwrap_or_default();
                    let seq = SpanLabeledSeq::from_text_and_spans(&c.text, &spans)?;
                    let remapped = remap_spans(&seq, &lex, opts)?;
                    Ok(Comment {
                        text: remapped.words.join(" "),
                        spans: Some(remapped.to_spans()),
                        ..c.clone()
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let out = Corpus::from_comments(corpus.name.clone(), comments)?;
            emit(&io.out, &corpus_bytes(&out)?, &mut manifest, started)
        }
        Command::Evaluate { config, task, gold, pred, compare, alpha, out } => {
            let cfg = load_config(&config)?;
            let mut manifest = manifest_for("evaluate", &cfg, &Some(gold.clone()));
            manifest.record_input(&pred)?;
            let gold_corpus = read_input_corpus(&Some(gold))?;
            let pred_corpus = read_input_corpus(&Some(pred))?;
            let report = evaluate_task(&task, &gold_corpus, &pred_corpus)?;
            let mut output = serde_json::json!({ "report": report });
            if let Some(compare_path) = compare {
                manifest.record_input(&compare_path)?;
                let compare_corpus = read_input_corpus(&Some(compare_path))?;
                let a = per_example_scores(&task, &gold_corpus, &pred_corpus)?;
                let b = per_example_scores(&task, &gold_corpus, &compare_corpus)?;
                let test = paired_t_test(&a, &b, alpha)?;
                output["comparison_report"] =
                    serde_json::to_value(evaluate_task(&task, &gold_corpus, &compare_corpus)?)
                        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
                output["paired_t_test"] = serde_json::to_value(test)
                    .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            }
            let mut json = serde_json::to_vec_pretty(&output)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            json.push(b'\n');
            emit(&out, &json, &mut manifest, started)
        }
    }
}

fn paired_by_id<'a>(gold: &'a Corpus, pred: &'a Corpus) -> Result<Vec<(&'a Comment, &'a Comment)>> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch(format!(
            "{} gold comments vs {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    let by_id: std::collections::HashMap<&str, &Comment> =
        pred.iter().map(|c| (c.id.as_str(), c)).collect();
    gold.iter()
        .map(|g| {
            by_id
                .get(g.id.as_str())
                .map(|p| (g, *p))
                .ok_or_else(|| Error::LengthMismatch(format!("no prediction for id {:?}", g.id)))
        })
        .collect()
}

fn labels_of(pairs: &[(&Comment, &Comment)]) -> Result<(Vec<String>, Vec<String>)> {
    let mut gold = Vec::with_capacity(pairs.len());
    let mut pred = Vec::with_capacity(pairs.len());
    for (g, p) in pairs {
        let gl = g.label.clone().ok_or_else(|| {
            Error::InvalidConfig(format!("gold comment {:?} has no label", g.id))
        })?;
        let pl = p.label.clone().ok_or_else(|| {
            Error::InvalidConfig(format!("prediction {:?} has no label", p.id))
        })?;
        gold.push(gl);
        pred.push(pl);
    }
    Ok((gold, pred))
}

fn span_seqs(pairs: &[(&Comment, &Comment)]) -> Result<(Vec<SpanLabeledSeq>, Vec<SpanLabeledSeq>)> {
    let mut gold = Vec::with_capacity(pairs.len());
    let mut pred = Vec::with_capacity(pairs.len());
    for (g, p) in pairs {
        gold.push(SpanLabeledSeq::from_text_and_spans(
            &g.text,
            &g.spans.clone().unwrap_or_default(),
        )?);
        pred.push(SpanLabeledSeq::from_text_and_spans(
            &g.text,
            &p.spans.clone().unwrap_or_default(),
        )?);
    }
    Ok((gold, pred))
}

fn evaluate_task(task: &str, gold: &Corpus, pred: &Corpus) -> Result<EvalReport<f64>> {
    let pairs = paired_by_id(gold, pred)?;
    match task {
        "classification" => {
            let (g, p) = labels_of(&pairs)?;
            classification_report(&g, &p)
        }
        "spans" => {
            let (g, p) = span_seqs(&pairs)?;
            span_report(&g, &p)
        }
        other => Err(Error::InvalidConfig(format!("unknown task {other:?}"))),
    }
}

/// Per-example scores the paired t-test compares: label correctness for
/// classification, per-comment tag accuracy for spans.
fn per_example_scores(task: &str, gold: &Corpus, pred: &Corpus) -> Result<Vec<f64>> {
    let pairs = paired_by_id(gold, pred)?;
    match task {
        "classification" => {
            let (g, p) = labels_of(&pairs)?;
            Ok(g.iter()
                .zip(&p)
                .map(|(g, p)| if g == p { 1.0 } else { 0.0 })
                .collect())
        }
        "spans" => {
            let (g, p) = span_seqs(&pairs)?;
            Ok(g.iter()
                .zip(&p)
                .map(|(g, p)| {
                    if g.labels.is_empty() {
                        return 1.0;
                    }
                    let hits = g
                        .labels
                        .iter()
                        .zip(&p.labels)
                        .filter(|(a, b)| a == b)
                        .count();
                    hits as f64 / g.labels.len() as f64
                })
                .collect())
        }
        other => Err(Error::InvalidConfig(format!("unknown task {other:?}"))),
    }
}
