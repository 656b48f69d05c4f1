//! Command-line front end for the corpus toolkit.
//!
//! Subcommands: `generate` builds a corpus from a preset or a TOML spec,
//! `tokenize` turns corpus text into token-id dumps, `prompts` renders
//! zero-shot or multi-shot prompt files, `validate` re-checks every stored
//! label against the oracle, `score` produces accuracy tables from model
//! predictions, and `inspect` pretty-prints one instance. Progress and
//! diagnostics go to stderr; requested output goes to stdout or `--out`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use causal_corpus::dataset::{build_corpus, AxiomInstance, CorpusSpec, InstanceRecord, Task};
use causal_corpus::output::{read_corpus_records, write_corpus};
use causal_corpus::presets::{corpus_spec, PRESET_NAMES};
use causal_corpus::prompt::{emit_prompt, PromptTemplate};
use causal_corpus::report::{parse_predictions, render_report, score, BucketScheme, ReportFormat};
use causal_corpus::tokenizer::build_vocabulary;

#[derive(Parser)]
#[command(
    name = "causal-corpus",
    version,
    about = "Deterministic causal-reasoning corpora: generation, tokenization, prompting, and scoring"
)]
struct Cli {
    /// Worker threads for generation; omit to use all cores. Output is
    /// identical regardless of this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a corpus from a named preset or a TOML spec file.
    Generate {
        /// Preset name; see --help for the list.
        #[arg(long, required_unless_present = "spec", conflicts_with = "spec",
              help = format!("Preset name; one of: {}", PRESET_NAMES.join(", ")))]
        preset: Option<String>,
        /// TOML spec file describing the corpus.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Master seed; overrides the spec file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for <name>.jsonl, <name>.txt, and manifest.json.
        #[arg(long, env = "CAUSAL_CORPUS_OUT", default_value = ".")]
        out: PathBuf,
        /// Instances per bucket for evaluation presets (default 500).
        #[arg(long)]
        per_bucket: Option<usize>,
    },
    /// Encode a corpus as token ids, one space-separated line per instance.
    Tokenize {
        /// Corpus file: .jsonl records or plain .txt lines.
        #[arg(long)]
        input: PathBuf,
        /// Vocabulary task; inferred from .jsonl input when omitted.
        #[arg(long)]
        task: Option<Task>,
        /// Token dump destination.
        #[arg(long)]
        out: PathBuf,
        /// Also write the vocabulary file (token per line, id = line - 1).
        #[arg(long)]
        vocab_out: Option<PathBuf>,
    },
    /// Render prompt files from a corpus.
    Prompts {
        /// Corpus to prompt on (.jsonl).
        #[arg(long)]
        corpus: PathBuf,
        /// Prompt style.
        #[arg(long, value_enum, default_value_t = PromptModeArg::ZeroShot)]
        mode: PromptModeArg,
        /// Corpus supplying in-context demonstrations (multi-shot only).
        #[arg(long)]
        shots_from: Option<PathBuf>,
        /// Number of demonstrations for multi-shot prompts.
        #[arg(long, default_value_t = 8)]
        num_shots: usize,
        /// Output directory (one .txt per instance), or a single file with --batch.
        #[arg(long)]
        out: PathBuf,
        /// Write one file with prompts separated by blank lines.
        #[arg(long)]
        batch: bool,
    },
    /// Re-run the oracle over every record and report label mismatches.
    Validate {
        /// Corpus to check (.jsonl).
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Score model predictions into per-bucket accuracy tables.
    Score {
        /// Corpus the predictions answer (.jsonl).
        #[arg(long)]
        corpus: PathBuf,
        /// Prediction files (.jsonl); repeat for several models.
        #[arg(long, required = true, num_args = 1..)]
        preds: Vec<PathBuf>,
        /// Table format.
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Bucketing scheme for table columns.
        #[arg(long, value_enum, default_value_t = BucketsArg::CountStructure)]
        buckets: BucketsArg,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pretty-print one instance, including its graph.
    Inspect {
        /// Corpus to read (.jsonl).
        #[arg(long)]
        corpus: PathBuf,
        /// Instance id to show.
        #[arg(long, required_unless_present = "index", conflicts_with = "index")]
        id: Option<String>,
        /// Zero-based position in the corpus to show.
        #[arg(long)]
        index: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PromptModeArg {
    ZeroShot,
    MultiShot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
    Markdown,
}

impl From<FormatArg> for ReportFormat {
    fn from(arg: FormatArg) -> ReportFormat {
        match arg {
            FormatArg::Text => ReportFormat::AlignedText,
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Markdown => ReportFormat::Markdown,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BucketsArg {
    CountStructure,
    BranchingCount,
}

impl From<BucketsArg> for BucketScheme {
    fn from(arg: BucketsArg) -> BucketScheme {
        match arg {
            BucketsArg::CountStructure => BucketScheme::CountStructure,
            BucketsArg::BranchingCount => BucketScheme::BranchingCount,
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Generate {
            preset,
            spec,
            seed,
            out,
            per_bucket,
        } => generate(preset, spec, seed, &out, per_bucket),
        Command::Tokenize {
            input,
            task,
            out,
            vocab_out,
        } => tokenize(&input, task, &out, vocab_out.as_deref()),
        Command::Prompts {
            corpus,
            mode,
            shots_from,
            num_shots,
            out,
            batch,
        } => prompts(&corpus, mode, shots_from.as_deref(), num_shots, &out, batch),
        Command::Validate { corpus } => validate(&corpus),
        Command::Score {
            corpus,
            preds,
            format,
            buckets,
            out,
        } => run_score(&corpus, &preds, format, buckets, out.as_deref()),
        Command::Inspect { corpus, id, index } => inspect(&corpus, id.as_deref(), index),
    }
}

fn load_spec(
    preset: Option<String>,
    spec_path: Option<PathBuf>,
    seed: Option<u64>,
    per_bucket: Option<usize>,
) -> Result<CorpusSpec> {
    match (preset, spec_path) {
        (Some(name), None) => Ok(corpus_spec(&name, seed.unwrap_or(0), per_bucket)?),
        (None, Some(path)) => {
            let raw = fs::read_to_string(&path)
                .with_context(|| format!("reading spec {}", path.display()))?;
            let mut spec = CorpusSpec::from_toml_str(&raw)?;
            if let Some(seed) = seed {
                spec.master_seed = seed;
            }
            Ok(spec)
        }
        _ => unreachable!("clap enforces exactly one of --preset/--spec"),
    }
}

fn generate(
    preset: Option<String>,
    spec_path: Option<PathBuf>,
    seed: Option<u64>,
    out: &Path,
    per_bucket: Option<usize>,
) -> Result<()> {
    let spec = load_spec(preset, spec_path, seed, per_bucket)?;
    spec.validate()?;
    eprintln!(
        "generating {} ({} instances, {} components, seed {})",
        spec.name,
        spec.total_instances(),
        spec.components.len(),
        spec.master_seed
    );
    let started = Instant::now();
    let corpus = build_corpus(&spec)?;
    eprintln!(
        "built {} instances in {:.1}s",
        corpus.len(),
        started.elapsed().as_secs_f64()
    );
    let manifest = write_corpus(out, &spec, &corpus)?;
    eprintln!(
        "wrote {} files to {} (digest {})",
        manifest.files.len() + 1,
        out.display(),
        manifest.digest
    );
    Ok(())
}

/// Reads the lines to tokenize plus the task inferred from record input.
fn tokenize_input(path: &Path) -> Result<(Vec<String>, Option<Task>)> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        let records = read_corpus_records(path)?;
        let task = records.first().map(|r| r.task);
        let lines = records
            .iter()
            .map(|r| format!("{} {} {}", r.premise, r.hypothesis, r.label))
            .collect();
        Ok((lines, task))
    } else {
        let content = fs::read_to_string(path)
            .with_context(|| format!("reading corpus text {}", path.display()))?;
        let lines = content
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::to_owned)
            .collect();
        Ok((lines, None))
    }
}

fn tokenize(input: &Path, task: Option<Task>, out: &Path, vocab_out: Option<&Path>) -> Result<()> {
    let (lines, inferred) = tokenize_input(input)?;
    let Some(task) = task.or(inferred) else {
        bail!("--task is required for plain-text input");
    };
    let vocab = build_vocabulary(task);
    let mut dump = String::new();
    for (idx, line) in lines.iter().enumerate() {
        let stream = vocab
            .encode(line)
            .with_context(|| format!("tokenizing instance {idx}"))?;
        dump.push_str(&stream.to_line());
        dump.push('\n');
    }
    fs::write(out, dump).with_context(|| format!("writing {}", out.display()))?;
    eprintln!(
        "tokenized {} instances with the {task} vocabulary ({} tokens)",
        lines.len(),
        vocab.len()
    );
    if let Some(path) = vocab_out {
        fs::write(path, vocab.to_file_string())
            .with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote vocabulary to {}", path.display());
    }
    Ok(())
}

fn to_instances(records: &[InstanceRecord]) -> Result<Vec<AxiomInstance>> {
    records
        .iter()
        .map(|r| r.to_instance().map_err(Into::into))
        .collect()
}

fn prompts(
    corpus_path: &Path,
    mode: PromptModeArg,
    shots_from: Option<&Path>,
    num_shots: usize,
    out: &Path,
    batch: bool,
) -> Result<()> {
    let records = read_corpus_records(corpus_path)?;
    let instances = to_instances(&records)?;
    let template = match mode {
        PromptModeArg::ZeroShot => PromptTemplate::zero_shot(),
        PromptModeArg::MultiShot => {
            let Some(path) = shots_from else {
                bail!("--shots-from is required for multi-shot prompts");
            };
            let shot_records = read_corpus_records(path)?;
            if shot_records.len() < num_shots {
                bail!(
                    "{} offers {} demonstrations but --num-shots is {num_shots}",
                    path.display(),
                    shot_records.len()
                );
            }
            PromptTemplate::multi_shot(to_instances(&shot_records[..num_shots])?)?
        }
    };
    if batch {
        let mut content = String::new();
        for (i, inst) in instances.iter().enumerate() {
            if i > 0 {
                content.push('\n');
            }
            content.push_str(&emit_prompt(inst, &template));
            content.push('\n');
        }
        fs::write(out, content).with_context(|| format!("writing {}", out.display()))?;
        eprintln!("wrote {} prompts to {}", instances.len(), out.display());
    } else {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        for inst in &instances {
            let path = out.join(format!("{}.txt", inst.id));
            let mut content = emit_prompt(inst, &template);
            content.push('\n');
            fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        }
        eprintln!(
            "wrote {} prompt files to {}",
            instances.len(),
            out.display()
        );
    }
    Ok(())
}

fn validate(corpus_path: &Path) -> Result<()> {
    let records = read_corpus_records(corpus_path)?;
    let mut failures = 0usize;
    for record in &records {
        if let Err(err) = record.verify() {
            failures += 1;
            if failures <= 20 {
                eprintln!("FAIL {err}");
            }
        }
    }
    if failures > 20 {
        eprintln!("... and {} more failures", failures - 20);
    }
    if failures > 0 {
        bail!("{failures} of {} records failed validation", records.len());
    }
    println!("{} records validated, all labels correct", records.len());
    Ok(())
}

fn run_score(
    corpus_path: &Path,
    pred_paths: &[PathBuf],
    format: FormatArg,
    buckets: BucketsArg,
    out: Option<&Path>,
) -> Result<()> {
    let records = read_corpus_records(corpus_path)?;
    let mut predictions = Vec::new();
    for path in pred_paths {
        let content = fs::read_to_string(path)
            .with_context(|| format!("reading predictions {}", path.display()))?;
        let mut parsed = parse_predictions(&content)
            .with_context(|| format!("parsing predictions {}", path.display()))?;
        eprintln!("{}: {} predictions", path.display(), parsed.len());
        predictions.append(&mut parsed);
    }
    let report = score(&predictions, &records, buckets.into())?;
    let rendered = render_report(&report, format.into());
    match out {
        Some(path) => {
            fs::write(path, rendered).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote report to {}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn inspect(corpus_path: &Path, id: Option<&str>, index: Option<usize>) -> Result<()> {
    let records = read_corpus_records(corpus_path)?;
    let record = match (id, index) {
        (Some(id), None) => records
            .iter()
            .find(|r| r.id == id)
            .with_context(|| format!("no instance with id {id:?}"))?,
        (None, Some(index)) => records
            .get(index)
            .with_context(|| format!("index {index} out of range (0..{})", records.len()))?,
        _ => unreachable!("clap enforces exactly one of --id/--index"),
    };
    let inst = record.to_instance()?;
    println!("id:          {}", record.id);
    println!("task:        {}", record.task);
    println!("structure:   {}", record.structure_tag.as_str());
    println!(
        "nodes:       {} (name length <= {})",
        record.node_count, record.name_length_max
    );
    println!("branching:   {:.3}", record.branching_factor);
    println!("seed:        {}", record.seed);
    println!("premise:     {}", record.premise);
    println!("hypothesis:  {}", record.hypothesis);
    println!("label:       {}", record.label);
    println!("graph:");
    for line in inst.graph.debug_dump().lines() {
        println!("  {line}");
    }
    Ok(())
}
