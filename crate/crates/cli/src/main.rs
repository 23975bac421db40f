//! planq: generate, verify, evaluate, and report on planning question sets.
//!
//! Exit codes are stable: 0 success, 1 verification found bad records,
//! 2 configuration or input problems, 3 endpoint unreachable, 4 malformed
//! transcript file.

use clap::{Args, Parser, Subcommand, ValueEnum};
use planq_core::dataset::{read_dataset, write_dataset, DatasetFile, DatasetHeader};
use planq_core::eval::{
    build_prompt, evaluate, read_transcripts, render_csv, render_text, score, write_transcripts,
    ClientError, CompletionClient, CompletionRequest, ExemplarStore, GoldMock, HttpEndpoint,
    PromptMode, PromptStyle, RandomMock, TranscriptError,
};
use planq_core::ground::{ground_task, GroundCfg};
use planq_core::pddl::{parse_domain, parse_problem};
use planq_core::render::load_templates;
use planq_core::taskgen::{assemble_batch, DomainSpec, GenConfig, QType, TaskKind};
use planq_core::verify::{render_verify, verify_records};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "planq", version, about = "Planning question generator and evaluation harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a question dataset from PDDL domains.
    Generate(GenerateArgs),
    /// Re-prove every record in a dataset against the brute-force oracle.
    Verify(VerifyArgs),
    /// Query a model on a dataset and score the answers.
    Evaluate(EvaluateArgs),
    /// Re-score a transcript file.
    Report(ReportArgs),
}

#[derive(Args)]
struct DomainArgs {
    /// Directory of domain subdirectories, each with domain.pddl and
    /// problem files.
    #[arg(long, default_value = "data/domains")]
    domains: PathBuf,
    /// Directory of <domain>.tpl template files. Defaults to the sibling
    /// `templates` directory of --domains.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Comma-separated problem file names to keep (default: all).
    #[arg(long)]
    problems: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    dirs: DomainArgs,
    /// Task families: comma-separated app,prog,reach,areach,val,just,land
    /// (long names accepted), or "all".
    #[arg(long, default_value = "all")]
    tasks: String,
    /// Records per (domain, task, question type) cell.
    #[arg(long, default_value_t = 10)]
    per_domain: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "dataset.jsonl")]
    out: PathBuf,
    /// Multiple-choice questions only.
    #[arg(long, conflicts_with_all = ["bool_only", "both"])]
    mcq: bool,
    /// Boolean questions only.
    #[arg(long = "bool", conflicts_with_all = ["mcq", "both"])]
    bool_only: bool,
    /// Both question types (the default).
    #[arg(long)]
    both: bool,
    /// State cap for plan searches during generation.
    #[arg(long, default_value_t = 200_000)]
    oracle_cap: usize,
    /// Sampled states examined per problem file.
    #[arg(long, default_value_t = 12)]
    max_states: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    dirs: DomainArgs,
    /// State cap for each oracle search.
    #[arg(long, default_value_t = 1_000_000)]
    cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Io,
    Cot,
}

#[derive(Clone, Copy, ValueEnum)]
enum MockArg {
    Gold,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Completion endpoint URL (omit when using --mock).
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the bearer token (default: none sent).
    #[arg(long)]
    token_env: Option<String>,
    /// Send a chat-style messages body instead of a prompt body.
    #[arg(long)]
    chat: bool,
    #[arg(long, value_enum, default_value_t = StyleArg::Io)]
    style: StyleArg,
    #[arg(long, default_value_t = 0)]
    shots: u8,
    /// Dataset file whose records serve as in-context exemplars.
    #[arg(long)]
    exemplars: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    /// Print prompts as JSONL instead of querying anything.
    #[arg(long)]
    dry_run: bool,
    /// Offline stand-in for the endpoint.
    #[arg(long, value_enum)]
    mock: Option<MockArg>,
    #[arg(long, default_value_t = 0)]
    mock_seed: u64,
    #[arg(long, default_value = "transcripts.jsonl")]
    transcripts_out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    #[arg(long, default_value_t = 1024)]
    max_new_tokens: u32,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    #[arg(long, default_value_t = 120)]
    timeout_secs: u64,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    transcripts: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

struct Fail {
    code: i32,
    msg: String,
}

fn fail(code: i32, msg: impl Into<String>) -> Fail {
    Fail {
        code,
        msg: msg.into(),
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Evaluate(a) => cmd_evaluate(a),
        Cmd::Report(a) => cmd_report(a),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            std::process::exit(f.code);
        }
    }
}

fn task_alias(t: &str) -> Option<TaskKind> {
    match t {
        "app" => Some(TaskKind::Applicability),
        "prog" => Some(TaskKind::Progression),
        "reach" => Some(TaskKind::Reachability),
        "areach" => Some(TaskKind::ActionReachability),
        "val" => Some(TaskKind::Validation),
        "just" => Some(TaskKind::Justification),
        "land" => Some(TaskKind::Landmarks),
        other => TaskKind::from_key(other),
    }
}

fn parse_tasks(s: &str) -> Result<Vec<TaskKind>, Fail> {
    if s.trim() == "all" {
        return Ok(TaskKind::ALL.to_vec());
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            task_alias(t).ok_or_else(|| fail(2, format!("unknown task {t}")))
        })
        .collect()
}

fn templates_dir(dirs: &DomainArgs) -> PathBuf {
    dirs.templates.clone().unwrap_or_else(|| {
        dirs.domains
            .parent()
            .unwrap_or(Path::new("."))
            .join("templates")
    })
}

/// Loads every domain subdirectory: parses domain.pddl, grounds each kept
/// problem file, and validates the domain's template file.
fn load_domains(dirs: &DomainArgs) -> Result<Vec<DomainSpec>, Fail> {
    let tpl_dir = templates_dir(dirs);
    let keep: Option<Vec<&str>> = dirs
        .problems
        .as_deref()
        .map(|s| s.split(',').map(str::trim).collect());
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(&dirs.domains)
        .map_err(|e| fail(2, format!("{}: {e}", dirs.domains.display())))?
        .filter_map(|entry| entry.ok().map(|d| d.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();

    let mut specs = Vec::new();
    for dir in subdirs {
        let dom_path = dir.join("domain.pddl");
        if !dom_path.exists() {
            continue;
        }
        let dom_text = std::fs::read_to_string(&dom_path)
            .map_err(|e| fail(2, format!("{}: {e}", dom_path.display())))?;
        let domain = parse_domain(&dom_text)
            .map_err(|e| fail(2, format!("{}: {e}", dom_path.display())))?;

        let mut files: Vec<String> = std::fs::read_dir(&dir)
            .map_err(|e| fail(2, format!("{}: {e}", dir.display())))?
            .filter_map(|entry| entry.ok())
            .filter_map(|entry| entry.file_name().into_string().ok())
            .filter(|name| name.ends_with(".pddl") && name != "domain.pddl")
            .collect();
        files.sort();
        if let Some(keep) = &keep {
            files.retain(|f| keep.contains(&f.as_str()));
        }

        let mut problems = Vec::new();
        for file in files {
            let path = dir.join(&file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
            let problem = parse_problem(&text, &domain)
                .map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
            let task = ground_task(&domain, &problem, &GroundCfg::default())
                .map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
            problems.push((file, task));
        }
        if problems.is_empty() {
            continue;
        }
        let tpl = load_templates(&tpl_dir, &problems[0].1)
            .map_err(|e| fail(2, format!("templates for {}: {e}", dir.display())))?;
        specs.push(DomainSpec {
            domain: problems[0].1.domain_name.clone(),
            tpl,
            problems,
        });
    }
    if specs.is_empty() {
        return Err(fail(
            2,
            format!("no domains under {}", dirs.domains.display()),
        ));
    }
    Ok(specs)
}

fn cmd_generate(a: GenerateArgs) -> Result<i32, Fail> {
    let qtypes = if a.mcq {
        vec![QType::Mcq]
    } else if a.bool_only {
        vec![QType::Bool]
    } else {
        QType::ALL.to_vec()
    };
    let cfg = GenConfig {
        per_domain: a.per_domain,
        seed: a.seed,
        tasks: parse_tasks(&a.tasks)?,
        qtypes,
        oracle_cap: a.oracle_cap,
        max_states_per_problem: a.max_states,
        ..GenConfig::default()
    };
    let specs = load_domains(&a.dirs)?;
    let batch = assemble_batch(&specs, &cfg).map_err(|e| fail(2, e.to_string()))?;

    let mut per_cell: BTreeMap<(&str, TaskKind, QType), usize> = BTreeMap::new();
    for rec in &batch.records {
        *per_cell
            .entry((rec.domain.as_str(), rec.task, rec.qtype))
            .or_default() += 1;
    }
    for ((domain, task, qtype), n) in &per_cell {
        println!("{domain} {} {}: {n}", task.key(), qtype.key());
    }
    for s in &batch.shortfalls {
        eprintln!(
            "warning: {} {} {}: wanted {}, got {}",
            s.domain,
            s.task.key(),
            s.qtype.key(),
            s.want,
            s.got
        );
    }

    let file = DatasetFile {
        header: DatasetHeader::new(&cfg),
        records: batch.records,
    };
    write_dataset(&file, &a.out).map_err(|e| fail(2, e.to_string()))?;
    println!("wrote {} records to {}", file.records.len(), a.out.display());
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32, Fail> {
    let ds = read_dataset(&a.dataset).map_err(|e| fail(2, e.to_string()))?;
    let specs = load_domains(&a.dirs)?;
    let report = verify_records(&specs, &ds.records, a.cap);
    print!("{}", render_verify(&report));
    Ok(if report.failures.is_empty() { 0 } else { 1 })
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<i32, Fail> {
    let ds = read_dataset(&a.dataset).map_err(|e| fail(2, e.to_string()))?;
    let mode = match a.style {
        StyleArg::Io => PromptMode::Io,
        StyleArg::Cot => PromptMode::Cot,
    };
    let style = PromptStyle::new(mode, a.shots).map_err(|e| fail(2, e.to_string()))?;
    let exemplars = match &a.exemplars {
        Some(path) => {
            let shots_ds = read_dataset(path).map_err(|e| fail(2, e.to_string()))?;
            Some(ExemplarStore::from_records(&shots_ds.records))
        }
        None => None,
    };
    if style.shots > 0 && exemplars.is_none() {
        return Err(fail(2, "--shots 2 needs --exemplars"));
    }

    if a.dry_run {
        for rec in &ds.records {
            let prompt =
                build_prompt(rec, style, exemplars.as_ref()).map_err(|e| fail(2, e.to_string()))?;
            let line = serde_json::json!({ "record_id": rec.id, "prompt": prompt });
            println!("{line}");
        }
        return Ok(0);
    }

    let client: Box<dyn CompletionClient> = match a.mock {
        Some(MockArg::Gold) => Box::new(GoldMock),
        Some(MockArg::Random) => Box::new(RandomMock { seed: a.mock_seed }),
        None => {
            let url = a.endpoint.clone().ok_or_else(|| {
                fail(2, "--endpoint is required unless --mock or --dry-run is used")
            })?;
            let model = a
                .model
                .clone()
                .ok_or_else(|| fail(2, "--model is required with --endpoint"))?;
            let mut ep = HttpEndpoint::new(url, model);
            ep.token_env = a.token_env.clone();
            ep.chat = a.chat;
            ep.max_new_tokens = a.max_new_tokens;
            ep.temperature = a.temperature;
            ep.timeout_secs = a.timeout_secs;
            Box::new(ep)
        }
    };

    // Probe a real endpoint once before fanning out, so a dead endpoint is
    // a crisp diagnostic instead of a transcript full of errors.
    if a.mock.is_none() {
        if let Some(rec) = ds.records.first() {
            let prompt =
                build_prompt(rec, style, exemplars.as_ref()).map_err(|e| fail(2, e.to_string()))?;
            let req = CompletionRequest {
                record: rec,
                prompt: &prompt,
            };
            match client.complete(&req) {
                Err(ClientError::Unreachable(e)) => {
                    return Err(fail(3, format!("endpoint unreachable: {e}")));
                }
                Err(ClientError::Auth(var)) => {
                    return Err(fail(2, format!("auth token env var {var} is not set")));
                }
                _ => {}
            }
        }
    }

    let outcome = evaluate(
        &ds.records,
        exemplars.as_ref(),
        client.as_ref(),
        style,
        a.concurrency,
    )
    .map_err(|e| fail(2, e.to_string()))?;
    write_transcripts(&outcome.transcripts, &a.transcripts_out)
        .map_err(|e| fail(2, e.to_string()))?;
    eprintln!(
        "wrote {} transcripts to {}",
        outcome.transcripts.len(),
        a.transcripts_out.display()
    );
    match a.format {
        FormatArg::Text => print!("{}", render_text(&outcome.report)),
        FormatArg::Csv => print!("{}", render_csv(&outcome.report)),
    }
    Ok(0)
}

fn cmd_report(a: ReportArgs) -> Result<i32, Fail> {
    let transcripts = read_transcripts(&a.transcripts).map_err(|e| match e {
        TranscriptError::Malformed { .. } => fail(4, e.to_string()),
        TranscriptError::Io { .. } => fail(2, e.to_string()),
    })?;
    if transcripts.is_empty() {
        eprintln!("warning: no transcripts in {}", a.transcripts.display());
    }
    let report = score(&transcripts);
    match a.format {
        FormatArg::Text => print!("{}", render_text(&report)),
        FormatArg::Csv => print!("{}", render_csv(&report)),
    }
    Ok(0)
}
