//! The `kgqa` command line: ask questions over a graph registry, validate
//! queries, manage the registry manifest, run benchmarks and generate the
//! synthetic fixtures.
//!
//! Exit codes: 0 success, 1 usage, 2 pipeline failure, 3 clarification
//! needed in fail-fast mode, 4 registry/configuration error.

use clap::{Args, Parser, Subcommand};
use kgqa_allocator::{load_manifest, registry_from_manifest, save_manifest, ManifestEntry, ManifestKind};
use kgqa_orchestrator::{
    AblationFlags, Clarifier, ClarificationMode, Pipeline, PipelineConfig, PipelineError,
};
use std::io::{BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kgqa",
    version,
    about = "Question answering over federated RDF knowledge graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PipelineArgs {
    /// Registry manifest path.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Flat key=value configuration file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Disable one stage (repeatable): decomposer, allocator, verifier,
    /// alignment.
    #[arg(long = "ablate", value_name = "STAGE")]
    ablate: Vec<String>,
    /// Worker width for independent subgoals.
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Answer a natural-language question.
    Ask {
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, short)]
        question: String,
        /// Machine-readable output on stdout.
        #[arg(long)]
        json: bool,
        /// Trace output path (always written).
        #[arg(long, default_value = "kgqa-trace.json")]
        trace: PathBuf,
        /// Answer clarification requests interactively on the terminal.
        #[arg(long)]
        interactive: bool,
        /// Fail with exit code 3 on clarification requests (default off a
        /// terminal).
        #[arg(long)]
        fail_fast: bool,
        /// Scripted clarification answer (repeatable).
        #[arg(long = "clarify", value_name = "ANSWER")]
        clarify: Vec<String>,
    },
    /// Verify a query file against one graph and print the report.
    Validate {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// File containing the SPARQL text.
        #[arg(long)]
        query: PathBuf,
        /// Target graph id.
        #[arg(long)]
        graph: String,
        #[arg(long)]
        json: bool,
    },
    /// Manage the registry manifest.
    Registry {
        #[command(subcommand)]
        action: RegistryAction,
    },
    /// Inspect a graph's schema.
    Schema {
        #[command(subcommand)]
        action: SchemaAction,
    },
    /// Run the benchmark harness.
    Bench {
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated seed list.
        #[arg(long, default_value = "1,2,3")]
        seeds: String,
        /// Report JSON output path.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Generate the synthetic fixture set.
    Fixtures {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum RegistryAction {
    /// Add a graph to the manifest.
    Add {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        graph_id: String,
        /// file | endpoint
        #[arg(long, default_value = "file")]
        kind: String,
        /// Graph file path or endpoint URL.
        #[arg(long)]
        path: String,
        #[arg(long, default_value = "")]
        metadata: String,
        /// Source document path (repeatable).
        #[arg(long = "source")]
        sources: Vec<String>,
        /// Local schema snapshot (required for endpoints).
        #[arg(long)]
        schema: Option<String>,
    },
    /// Remove a graph from the manifest.
    Remove {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        graph_id: String,
    },
    /// List manifest entries.
    List {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Show one manifest entry.
    Show {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        graph_id: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum SchemaAction {
    /// Print a graph's schema summary (or full slice with --json).
    Show {
        #[command(flatten)]
        pipeline: PipelineArgs,
        graph: String,
        #[arg(long)]
        json: bool,
    },
}

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_PIPELINE: u8 = 2;
const EXIT_CLARIFICATION: u8 = 3;
const EXIT_REGISTRY: u8 = 4;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems exit 1; --help/--version print and exit 0.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    };
    ExitCode::from(code)
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

fn pipeline_error(e: PipelineError) -> CliError {
    match e {
        PipelineError::ClarificationNeeded(request) => CliError::new(
            EXIT_CLARIFICATION,
            format!(
                "clarification needed: {} (candidates: {})",
                request.question,
                request.candidates.join(" | ")
            ),
        ),
        PipelineError::Registry(e) => CliError::new(EXIT_REGISTRY, e.to_string()),
        PipelineError::Config(e) => CliError::new(EXIT_REGISTRY, e.to_string()),
        other => CliError::new(EXIT_PIPELINE, other.to_string()),
    }
}

fn build_config(args: &PipelineArgs) -> Result<PipelineConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::from_file(path)
            .map_err(|e| CliError::new(EXIT_REGISTRY, e.to_string()))?,
        None => PipelineConfig::default(),
    };
    if let Some(registry) = &args.registry {
        config.registry_path = registry.clone();
    }
    if let Some(width) = args.parallelism {
        config.parallelism = width;
    }
    for stage in &args.ablate {
        match stage.as_str() {
            "decomposer" => config.ablation.decomposer = true,
            "allocator" => config.ablation.allocator = true,
            "verifier" => config.ablation.verifier = true,
            "alignment" => config.ablation.alignment = true,
            other => {
                return Err(CliError::new(
                    EXIT_USAGE,
                    format!("unknown ablation stage `{other}`"),
                ))
            }
        }
    }
    config
        .validate()
        .map_err(|e| CliError::new(EXIT_REGISTRY, e.to_string()))?;
    Ok(config)
}

fn build_pipeline(args: &PipelineArgs) -> Result<Pipeline, CliError> {
    Pipeline::from_config(build_config(args)?).map_err(pipeline_error)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ask {
            pipeline,
            question,
            json,
            trace,
            interactive,
            fail_fast,
            clarify,
        } => {
            let mut config = build_config(&pipeline)?;
            // Interactivity: explicit flags win; otherwise a terminal means
            // interactive and anything else fails fast.
            let stdin_tty = std::io::stdin().is_terminal();
            config.clarification = if fail_fast {
                ClarificationMode::FailFast
            } else if interactive || stdin_tty {
                ClarificationMode::Interactive
            } else {
                ClarificationMode::FailFast
            };
            let engine = Pipeline::from_config(config.clone()).map_err(pipeline_error)?;

            let mut prompt = |request: &kgqa_nlu::ClarificationRequest| -> Option<String> {
                eprintln!("clarification needed: {}", request.question);
                for (i, candidate) in request.candidates.iter().enumerate() {
                    eprintln!("  [{}] {candidate}", i + 1);
                }
                eprint!("answer (number or text): ");
                let _ = std::io::stderr().flush();
                let mut line = String::new();
                std::io::stdin().lock().read_line(&mut line).ok()?;
                let line = line.trim();
                if line.is_empty() {
                    return Some(String::new());
                }
                if let Ok(pick) = line.parse::<usize>() {
                    if pick >= 1 && pick <= request.candidates.len() {
                        return Some(request.candidates[pick - 1].clone());
                    }
                }
                Some(line.to_string())
            };
            let clarifier = if !clarify.is_empty() {
                Clarifier::Canned(&clarify)
            } else if config.clarification == ClarificationMode::Interactive {
                Clarifier::Interactive(&mut prompt)
            } else {
                Clarifier::FailFast
            };

            match engine.answer_question(&question, clarifier) {
                Ok((consensus, pipeline_trace)) => {
                    write_trace(&trace, &pipeline_trace.to_json())?;
                    if json {
                        println!("{}", consensus.to_json());
                    } else {
                        println!("{}", consensus.answer_text);
                        if !consensus.conflicts.is_empty() {
                            println!("conflicts: {}", serde_json::to_string(&consensus.conflicts).unwrap());
                        }
                    }
                    Ok(())
                }
                Err(PipelineError::ClarificationNeeded(request)) => {
                    // Machine-readable request on stdout, exit 3.
                    let payload = serde_json::json!({
                        "clarification": {
                            "question": request.question,
                            "kind": request.kind,
                            "candidates": request.candidates,
                            "mention": request.mention,
                        }
                    });
                    println!("{payload}");
                    Err(CliError::new(EXIT_CLARIFICATION, "clarification needed"))
                }
                Err(e) => {
                    if let PipelineError::AllSubgoalsFailed { trace: t } = &e {
                        write_trace(&trace, &t.to_json())?;
                    }
                    Err(pipeline_error(e))
                }
            }
        }
        Command::Validate {
            pipeline,
            query,
            graph,
            json,
        } => {
            let engine = build_pipeline(&pipeline)?;
            let text = std::fs::read_to_string(&query)
                .map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", query.display())))?;
            let parsed = kgqa_sparql::parse_sparql(&text)
                .map_err(|e| CliError::new(EXIT_PIPELINE, e.to_string()))?;
            let report = engine.with_registry(|registry| {
                let entry = registry
                    .entry(&graph)
                    .ok_or_else(|| CliError::new(EXIT_REGISTRY, format!("unknown graph `{graph}`")))?;
                let store = match &entry.access {
                    kgqa_allocator::GraphAccess::Local(store) => store.clone(),
                    kgqa_allocator::GraphAccess::Remote { url } => {
                        return Err(CliError::new(
                            EXIT_REGISTRY,
                            format!("graph `{graph}` is remote ({url}); validate runs locally"),
                        ))
                    }
                };
                let executor = kgqa_exec::LocalExecutor::new(store);
                Ok(kgqa_verifier::verify(&parsed, &entry.slice, &executor, 3))
            })?;
            if json {
                println!("{}", report.to_json());
            } else {
                println!("verdict: {:?}", report.verdict);
                for check in &report.stage1 {
                    println!(
                        "  [{}] {:?}: {}",
                        if check.passed { "pass" } else { "fail" },
                        check.check,
                        check.detail
                    );
                }
                for result in &report.stage2 {
                    println!(
                        "  [{}] {}",
                        if result.changed { "changed" } else { "unchanged" },
                        result.descriptor
                    );
                }
                if let Some(revision) = &report.suggested_revision {
                    println!("suggested revision:\n{}", kgqa_sparql::serialize_sparql(revision));
                }
            }
            Ok(())
        }
        Command::Registry { action } => registry_command(action),
        Command::Schema { action } => match action {
            SchemaAction::Show {
                pipeline,
                graph,
                json,
            } => {
                let engine = build_pipeline(&pipeline)?;
                engine.with_registry(|registry| {
                    let entry = registry.entry(&graph).ok_or_else(|| {
                        CliError::new(EXIT_REGISTRY, format!("unknown graph `{graph}`"))
                    })?;
                    if json {
                        println!("{}", entry.slice.to_json());
                    } else {
                        print!("{}", kgqa_rdf::schema_summary(&entry.slice));
                    }
                    Ok(())
                })
            }
        },
        Command::Bench {
            pipeline,
            corpus,
            seeds,
            report,
            json,
        } => {
            let config = build_config(&pipeline)?;
            let seed_list: Vec<u64> = seeds
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u64>()
                        .map_err(|e| CliError::new(EXIT_USAGE, format!("bad seed `{s}`: {e}")))
                })
                .collect::<Result<_, _>>()?;
            // The CLI's --ablate flags select ablation columns next to the
            // always-present full pipeline.
            let mut base = config.clone();
            base.ablation = AblationFlags::default();
            let ablations: Vec<(String, AblationFlags)> = pipeline
                .ablate
                .iter()
                .map(|stage| {
                    let mut flags = AblationFlags::default();
                    match stage.as_str() {
                        "decomposer" => flags.decomposer = true,
                        "allocator" => flags.allocator = true,
                        "verifier" => flags.verifier = true,
                        "alignment" => flags.alignment = true,
                        _ => {}
                    }
                    (format!("no-{stage}"), flags)
                })
                .collect();
            let metrics = kgqa_benchmark::run_bench(&corpus, &base, &seed_list, &ablations)
                .map_err(|e| CliError::new(EXIT_PIPELINE, e.to_string()))?;
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&metrics.to_json()).unwrap())
                    .map_err(|e| CliError::new(EXIT_PIPELINE, format!("{}: {e}", path.display())))?;
            }
            if json {
                println!("{}", metrics.to_json());
            } else {
                print!("{}", render_bench_table(&metrics));
            }
            Ok(())
        }
        Command::Fixtures { out, seed } => {
            let summary =
                kgqa_benchmark::make_fixtures(&out, seed.unwrap_or(kgqa_benchmark::DEFAULT_SEED))
                    .map_err(|e| CliError::new(EXIT_PIPELINE, e.to_string()))?;
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
            Ok(())
        }
    }
}

fn write_trace(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    std::fs::write(path, serde_json::to_string_pretty(value).unwrap())
        .map_err(|e| CliError::new(EXIT_PIPELINE, format!("{}: {e}", path.display())))
}

fn registry_command(action: RegistryAction) -> Result<(), CliError> {
    let registry_err = |e: kgqa_allocator::RegistryError| CliError::new(EXIT_REGISTRY, e.to_string());
    match action {
        RegistryAction::Add {
            manifest,
            graph_id,
            kind,
            path,
            metadata,
            sources,
            schema,
        } => {
            let mut entries = if manifest.exists() {
                load_manifest(&manifest).map_err(registry_err)?
            } else {
                Vec::new()
            };
            if entries.iter().any(|e| e.graph_id == graph_id) {
                return Err(CliError::new(
                    EXIT_REGISTRY,
                    format!("graph id `{graph_id}` is already registered"),
                ));
            }
            let kind = match kind.as_str() {
                "file" => ManifestKind::File,
                "endpoint" => ManifestKind::Endpoint,
                other => {
                    return Err(CliError::new(
                        EXIT_USAGE,
                        format!("unknown kind `{other}` (expected file|endpoint)"),
                    ))
                }
            };
            entries.push(ManifestEntry {
                graph_id,
                kind,
                path,
                metadata,
                sources,
                schema,
            });
            // Loading validates graph files and slice extraction up front.
            let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
            registry_from_manifest(&entries, &base).map_err(registry_err)?;
            save_manifest(&manifest, &entries).map_err(registry_err)?;
            Ok(())
        }
        RegistryAction::Remove { manifest, graph_id } => {
            let mut entries = load_manifest(&manifest).map_err(registry_err)?;
            let before = entries.len();
            entries.retain(|e| e.graph_id != graph_id);
            if entries.len() == before {
                return Err(CliError::new(
                    EXIT_REGISTRY,
                    format!("unknown graph `{graph_id}`"),
                ));
            }
            save_manifest(&manifest, &entries).map_err(registry_err)?;
            Ok(())
        }
        RegistryAction::List { manifest, json } => {
            let entries = load_manifest(&manifest).map_err(registry_err)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&entries).unwrap());
            } else {
                for entry in &entries {
                    println!("{}\t{:?}\t{}", entry.graph_id, entry.kind, entry.path);
                }
            }
            Ok(())
        }
        RegistryAction::Show {
            manifest,
            graph_id,
            json,
        } => {
            let entries = load_manifest(&manifest).map_err(registry_err)?;
            let entry = entries
                .iter()
                .find(|e| e.graph_id == graph_id)
                .ok_or_else(|| CliError::new(EXIT_REGISTRY, format!("unknown graph `{graph_id}`")))?;
            if json {
                println!("{}", serde_json::to_string_pretty(entry).unwrap());
            } else {
                println!("graph: {}", entry.graph_id);
                println!("kind: {:?}", entry.kind);
                println!("path: {}", entry.path);
                println!("metadata: {}", entry.metadata);
                println!("sources: {}", entry.sources.join(", "));
            }
            Ok(())
        }
    }
}

/// Bench table with an optionally bold header; `NO_COLOR` and non-terminal
/// output disable styling.
fn render_bench_table(metrics: &kgqa_benchmark::MetricsReport) -> String {
    let table = metrics.render_table();
    let styled = std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal();
    if styled {
        let mut lines = table.lines();
        match lines.next() {
            Some(header) => {
                let rest: Vec<&str> = lines.collect();
                format!("\x1b[1m{header}\x1b[0m\n{}\n", rest.join("\n"))
            }
            None => table,
        }
    } else {
        table
    }
}
