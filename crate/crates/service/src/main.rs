use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use claimgraph::dsl::parse_query;
use claimgraph::ids::canonicalize_id;
use claimgraph::inference::{detect_inconsistent_positions, propagate_challenges, ImpactWeights};
use claimgraph::ingest::IngestReport;
use claimgraph::query::{execute_with, export_map, extract_concept_map, MapFormat};
use claimgraph::store::{read_log, replay, StoreError};
use claimgraph_service::config::open_repository;
use claimgraph_service::http::{router, AppState};
use claimgraph_service::{RuleDefaults, ServerConfig};

#[derive(Debug, Parser)]
#[command(name = "cg", version, about = "Typed scholarly claims: ingest, query, map and serve")]
struct Cli {
    /// Data directory holding events.log and optional schema.scl/profiles.scl.
    #[arg(long, global = true, env = "CG_DATA", default_value = "cg-data")]
    data: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Rules {
    /// Longest propagation path for may-be-challenged facts.
    #[arg(long, default_value_t = RuleDefaults::default().max_depth)]
    max_depth: usize,
    #[arg(long, default_value_t = 1.0)]
    w_docs: f64,
    #[arg(long, default_value_t = 1.0)]
    w_domains: f64,
    #[arg(long, default_value_t = 1.0)]
    w_problems: f64,
    /// Jaccard threshold for perspective clustering.
    #[arg(long, default_value_t = RuleDefaults::default().perspective_threshold)]
    threshold: f64,
}

impl Rules {
    fn defaults(&self) -> RuleDefaults {
        RuleDefaults {
            max_depth: self.max_depth,
            impact_weights: ImpactWeights {
                docs: self.w_docs,
                domains: self.w_domains,
                problems: self.w_problems,
            },
            perspective_threshold: self.threshold,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate .scl submissions and append them to the log.
    Ingest {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Skip invalid elements and claims instead of rejecting the file.
        #[arg(long)]
        lax: bool,
        /// Schema to install into a fresh data directory.
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Print each report as json.
        #[arg(long)]
        json: bool,
    },
    /// Run a structural query.
    Query {
        query: String,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        rules: Rules,
    },
    /// Export the concept map around an element.
    Map {
        id: String,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value = "dot")]
        format: String,
        /// Add inferred may-be-challenged edges.
        #[arg(long)]
        inferred: bool,
    },
    /// Print inconsistent-position and may-be-challenged facts as json lines.
    Check {
        #[command(flatten)]
        rules: Rules,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Default submissions to lax validation.
        #[arg(long)]
        lax: bool,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[command(flatten)]
        rules: Rules,
    },
    /// Rebuild the knowledge base from a log and report its content hash.
    Replay { dir: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cg: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ingest {
            files,
            lax,
            schema,
            json,
        } => ingest(&cli.data, &files, lax, schema.as_deref(), json),
        Command::Query { query, json, rules } => {
            let q = parse_query(&query).map_err(|e| anyhow::anyhow!("query {e}"))?;
            let kb = load(&cli.data)?;
            let rs = execute_with(&kb, &q, &rules.defaults().query_options())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rs)?);
            } else {
                for row in &rs.rows {
                    println!("{}", row.ids.join("\t"));
                }
                if let Some(i) = &rs.impact {
                    println!(
                        "impact {}: {} documents, {} domains, {} problems, score {}",
                        i.target, i.docs.count, i.domains.count, i.problems.count, i.scalar
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Map {
            id,
            depth,
            format,
            inferred,
        } => {
            let format = MapFormat::parse(&format)?;
            let kb = load(&cli.data)?;
            let id = canonicalize_id(&id).map_err(|_| anyhow::anyhow!("empty id"))?;
            let map = extract_concept_map(&kb, &id, depth, inferred)?;
            print!("{}", export_map(&map, format));
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { rules } => {
            let kb = load(&cli.data)?;
            let mut facts = detect_inconsistent_positions(&kb);
            facts.extend(propagate_challenges(&kb, &rules.defaults().propagation())?);
            let mut out = std::io::stdout().lock();
            for f in &facts {
                writeln!(out, "{}", serde_json::to_string(f)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve {
            port,
            bind,
            lax,
            schema,
            rules,
        } => {
            let config = ServerConfig {
                bind,
                port,
                data_dir: cli.data,
                schema_file: schema,
                lax,
                rules: rules.defaults(),
            };
            serve(config)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { dir } => {
            let records = read_log(&dir)?;
            let kb = replay(&dir)?;
            println!(
                "replayed {} records: {} concepts, {} articles, {} claims",
                records.len(),
                kb.concepts().count(),
                kb.articles().count(),
                kb.claims().len()
            );
            println!("content-hash {}", kb.content_hash());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Read-only view of the data directory; a missing directory is empty.
fn load(dir: &Path) -> Result<claimgraph::kb::KnowledgeBase> {
    replay(dir).with_context(|| format!("loading {}", dir.display()))
}

fn summary(r: &IngestReport) -> String {
    let mut s = format!(
        "{} article(s), {} new concept(s), {} relation claim(s), {} describes claim(s), {} standalone claim(s), {} new",
        r.articles.len(),
        r.concepts.len(),
        r.relation_claims.len(),
        r.describes_claims.len(),
        r.standalone_claims.len(),
        r.new_claims
    );
    if let Some(seq) = r.seq {
        s.push_str(&format!(", logged as #{seq}"));
    }
    s
}

fn ingest(data: &Path, files: &[PathBuf], lax: bool, schema: Option<&Path>, json: bool) -> Result<ExitCode> {
    let mut repo = open_repository(data, schema)?;
    for file in files {
        let name = file.display().to_string();
        let text = std::fs::read_to_string(file).with_context(|| format!("reading {name}"))?;
        match repo.ingest(&text, &name, lax) {
            Ok(report) => {
                for v in &report.skipped {
                    eprintln!("{name}:{v} (skipped)");
                }
                if json {
                    println!("{}", serde_json::to_string(&report)?);
                } else {
                    println!("{name}: {}", summary(&report));
                }
            }
            Err(StoreError::Ingest(e)) => {
                for v in e.violations() {
                    eprintln!("{name}:{v}");
                }
                eprintln!("{name}: rejected, nothing from it was stored");
                return Ok(ExitCode::from(2));
            }
            Err(e) => bail!(e),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(config: ServerConfig) -> Result<()> {
    let repo = open_repository(&config.data_dir, config.schema_file.as_deref())?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let addr = SocketAddr::new(config.bind, config.port);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot listen on {addr}"))?;
        let local = listener.local_addr()?;
        log::info!(
            "serving {} ({} log records)",
            config.data_dir.display(),
            repo.log_len()
        );
        let app = router(AppState::new(repo, config));
        println!("listening on http://{local}");
        std::io::stdout().flush()?;
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
