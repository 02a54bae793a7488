use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use corae::admin;
use corae::config::ServerConfig;

#[derive(Parser)]
#[command(
    name = "corae",
    version,
    about = "Continuous retrospective affect annotation: project management and server"
)]
struct Cli {
    /// Deployment config file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Data root; overrides the config file.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a Draft project from a template file.
    Create {
        #[arg(long)]
        project: String,
        #[arg(long)]
        template: PathBuf,
    },
    /// Replace the template of an unpublished project.
    Update {
        #[arg(long)]
        project: String,
        #[arg(long)]
        template: PathBuf,
    },
    /// Draft -> Staged.
    Stage {
        #[arg(long)]
        project: String,
    },
    /// Staged -> Published (requires all media files).
    Publish {
        #[arg(long)]
        project: String,
    },
    /// Print one participant URL per slot.
    MintUrls {
        #[arg(long)]
        project: String,
        #[arg(long, value_delimiter = ',', required = true)]
        slots: Vec<String>,
        /// Prefix for the printed URLs; defaults to public_base_url from the config.
        #[arg(long)]
        base_url: Option<String>,
    },
    /// Validate and store a downloaded log file for a session token.
    Ingest {
        #[arg(long)]
        token: String,
        #[arg(long)]
        file: PathBuf,
    },
    /// Print the manifest of stored logs as JSON.
    Aggregate {
        #[arg(long)]
        project: String,
    },
    /// Compute per-session metrics and dyad disagreement; write report files.
    Analyze {
        #[arg(long)]
        project: String,
    },
    /// Run the HTTP server.
    Serve {
        #[arg(long)]
        listen: Option<String>,
    },
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Box<dyn std::error::Error>> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    let mut config = match &cli.config {
        Some(path) => ServerConfig::load(path)?,
        None => ServerConfig::default(),
    };
    if let Some(dir) = cli.data_dir {
        config.data_dir = dir;
    }
    let store = config.store();
    match cli.command {
        Command::Create { project, template } => {
            let t = admin::cmd_create_project(&store, &project, &template)?;
            println!("created {} ({})", t.project_id, t.state);
        }
        Command::Update { project, template } => {
            let t = admin::cmd_update_template(&store, &project, &template)?;
            println!("updated {} ({})", t.project_id, t.state);
        }
        Command::Stage { project } => {
            let t = admin::cmd_stage(&store, &project)?;
            println!("{} is {}", t.project_id, t.state);
        }
        Command::Publish { project } => {
            let t = admin::cmd_publish(&store, &project)?;
            println!("{} is {}", t.project_id, t.state);
        }
        Command::MintUrls {
            project,
            slots,
            base_url,
        } => {
            let base = base_url.or(config.public_base_url.clone());
            for url in admin::cmd_mint_urls(&store, &project, &slots, base.as_deref())? {
                println!("{url}");
            }
        }
        Command::Ingest { token, file } => print_json(&admin::cmd_ingest(&store, &token, &file)?)?,
        Command::Aggregate { project } => print_json(&admin::cmd_aggregate(&store, &project)?)?,
        Command::Analyze { project } => {
            let report = admin::cmd_analyze(&store, &project)?;
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for e in &report.errors {
                eprintln!("skipped {}: {}", e.file_name, e.error);
            }
        }
        Command::Serve { listen } => {
            if let Some(listen) = listen {
                config.listen = listen;
            }
            tracing_subscriber::fmt::init();
            tokio::runtime::Runtime::new()?.block_on(corae::server::serve(config))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
