//! Sets up a published demo project and serves it.
//!
//! ```sh
//! cargo run --example serve -- [data_dir] [listen_addr]
//! ```
//!
//! Prints one participant URL per slot. The dashboard bundle is served from
//! `/assets` when `CORAE_ASSETS` points at a built copy of it.

use std::path::PathBuf;

use corae::admin::{cmd_create_project, cmd_mint_urls, cmd_publish, cmd_stage};
use corae::config::ServerConfig;
use corae::model::ProjectState;

const PROJECT: &str = "demo";

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt::init();
    let mut args = std::env::args().skip(1);
    let data_dir = args
        .next()
        .map_or_else(|| std::env::temp_dir().join("corae-demo"), PathBuf::from);
    let listen = args.next().unwrap_or_else(|| "127.0.0.1:8080".into());

    let config = ServerConfig {
        public_base_url: Some(format!("http://{listen}")),
        listen,
        data_dir,
        media_dir: None,
        assets_dir: std::env::var_os("CORAE_ASSETS").map(PathBuf::from),
    };
    let store = config.store();

    if !store.project_exists(PROJECT) {
        let template = config.data_dir.join("demo.toml");
        std::fs::create_dir_all(&config.data_dir)?;
        std::fs::write(
            &template,
            "instructions = \"Rate the speaker as the clip plays.\"\n\n[media]\nA = \"clip.mp4\"\n",
        )?;
        cmd_create_project(&store, PROJECT, &template)?;
        std::fs::create_dir_all(store.media_dir(PROJECT))?;
        std::fs::write(
            store.media_dir(PROJECT).join("clip.mp4"),
            b"replace me with a real video",
        )?;
    }
    let mut template = store.load_template(PROJECT)?;
    if template.state == ProjectState::Draft {
        cmd_stage(&store, PROJECT)?;
    }
    if template.state != ProjectState::Published {
        template = cmd_publish(&store, PROJECT)?;
    }

    let slots: Vec<String> = template.media_entries.keys().cloned().collect();
    for url in cmd_mint_urls(&store, PROJECT, &slots, config.public_base_url.as_deref())? {
        println!("{url}");
    }
    corae::server::serve(config).await?;
    Ok(())
}
