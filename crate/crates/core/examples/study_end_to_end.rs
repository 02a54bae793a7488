//! A two-person study from template to analysis tables, with both
//! sessions submitted over the HTTP API.
//!
//! ```sh
//! cargo run --example study_end_to_end -- [data_dir]
//! ```
//!
//! Without an argument the study lives in a temporary directory.

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request};
use axum::Router;
use corae::admin::{cmd_analyze, cmd_create_project, cmd_mint_urls, cmd_publish, cmd_stage};
use corae::store::Store;
use corae::{encode_canonical, Direction, RatingEngine};
use http_body_util::BodyExt;
use tower::ServiceExt;

const PROJECT: &str = "ranking-pilot";

async fn call(app: &Router, req: Request<Body>) -> (u16, serde_json::Value) {
    let resp = app
        .clone()
        .oneshot(req)
        .await
        .expect("router is infallible");
    let status = resp.status().as_u16();
    let body = resp
        .into_body()
        .collect()
        .await
        .expect("in-memory body")
        .to_bytes();
    (
        status,
        serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null),
    )
}

/// Plays the whole clip, nudging the rating by `moves` at regular points.
fn annotate(
    template: &corae::ProjectTemplate,
    token: &str,
    who: &str,
    duration: f64,
    moves: &[Direction],
) -> Vec<u8> {
    let mut engine = RatingEngine::init(template, duration).expect("published template");
    engine.toggle_playback().expect("fresh engine");
    let gap = duration / (moves.len() + 1) as f64;
    for (i, &dir) in moves.iter().enumerate() {
        engine
            .advance_to_seconds(gap * (i + 1) as f64)
            .expect("forward");
        let _ = engine.adjust(dir);
    }
    engine.advance_to_seconds(duration).expect("forward");
    encode_canonical(&engine.into_log(token, Some(who.into()))).expect("finite values")
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let temp = tempfile::tempdir()?;
    let root = std::env::args()
        .nth(1)
        .map_or_else(|| temp.path().to_path_buf(), Into::into);
    let store = Store::new(&root);

    let template_file =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/templates/dyad_ranking_task.toml");
    cmd_create_project(&store, PROJECT, &template_file)?;
    let media = store.media_dir(PROJECT);
    std::fs::create_dir_all(&media)?;
    for name in ["dyad01_partner_a.mp4", "dyad01_partner_b.mp4"] {
        std::fs::write(media.join(name), b"placeholder video bytes")?;
    }
    cmd_stage(&store, PROJECT)?;
    let template = cmd_publish(&store, PROJECT)?;

    let urls = cmd_mint_urls(
        &store,
        PROJECT,
        &["A".into(), "B".into()],
        Some("http://localhost:8080"),
    )?;
    for url in &urls {
        println!("minted {url}");
    }

    let app = corae::server::router(Arc::new(store), None);
    use Direction::{Down, Up};
    let scripts: [(&str, &[Direction]); 2] = [
        ("P01", &[Up, Up, Up, Down, Up, Up]),
        ("P02", &[Down, Down, Up, Down]),
    ];
    for (url, (who, moves)) in urls.iter().zip(scripts) {
        let token = url.rsplit('/').next().expect("token segment");
        let (status, bundle) = call(
            &app,
            Request::get(format!("/api/v1/session/{token}")).body(Body::empty())?,
        )
        .await;
        println!(
            "GET bundle {status}: slot {} plays {}",
            bundle["participant_slot"], bundle["media_url"]
        );

        let body = annotate(&template, token, who, 95.0, moves);
        let req = Request::post(format!("/api/v1/session/{token}/log"))
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(body))?;
        let (status, reply) = call(&app, req).await;
        println!("POST log {status}: {}", reply["status"]);
    }

    let store = Store::new(&root);
    let report = cmd_analyze(&store, PROJECT)?;
    for row in &report.sessions {
        println!(
            "{} {:?}: IP {:.3}  range {}  click rate {:?}",
            row.token, row.participant_id, row.ip.slope, row.rating_range, row.click_rate
        );
    }
    for d in &report.dyads {
        println!("dyad {}/{}: MSE {:.3}", d.slot_a, d.slot_b, d.mse);
    }
    for f in &report.files {
        println!("wrote {}", root.join(f).display());
    }
    Ok(())
}
