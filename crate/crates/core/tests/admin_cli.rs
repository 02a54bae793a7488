mod common;

use std::collections::HashSet;
use std::path::Path;
use std::process::Command;

use common::{follow_target, install_media, published_study, token_of, write_study_inputs};
use corae::admin::{
    cmd_aggregate, cmd_analyze, cmd_create_project, cmd_ingest, cmd_mint_urls, cmd_publish,
    cmd_stage, cmd_update_template, AdminError,
};
use corae::model::ProjectState;
use corae::store::{generate_token, Store, StoreError};
use corae::{encode_canonical, Direction, RatingEngine};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn write_log(dir: &Path, name: &str, bytes: &[u8]) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, bytes).unwrap();
    path
}

/// Plays straight through after stepping up to `level` at 00:00:00:00.
fn held_at(template: &corae::ProjectTemplate, token: &str, level: i32, duration: f64) -> Vec<u8> {
    let mut engine = RatingEngine::init(template, duration).unwrap();
    engine.toggle_playback().unwrap();
    for _ in 0..level {
        engine.adjust(Direction::Up).unwrap();
    }
    engine.advance_to_seconds(duration).unwrap();
    encode_canonical(&engine.into_log(token, Some("P1".into()))).unwrap()
}

#[test]
fn create_rejects_duplicates_and_bad_templates() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::new(dir.path().join("data"));
    let template = write_study_inputs(dir.path());
    let t = cmd_create_project(&store, "s1", &template).unwrap();
    assert_eq!(t.state, ProjectState::Draft);
    assert_eq!(t.project_id, "s1");
    assert!(matches!(
        cmd_create_project(&store, "s1", &template),
        Err(AdminError::Store(StoreError::DuplicateProject(_)))
    ));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "logging_interval = 0\n[media]\nA = \"a.mp4\"\n").unwrap();
    assert!(matches!(
        cmd_create_project(&store, "s2", &bad),
        Err(AdminError::Template(_))
    ));
    assert!(!store.project_exists("s2"));
    assert!(cmd_create_project(&store, "../up", &template).is_err());
    assert!(cmd_create_project(&store, "s3", &dir.path().join("missing.toml")).is_err());
}

#[test]
fn lifecycle_is_draft_staged_published() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::new(dir.path().join("data"));
    let template = write_study_inputs(dir.path());
    cmd_create_project(&store, "s", &template).unwrap();
    assert!(
        cmd_publish(&store, "s").is_err(),
        "draft cannot skip staging"
    );

    let edited = dir.path().join("edited.toml");
    let text = std::fs::read_to_string(&template)
        .unwrap()
        .replace("logging_interval = 1.0", "logging_interval = 0.5");
    std::fs::write(&edited, text).unwrap();
    assert_eq!(
        cmd_update_template(&store, "s", &edited)
            .unwrap()
            .logging_interval,
        0.5
    );

    assert_eq!(cmd_stage(&store, "s").unwrap().state, ProjectState::Staged);
    assert!(matches!(
        cmd_publish(&store, "s"),
        Err(AdminError::Store(StoreError::MissingMedia { .. }))
    ));
    install_media(&store, "s");
    assert_eq!(
        cmd_publish(&store, "s").unwrap().state,
        ProjectState::Published
    );
    assert!(matches!(
        cmd_update_template(&store, "s", &template),
        Err(AdminError::Store(StoreError::Frozen(_)))
    ));
    assert!(cmd_stage(&store, "s").is_err());
    assert_eq!(store.load_template("s").unwrap().logging_interval, 0.5);
}

#[test]
fn mint_urls_are_distinct_and_need_publication() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::new(dir.path().join("data"));
    let template = write_study_inputs(dir.path());
    cmd_create_project(&store, "s", &template).unwrap();
    assert!(matches!(
        cmd_mint_urls(&store, "s", &["A".into()], None),
        Err(AdminError::Store(StoreError::NotPublished { .. }))
    ));
    install_media(&store, "s");
    cmd_stage(&store, "s").unwrap();
    cmd_publish(&store, "s").unwrap();

    let urls = cmd_mint_urls(
        &store,
        "s",
        &["A".into(), "B".into(), "A".into()],
        Some("https://h.test"),
    )
    .unwrap();
    assert_eq!(urls.len(), 3);
    assert_eq!(urls.iter().collect::<HashSet<_>>().len(), 3);
    for url in &urls {
        assert!(url.starts_with("https://h.test/annotate/"), "{url}");
        assert_eq!(token_of(url).len(), 22);
    }
    let slots: Vec<String> = store
        .sessions("s")
        .unwrap()
        .into_iter()
        .map(|s| s.participant_slot)
        .collect();
    assert_eq!(slots.iter().filter(|s| *s == "A").count(), 2);
    assert!(cmd_mint_urls(&store, "s", &["C".into()], None).is_err());
    assert!(matches!(
        cmd_mint_urls(&store, "s", &[], None),
        Err(AdminError::NoSlots)
    ));
    assert_eq!(store.sessions("s").unwrap().len(), 3);
}

#[test]
fn one_million_tokens_do_not_collide() {
    let mut seen = HashSet::with_capacity(1_000_000);
    for _ in 0..1_000_000 {
        let t = generate_token();
        assert_eq!(t.len(), 22);
        assert!(t
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_'));
        assert!(seen.insert(t));
    }
}

#[test]
fn analyze_reports_sessions_and_dyads() {
    let dir = tempfile::tempdir().unwrap();
    let (store, template) = published_study(dir.path(), "s");
    let urls = cmd_mint_urls(&store, "s", &["A".into(), "B".into()], None).unwrap();
    let (ta, tb) = (token_of(&urls[0]), token_of(&urls[1]));
    let fa = write_log(dir.path(), "a.json", &held_at(&template, &ta, 4, 20.0));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let fb = write_log(
        dir.path(),
        "b.json",
        &encode_canonical(&follow_target(&mut rng, &template, &tb, 20.0, 2.0, 0.5)).unwrap(),
    );
    assert!(!cmd_ingest(&store, &ta, &fa).unwrap().duplicate);
    assert!(!cmd_ingest(&store, &tb, &fb).unwrap().duplicate);
    assert!(cmd_ingest(&store, &ta, &fa).unwrap().duplicate);

    let manifest = cmd_aggregate(&store, "s").unwrap();
    assert_eq!(manifest.entries.len(), 2);
    assert!(manifest.errors.is_empty());

    let report = cmd_analyze(&store, "s").unwrap();
    assert_eq!(report.sessions.len(), 2);
    assert_eq!(report.dyads.len(), 1);
    let held = report.sessions.iter().find(|m| m.token == ta).unwrap();
    assert!((held.ip.slope - 4.0).abs() <= 1e-12, "{}", held.ip.slope);
    assert_eq!(held.rating_range, 4);
    let d = &report.dyads[0];
    assert_eq!((d.slot_a.as_str(), d.slot_b.as_str()), ("A", "B"));
    assert_eq!(
        (d.token_a.as_str(), d.token_b.as_str()),
        (ta.as_str(), tb.as_str())
    );
    assert!(d.mse > 0.0);

    let analysis = store.analysis_dir("s");
    let table = std::fs::read_to_string(analysis.join("sessions.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with(
        "token,participant_id,ip_slope,intercept,r_squared,click_rate,rating_range\n"
    ));
    assert_eq!(
        std::fs::read_to_string(analysis.join("dyads.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );
    assert_eq!(
        std::fs::read_dir(analysis.join("cumsum")).unwrap().count(),
        2
    );
    assert_eq!(report.files.len(), 4);
    assert!(report.files.iter().all(|f| f.is_relative()));
}

#[test]
fn analyze_needs_logs() {
    let dir = tempfile::tempdir().unwrap();
    let (store, _) = published_study(dir.path(), "s");
    assert!(matches!(
        cmd_analyze(&store, "s"),
        Err(AdminError::EmptyProject(_))
    ));
    assert!(cmd_analyze(&store, "nope").is_err());
}

#[test]
fn aggregate_isolates_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    let (store, template) = published_study(dir.path(), "s");
    assert!(cmd_aggregate(&store, "s").unwrap().entries.is_empty());

    let urls = cmd_mint_urls(&store, "s", &["A".into()], None).unwrap();
    let token = token_of(&urls[0]);
    let file = write_log(dir.path(), "a.json", &held_at(&template, &token, 2, 8.0));
    cmd_ingest(&store, &token, &file).unwrap();
    std::fs::write(
        store.logs_dir("s").join("s_broken.corae.json"),
        b"{\"format_version\":",
    )
    .unwrap();
    std::fs::write(store.logs_dir("s").join("notes.txt"), b"ignored").unwrap();

    let manifest = cmd_aggregate(&store, "s").unwrap();
    assert_eq!(manifest.entries.len(), 1);
    assert_eq!(manifest.entries[0].participant_slot.as_deref(), Some("A"));
    assert_eq!(manifest.errors.len(), 1);
    assert_eq!(manifest.errors[0].file_name, "s_broken.corae.json");
    let report = cmd_analyze(&store, "s").unwrap();
    assert_eq!(report.sessions.len(), 1);
    assert_eq!(report.errors.len(), 1);
}

#[test]
fn ingest_rejects_invalid_files() {
    let dir = tempfile::tempdir().unwrap();
    let (store, _) = published_study(dir.path(), "s");
    let urls = cmd_mint_urls(&store, "s", &["A".into()], None).unwrap();
    let token = token_of(&urls[0]);
    let garbage = write_log(dir.path(), "g.json", b"[]");
    assert!(matches!(
        cmd_ingest(&store, &token, &garbage),
        Err(AdminError::Store(StoreError::Decode(_)))
    ));
    assert!(matches!(
        cmd_ingest(&store, "AAAAAAAAAAAAAAAAAAAAAA", &garbage),
        Err(AdminError::Store(StoreError::UnknownToken))
    ));
    assert!(!store.find_session(&token).unwrap().consumed);
}

fn corae(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_corae"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn binary_runs_the_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let data = data.to_str().unwrap();
    let template = write_study_inputs(dir.path());
    let template = template.to_str().unwrap();

    let out = corae(&[
        "--data-dir",
        data,
        "create",
        "--project",
        "s",
        "--template",
        template,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "created s (draft)"
    );

    let out = corae(&[
        "--data-dir",
        data,
        "create",
        "--project",
        "s",
        "--template",
        template,
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    assert!(corae(&["--data-dir", data, "stage", "--project", "s"])
        .status
        .success());
    assert!(!corae(&["--data-dir", data, "publish", "--project", "s"])
        .status
        .success());
    install_media(&Store::new(data), "s");
    assert!(corae(&["--data-dir", data, "publish", "--project", "s"])
        .status
        .success());

    let out = corae(&[
        "--data-dir",
        data,
        "mint-urls",
        "--project",
        "s",
        "--slots",
        "A,B",
        "--base-url",
        "http://h",
    ]);
    assert!(out.status.success());
    let urls: Vec<String> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(str::to_string)
        .collect();
    assert_eq!(urls.len(), 2);

    let template = Store::new(data).load_template("s").unwrap();
    for (i, url) in urls.iter().enumerate() {
        let token = token_of(url);
        let file = write_log(
            dir.path(),
            &format!("{i}.json"),
            &held_at(&template, &token, i as i32 + 1, 6.0),
        );
        let out = corae(&[
            "--data-dir",
            data,
            "ingest",
            "--token",
            &token,
            "--file",
            file.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["duplicate"], false);
    }

    let out = corae(&["--data-dir", data, "aggregate", "--project", "s"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 2);

    let out = corae(&["--data-dir", data, "analyze", "--project", "s"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("wrote s/analysis/sessions.csv"));

    assert!(
        !corae(&["--data-dir", data, "analyze", "--project", "missing"])
            .status
            .success()
    );
    assert!(!corae(&["--data-dir", data, "mint-urls", "--project", "s"])
        .status
        .success());
}

#[test]
fn binary_reads_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("corae.toml"),
        "data_dir = \"store\"\npublic_base_url = \"https://cfg.test\"\n",
    )
    .unwrap();
    std::fs::create_dir_all(dir.path().join("unused")).unwrap();
    let (store, _) = published_study(&dir.path().join("unused"), "s");
    std::fs::rename(store.data_root(), dir.path().join("store")).unwrap();
    let config = dir.path().join("corae.toml");
    let out = corae(&[
        "--config",
        config.to_str().unwrap(),
        "mint-urls",
        "--project",
        "s",
        "--slots",
        "A",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("https://cfg.test/annotate/"));
}
