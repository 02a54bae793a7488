//! Project management commands behind the `corae` binary.
//!
//! Each function takes the [`Store`] it operates on and returns structured
//! results; printing is left to the caller.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    dyad_disagreement, resample, write_cumulative_series, write_metrics_table, RatingSeries,
    SessionMetrics, DEFAULT_PERIOD,
};
use crate::model::{ProjectState, ProjectTemplate};
use crate::store::{
    is_plain_file_name, write_atomic, IngestOutcome, Manifest, ManifestError, Store, StoreError,
};
use crate::template::{parse_template, TemplateError};

#[derive(Debug, Error)]
pub enum AdminError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no slots given")]
    NoSlots,
    #[error("project {0:?} has no analyzable logs")]
    EmptyProject(String),
    #[error("writing report: {0}")]
    Write(std::io::Error),
}

fn read_file(path: &Path) -> Result<Vec<u8>, AdminError> {
    fs::read(path).map_err(|source| AdminError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn read_template(project_id: &str, path: &Path) -> Result<ProjectTemplate, AdminError> {
    let bytes = read_file(path)?;
    let text = String::from_utf8_lossy(&bytes);
    Ok(parse_template(&text, Some(project_id))?)
}

pub fn cmd_create_project(
    store: &Store,
    project_id: &str,
    template: &Path,
) -> Result<ProjectTemplate, AdminError> {
    let template = read_template(project_id, template)?;
    Ok(store.create_project(&template)?)
}

pub fn cmd_update_template(
    store: &Store,
    project_id: &str,
    template: &Path,
) -> Result<ProjectTemplate, AdminError> {
    let template = read_template(project_id, template)?;
    Ok(store.update_template(&template)?)
}

pub fn cmd_stage(store: &Store, project_id: &str) -> Result<ProjectTemplate, AdminError> {
    Ok(store.transition(project_id, ProjectState::Staged)?)
}

pub fn cmd_publish(store: &Store, project_id: &str) -> Result<ProjectTemplate, AdminError> {
    Ok(store.transition(project_id, ProjectState::Published)?)
}

/// One URL per slot; slots may repeat to issue several tokens for one slot.
pub fn cmd_mint_urls(
    store: &Store,
    project_id: &str,
    slots: &[String],
    base_url: Option<&str>,
) -> Result<Vec<String>, AdminError> {
    if slots.is_empty() {
        return Err(AdminError::NoSlots);
    }
    let template = store.load_template(project_id)?;
    if template.state != ProjectState::Published {
        return Err(StoreError::NotPublished {
            project: project_id.into(),
            state: template.state,
        }
        .into());
    }
    if let Some(slot) = slots
        .iter()
        .find(|s| !template.media_entries.contains_key(*s))
    {
        return Err(StoreError::UnknownSlot {
            project: project_id.into(),
            slot: slot.clone(),
        }
        .into());
    }
    let base = base_url.unwrap_or("").trim_end_matches('/');
    slots
        .iter()
        .map(|slot| {
            let session = store.create_session(project_id, slot)?;
            Ok(format!("{base}{}", session.url_path()))
        })
        .collect()
}

pub fn cmd_ingest(store: &Store, token: &str, file: &Path) -> Result<IngestOutcome, AdminError> {
    let bytes = read_file(file)?;
    Ok(store.ingest_log(token, &bytes)?)
}

pub fn cmd_aggregate(store: &Store, project_id: &str) -> Result<Manifest, AdminError> {
    Ok(store.aggregate(project_id)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadRow {
    pub slot_a: String,
    pub slot_b: String,
    pub token_a: String,
    pub token_b: String,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub project_id: String,
    pub sessions: Vec<SessionMetrics>,
    pub dyads: Vec<DyadRow>,
    /// Files written, relative to the data root.
    pub files: Vec<PathBuf>,
    pub errors: Vec<ManifestError>,
}

/// Aggregates, resamples at 10 Hz and writes the session table, the dyad
/// table and one cumulative-sum series per session under
/// `{project}/analysis/`. Output is a pure function of the stored logs.
pub fn cmd_analyze(store: &Store, project_id: &str) -> Result<AnalysisReport, AdminError> {
    let template = store.load_template(project_id)?;
    let _lock = store.lock_project(project_id)?;
    let (manifest, logs) = store.load_logs(project_id)?;
    let mut errors = manifest.errors.clone();

    let mut analyzed: Vec<(Option<String>, SessionMetrics, RatingSeries)> = Vec::new();
    for (entry, log) in manifest.entries.iter().zip(&logs) {
        if !is_plain_file_name(&log.session_token) {
            errors.push(ManifestError {
                file_name: entry.file_name.clone(),
                error: format!(
                    "session token {:?} is not usable as a file name",
                    log.session_token
                ),
            });
            continue;
        }
        let computed = resample(log, DEFAULT_PERIOD)
            .and_then(|series| SessionMetrics::compute(log, &series).map(|m| (m, series)));
        match computed {
            Ok((metrics, series)) => {
                analyzed.push((entry.participant_slot.clone(), metrics, series))
            }
            Err(e) => errors.push(ManifestError {
                file_name: entry.file_name.clone(),
                error: e.to_string(),
            }),
        }
    }
    if analyzed.is_empty() {
        return Err(AdminError::EmptyProject(project_id.into()));
    }

    let mut dyads = Vec::new();
    for (slot_a, slot_b) in template.effective_dyads() {
        let in_slot = |slot: &str| {
            analyzed
                .iter()
                .filter(move |(s, _, _)| s.as_deref() == Some(slot))
                .collect::<Vec<_>>()
        };
        for (_, ma, sa) in in_slot(&slot_a) {
            for (_, mb, sb) in in_slot(&slot_b) {
                match dyad_disagreement(sa, sb) {
                    Ok(mse) => dyads.push(DyadRow {
                        slot_a: slot_a.clone(),
                        slot_b: slot_b.clone(),
                        token_a: ma.token.clone(),
                        token_b: mb.token.clone(),
                        mse,
                    }),
                    Err(e) => errors.push(ManifestError {
                        file_name: format!("dyad {}/{}", ma.token, mb.token),
                        error: e.to_string(),
                    }),
                }
            }
        }
    }

    let sessions: Vec<SessionMetrics> = analyzed.iter().map(|(_, m, _)| m.clone()).collect();
    let out_dir = store.analysis_dir(project_id);
    let rel = |p: &Path| p.strip_prefix(store.data_root()).unwrap_or(p).to_path_buf();
    let mut files = Vec::new();

    let mut table = Vec::new();
    write_metrics_table(&sessions, &mut table).map_err(AdminError::Write)?;
    let path = out_dir.join("sessions.csv");
    write_atomic(&path, &table)?;
    files.push(rel(&path));

    let mut dyad_table = csv::Writer::from_writer(Vec::new());
    dyad_table
        .write_record(["slot_a", "slot_b", "token_a", "token_b", "mse"])
        .map_err(|e| AdminError::Write(e.into()))?;
    for d in &dyads {
        dyad_table
            .write_record([
                &d.slot_a,
                &d.slot_b,
                &d.token_a,
                &d.token_b,
                &d.mse.to_string(),
            ])
            .map_err(|e| AdminError::Write(e.into()))?;
    }
    let bytes = dyad_table
        .into_inner()
        .map_err(|e| AdminError::Write(e.into_error()))?;
    let path = out_dir.join("dyads.csv");
    write_atomic(&path, &bytes)?;
    files.push(rel(&path));

    let cumsum_dir = out_dir.join("cumsum");
    if cumsum_dir.exists() {
        fs::remove_dir_all(&cumsum_dir).map_err(AdminError::Write)?;
    }
    for (_, metrics, series) in &analyzed {
        let mut buf = Vec::new();
        write_cumulative_series(series, &mut buf).map_err(AdminError::Write)?;
        let path = cumsum_dir.join(format!("{}.csv", metrics.token));
        write_atomic(&path, &buf)?;
        files.push(rel(&path));
    }

    Ok(AnalysisReport {
        project_id: project_id.into(),
        sessions,
        dyads,
        files,
        errors,
    })
}
