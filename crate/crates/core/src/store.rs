//! Filesystem-backed projects, participant sessions and log aggregation.
//!
//! ```text
//! {data}/{project}/templates/template.toml
//! {data}/{project}/sessions/{token}.json
//! {data}/{project}/logs/{project}_{token}.corae.json
//! {data}/{project}/media/...
//! {data}/{project}/analysis/...
//! ```
//!
//! Every file is written to a temporary sibling and renamed into place, so
//! readers never observe a partial write. Mutations on a project hold an
//! exclusive lock on `{data}/{project}/.lock`.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{
    self, decode_canonical, encode_canonical, log_file_name, CodecError, LOG_FILE_SUFFIX,
};
use crate::engine::{validate_log, ValidationReport};
use crate::model::{check_project_id, ProjectState, ProjectTemplate, RatingScale, SessionLog};
use crate::template::{parse_template, render_template, TemplateError};

const TEMPLATE_FILE: &str = "template.toml";
const TOKEN_BYTES: usize = 16;
const TOKEN_LEN: usize = 22;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown project {0:?}")]
    UnknownProject(String),
    #[error("project {0:?} already exists")]
    DuplicateProject(String),
    #[error("project {project:?} is {state}, expected published")]
    NotPublished {
        project: String,
        state: ProjectState,
    },
    #[error("project {0:?} is published; its template is frozen")]
    Frozen(String),
    #[error("cannot move project {project:?} from {from} to {to}")]
    IllegalTransition {
        project: String,
        from: ProjectState,
        to: ProjectState,
    },
    #[error("project {project:?} is missing media: {detail}")]
    MissingMedia { project: String, detail: String },
    #[error("project {project:?} has no slot {slot:?}")]
    UnknownSlot { project: String, slot: String },
    #[error("unknown session token")]
    UnknownToken,
    #[error("session token already used for a different log")]
    AlreadyConsumed,
    #[error("log does not belong to this session: {0}")]
    Mismatch(String),
    #[error("log could not be decoded: {0}")]
    Decode(#[from] CodecError),
    #[error("log rejected with {} violation(s)", .0.violations.len())]
    Rejected(ValidationReport),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Persisted record behind a participant URL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionToken {
    pub token: String,
    pub project_id: String,
    pub participant_slot: String,
    /// Unix seconds.
    pub created_at: u64,
    pub consumed: bool,
}

impl SessionToken {
    pub fn url_path(&self) -> String {
        format!("/annotate/{}", self.token)
    }
}

/// Scale as sent to the dashboard, with the admissible values spelled out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleDescriptor {
    pub min: i32,
    pub max: i32,
    pub step: i32,
    pub neutral: i32,
    pub negative_label: String,
    pub positive_label: String,
    pub values: Vec<i32>,
}

impl From<&RatingScale> for ScaleDescriptor {
    fn from(s: &RatingScale) -> Self {
        Self {
            min: s.min(),
            max: s.max(),
            step: s.step(),
            neutral: s.neutral(),
            negative_label: s.negative_label().into(),
            positive_label: s.positive_label().into(),
            values: s.values().collect(),
        }
    }
}

/// Everything the dashboard needs to run one session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionBundle {
    pub session_token: String,
    pub project_id: String,
    pub participant_slot: String,
    pub instructions: String,
    pub scale: ScaleDescriptor,
    pub logging_interval: f64,
    pub fps: u32,
    pub identifier_prompt_enabled: bool,
    pub media_url: String,
    pub consumed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestOutcome {
    pub report: ValidationReport,
    pub file_name: String,
    /// The same log had already been stored for this token.
    pub duplicate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub file_name: String,
    pub token: String,
    pub participant_id: Option<String>,
    pub participant_slot: Option<String>,
    pub event_count: usize,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestError {
    pub file_name: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Manifest {
    pub project_id: String,
    pub entries: Vec<ManifestEntry>,
    pub errors: Vec<ManifestError>,
}

/// Holds the project lock until dropped.
pub struct ProjectLock {
    file: File,
}

impl Drop for ProjectLock {
    fn drop(&mut self) {
        let _ = self.file.unlock();
    }
}

pub fn generate_token() -> String {
    let mut bytes = [0u8; TOKEN_BYTES];
    rand::rng().fill_bytes(&mut bytes);
    URL_SAFE_NO_PAD.encode(bytes)
}

fn is_token_shaped(token: &str) -> bool {
    token.len() == TOKEN_LEN
        && token
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

/// Media and other plain file names may not contain path separators.
pub fn is_plain_file_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && !name.starts_with('.')
        && !name.contains(['/', '\\', '\0'])
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::Builder::new()
        .prefix(".tmp-")
        .tempfile_in(dir)
        .map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| StoreError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct Store {
    data_root: PathBuf,
    media_root: PathBuf,
}

impl Store {
    pub fn new(data_root: impl Into<PathBuf>) -> Self {
        let data_root = data_root.into();
        Self {
            media_root: data_root.clone(),
            data_root,
        }
    }

    /// Looks up media under `{media_root}/{project}/media/` instead of the data root.
    pub fn with_media_root(mut self, media_root: impl Into<PathBuf>) -> Self {
        self.media_root = media_root.into();
        self
    }

    pub fn data_root(&self) -> &Path {
        &self.data_root
    }

    pub fn project_dir(&self, project_id: &str) -> PathBuf {
        self.data_root.join(project_id)
    }

    pub fn template_path(&self, project_id: &str) -> PathBuf {
        self.project_dir(project_id)
            .join("templates")
            .join(TEMPLATE_FILE)
    }

    pub fn logs_dir(&self, project_id: &str) -> PathBuf {
        self.project_dir(project_id).join("logs")
    }

    pub fn sessions_dir(&self, project_id: &str) -> PathBuf {
        self.project_dir(project_id).join("sessions")
    }

    pub fn analysis_dir(&self, project_id: &str) -> PathBuf {
        self.project_dir(project_id).join("analysis")
    }

    pub fn media_dir(&self, project_id: &str) -> PathBuf {
        self.media_root.join(project_id).join("media")
    }

    pub fn lock_project(&self, project_id: &str) -> Result<ProjectLock, StoreError> {
        let dir = self.project_dir(project_id);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = dir.join(".lock");
        let file = File::options()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(io_err(&path))?;
        file.lock().map_err(io_err(&path))?;
        Ok(ProjectLock { file })
    }

    pub fn project_exists(&self, project_id: &str) -> bool {
        check_project_id(project_id).is_ok() && self.template_path(project_id).is_file()
    }

    pub fn list_projects(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        let entries = match fs::read_dir(&self.data_root) {
            Ok(entries) => entries,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(ids),
            Err(e) => return Err(io_err(&self.data_root)(e)),
        };
        for entry in entries {
            let entry = entry.map_err(io_err(&self.data_root))?;
            if let Some(name) = entry.file_name().to_str() {
                if self.project_exists(name) {
                    ids.push(name.to_owned());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn load_template(&self, project_id: &str) -> Result<ProjectTemplate, StoreError> {
        if check_project_id(project_id).is_err() {
            return Err(StoreError::UnknownProject(project_id.into()));
        }
        let path = self.template_path(project_id);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::UnknownProject(project_id.into()))
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        Ok(parse_template(&text, Some(project_id))?)
    }

    fn save_template(&self, template: &ProjectTemplate) -> Result<(), StoreError> {
        let text = render_template(template)?;
        write_atomic(&self.template_path(&template.project_id), text.as_bytes())
    }

    /// Stores a new project in Draft state.
    pub fn create_project(
        &self,
        template: &ProjectTemplate,
    ) -> Result<ProjectTemplate, StoreError> {
        check_project_id(&template.project_id).map_err(TemplateError::from)?;
        let mut draft = template.clone();
        draft.state = ProjectState::Draft;
        draft.check().map_err(TemplateError::from)?;
        let _lock = self.lock_project(&draft.project_id)?;
        if self.template_path(&draft.project_id).exists() {
            return Err(StoreError::DuplicateProject(draft.project_id));
        }
        for dir in [
            self.logs_dir(&draft.project_id),
            self.sessions_dir(&draft.project_id),
        ] {
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        let media = self.media_dir(&draft.project_id);
        fs::create_dir_all(&media).map_err(io_err(&media))?;
        self.save_template(&draft)?;
        Ok(draft)
    }

    /// Replaces the template of a project that is not yet published.
    pub fn update_template(
        &self,
        template: &ProjectTemplate,
    ) -> Result<ProjectTemplate, StoreError> {
        let _lock = self.lock_project(&template.project_id)?;
        let current = self.load_template(&template.project_id)?;
        if current.state == ProjectState::Published {
            return Err(StoreError::Frozen(template.project_id.clone()));
        }
        let mut next = template.clone();
        next.state = current.state;
        next.check().map_err(TemplateError::from)?;
        self.save_template(&next)?;
        Ok(next)
    }

    /// Draft -> Staged -> Published. Publishing requires every media file.
    pub fn transition(
        &self,
        project_id: &str,
        to: ProjectState,
    ) -> Result<ProjectTemplate, StoreError> {
        if !self.project_exists(project_id) {
            return Err(StoreError::UnknownProject(project_id.into()));
        }
        let _lock = self.lock_project(project_id)?;
        let mut template = self.load_template(project_id)?;
        let from = template.state;
        let legal = matches!(
            (from, to),
            (ProjectState::Draft, ProjectState::Staged)
                | (ProjectState::Staged, ProjectState::Published)
        );
        if !legal {
            return Err(StoreError::IllegalTransition {
                project: project_id.into(),
                from,
                to,
            });
        }
        if to == ProjectState::Published {
            self.check_media(&template)?;
        }
        template.state = to;
        template.check().map_err(TemplateError::from)?;
        self.save_template(&template)?;
        Ok(template)
    }

    fn check_media(&self, template: &ProjectTemplate) -> Result<(), StoreError> {
        let missing = |detail: String| StoreError::MissingMedia {
            project: template.project_id.clone(),
            detail,
        };
        if template.media_entries.is_empty() {
            return Err(missing("no media entries".into()));
        }
        let dir = self.media_dir(&template.project_id);
        for (slot, file) in &template.media_entries {
            if !is_plain_file_name(file) {
                return Err(missing(format!(
                    "slot {slot:?}: {file:?} is not a plain file name"
                )));
            }
            if !dir.join(file).is_file() {
                return Err(missing(format!(
                    "slot {slot:?}: {} not found",
                    dir.join(file).display()
                )));
            }
        }
        Ok(())
    }

    /// Mints a fresh token for a slot of a published project.
    pub fn create_session(&self, project_id: &str, slot: &str) -> Result<SessionToken, StoreError> {
        if !self.project_exists(project_id) {
            return Err(StoreError::UnknownProject(project_id.into()));
        }
        let _lock = self.lock_project(project_id)?;
        let template = self.load_template(project_id)?;
        if template.state != ProjectState::Published {
            return Err(StoreError::NotPublished {
                project: project_id.into(),
                state: template.state,
            });
        }
        if !template.media_entries.contains_key(slot) {
            return Err(StoreError::UnknownSlot {
                project: project_id.into(),
                slot: slot.into(),
            });
        }
        let dir = self.sessions_dir(project_id);
        let session = loop {
            let token = generate_token();
            if !dir.join(format!("{token}.json")).exists() {
                break SessionToken {
                    token,
                    project_id: project_id.into(),
                    participant_slot: slot.into(),
                    created_at: unix_now(),
                    consumed: false,
                };
            }
        };
        self.save_session(&session)?;
        Ok(session)
    }

    fn session_path(&self, project_id: &str, token: &str) -> PathBuf {
        self.sessions_dir(project_id).join(format!("{token}.json"))
    }

    fn save_session(&self, session: &SessionToken) -> Result<(), StoreError> {
        let bytes = serde_json::to_vec_pretty(session).map_err(|e| StoreError::Io {
            path: self.session_path(&session.project_id, &session.token),
            source: e.into(),
        })?;
        write_atomic(
            &self.session_path(&session.project_id, &session.token),
            &bytes,
        )
    }

    fn read_session(&self, path: &Path) -> Result<SessionToken, StoreError> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Io {
            path: path.to_path_buf(),
            source: e.into(),
        })
    }

    pub fn find_session(&self, token: &str) -> Result<SessionToken, StoreError> {
        if !is_token_shaped(token) {
            return Err(StoreError::UnknownToken);
        }
        for project in self.list_projects()? {
            let path = self.session_path(&project, token);
            if path.is_file() {
                return self.read_session(&path);
            }
        }
        Err(StoreError::UnknownToken)
    }

    pub fn sessions(&self, project_id: &str) -> Result<Vec<SessionToken>, StoreError> {
        let dir = self.sessions_dir(project_id);
        let mut out = Vec::new();
        let entries = match fs::read_dir(&dir) {
            Ok(entries) => entries,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(io_err(&dir)(e)),
        };
        for entry in entries {
            let path = entry.map_err(io_err(&dir))?.path();
            let is_record = path
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".json") && !n.starts_with('.'));
            if is_record {
                out.push(self.read_session(&path)?);
            }
        }
        out.sort_by(|a, b| a.token.cmp(&b.token));
        Ok(out)
    }

    pub fn session_bundle(&self, token: &str) -> Result<SessionBundle, StoreError> {
        let session = self.find_session(token)?;
        let template = self.load_template(&session.project_id)?;
        let media = template
            .media_entries
            .get(&session.participant_slot)
            .ok_or_else(|| StoreError::UnknownSlot {
                project: session.project_id.clone(),
                slot: session.participant_slot.clone(),
            })?;
        Ok(SessionBundle {
            media_url: format!("/media/{}/{}", session.project_id, media),
            session_token: session.token,
            project_id: session.project_id,
            participant_slot: session.participant_slot,
            instructions: template.instructions,
            scale: ScaleDescriptor::from(&template.scale),
            logging_interval: template.logging_interval,
            fps: template.fps,
            identifier_prompt_enabled: template.identifier_prompt_enabled,
            consumed: session.consumed,
        })
    }

    /// Decodes, validates and stores a submitted log, consuming the token.
    pub fn ingest_log(&self, token: &str, bytes: &[u8]) -> Result<IngestOutcome, StoreError> {
        let found = self.find_session(token)?;
        let _lock = self.lock_project(&found.project_id)?;
        let session = self.read_session(&self.session_path(&found.project_id, token))?;
        let log = decode_canonical(bytes)?;
        let template = self.load_template(&session.project_id)?;
        check_log_matches(&log, &session, &template)?;
        let report = validate_log(&log);
        if !report.is_clean() {
            return Err(StoreError::Rejected(report));
        }
        let canonical = encode_canonical(&log)?;
        let file_name = log_file_name(&session.project_id, &session.token);
        let path = self.logs_dir(&session.project_id).join(&file_name);
        if session.consumed {
            let stored = fs::read(&path).map_err(io_err(&path))?;
            if stored == canonical {
                return Ok(IngestOutcome {
                    report,
                    file_name,
                    duplicate: true,
                });
            }
            return Err(StoreError::AlreadyConsumed);
        }
        write_atomic(&path, &canonical)?;
        self.save_session(&SessionToken {
            consumed: true,
            ..session
        })?;
        Ok(IngestOutcome {
            report,
            file_name,
            duplicate: false,
        })
    }

    /// Decodes every stored log of a project, isolating unreadable files.
    pub fn load_logs(&self, project_id: &str) -> Result<(Manifest, Vec<SessionLog>), StoreError> {
        if !self.project_exists(project_id) {
            return Err(StoreError::UnknownProject(project_id.into()));
        }
        let slots: std::collections::HashMap<String, String> = self
            .sessions(project_id)?
            .into_iter()
            .map(|s| (s.token, s.participant_slot))
            .collect();
        let dir = self.logs_dir(project_id);
        let mut names = Vec::new();
        match fs::read_dir(&dir) {
            Ok(entries) => {
                for entry in entries {
                    let entry = entry.map_err(io_err(&dir))?;
                    if let Some(name) = entry.file_name().to_str() {
                        if name.ends_with(LOG_FILE_SUFFIX) && !name.starts_with('.') {
                            names.push(name.to_owned());
                        }
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(io_err(&dir)(e)),
        }
        names.sort();

        let mut manifest = Manifest {
            project_id: project_id.into(),
            ..Manifest::default()
        };
        let mut logs = Vec::new();
        for name in names {
            let path = dir.join(&name);
            let decoded = fs::read(&path)
                .map_err(|e| e.to_string())
                .and_then(|bytes| codec::decode_canonical(&bytes).map_err(|e| e.to_string()));
            match decoded {
                Ok(log) => {
                    manifest.entries.push(ManifestEntry {
                        file_name: name,
                        token: log.session_token.clone(),
                        participant_id: log.participant_id.clone(),
                        participant_slot: slots.get(&log.session_token).cloned(),
                        event_count: log.events.len(),
                        duration: log.media_duration,
                    });
                    logs.push(log);
                }
                Err(error) => manifest.errors.push(ManifestError {
                    file_name: name,
                    error,
                }),
            }
        }
        Ok((manifest, logs))
    }

    pub fn aggregate(&self, project_id: &str) -> Result<Manifest, StoreError> {
        Ok(self.load_logs(project_id)?.0)
    }
}

fn check_log_matches(
    log: &SessionLog,
    session: &SessionToken,
    template: &ProjectTemplate,
) -> Result<(), StoreError> {
    let mismatch = |what: &str| Err(StoreError::Mismatch(what.into()));
    if log.session_token != session.token {
        return mismatch("session_token differs from the URL token");
    }
    if log.project_id != session.project_id {
        return mismatch("project_id differs from the session's project");
    }
    if log.scale != template.scale {
        return mismatch("rating scale differs from the project template");
    }
    if log.fps != template.fps {
        return mismatch("fps differs from the project template");
    }
    if log.logging_interval != template.logging_interval {
        return mismatch("logging_interval differs from the project template");
    }
    Ok(())
}
