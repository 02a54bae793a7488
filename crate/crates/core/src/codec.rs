//! Canonical session-log files and the flat rating/timecode export.
//!
//! The canonical document is pretty-printed JSON with keys in lexicographic
//! order, so encoding the same log always yields the same bytes:
//!
//! ```text
//! {
//!   "events": [
//!     { "cause": "interval_tick", "rating": 0, "timecode": "00:00:00:00", "wall_clock": null }
//!   ],
//!   "format_version": "1",
//!   "header": {
//!     "fps": 30, "logging_interval": 1.0, "media_duration": 60.0,
//!     "participant_id": "P01", "project_id": "rfp",
//!     "scale": { "max": 7, "min": -7, "negative_label": "Disagreeable",
//!                "neutral": 0, "positive_label": "Agreeable", "step": 1 },
//!     "session_token": "..."
//!   }
//! }
//! ```
//!
//! The export form is an array of single-pair objects mapping the rating to
//! its timecode, e.g. `[{"0": "00:00:00:00"}, {"1": "00:00:00:15"}]`. An
//! object keyed by rating could not hold the same rating twice.

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::{validate_log, ValidationReport};
use crate::model::{AnnotationEvent, Cause, RatingScale, SessionLog, TimeCode, MAX_FPS};

pub const FORMAT_VERSION: &str = "1";

/// Suffix shared by every canonical log file.
pub const LOG_FILE_SUFFIX: &str = ".corae.json";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("malformed log document: {0}")]
    Malformed(String),
    #[error("unsupported format_version {0:?}")]
    UnsupportedVersion(String),
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("record {index}: unknown cause {tag:?}")]
    UnknownCause { index: usize, tag: String },
    #[error("record {index}: rating {rating} is not on the scale")]
    InadmissibleRating { index: usize, rating: i64 },
    #[error("record {index}: malformed timecode {text:?}")]
    MalformedTimecode { index: usize, text: String },
    #[error("record {index}: wall clock must be finite")]
    NonFiniteWallClock { index: usize },
    #[error("log failed validation with {} violation(s)", .0.violations.len())]
    InvalidLog(ValidationReport),
}

/// `{project_id}_{session_token}.corae.json`
pub fn log_file_name(project_id: &str, session_token: &str) -> String {
    format!("{project_id}_{session_token}{LOG_FILE_SUFFIX}")
}

fn scale_value(scale: &RatingScale) -> Value {
    json!({
        "min": scale.min(),
        "max": scale.max(),
        "step": scale.step(),
        "neutral": scale.neutral(),
        "negative_label": scale.negative_label(),
        "positive_label": scale.positive_label(),
    })
}

pub fn encode_canonical(log: &SessionLog) -> Result<Vec<u8>, CodecError> {
    let report = validate_log(log);
    if !report.is_clean() {
        return Err(CodecError::InvalidLog(report));
    }
    let mut events = Vec::with_capacity(log.events.len());
    for (index, e) in log.events.iter().enumerate() {
        if e.wall_clock.is_some_and(|w| !w.is_finite()) {
            return Err(CodecError::NonFiniteWallClock { index });
        }
        events.push(json!({
            "rating": e.rating,
            "timecode": e.timecode.to_string(),
            "cause": e.cause.as_str(),
            "wall_clock": e.wall_clock,
        }));
    }
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "header": {
            "session_token": log.session_token,
            "participant_id": log.participant_id,
            "project_id": log.project_id,
            "scale": scale_value(&log.scale),
            "logging_interval": log.logging_interval,
            "fps": log.fps,
            "media_duration": log.media_duration,
        },
        "events": events,
    });
    let mut bytes =
        serde_json::to_vec_pretty(&doc).map_err(|e| CodecError::Malformed(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    format_version: String,
    header: RawHeader,
    events: Vec<RawEvent>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeader {
    session_token: String,
    participant_id: Option<String>,
    project_id: String,
    scale: Value,
    logging_interval: f64,
    fps: u32,
    media_duration: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    rating: i64,
    timecode: String,
    cause: String,
    #[serde(default)]
    wall_clock: Option<f64>,
}

pub fn decode_canonical(bytes: &[u8]) -> Result<SessionLog, CodecError> {
    let doc: RawDoc =
        serde_json::from_slice(bytes).map_err(|e| CodecError::Malformed(e.to_string()))?;
    if doc.format_version != FORMAT_VERSION {
        return Err(CodecError::UnsupportedVersion(doc.format_version));
    }
    let h = doc.header;
    let scale = RatingScale::deserialize(h.scale)
        .map_err(|e| CodecError::InvalidHeader(format!("scale: {e}")))?;
    if h.fps == 0 || h.fps > MAX_FPS {
        return Err(CodecError::InvalidHeader(format!(
            "unsupported fps {}",
            h.fps
        )));
    }
    let mut events = Vec::with_capacity(doc.events.len());
    for (index, raw) in doc.events.into_iter().enumerate() {
        let cause = Cause::from_tag(&raw.cause).ok_or_else(|| CodecError::UnknownCause {
            index,
            tag: raw.cause.clone(),
        })?;
        let rating = i32::try_from(raw.rating)
            .ok()
            .filter(|r| scale.is_admissible(*r))
            .ok_or(CodecError::InadmissibleRating {
                index,
                rating: raw.rating,
            })?;
        let timecode =
            TimeCode::parse(&raw.timecode, h.fps).map_err(|_| CodecError::MalformedTimecode {
                index,
                text: raw.timecode.clone(),
            })?;
        events.push(AnnotationEvent {
            rating,
            timecode,
            cause,
            wall_clock: raw.wall_clock,
        });
    }
    Ok(SessionLog {
        session_token: h.session_token,
        participant_id: h.participant_id,
        project_id: h.project_id,
        scale,
        logging_interval: h.logging_interval,
        fps: h.fps,
        media_duration: h.media_duration,
        events,
    })
}

/// Flat rating -> timecode export; playback toggles are dropped.
pub fn export_flat_format(log: &SessionLog) -> Vec<u8> {
    let mut out = String::from("[");
    let mut first = true;
    for e in log
        .events
        .iter()
        .filter(|e| e.cause != Cause::PlaybackToggle)
    {
        if !first {
            out.push_str(", ");
        }
        first = false;
        out.push_str(&format!("{{\"{}\": \"{}\"}}", e.rating, e.timecode));
    }
    out.push(']');
    out.into_bytes()
}
