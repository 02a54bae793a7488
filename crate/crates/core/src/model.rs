//! Shared domain types: rating scales, frame-accurate timecodes, annotation
//! events, session logs and project templates.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Frames per second assumed for recordings unless a project overrides it.
pub const DEFAULT_FPS: u32 = 30;

/// Largest frame rate whose frame field still fits the two-digit `FF` slot.
pub const MAX_FPS: u32 = 100;

/// Products `t * fps` within this many frames of an integer are treated as
/// landing on that frame, so that `k / fps` written as a float maps back to
/// frame `k` instead of `k - 1`.
const FRAME_SNAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid rating scale: {0}")]
    InvalidScale(String),
    #[error("invalid timecode: {0}")]
    InvalidTimecode(String),
    #[error("negative media position {0} s")]
    NegativeSeconds(f64),
    #[error("unsupported frame rate {0} (expected 1..={MAX_FPS})")]
    InvalidFps(u32),
    #[error("invalid project template: {0}")]
    InvalidTemplate(String),
}

/// A bounded, discretized rating dimension labeled at both extremes.
///
/// Values are integers `min, min + step, ..., max`. The default scale is the
/// 15-point `-7..=+7` approach/withdrawal bar.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawScale", into = "RawScale")]
pub struct RatingScale {
    min: i32,
    max: i32,
    step: i32,
    neutral: i32,
    negative_label: String,
    positive_label: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScale {
    min: i32,
    max: i32,
    step: i32,
    neutral: i32,
    negative_label: String,
    positive_label: String,
}

impl TryFrom<RawScale> for RatingScale {
    type Error = ModelError;

    fn try_from(raw: RawScale) -> Result<Self, Self::Error> {
        RatingScale::new(
            raw.min,
            raw.max,
            raw.step,
            raw.neutral,
            raw.negative_label,
            raw.positive_label,
        )
    }
}

impl From<RatingScale> for RawScale {
    fn from(s: RatingScale) -> Self {
        RawScale {
            min: s.min,
            max: s.max,
            step: s.step,
            neutral: s.neutral,
            negative_label: s.negative_label,
            positive_label: s.positive_label,
        }
    }
}

impl RatingScale {
    pub fn new(
        min: i32,
        max: i32,
        step: i32,
        neutral: i32,
        negative_label: impl Into<String>,
        positive_label: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let negative_label = negative_label.into();
        let positive_label = positive_label.into();
        if step < 1 {
            return Err(ModelError::InvalidScale(format!(
                "step {step} must be >= 1"
            )));
        }
        if !(min < neutral && neutral < max) {
            return Err(ModelError::InvalidScale(format!(
                "need min < neutral < max, got {min} / {neutral} / {max}"
            )));
        }
        if (i64::from(max) - i64::from(min)) % i64::from(step) != 0 {
            return Err(ModelError::InvalidScale(format!(
                "range {min}..{max} is not a multiple of step {step}"
            )));
        }
        if (i64::from(neutral) - i64::from(min)) % i64::from(step) != 0 {
            return Err(ModelError::InvalidScale(format!(
                "neutral {neutral} is not on the step grid"
            )));
        }
        if negative_label.trim().is_empty() || positive_label.trim().is_empty() {
            return Err(ModelError::InvalidScale("labels must be non-empty".into()));
        }
        Ok(Self {
            min,
            max,
            step,
            neutral,
            negative_label,
            positive_label,
        })
    }

    pub fn min(&self) -> i32 {
        self.min
    }

    pub fn max(&self) -> i32 {
        self.max
    }

    pub fn step(&self) -> i32 {
        self.step
    }

    pub fn neutral(&self) -> i32 {
        self.neutral
    }

    pub fn negative_label(&self) -> &str {
        &self.negative_label
    }

    pub fn positive_label(&self) -> &str {
        &self.positive_label
    }

    /// Whether `value` lies on the step grid between the bounds.
    pub fn is_admissible(&self, value: i32) -> bool {
        value >= self.min
            && value <= self.max
            && (i64::from(value) - i64::from(self.min)) % i64::from(self.step) == 0
    }

    /// Number of admissible values.
    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Admissible values in ascending order.
    pub fn values(&self) -> impl Iterator<Item = i32> + '_ {
        (self.min..=self.max).step_by(self.step as usize)
    }
}

impl Default for RatingScale {
    fn default() -> Self {
        Self {
            min: -7,
            max: 7,
            step: 1,
            neutral: 0,
            negative_label: "Disagreeable".into(),
            positive_label: "Agreeable".into(),
        }
    }
}

/// A media position quantized to whole frames, written `HH:MM:SS:FF`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeCode {
    hours: u32,
    minutes: u32,
    seconds: u32,
    frame: u32,
    fps: u32,
}

fn check_fps(fps: u32) -> Result<(), ModelError> {
    if fps == 0 || fps > MAX_FPS {
        Err(ModelError::InvalidFps(fps))
    } else {
        Ok(())
    }
}

/// Index of the frame displayed at `t` seconds.
pub(crate) fn frame_index_at(t: f64, fps: u32) -> u64 {
    let exact = t * f64::from(fps);
    let nearest = exact.round();
    if (exact - nearest).abs() <= FRAME_SNAP {
        nearest as u64
    } else {
        exact.floor() as u64
    }
}

impl TimeCode {
    pub fn new(
        hours: u32,
        minutes: u32,
        seconds: u32,
        frame: u32,
        fps: u32,
    ) -> Result<Self, ModelError> {
        check_fps(fps)?;
        if minutes > 59 || seconds > 59 {
            return Err(ModelError::InvalidTimecode(format!(
                "minutes/seconds out of range in {hours}:{minutes}:{seconds}:{frame}"
            )));
        }
        if frame >= fps {
            return Err(ModelError::InvalidTimecode(format!(
                "frame {frame} out of range for {fps} fps"
            )));
        }
        Ok(Self {
            hours,
            minutes,
            seconds,
            frame,
            fps,
        })
    }

    pub fn zero(fps: u32) -> Result<Self, ModelError> {
        Self::new(0, 0, 0, 0, fps)
    }

    pub fn from_frames(total: u64, fps: u32) -> Result<Self, ModelError> {
        check_fps(fps)?;
        let per_sec = u64::from(fps);
        let frame = (total % per_sec) as u32;
        let secs = total / per_sec;
        let hours = u32::try_from(secs / 3600)
            .map_err(|_| ModelError::InvalidTimecode(format!("{total} frames overflows hours")))?;
        Ok(Self {
            hours,
            minutes: ((secs / 60) % 60) as u32,
            seconds: (secs % 60) as u32,
            frame,
            fps,
        })
    }

    /// The frame containing `t` seconds (floor, with float-noise snapping).
    pub fn from_seconds(t: f64, fps: u32) -> Result<Self, ModelError> {
        check_fps(fps)?;
        if t.is_nan() || t < 0.0 {
            return Err(ModelError::NegativeSeconds(t));
        }
        if !t.is_finite() {
            return Err(ModelError::InvalidTimecode(format!(
                "non-finite position {t}"
            )));
        }
        Self::from_frames(frame_index_at(t, fps), fps)
    }

    /// Parses `HH:MM:SS:FF` at the given frame rate.
    pub fn parse(text: &str, fps: u32) -> Result<Self, ModelError> {
        let bad = || ModelError::InvalidTimecode(format!("malformed timecode {text:?}"));
        let mut fields = [0u32; 4];
        let mut parts = text.split(':');
        for (i, slot) in fields.iter_mut().enumerate() {
            let part = parts.next().ok_or_else(bad)?;
            let min_width = 2;
            if part.len() < min_width || (i > 0 && part.len() > min_width) {
                return Err(bad());
            }
            if !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            *slot = part.parse().map_err(|_| bad())?;
        }
        if parts.next().is_some() {
            return Err(bad());
        }
        Self::new(fields[0], fields[1], fields[2], fields[3], fps)
    }

    pub fn hours(&self) -> u32 {
        self.hours
    }

    pub fn minutes(&self) -> u32 {
        self.minutes
    }

    pub fn seconds(&self) -> u32 {
        self.seconds
    }

    pub fn frame(&self) -> u32 {
        self.frame
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn total_frames(&self) -> u64 {
        let secs =
            u64::from(self.hours) * 3600 + u64::from(self.minutes) * 60 + u64::from(self.seconds);
        secs * u64::from(self.fps) + u64::from(self.frame)
    }

    pub fn to_seconds(&self) -> f64 {
        f64::from(self.hours) * 3600.0
            + f64::from(self.minutes) * 60.0
            + f64::from(self.seconds)
            + f64::from(self.frame) / f64::from(self.fps)
    }
}

impl PartialOrd for TimeCode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimeCode {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = u128::from(self.total_frames()) * u128::from(other.fps);
        let rhs = u128::from(other.total_frames()) * u128::from(self.fps);
        lhs.cmp(&rhs).then(self.fps.cmp(&other.fps))
    }
}

impl fmt::Display for TimeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:02}:{:02}:{:02}:{:02}",
            self.hours, self.minutes, self.seconds, self.frame
        )
    }
}

pub fn timecode_to_seconds(tc: &TimeCode) -> f64 {
    tc.to_seconds()
}

pub fn seconds_to_timecode(t: f64, fps: u32) -> Result<TimeCode, ModelError> {
    TimeCode::from_seconds(t, fps)
}

/// Why an event was logged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cause {
    IntervalTick,
    RatingChange,
    PlaybackToggle,
}

impl Cause {
    pub fn as_str(self) -> &'static str {
        match self {
            Cause::IntervalTick => "interval_tick",
            Cause::RatingChange => "rating_change",
            Cause::PlaybackToggle => "playback_toggle",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "interval_tick" => Some(Cause::IntervalTick),
            "rating_change" => Some(Cause::RatingChange),
            "playback_toggle" => Some(Cause::PlaybackToggle),
            _ => None,
        }
    }
}

/// One logged rating datum.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationEvent {
    pub rating: i32,
    pub timecode: TimeCode,
    pub cause: Cause,
    /// Seconds since the session started, when the client reports it.
    pub wall_clock: Option<f64>,
}

/// The full event stream recorded for one annotator, plus its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub session_token: String,
    pub participant_id: Option<String>,
    pub project_id: String,
    pub scale: RatingScale,
    pub logging_interval: f64,
    pub fps: u32,
    pub media_duration: f64,
    pub events: Vec<AnnotationEvent>,
}

impl SessionLog {
    pub fn change_events(&self) -> impl Iterator<Item = &AnnotationEvent> + '_ {
        self.events
            .iter()
            .filter(|e| e.cause == Cause::RatingChange)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectState {
    Draft,
    Staged,
    Published,
}

impl fmt::Display for ProjectState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProjectState::Draft => "draft",
            ProjectState::Staged => "staged",
            ProjectState::Published => "published",
        })
    }
}

/// Researcher-facing configuration for one study.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectTemplate {
    pub project_id: String,
    pub scale: RatingScale,
    pub instructions: String,
    pub logging_interval: f64,
    pub fps: u32,
    pub identifier_prompt_enabled: bool,
    /// Participant slot -> media file name inside the project's media directory.
    pub media_entries: BTreeMap<String, String>,
    /// Slot pairs whose annotations are compared against each other.
    pub dyads: Vec<(String, String)>,
    pub state: ProjectState,
}

impl ProjectTemplate {
    pub fn new(project_id: impl Into<String>) -> Self {
        Self {
            project_id: project_id.into(),
            scale: RatingScale::default(),
            instructions: String::new(),
            logging_interval: 1.0,
            fps: DEFAULT_FPS,
            identifier_prompt_enabled: true,
            media_entries: BTreeMap::new(),
            dyads: Vec::new(),
            state: ProjectState::Draft,
        }
    }

    pub fn check(&self) -> Result<(), ModelError> {
        check_project_id(&self.project_id)?;
        if !(self.logging_interval.is_finite() && self.logging_interval > 0.0) {
            return Err(ModelError::InvalidTemplate(format!(
                "logging_interval must be > 0, got {}",
                self.logging_interval
            )));
        }
        check_fps(self.fps)?;
        if self.state == ProjectState::Published && self.media_entries.is_empty() {
            return Err(ModelError::InvalidTemplate(
                "a published project needs at least one media entry".into(),
            ));
        }
        for (a, b) in &self.dyads {
            for slot in [a, b] {
                if !self.media_entries.contains_key(slot) {
                    return Err(ModelError::InvalidTemplate(format!(
                        "dyad references unknown slot {slot:?}"
                    )));
                }
            }
            if a == b {
                return Err(ModelError::InvalidTemplate(format!(
                    "dyad pairs slot {a:?} with itself"
                )));
            }
        }
        Ok(())
    }

    /// Explicit dyads, or the single pair formed when exactly two slots exist.
    pub fn effective_dyads(&self) -> Vec<(String, String)> {
        if !self.dyads.is_empty() {
            return self.dyads.clone();
        }
        let slots: Vec<_> = self.media_entries.keys().cloned().collect();
        match slots.as_slice() {
            [a, b] => vec![(a.clone(), b.clone())],
            _ => Vec::new(),
        }
    }
}

/// Project ids become directory and file-name components.
pub fn check_project_id(id: &str) -> Result<(), ModelError> {
    let ok = !id.is_empty()
        && id.len() <= 64
        && !id.starts_with('.')
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_' || b == b'.');
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidTemplate(format!(
            "project id {id:?} must be 1-64 characters of [A-Za-z0-9._-]"
        )))
    }
}
