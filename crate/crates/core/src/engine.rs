//! The per-session rating state machine and the log validator that enforces
//! the same contract on submitted logs.
//!
//! A session starts paused at the neutral value. Ratings move one step at a
//! time, only while the media is playing, and never past the scale bounds.
//! Media position only moves forward through [`RatingEngine::advance`]; every
//! interval boundary crossed on the way logs an [`Cause::IntervalTick`] with
//! the current rating.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    frame_index_at, AnnotationEvent, Cause, ModelError, ProjectState, ProjectTemplate, RatingScale,
    SessionLog, TimeCode,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("project {0:?} is not published")]
    NotPublished(String),
    #[error("media duration must be a positive number of seconds, got {0}")]
    InvalidDuration(f64),
    #[error("cannot advance media while paused")]
    Paused,
    #[error("session already finished")]
    Finished,
    #[error("media position cannot move backwards ({from} -> {to})")]
    Backwards { from: TimeCode, to: TimeCode },
    #[error("timecode at {found} fps does not match the session's {expected} fps")]
    FpsMismatch { expected: u32, found: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Signals returned for inputs that are legal but have no effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// Rating changes are only accepted during playback.
    Paused,
    /// The move would leave the scale.
    Bound,
    /// The session reached the end of the media.
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn sign(self) -> i32 {
        match self {
            Direction::Up => 1,
            Direction::Down => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineState {
    pub current_rating: i32,
    pub playing: bool,
    pub media_position: TimeCode,
    /// Seconds of the most recent interval boundary that was logged.
    pub last_interval_tick: f64,
    pub finished: bool,
}

#[derive(Debug, Clone)]
pub struct RatingEngine {
    scale: RatingScale,
    logging_interval: f64,
    fps: u32,
    project_id: String,
    media_duration: f64,
    end_frame: u64,
    state: EngineState,
    next_boundary: u64,
    last_tick_frame: u64,
    wall_clock: Option<f64>,
    events: Vec<AnnotationEvent>,
}

impl RatingEngine {
    /// Starts a session for a published template; logs the neutral head event.
    pub fn init(template: &ProjectTemplate, media_duration: f64) -> Result<Self, EngineError> {
        if template.state != ProjectState::Published {
            return Err(EngineError::NotPublished(template.project_id.clone()));
        }
        template.check()?;
        if !(media_duration.is_finite() && media_duration > 0.0) {
            return Err(EngineError::InvalidDuration(media_duration));
        }
        let fps = template.fps;
        let zero = TimeCode::zero(fps)?;
        let mut engine = Self {
            scale: template.scale.clone(),
            logging_interval: template.logging_interval,
            fps,
            project_id: template.project_id.clone(),
            media_duration,
            end_frame: frame_index_at(media_duration, fps),
            state: EngineState {
                current_rating: template.scale.neutral(),
                playing: false,
                media_position: zero,
                last_interval_tick: 0.0,
                finished: false,
            },
            next_boundary: 1,
            last_tick_frame: 0,
            wall_clock: None,
            events: Vec::new(),
        };
        // Boundaries that fall on frame zero are covered by the head event.
        while engine.boundary_frame(engine.next_boundary) == 0 {
            engine.next_boundary += 1;
        }
        engine.push(Cause::IntervalTick);
        Ok(engine)
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn scale(&self) -> &RatingScale {
        &self.scale
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn media_duration(&self) -> f64 {
        self.media_duration
    }

    pub fn events(&self) -> &[AnnotationEvent] {
        &self.events
    }

    /// Sets the wall-clock stamp (seconds since session start) attached to
    /// subsequently emitted events.
    pub fn set_wall_clock(&mut self, seconds: Option<f64>) {
        self.wall_clock = seconds;
    }

    pub fn toggle_playback(&mut self) -> Result<AnnotationEvent, Rejection> {
        if self.state.finished {
            return Err(Rejection::Finished);
        }
        self.state.playing = !self.state.playing;
        Ok(self.push(Cause::PlaybackToggle))
    }

    pub fn adjust(&mut self, direction: Direction) -> Result<AnnotationEvent, Rejection> {
        if !self.state.playing {
            return Err(Rejection::Paused);
        }
        let next = self.state.current_rating + direction.sign() * self.scale.step();
        if next < self.scale.min() || next > self.scale.max() {
            return Err(Rejection::Bound);
        }
        self.state.current_rating = next;
        Ok(self.push(Cause::RatingChange))
    }

    /// Moves playback forward, logging a tick for every interval boundary in
    /// `(old, new]`. Reaching the end of the media finishes the session.
    pub fn advance(&mut self, new_position: TimeCode) -> Result<Vec<AnnotationEvent>, EngineError> {
        if self.state.finished {
            return Err(EngineError::Finished);
        }
        if !self.state.playing {
            return Err(EngineError::Paused);
        }
        if new_position.fps() != self.fps {
            return Err(EngineError::FpsMismatch {
                expected: self.fps,
                found: new_position.fps(),
            });
        }
        if new_position < self.state.media_position {
            return Err(EngineError::Backwards {
                from: self.state.media_position,
                to: new_position,
            });
        }
        let target = new_position.total_frames().min(self.end_frame);
        let mut ticks = Vec::new();
        loop {
            let frame = self.boundary_frame(self.next_boundary);
            if frame > target {
                break;
            }
            if frame > self.last_tick_frame {
                self.state.media_position = TimeCode::from_frames(frame, self.fps)?;
                self.state.last_interval_tick = self.next_boundary as f64 * self.logging_interval;
                self.last_tick_frame = frame;
                ticks.push(self.push(Cause::IntervalTick));
            }
            self.next_boundary += 1;
        }
        self.state.media_position = TimeCode::from_frames(target, self.fps)?;
        if target >= self.end_frame {
            self.state.finished = true;
            self.state.playing = false;
        }
        Ok(ticks)
    }

    pub fn advance_to_seconds(
        &mut self,
        seconds: f64,
    ) -> Result<Vec<AnnotationEvent>, EngineError> {
        let tc = TimeCode::from_seconds(seconds, self.fps)?;
        self.advance(tc)
    }

    /// Packages the recorded events into a session log.
    pub fn into_log(
        self,
        session_token: impl Into<String>,
        participant_id: Option<String>,
    ) -> SessionLog {
        SessionLog {
            session_token: session_token.into(),
            participant_id,
            project_id: self.project_id,
            scale: self.scale,
            logging_interval: self.logging_interval,
            fps: self.fps,
            media_duration: self.media_duration,
            events: self.events,
        }
    }

    fn boundary_frame(&self, k: u64) -> u64 {
        frame_index_at(k as f64 * self.logging_interval, self.fps)
    }

    fn push(&mut self, cause: Cause) -> AnnotationEvent {
        let event = AnnotationEvent {
            rating: self.state.current_rating,
            timecode: self.state.media_position,
            cause,
            wall_clock: self.wall_clock,
        };
        self.events.push(event.clone());
        event
    }
}

/// A single problem found in a submitted log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Offending event index, `None` for header-level problems.
    pub index: Option<usize>,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    InvalidHeader {
        reason: String,
    },
    MissingNeutralHead,
    InadmissibleRating {
        rating: i32,
    },
    FpsMismatch {
        expected: u32,
        found: u32,
    },
    NonMonotoneTimecode {
        previous: String,
        current: String,
    },
    PastMediaEnd {
        timecode: String,
    },
    StepJump {
        from: i32,
        to: i32,
    },
    ChangeWhilePaused,
    TickWhilePaused,
    /// Two consecutive events during playback are further apart than one
    /// logging interval plus one frame.
    MissingTick {
        gap_seconds: f64,
        allowed_seconds: f64,
    },
    /// An interval boundary passed during playback has no tick within one frame.
    MissingBoundaryTick {
        expected_at: String,
    },
    /// Wall-clock time ran ahead of media time, most likely a buffering stall.
    /// Informational only.
    Stall {
        media_seconds: f64,
        wall_seconds: f64,
    },
}

impl ViolationKind {
    pub fn is_fatal(&self) -> bool {
        !matches!(self, ViolationKind::Stall { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ViolationKind::InvalidHeader { .. } => "invalid_header",
            ViolationKind::MissingNeutralHead => "missing_neutral_head",
            ViolationKind::InadmissibleRating { .. } => "inadmissible_rating",
            ViolationKind::FpsMismatch { .. } => "fps_mismatch",
            ViolationKind::NonMonotoneTimecode { .. } => "non_monotone_timecode",
            ViolationKind::PastMediaEnd { .. } => "past_media_end",
            ViolationKind::StepJump { .. } => "step_jump",
            ViolationKind::ChangeWhilePaused => "change_while_paused",
            ViolationKind::TickWhilePaused => "tick_while_paused",
            ViolationKind::MissingTick { .. } => "missing_tick",
            ViolationKind::MissingBoundaryTick { .. } => "missing_boundary_tick",
            ViolationKind::Stall { .. } => "stall",
        }
    }
}

/// Outcome of [`validate_log`]: fatal violations plus informational notes.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub notes: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, name: &str) -> bool {
        self.violations.iter().any(|v| v.kind.name() == name)
    }

    fn record(&mut self, index: Option<usize>, kind: ViolationKind) {
        if kind.is_fatal() {
            self.violations.push(Violation { index, kind });
        } else {
            self.notes.push(Violation { index, kind });
        }
    }
}

/// Checks a log against the session contract and lists every violation.
pub fn validate_log(log: &SessionLog) -> ValidationReport {
    let mut report = ValidationReport::default();
    let header_ok = check_header(log, &mut report);
    let Some(head) = log.events.first() else {
        return report;
    };
    if !header_ok {
        return report;
    }

    let fps = log.fps;
    let frame_secs = 1.0 / f64::from(fps);
    let allowed_gap = log.logging_interval + frame_secs;
    let end_frame = frame_index_at(log.media_duration, fps);
    let scale = &log.scale;

    if head.rating != scale.neutral() || head.timecode.total_frames() != 0 {
        report.record(Some(0), ViolationKind::MissingNeutralHead);
    }

    let mut current = head.rating;
    let mut playing = false;
    let mut prev: Option<&AnnotationEvent> = None;
    // Playback segments as (start_frame, end_frame), start exclusive.
    let mut segments: Vec<(u64, u64)> = Vec::new();
    let mut segment_start: Option<u64> = None;
    let mut tick_frames = BTreeSet::new();

    for (i, event) in log.events.iter().enumerate() {
        if event.timecode.fps() != fps {
            report.record(
                Some(i),
                ViolationKind::FpsMismatch {
                    expected: fps,
                    found: event.timecode.fps(),
                },
            );
            prev = Some(event);
            continue;
        }
        let frame = event.timecode.total_frames();
        if frame > end_frame {
            report.record(
                Some(i),
                ViolationKind::PastMediaEnd {
                    timecode: event.timecode.to_string(),
                },
            );
        }
        if !scale.is_admissible(event.rating) {
            report.record(
                Some(i),
                ViolationKind::InadmissibleRating {
                    rating: event.rating,
                },
            );
        }

        if let Some(p) = prev.filter(|p| p.timecode.fps() == fps) {
            if event.timecode < p.timecode {
                report.record(
                    Some(i),
                    ViolationKind::NonMonotoneTimecode {
                        previous: p.timecode.to_string(),
                        current: event.timecode.to_string(),
                    },
                );
            }
            if playing {
                let gap = event.timecode.to_seconds() - p.timecode.to_seconds();
                if gap > allowed_gap + 1e-9 {
                    report.record(
                        Some(i),
                        ViolationKind::MissingTick {
                            gap_seconds: gap,
                            allowed_seconds: allowed_gap,
                        },
                    );
                }
                if let (Some(w0), Some(w1)) = (p.wall_clock, event.wall_clock) {
                    let wall = w1 - w0;
                    if gap >= 0.0 && wall - gap > log.logging_interval {
                        report.record(
                            Some(i),
                            ViolationKind::Stall {
                                media_seconds: gap,
                                wall_seconds: wall,
                            },
                        );
                    }
                }
            }
        }

        if i > 0 {
            match event.cause {
                Cause::RatingChange => {
                    if (event.rating - current).abs() != scale.step() {
                        report.record(
                            Some(i),
                            ViolationKind::StepJump {
                                from: current,
                                to: event.rating,
                            },
                        );
                    }
                    if !playing {
                        report.record(Some(i), ViolationKind::ChangeWhilePaused);
                    }
                }
                Cause::IntervalTick | Cause::PlaybackToggle => {
                    if event.rating != current {
                        report.record(
                            Some(i),
                            ViolationKind::StepJump {
                                from: current,
                                to: event.rating,
                            },
                        );
                    }
                    if event.cause == Cause::IntervalTick && !playing {
                        report.record(Some(i), ViolationKind::TickWhilePaused);
                    }
                }
            }
        }
        current = event.rating;

        if event.cause == Cause::IntervalTick {
            tick_frames.insert(frame);
        }
        if event.cause == Cause::PlaybackToggle {
            if playing {
                if let Some(start) = segment_start.take() {
                    segments.push((start, frame));
                }
            } else {
                segment_start = Some(frame);
            }
            playing = !playing;
        }
        prev = Some(event);
    }
    // Playback only stops without a toggle when the media runs out, so an
    // unterminated segment covers everything up to the end frame.
    if let Some(start) = segment_start {
        segments.push((start, end_frame));
    }

    check_boundaries(log, &segments, &tick_frames, &mut report);
    report
}

fn check_header(log: &SessionLog, report: &mut ValidationReport) -> bool {
    let mut ok = true;
    let mut bad = |reason: String| {
        report.record(None, ViolationKind::InvalidHeader { reason });
        ok = false;
    };
    if !(log.logging_interval.is_finite() && log.logging_interval > 0.0) {
        bad(format!(
            "logging_interval must be > 0, got {}",
            log.logging_interval
        ));
    }
    if !(log.media_duration.is_finite() && log.media_duration > 0.0) {
        bad(format!(
            "media_duration must be > 0, got {}",
            log.media_duration
        ));
    }
    if log.fps == 0 || log.fps > crate::model::MAX_FPS {
        bad(format!("unsupported fps {}", log.fps));
    }
    ok
}

fn check_boundaries(
    log: &SessionLog,
    segments: &[(u64, u64)],
    tick_frames: &BTreeSet<u64>,
    report: &mut ValidationReport,
) {
    let fps = log.fps;
    for &(start, end) in segments {
        if end <= start {
            continue;
        }
        let mut k = (start as f64 / f64::from(fps) / log.logging_interval).floor() as u64;
        loop {
            let frame = frame_index_at(k as f64 * log.logging_interval, fps);
            if frame > end {
                break;
            }
            if frame > start {
                let covered = tick_frames
                    .range(frame.saturating_sub(1)..=frame + 1)
                    .next()
                    .is_some();
                if !covered {
                    let expected_at = TimeCode::from_frames(frame, fps)
                        .map(|tc| tc.to_string())
                        .unwrap_or_else(|_| format!("frame {frame}"));
                    report.record(None, ViolationKind::MissingBoundaryTick { expected_at });
                }
            }
            k += 1;
        }
    }
}
