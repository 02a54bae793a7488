//! Continuous retrospective affect annotation.
//!
//! Participants replay a recording of their conversation partner and rate,
//! moment to moment, how the partner came across on a bounded scale. This
//! crate holds everything except the browser dashboard:
//!
//! - [`model`]: rating scales, frame-accurate timecodes, events, logs, project templates
//! - [`engine`]: the session state machine and the log validator
//! - [`codec`]: canonical log files and the flat rating/timecode export
//! - [`analysis`]: resampling, Interpersonal Perception, correlation and rater metrics
//! - [`store`], [`server`]: filesystem persistence and the HTTP API
//! - [`admin`], [`template`], [`config`]: project management behind the `corae` binary
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example` lists them.

pub mod admin;
pub mod analysis;
pub mod codec;
pub mod config;
pub mod engine;
pub mod model;
pub mod server;
pub mod store;
pub mod template;

pub use analysis::{
    click_rate, dyad_disagreement, interpersonal_perception, interpersonal_perception_timed,
    pearson, rating_range, resample, validate_against_survey, IpResult, RatingSeries,
};
pub use codec::{decode_canonical, encode_canonical, export_flat_format};
pub use engine::{validate_log, Direction, RatingEngine, Rejection, ValidationReport};
pub use model::{
    seconds_to_timecode, timecode_to_seconds, AnnotationEvent, Cause, ProjectState,
    ProjectTemplate, RatingScale, SessionLog, TimeCode,
};
