#![allow(dead_code)]

pub mod mutate;
pub mod oracle;

use std::collections::BTreeMap;
use std::path::Path;

use corae::model::{
    AnnotationEvent, Cause, ProjectState, ProjectTemplate, RatingScale, SessionLog,
};
use corae::{Direction, RatingEngine};
use rand::Rng;

/// One keyboard/player input fed to an engine.
#[derive(Debug, Clone, Copy)]
pub enum Input {
    Toggle,
    Up,
    Down,
    /// Play forward by this many frames (skipped while paused).
    Advance(u64),
}

pub fn published_template(
    project_id: &str,
    scale: RatingScale,
    interval: f64,
    fps: u32,
) -> ProjectTemplate {
    let mut t = ProjectTemplate::new(project_id);
    t.scale = scale;
    t.logging_interval = interval;
    t.fps = fps;
    t.media_entries = BTreeMap::from([
        ("A".to_string(), "a.mp4".to_string()),
        ("B".to_string(), "b.mp4".to_string()),
    ]);
    t.state = ProjectState::Published;
    t
}

/// Feeds inputs to the engine the way a player would: advancing is only
/// attempted while playing, and everything stops once the media ends.
pub fn drive(engine: &mut RatingEngine, inputs: &[Input]) {
    for input in inputs {
        if engine.state().finished {
            break;
        }
        match *input {
            Input::Toggle => {
                engine.toggle_playback().unwrap();
            }
            Input::Up => {
                let _ = engine.adjust(Direction::Up);
            }
            Input::Down => {
                let _ = engine.adjust(Direction::Down);
            }
            Input::Advance(frames) => {
                if engine.state().playing {
                    let target = engine.state().media_position.total_frames() + frames;
                    let tc = corae::TimeCode::from_frames(target, engine.fps()).unwrap();
                    engine.advance(tc).unwrap();
                }
            }
        }
    }
}

/// Plays whatever is left of the media, the way every submitted session ends.
pub fn finish(engine: &mut RatingEngine) {
    if engine.state().finished {
        return;
    }
    if !engine.state().playing {
        engine.toggle_playback().unwrap();
    }
    engine.advance_to_seconds(engine.media_duration()).unwrap();
}

/// Random input script. It always opens with play, a long enough advance to
/// cross an interval boundary, and one rating change, so every generated log
/// has something to mutate.
pub fn random_inputs<R: Rng>(rng: &mut R, interval: f64, fps: u32, len: usize) -> Vec<Input> {
    let boundary_frames = (interval * f64::from(fps)).ceil() as u64 + 1;
    let mut inputs = vec![
        Input::Toggle,
        Input::Advance(boundary_frames + rng.random_range(0..10)),
        if rng.random_bool(0.5) {
            Input::Up
        } else {
            Input::Down
        },
        Input::Advance(boundary_frames),
    ];
    for _ in 0..len {
        let input = match rng.random_range(0..100) {
            0..=7 => Input::Toggle,
            8..=37 => Input::Up,
            38..=67 => Input::Down,
            _ => Input::Advance(rng.random_range(0..3 * boundary_frames)),
        };
        inputs.push(input);
    }
    inputs
}

pub fn random_session<R: Rng>(rng: &mut R, template: &ProjectTemplate, token: &str) -> SessionLog {
    let duration = rng.random_range(5.0..40.0);
    let mut engine = RatingEngine::init(template, duration).unwrap();
    let len = rng.random_range(10..150);
    let inputs = random_inputs(rng, template.logging_interval, template.fps, len);
    drive(&mut engine, &inputs);
    finish(&mut engine);
    engine.into_log(token, Some(format!("P{:03}", rng.random_range(0..1000))))
}

/// A simulated annotator who plays the media straight through and steps the
/// slider toward a slowly wandering target, at most one step per reaction
/// delay.
pub fn follow_target<R: Rng>(
    rng: &mut R,
    template: &ProjectTemplate,
    token: &str,
    duration: f64,
    center: f64,
    wander: f64,
) -> SessionLog {
    let mut engine = RatingEngine::init(template, duration).unwrap();
    engine.toggle_playback().unwrap();
    let scale = template.scale.clone();
    let mut target = center;
    let mut t: f64 = 0.0;
    while !engine.state().finished {
        t += rng.random_range(0.2..0.6);
        target += rng.random_range(-wander..=wander);
        target = target.clamp(center - 2.0, center + 2.0);
        engine.advance_to_seconds(t.min(duration)).unwrap();
        if engine.state().finished {
            break;
        }
        let goal = (target.round() as i32).clamp(scale.min(), scale.max());
        let current = engine.state().current_rating;
        if goal > current {
            let _ = engine.adjust(Direction::Up);
        } else if goal < current {
            let _ = engine.adjust(Direction::Down);
        }
    }
    engine.into_log(token, None)
}

/// Time-weighted mean rating of the step function the log describes.
pub fn time_weighted_mean(log: &SessionLog) -> f64 {
    let mut total = 0.0;
    let events = &log.events;
    for (i, e) in events.iter().enumerate() {
        let start = e.timecode.to_seconds();
        let end = events
            .get(i + 1)
            .map(|n| n.timecode.to_seconds())
            .unwrap_or(log.media_duration);
        total += f64::from(e.rating) * (end - start);
    }
    total / log.media_duration
}

pub fn event(rating: i32, frame: u64, fps: u32, cause: Cause) -> AnnotationEvent {
    AnnotationEvent {
        rating,
        timecode: corae::TimeCode::from_frames(frame, fps).unwrap(),
        cause,
        wall_clock: None,
    }
}

pub const STUDY_TEMPLATE: &str = r#"
instructions = "Please rate how your partner came across, moment to moment."
logging_interval = 1.0
identifier_prompt = true

[scale]
min = -7
max = 7
step = 1
neutral = 0
negative_label = "Disagreeable"
positive_label = "Agreeable"

[media]
A = "partner_b.mp4"
B = "partner_a.mp4"
"#;

/// Writes the study template and two dummy media files under `root`.
pub fn write_study_inputs(root: &Path) -> std::path::PathBuf {
    let template = root.join("study.toml");
    std::fs::write(&template, STUDY_TEMPLATE).unwrap();
    template
}

pub fn install_media(store: &corae::store::Store, project: &str) {
    let dir = store.media_dir(project);
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("partner_a.mp4"),
        (0..=255u8).cycle().take(4096).collect::<Vec<_>>(),
    )
    .unwrap();
    std::fs::write(
        dir.join("partner_b.mp4"),
        (0..=255u8).rev().cycle().take(4096).collect::<Vec<_>>(),
    )
    .unwrap();
}

/// A published copy of the study template under `root/data`, with media
/// installed. Returns the store and the project template.
pub fn published_study(root: &Path, project: &str) -> (corae::store::Store, ProjectTemplate) {
    let store = corae::store::Store::new(root.join("data"));
    let template_path = write_study_inputs(root);
    corae::admin::cmd_create_project(&store, project, &template_path).unwrap();
    install_media(&store, project);
    corae::admin::cmd_stage(&store, project).unwrap();
    let template = corae::admin::cmd_publish(&store, project).unwrap();
    (store, template)
}

/// Last path segment of a minted URL.
pub fn token_of(url: &str) -> String {
    url.rsplit('/').next().unwrap().to_string()
}

/// A default-scale log at neutral from frame 0, then one rating change per
/// `(frame, rating)` pair. Only the rating trace is meaningful.
pub fn step_log(changes: &[(u64, i32)], fps: u32, duration: f64) -> SessionLog {
    let template = published_template("p", RatingScale::default(), 1.0, fps);
    let mut events = vec![event(0, 0, fps, Cause::IntervalTick)];
    events.extend(
        changes
            .iter()
            .map(|&(f, r)| event(r, f, fps, Cause::RatingChange)),
    );
    SessionLog {
        session_token: "t".into(),
        participant_id: None,
        project_id: template.project_id.clone(),
        scale: template.scale.clone(),
        logging_interval: 1.0,
        fps,
        media_duration: duration,
        events,
    }
}
