//! Drives the rating engine through a short scripted session and prints
//! every event it logs.

use corae::engine::EngineError;
use corae::model::{ProjectState, ProjectTemplate};
use corae::{validate_log, Direction, RatingEngine, Rejection};

fn main() -> Result<(), EngineError> {
    let mut template = ProjectTemplate::new("demo");
    template.media_entries.insert("A".into(), "clip.mp4".into());
    template.state = ProjectState::Published;

    let mut engine = RatingEngine::init(&template, 8.0)?;

    // rating while paused is refused
    assert_eq!(engine.adjust(Direction::Up), Err(Rejection::Paused));

    engine
        .toggle_playback()
        .map_err(|_| EngineError::Finished)?;
    engine.advance_to_seconds(1.4)?;
    for _ in 0..3 {
        let _ = engine.adjust(Direction::Up);
    }
    engine.advance_to_seconds(3.2)?;
    let _ = engine.adjust(Direction::Down);
    engine
        .toggle_playback()
        .map_err(|_| EngineError::Finished)?;
    engine
        .toggle_playback()
        .map_err(|_| EngineError::Finished)?;
    engine.advance_to_seconds(8.0)?;

    let state = engine.state();
    println!(
        "finished={} rating={} position={}",
        state.finished, state.current_rating, state.media_position
    );
    for e in engine.events() {
        println!("{}  {:>3}  {}", e.timecode, e.rating, e.cause.as_str());
    }

    let log = engine.into_log("demo-token", Some("P01".into()));
    println!("violations: {}", validate_log(&log).violations.len());
    Ok(())
}
