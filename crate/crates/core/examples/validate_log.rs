//! Checks a log file against the engine contract.
//!
//! ```sh
//! cargo run --example validate_log -- path/to/log.corae.json
//! ```
//!
//! Without an argument it builds a clean log, damages it in three ways and
//! reports each version.

use corae::model::{Cause, ProjectState, ProjectTemplate, SessionLog};
use corae::{decode_canonical, validate_log, Direction, RatingEngine};

fn report(label: &str, log: &SessionLog) {
    let r = validate_log(log);
    println!(
        "{label}: {} violation(s), {} note(s)",
        r.violations.len(),
        r.notes.len()
    );
    for v in &r.violations {
        let at = v
            .index
            .map_or("header".to_string(), |i| format!("event {i}"));
        println!("  {:<22} {at}  {:?}", v.kind.name(), v.kind);
    }
}

fn sample() -> SessionLog {
    let mut template = ProjectTemplate::new("demo");
    template.media_entries.insert("A".into(), "clip.mp4".into());
    template.state = ProjectState::Published;
    let mut engine = RatingEngine::init(&template, 6.0).unwrap();
    engine.toggle_playback().unwrap();
    engine.advance_to_seconds(0.5).unwrap();
    engine.adjust(Direction::Up).unwrap();
    engine.advance_to_seconds(2.5).unwrap();
    engine.adjust(Direction::Up).unwrap();
    engine.advance_to_seconds(6.0).unwrap();
    engine.into_log("demo-token", None)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if let Some(path) = std::env::args().nth(1) {
        let log = decode_canonical(&std::fs::read(&path)?)?;
        report(&path, &log);
        return Ok(());
    }

    let clean = sample();
    report("clean", &clean);

    let mut jump = clean.clone();
    let i = jump
        .events
        .iter()
        .position(|e| e.cause == Cause::RatingChange)
        .unwrap();
    jump.events[i].rating += 2;
    report("step jump", &jump);

    let mut gap = clean.clone();
    gap.events
        .retain(|e| e.timecode.to_seconds() < 2.0 || e.timecode.to_seconds() > 4.5);
    report("ticks dropped", &gap);

    let mut paused = clean;
    let mut ev = paused.events[0].clone();
    ev.rating = 1;
    ev.cause = Cause::RatingChange;
    paused.events.insert(1, ev);
    report("change while paused", &paused);
    Ok(())
}
