//! Writes a session log in the canonical format, reads it back, and emits
//! the flat rating/timecode export.

use corae::codec::log_file_name;
use corae::model::{ProjectState, ProjectTemplate};
use corae::{decode_canonical, encode_canonical, export_flat_format, Direction, RatingEngine};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut template = ProjectTemplate::new("demo");
    template.media_entries.insert("A".into(), "clip.mp4".into());
    template.state = ProjectState::Published;

    let mut engine = RatingEngine::init(&template, 3.0)?;
    engine.set_wall_clock(Some(0.0));
    engine.toggle_playback().map_err(|r| format!("{r:?}"))?;
    engine.set_wall_clock(Some(0.52));
    engine.advance_to_seconds(0.5)?;
    engine
        .adjust(Direction::Down)
        .map_err(|r| format!("{r:?}"))?;
    engine.set_wall_clock(Some(3.04));
    engine.advance_to_seconds(3.0)?;
    let log = engine.into_log("k3JmQ1y0TQ2vLrB5bq9Y8w", Some("P07".into()));

    let bytes = encode_canonical(&log)?;
    println!("{}:", log_file_name(&log.project_id, &log.session_token));
    print!("{}", String::from_utf8_lossy(&bytes));

    let back = decode_canonical(&bytes)?;
    assert_eq!(back, log);
    assert_eq!(encode_canonical(&back)?, bytes);

    println!("\nflat export:");
    println!("{}", String::from_utf8_lossy(&export_flat_format(&log)));
    Ok(())
}
