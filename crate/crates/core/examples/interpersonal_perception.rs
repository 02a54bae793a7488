//! Resamples a session at 10 Hz and fits Interpersonal Perception (IP): the
//! least-squares slope of the cumulative rating curve.
//!
//! ```sh
//! cargo run --example interpersonal_perception -- [log.corae.json]
//! ```

use corae::analysis::{cause_counts, DEFAULT_PERIOD};
use corae::model::{ProjectState, ProjectTemplate, SessionLog};
use corae::{
    click_rate, decode_canonical, interpersonal_perception, interpersonal_perception_timed,
    rating_range, resample, Direction, RatingEngine,
};

/// Warms up to +3 over the first half, then cools to -1.
fn sample() -> SessionLog {
    let mut template = ProjectTemplate::new("demo");
    template.media_entries.insert("A".into(), "clip.mp4".into());
    template.state = ProjectState::Published;
    let mut engine = RatingEngine::init(&template, 60.0).unwrap();
    engine.toggle_playback().unwrap();
    for (t, dir) in [
        (4.0, Direction::Up),
        (9.5, Direction::Up),
        (15.0, Direction::Up),
        (33.0, Direction::Down),
        (37.0, Direction::Down),
        (41.0, Direction::Down),
        (48.0, Direction::Down),
    ] {
        engine.advance_to_seconds(t).unwrap();
        engine.adjust(dir).unwrap();
    }
    engine.advance_to_seconds(60.0).unwrap();
    engine.into_log("demo", None)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let log = match std::env::args().nth(1) {
        Some(path) => decode_canonical(&std::fs::read(path)?)?,
        None => sample(),
    };
    let series = resample(&log, DEFAULT_PERIOD)?;
    let ip = interpersonal_perception(&series)?;
    println!("{} samples at {} s", series.len(), series.period);
    println!("IP slope   {:.4}", ip.slope);
    println!("intercept  {:.4}", ip.intercept);
    println!("R^2        {:.4}", ip.r_squared);

    // the same fit in seconds, and at twice the sampling rate
    let fine = resample(&log, 0.05)?;
    println!(
        "per-second slope at 0.1 s {:.4}, at 0.05 s {:.4}",
        interpersonal_perception_timed(&series)?.slope,
        interpersonal_perception_timed(&fine)?.slope
    );

    match click_rate(&log) {
        Ok(c) => println!("click rate {c:.2} s between changes"),
        Err(e) => println!("click rate: {e}"),
    }
    println!("rating range {}", rating_range(&log)?);
    for (cause, n) in cause_counts(&log) {
        println!("  {:<16} {n}", cause.as_str());
    }

    let cum = series.cumulative_sum();
    for k in (0..series.len()).step_by(100) {
        println!("  t={:>5.1} s  S={}", series.time_at(k), cum[k]);
    }
    Ok(())
}
