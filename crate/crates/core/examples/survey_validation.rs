//! Correlates each session's IP with a static post-session rating.
//!
//! Generates 24 synthetic annotators whose traces hover around a personal
//! tone, and a 1..7 survey answer that follows their mean rating with noise.

use corae::model::{ProjectState, ProjectTemplate, SessionLog};
use corae::{validate_against_survey, Direction, RatingEngine};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn annotate(rng: &mut ChaCha8Rng, template: &ProjectTemplate, tone: f64) -> SessionLog {
    let duration = rng.random_range(90.0..150.0);
    let mut engine = RatingEngine::init(template, duration).unwrap();
    engine.toggle_playback().unwrap();
    let mut t: f64 = 0.0;
    let mut target = tone;
    while !engine.state().finished {
        t += rng.random_range(0.2..0.6);
        target = (target + rng.random_range(-0.35..=0.35)).clamp(tone - 2.0, tone + 2.0);
        engine.advance_to_seconds(t.min(duration)).unwrap();
        let current = engine.state().current_rating;
        let goal = target.round() as i32;
        if goal > current {
            let _ = engine.adjust(Direction::Up);
        } else if goal < current {
            let _ = engine.adjust(Direction::Down);
        }
    }
    engine.into_log(format!("s{:02}", rng.random_range(0..100)), None)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut template = ProjectTemplate::new("survey");
    template.media_entries.insert("A".into(), "clip.mp4".into());
    template.state = ProjectState::Published;

    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(7u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.5)?;

    let mut sessions = Vec::new();
    for _ in 0..24 {
        let tone = rng.random_range(-4.0..4.0);
        let log = annotate(&mut rng, &template, tone);
        let mean =
            log.events.iter().map(|e| f64::from(e.rating)).sum::<f64>() / log.events.len() as f64;
        let answer = (4.0 + 0.75 * mean + noise.sample(&mut rng))
            .round()
            .clamp(1.0, 7.0) as i32;
        sessions.push((log, answer));
    }

    let result = validate_against_survey(&sessions)?;
    for ((_, answer), ip) in sessions.iter().zip(&result.ip) {
        println!("IP {ip:>7.3}   survey {answer}");
    }
    println!("Pearson r = {:.3} (seed {seed})", result.r);
    Ok(())
}
