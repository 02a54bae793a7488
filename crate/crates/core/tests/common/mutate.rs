//! Single-defect edits to a valid engine log.

use corae::model::{AnnotationEvent, Cause, SessionLog};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Replaces one rating change with a two-step jump from the previous rating.
pub fn step_jump<R: Rng>(rng: &mut R, log: &SessionLog) -> Option<SessionLog> {
    let changes: Vec<usize> = indices(log, Cause::RatingChange);
    let &i = changes.choose(rng)?;
    let prev = log.events[i - 1].rating;
    let step = log.scale.step();
    let jumped = [prev + 2 * step, prev - 2 * step]
        .into_iter()
        .find(|&r| log.scale.is_admissible(r))?;
    let mut out = log.clone();
    out.events[i].rating = jumped;
    Some(out)
}

/// Inserts a one-step change inside a paused stretch. The log always opens
/// paused, so the stretch before the first toggle is always available.
pub fn paused_change<R: Rng>(rng: &mut R, log: &SessionLog) -> Option<SessionLog> {
    let mut playing = false;
    let mut slots = Vec::new();
    for (i, e) in log.events.iter().enumerate() {
        if e.cause == Cause::PlaybackToggle {
            if !playing {
                // directly before a resume, the player is still paused
                slots.push(i);
            }
            playing = !playing;
        }
    }
    if !playing {
        slots.push(log.events.len());
    }
    let &at = slots.choose(rng)?;
    let prev = &log.events[at - 1];
    let step = log.scale.step();
    let rating = [prev.rating + step, prev.rating - step]
        .into_iter()
        .find(|&r| log.scale.is_admissible(r))?;
    let mut out = log.clone();
    out.events.insert(
        at,
        AnnotationEvent {
            rating,
            timecode: prev.timecode,
            cause: Cause::RatingChange,
            wall_clock: prev.wall_clock,
        },
    );
    Some(out)
}

/// Drops one interval tick other than the head event.
pub fn remove_tick<R: Rng>(rng: &mut R, log: &SessionLog) -> Option<SessionLog> {
    let ticks: Vec<usize> = indices(log, Cause::IntervalTick)
        .into_iter()
        .filter(|&i| i > 0)
        .collect();
    let &i = ticks.choose(rng)?;
    let mut out = log.clone();
    out.events.remove(i);
    Some(out)
}

fn indices(log: &SessionLog, cause: Cause) -> Vec<usize> {
    log.events
        .iter()
        .enumerate()
        .filter(|(_, e)| e.cause == cause)
        .map(|(i, _)| i)
        .collect()
}
