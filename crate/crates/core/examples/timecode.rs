//! Frame-accurate timecodes: parsing, formatting and conversion.
//!
//! ```sh
//! cargo run --example timecode -- 00:01:02:15 25
//! ```

use corae::{seconds_to_timecode, timecode_to_seconds, TimeCode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let text = args.next().unwrap_or_else(|| "00:01:02:15".to_string());
    let fps: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(30);

    let tc = TimeCode::parse(&text, fps)?;
    println!("{tc} @ {fps} fps");
    println!("  frame index  {}", tc.total_frames());
    println!("  seconds      {}", timecode_to_seconds(&tc));

    // positions from a media element land on the frame that is showing
    for t in [0.0, 1.0 / f64::from(fps), 61.999, 3599.99] {
        println!("  {t:>10.4} s -> {}", seconds_to_timecode(t, fps)?);
    }

    let a = TimeCode::from_frames(29, 30)?;
    let b = TimeCode::from_frames(25, 25)?;
    println!("{a}@30 < {b}@25: {}", a < b);
    Ok(())
}
