//! Mean squared disagreement between the two members of a dyad, over the
//! stretch both of them rated.

use corae::{dyad_disagreement, RatingSeries};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 10 Hz traces; B drifts one step more negative halfway through and
    // stops two seconds earlier
    let a: Vec<i32> = (0..300).map(|k| if k < 150 { 2 } else { 1 }).collect();
    let b: Vec<i32> = (0..280).map(|k| if k < 150 { 2 } else { 0 }).collect();
    let sa = RatingSeries::new(0.1, a)?;
    let sb = RatingSeries::new(0.1, b)?;

    let mse = dyad_disagreement(&sa, &sb)?;
    println!("overlap {} samples, MSE {mse:.4}", sa.len().min(sb.len()));
    println!("self MSE {}", dyad_disagreement(&sa, &sa)?);

    let other_rate = RatingSeries::new(0.05, vec![0; 10])?;
    println!(
        "mixed periods: {}",
        dyad_disagreement(&sa, &other_rate).unwrap_err()
    );
    Ok(())
}
