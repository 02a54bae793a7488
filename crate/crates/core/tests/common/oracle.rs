//! Reference computations in exact integer arithmetic.
//!
//! Everything here works on integer data, accumulates in `i128` and only
//! turns into `f64` at the final division, so the single rounding error is
//! far below the tolerances the library is held to.

/// Slope, intercept and R² of `S_n` on `n`, where `S` is the running sum
/// of `values`, from the raw normal equations.
pub fn ip_normal_equations(values: &[i32]) -> (f64, f64, f64) {
    let n = values.len() as i128;
    let mut s = 0i128;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for (i, &v) in values.iter().enumerate() {
        s += i128::from(v);
        let x = i as i128;
        sx += x;
        sy += s;
        sxx += x * x;
        sxy += x * s;
        syy += s * s;
    }
    let num = n * sxy - sx * sy;
    let den = n * sxx - sx * sx;
    let var_y = n * syy - sy * sy;
    let slope = num as f64 / den as f64;
    // b = (sy * den - num * sx) / (n * den), numerator kept exact
    let intercept = (sy * den - num * sx) as f64 / (n * den) as f64;
    let r_squared = if var_y == 0 {
        1.0
    } else {
        // num^2 can overflow i128 for long series; the ratio of two exact
        // products is rounded twice at most
        (num as f64 / den as f64) * (num as f64 / var_y as f64)
    };
    (slope, intercept, r_squared)
}

/// Definitional Pearson r on integer vectors.
pub fn pearson_exact(x: &[i64], y: &[i64]) -> f64 {
    let n = x.len() as i128;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for (&a, &b) in x.iter().zip(y) {
        let (a, b) = (i128::from(a), i128::from(b));
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    let cov = n * sxy - sx * sy;
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    cov as f64 / ((vx as f64) * (vy as f64)).sqrt()
}

/// Zero-order hold by integer comparison: a change at frame `f` (of a
/// `fps` stream) is visible at grid point `k` of a `1/rate` s grid when
/// `f / fps <= k / rate`, i.e. `f * rate <= k * fps`.
pub fn zoh_grid(
    changes: &[(u64, i32)],
    initial: i32,
    fps: u64,
    rate: u64,
    count: usize,
) -> Vec<i32> {
    (0..count as u64)
        .map(|k| {
            changes
                .iter()
                .rev()
                .find(|(f, _)| f * rate <= k * fps)
                .map_or(initial, |&(_, r)| r)
        })
        .collect()
}

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        ((actual - expected) / expected).abs()
    }
}
